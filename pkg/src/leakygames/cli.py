"""Command-line front end: solver dispatch, experiment runs, fixtures,
and the repetition-count parameter calculator.

Commands write a human-readable table to stdout and, with --out, a
machine-readable artifact (CSV or JSON per --format).  Artifacts are byte
reproducible from (arguments, seed): no timestamps, fixed column order,
rationals rendered as p/q next to a float column.

Exit codes: 0 ok, 2 invalid input, 3 budget exceeded, 4 generator cap
exhausted.
"""

from __future__ import annotations

import argparse
import csv as csv_mod
import io
import itertools
import json
import random
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

from . import csp as csp_mod
from . import games, harness, leakage, repetition
from .errors import (BudgetExceededError, GeneratorCapError,
                     InvalidInputError)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_GENERATOR_CAP = 4


# ---------------------------------------------------------------------------
# parameter calculator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParamReport:
    """Repetition-count arithmetic for a leakage-robust protocol.

    Repeating a base game k*max(leak_bits, 1) times multiplies question and
    answer sizes by the repetition count, and the claimed soundness is
    2^leak_bits times the heuristic decay curve at that count.  ``vacuous``
    flags claims that the clamp made meaningless.
    """

    leak_bits: int
    answer_bits: int
    epsilon: float
    k_multiplier: int
    c_exp: float
    c_rate: float
    repetitions: int
    repeated_answer_bits: int
    repeated_question_bits: int | None
    pre_clamp: float
    soundness_claim: float
    vacuous: bool


def compute_params(leak_bits: int, answer_bits: int, epsilon: float,
                   k_multiplier: int, c_exp: float = 1.0,
                   c_rate: float = 1.0 / 16.0,
                   question_bits: int | None = None) -> ParamReport:
    """Pure function of its inputs; see ParamReport."""
    if not 0 < epsilon <= 0.5:
        raise InvalidInputError("epsilon must be in (0, 1/2]")
    if leak_bits < 0 or k_multiplier < 1 or answer_bits < 0:
        raise InvalidInputError("leak_bits, answer_bits >= 0 and k >= 1")
    reps = k_multiplier * max(leak_bits, 1)
    params = repetition.RepetitionBoundParams(
        epsilon=epsilon, s=2 * answer_bits + 1, c_exp=c_exp, c_rate=c_rate)
    pre = (2.0 ** leak_bits) * repetition.repetition_bound(params, reps)
    return ParamReport(
        leak_bits=leak_bits, answer_bits=answer_bits, epsilon=epsilon,
        k_multiplier=k_multiplier, c_exp=c_exp, c_rate=c_rate,
        repetitions=reps,
        repeated_answer_bits=reps * answer_bits,
        repeated_question_bits=(reps * question_bits
                                if question_bits is not None else None),
        pre_clamp=pre,
        soundness_claim=min(1.0, pre),
        vacuous=pre >= 1.0)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"cannot parse fraction {text!r}") from None


def _read_file(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read {path}: {exc}") from None


def _frac_cols(value: Fraction) -> tuple[str, str]:
    return f"{value.numerator}/{value.denominator}", repr(float(value))


def _seq(values) -> str:
    return ",".join(str(v) for v in values)


def _load_game(path: str) -> games.Game:
    return games.load_game(_read_file(path))


def _load_csp(path: str) -> csp_mod.CspInstance | csp_mod.LabelCover:
    return csp_mod.load_instance(_read_file(path))


def _build_model(args) -> leakage.LeakageModel:
    kind = {
        "one-way-ab": leakage.LeakageKind.ONE_WAY_AB,
        "one-way-ba": leakage.LeakageKind.ONE_WAY_BA,
        "simultaneous": leakage.LeakageKind.SIMULTANEOUS,
    }[args.model]
    return leakage.LeakageModel(kind, args.bits_ab, args.bits_ba)


def _emit(args, command: str, columns: list[str], rows: list[dict]) -> None:
    widths = {c: max(len(c), *(len(str(r.get(c, ""))) for r in rows))
              for c in columns}
    header = "  ".join(c.ljust(widths[c]) for c in columns)
    print(header)
    print("-" * len(header))
    for r in rows:
        print("  ".join(str(r.get(c, "")).ljust(widths[c]) for c in columns))

    if not args.out:
        return
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv_mod.DictWriter(buf, fieldnames=columns,
                                    lineterminator="\n")
        writer.writeheader()
        for r in rows:
            writer.writerow({c: r.get(c, "") for c in columns})
        (out_dir / f"{command}.csv").write_text(buf.getvalue())
    else:
        doc = {"command": command, "rows": rows}
        (out_dir / f"{command}.json").write_text(
            json.dumps(doc, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_value(args) -> int:
    g = _load_game(args.game)
    budget = args.budget or games.DEFAULT_PAIR_BUDGET
    value, witness = games.classical_value(g, budget)
    merged = games.merged_prover_value(g)
    pq, fl = _frac_cols(value)
    mq, mf = _frac_cols(merged)
    rows = [{"instance": harness.instance_id(g), "value": pq,
             "value_float": fl, "merged_value": mq, "merged_float": mf,
             "alice": _seq(witness.alice), "bob": _seq(witness.bob)}]
    _emit(args, "value", ["instance", "value", "value_float", "merged_value",
                          "merged_float", "alice", "bob"], rows)
    return EXIT_OK


def cmd_leaky_value(args) -> int:
    g = _load_game(args.game)
    model = _build_model(args)
    budget = args.budget or leakage.DEFAULT_LEAKY_BUDGET
    value, witness = leakage.leaky_value_exact(g, model, budget)
    cap = leakage.leaky_value_upper_bound(g, model.total_bits)
    pq, fl = _frac_cols(value)
    cq, cf = _frac_cols(cap)
    rows = [{"instance": harness.instance_id(g), "model": args.model,
             "bits_ab": model.bits_ab, "bits_ba": model.bits_ba,
             "value": pq, "value_float": fl, "upper_bound": cq,
             "upper_bound_float": cf,
             "alice_msg": _seq(witness.alice_msg),
             "bob_msg": _seq(witness.bob_msg),
             "alice_ans": ";".join(_seq(r) for r in witness.alice_ans),
             "bob_ans": ";".join(_seq(r) for r in witness.bob_ans)}]
    _emit(args, "leaky-value",
          ["instance", "model", "bits_ab", "bits_ba", "value", "value_float",
           "upper_bound", "upper_bound_float", "alice_msg", "bob_msg",
           "alice_ans", "bob_ans"], rows)
    return EXIT_OK


def cmd_repeat(args) -> int:
    g = _load_game(args.game)
    budget = args.budget or games.DEFAULT_PAIR_BUDGET
    rg = repetition.repeat_game(g, args.copies)
    value, witness = repetition.repeated_exact_value(rg, budget)
    base_value, base_witness = games.classical_value(g, budget)
    lower = base_value ** args.copies
    pq, fl = _frac_cols(value)
    lq, lf = _frac_cols(lower)
    bq, bf = _frac_cols(base_value)
    rows = [{"instance": harness.instance_id(rg), "copies": args.copies,
             "value": pq, "value_float": fl,
             "base_value": bq, "base_float": bf,
             "product_lower": lq, "product_lower_float": lf,
             "alice": _seq(witness.alice), "bob": _seq(witness.bob)}]
    _emit(args, "repeat",
          ["instance", "copies", "value", "value_float", "base_value",
           "base_float", "product_lower", "product_lower_float",
           "alice", "bob"], rows)
    return EXIT_OK


def cmd_csp_val(args) -> int:
    loaded = _load_csp(args.csp)
    c = loaded.to_csp() if isinstance(loaded, csp_mod.LabelCover) else loaded
    budget = args.budget or csp_mod.DEFAULT_ASSIGNMENT_BUDGET
    if args.local_search:
        value, witness = csp_mod.csp_value_local_search(
            c, args.seed, args.restarts)
        method = "local-search"
    else:
        value, witness = csp_mod.csp_value_exact(c, budget)
        method = "exact"
    pq, fl = _frac_cols(value)
    rows = [{"instance": harness.instance_id(c), "method": method,
             "value": pq, "value_float": fl, "assignment": _seq(witness)}]
    _emit(args, "csp-val",
          ["instance", "method", "value", "value_float", "assignment"], rows)
    return EXIT_OK


def cmd_cheat(args) -> int:
    loaded = _load_csp(args.csp)
    c = loaded.to_csp() if isinstance(loaded, csp_mod.LabelCover) else loaded
    budget = args.budget or csp_mod.DEFAULT_CHEAT_BUDGET
    value, profile = csp_mod.optimal_cheat(c, args.leak_bits, budget)
    cap = 1 - Fraction(1, 2 * c.arity)
    pq, fl = _frac_cols(value)
    cq, cf = _frac_cols(cap)
    rows = [{"instance": harness.instance_id(c), "leak_bits": args.leak_bits,
             "value": pq, "value_float": fl,
             "soundness_cap": cq, "soundness_cap_float": cf,
             "within_cap": value <= cap,
             "profile": "|".join(_seq(a) for a in profile.assignments)}]
    _emit(args, "cheat",
          ["instance", "leak_bits", "value", "value_float", "soundness_cap",
           "soundness_cap_float", "within_cap", "profile"], rows)
    return EXIT_OK


def _behaviors_for_run(config: dict, target, model, budget):
    behavior = config.get("behavior", "honest")
    if isinstance(target, csp_mod.CspInstance):
        if behavior == "honest":
            value, witness = csp_mod.csp_value_exact(
                target, budget or csp_mod.DEFAULT_ASSIGNMENT_BUDGET)
            if value != 1:
                raise InvalidInputError(
                    "honest csp behavior needs a satisfiable instance")
            return harness.honest_csp_behaviors(target, witness), "honest"
        if behavior == "cheat":
            _, profile = csp_mod.optimal_cheat(
                target, model.bits_ab, budget or csp_mod.DEFAULT_CHEAT_BUDGET)
            return (harness.behaviors_from_cheat_profile(target, profile),
                    "optimal-cheat")
        raise InvalidInputError(f"unknown csp behavior {behavior!r}")
    if behavior == "honest":
        _, witness = games.classical_value(
            target, budget or games.DEFAULT_PAIR_BUDGET)
        return harness.behaviors_from_strategy_pair(witness), "best-classical"
    if behavior == "leaky":
        _, witness = leakage.leaky_value_exact(
            target, model, budget or leakage.DEFAULT_LEAKY_BUDGET)
        return (harness.behaviors_from_leaky_strategy(model, witness),
                "best-leaky")
    raise InvalidInputError(f"unknown game behavior {behavior!r}")


def cmd_run(args) -> int:
    try:
        config = json.loads(_read_file(args.config))
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"bad config json: {exc}") from None
    for key in ("kind", "path", "sessions"):
        if key not in config:
            raise InvalidInputError(f"config missing {key!r}")
    model_spec = config.get("model", {})
    ns = argparse.Namespace(
        model=model_spec.get("kind", "one-way-ab"),
        bits_ab=model_spec.get("bits_ab", 0),
        bits_ba=model_spec.get("bits_ba", 0))
    model = _build_model(ns)
    if config["kind"] == "game":
        target = games.load_game(_read_file(config["path"]))
    elif config["kind"] == "csp":
        loaded = csp_mod.load_instance(_read_file(config["path"]))
        target = (loaded.to_csp()
                  if isinstance(loaded, csp_mod.LabelCover) else loaded)
    else:
        raise InvalidInputError("config kind must be 'game' or 'csp'")
    seed = config.get("seed", args.seed)
    sessions = int(config["sessions"])
    behaviors, label = _behaviors_for_run(config, target, model, args.budget)
    record = harness.estimate_acceptance(target, behaviors, model,
                                         sessions, seed)
    pq, _ = _frac_cols(record.estimate_exact)
    rows = [{"instance": harness.instance_id(target), "behavior": label,
             "model": ns.model, "bits_ab": model.bits_ab,
             "bits_ba": model.bits_ba, "sessions": record.sessions,
             "accepted": record.accepted, "estimate": pq,
             "estimate_float": repr(record.estimate),
             "half_width": repr(record.half_width),
             "master_seed": record.master_seed}]
    _emit(args, "run",
          ["instance", "behavior", "model", "bits_ab", "bits_ba", "sessions",
           "accepted", "estimate", "estimate_float", "half_width",
           "master_seed"], rows)
    return EXIT_OK


def cmd_params(args) -> int:
    report = compute_params(args.leak_bits, args.answer_bits, args.epsilon,
                            args.k, args.c_exp, args.c_rate,
                            args.question_bits)
    row = asdict(report)
    row["pre_clamp"] = repr(report.pre_clamp)
    row["soundness_claim"] = repr(report.soundness_claim)
    columns = list(row)
    _emit(args, "params", columns, [row])
    return EXIT_OK


def cmd_gen(args) -> int:
    rng = random.Random(args.seed)
    if args.kind == "game":
        x, y, a, b = args.sizes
        weights = [rng.randrange(1, 4) for _ in range(x * y)]
        bits = [rng.randrange(2) for _ in range(x * y * a * b)]
        g = games.make_game(f"random-{args.seed}", x, y, a, b, weights,
                            lambda xx, yy, aa, bb:
                            bits[((xx * y + yy) * a + aa) * b + bb])
        text = games.save_game(g)
        name = f"random-{args.seed}.game"
    elif args.kind == "csp":
        tuples = list(itertools.product(range(args.alphabet),
                                        repeat=args.arity))
        cons = []
        for _ in range(args.constraints or 4 * args.vars):
            scope = tuple(rng.randrange(args.vars) for _ in range(args.arity))
            allowed = rng.sample(tuples, min(2, len(tuples)))
            cons.append(csp_mod.make_constraint(scope, allowed))
        c = csp_mod.CspInstance(args.vars, args.alphabet, args.arity,
                                tuple(cons))
        text = csp_mod.save_csp(c)
        name = f"random-{args.seed}.csp"
    else:  # low-val-csp
        target = parse_fraction(args.target)
        instance, value = csp_mod.find_low_value_instance(
            args.vars, args.alphabet, args.arity, target, args.seed,
            num_constraints=args.constraints, attempts=args.attempts,
            budget=args.budget or csp_mod.DEFAULT_ASSIGNMENT_BUDGET)
        text = (f"# certified value {value.numerator}/{value.denominator}"
                f" <= {args.target}\n") + csp_mod.save_csp(instance)
        name = f"lowval-{args.seed}.csp"

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / name
        path.write_text(text)
        print(path)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="leakygames",
        description="Exact values and leakage robustness for two-prover "
                    "one-round games at desk scale.")
    parser.add_argument("--seed", type=int, default=0,
                        help="master seed (default 0)")
    parser.add_argument("--budget", type=int, default=None,
                        help="enumeration budget override")
    parser.add_argument("--out", default=None, help="artifact directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="artifact format (default csv)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="exact classical value of a game")
    p.add_argument("game")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("leaky-value", help="exact value under a leakage model")
    p.add_argument("game")
    p.add_argument("--model", default="one-way-ab",
                   choices=("one-way-ab", "one-way-ba", "simultaneous"))
    p.add_argument("--bits-ab", type=int, default=0)
    p.add_argument("--bits-ba", type=int, default=0)
    p.set_defaults(func=cmd_leaky_value)

    p = sub.add_parser("repeat", help="exact value of the N-fold repetition")
    p.add_argument("game")
    p.add_argument("-n", "--copies", type=int, required=True)
    p.set_defaults(func=cmd_repeat)

    p = sub.add_parser("csp-val", help="exact or local-search CSP value")
    p.add_argument("csp")
    p.add_argument("--local-search", action="store_true")
    p.add_argument("--restarts", type=int, default=10)
    p.set_defaults(func=cmd_csp_val)

    p = sub.add_parser("cheat", help="optimal one-way-leakage cheat value")
    p.add_argument("csp")
    p.add_argument("--leak-bits", type=int, default=1)
    p.set_defaults(func=cmd_cheat)

    p = sub.add_parser("run", help="Monte Carlo protocol sessions from a "
                                   "JSON config")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("params", help="repetition-count parameter calculator")
    p.add_argument("--leak-bits", type=int, required=True)
    p.add_argument("--answer-bits", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("-k", type=int, required=True)
    p.add_argument("--c-exp", type=float, default=1.0)
    p.add_argument("--c-rate", type=float, default=1.0 / 16.0)
    p.add_argument("--question-bits", type=int, default=None)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("gen", help="generate fixture files")
    p.add_argument("--kind", choices=("game", "csp", "low-val-csp"),
                   required=True)
    p.add_argument("--sizes", type=int, nargs=4, default=(2, 2, 2, 2),
                   metavar=("X", "Y", "A", "B"))
    p.add_argument("--vars", type=int, default=6)
    p.add_argument("--alphabet", type=int, default=2)
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("--constraints", type=int, default=None)
    p.add_argument("--target", default="1/4")
    p.add_argument("--attempts", type=int, default=200)
    p.set_defaults(func=cmd_gen)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error (budget): {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except GeneratorCapError as exc:
        print(f"error (generator cap): {exc}", file=sys.stderr)
        return EXIT_GENERATOR_CAP
    except InvalidInputError as exc:
        print(f"error (invalid input): {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
