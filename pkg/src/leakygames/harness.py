"""Session-level simulation of verifier-prover protocols with metered leakage.

Sessions run in-process with an explicit ordered message schedule.  The
channel meters every bit a prover attempts to send; overflow attempts are
recorded, rejected, and force the session verdict to reject.  Behaviors are
deterministic functions of (own question, received bits), so acceptance per
question cell is a pure quantity and Monte Carlo estimation reduces to
seeded question sampling.

Randomness comes from SplitMix64 used as a counter-based generator: output
j of the stream keyed by ``seed`` is mix(seed + (j+1)*golden), so streams
are splittable (sessions get independent 64-bit seeds derived from the
master seed and the session index) and reproducible across platforms.
"""

from __future__ import annotations

import hashlib
import json
import math
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .csp import CheatProfile, CspInstance, LabelCover, best_response, save_csp, save_label_cover
from .errors import InvalidInputError
from .games import Game, StrategyPair, save_game
from .leakage import LeakageKind, LeakageModel, LeakyStrategy

Z_99 = 2.5758293035489004  # two-sided 99% normal quantile


class MalformedBehaviorError(InvalidInputError):
    """A behavior produced a payload or answer outside its contract."""


class IdentifierMismatchError(InvalidInputError):
    """A transcript was replayed against a different game or instance."""


# ---------------------------------------------------------------------------
# counter-based RNG (SplitMix64)
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(seed: int, counter: int) -> int:
    """The counter-th 64-bit output of the SplitMix64 stream keyed by seed."""
    z = (seed + _GOLDEN * (counter + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def session_seed(master_seed: int, index: int) -> int:
    """Split the master stream: independent 64-bit seed per session."""
    return splitmix64(master_seed & _MASK64, index)


class SplitMixStream:
    """Sequential view over one SplitMix64 stream."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        self.counter = 0

    def next_u64(self) -> int:
        value = splitmix64(self.seed, self.counter)
        self.counter += 1
        return value

    def below(self, n: int) -> int:
        """Unbiased uniform draw in [0, n) by rejection."""
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n


def _splitmix64_np(seeds: np.ndarray, counters: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64; bit-identical to the scalar version."""
    z = seeds + np.uint64(_GOLDEN) * (counters + np.uint64(1))
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _below_np(seeds: np.ndarray, counters: np.ndarray, n: int) -> np.ndarray:
    """Vectorized stream.below(n): same draws, same rejections, per session."""
    limit = (1 << 64) - ((1 << 64) % n)
    accept_all = limit == (1 << 64)
    out = np.zeros(len(seeds), dtype=np.uint64)
    pending = np.arange(len(seeds))
    while len(pending):
        draws = _splitmix64_np(seeds[pending], counters[pending])
        counters[pending] += np.uint64(1)
        if accept_all:
            ok = np.ones(len(pending), dtype=bool)
        else:
            ok = draws < np.uint64(limit)
        out[pending[ok]] = draws[ok] % np.uint64(n)
        pending = pending[~ok]
    return out


# ---------------------------------------------------------------------------
# channel and behaviors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChannelEvent:
    """One send attempt.  Payload is the only information that crosses."""

    direction: str  # "ab" or "ba"
    payload: str    # bit-string


class MeteredChannel:
    """Per-direction bit budgets with cumulative metering.

    ``send`` delivers the payload only while the direction's budget holds;
    an overflow attempt is recorded in ``rejected``, flags the channel, and
    delivers nothing.  Spent counters never exceed the budgets.
    """

    def __init__(self, budget_ab: int, budget_ba: int):
        self.budget_ab = budget_ab
        self.budget_ba = budget_ba
        self.spent_ab = 0
        self.spent_ba = 0
        self.events: list[ChannelEvent] = []
        self.rejected: list[ChannelEvent] = []
        self.overflowed = False

    def send(self, direction: str, payload: str) -> str | None:
        if direction not in ("ab", "ba"):
            raise InvalidInputError(f"unknown direction {direction!r}")
        if not isinstance(payload, str) or any(c not in "01" for c in payload):
            raise MalformedBehaviorError(
                f"leak payload must be a bit-string, got {payload!r}")
        if not payload:
            return ""  # nothing crossed; nothing to meter or log
        event = ChannelEvent(direction, payload)
        spent = self.spent_ab if direction == "ab" else self.spent_ba
        budget = self.budget_ab if direction == "ab" else self.budget_ba
        if spent + len(payload) > budget:
            self.rejected.append(event)
            self.overflowed = True
            return None
        if direction == "ab":
            self.spent_ab += len(payload)
        else:
            self.spent_ba += len(payload)
        self.events.append(event)
        return payload


@dataclass(frozen=True)
class ProverBehavior:
    """Deterministic per-session behavior of one prover.

    ``answer_rule(own_question, received_bits)`` returns the answer (an int
    for games; a tuple of ints for the first prover in CSP sessions).
    ``leak_rule(own_question)`` returns the bit-string to send.  Rules must
    be pure; all session randomness lives in question sampling.
    """

    answer_rule: Callable[[int, str], Any]
    leak_rule: Callable[[int], str]
    role: str  # "first" or "second"

    def __post_init__(self):
        if self.role not in ("first", "second"):
            raise InvalidInputError("role must be 'first' or 'second'")


def _bits_to_int(bits: str) -> int:
    return int(bits, 2) if bits else 0


def _int_to_bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def silent_rule(_question: int) -> str:
    return ""


def behaviors_from_strategy_pair(s: StrategyPair
                                 ) -> tuple[ProverBehavior, ProverBehavior]:
    """Zero-leakage behaviors playing a fixed deterministic strategy pair."""
    first = ProverBehavior(lambda x, _m: s.alice[x], silent_rule, "first")
    second = ProverBehavior(lambda y, _m: s.bob[y], silent_rule, "second")
    return first, second


def behaviors_from_leaky_strategy(model: LeakageModel, s: LeakyStrategy
                                  ) -> tuple[ProverBehavior, ProverBehavior]:
    """Behaviors realizing a leaky strategy under its model."""
    first = ProverBehavior(
        lambda x, m: s.alice_ans[x][_bits_to_int(m)],
        lambda x: _int_to_bits(s.alice_msg[x], model.bits_ab),
        "first")
    second = ProverBehavior(
        lambda y, m: s.bob_ans[y][_bits_to_int(m)],
        lambda y: _int_to_bits(s.bob_msg[y], model.bits_ba),
        "second")
    return first, second


def behaviors_from_cheat_profile(c: CspInstance, profile: CheatProfile
                                 ) -> tuple[ProverBehavior, ProverBehavior]:
    """Cheating prover pair: first prover plays its exact best response,
    leaking the chosen message; second prover answers from the assignment
    selected by the received message."""
    response = best_response(c, profile)
    bits = profile.leak_bits
    first = ProverBehavior(
        lambda e, _m: response[e][1],
        lambda e: _int_to_bits(response[e][0], bits),
        "first")
    second = ProverBehavior(
        lambda var, m: profile.assignments[_bits_to_int(m)][var],
        silent_rule,
        "second")
    return first, second


def honest_csp_behaviors(c: CspInstance, assignment: tuple[int, ...]
                         ) -> tuple[ProverBehavior, ProverBehavior]:
    """Honest provers answering one global assignment, leaking nothing."""
    scopes = [con.scope for con in c.constraints]
    first = ProverBehavior(
        lambda e, _m: tuple(assignment[v] for v in scopes[e]),
        silent_rule, "first")
    second = ProverBehavior(
        lambda var, _m: assignment[var], silent_rule, "second")
    return first, second


# ---------------------------------------------------------------------------
# sessions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Transcript:
    """One session: questions, leakage, answers, verdict.  Replayable."""

    seed: int
    instance: str
    protocol: str  # "game" or "csp"
    question_first: int
    question_second: int
    position: int | None  # csp only: sampled scope position
    leaks: tuple[ChannelEvent, ...]
    rejected: tuple[ChannelEvent, ...]
    answer_first: Any
    answer_second: int
    overflow: bool
    verdict: bool

    def to_json(self) -> str:
        doc = {
            "seed": self.seed,
            "instance": self.instance,
            "protocol": self.protocol,
            "question_first": self.question_first,
            "question_second": self.question_second,
            "position": self.position,
            "leaks": [[e.direction, e.payload] for e in self.leaks],
            "rejected": [[e.direction, e.payload] for e in self.rejected],
            "answer_first": (list(self.answer_first)
                             if isinstance(self.answer_first, tuple)
                             else self.answer_first),
            "answer_second": self.answer_second,
            "overflow": self.overflow,
            "verdict": self.verdict,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def instance_id(target) -> str:
    """Stable identifier: name plus hash of the canonical serialization."""
    if isinstance(target, CspInstance):
        name, body = "csp", save_csp(target)
    elif isinstance(target, LabelCover):
        name, body = "label-cover", save_label_cover(target)
    elif isinstance(target, Game):
        name, body = target.name, save_game(target)
    else:  # RepeatedGame and other game-likes
        base = getattr(target, "base", None)
        if base is None:
            raise InvalidInputError(f"cannot identify {type(target).__name__}")
        name = target.name
        body = f"repeat {target.copies}\n" + save_game(base)
    digest = hashlib.sha256(body.encode()).hexdigest()[:12]
    return f"{name}:{digest}"


def _check_answer(value, size: int, what: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise MalformedBehaviorError(f"{what} must be an int, got {value!r}")
    if not 0 <= value < size:
        raise MalformedBehaviorError(f"{what} {value} out of range")
    return value


def _game_support(g) -> tuple[list[tuple[int, int]], list[int], int]:
    """Support cells, cumulative integer weights, and the weight total."""
    weights, total = g.int_weights()
    cells = []
    cums = []
    acc = 0
    for x in range(g.x_size):
        for y in range(g.y_size):
            w = weights[x * g.y_size + y]
            if w:
                cells.append((x, y))
                acc += w
                cums.append(acc)
    return cells, cums, total


def _play_game(g, behaviors, model: LeakageModel, x: int, y: int):
    """Run the ordered message flow for one game question pair."""
    first, second = behaviors
    channel = MeteredChannel(model.bits_ab, model.bits_ba)
    if model.kind is LeakageKind.ONE_WAY_AB:
        a = first.answer_rule(x, "")
        delivered = channel.send("ab", first.leak_rule(x))
        b = second.answer_rule(y, delivered or "")
    elif model.kind is LeakageKind.ONE_WAY_BA:
        b = second.answer_rule(y, "")
        delivered = channel.send("ba", second.leak_rule(y))
        a = first.answer_rule(x, delivered or "")
    else:  # simultaneous single exchange, each message from own question only
        to_b = channel.send("ab", first.leak_rule(x))
        to_a = channel.send("ba", second.leak_rule(y))
        a = first.answer_rule(x, to_a or "")
        b = second.answer_rule(y, to_b or "")
    a = _check_answer(a, g.a_size, "first answer")
    b = _check_answer(b, g.b_size, "second answer")
    verdict = (not channel.overflowed) and g.wins(x, y, a, b)
    return a, b, channel, verdict


def _play_csp(c: CspInstance, behaviors, model: LeakageModel,
              e: int, pos: int):
    """Constraint-sampling verifier: first prover answers the whole scope
    (then may leak), second prover answers the sampled variable."""
    if model.kind is not LeakageKind.ONE_WAY_AB and model.total_bits:
        raise InvalidInputError("csp sessions support one-way ab leakage only")
    first, second = behaviors
    channel = MeteredChannel(model.bits_ab, model.bits_ba)
    con = c.constraints[e]
    tup = first.answer_rule(e, "")
    if (not isinstance(tup, tuple) or len(tup) != c.arity):
        raise MalformedBehaviorError("first answer must be an arity-k tuple")
    tup = tuple(_check_answer(v, c.alphabet_size, "first answer entry")
                for v in tup)
    delivered = channel.send("ab", first.leak_rule(e))
    var = con.scope[pos]
    label = _check_answer(second.answer_rule(var, delivered or ""),
                          c.alphabet_size, "second answer")
    verdict = ((not channel.overflowed)
               and tup in con.allowed_set and tup[pos] == label)
    return tup, label, channel, verdict


def run_session(target, behaviors, model: LeakageModel, seed: int
                ) -> Transcript:
    """One protocol session, deterministic given the seed.

    Games sample (x, y) from the question distribution; CSP instances
    sample a uniform constraint and a uniform scope position.  Budget
    overflow flags the transcript and forces the verdict to reject.
    """
    if behaviors[0].role != "first" or behaviors[1].role != "second":
        raise InvalidInputError("behaviors must be (first, second)")
    stream = SplitMixStream(seed)
    if isinstance(target, CspInstance):
        e = stream.below(len(target.constraints))
        pos = stream.below(target.arity)
        tup, label, channel, verdict = _play_csp(target, behaviors, model,
                                                 e, pos)
        return Transcript(seed, instance_id(target), "csp",
                          e, target.constraints[e].scope[pos], pos,
                          tuple(channel.events), tuple(channel.rejected),
                          tup, label, channel.overflowed, verdict)
    cells, cums, total = _game_support(target)
    r = stream.below(total)
    x, y = cells[bisect_right(cums, r)]
    a, b, channel, verdict = _play_game(target, behaviors, model, x, y)
    return Transcript(seed, instance_id(target), "game", x, y, None,
                      tuple(channel.events), tuple(channel.rejected),
                      a, b, channel.overflowed, verdict)


def replay_verify(t: Transcript, target) -> bool:
    """Recompute the verdict from the stored questions and answers."""
    if instance_id(target) != t.instance:
        raise IdentifierMismatchError(
            f"transcript is for {t.instance}, got {instance_id(target)}")
    if t.protocol == "csp":
        con = target.constraints[t.question_first]
        fresh = (t.answer_first in con.allowed_set
                 and t.answer_first[t.position] == t.answer_second)
    else:
        fresh = target.wins(t.question_first, t.question_second,
                            t.answer_first, t.answer_second)
    fresh = fresh and not t.overflow
    return fresh == t.verdict


# ---------------------------------------------------------------------------
# Monte Carlo estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentRecord:
    """Aggregated acceptance statistics for one behavior pair."""

    sessions: int
    accepted: int
    estimate: float
    half_width: float  # 99% normal-approximation half-width
    config: dict
    master_seed: int

    def __post_init__(self):
        if self.accepted > self.sessions:
            raise InvalidInputError("accepted cannot exceed sessions")

    @property
    def estimate_exact(self) -> Fraction:
        return Fraction(self.accepted, self.sessions)

    def to_json(self) -> str:
        doc = {
            "sessions": self.sessions,
            "accepted": self.accepted,
            "estimate": self.estimate,
            "half_width": self.half_width,
            "config": self.config,
            "master_seed": self.master_seed,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _half_width(accepted: int, sessions: int) -> float:
    p = accepted / sessions
    return Z_99 * math.sqrt(p * (1.0 - p) / sessions)


def estimate_acceptance(target, behaviors, model: LeakageModel,
                        sessions: int, master_seed: int,
                        fast: bool = True) -> ExperimentRecord:
    """Acceptance estimate over independent seeded sessions.

    Session i is keyed by ``session_seed(master_seed, i)`` and samples its
    questions exactly as :func:`run_session` does.  Because behaviors are
    deterministic, the verdict per question cell is fixed, so the fast path
    precomputes the verdict for every support cell once and vector-samples
    the cells; it is draw-for-draw identical to running scalar sessions.
    """
    if sessions < 1:
        raise InvalidInputError("sessions must be >= 1")

    if isinstance(target, CspInstance):
        m = len(target.constraints)
        k = target.arity
        verdicts = np.zeros((m, k), dtype=bool)
        for e in range(m):
            for pos in range(k):
                verdicts[e, pos] = _play_csp(target, behaviors, model,
                                             e, pos)[3]
        config = {"protocol": "csp", "instance": instance_id(target),
                  "model": model.kind.value, "bits_ab": model.bits_ab,
                  "bits_ba": model.bits_ba, "sessions": sessions}
        if fast:
            seeds = _session_seeds_np(master_seed, sessions)
            counters = np.zeros(sessions, dtype=np.uint64)
            es = _below_np(seeds, counters, m).astype(np.int64)
            ps = _below_np(seeds, counters, k).astype(np.int64)
            accepted = int(verdicts[es, ps].sum())
        else:
            accepted = 0
            for i in range(sessions):
                stream = SplitMixStream(session_seed(master_seed, i))
                e = stream.below(m)
                pos = stream.below(k)
                accepted += bool(verdicts[e, pos])
    else:
        cells, cums, total = _game_support(target)
        verdicts = np.array(
            [_play_game(target, behaviors, model, x, y)[3]
             for x, y in cells], dtype=bool)
        config = {"protocol": "game", "instance": instance_id(target),
                  "model": model.kind.value, "bits_ab": model.bits_ab,
                  "bits_ba": model.bits_ba, "sessions": sessions}
        if fast and total < (1 << 63):
            seeds = _session_seeds_np(master_seed, sessions)
            counters = np.zeros(sessions, dtype=np.uint64)
            rs = _below_np(seeds, counters, total)
            idx = np.searchsorted(np.array(cums, dtype=np.uint64), rs,
                                  side="right")
            accepted = int(verdicts[idx].sum())
        else:
            accepted = 0
            for i in range(sessions):
                stream = SplitMixStream(session_seed(master_seed, i))
                r = stream.below(total)
                accepted += bool(verdicts[bisect_right(cums, r)])

    return ExperimentRecord(sessions, accepted, accepted / sessions,
                            _half_width(accepted, sessions), config,
                            master_seed)


def _session_seeds_np(master_seed: int, sessions: int) -> np.ndarray:
    indices = np.arange(sessions, dtype=np.uint64)
    master = np.full(sessions, master_seed & _MASK64, dtype=np.uint64)
    return _splitmix64_np(master, indices)
