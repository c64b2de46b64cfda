"""Constraint systems, label cover, verifier games, and optimal leaky cheating.

A CSP instance is a list of arity-k constraints over a finite alphabet,
each given by an explicit set of allowed tuples.  Label cover is the k=2
projection special case and embeds into the generic machinery for value
computations.  This module also builds the two standard game forms of a
label cover (endpoint game and consistency-test game) and computes the
exact optimum a pair of provers can reach against the constraint-sampling
verifier when the first prover may leak a bounded number of bits to the
second.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import (BudgetExceededError, FormatError, GeneratorCapError,
                     InvalidInputError)
from .games import Game, make_game

DEFAULT_ASSIGNMENT_BUDGET = 10**7
DEFAULT_CHEAT_BUDGET = 10**8


@dataclass(frozen=True)
class Constraint:
    """One arity-k constraint: variable scope plus allowed value tuples.

    ``allowed`` is kept sorted for deterministic iteration; it may be
    empty, in which case the constraint is never satisfied.  Repeated
    variables in a scope are legal and are treated as distinct positions.
    """

    scope: tuple[int, ...]
    allowed: tuple[tuple[int, ...], ...]

    @cached_property
    def allowed_set(self) -> frozenset[tuple[int, ...]]:
        return frozenset(self.allowed)


@dataclass(frozen=True)
class CspInstance:
    num_vars: int
    alphabet_size: int
    arity: int
    constraints: tuple[Constraint, ...]

    def __post_init__(self):
        if self.num_vars < 1 or self.alphabet_size < 1 or self.arity < 1:
            raise InvalidInputError("num_vars, alphabet, arity must be >= 1")
        if not self.constraints:
            raise InvalidInputError("constraint list must be non-empty")
        for con in self.constraints:
            if len(con.scope) != self.arity:
                raise InvalidInputError("scope length must equal arity")
            if any(v < 0 or v >= self.num_vars for v in con.scope):
                raise InvalidInputError("scope variable out of range")
            if list(con.allowed) != sorted(set(con.allowed)):
                raise InvalidInputError("allowed tuples must be sorted, unique")
            for t in con.allowed:
                if len(t) != self.arity:
                    raise InvalidInputError("allowed tuple length != arity")
                if any(v < 0 or v >= self.alphabet_size for v in t):
                    raise InvalidInputError("allowed tuple value out of range")

    def satisfied_count(self, assignment: tuple[int, ...]) -> int:
        count = 0
        for con in self.constraints:
            if tuple(assignment[v] for v in con.scope) in con.allowed_set:
                count += 1
        return count


def make_constraint(scope, allowed) -> Constraint:
    """Normalize (sort, dedup) and build a constraint."""
    return Constraint(tuple(scope), tuple(sorted(set(map(tuple, allowed)))))


@dataclass(frozen=True)
class LabelCover:
    """Bipartite projection CSP: phi_e maps left labels to right labels.

    Edges must be distinct (u, v) pairs so a question pair identifies its
    edge; parallel edges would make the endpoint game's predicate
    ambiguous.
    """

    num_left: int
    num_right: int
    sigma_left: int
    sigma_right: int
    edges: tuple[tuple[int, int], ...]
    projections: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if min(self.num_left, self.num_right,
               self.sigma_left, self.sigma_right) < 1:
            raise InvalidInputError("label cover sizes must be >= 1")
        if not self.edges:
            raise InvalidInputError("edge set must be non-empty")
        if len(set(self.edges)) != len(self.edges):
            raise InvalidInputError("parallel edges are not allowed")
        if len(self.projections) != len(self.edges):
            raise InvalidInputError("one projection per edge required")
        for (u, v), phi in zip(self.edges, self.projections):
            if not (0 <= u < self.num_left and 0 <= v < self.num_right):
                raise InvalidInputError("edge endpoint out of range")
            if len(phi) != self.sigma_left:
                raise InvalidInputError("projection must cover sigma_left")
            if any(t < 0 or t >= self.sigma_right for t in phi):
                raise InvalidInputError("projection value out of range")

    def to_csp(self) -> CspInstance:
        """Embed as a k=2 CSP: left block first, right block offset.

        The shared alphabet is max(sigma_left, sigma_right); labels outside
        a side's range simply satisfy nothing.
        """
        cons = []
        for (u, v), phi in zip(self.edges, self.projections):
            allowed = tuple(sorted((s, phi[s]) for s in range(self.sigma_left)))
            cons.append(Constraint((u, self.num_left + v), allowed))
        return CspInstance(self.num_left + self.num_right,
                           max(self.sigma_left, self.sigma_right),
                           2, tuple(cons))


def csp_value_exact(c: CspInstance,
                    budget: int = DEFAULT_ASSIGNMENT_BUDGET
                    ) -> tuple[Fraction, tuple[int, ...]]:
    """Max satisfied-constraint fraction, exact, with lex-smallest witness."""
    count = c.alphabet_size ** c.num_vars
    if count > budget:
        raise BudgetExceededError(count, budget, "assignment enumeration")
    best = -1
    witness: tuple[int, ...] = ()
    for assignment in itertools.product(range(c.alphabet_size),
                                        repeat=c.num_vars):
        sat = c.satisfied_count(assignment)
        if sat > best:
            best = sat
            witness = assignment
    return Fraction(best, len(c.constraints)), witness


def csp_value_local_search(c: CspInstance, seed: int, restarts: int = 10
                           ) -> tuple[Fraction, tuple[int, ...]]:
    """Greedy hill-climbing lower bound on the value; deterministic per seed.

    Each restart begins from a random assignment and sweeps the variables
    in order, moving a variable to its best value (smallest on ties) until
    a full sweep makes no improvement.  Returns the best assignment found;
    its value is always a valid lower bound.
    """
    rng = random.Random(seed)
    best_sat = -1
    best: tuple[int, ...] = ()
    for _ in range(max(1, restarts)):
        current = [rng.randrange(c.alphabet_size) for _ in range(c.num_vars)]
        sat = c.satisfied_count(tuple(current))
        improved = True
        while improved:
            improved = False
            for var in range(c.num_vars):
                original = current[var]
                local_best, local_val = sat, original
                for val in range(c.alphabet_size):
                    if val == original:
                        continue
                    current[var] = val
                    s = c.satisfied_count(tuple(current))
                    if s > local_best:
                        local_best, local_val = s, val
                current[var] = local_val
                if local_best > sat:
                    sat = local_best
                    improved = True
        if sat > best_sat:
            best_sat = sat
            best = tuple(current)
    return Fraction(best_sat, len(c.constraints)), best


def find_low_value_instance(num_vars: int, alphabet_size: int, arity: int,
                            target: Fraction, seed: int, *,
                            num_constraints: int | None = None,
                            allowed_sizes: tuple[int, ...] = (1,),
                            attempts: int = 200,
                            budget: int = DEFAULT_ASSIGNMENT_BUDGET
                            ) -> tuple[CspInstance, Fraction]:
    """Seeded random search for an instance with certified value <= target.

    Samples constraints with i.i.d. uniform scope positions and uniformly
    chosen allowed sets of the requested sizes, then certifies the value
    with the exact solver.  Raises GeneratorCapError after ``attempts``
    misses; callers should relax the parameters.
    """
    target = Fraction(target)
    rng = random.Random(seed)
    m = num_constraints if num_constraints is not None else 8 * num_vars
    tuple_space = list(itertools.product(range(alphabet_size), repeat=arity))
    for _ in range(attempts):
        cons = []
        for _ in range(m):
            scope = tuple(rng.randrange(num_vars) for _ in range(arity))
            size = allowed_sizes[rng.randrange(len(allowed_sizes))]
            size = min(size, len(tuple_space))
            allowed = rng.sample(tuple_space, size)
            cons.append(make_constraint(scope, allowed))
        candidate = CspInstance(num_vars, alphabet_size, arity, tuple(cons))
        value, _ = csp_value_exact(candidate, budget)
        if value <= target:
            return candidate, value
    raise GeneratorCapError(
        f"no instance with value <= {target} in {attempts} attempts")


# ---------------------------------------------------------------------------
# label cover -> game conversions
# ---------------------------------------------------------------------------


def edge_game(lc: LabelCover) -> Game:
    """Endpoint game: sample an edge, send one endpoint to each prover.

    Alice answers a left label, Bob a right label; accept iff the pair
    satisfies the edge's projection.  Its classical value equals the label
    cover value (every strategy pair is an assignment pair and vice versa).
    """
    proj = {e: phi for e, phi in zip(lc.edges, lc.projections)}
    weights = [1 if (u, v) in proj else 0
               for u in range(lc.num_left) for v in range(lc.num_right)]

    def accept(u, v, s, t):
        phi = proj.get((u, v))
        return phi is not None and phi[s] == t

    return make_game("edge-game", lc.num_left, lc.num_right,
                     lc.sigma_left, lc.sigma_right, weights, accept)


def consistency_game(lc: LabelCover) -> Game:
    """Consistency-test game: Alice gets an edge and answers both endpoint
    labels; Bob gets one endpoint (uniformly) and answers its label.

    Accept iff Alice's pair satisfies the projection and Bob agrees on the
    shared vertex.  Bob's questions index left vertices first, then right
    vertices offset by num_left; his answer alphabet is the larger label
    set, with out-of-range labels for the asked side never accepted.
    """
    n_edges = len(lc.edges)
    y_size = lc.num_left + lc.num_right
    a_size = lc.sigma_left * lc.sigma_right
    b_size = max(lc.sigma_left, lc.sigma_right)

    weights = [0] * (n_edges * y_size)
    for e, (u, v) in enumerate(lc.edges):
        weights[e * y_size + u] = 1
        weights[e * y_size + lc.num_left + v] = 1

    def accept(e, w, ans, b):
        u, v = lc.edges[e]
        s, t = divmod(ans, lc.sigma_right)
        if lc.projections[e][s] != t:
            return False
        if w == u:
            return b == s
        if w == lc.num_left + v:
            return b == t
        return False

    return make_game("consistency-game", n_edges, y_size, a_size, b_size,
                     weights, accept)


# ---------------------------------------------------------------------------
# constraint-sampling verifier and optimal bounded-leakage cheating
# ---------------------------------------------------------------------------
#
# The verifier samples a constraint uniformly, asks the first prover for
# values at all k scope positions, samples a position uniformly, and asks
# the second prover for that variable alone.  It accepts iff the first
# prover's tuple satisfies the constraint and agrees with the second
# prover's value at the sampled position.
#
# Against one-way leakage the second prover's strategy, after each of the
# 2^bits possible messages, is a plain assignment.  The first prover knows
# the constraint and picks the message, so its best response decomposes
# per constraint: send the message m and satisfying tuple maximizing the
# number of positions that agree with the m-th assignment.  Enumerating
# second-prover profiles with this closed-form response is therefore an
# exact optimum over all deterministic one-way cheats.  (Shared randomness
# cannot help: acceptance is affine in the provers' behavioral mixture.)


@dataclass(frozen=True)
class CheatProfile:
    """One assignment per possible leaked message (2^bits of them)."""

    assignments: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.assignments)
        if n < 1 or n & (n - 1):
            raise InvalidInputError("profile length must be a power of two")

    @property
    def leak_bits(self) -> int:
        return len(self.assignments).bit_length() - 1

    def check_shapes(self, c: CspInstance) -> None:
        for a in self.assignments:
            if len(a) != c.num_vars:
                raise InvalidInputError("assignment length != num_vars")
            if any(v < 0 or v >= c.alphabet_size for v in a):
                raise InvalidInputError("assignment value out of range")


def _agreement_score(con: Constraint, assignment: tuple[int, ...]) -> int:
    """Best over satisfying tuples of positions agreeing with assignment.

    0 when no tuple satisfies the constraint (the verifier then always
    rejects, whatever the first prover answers).
    """
    best = 0
    for t in con.allowed:
        agree = sum(1 for pos, var in enumerate(con.scope)
                    if t[pos] == assignment[var])
        if agree > best:
            best = agree
    return best


def best_response(c: CspInstance, profile: CheatProfile
                  ) -> list[tuple[int, tuple[int, ...], int]]:
    """First prover's optimal per-constraint (message, tuple, agreement).

    Ties prefer the smallest message, then the lexicographically smallest
    satisfying tuple; constraints with empty allowed sets get message 0,
    the all-zero tuple, and agreement 0.
    """
    profile.check_shapes(c)
    out = []
    for con in c.constraints:
        best = (-1, 0, (0,) * c.arity)
        for m, assignment in enumerate(profile.assignments):
            for t in con.allowed:
                agree = sum(1 for pos, var in enumerate(con.scope)
                            if t[pos] == assignment[var])
                if agree > best[0]:
                    best = (agree, m, t)
        if best[0] < 0:
            best = (0, 0, (0,) * c.arity)
        out.append((best[1], best[2], best[0]))
    return out


def cheat_acceptance(c: CspInstance, profile: CheatProfile) -> Fraction:
    """Exact verifier acceptance with the first prover best-responding."""
    total = sum(agree for _, _, agree in best_response(c, profile))
    return Fraction(total, c.arity * len(c.constraints))


def _score_matrix(c: CspInstance) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """All assignments (lex order) and their per-constraint agreement scores."""
    assignments = list(itertools.product(range(c.alphabet_size),
                                         repeat=c.num_vars))
    scores = np.zeros((len(assignments), len(c.constraints)), dtype=np.int64)
    for e, con in enumerate(c.constraints):
        # score depends only on the assignment's restriction to the scope
        cache: dict[tuple[int, ...], int] = {}
        for i, assignment in enumerate(assignments):
            key = tuple(assignment[v] for v in con.scope)
            score = cache.get(key)
            if score is None:
                score = _agreement_score(con, assignment)
                cache[key] = score
            scores[i, e] = score
    return assignments, scores


def optimal_cheat(c: CspInstance, leak_bits: int,
                  budget: int = DEFAULT_CHEAT_BUDGET
                  ) -> tuple[Fraction, CheatProfile]:
    """Exact max acceptance over all 2^leak_bits-tuples of assignments.

    The witness profile is the lexicographically smallest maximizer (an
    ordered tuple of assignments, one per message value).  Profiles are
    scanned in lexicographic order with the per-constraint maxima carried
    down the prefix tree and the innermost slot vectorized, so the cost is
    one array pass per profile prefix rather than per profile.
    """
    if leak_bits < 0:
        raise InvalidInputError("leak_bits must be non-negative")
    slots = 1 << leak_bits
    n_assignments = c.alphabet_size ** c.num_vars
    profiles = n_assignments ** slots
    if profiles > budget:
        raise BudgetExceededError(profiles, budget, "cheat-profile enumeration")
    cells = n_assignments * len(c.constraints)
    if cells > 5 * 10**7:
        raise BudgetExceededError(cells, 5 * 10**7, "cheat score table")

    assignments, scores = _score_matrix(c)
    denom = c.arity * len(c.constraints)

    best_total = -1
    best_idx: tuple[int, ...] = ()

    def scan(prefix: tuple[int, ...], prefix_max: np.ndarray | None) -> None:
        nonlocal best_total, best_idx
        if len(prefix) == slots - 1:
            combined = (scores if prefix_max is None
                        else np.maximum(prefix_max, scores))
            sums = combined.sum(axis=1)
            last = int(np.argmax(sums))  # first occurrence: lex-smallest
            total = int(sums[last])
            if total > best_total:
                best_total = total
                best_idx = prefix + (last,)
            return
        for i in range(n_assignments):
            child = (scores[i] if prefix_max is None
                     else np.maximum(prefix_max, scores[i]))
            scan(prefix + (i,), child)

    scan((), None)
    profile = CheatProfile(tuple(assignments[i] for i in best_idx))
    return Fraction(best_total, denom), profile


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------
#
#   csp <num_vars> <alphabet> <arity>
#   con <v1> ... <vk> : <t1> <t2> ...     tuples as base-alphabet digit strings
#
# Label cover files additionally carry the split sizes and projections:
#
#   lc <num_left> <num_right> <sigma_left> <sigma_right>
#   e <u> <v> : <phi(0)> <phi(1)> ...
#
# and their con lines are exactly the induced projection constraints (the
# loader cross-checks).  All formats round-trip exactly.


def _parse_int(no: int, tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise FormatError(no, f"malformed {what} {tok!r}") from None


def load_instance(text: str) -> CspInstance | LabelCover:
    """Parse a CSP file; returns a LabelCover when an ``lc`` line is present."""
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append((no, line))
    if not lines:
        raise FormatError(1, "empty csp file")

    no, header = lines[0]
    parts = header.split()
    if len(parts) != 4 or parts[0] != "csp":
        raise FormatError(no, "expected header 'csp <vars> <alphabet> <arity>'")
    num_vars, alphabet, arity = (_parse_int(no, p, "header field")
                                 for p in parts[1:])
    if alphabet > 10:
        raise FormatError(no, "alphabet > 10 not representable as digits")

    lc_dims = None
    cons: list[Constraint] = []
    edges: list[tuple[int, int]] = []
    projections: list[tuple[int, ...]] = []
    for no, line in lines[1:]:
        toks = line.split()
        if toks[0] == "lc":
            if len(toks) != 5:
                raise FormatError(no, "expected 'lc <L> <R> <sigmaL> <sigmaR>'")
            lc_dims = tuple(_parse_int(no, t, "lc field") for t in toks[1:])
        elif toks[0] == "con":
            if ":" not in toks:
                raise FormatError(no, "con line missing ':'")
            sep = toks.index(":")
            scope = tuple(_parse_int(no, t, "variable") for t in toks[1:sep])
            if len(scope) != arity:
                raise FormatError(no, f"scope must list {arity} variables")
            allowed = []
            for t in toks[sep + 1:]:
                if len(t) != arity or any(ch not in "0123456789" for ch in t):
                    raise FormatError(no, f"malformed tuple {t!r}")
                tup = tuple(int(ch) for ch in t)
                if any(v >= alphabet for v in tup):
                    raise FormatError(no, f"tuple {t!r} outside alphabet")
                allowed.append(tup)
            cons.append(make_constraint(scope, allowed))
        elif toks[0] == "e":
            if ":" not in toks or toks.index(":") != 3:
                raise FormatError(no, "expected 'e <u> <v> : <phi values>'")
            u = _parse_int(no, toks[1], "vertex")
            v = _parse_int(no, toks[2], "vertex")
            phi = tuple(_parse_int(no, t, "projection value")
                        for t in toks[4:])
            edges.append((u, v))
            projections.append(phi)
        else:
            raise FormatError(no, f"unknown directive {toks[0]!r}")

    if not cons:
        raise FormatError(lines[-1][0], "no constraints")
    instance = CspInstance(num_vars, alphabet, arity, tuple(cons))
    if lc_dims is None:
        if edges:
            raise FormatError(lines[-1][0], "'e' lines require an 'lc' line")
        return instance

    lc = LabelCover(*lc_dims, tuple(edges), tuple(projections))
    if lc.to_csp() != instance:
        raise FormatError(lines[-1][0],
                          "con lines disagree with projections")
    return lc


def save_csp(c: CspInstance) -> str:
    if c.alphabet_size > 10:
        raise InvalidInputError("alphabet > 10 not representable as digits")
    out = [f"csp {c.num_vars} {c.alphabet_size} {c.arity}"]
    for con in c.constraints:
        scope = " ".join(str(v) for v in con.scope)
        tuples = " ".join("".join(str(d) for d in t) for t in con.allowed)
        out.append(f"con {scope} : {tuples}".rstrip())
    return "\n".join(out) + "\n"


def save_label_cover(lc: LabelCover) -> str:
    body = save_csp(lc.to_csp()).splitlines()
    out = [body[0],
           f"lc {lc.num_left} {lc.num_right} {lc.sigma_left} {lc.sigma_right}"]
    out.extend(body[1:])
    for (u, v), phi in zip(lc.edges, lc.projections):
        out.append(f"e {u} {v} : " + " ".join(str(t) for t in phi))
    return "\n".join(out) + "\n"
