"""Finite two-prover one-round games: representation and exact classical values.

A game is a question distribution over X x Y, answer alphabets A and B, and
a boolean acceptance predicate V(a,b|x,y).  All probabilities are exact
rationals; floats only appear when a caller asks for them.  Alphabets are
index sets 0..size-1 throughout; semantic labels belong in file comments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import BudgetExceededError, FormatError, InvalidInputError

# Default cap on (alice strategies) x (bob strategies) for exact solves.
DEFAULT_PAIR_BUDGET = 10**8


@dataclass(frozen=True)
class Game:
    """A finite game (dist, X x Y, A x B, predicate).

    ``dist`` holds the question weights row-major over (x, y) and must sum
    to exactly 1.  ``pred`` holds acceptance bits row-major over
    (x, y, a, b).  Zero-weight question pairs are allowed; their predicate
    entries are retained but never affect any value.
    """

    name: str
    x_size: int
    y_size: int
    a_size: int
    b_size: int
    dist: tuple[Fraction, ...]
    pred: tuple[int, ...]

    def __post_init__(self):
        for label, size in (("x", self.x_size), ("y", self.y_size),
                            ("a", self.a_size), ("b", self.b_size)):
            if size < 1:
                raise InvalidInputError(f"{label}_size must be >= 1, got {size}")
        if len(self.dist) != self.x_size * self.y_size:
            raise InvalidInputError(
                f"dist has {len(self.dist)} entries, expected "
                f"{self.x_size * self.y_size}")
        if any(w < 0 for w in self.dist):
            raise InvalidInputError("negative question weight")
        if sum(self.dist) != 1:
            raise InvalidInputError("question weights must sum to exactly 1")
        expected = self.x_size * self.y_size * self.a_size * self.b_size
        if len(self.pred) != expected:
            raise InvalidInputError(
                f"pred has {len(self.pred)} entries, expected {expected}")
        if any(bit not in (0, 1) for bit in self.pred):
            raise InvalidInputError("pred entries must be 0 or 1")

    # -- evaluation interface (shared with RepeatedGame via duck typing) --

    def weight(self, x: int, y: int) -> Fraction:
        return self.dist[x * self.y_size + y]

    def wins(self, x: int, y: int, a: int, b: int) -> bool:
        idx = ((x * self.y_size + y) * self.a_size + a) * self.b_size + b
        return self.pred[idx] == 1

    def int_weights(self) -> tuple[list[int], int]:
        """Question weights as integers plus their common denominator.

        The denominator equals the weight total, so value numerators from
        the solvers divide by it exactly.
        """
        denom = math.lcm(*(w.denominator for w in self.dist))
        return [int(w * denom) for w in self.dist], denom

    def win_rows(self) -> list[list[list[int]]]:
        """rows[x][y][a] = bitmask over b of winning answers."""
        rows = []
        for x in range(self.x_size):
            per_y = []
            for y in range(self.y_size):
                per_a = []
                for a in range(self.a_size):
                    mask = 0
                    for b in range(self.b_size):
                        if self.wins(x, y, a, b):
                            mask |= 1 << b
                    per_a.append(mask)
                per_y.append(per_a)
            rows.append(per_y)
        return rows


@dataclass(frozen=True)
class StrategyPair:
    """Deterministic answer functions, one table per prover."""

    alice: tuple[int, ...]  # X -> A
    bob: tuple[int, ...]    # Y -> B

    def check_shapes(self, g) -> None:
        if len(self.alice) != g.x_size or len(self.bob) != g.y_size:
            raise InvalidInputError("strategy tables do not match game shape")
        if any(a < 0 or a >= g.a_size for a in self.alice):
            raise InvalidInputError("alice answer out of range")
        if any(b < 0 or b >= g.b_size for b in self.bob):
            raise InvalidInputError("bob answer out of range")


def strategy_value(g, s: StrategyPair) -> Fraction:
    """Exact acceptance probability of a deterministic strategy pair."""
    s.check_shapes(g)
    total = Fraction(0)
    for x in range(g.x_size):
        for y in range(g.y_size):
            w = g.weight(x, y)
            if w and g.wins(x, y, s.alice[x], s.bob[y]):
                total += w
    return total


def merged_prover_value(g) -> Fraction:
    """Value when a single party sees both questions.

    This is sum over (x,y) of pi(x,y) * max_{a,b} V(a,b|x,y): the ceiling
    for any bounded-leakage value once the leaked bits cover the question.
    """
    total = Fraction(0)
    for x in range(g.x_size):
        for y in range(g.y_size):
            w = g.weight(x, y)
            if not w:
                continue
            if any(g.wins(x, y, a, b)
                   for a in range(g.a_size) for b in range(g.b_size)):
                total += w
    return total


def _fold_alice_range(g, weights: list[int], rows, start: int, stop: int):
    """Best (numerator, alice, bob) over alice strategy indices [start, stop).

    Alice strategy ``i`` is the i-th tuple of A^X in lexicographic order
    (x = 0 is the most significant digit).  For each alice table, bob's
    best response decomposes per question y; the smallest maximizing b is
    kept so the witness is the lexicographically smallest optimal pair.
    Pure function of its arguments: ranges can be folded on any worker and
    merged with :func:`_merge_best`.
    """
    x_size, y_size, a_size, b_size = g.x_size, g.y_size, g.a_size, g.b_size
    best_num = -1
    best_alice: tuple[int, ...] = ()
    best_bob: tuple[int, ...] = ()

    # columns[y] = list of (x, weight) with nonzero weight
    columns = [[(x, weights[x * y_size + y]) for x in range(x_size)
                if weights[x * y_size + y]] for y in range(y_size)]

    alice = _index_to_tuple(start, a_size, x_size)
    alice = list(alice)
    for _ in range(start, stop):
        total = 0
        bob = []
        for y in range(y_size):
            col = columns[y]
            best_b_score = -1
            best_b = 0
            for b in range(b_size):
                score = 0
                for x, w in col:
                    if (rows[x][y][alice[x]] >> b) & 1:
                        score += w
                if score > best_b_score:
                    best_b_score = score
                    best_b = b
            total += best_b_score
            bob.append(best_b)
        if total > best_num:
            best_num = total
            best_alice = tuple(alice)
            best_bob = tuple(bob)
        # increment alice tuple in lexicographic order (last digit fastest)
        for pos in range(x_size - 1, -1, -1):
            alice[pos] += 1
            if alice[pos] < a_size:
                break
            alice[pos] = 0
    return best_num, best_alice, best_bob


def _merge_best(r1, r2):
    """Deterministic max-reduction: larger value, then lexicographic witness."""
    if r1[0] != r2[0]:
        return r1 if r1[0] > r2[0] else r2
    return r1 if (r1[1], r1[2]) <= (r2[1], r2[2]) else r2


def _index_to_tuple(index: int, radix: int, length: int) -> tuple[int, ...]:
    digits = [0] * length
    for pos in range(length - 1, -1, -1):
        index, digits[pos] = divmod(index, radix)
    return tuple(digits)


def classical_value(g, budget: int = DEFAULT_PAIR_BUDGET,
                    chunks: int = 1) -> tuple[Fraction, StrategyPair]:
    """Exact classical value with a lexicographically smallest witness.

    Enumerates alice's answer tables; bob's best response is exact and
    decomposes per question.  The witness tie-break is the smallest
    (alice, bob) table pair.  ``chunks`` > 1 folds the alice index range
    in pieces and merges, exercising the partitionable-reduction contract;
    the result is identical for any chunking.

    Raises BudgetExceededError when the strategy-pair count
    a_size**x_size * b_size**y_size exceeds ``budget``.
    """
    pairs = g.a_size ** g.x_size * g.b_size ** g.y_size
    if pairs > budget:
        raise BudgetExceededError(pairs, budget, "strategy-pair enumeration")

    weights, denom = g.int_weights()
    rows = g.win_rows()
    n_alice = g.a_size ** g.x_size

    bounds = [n_alice * i // chunks for i in range(chunks + 1)]
    best = None
    for lo, hi in zip(bounds, bounds[1:]):
        if lo == hi:
            continue
        part = _fold_alice_range(g, weights, rows, lo, hi)
        best = part if best is None else _merge_best(best, part)
    assert best is not None
    num, alice, bob = best
    return Fraction(num, denom), StrategyPair(alice, bob)


# ---------------------------------------------------------------------------
# game file format
# ---------------------------------------------------------------------------
#
#   # comment
#   game <name> <xSize> <ySize> <aSize> <bSize>
#   dist
#   <xSize*ySize integer weights, row-major over (x,y), any line breaks>
#   pred
#   <one line per (x,y): aSize*bSize bits row-major over (a,b)>
#
# Weights are integers in the file and are normalized by their sum on load.


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line))
    return out


def load_game(text: str) -> Game:
    """Parse the line-oriented game format; errors carry line numbers."""
    lines = _content_lines(text)
    if not lines:
        raise FormatError(1, "empty game file")
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 6 or parts[0] != "game":
        raise FormatError(no, "expected header 'game <name> <x> <y> <a> <b>'")
    name = parts[1]
    try:
        x_size, y_size, a_size, b_size = (int(p) for p in parts[2:])
    except ValueError:
        raise FormatError(no, "alphabet sizes must be integers") from None

    pos = 1
    if pos >= len(lines) or lines[pos][1] != "dist":
        raise FormatError(lines[pos][0] if pos < len(lines) else no,
                          "expected 'dist' section")
    pos += 1

    weights: list[int] = []
    weight_lines: list[int] = []
    while pos < len(lines) and lines[pos][1] != "pred":
        no, line = lines[pos]
        for tok in line.split():
            try:
                w = int(tok)
            except ValueError:
                raise FormatError(no, f"malformed weight {tok!r}") from None
            if w < 0:
                raise FormatError(no, "negative weight")
            weights.append(w)
            weight_lines.append(no)
        pos += 1
    if len(weights) != x_size * y_size:
        raise FormatError(weight_lines[-1] if weight_lines else no,
                          f"dist has {len(weights)} weights, expected "
                          f"{x_size * y_size}")
    total = sum(weights)
    if total == 0:
        raise FormatError(weight_lines[-1], "zero total weight")

    if pos >= len(lines):
        raise FormatError(lines[-1][0], "expected 'pred' section")
    pos += 1
    pred_rows = lines[pos:]
    if len(pred_rows) != x_size * y_size:
        raise FormatError(pred_rows[-1][0] if pred_rows else lines[pos - 1][0],
                          f"pred has {len(pred_rows)} rows, expected "
                          f"{x_size * y_size}")
    bits: list[int] = []
    for no, line in pred_rows:
        row = line.replace(" ", "")
        if len(row) != a_size * b_size or any(c not in "01" for c in row):
            raise FormatError(no, f"pred row must be {a_size * b_size} bits")
        bits.extend(int(c) for c in row)

    dist = tuple(Fraction(w, total) for w in weights)
    return Game(name, x_size, y_size, a_size, b_size, dist, tuple(bits))


def save_game(g: Game) -> str:
    """Render a game in the file format; load(save(g)) == g exactly."""
    if any(ch.isspace() for ch in g.name) or not g.name:
        raise InvalidInputError("game name must be a single token")
    denom = math.lcm(*(w.denominator for w in g.dist))
    out = [f"game {g.name} {g.x_size} {g.y_size} {g.a_size} {g.b_size}", "dist"]
    for x in range(g.x_size):
        row = [str(int(g.weight(x, y) * denom)) for y in range(g.y_size)]
        out.append(" ".join(row))
    out.append("pred")
    for x in range(g.x_size):
        for y in range(g.y_size):
            base = (x * g.y_size + y) * g.a_size * g.b_size
            out.append("".join(
                str(g.pred[base + i]) for i in range(g.a_size * g.b_size)))
    return "\n".join(out) + "\n"


def make_game(name: str, x_size: int, y_size: int, a_size: int, b_size: int,
              weights: Sequence[int],
              predicate) -> Game:
    """Build a game from integer weights and a predicate callable.

    ``predicate(x, y, a, b)`` -> truthy on accept.  Weights are normalized
    by their sum.
    """
    total = sum(weights)
    if total <= 0:
        raise InvalidInputError("zero total weight")
    dist = tuple(Fraction(w, total) for w in weights)
    bits = []
    for x in range(x_size):
        for y in range(y_size):
            for a in range(a_size):
                for b in range(b_size):
                    bits.append(1 if predicate(x, y, a, b) else 0)
    return Game(name, x_size, y_size, a_size, b_size, dist, tuple(bits))


def chsh() -> Game:
    """The CHSH game: uniform questions on {0,1}^2, accept iff a^b = x&y."""
    return make_game("chsh", 2, 2, 2, 2, [1, 1, 1, 1],
                     lambda x, y, a, b: (a ^ b) == (x & y))
