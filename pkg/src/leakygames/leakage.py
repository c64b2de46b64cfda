"""Exact game values when the provers may exchange a bounded number of bits.

Three single-exchange interaction patterns are supported: one-way in either
direction and a simultaneous swap.  Fully interactive protocols are covered
only through the 2^bits upper bound (`leaky_value_upper_bound`), which is
valid for any interaction pattern by the guess-and-abort reduction.

Messages are bit-strings read as integers in 0..2^bits-1.  Only
deterministic strategies are enumerated: the value is affine in each
party's behavioral distribution, so the optimum is attained at a
deterministic point and shared randomness is a convex mixture.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import BudgetExceededError, InvalidInputError
from .games import DEFAULT_PAIR_BUDGET, StrategyPair, classical_value

MAX_TOTAL_BITS = 30
DEFAULT_LEAKY_BUDGET = 10**7


class LeakageKind(enum.Enum):
    ONE_WAY_AB = "one-way-ab"      # first prover -> second prover
    ONE_WAY_BA = "one-way-ba"      # second prover -> first prover
    SIMULTANEOUS = "simultaneous"  # single simultaneous exchange


@dataclass(frozen=True)
class LeakageModel:
    """Direction pattern plus per-direction bit budgets."""

    kind: LeakageKind
    bits_ab: int = 0
    bits_ba: int = 0

    def __post_init__(self):
        if self.bits_ab < 0 or self.bits_ba < 0:
            raise InvalidInputError("bit budgets must be non-negative")
        if self.kind is LeakageKind.ONE_WAY_AB and self.bits_ba != 0:
            raise InvalidInputError("one-way-ab forbids bits_ba")
        if self.kind is LeakageKind.ONE_WAY_BA and self.bits_ab != 0:
            raise InvalidInputError("one-way-ba forbids bits_ab")
        if self.total_bits > MAX_TOTAL_BITS:
            raise InvalidInputError(
                f"total budget {self.total_bits} exceeds {MAX_TOTAL_BITS}")

    @property
    def total_bits(self) -> int:
        return self.bits_ab + self.bits_ba

    @property
    def msgs_ab(self) -> int:
        return 1 << self.bits_ab

    @property
    def msgs_ba(self) -> int:
        return 1 << self.bits_ba


def one_way_ab(bits: int) -> LeakageModel:
    return LeakageModel(LeakageKind.ONE_WAY_AB, bits_ab=bits)


def one_way_ba(bits: int) -> LeakageModel:
    return LeakageModel(LeakageKind.ONE_WAY_BA, bits_ba=bits)


def simultaneous(bits_ab: int, bits_ba: int) -> LeakageModel:
    return LeakageModel(LeakageKind.SIMULTANEOUS, bits_ab, bits_ba)


@dataclass(frozen=True)
class LeakyStrategy:
    """Message tables plus answer tables indexed by (question, incoming msg).

    For one-way models the silent party's message table is constant 0 and
    the talking party's answer table has a single incoming-message column.
    """

    alice_msg: tuple[int, ...]               # X -> 0..msgs_ab-1
    bob_msg: tuple[int, ...]                 # Y -> 0..msgs_ba-1
    alice_ans: tuple[tuple[int, ...], ...]   # [x][incoming ba msg] -> a
    bob_ans: tuple[tuple[int, ...], ...]     # [y][incoming ab msg] -> b

    def check_shapes(self, g, m: LeakageModel) -> None:
        if len(self.alice_msg) != g.x_size or len(self.bob_msg) != g.y_size:
            raise InvalidInputError("message tables do not match game shape")
        if any(v < 0 or v >= m.msgs_ab for v in self.alice_msg):
            raise InvalidInputError("alice message out of range")
        if any(v < 0 or v >= m.msgs_ba for v in self.bob_msg):
            raise InvalidInputError("bob message out of range")
        if m.kind is LeakageKind.ONE_WAY_AB and any(self.bob_msg):
            raise InvalidInputError("one-way-ab forces bob_msg constant 0")
        if m.kind is LeakageKind.ONE_WAY_BA and any(self.alice_msg):
            raise InvalidInputError("one-way-ba forces alice_msg constant 0")
        if (len(self.alice_ans) != g.x_size
                or any(len(row) != m.msgs_ba for row in self.alice_ans)):
            raise InvalidInputError("alice answer table shape mismatch")
        if (len(self.bob_ans) != g.y_size
                or any(len(row) != m.msgs_ab for row in self.bob_ans)):
            raise InvalidInputError("bob answer table shape mismatch")
        if any(a < 0 or a >= g.a_size for row in self.alice_ans for a in row):
            raise InvalidInputError("alice answer out of range")
        if any(b < 0 or b >= g.b_size for row in self.bob_ans for b in row):
            raise InvalidInputError("bob answer out of range")

    def embedded_pair(self) -> StrategyPair:
        """The zero-leakage strategy pair (message column 0 on both sides)."""
        return StrategyPair(tuple(row[0] for row in self.alice_ans),
                            tuple(row[0] for row in self.bob_ans))


def from_strategy_pair(s: StrategyPair) -> LeakyStrategy:
    """Embed a plain strategy pair as a zero-message leaky strategy."""
    return LeakyStrategy(
        alice_msg=tuple(0 for _ in s.alice),
        bob_msg=tuple(0 for _ in s.bob),
        alice_ans=tuple((a,) for a in s.alice),
        bob_ans=tuple((b,) for b in s.bob))


def leaky_strategy_value(g, m: LeakageModel, s: LeakyStrategy) -> Fraction:
    """Exact acceptance probability of one leaky strategy."""
    s.check_shapes(g, m)
    total = Fraction(0)
    for x in range(g.x_size):
        for y in range(g.y_size):
            w = g.weight(x, y)
            if not w:
                continue
            a = s.alice_ans[x][s.bob_msg[y]]
            b = s.bob_ans[y][s.alice_msg[x]]
            if g.wins(x, y, a, b):
                total += w
    return total


def leaky_enumeration_size(g, m: LeakageModel) -> int:
    """Outer enumeration size: message tables times alice answer tables.

    Bob's answer table is resolved by an exact best response inside the
    solver, so it does not enter the budget.  The naive strategy count is
    this times b_size ** (y_size * msgs_ab).
    """
    return (m.msgs_ab ** g.x_size
            * m.msgs_ba ** g.y_size
            * g.a_size ** (g.x_size * m.msgs_ba))


def leaky_value_exact(g, m: LeakageModel,
                      budget: int = DEFAULT_LEAKY_BUDGET
                      ) -> tuple[Fraction, LeakyStrategy]:
    """Exact optimum over deterministic leaky strategies for the model.

    Enumerates (alice_msg, bob_msg, alice_ans) in lexicographic order and
    completes each with bob's exact best response, taking the smallest
    maximizing answer per (y, incoming message) cell.  The returned witness
    is therefore the lexicographically smallest maximizer in field order
    (alice_msg, bob_msg, alice_ans, bob_ans).
    """
    outer = leaky_enumeration_size(g, m)
    if outer > budget:
        raise BudgetExceededError(outer, budget, "leaky-strategy enumeration")

    x_size, y_size, a_size, b_size = g.x_size, g.y_size, g.a_size, g.b_size
    m1, m2 = m.msgs_ab, m.msgs_ba
    weights, denom = g.int_weights()
    rows = g.win_rows()

    best_num = -1
    best: LeakyStrategy | None = None
    for alice_msg in itertools.product(range(m1), repeat=x_size):
        # x-indices grouped by the message bob would receive
        groups = [[x for x in range(x_size) if alice_msg[x] == v]
                  for v in range(m1)]
        for bob_msg in itertools.product(range(m2), repeat=y_size):
            for flat in itertools.product(range(a_size), repeat=x_size * m2):
                alice_ans = tuple(flat[x * m2:(x + 1) * m2]
                                  for x in range(x_size))
                total = 0
                bob_ans = []
                for y in range(y_size):
                    row = []
                    for v in range(m1):
                        best_score = -1
                        best_b = 0
                        for b in range(b_size):
                            score = 0
                            for x in groups[v]:
                                w = weights[x * y_size + y]
                                if w and (rows[x][y][alice_ans[x][bob_msg[y]]]
                                          >> b) & 1:
                                    score += w
                            if score > best_score:
                                best_score = score
                                best_b = b
                        row.append(best_b)
                        total += best_score
                    bob_ans.append(tuple(row))
                if total > best_num:
                    best_num = total
                    best = LeakyStrategy(alice_msg, bob_msg, alice_ans,
                                         tuple(bob_ans))
    assert best is not None
    return Fraction(best_num, denom), best


def guess_and_abort_value(g, m: LeakageModel, s: LeakyStrategy) -> Fraction:
    """Winning probability of the derandomized no-communication protocol.

    The parties share a uniformly random guess of the full message
    transcript instead of communicating.  Each party checks the guess
    against its own outgoing message, aborts on mismatch, and otherwise
    answers using the guessed incoming message.  Computed by explicit
    enumeration over all 2^bits guesses; equals
    2^-bits * leaky_strategy_value(g, m, s) exactly.
    """
    s.check_shapes(g, m)
    m1, m2 = m.msgs_ab, m.msgs_ba
    total = Fraction(0)
    for guess_ab in range(m1):
        for guess_ba in range(m2):
            for x in range(g.x_size):
                if s.alice_msg[x] != guess_ab:
                    continue  # alice aborts on every y
                for y in range(g.y_size):
                    if s.bob_msg[y] != guess_ba:
                        continue  # bob aborts
                    w = g.weight(x, y)
                    if not w:
                        continue
                    a = s.alice_ans[x][guess_ba]
                    b = s.bob_ans[y][guess_ab]
                    if g.wins(x, y, a, b):
                        total += w
    return total / (m1 * m2)


def leaky_value_upper_bound(g, total_bits: int,
                            budget: int = DEFAULT_PAIR_BUDGET) -> Fraction:
    """min(1, 2^total_bits * classical value).

    Valid for arbitrary interactive protocols exchanging ``total_bits``
    bits: guessing the transcript turns any such protocol into a
    no-communication one at a 2^-total_bits probability cost.
    """
    if total_bits < 0:
        raise InvalidInputError("total_bits must be non-negative")
    value, _ = classical_value(g, budget)
    return min(Fraction(1), (1 << total_bits) * value)
