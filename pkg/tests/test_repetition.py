"""Implicit product games, repetition values, and the decay-curve calculator."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

import helpers
import oracles
from leakygames.errors import BudgetExceededError, InvalidInputError
from leakygames.games import (StrategyPair, chsh, classical_value, make_game,
                              strategy_value)
from leakygames.leakage import one_way_ab
from leakygames.repetition import (RepetitionBoundParams,
                                   leaky_repetition_experiment,
                                   product_strategy_value, repeat_game,
                                   repeated_exact_value, repetition_bound,
                                   repetition_bound_curve)

ONES = make_game("ones", 2, 2, 2, 2, [1, 1, 1, 1], lambda *_: True)
ZEROS = make_game("zeros", 2, 2, 2, 2, [1, 1, 1, 1], lambda *_: False)


def test_single_copy_is_value_equivalent():
    rng = random.Random(2)
    for _ in range(8):
        g = helpers.random_game(rng, 2, 2, 2, 2)
        rg = repeat_game(g, 1)
        assert repeated_exact_value(rg)[0] == classical_value(g)[0]


def test_chsh_two_copies_exact():
    rg = repeat_game(chsh(), 2)
    value, witness = repeated_exact_value(rg)
    assert value == Fraction(10, 16)
    # independent full-pair scan on the materialized product
    oracle_value, oracle_pair = oracles.naive_classical_value(rg.materialize())
    assert value == oracle_value
    assert (witness.alice, witness.bob) == oracle_pair


def test_trivial_predicates_repeat():
    assert repeated_exact_value(repeat_game(ONES, 2))[0] == 1
    assert repeated_exact_value(repeat_game(ZEROS, 2))[0] == 0


def test_index_tuple_round_trip():
    rg = repeat_game(chsh(), 3)
    for x in (0, 3, 5, 7):
        coords = rg.x_coords(x)
        assert len(coords) == 3
        assert rg.a_index(coords) == x  # a_size == x_size for chsh


def test_implicit_matches_materialized():
    rng = random.Random(13)
    for _ in range(6):
        g = helpers.random_game(rng, 2, 2, 2, 2)
        rg = repeat_game(g, 2)
        mat = rg.materialize()
        assert rg.int_weights() == mat.int_weights()
        for _ in range(5):
            pair = StrategyPair(
                tuple(rng.randrange(rg.a_size) for _ in range(rg.x_size)),
                tuple(rng.randrange(rg.b_size) for _ in range(rg.y_size)))
            assert strategy_value(rg, pair) == strategy_value(mat, pair)
        assert repeated_exact_value(rg) == classical_value(mat)


def test_product_strategy_value():
    g = chsh()
    best = classical_value(g)[1]
    rg = repeat_game(g, 2)
    assert product_strategy_value(rg, [best, best]) == Fraction(9, 16)
    assert product_strategy_value(
        rg, [best, StrategyPair((0, 0), (0, 0))]) == Fraction(9, 16)
    with pytest.raises(InvalidInputError):
        product_strategy_value(rg, [best])


def test_product_strategy_zero_coordinate():
    rg = repeat_game(ZEROS, 2)
    any_pair = StrategyPair((0, 0), (0, 0))
    assert product_strategy_value(rg, [any_pair, any_pair]) == 0


def test_sandwich_on_random_games():
    rng = random.Random(29)
    checked = 0
    while checked < 8:
        g = helpers.random_game(rng, 2, 2, 2, 2)
        base, _ = classical_value(g)
        rep, _ = repeated_exact_value(repeat_game(g, 2))
        assert base ** 2 <= rep <= base
        checked += 1


def test_value_non_increasing_in_copies():
    rng = random.Random(53)
    for _ in range(5):
        g = helpers.random_game(rng, 2, 2, 2, 2)
        v1 = repeated_exact_value(repeat_game(g, 1))[0]
        v2 = repeated_exact_value(repeat_game(g, 2))[0]
        assert v2 <= v1


def test_budget_guard():
    rg = repeat_game(chsh(), 3)  # 4^8 x 4^8 pairs, over the default budget
    with pytest.raises(BudgetExceededError):
        repeated_exact_value(rg, budget=10**8)


def test_bound_params_validation():
    with pytest.raises(InvalidInputError):
        RepetitionBoundParams(epsilon=0.0, s=3)
    with pytest.raises(InvalidInputError):
        RepetitionBoundParams(epsilon=0.7, s=3)
    with pytest.raises(InvalidInputError):
        RepetitionBoundParams(epsilon=0.1, s=0.5)


def test_bound_curve_plug_in():
    p = RepetitionBoundParams(epsilon=0.25, s=3, c_exp=1.0, c_rate=1.0)
    assert repetition_bound(p, 3) == pytest.approx(0.75, abs=1e-12)
    assert repetition_bound(p, 0) == 1.0
    curve = repetition_bound_curve(p, 10)
    assert [n for n, _ in curve] == list(range(1, 11))
    values = [b for _, b in curve]
    assert all(x > y for x, y in zip(values, values[1:]))


def test_leaky_repetition_exact_chsh():
    result = leaky_repetition_experiment(chsh(), 2, one_way_ab(1))
    assert result.exact
    rep_value = repeated_exact_value(repeat_game(chsh(), 2))[0]
    assert rep_value <= result.value <= min(Fraction(1), 2 * rep_value)
    assert result.witness is not None


def test_leaky_repetition_delegations():
    g = chsh()
    # zero bits: the leaky optimum is the plain repeated value
    r0 = leaky_repetition_experiment(g, 2, one_way_ab(0))
    assert r0.exact and r0.value == Fraction(10, 16)
    # one copy: same as the direct leaky solve
    r1 = leaky_repetition_experiment(g, 1, one_way_ab(1))
    assert r1.exact and r1.value == 1


def test_leaky_repetition_fallback_bound():
    result = leaky_repetition_experiment(chsh(), 2, one_way_ab(1),
                                         leaky_budget=10)
    assert not result.exact
    assert result.witness is None
    assert result.value == min(Fraction(1), 2 * Fraction(10, 16))
    exact = leaky_repetition_experiment(chsh(), 2, one_way_ab(1))
    assert exact.value <= result.value


def test_product_strategy_all_ones_base():
    rg = repeat_game(ONES, 3)
    pair = StrategyPair((0, 0), (0, 0))
    assert product_strategy_value(rg, [pair, pair, pair]) == 1


def test_win_rows_match_direct_predicate():
    rng = random.Random(59)
    g = helpers.random_game_exact(rng, 2, 2, 2, 2)
    rg = repeat_game(g, 2)
    rows = rg.win_rows()
    for x in range(rg.x_size):
        for y in range(rg.y_size):
            for a in range(rg.a_size):
                direct = 0
                for b in range(rg.b_size):
                    if rg.wins(x, y, a, b):
                        direct |= 1 << b
                assert rows[x][y][a] == direct


def test_leaky_exact_on_implicit_product():
    from leakygames.leakage import leaky_value_exact
    rg = repeat_game(chsh(), 2)
    implicit = leaky_value_exact(rg, one_way_ab(1), budget=10**7)
    explicit = leaky_value_exact(rg.materialize(), one_way_ab(1),
                                 budget=10**7)
    assert implicit == explicit


def test_materialize_and_table_guards():
    rg = repeat_game(chsh(), 2)
    with pytest.raises(BudgetExceededError):
        rg.materialize(max_cells=100)
    # degenerate wide-question product: strategy space is trivial but the
    # weight table itself is over budget
    wide = make_game("wide", 3, 3, 1, 1, [1] * 9, lambda *_: True)
    big = repeat_game(wide, 12)
    with pytest.raises(BudgetExceededError):
        big.int_weights()


def test_params_for_game():
    from leakygames.repetition import params_for_game
    p = params_for_game(chsh(), Fraction(3, 4))
    assert p.epsilon == 0.25
    assert p.s == 3.0  # log2(2*2) + 1
    assert repetition_bound(p, 16) == pytest.approx(
        (1 - 0.25) ** ((1 / 16) * 16 / 3))
