"""CSP values, label-cover conversions, verifier acceptance, and optimal
cheating under one-way leakage."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

import helpers
import oracles
from leakygames.csp import (CheatProfile, Constraint, CspInstance, LabelCover,
                            best_response, cheat_acceptance, consistency_game,
                            csp_value_exact, csp_value_local_search,
                            edge_game, find_low_value_instance, load_instance,
                            make_constraint, optimal_cheat, save_csp,
                            save_label_cover)
from leakygames.errors import (BudgetExceededError, FormatError,
                               GeneratorCapError, InvalidInputError)
from leakygames.games import classical_value

NE = [(0, 1), (1, 0)]
TRIANGLE = CspInstance(3, 2, 2, tuple(
    make_constraint(s, NE) for s in [(0, 1), (1, 2), (2, 0)]))

# three left vertices mapping into one right vertex; two of the three
# projections agree, so the best right label satisfies exactly 2/3
STAR_LC = LabelCover(3, 1, 1, 2, ((0, 0), (1, 0), (2, 0)),
                     ((0,), (0,), (1,)))


def test_instance_validation():
    with pytest.raises(InvalidInputError):
        CspInstance(2, 2, 2, ())
    with pytest.raises(InvalidInputError):
        CspInstance(2, 2, 2, (Constraint((0, 5), ((0, 0),)),))
    with pytest.raises(InvalidInputError):
        CspInstance(2, 2, 2, (Constraint((0, 1), ((0, 0, 0),)),))
    with pytest.raises(InvalidInputError):
        # unsorted allowed tuples are rejected; make_constraint sorts
        CspInstance(2, 2, 2, (Constraint((0, 1), ((1, 0), (0, 1))),))


def test_value_single_ne_constraint():
    c = CspInstance(2, 2, 2, (make_constraint((0, 1), NE),))
    value, witness = csp_value_exact(c)
    assert value == 1
    assert witness == (0, 1)  # lexicographically smallest satisfier


def test_value_triangle():
    value, witness = csp_value_exact(TRIANGLE)
    assert value == Fraction(2, 3)
    oracle_value, oracle_witness = oracles.naive_csp_value(TRIANGLE)
    assert value == oracle_value
    assert witness == oracle_witness


def test_value_empty_allowed_sets():
    c = CspInstance(2, 2, 2, (make_constraint((0, 1), []),))
    assert csp_value_exact(c)[0] == 0


def test_value_budget():
    c = CspInstance(30, 2, 2, (make_constraint((0, 1), NE),))
    with pytest.raises(BudgetExceededError):
        csp_value_exact(c, budget=1000)


def test_local_search_bounds_exact():
    rng = random.Random(19)
    for seed in range(6):
        c, _ = helpers.satisfiable_csp(rng, num_vars=5, num_constraints=8)
        exact, _ = csp_value_exact(c)
        lower, witness = csp_value_local_search(c, seed=seed, restarts=8)
        assert lower <= exact
        assert c.satisfied_count(witness) == lower * len(c.constraints)
    # a satisfiable instance is solved outright with enough restarts
    c, _ = helpers.satisfiable_csp(random.Random(4), num_vars=4,
                                   num_constraints=6)
    assert csp_value_local_search(c, seed=0, restarts=20)[0] == 1


def test_local_search_deterministic():
    c, _ = helpers.satisfiable_csp(random.Random(8), num_vars=6)
    first = csp_value_local_search(c, seed=123, restarts=5)
    assert first == csp_value_local_search(c, seed=123, restarts=5)


def test_single_constraint_local_search():
    c = CspInstance(2, 2, 2, (make_constraint((0, 1), NE),))
    assert csp_value_local_search(c, seed=1)[0] == 1


# -- generator ---------------------------------------------------------------


def test_generator_trivial_target():
    instance, value = find_low_value_instance(3, 2, 2, Fraction(1), seed=0,
                                              num_constraints=4)
    assert value <= 1


def test_generator_quarter_binary():
    # binary alphabet needs some never-satisfiable constraints to go low
    instance, value = find_low_value_instance(
        8, 2, 2, Fraction(1, 4), seed=2, num_constraints=24,
        allowed_sizes=(0, 0, 0, 1), attempts=100)
    assert value <= Fraction(1, 4)
    assert value == csp_value_exact(instance)[0]


def test_generator_quarter_ternary():
    instance, value = find_low_value_instance(
        4, 3, 2, Fraction(1, 4), seed=11, num_constraints=32, attempts=100)
    assert value <= Fraction(1, 4)


def test_generator_cap():
    with pytest.raises(GeneratorCapError):
        find_low_value_instance(3, 2, 2, Fraction(-1), seed=5,
                                num_constraints=2, attempts=5)


# -- conversions -------------------------------------------------------------


def test_edge_game_identity_projection():
    lc = LabelCover(1, 1, 2, 2, ((0, 0),), ((0, 1),))
    assert classical_value(edge_game(lc))[0] == 1


def test_edge_game_matches_value():
    val = oracles.naive_label_cover_value(STAR_LC)
    assert val == Fraction(2, 3)
    assert csp_value_exact(STAR_LC.to_csp())[0] == val
    assert classical_value(edge_game(STAR_LC))[0] == val


def test_edge_game_random_label_covers():
    rng = random.Random(61)
    for _ in range(8):
        lc = helpers.random_label_cover(rng)
        val = oracles.naive_label_cover_value(lc)
        assert csp_value_exact(lc.to_csp())[0] == val
        assert classical_value(edge_game(lc))[0] == val


def test_consistency_game_satisfiable():
    rng = random.Random(67)
    lc = helpers.satisfiable_label_cover(rng)
    assert classical_value(consistency_game(lc))[0] == 1


def test_consistency_game_soundness_relation():
    val = oracles.naive_label_cover_value(STAR_LC)
    cons_value = classical_value(consistency_game(STAR_LC))[0]
    assert cons_value == Fraction(5, 6)  # this instance meets the cap
    assert cons_value <= (1 + val) / 2
    rng = random.Random(71)
    for _ in range(6):
        lc = helpers.random_label_cover(rng)
        val = oracles.naive_label_cover_value(lc)
        assert classical_value(consistency_game(lc))[0] <= (1 + val) / 2


def test_consistency_game_single_edge():
    lc = LabelCover(1, 1, 1, 1, ((0, 0),), ((0,),))
    assert classical_value(consistency_game(lc))[0] == 1


def test_parallel_edges_rejected():
    with pytest.raises(InvalidInputError):
        LabelCover(1, 1, 2, 2, ((0, 0), (0, 0)), ((0, 1), (1, 0)))


# -- verifier acceptance and cheating ----------------------------------------


def test_honest_profile_perfect_completeness():
    rng = random.Random(73)
    for _ in range(5):
        c, planted = helpers.satisfiable_csp(rng)
        profile = CheatProfile((planted, planted))
        assert cheat_acceptance(c, profile) == 1


def test_unsatisfiable_constraint_contributes_nothing():
    c = CspInstance(2, 2, 2, (make_constraint((0, 1), []),))
    profile = CheatProfile(((0, 0), (1, 1)))
    assert cheat_acceptance(c, profile) == 0


def test_disagreeing_assignments_cap_constraint():
    # the only satisfying tuple is (0,0); both of the second prover's
    # assignments put 1 everywhere, so at most one position can agree
    c = CspInstance(2, 2, 2, (make_constraint((0, 1), [(0, 0)]),))
    profile = CheatProfile(((1, 1), (1, 1)))
    assert cheat_acceptance(c, profile) == 0
    half = CheatProfile(((0, 1), (1, 0)))
    assert cheat_acceptance(c, half) == Fraction(1, 2)


def test_best_response_reproduces_acceptance():
    rng = random.Random(79)
    c, planted = helpers.satisfiable_csp(rng, num_vars=4, num_constraints=6)
    other = tuple(rng.randrange(2) for _ in range(4))
    profile = CheatProfile((planted, other))
    response = best_response(c, profile)
    total = Fraction(sum(agree for _, _, agree in response),
                     c.arity * len(c.constraints))
    assert total == cheat_acceptance(c, profile)
    for (msg, tup, _), con in zip(response, c.constraints):
        assert msg in (0, 1)
        if con.allowed:
            assert tup in con.allowed_set


def test_optimal_cheat_satisfiable_instance():
    c, _ = helpers.satisfiable_csp(random.Random(83), num_vars=4,
                                   num_constraints=5)
    for bits in (0, 1):
        value, profile = optimal_cheat(c, bits)
        assert value == 1
        assert cheat_acceptance(c, profile) == 1


def test_optimal_cheat_zero_bits_naive():
    rng = random.Random(89)
    for _ in range(4):
        instance, _ = find_low_value_instance(
            3, 2, 2, Fraction(1), seed=rng.randrange(1000),
            num_constraints=4)
        value, profile = optimal_cheat(instance, 0)
        assert value == oracles.naive_optimal_cheat(instance, 0)
        assert cheat_acceptance(instance, profile) == value


def test_optimal_cheat_matches_naive_full_enumeration():
    # tiny instances: the oracle scans every (behavior, profile) pair
    rng = random.Random(97)
    for _ in range(3):
        cons = tuple(make_constraint(
            (rng.randrange(3), rng.randrange(3)),
            rng.sample([(0, 0), (0, 1), (1, 0), (1, 1)], 2))
            for _ in range(2))
        c = CspInstance(3, 2, 2, cons)
        value, profile = optimal_cheat(c, 1)
        assert value == oracles.naive_optimal_cheat(c, 1)
        assert cheat_acceptance(c, profile) == value


def test_optimal_cheat_monotone_in_bits():
    instance, _ = find_low_value_instance(4, 2, 2, Fraction(1), seed=31,
                                          num_constraints=8,
                                          allowed_sizes=(1, 2))
    v0 = optimal_cheat(instance, 0)[0]
    v1 = optimal_cheat(instance, 1)[0]
    v2 = optimal_cheat(instance, 2)[0]
    assert v0 <= v1 <= v2


def test_optimal_cheat_pair_scan_matches_plain_pair_loop():
    # the accelerated 2-slot scan against a direct double loop over
    # ordered assignment pairs, acceptance recomputed per pair
    rng = random.Random(41)
    for _ in range(3):
        cons = tuple(make_constraint(
            (rng.randrange(2), rng.randrange(2)),
            rng.sample(list(itertools.product(range(3), repeat=2)), 2))
            for _ in range(5))
        c = CspInstance(2, 3, 2, cons)
        value, profile = optimal_cheat(c, 1)
        assignments = list(itertools.product(range(3), repeat=2))
        best = Fraction(0)
        best_pair = None
        for pair in itertools.product(assignments, repeat=2):
            acc = cheat_acceptance(c, CheatProfile(pair))
            if acc > best:
                best = acc
                best_pair = pair
        assert value == best
        assert profile.leak_bits == 1
        assert cheat_acceptance(c, profile) == best


def test_optimal_cheat_budget():
    c, _ = helpers.satisfiable_csp(random.Random(5), num_vars=8)
    with pytest.raises(BudgetExceededError):
        optimal_cheat(c, 2, budget=1000)


def test_profile_validation():
    with pytest.raises(InvalidInputError):
        CheatProfile(((0, 0), (0, 0), (0, 0)))  # not a power of two
    profile = CheatProfile(((0, 0),))
    with pytest.raises(InvalidInputError):
        profile.check_shapes(CspInstance(3, 2, 2,
                                         (make_constraint((0, 1), NE),)))


# -- file format -------------------------------------------------------------


def test_csp_round_trip():
    rng = random.Random(101)
    for _ in range(6):
        c, _ = helpers.satisfiable_csp(rng, num_vars=4, alphabet=3,
                                       num_constraints=5)
        assert load_instance(save_csp(c)) == c


def test_csp_round_trip_empty_allowed():
    c = CspInstance(2, 2, 2, (make_constraint((0, 1), []),))
    assert load_instance(save_csp(c)) == c


def test_label_cover_round_trip():
    rng = random.Random(103)
    for _ in range(6):
        lc = helpers.random_label_cover(rng)
        assert load_instance(save_label_cover(lc)) == lc


def test_format_errors():
    with pytest.raises(FormatError, match="header"):
        load_instance("nope 1 2 3\n")
    with pytest.raises(FormatError, match="scope"):
        load_instance("csp 2 2 2\ncon 0 : 00\n")
    with pytest.raises(FormatError, match="alphabet"):
        load_instance("csp 2 2 2\ncon 0 1 : 05\n")
    with pytest.raises(FormatError, match="lc"):
        load_instance("csp 2 2 2\ncon 0 1 : 01\ne 0 0 : 0 1\n")
    with pytest.raises(FormatError, match="disagree"):
        load_instance("csp 2 2 2\nlc 1 1 2 2\ncon 0 1 : 00 11\n"
                      "e 0 0 : 0 0\n")


def test_format_error_line_numbers():
    with pytest.raises(FormatError) as err:
        load_instance("csp 2 2 2\n# fine\ncon 0 1 : xx\n")
    assert err.value.line_no == 3


def test_optimal_cheat_at_least_value():
    # playing the best assignment honestly is one available cheat
    rng = random.Random(107)
    for _ in range(5):
        c, _ = helpers.satisfiable_csp(rng, num_vars=4, num_constraints=6)
        val, _ = csp_value_exact(c)
        assert optimal_cheat(c, 0)[0] >= val


def test_edge_game_leakage_inflation():
    from leakygames.leakage import leaky_value_exact, one_way_ab
    rng = random.Random(109)
    for _ in range(6):
        lc = helpers.random_label_cover(rng, max_left=2, max_right=2)
        val = oracles.naive_label_cover_value(lc)
        game = edge_game(lc)
        for bits in (0, 1):
            leaky, _ = leaky_value_exact(game, one_way_ab(bits))
            assert leaky <= min(Fraction(1), (1 << bits) * val)
