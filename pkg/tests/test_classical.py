import itertools
from fractions import Fraction

import numpy as np
import pytest

from nonlocal_lab import games
from nonlocal_lab.classical import (
    DeterministicStrategy,
    StrategyMixture,
    brute_force_value,
    classical_value_best_response,
    classical_value_exact,
    evaluate_deterministic,
    evaluate_mixture,
    optimal_strategies,
    perfect_strategy,
    product_strategy,
)
from nonlocal_lab.errors import EnumerationBudgetExceeded, NonNormalizedMixture, StrategyShapeMismatch


def test_chsh_constant_strategy():
    assert evaluate_deterministic(games.chsh(), DeterministicStrategy((0, 0), (0, 0))) == Fraction(3, 4)


def test_trivial_predicate_value_one():
    g = games.make_game(2, 3, 2, 2, {(x, y): Fraction(1, 6) for x in range(2) for y in range(3)}, lambda *q: True)
    assert evaluate_deterministic(g, DeterministicStrategy((1, 0), (0, 1, 0))) == 1


def test_magic_square_nine_term_sum():
    g = games.magic_square()
    a, b = g.answers_a.index("000"), g.answers_b.index("100")
    s = DeterministicStrategy((a,) * 3, (b,) * 3)

    def wins(row, col):
        r, c = "000", "100"
        return r.count("1") % 2 == 0 and c.count("1") % 2 == 1 and r[col] == c[row]

    expected = sum(Fraction(1, 9) for row in range(3) for col in range(3) if wins(row, col))
    assert evaluate_deterministic(g, s) == expected


def test_shape_mismatch():
    with pytest.raises(StrategyShapeMismatch):
        evaluate_deterministic(games.chsh(), DeterministicStrategy((0,), (0, 0)))
    with pytest.raises(StrategyShapeMismatch):
        evaluate_deterministic(games.chsh(), DeterministicStrategy((0, 2), (0, 0)))


def test_exact_values():
    assert classical_value_exact(games.chsh())[0] == brute_force_value(games.chsh()) == Fraction(3, 4)
    value, strat = classical_value_exact(games.magic_square())
    assert value == Fraction(8, 9)
    assert evaluate_deterministic(games.magic_square(), strat) == value


def test_chsh_squared_against_oracle():
    g = games.parallel_repeat(games.chsh(), 2)
    v = classical_value_exact(g)[0]
    assert v >= Fraction(9, 16)
    assert v == brute_force_value(g)


def test_enumeration_budget():
    with pytest.raises(EnumerationBudgetExceeded):
        classical_value_exact(games.magic_square(), budget=100)


def test_threaded_enumeration_matches(monkeypatch):
    g = games.parallel_repeat(games.chsh(), 2)
    assert classical_value_exact(g, workers=4) == classical_value_exact(g, workers=1)
    monkeypatch.setenv("NONLOCAL_LAB_THREADS", "3")
    assert classical_value_exact(g)[0] == Fraction(5, 8)


def test_single_entry_mixture():
    g = games.chsh()
    s = DeterministicStrategy((0, 1), (1, 0))
    assert evaluate_mixture(g, StrategyMixture([(1, s)])) == evaluate_deterministic(g, s)


def test_uniform_constant_mixture():
    g = games.chsh()
    entries = []
    for a in itertools.product(range(2), repeat=2):
        for b in itertools.product(range(2), repeat=2):
            entries.append((Fraction(1, 16), DeterministicStrategy(a, b)))
    expected = sum(evaluate_deterministic(g, s) for _, s in entries) / 16
    assert evaluate_mixture(g, StrategyMixture(entries)) == expected
    assert expected <= Fraction(3, 4)


def test_mixture_must_be_normalized():
    with pytest.raises(NonNormalizedMixture):
        evaluate_mixture(games.chsh(), StrategyMixture([(Fraction(1, 2), DeterministicStrategy((0, 0), (0, 0)))]))


def test_best_response_from_every_chsh_start():
    g = games.chsh()
    for a in itertools.product(range(2), repeat=2):
        for b in itertools.product(range(2), repeat=2):
            res = classical_value_best_response(g, DeterministicStrategy(a, b))
            assert res.value == Fraction(3, 4)
            assert evaluate_deterministic(g, res.strategy) == res.value
            assert list(res.history) == sorted(res.history)


def test_best_response_trivial_game():
    g = games.make_game(2, 2, 2, 2, {(0, 0): 1}, lambda *q: True)
    res = classical_value_best_response(g)
    assert res.value == 1 and len(res.history) == 1


def test_best_response_on_repeated_magic_square():
    g = games.magic_square()
    s = classical_value_exact(g)[1]
    g2 = games.parallel_repeat(g, 2)
    res = classical_value_best_response(g2, product_strategy([s, s], g))
    assert res.value >= Fraction(64, 81)


def test_best_response_random_seed_is_deterministic():
    g = games.magic_square()
    assert classical_value_best_response(g, 7) == classical_value_best_response(g, 7)


def test_optimal_strategies_all_attain_value():
    g = games.chsh()
    opt = optimal_strategies(g)
    assert len(opt) == 8
    assert all(evaluate_deterministic(g, s) == Fraction(3, 4) for s in opt)


def test_perfect_strategy_search():
    assert perfect_strategy(games.chsh()) is None
    assert perfect_strategy(games.magic_square()) is None
    s = perfect_strategy(games.nonlocal_dj(4))
    assert s is not None and evaluate_deterministic(games.nonlocal_dj(4), s) == 1


def test_values_in_unit_interval():
    rng = np.random.default_rng(5)
    for _ in range(5):
        pred = rng.integers(0, 2, size=(2, 3, 2, 2)).astype(bool)
        g = games.make_game(2, 3, 2, 2, {(x, y): Fraction(1, 6) for x in range(2) for y in range(3)}, pred)
        v = classical_value_exact(g)[0]
        assert 0 <= v <= 1
