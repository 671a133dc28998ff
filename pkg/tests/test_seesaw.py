from fractions import Fraction

import numpy as np

from nonlocal_lab import games
from nonlocal_lab.quantum import winning_probability
from nonlocal_lab.seesaw import seesaw_lower_bound


def test_trivial_predicate_reaches_one():
    g = games.make_game(2, 2, 2, 2, {(x, y): Fraction(1, 4) for x in range(2) for y in range(2)}, lambda *q: True)
    res = seesaw_lower_bound(g, 2, iterations=1)
    assert abs(res.value - 1) < 1e-12


def test_chsh_reaches_tsirelson_and_is_monotone():
    res = seesaw_lower_bound(games.chsh(), 2, iterations=200, restarts=10)
    assert res.value >= 0.8535
    assert all(b >= a - 1e-12 for a, b in zip(res.history, res.history[1:]))
    assert res.strategy.completeness_error() < 1e-9
    assert abs(winning_probability(games.chsh(), res.strategy) - res.value) < 1e-12


def test_deterministic_under_seed():
    a = seesaw_lower_bound(games.chsh(), 2, iterations=30, seed=4, restarts=3, workers=1)
    b = seesaw_lower_bound(games.chsh(), 2, iterations=30, seed=4, restarts=3, workers=3)
    assert a.value == b.value and a.history == b.history
    assert np.array_equal(a.strategy.state, b.strategy.state)


def test_one_dimension_is_classical():
    res = seesaw_lower_bound(games.chsh(), 1, iterations=20, restarts=3)
    assert res.value <= 0.75 + 1e-12
