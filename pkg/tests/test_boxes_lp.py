import numpy as np
import pytest

from oracles import lp_corpus, vertex_enumeration

from nonlocal_lab import games
from nonlocal_lab.boxes import (
    Box,
    box_from_csv,
    box_to_csv,
    box_value,
    coarse_grain,
    is_nonsignaling,
    pr_box,
    uniform_box,
)
from nonlocal_lab.errors import Infeasible, InputError, IterationLimit, ShapeMismatch, SizeBudgetExceeded, Unbounded
from nonlocal_lab.nonsignaling import nonsignaling_lp, nonsignaling_value
from nonlocal_lab.quantum import correlation_table, mermin_peres_strategy
from nonlocal_lab.simplex import LinearProgram, simplex_solve


def test_pr_box_properties():
    pr = pr_box()
    assert box_value(games.chsh(), pr) == 1
    rep = is_nonsignaling(pr)
    assert rep.ok and rep.violation < 1e-15
    assert (pr.table.sum(axis=(2, 3)) == 1).all()


def test_signaling_box_detected():
    t = np.full((2, 2, 2, 2), 0.25)
    # shift Alice's marginal on y = 1 by 0.2
    t[0, 1, 0, :] += 0.1
    t[0, 1, 1, :] -= 0.1
    rep = is_nonsignaling(Box(t))
    assert not rep.ok and abs(rep.violation - 0.2) < 1e-12
    with pytest.raises(InputError):
        is_nonsignaling(Box(t), 0)


def test_box_values():
    assert box_value(games.chsh(), uniform_box(2, 2, 2, 2)) == 0.5
    assert abs(box_value(games.magic_square(), correlation_table(mermin_peres_strategy())) - 1) < 1e-9
    with pytest.raises(ShapeMismatch):
        box_value(games.magic_square(), pr_box())


def test_coarse_grain_and_csv_round_trip():
    merged = coarse_grain(pr_box(), lambda x, k: 0, lambda y, l: l, 1, 2)
    assert merged.shape == (2, 2, 1, 2)
    assert np.allclose(merged.table.sum(axis=(2, 3)), 1)
    back = box_from_csv(box_to_csv(pr_box()))
    assert np.array_equal(back.table, pr_box().table)


def test_simplex_small_examples():
    assert simplex_solve(LinearProgram([1], [[1]], [3])).value == 3
    with pytest.raises(Infeasible):
        simplex_solve(LinearProgram([1], [[-1], [1]], [-1, 0]))
    with pytest.raises(Unbounded):
        simplex_solve(LinearProgram([1, 0], [[0, 1]], [1]))
    with pytest.raises(InputError):
        LinearProgram([1, 2], [[1]], [1])


def test_simplex_iteration_limit():
    lp = nonsignaling_lp(games.magic_square())
    with pytest.raises(IterationLimit):
        simplex_solve(lp, max_iter=3)


def test_simplex_equalities_and_ge():
    res = simplex_solve(LinearProgram([-1, -1], [[1, 2], [1, 0]], [4, 1], [">=", "="]))
    assert abs(res.value + 2.5) < 1e-12
    assert np.allclose(res.x, [1, 1.5])


def test_simplex_matches_vertex_oracle():
    for lp in lp_corpus(seed=1, size=30):
        oracle = vertex_enumeration(lp)
        if oracle is None:
            with pytest.raises(Infeasible):
                simplex_solve(lp)
        else:
            res = simplex_solve(lp)
            assert abs(res.value - oracle) <= 1e-7
            assert (res.x >= -1e-9).all()


def test_lp_dump_lists_every_row():
    lp = LinearProgram([1, 0], [[1, 1], [1, -1]], [2, 0], ["<=", "="])
    lines = lp.dump().splitlines()
    assert lines[0].startswith("maximize") and len(lines) == 3 and "=" in lines[2]


def test_nonsignaling_values():
    v, box = nonsignaling_value(games.chsh())
    assert abs(v - 1) <= 1e-7 and is_nonsignaling(box, 1e-7).ok
    assert abs(nonsignaling_value(games.magic_square())[0] - 1) <= 1e-7
    zero = games.make_game(2, 2, 2, 2, {(0, 0): 1}, lambda *q: False)
    assert abs(nonsignaling_value(zero)[0]) <= 1e-9


def test_nonsignaling_budget():
    with pytest.raises(SizeBudgetExceeded):
        nonsignaling_value(games.nonlocal_dj(4))
    with pytest.raises(SizeBudgetExceeded):
        nonsignaling_value(games.chsh(), budget=8)
