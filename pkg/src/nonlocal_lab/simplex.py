"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``max c.x`` subject to ``A x (<=|=|>=) b`` and ``x >= 0``.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import Infeasible, InputError, IterationLimit, Unbounded

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
SENSES = ("<=", "=", ">=")


@dataclass(frozen=True, eq=False)
class LinearProgram:
    objective: np.ndarray
    matrix: np.ndarray
    bounds: np.ndarray
    senses: tuple[str, ...]

    def __init__(self, objective, matrix, bounds, senses: Sequence[str] | None = None) -> None:
        c = np.asarray(objective, dtype=float).reshape(-1)
        a = np.atleast_2d(np.asarray(matrix, dtype=float)) if np.size(matrix) else np.zeros((0, c.size))
        b = np.asarray(bounds, dtype=float).reshape(-1)
        senses = tuple(senses) if senses is not None else ("<=",) * len(b)
        if a.shape != (len(b), c.size) or len(senses) != len(b):
            raise InputError(f"inconsistent LP dimensions: c {c.shape}, A {a.shape}, b {b.shape}, senses {len(senses)}")
        if any(s not in SENSES for s in senses):
            raise InputError(f"constraint senses must be among {SENSES}")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "senses", senses)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def dump(self) -> str:
        """Plain-text listing: the objective, then one constraint per line."""

        def row(coefs: np.ndarray) -> str:
            terms = [f"{v:+.17g}*x{j}" for j, v in enumerate(coefs) if v != 0]
            return " ".join(terms) if terms else "0"

        lines = [f"maximize {row(self.objective)}"]
        for coefs, s, rhs in zip(self.matrix, self.senses, self.bounds):
            lines.append(f"{row(coefs)} {s} {rhs:.17g}")
        return "\n".join(lines) + "\n"


class LPResult(NamedTuple):
    value: float
    x: np.ndarray
    iterations: int


def _pivot(t: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    factor = t[:, col].copy()
    factor[row] = 0
    rows = np.flatnonzero(factor)
    cols = np.flatnonzero(t[row])
    # game LPs are sparse: only touch the affected block
    if rows.size * cols.size < t.size // 4:
        t[np.ix_(rows, cols)] -= np.outer(factor[rows], t[row, cols])
    else:
        t -= np.outer(factor, t[row])


def _run(t: np.ndarray, basis: list[int], allowed: int, tol: float, budget: list[int]) -> None:
    """Bland-rule pivoting on tableau ``t`` whose last row holds reduced costs
    ``-c`` (maximization: stop when none is negative)."""
    m = t.shape[0] - 1
    while True:
        costs = t[-1, :allowed]
        candidates = np.flatnonzero(costs < -tol)
        if candidates.size == 0:
            return
        col = int(candidates[0])
        column = t[:m, col]
        rows = np.flatnonzero(column > tol)
        if rows.size == 0:
            raise Unbounded(f"objective unbounded along variable {col}")
        ratios = t[rows, -1] / column[rows]
        best = ratios.min()
        ties = rows[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda r: basis[r]))
        if budget[0] <= 0:
            raise IterationLimit("simplex iteration limit reached")
        budget[0] -= 1
        _pivot(t, row, col)
        basis[row] = col


def simplex_solve(lp: LinearProgram, *, max_iter: int | None = None, tol: float = PIVOT_TOL) -> LPResult:
    n, m = lp.n_vars, len(lp.bounds)
    a = lp.matrix.copy()
    b = lp.bounds.copy()
    senses = list(lp.senses)
    for i in range(m):
        if b[i] < 0:
            a[i], b[i] = -a[i], -b[i]
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]

    slack_rows = [i for i in range(m) if senses[i] != "="]
    art_rows = [i for i in range(m) if senses[i] != "<="]
    n_slack, n_art = len(slack_rows), len(art_rows)
    width = n + n_slack + n_art
    t = np.zeros((m + 1, width + 1))
    t[:m, :n] = a
    t[:m, -1] = b
    basis = [-1] * m
    for k, i in enumerate(slack_rows):
        t[i, n + k] = 1.0 if senses[i] == "<=" else -1.0
        if senses[i] == "<=":
            basis[i] = n + k
    for k, i in enumerate(art_rows):
        t[i, n + n_slack + k] = 1.0
        basis[i] = n + n_slack + k

    budget = [max_iter if max_iter is not None else 50 * (m + n) + 1000]
    start = budget[0]

    if n_art:
        # phase one: maximize -sum(artificials)
        t[-1, n + n_slack : width] = 1.0
        for i in art_rows:
            t[-1] -= t[i]
        _run(t, basis, width, tol, budget)
        if t[-1, -1] < -FEAS_TOL * max(1.0, np.abs(b).max(initial=0)):
            raise Infeasible(f"phase one ended with infeasibility {-t[-1, -1]:.3g}")
        # pivot remaining artificials out of the basis or drop redundant rows
        keep = []
        for i in range(m):
            if basis[i] >= n + n_slack:
                cols = np.flatnonzero(np.abs(t[i, : n + n_slack]) > tol)
                if cols.size == 0:
                    continue
                _pivot(t, i, int(cols[0]))
                basis[i] = int(cols[0])
            keep.append(i)
        t = np.vstack([t[keep], t[-1:]])
        basis = [basis[i] for i in keep]
        t = np.hstack([t[:, : n + n_slack], t[:, -1:]])
        m = len(basis)

    width = n + n_slack
    t[-1] = 0.0
    t[-1, :n] = -lp.objective
    for i, j in enumerate(basis):
        if t[-1, j] != 0:
            t[-1] -= t[-1, j] * t[i]
    _run(t, basis, width, tol, budget)

    x = np.zeros(width)
    for i, j in enumerate(basis):
        x[j] = t[i, -1]
    x = np.clip(x[:n], 0.0, None)
    return LPResult(float(lp.objective @ x), x, start - budget[0])
