"""Game values over the non-signaling polytope, via the hand-written simplex."""

from __future__ import annotations

import numpy as np

from .boxes import Box
from .errors import SizeBudgetExceeded
from .games import Game
from .simplex import LinearProgram, simplex_solve

DEFAULT_LP_VARS = 2048


def nonsignaling_lp(g: Game) -> LinearProgram:
    """LP over ``p[x, y, a, b]`` (flattened C-order) maximizing the game value.

    Normalization is one equality per question pair.  Each non-signaling
    equality (Alice's marginal at ``y`` equals the one at ``y = 0``, and the
    same for Bob with ``x``) is written as two opposite ``<=`` rows.
    """
    nx, ny, na, nb = g.shape
    idx = np.arange(nx * ny * na * nb).reshape(nx, ny, na, nb)
    nvar = idx.size
    rows: list[np.ndarray] = []
    senses: list[str] = []
    rhs: list[float] = []

    for x in range(nx):
        for y in range(ny):
            r = np.zeros(nvar)
            r[idx[x, y].ravel()] = 1.0
            rows.append(r)
            senses.append("=")
            rhs.append(1.0)

    def pair(plus: np.ndarray, minus: np.ndarray) -> None:
        r = np.zeros(nvar)
        r[plus] += 1.0
        r[minus] -= 1.0
        rows.extend([r, -r])
        senses.extend(["<=", "<="])
        rhs.extend([0.0, 0.0])

    for x in range(nx):
        for a in range(na):
            for y in range(1, ny):
                pair(idx[x, y, a, :], idx[x, 0, a, :])
    for y in range(ny):
        for b in range(nb):
            for x in range(1, nx):
                pair(idx[x, y, :, b], idx[0, y, :, b])

    c = (g.weights[:, :, None, None] * g.accepts).ravel()
    return LinearProgram(c, np.array(rows), np.array(rhs), senses)


def nonsignaling_value(g: Game, *, budget: int = DEFAULT_LP_VARS, max_iter: int | None = None) -> tuple[float, Box]:
    nvar = int(np.prod(g.shape))
    if nvar > budget:
        raise SizeBudgetExceeded(f"non-signaling LP needs {nvar} variables, budget is {budget}")
    lp = nonsignaling_lp(g)
    res = simplex_solve(lp, max_iter=max_iter)
    table = res.x.reshape(g.shape)
    return res.value, Box(table)
