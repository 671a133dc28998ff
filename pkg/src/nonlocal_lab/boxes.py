"""Correlation boxes P(a, b | x, y): the PR box, non-signaling checks,
game values of boxes and the CSV exchange format.

Tables are indexed ``[x, y, a, b]`` like the game predicate.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import InputError, ShapeMismatch
from .games import Game

NS_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Box:
    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.table, dtype=float)
        if t.ndim != 4:
            raise ShapeMismatch(f"box table must be 4-d [x, y, a, b], got shape {t.shape}")
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.table.shape  # type: ignore[return-value]

    def alice_marginals(self) -> np.ndarray:
        """``[x, y, a]`` = sum_b P(a, b | x, y)."""
        return self.table.sum(axis=3)

    def bob_marginals(self) -> np.ndarray:
        """``[x, y, b]`` = sum_a P(a, b | x, y)."""
        return self.table.sum(axis=2)

    def normalization_error(self) -> float:
        return float(np.abs(self.table.sum(axis=(2, 3)) - 1).max())

    def is_valid(self, tol: float = NS_TOL) -> bool:
        return self.table.min() >= -1e-12 and self.normalization_error() <= tol


class NonSignalingReport(NamedTuple):
    ok: bool
    violation: float


def pr_box() -> Box:
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                t[x, y, a, a ^ (x & y)] = 0.5
    return Box(t)


def uniform_box(nx: int, ny: int, na: int, nb: int) -> Box:
    return Box(np.full((nx, ny, na, nb), 1.0 / (na * nb)))


def is_nonsignaling(b: Box, tol: float = NS_TOL) -> NonSignalingReport:
    """Check that Alice's marginal ignores y and Bob's ignores x.

    The reported violation is the largest absolute deviation of any marginal
    entry from the same entry at the first question of the other party.
    """
    if tol <= 0:
        raise InputError("tolerance must be positive")
    pa = b.alice_marginals()
    pb = b.bob_marginals()
    va = np.abs(pa - pa[:, :1, :]).max()
    vb = np.abs(pb - pb[:1, :, :]).max()
    worst = float(max(va, vb))
    return NonSignalingReport(worst <= tol, worst)


def box_value(g: Game, b: Box) -> float:
    if b.shape != g.shape:
        raise ShapeMismatch(f"box shape {b.shape} does not match game {g.shape}")
    per_question = (b.table * g.accepts).sum(axis=(2, 3))
    return float((g.weights * per_question).sum())


def coarse_grain(
    b: Box,
    alice_map: Callable[[int, int], int],
    bob_map: Callable[[int, int], int],
    na: int,
    nb: int,
) -> Box:
    """Push raw outcomes through ``alice_map(x, k)`` and ``bob_map(y, l)``."""
    nx, ny, ka, kb = b.shape
    out = np.zeros((nx, ny, na, nb))
    for x in range(nx):
        amap = [alice_map(x, k) for k in range(ka)]
        for y in range(ny):
            bmap = [bob_map(y, l) for l in range(kb)]
            for k in range(ka):
                for l in range(kb):
                    out[x, y, amap[k], bmap[l]] += b.table[x, y, k, l]
    return Box(out)


def box_to_csv(b: Box) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "a", "b", "p"])
    for (x, y, a, bb), p in np.ndenumerate(b.table):
        w.writerow([x, y, a, bb, format(float(p), ".17g")])
    return buf.getvalue()


def box_from_csv(text: str) -> Box:
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows or set(rows[0]) != {"x", "y", "a", "b", "p"}:
        raise InputError("box CSV needs header x,y,a,b,p")
    idx = np.array([[int(r[k]) for k in "xyab"] for r in rows])
    shape = tuple(idx.max(axis=0) + 1)
    t = np.zeros(shape)
    for (x, y, a, bb), r in zip(idx, rows):
        t[x, y, a, bb] = float(r["p"])
    return Box(t)


def save_box_csv(b: Box, path: str | Path) -> None:
    Path(path).write_text(box_to_csv(b))
