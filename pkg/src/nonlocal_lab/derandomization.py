"""Reducing public randomness by sampling, with Hoeffding accounting.

A public-coin family is a distribution over deterministic strategies (or
classical protocols) for a game.  ``V(x, y, r)`` is the error of member r on
input pair (x, y); all errors are exact rationals.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

from .classical import DeterministicStrategy, optimal_strategies
from .errors import InputError, NonNormalizedMixture
from .games import Game, chsh, magic_square, to_fraction
from .protocols import ClassicalProtocol, run_classical

Member = Union[DeterministicStrategy, ClassicalProtocol]


def _error_table(g: Game, member: Member) -> np.ndarray:
    """Object array ``V[x, y]`` of Fractions."""
    nx, ny, _, _ = g.shape
    if isinstance(member, DeterministicStrategy):
        out = np.empty((nx, ny), dtype=object)
        for x in range(nx):
            for y in range(ny):
                out[x, y] = Fraction(0 if g.accepts[x, y, member.alice[x], member.bob[y]] else 1)
        return out
    run = run_classical(member, g)
    out = np.empty((nx, ny), dtype=object)
    for x in range(nx):
        for y in range(ny):
            won = sum(run.distribution[x, y][g.accepts[x, y]], Fraction(0))
            out[x, y] = 1 - won
    return out


@dataclass(frozen=True, eq=False)
class PublicCoinFamily:
    game: Game
    weights: tuple[Fraction, ...]
    members: tuple[Member, ...]

    def __post_init__(self) -> None:
        w = tuple(to_fraction(v) for v in self.weights)
        if len(w) != len(self.members) or not w:
            raise InputError("need one weight per member and at least one member")
        if any(v < 0 for v in w) or sum(w) != 1:
            raise NonNormalizedMixture(f"weights sum to {sum(w)}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "_errors", np.array([_error_table(self.game, m) for m in self.members]))

    @property
    def errors(self) -> np.ndarray:
        """``V[r, x, y]`` as Fractions."""
        return self._errors  # type: ignore[attr-defined]

    def input_errors(self) -> np.ndarray:
        """``sum_r Pi(r) V[r, x, y]`` per input pair."""
        nx, ny = self.errors.shape[1:]
        out = np.full((nx, ny), Fraction(0), dtype=object)
        for w, table in zip(self.weights, self.errors):
            if w:
                out = out + w * table
        return out


def hoeffding_tail(t: int, delta: float) -> float:
    """``2 exp(-2 delta^2 t)``."""
    if t < 1:
        raise InputError("t must be at least 1")
    if delta <= 0:
        raise InputError("delta must be positive")
    return 2 * math.exp(-2 * delta * delta * t)


def newman_samples(nx: int, ny: int, delta: float) -> int:
    """``2 * ceil(ln(2 |X| |Y|) / (2 delta^2))``."""
    return 2 * math.ceil(math.log(2 * nx * ny) / (2 * delta * delta))


def max_input_error(f: PublicCoinFamily) -> tuple[Fraction, tuple[int, int]]:
    """Worst averaged error over input pairs in the game's support; ties go
    to the first pair in row-major order."""
    errs = f.input_errors()
    best, where = Fraction(-1), (0, 0)
    for x, y in f.game.support():
        if errs[x, y] > best:
            best, where = errs[x, y], (x, y)
    return best, where


class AliasTable:
    """Vose's alias method over a finite distribution."""

    def __init__(self, weights: Sequence[Fraction | float]) -> None:
        n = len(weights)
        total = float(sum(weights))
        scaled = [float(w) * n / total for w in weights]
        self.prob = [0.0] * n
        self.alias = list(range(n))
        small = [i for i, v in enumerate(scaled) if v < 1]
        large = [i for i, v in enumerate(scaled) if v >= 1]
        while small and large:
            s, l = small.pop(), large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] -= 1 - scaled[s]
            (small if scaled[l] < 1 else large).append(l)
        for i in small + large:
            self.prob[i] = 1.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        n = len(self.prob)
        cols = rng.integers(0, n, size=size)
        coins = rng.random(size)
        prob = np.asarray(self.prob)[cols]
        return np.where(coins < prob, cols, np.asarray(self.alias)[cols])


class NewmanSample(NamedTuple):
    family: PublicCoinFamily
    indices: tuple[int, ...]
    random_bits: int


def newman_sample(f: PublicCoinFamily, t: int, seed: int | None = None, *, exhaustive: bool = False) -> NewmanSample:
    """Uniform mixture over t members drawn i.i.d. from the family's weights.

    ``random_bits`` is ``ceil(log2 t)``.  With ``exhaustive`` no sampling
    happens: the result keeps every member with its original weight, which
    is what t independent draws approximate.
    """
    if t < 1:
        raise InputError("t must be at least 1")
    if exhaustive:
        idx = tuple(range(len(f.members)))
        return NewmanSample(f, idx, math.ceil(math.log2(len(idx))) if len(idx) > 1 else 0)
    rng = np.random.default_rng(seed)
    idx = tuple(int(i) for i in AliasTable(f.weights).sample(rng, t))
    reduced = PublicCoinFamily(f.game, (Fraction(1, t),) * t, tuple(f.members[i] for i in idx))
    return NewmanSample(reduced, idx, math.ceil(math.log2(t)) if t > 1 else 0)


def sampled_max_error(f: PublicCoinFamily, indices: Sequence[int]) -> Fraction:
    """Max input error of the uniform mixture over ``indices``, computed from
    member counts without building the reduced family."""
    counts = np.bincount(np.asarray(indices), minlength=len(f.members))
    t = len(indices)
    best = Fraction(0)
    for x, y in f.game.support():
        total = sum(int(c) * f.errors[r, x, y] for r, c in enumerate(counts) if c)
        best = max(best, Fraction(total) / t)
    return best


def losing_cells(g: Game, s: DeterministicStrategy) -> list[tuple[int, int]]:
    return [(x, y) for x, y in g.support() if not g.accepts[x, y, s.alice[x], s.bob[y]]]


def _distinct_losers(g: Game, k: int) -> list[DeterministicStrategy]:
    chosen, used = [], set()
    for s in optimal_strategies(g):
        cells = losing_cells(g, s)
        if len(cells) == 1 and cells[0] not in used:
            chosen.append(s)
            used.add(cells[0])
            if len(chosen) == k:
                break
    return chosen


def chsh_mixture_family() -> PublicCoinFamily:
    """Uniform mixture of the four optimal CHSH strategies that each lose on
    a different question pair."""
    g = chsh()
    members = _distinct_losers(g, 4)
    return PublicCoinFamily(g, (Fraction(1, 4),) * 4, members)


def magic_square_family() -> PublicCoinFamily:
    """Uniform mixture of four optimal magic-square strategies losing on
    four different cells."""
    g = magic_square()
    members = _distinct_losers(g, 4)
    return PublicCoinFamily(g, (Fraction(1, 4),) * 4, members)
