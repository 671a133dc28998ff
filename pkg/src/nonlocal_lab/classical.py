"""Classical values: deterministic strategies, shared-randomness mixtures,
exact brute force, and an alternating best-response heuristic.

All values are exact ``Fraction``.  Internally the question distribution is
scaled to integer weights over a common denominator so that the enumeration
can run on integer numpy arrays without losing exactness.
"""

from __future__ import annotations

import itertools
import math
import os
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import EnumerationBudgetExceeded, NonNormalizedMixture, StrategyShapeMismatch
from .games import Game, lcm_denominator, to_fraction

DEFAULT_ENUM_BUDGET = 10**7
_CHUNK = 4096


@dataclass(frozen=True)
class DeterministicStrategy:
    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alice", tuple(int(a) for a in self.alice))
        object.__setattr__(self, "bob", tuple(int(b) for b in self.bob))


@dataclass(frozen=True)
class StrategyMixture:
    entries: tuple[tuple[Fraction, DeterministicStrategy], ...]

    def __init__(self, entries) -> None:
        object.__setattr__(self, "entries", tuple((to_fraction(w), s) for w, s in entries))

    def total(self) -> Fraction:
        return sum((w for w, _ in self.entries), Fraction(0))


def worker_count() -> int:
    """Worker cap from ``NONLOCAL_LAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("NONLOCAL_LAB_THREADS", "1")))
    except ValueError:
        return 1


def _check_shape(g: Game, s: DeterministicStrategy) -> None:
    nx, ny, na, nb = g.shape
    if len(s.alice) != nx or len(s.bob) != ny:
        raise StrategyShapeMismatch(f"strategy covers {len(s.alice)}x{len(s.bob)} questions, game has {nx}x{ny}")
    if any(not 0 <= a < na for a in s.alice) or any(not 0 <= b < nb for b in s.bob):
        raise StrategyShapeMismatch("strategy answer index out of range")


def _integer_weights(g: Game) -> tuple[np.ndarray, int]:
    den = lcm_denominator(g)
    w = [[int(p * den) for p in row] for row in g.distribution]
    big = max(max(row) for row in w) * g.shape[1] * g.shape[0] >= 2**62
    return np.array(w, dtype=object if big else np.int64), den


def evaluate_deterministic(g: Game, s: DeterministicStrategy) -> Fraction:
    _check_shape(g, s)
    nx, ny = g.shape[:2]
    total = Fraction(0)
    for x in range(nx):
        for y in range(ny):
            if g.accepts[x, y, s.alice[x], s.bob[y]]:
                total += g.distribution[x, y]
    return total


def evaluate_mixture(g: Game, m: StrategyMixture) -> Fraction:
    if any(w < 0 for w, _ in m.entries) or m.total() != 1:
        raise NonNormalizedMixture(f"mixture weights must be nonnegative and sum to 1 (sum {m.total()})")
    return sum((w * evaluate_deterministic(g, s) for w, s in m.entries), Fraction(0))


def _weighted_table(g: Game) -> tuple[np.ndarray, int]:
    """``W[x, y, a, b] = w(x, y) * V(x, y, a, b)`` as integers, plus the denominator."""
    w, den = _integer_weights(g)
    table = g.accepts.astype(w.dtype) * w[:, :, None, None]
    return table, den


def _best_alice(table: np.ndarray, bob: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    """Alice's per-question best response to a fixed Bob strategy (lowest index on ties)."""
    ny = table.shape[1]
    score = table[:, np.arange(ny), :, np.asarray(bob)].sum(axis=0)  # (X, A)
    return int(score.max(axis=1).sum()), tuple(int(a) for a in score.argmax(axis=1))


def _best_bob(table: np.ndarray, alice: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    nx = table.shape[0]
    score = table[np.arange(nx), :, np.asarray(alice), :].sum(axis=0)  # (Y, B)
    return int(score.max(axis=1).sum()), tuple(int(b) for b in score.argmax(axis=1))


def _scan_chunk(table: np.ndarray, start: int, stop: int) -> tuple[int, int]:
    """Best (score, index) over Bob strategies ``start..stop-1`` in mixed-radix order."""
    nx, ny, na, nb = table.shape
    idx = np.arange(start, stop, dtype=np.int64)
    digits = np.empty((stop - start, ny), dtype=np.int64)
    for y in range(ny - 1, -1, -1):
        digits[:, y] = idx % nb
        idx //= nb
    # gathered[s, y, x, a] = table[x, y, a, digits[s, y]]
    gathered = table[:, np.arange(ny)[None, :], :, digits]
    scores = gathered.sum(axis=1).max(axis=2).sum(axis=1)
    best = int(np.argmax(scores))
    return int(scores[best]), start + best


def _bob_from_index(index: int, ny: int, nb: int) -> tuple[int, ...]:
    out = []
    for _ in range(ny):
        index, d = divmod(index, nb)
        out.append(d)
    return tuple(reversed(out))


def classical_value_exact(
    g: Game, *, budget: int = DEFAULT_ENUM_BUDGET, workers: int | None = None
) -> tuple[Fraction, DeterministicStrategy]:
    """Exact classical value by enumerating Bob's strategies and letting Alice
    best-respond per question.

    The budget caps the number of enumerated Bob strategies ``|B|^|Y|``; the
    Alice side is never enumerated.  Ties go to the lowest Bob strategy index in
    lexicographic order, so the result does not depend on ``workers``.
    """
    nx, ny, na, nb = g.shape
    count = nb**ny
    if count > budget:
        raise EnumerationBudgetExceeded(f"{count} Bob strategies exceed the enumeration budget {budget}")
    table, den = _weighted_table(g)
    bounds = [(s, min(s + _CHUNK, count)) for s in range(0, count, _CHUNK)]
    workers = workers or worker_count()
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _scan_chunk(table, *b), bounds))
    else:
        results = [_scan_chunk(table, *b) for b in bounds]
    score, index = max(results, key=lambda r: (r[0], -r[1]))
    bob = _bob_from_index(index, ny, nb)
    _, alice = _best_alice(table, bob)
    return Fraction(score, den), DeterministicStrategy(alice, bob)


def brute_force_value(g: Game) -> Fraction:
    """Naive enumeration of all strategy pairs; only for tiny games (test oracle)."""
    nx, ny, na, nb = g.shape
    best = Fraction(0)
    for alice in itertools.product(range(na), repeat=nx):
        for bob in itertools.product(range(nb), repeat=ny):
            best = max(best, evaluate_deterministic(g, DeterministicStrategy(alice, bob)))
    return best


class BestResponseResult(NamedTuple):
    value: Fraction
    strategy: DeterministicStrategy
    history: tuple[Fraction, ...]
    converged: bool


def classical_value_best_response(
    g: Game,
    init: DeterministicStrategy | int | None = None,
    max_rounds: int = 100,
) -> BestResponseResult:
    """Alternate exact best responses (Alice, then Bob) until a fixed point.

    ``init`` is a starting strategy, a seed for a uniformly random start, or
    ``None`` for the all-zero strategy.  ``history`` records the value after
    each round and is nondecreasing.
    """
    nx, ny, na, nb = g.shape
    if isinstance(init, DeterministicStrategy):
        _check_shape(g, init)
        strat = init
    elif init is None:
        strat = DeterministicStrategy((0,) * nx, (0,) * ny)
    else:
        rng = np.random.default_rng(init)
        strat = DeterministicStrategy(rng.integers(na, size=nx), rng.integers(nb, size=ny))
    table, den = _weighted_table(g)
    history = [evaluate_deterministic(g, strat)]
    converged = False
    for _ in range(max_rounds):
        _, alice = _best_alice(table, strat.bob)
        _, bob = _best_bob(table, alice)
        new = DeterministicStrategy(alice, bob)
        value = evaluate_deterministic(g, new)
        # keep the incumbent on ties so the sequence is a true fixed point
        if value <= history[-1]:
            converged = True
            break
        strat = new
        history.append(value)
    return BestResponseResult(history[-1], strat, tuple(history), converged)


def product_strategy(strategies: Sequence[DeterministicStrategy], g: Game) -> DeterministicStrategy:
    """Coordinate-wise product of strategies for ``parallel_repeat(g, len(strategies))``."""
    nx, ny, na, nb = g.shape
    n = len(strategies)
    alice = []
    for xs in itertools.product(range(nx), repeat=n):
        alice.append(_mixed_radix([s.alice[x] for s, x in zip(strategies, xs)], na))
    bob = []
    for ys in itertools.product(range(ny), repeat=n):
        bob.append(_mixed_radix([s.bob[y] for s, y in zip(strategies, ys)], nb))
    return DeterministicStrategy(alice, bob)


def _mixed_radix(digits: Sequence[int], base: int) -> int:
    value = 0
    for d in digits:
        value = value * base + d
    return value


def optimal_strategies(g: Game, *, budget: int = DEFAULT_ENUM_BUDGET) -> list[DeterministicStrategy]:
    """Every deterministic pair attaining the classical value (small games only)."""
    value, _ = classical_value_exact(g, budget=budget)
    nx, ny, na, nb = g.shape
    if math.prod([na] * nx) * nb**ny > budget:
        raise EnumerationBudgetExceeded("listing all optimal strategies needs full enumeration")
    out = []
    for alice in itertools.product(range(na), repeat=nx):
        for bob in itertools.product(range(nb), repeat=ny):
            s = DeterministicStrategy(alice, bob)
            if evaluate_deterministic(g, s) == value:
                out.append(s)
    return out


def perfect_strategy(g: Game, *, max_nodes: int = 10**6) -> DeterministicStrategy | None:
    """A deterministic strategy winning on every supported question pair, or None.

    Exact backtracking over the answers of both players (fewest remaining
    answers first, with forward checking).  Finding one certifies classical
    value 1 on games far beyond the enumeration budget.
    """
    nx, ny, na, nb = g.shape
    support = [[False] * ny for _ in range(nx)]
    for x, y in g.support():
        support[x][y] = True
    acc = g.accepts
    domains = [np.ones(na, dtype=bool) for _ in range(nx)] + [np.ones(nb, dtype=bool) for _ in range(ny)]
    assigned: list[int | None] = [None] * (nx + ny)
    nodes = 0

    def neighbours(v: int) -> list[int]:
        if v < nx:
            return [nx + y for y in range(ny) if support[v][y]]
        return [x for x in range(nx) if support[x][v - nx]]

    def allowed(v: int, val: int, w: int) -> np.ndarray:
        # answers of w compatible with v answering val
        if v < nx:
            return acc[v, w - nx, val, :]
        return acc[w, v - nx, :, val]

    def search() -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > max_nodes:
            raise EnumerationBudgetExceeded(f"perfect-strategy search exceeded {max_nodes} nodes")
        free = [v for v in range(nx + ny) if assigned[v] is None]
        if not free:
            return True
        v = min(free, key=lambda u: (int(domains[u].sum()), u))
        for val in np.flatnonzero(domains[v]):
            saved = []
            ok = True
            for w in neighbours(v):
                if assigned[w] is None:
                    saved.append((w, domains[w].copy()))
                    domains[w] &= allowed(v, int(val), w)
                    if not domains[w].any():
                        ok = False
                        break
            if ok:
                assigned[v] = int(val)
                if search():
                    return True
                assigned[v] = None
            for w, dom in saved:
                domains[w] = dom
        return False

    if not search():
        return None
    return DeterministicStrategy(tuple(assigned[:nx]), tuple(assigned[nx:]))  # type: ignore[arg-type]
