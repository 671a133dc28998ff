"""See-saw lower bounds on the quantum value.

One sweep updates Alice's POVMs with Bob and the state fixed, then Bob's,
then replaces the state by the top eigenvector of the game operator.  Every
step solves its subproblem exactly or only moves uphill, so the value after
each sweep is nondecreasing.

The POVM step maximizes ``sum_a Tr(M_a K_a)`` for fixed effective operators
``K_a``.  It works on pairs of outcomes: with ``S = M_a + M_b`` held fixed the
two-outcome problem is solved exactly by ``M_a = S^1/2 P S^1/2``, ``P`` the
projector onto the positive eigenspace of ``S^1/2 (K_a - K_b) S^1/2``.  Pairs
are visited in round-robin rounds of disjoint pairs so each round is a single
batched eigendecomposition.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import NamedTuple

import numpy as np

from .classical import worker_count
from .games import Game
from .linalg import random_unitary
from .quantum import QuantumStrategy, random_povms, winning_probability


class SeesawResult(NamedTuple):
    value: float
    strategy: QuantumStrategy
    history: tuple[float, ...]
    converged: bool


def _round_robin(n: int) -> list[list[tuple[int, int]]]:
    """Rounds of disjoint pairs covering every pair of ``range(n)`` once."""
    players = list(range(n)) + ([-1] if n % 2 else [])
    m = len(players)
    rounds = []
    for _ in range(m - 1):
        pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
        rounds.append([(a, b) for a, b in pairs if a >= 0 and b >= 0])
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _batched_sqrt(s: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(s)
    return (vecs * np.sqrt(np.clip(vals, 0, None))[..., None, :]) @ vecs.conj().swapaxes(-1, -2)


def _pairwise_update(m: np.ndarray, k: np.ndarray, rounds: list[list[tuple[int, int]]], passes: int) -> np.ndarray:
    """Improve POVMs ``m[q, a]`` against objective operators ``k[q, a]``."""
    m = m.copy()
    for _ in range(passes):
        for pairs in rounds:
            if not pairs:
                continue
            ia = np.array([p[0] for p in pairs])
            ib = np.array([p[1] for p in pairs])
            s = m[:, ia] + m[:, ib]
            root = _batched_sqrt(s)
            diff = root @ (k[:, ia] - k[:, ib]) @ root
            diff = (diff + diff.conj().swapaxes(-1, -2)) / 2
            vals, vecs = np.linalg.eigh(diff)
            keep = vecs * (vals > 0)[..., None, :]
            proj = keep @ vecs.conj().swapaxes(-1, -2)
            new_a = root @ proj @ root
            new_a = (new_a + new_a.conj().swapaxes(-1, -2)) / 2
            m[:, ia] = new_a
            m[:, ib] = s - new_a
    return m


class _Problem:
    def __init__(self, g: Game) -> None:
        # coefficient c[x, y, a, b] = pi(x, y) V(x, y, a, b)
        self.coef = g.weights[:, :, None, None] * g.accepts

    def alice_effective(self, psi: np.ndarray, bob: np.ndarray) -> np.ndarray:
        e = np.einsum("xyab,ybjl->xajl", self.coef, bob)
        # K = Psi E^T Psi^dag
        return np.einsum("ij,xalj,kl->xaik", psi, e, psi.conj(), optimize=True)

    def bob_effective(self, psi: np.ndarray, alice: np.ndarray) -> np.ndarray:
        f = np.einsum("xyab,xaik->ybik", self.coef, alice)
        # L = Psi^T F^T conj(Psi)
        return np.einsum("ij,ybki,kl->ybjl", psi, f, psi.conj(), optimize=True)

    def game_operator(self, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
        e = np.einsum("xyab,ybjl->xajl", self.coef, bob)
        d_a, d_b = alice.shape[-1], bob.shape[-1]
        w = np.einsum("xaik,xajl->ijkl", alice, e).reshape(d_a * d_b, d_a * d_b)
        return (w + w.conj().T) / 2


def _one_run(
    g: Game, d_a: int, d_b: int, iterations: int, seed: int, passes: int, tol: float
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, list[float], bool]:
    nx, ny, na, nb = g.shape
    rng = np.random.default_rng(seed)
    prob = _Problem(g)
    alice = random_povms(nx, na, d_a, rng)
    bob = random_povms(ny, nb, d_b, rng)
    psi = random_unitary(d_a * d_b, rng)[:, 0]
    rounds_a, rounds_b = _round_robin(na), _round_robin(nb)
    history: list[float] = []
    converged = False
    stall = 0
    for _ in range(iterations):
        mat = psi.reshape(d_a, d_b)
        alice = _pairwise_update(alice, prob.alice_effective(mat, bob), rounds_a, passes)
        bob = _pairwise_update(bob, prob.bob_effective(mat, alice), rounds_b, passes)
        vals, vecs = np.linalg.eigh(prob.game_operator(alice, bob))
        psi = vecs[:, -1]
        history.append(float(vals[-1]))
        if len(history) > 1 and history[-1] - history[-2] < tol:
            stall += 1
            if stall >= 5:
                converged = True
                break
        else:
            stall = 0
    return history[-1], psi, alice, bob, history, converged


def seesaw_lower_bound(
    g: Game,
    d_a: int,
    d_b: int | None = None,
    iterations: int = 200,
    seed: int = 0,
    *,
    restarts: int = 1,
    passes: int = 1,
    tol: float = 1e-13,
    workers: int | None = None,
) -> SeesawResult:
    """Best see-saw value over ``restarts`` seeded random starts.

    Restart ``i`` uses seed ``seed + i``; the best value wins, ties going to
    the earliest restart.  ``history`` is the per-sweep value sequence of the
    winning run and ``converged`` whether it stalled before ``iterations``.
    """
    d_b = d_a if d_b is None else d_b
    if d_a < 1 or d_b < 1:
        raise ValueError("local dimensions must be positive")
    seeds = [seed + i for i in range(restarts)]
    workers = workers or worker_count()
    run = lambda s: _one_run(g, d_a, d_b, iterations, s, passes, tol)  # noqa: E731
    if workers > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(run, seeds))
    else:
        runs = [run(s) for s in seeds]
    best = max(range(len(runs)), key=lambda i: (runs[i][0], -i))
    value, psi, alice, bob, history, converged = runs[best]
    strategy = QuantumStrategy(psi, alice, bob)
    # report the value recomputed from the returned strategy
    return SeesawResult(winning_probability(g, strategy, check=False), strategy, tuple(history), converged)
