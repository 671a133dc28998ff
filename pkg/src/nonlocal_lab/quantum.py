"""Quantum strategies for two-player games and the ricochet construction.

A strategy is a pure state on C^dA (x) C^dB together with one POVM per
question on each side, stored as arrays ``alice[x, a]`` of shape
``(|X|, |A|, dA, dA)`` and ``bob[y, b]`` of shape ``(|Y|, |B|, dB, dB)``.
The state vector uses Alice-major ordering: index ``i * dB + j`` for
``|i>_A |j>_B``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .boxes import Box, coarse_grain
from .classical import DeterministicStrategy
from .errors import DimensionMismatch, InputError, InvalidMeasurement, NonUnitary, ShapeMismatch, SizeBudgetExceeded
from .games import Game, perfect_matchings
from .linalg import ATOL, H, I2, X, Y, Z, is_unitary, maximally_entangled, random_unitary, tensor

MAX_DIM = 2**12
# complex entries allowed in one repeated measurement family
MAX_POVM_ENTRIES = 2**24
MEASUREMENT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuantumStrategy:
    state: np.ndarray
    alice: np.ndarray
    bob: np.ndarray

    def __post_init__(self) -> None:
        for name in ("state", "alice", "bob"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if self.alice.ndim != 4 or self.bob.ndim != 4:
            raise ShapeMismatch("measurement arrays must have shape (questions, answers, d, d)")
        if self.state.shape != (self.d_a * self.d_b,):
            raise DimensionMismatch(f"state has length {self.state.shape}, expected {self.d_a * self.d_b}")

    @property
    def d_a(self) -> int:
        return self.alice.shape[2]

    @property
    def d_b(self) -> int:
        return self.bob.shape[2]

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.alice.shape[0], self.bob.shape[0], self.alice.shape[1], self.bob.shape[1])

    def violations(self, tol: float = MEASUREMENT_TOL) -> list[str]:
        out = []
        norm = np.linalg.norm(self.state)
        if abs(norm - 1) > tol:
            out.append(f"state norm {norm:.3g} != 1")
        for party, ops in (("alice", self.alice), ("bob", self.bob)):
            d = ops.shape[2]
            for q in range(ops.shape[0]):
                err = np.abs(ops[q].sum(axis=0) - np.eye(d)).max()
                if err > tol:
                    out.append(f"{party} question {q}: sum of POVM elements off identity by {err:.3g}")
                for a in range(ops.shape[1]):
                    m = ops[q, a]
                    if np.abs(m - m.conj().T).max() > tol:
                        out.append(f"{party} M[{q},{a}] not Hermitian")
                    elif np.linalg.eigvalsh(m).min() < -tol:
                        out.append(f"{party} M[{q},{a}] not positive semidefinite")
        return out

    def check(self, tol: float = MEASUREMENT_TOL) -> "QuantumStrategy":
        bad = self.violations(tol)
        if bad:
            raise InvalidMeasurement("; ".join(bad))
        return self

    def completeness_error(self) -> float:
        ea = np.abs(self.alice.sum(axis=1) - np.eye(self.d_a)).max()
        eb = np.abs(self.bob.sum(axis=1) - np.eye(self.d_b)).max()
        return float(max(ea, eb))


def _joint_probabilities(qs: QuantumStrategy) -> np.ndarray:
    """``P[x, y, a, b] = <psi| M^x_a (x) M^y_b |psi>``."""
    psi = qs.state.reshape(qs.d_a, qs.d_b)
    nx, ny, na, nb = qs.shape
    # <psi|M (x) N|psi> = sum_{jl} (Psi^dag M Psi)[j, l] N[j, l]
    s = np.einsum("ij,xaik,kl->xajl", psi.conj(), qs.alice, psi, optimize=True)
    p = s.reshape(nx * na, -1) @ qs.bob.reshape(ny * nb, -1).T
    return p.real.reshape(nx, na, ny, nb).transpose(0, 2, 1, 3)


def correlation_table(qs: QuantumStrategy, g: Game | None = None) -> Box:
    if g is not None and qs.shape != g.shape:
        raise ShapeMismatch(f"strategy shape {qs.shape} does not match game {g.shape}")
    return Box(_joint_probabilities(qs))


def winning_probability(g: Game, qs: QuantumStrategy, *, check: bool = True) -> float:
    if qs.shape != g.shape:
        raise ShapeMismatch(f"strategy shape {qs.shape} does not match game {g.shape}")
    if check:
        qs.check()
    p = _joint_probabilities(qs)
    value = float((g.weights * (p * g.accepts).sum(axis=(2, 3))).sum())
    if -1e-9 <= value < 0:
        return 0.0
    if 1 < value <= 1 + 1e-9:
        return 1.0
    return value


def deterministic_strategy(s: DeterministicStrategy, g: Game) -> QuantumStrategy:
    """The one-dimensional strategy that always answers ``s``."""
    nx, ny, na, nb = g.shape
    alice = np.zeros((nx, na, 1, 1))
    bob = np.zeros((ny, nb, 1, 1))
    alice[np.arange(nx), list(s.alice)] = 1
    bob[np.arange(ny), list(s.bob)] = 1
    return QuantumStrategy(np.ones(1), alice, bob)


def _eigenprojectors(observables: list[np.ndarray], bits: tuple[int, ...]) -> np.ndarray:
    d = observables[0].shape[0]
    out = np.eye(d, dtype=complex)
    for obs, bit in zip(observables, bits):
        out = out @ (np.eye(d) + (-1) ** bit * obs) / 2
    return out


# Real symmetric Peres square: rows multiply to +I, columns to -I.
PERES_SQUARE = (
    (tensor(X, I2), tensor(I2, X), tensor(X, X)),
    (tensor(I2, Z), tensor(Z, I2), tensor(Z, Z)),
    (-tensor(X, Z), -tensor(Z, X), tensor(Y, Y)),
)


def mermin_peres_strategy() -> QuantumStrategy:
    """Perfect magic-square strategy on two shared EPR pairs.

    Alice measures the three commuting observables of her row jointly, Bob
    those of his column.  Answer bit 0 stands for eigenvalue +1.  Since every
    observable is real symmetric, ``<O (x) O>`` is 1 on the maximally
    entangled state and the shared cell always agrees.
    """
    triples = [tuple((i >> (2 - k)) & 1 for k in range(3)) for i in range(8)]
    alice = np.array([[_eigenprojectors(list(PERES_SQUARE[r]), t) for t in triples] for r in range(3)])
    bob = np.array(
        [[_eigenprojectors([PERES_SQUARE[r][c] for r in range(3)], t) for t in triples] for c in range(3)]
    )
    return QuantumStrategy(maximally_entangled(4), alice, bob)


def chsh_optimal_strategy() -> QuantumStrategy:
    """One EPR pair; Alice measures Z or X, Bob (Z +/- X)/sqrt 2."""
    obs_a = [Z, X]
    obs_b = [(Z + X) / np.sqrt(2), (Z - X) / np.sqrt(2)]
    alice = np.array([[(I2 + (-1) ** a * o) / 2 for a in range(2)] for o in obs_a])
    bob = np.array([[(I2 + (-1) ** b * o) / 2 for b in range(2)] for o in obs_b])
    return QuantumStrategy(maximally_entangled(2), alice, bob)


def random_povms(nq: int, na: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank POVMs: positive operators ``G_a`` rescaled by ``S^-1/2``."""
    g = np.empty((nq, na, d, d), dtype=complex)
    for q in range(nq):
        for a in range(na):
            u = random_unitary(d, rng)
            g[q, a] = (u * rng.random(d)) @ u.conj().T
    s = g.sum(axis=1)
    vals, vecs = np.linalg.eigh(s)
    inv_root = (vecs * (1 / np.sqrt(vals))[:, None, :]) @ vecs.conj().swapaxes(-1, -2)
    return inv_root[:, None] @ g @ inv_root[:, None]


def random_strategy(nx: int, ny: int, na: int, nb: int, d: int, rng: np.random.Generator) -> QuantumStrategy:
    psi = rng.standard_normal(d * d) + 1j * rng.standard_normal(d * d)
    return QuantumStrategy(psi / np.linalg.norm(psi), random_povms(nx, na, d, rng), random_povms(ny, nb, d, rng))


def _repeat_family(ops: np.ndarray, n: int) -> np.ndarray:
    out = ops
    for _ in range(n - 1):
        q1, a1, d1, _ = out.shape
        q2, a2, d2, _ = ops.shape
        # axes (x1, x2, a1, a2, i1, i2, j1, j2) flatten to product indices
        out = np.einsum("xaij,ybkl->xyabikjl", out, ops).reshape(q1 * q2, a1 * a2, d1 * d2, d1 * d2)
    return out


def strategy_parallel_repeat(qs: QuantumStrategy, n: int, *, max_dim: int = MAX_DIM) -> QuantumStrategy:
    """n independent copies of ``qs``, regrouped so Alice holds all her halves."""
    if n < 1:
        raise InputError("repetition count must be positive")
    if n == 1:
        return qs
    if qs.d_a**n > max_dim or qs.d_b**n > max_dim:
        raise SizeBudgetExceeded(f"local dimension {max(qs.d_a, qs.d_b)}^{n} exceeds {max_dim}")
    for fam in (qs.alice, qs.bob):
        entries = (fam.shape[0] * fam.shape[1] * fam.shape[2] ** 2) ** n
        if entries > MAX_POVM_ENTRIES:
            raise SizeBudgetExceeded(f"repeated measurement family needs {entries} entries (limit {MAX_POVM_ENTRIES})")
    psi = qs.state
    for _ in range(n - 1):
        psi = np.kron(psi, qs.state)
    # axes (A1, B1, A2, B2, ...) -> (A1, ..., An, B1, ..., Bn)
    psi = psi.reshape([qs.d_a, qs.d_b] * n)
    psi = psi.transpose(list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))).reshape(-1)
    return QuantumStrategy(psi, _repeat_family(qs.alice, n), _repeat_family(qs.bob, n))


# --------------------------------------------------------------------------
# one-way protocols and the ricochet construction


@dataclass(frozen=True, eq=False)
class OneWayProtocol:
    """Alice applies ``U_A(x)`` to ``|k>`` and sends q qubits; Bob applies
    ``U_B(y)`` and measures in the computational basis.

    ``alice_outputs[x, k]`` / ``bob_outputs[y, l]`` optionally translate raw
    outcomes into game answers (identity when omitted).
    """

    q: int
    alice_unitaries: np.ndarray
    bob_unitaries: np.ndarray
    alice_outputs: np.ndarray | None = None
    bob_outputs: np.ndarray | None = None
    n_answers_a: int | None = None
    n_answers_b: int | None = None

    def __post_init__(self) -> None:
        for name in ("alice_unitaries", "bob_unitaries"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.ndim != 3 or arr.shape[1:] != (2**self.q, 2**self.q):
                raise DimensionMismatch(f"{name} must have shape (inputs, 2^q, 2^q)")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def check(self) -> "OneWayProtocol":
        for name in ("alice_unitaries", "bob_unitaries"):
            for i, u in enumerate(getattr(self, name)):
                if not is_unitary(u, ATOL):
                    raise NonUnitary(f"{name}[{i}] is not unitary")
        return self


def ricochet_from_oneway(p: OneWayProtocol) -> Box:
    """Raw-outcome correlation of the zero-communication ricochet strategy.

    Both parties start from the maximally entangled state on q + q qubits;
    Alice applies ``U_A(x)^T`` and Bob ``U_B(y)``, then both measure in the
    computational basis.  Simulated directly on the state (as the matrix
    ``Psi -> U_A^T Psi U_B^T``), not through the closed form.
    """
    p.check()
    d = 2**p.q
    psi = maximally_entangled(d).reshape(d, d)
    nx, ny = len(p.alice_unitaries), len(p.bob_unitaries)
    table = np.empty((nx, ny, d, d))
    for x, ua in enumerate(p.alice_unitaries):
        left = ua.T @ psi
        for y, ub in enumerate(p.bob_unitaries):
            table[x, y] = np.abs(left @ ub.T) ** 2
    return Box(table)


def ricochet_answers(p: OneWayProtocol) -> Box:
    """Ricochet correlation with raw outcomes mapped to game answers."""
    raw = ricochet_from_oneway(p)
    d = 2**p.q
    na = p.n_answers_a or d
    nb = p.n_answers_b or d
    amap = (lambda x, k: int(p.alice_outputs[x, k])) if p.alice_outputs is not None else (lambda x, k: k)
    bmap = (lambda y, l: int(p.bob_outputs[y, l])) if p.bob_outputs is not None else (lambda y, l: l)
    return coarse_grain(raw, amap, bmap, na, nb)


def oneway_to_strategy(p: OneWayProtocol) -> QuantumStrategy:
    """The ricochet construction as an explicit quantum strategy."""
    p.check()
    d = 2**p.q
    nx, ny = len(p.alice_unitaries), len(p.bob_unitaries)
    na = p.n_answers_a or d
    nb = p.n_answers_b or d
    alice = np.zeros((nx, na, d, d), dtype=complex)
    bob = np.zeros((ny, nb, d, d), dtype=complex)
    for x, ua in enumerate(p.alice_unitaries):
        v = ua.T
        for k in range(d):
            a = k if p.alice_outputs is None else int(p.alice_outputs[x, k])
            row = v[k]
            alice[x, a] += np.outer(row.conj(), row)
    for y, ub in enumerate(p.bob_unitaries):
        for l in range(d):
            b = l if p.bob_outputs is None else int(p.bob_outputs[y, l])
            row = ub[l]
            bob[y, b] += np.outer(row.conj(), row)
    return QuantumStrategy(maximally_entangled(d), alice, bob)


def _phase_then_hadamard(x: int, n: int) -> np.ndarray:
    """``D_x H^(x)m`` with ``D_x = diag((-1)^{x_i})`` and ``x_i`` the i-th bit of x (MSB first)."""
    m = n.bit_length() - 1
    hm = tensor(*([H] * m)) if m else np.eye(1, dtype=complex)
    signs = np.array([(-1) ** ((x >> (n - 1 - i)) & 1) for i in range(n)])
    return signs[:, None] * hm


def distributed_dj_oneway(n: int) -> OneWayProtocol:
    """One-way protocol for distributed Deutsch-Jozsa on n-bit strings.

    ``U_A(x) = D_x H`` so that Alice's ricochet action ``U_A(x)^T`` is the
    phase flip by x followed by Hadamards; Bob uses ``H D_y``.
    """
    ua = np.array([_phase_then_hadamard(x, n) for x in range(2**n)])
    ub = np.array([_phase_then_hadamard(y, n).T for y in range(2**n)])
    return OneWayProtocol(n.bit_length() - 1, ua, ub)


def hidden_matching_oneway(n: int) -> OneWayProtocol:
    """One-way hidden-matching protocol with Bob's outputs mapped to the
    :func:`~nonlocal_lab.games.hidden_matching` answer encoding.

    Bob measures in the basis ``(|i> + (-1)^s |j>)/sqrt 2`` over the pairs of
    his matching; outcome ``2p + s`` reports pair p and sign s, and he answers
    that pair with ``l = s * lowbit(i xor j)`` so that ``(i xor j).l = s``.
    """
    m = n.bit_length() - 1
    matchings = perfect_matchings(n)
    pairs = list(itertools.combinations(range(n), 2))
    ua = np.array([_phase_then_hadamard(x, n) for x in range(2**n)])
    ub = np.zeros((len(matchings), n, n), dtype=complex)
    bob_out = np.zeros((len(matchings), n), dtype=int)
    for yi, mt in enumerate(matchings):
        for pi, (i, j) in enumerate(mt):
            for s in range(2):
                ub[yi, 2 * pi + s, i] = 1 / np.sqrt(2)
                ub[yi, 2 * pi + s, j] = (-1) ** s / np.sqrt(2)
                low = (i ^ j) & -(i ^ j)
                bob_out[yi, 2 * pi + s] = pairs.index((i, j)) * n + s * low
    alice_out = np.tile(np.arange(n), (2**n, 1))
    return OneWayProtocol(m, ua, ub, alice_out, bob_out, n, len(pairs) * n)


def random_oneway(q: int, nx: int, ny: int, rng: np.random.Generator) -> OneWayProtocol:
    d = 2**q
    ua = np.array([random_unitary(d, rng) for _ in range(nx)])
    ub = np.array([random_unitary(d, rng) for _ in range(ny)])
    return OneWayProtocol(q, ua, ub)
