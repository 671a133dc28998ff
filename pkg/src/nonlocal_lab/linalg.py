"""Dense complex linear algebra helpers shared by the quantum modules."""

from __future__ import annotations

from functools import reduce

import numpy as np

from .errors import DimensionMismatch

ATOL = 1e-10
EIG_TOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def tensor(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of matrices or of vectors (not mixed)."""
    if not ops:
        raise DimensionMismatch("tensor of nothing")
    ndims = {np.ndim(op) for op in ops}
    if len(ndims) != 1 or ndims.pop() not in (1, 2):
        raise DimensionMismatch("tensor expects all vectors or all matrices")
    return reduce(np.kron, (np.asarray(op, dtype=complex) for op in ops))


def adjoint(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise DimensionMismatch(f"adjoint needs a matrix, got shape {m.shape}")
    return m.conj().T


def apply(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    m, v = np.asarray(m), np.asarray(v)
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise DimensionMismatch(f"cannot apply {m.shape} to {v.shape}")
    return m @ v


def is_unitary(u: np.ndarray, tol: float = ATOL) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < tol


def is_hermitian(m: np.ndarray, tol: float = ATOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.abs(m - m.conj().T).max() < tol


def herm_eig(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, ascending eigenvalues.

    Each eigenvector is rephased so its first component above ``EIG_TOL`` is
    real and positive, which fixes the output for non-degenerate spectra.
    """
    m = np.asarray(m)
    vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
    for k in range(vecs.shape[1]):
        col = vecs[:, k]
        lead = np.flatnonzero(np.abs(col) > EIG_TOL)
        if lead.size:
            phase = col[lead[0]] / abs(col[lead[0]])
            vecs[:, k] = col / phase
    return vals, vecs


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    vals, vecs = herm_eig(m)
    return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T


def positive_part_projector(m: np.ndarray) -> np.ndarray:
    """Projector onto the span of eigenvectors with strictly positive eigenvalue."""
    vals, vecs = herm_eig(m)
    keep = vecs[:, vals > EIG_TOL]
    return keep @ keep.conj().T


def top_eigenvector(m: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = herm_eig(m)
    return float(vals[-1]), vecs[:, -1]


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diag(r)
    return q * (diag / np.abs(diag))


def maximally_entangled(d: int) -> np.ndarray:
    """``sum_i |i>|i> / sqrt(d)`` on C^d (x) C^d."""
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return psi


def basis_projector(d: int, i: int) -> np.ndarray:
    p = np.zeros((d, d), dtype=complex)
    p[i, i] = 1
    return p


def apply_on_qubits(state: np.ndarray, op: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
    """Apply a ``2^k x 2^k`` operator to the listed axes of an ``(2,)*n`` state tensor.

    The first listed qubit is the most significant bit of the operator's index.
    """
    k = len(qubits)
    if op.shape != (2**k, 2**k):
        raise DimensionMismatch(f"operator of shape {op.shape} on {k} qubits")
    if k == 0:
        return state * op[0, 0]
    t = op.reshape((2,) * (2 * k))
    out = np.tensordot(t, state, axes=(list(range(k, 2 * k)), list(qubits)))
    return np.moveaxis(out, list(range(k)), list(qubits))
