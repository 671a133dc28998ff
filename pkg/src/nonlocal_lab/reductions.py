"""Protocol transformations: teleportation, transcript guessing, replacing
shared EPR pairs by the maximally mixed state, and per-party argmax
simulation of zero-communication protocols.
"""

from __future__ import annotations

import dataclasses
from collections.abc import Callable
from fractions import Fraction
from typing import NamedTuple, Union

import numpy as np

from .classical import DeterministicStrategy, evaluate_deterministic
from .errors import AmbiguousMode, BudgetViolation, NonlocalLabError, ProtocolError, UnsupportedSharedState
from .games import Game, make_game
from .linalg import CNOT, H, maximally_entangled
from .protocols import (
    MAX_QUBITS,
    ClassicalProtocol,
    HybridProtocol,
    LocalUnitary,
    PauliCorrection,
    QuantumProtocol,
    SendBits,
    ZeroCommProtocol,
    _bit,
    _other,
    epr_count,
    pauli_basis,
    run_protocol,
    zerocomm_box,
)

IDENTITY_TOL = 1e-12
MARGINAL_TOL = 1e-10
MODE_TOL = 1e-9


def teleport_transform(p: QuantumProtocol) -> HybridProtocol:
    """Replace every qubit message by teleportation over a fresh EPR pair.

    Qubit layout of the result: Alice's private qubits, Bob's, the original
    message qubit, the original EPR pairs, then one pair per message, each as
    (Alice half, Bob half).  Message k is sent as bits ``2k`` (the message
    qubit after the Hadamard) and ``2k + 1`` (the sender's pair half).
    """
    n = p.n_qubits + 2 * p.messages
    if n > MAX_QUBITS:
        raise BudgetViolation(f"teleported protocol needs {n} qubits, limit is {MAX_QUBITS}")
    base = p.n_qubits
    pairs = [(p.msg_qubit + 1 + 2 * k, p.msg_qubit + 2 + 2 * k) for k in range(p.epr_pairs)]
    steps: list = []
    loc = p.msg_qubit
    holder = p.first_holder
    for k, rnd in enumerate(p.rounds):
        sender, receiver = rnd.party, _other(rnd.party)
        qa, qb = base + 2 * k, base + 2 * k + 1
        pairs.append((qa, qb))
        s, r = (qa, qb) if sender == "A" else (qb, qa)
        steps.append(LocalUnitary(sender, tuple(p.register(sender)) + (loc,), rnd.unitaries))
        steps.append(LocalUnitary(sender, (loc, s), CNOT))
        steps.append(LocalUnitary(sender, (loc,), H))
        steps.append(SendBits(sender, (loc, s)))
        steps.append(PauliCorrection(receiver, r, 2 * k, 2 * k + 1))
        loc, holder = r, receiver
    alice_final = tuple(p.register("A")) + ((loc,) if holder == "A" else ())
    bob_final = tuple(p.register("B")) + ((loc,) if holder == "B" else ())
    return HybridProtocol(
        p.n_inputs_a, p.n_inputs_b, p.n_answers_a, p.n_answers_b, n, tuple(pairs), tuple(steps),
        alice_final, bob_final, p.alice_measurement, p.bob_measurement,
        name=f"{p.name}+teleport" if p.name else "teleported", qubit_messages=p.messages,
    )


def transcript_guess_transform(p: ClassicalProtocol | HybridProtocol) -> ClassicalProtocol | HybridProtocol:
    """Trade all communication for shared uniform guess bits and aborts.

    For a classical protocol the new randomness is ``R x {0,1}^c`` (index
    ``r * 2^c + g``).  Each party recomputes the bits it would have sent on
    the guessed transcript and aborts (-1) if any differs from the guess;
    otherwise it answers as the original protocol would on that transcript.
    """
    if isinstance(p, HybridProtocol):
        if p.guessing:
            raise ProtocolError("protocol already runs on guessed transcripts")
        return dataclasses.replace(p, guessing=True, name=f"{p.name}+guess")
    if not isinstance(p, ClassicalProtocol):
        raise ProtocolError(f"cannot guess transcripts of {type(p).__name__}")
    c = p.communication
    nr = len(p.randomness)
    scale = Fraction(1, 2**c)
    randomness = tuple(w * scale for w in p.randomness for _ in range(2**c))

    def outputs(party: str, table: np.ndarray) -> np.ndarray:
        out = np.empty((table.shape[0], nr * 2**c, 1), dtype=int)
        for i in range(table.shape[0]):
            for r in range(nr):
                for g in range(2**c):
                    consistent = all(
                        p.messages[k][i, r, g >> (c - k)] == _bit(g, k, c)
                        for k, speaker in enumerate(p.schedule)
                        if speaker == party
                    )
                    out[i, r * 2**c + g, 0] = table[i, r, g] if consistent else -1
        return out

    return ClassicalProtocol(
        p.n_inputs_a, p.n_inputs_b, p.n_answers_a, p.n_answers_b, randomness, "", (),
        outputs("A", p.alice_outputs), outputs("B", p.bob_outputs), name=f"{p.name}+guess",
    )


def depolarizing_decomposition_error(m: int) -> float:
    """``max |I/4^m - 4^-m Phi - (1 - 4^-m) rho|`` over matrix entries, where
    Phi is the m-pair maximally entangled projector and rho the uniform
    mixture of the other Bell-basis products."""
    if m > 5:
        raise BudgetViolation(f"decomposition check for {m} pairs is too large")
    d = 2**m
    phi = maximally_entangled(d)
    proj = np.outer(phi, phi.conj())
    rho = np.zeros_like(proj)
    others = pauli_basis(m)[1:]
    for pauli in others:
        v = np.kron(pauli, np.eye(d)) @ phi
        rho += np.outer(v, v.conj())
    rho /= len(others)
    q = 4.0**-m
    return float(np.abs(np.eye(d * d) / d**2 - q * proj - (1 - q) * rho).max())


class DepolarizeResult(NamedTuple):
    protocol: ZeroCommProtocol | HybridProtocol
    pairs: int
    identity_error: float
    success_before: float | None
    success_after: float | None
    success_residual: float | None

    @property
    def bound(self) -> float | None:
        """``4^-m * success_before``."""
        return None if self.success_before is None else 4.0**-self.pairs * self.success_before

    @property
    def decomposition_gap(self) -> float | None:
        """How far the simulated success is from ``4^-m before + (1 - 4^-m) residual``."""
        if self.success_after is None:
            return None
        q = 4.0**-self.pairs
        return abs(self.success_after - q * self.success_before - (1 - q) * self.success_residual)


def depolarize_entanglement(p: ZeroCommProtocol | HybridProtocol, game: Game | None = None) -> DepolarizeResult:
    """Replace the m shared EPR pairs by the maximally mixed state.

    Only the canonical state (the maximally entangled state on ``2^m x 2^m``
    for zero-communication protocols, ``|Phi+>`` on each declared pair for
    hybrid ones) is accepted.  With a game the success before, after and on
    the residual mixture are simulated.
    """
    if isinstance(p, ZeroCommProtocol):
        if p.shared != "pure":
            raise UnsupportedSharedState(f"shared state is already {p.shared!r}")
        try:
            m = epr_count(p.strategy)
        except ProtocolError as exc:
            raise UnsupportedSharedState(str(exc)) from exc
        overlap = abs(np.vdot(maximally_entangled(2**m), p.strategy.state))
        if overlap < 1 - 1e-10:
            raise UnsupportedSharedState("shared state is not the maximally entangled state of EPR pairs")
    elif isinstance(p, HybridProtocol):
        if p.shared != "epr":
            raise UnsupportedSharedState(f"shared state is already {p.shared!r}")
        m = len(p.epr)
    else:
        raise UnsupportedSharedState(f"{type(p).__name__} has no shared entanglement to replace")

    err = depolarizing_decomposition_error(m)
    if err > IDENTITY_TOL:
        raise NonlocalLabError(f"decomposition identity off by {err:.3g}")
    mixed = dataclasses.replace(p, shared="mixed")
    if game is None:
        return DepolarizeResult(mixed, m, err, None, None, None)
    before = float(run_protocol(p, game).success)
    after = float(run_protocol(mixed, game).success)
    residual = float(run_protocol(dataclasses.replace(p, shared="residual"), game).success) if m else after
    return DepolarizeResult(mixed, m, err, before, after, residual)


class ArgmaxResult(NamedTuple):
    strategy: DeterministicStrategy
    success: Fraction
    original_success: float
    alice_marginal: np.ndarray
    bob_marginal: np.ndarray
    marginal_violation: float
    ambiguous: tuple[tuple[str, int], ...]


def _argmax_modes(marginal: np.ndarray, party: str) -> tuple[tuple[int, ...], list[tuple[str, int]]]:
    choice, ambiguous = [], []
    for q, row in enumerate(marginal):
        best = int(np.argmax(row))
        choice.append(best)
        if np.count_nonzero(row >= row[best] - MODE_TOL) > 1:
            ambiguous.append((party, q))
    return tuple(choice), ambiguous


def argmax_function_simulation(
    p: ZeroCommProtocol,
    correctness: Game | Callable[[int, int, int, int], bool],
    *,
    strict: bool = False,
) -> ArgmaxResult:
    """Each party deterministically outputs its most likely answer.

    Alice's marginal is taken from the full correlation and checked to be the
    same for every y (Bob's likewise for every x).  Ties within 1e-9 of the
    maximum go to the lowest answer and are listed in ``ambiguous``; with
    ``strict`` they raise :class:`AmbiguousMode`.  ``correctness`` is a game,
    or a predicate scored under the uniform input distribution.
    """
    nx, ny, na, nb = p.shape
    if isinstance(correctness, Game):
        game = correctness
    else:
        uniform = {(x, y): Fraction(1, nx * ny) for x in range(nx) for y in range(ny)}
        game = make_game(nx, ny, na, nb, uniform, correctness, name="correctness")
    box = zerocomm_box(p)
    pa, pb = box.alice_marginals(), box.bob_marginals()
    violation = float(max(np.abs(pa - pa[:, :1]).max(), np.abs(pb - pb[:1]).max()))
    if violation > MARGINAL_TOL:
        raise ProtocolError(f"output marginals depend on the other party's input (by {violation:.3g})")
    alice_marg, bob_marg = pa[:, 0, :], pb[0, :, :]
    alice, amb_a = _argmax_modes(alice_marg, "A")
    bob, amb_b = _argmax_modes(bob_marg, "B")
    ambiguous = tuple(amb_a + amb_b)
    if strict and ambiguous:
        raise AmbiguousMode(f"no unique most likely answer for {ambiguous}")
    strategy = DeterministicStrategy(alice, bob)
    original = float((game.weights * (box.table * game.accepts).sum(axis=(2, 3))).sum())
    return ArgmaxResult(
        strategy, evaluate_deterministic(game, strategy), original, alice_marg, bob_marg, violation, ambiguous
    )


# --------------------------------------------------------------------------
# staged pipeline

STAGES = ("teleport", "guess", "depolarize", "argmax")
PIPELINE_TOL = 1e-9


class Stage(NamedTuple):
    name: str
    communication: int
    unit: str
    epr_pairs: int
    success: Fraction | float
    check: bool
    note: str


Reducible = Union[ClassicalProtocol, QuantumProtocol, HybridProtocol, ZeroCommProtocol]


def _epr_pairs(p: Reducible) -> int:
    if isinstance(p, QuantumProtocol):
        return p.epr_pairs
    if isinstance(p, HybridProtocol):
        return len(p.epr) if p.shared == "epr" else 0
    if isinstance(p, ZeroCommProtocol) and p.shared == "pure":
        try:
            return epr_count(p.strategy)
        except ProtocolError:
            return 0
    return 0


def default_stages(p: Reducible) -> tuple[str, ...]:
    if isinstance(p, ClassicalProtocol):
        return ("guess",) if p.communication else ()
    if isinstance(p, QuantumProtocol):
        return ("teleport", "guess", "depolarize") if p.messages else ("depolarize",) if p.epr_pairs else ()
    if isinstance(p, ZeroCommProtocol):
        return ("depolarize",) if _epr_pairs(p) else ("argmax",)
    return ()


def reduction_pipeline(p: Reducible, g: Game, stages: tuple[str, ...] | None = None) -> list[Stage]:
    """Apply the named reductions in order and report every stage.

    The first row is the input protocol.  Each later row carries the outcome
    of that stage's self-check: exact 2^-c scaling for transcript guessing,
    total variation below 1e-9 for teleportation, the 4^-m bound and the
    decomposition identity for depolarization, and for argmax that each
    party's output marginal ignores the other party's input.
    """
    stages = default_stages(p) if stages is None else tuple(stages)
    unknown = [s for s in stages if s not in STAGES]
    if unknown:
        raise ProtocolError(f"unknown stages {unknown}; choose from {STAGES}")
    current = run_protocol(p, g)
    unit = "qubits" if isinstance(p, QuantumProtocol) else "bits"
    rows = [Stage("input", current.communication, unit, _epr_pairs(p), current.success, True, "")]
    for name in stages:
        if name == "teleport":
            if not isinstance(p, QuantumProtocol):
                raise ProtocolError("teleport applies to qubit-message protocols only")
            new = teleport_transform(p)
            run = run_protocol(new, g)
            tv = float(np.abs(run.distribution - current.distribution).sum(axis=(2, 3)).max() / 2)
            rows.append(Stage(name, run.communication, "bits", _epr_pairs(new), run.success,
                              tv < PIPELINE_TOL, f"tv={tv:.3g}"))
        elif name == "guess":
            if not isinstance(p, (ClassicalProtocol, HybridProtocol)):
                raise ProtocolError("guess applies to classical or teleported protocols")
            bits = p.communication if isinstance(p, ClassicalProtocol) else p.n_bits
            new = transcript_guess_transform(p)
            run = run_protocol(new, g)
            expected = current.success / 2**bits
            if isinstance(run.success, Fraction) and isinstance(expected, Fraction):
                ok = run.success == expected
            else:
                ok = abs(float(run.success) - float(expected)) < PIPELINE_TOL
            rows.append(Stage(name, run.communication, "bits", _epr_pairs(new), run.success, ok,
                              f"expected={expected}" if isinstance(expected, Fraction) else f"expected={expected:.9f}"))
        elif name == "depolarize":
            if isinstance(p, QuantumProtocol):
                raise ProtocolError("teleport before depolarize")
            dep = depolarize_entanglement(p, g)
            new = dep.protocol
            ok = dep.success_after >= dep.bound - PIPELINE_TOL and dep.decomposition_gap < PIPELINE_TOL
            run = run_protocol(new, g)
            rows.append(Stage(name, run.communication, "bits", 0, run.success, ok,
                              f"bound={dep.bound:.9f} identity_error={dep.identity_error:.3g}"))
        else:
            if not isinstance(p, ZeroCommProtocol):
                raise ProtocolError("argmax applies to zero-communication quantum protocols")
            res = argmax_function_simulation(p, g)
            ok = res.marginal_violation <= MARGINAL_TOL
            note = f"marginal_violation={res.marginal_violation:.3g}"
            rows.append(Stage(name, 0, "bits", 0, res.success, ok,
                              note + (f" ambiguous={len(res.ambiguous)}" if res.ambiguous else "")))
            new = p
            run = current
        p, current = new, run
    return rows
