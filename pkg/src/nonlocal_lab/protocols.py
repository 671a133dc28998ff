"""Finite two-party protocols and their exact execution.

Four protocol forms are supported:

* :class:`ClassicalProtocol` -- public randomness with a rational
  distribution, a fixed speaking schedule of single bits and output tables.
  Executed in exact rational arithmetic.
* :class:`QuantumProtocol` -- local qubit registers, optional shared EPR
  pairs and a one-qubit message register passed back and forth, one handover
  per round, then local measurements.
* :class:`HybridProtocol` -- the general form produced by the reductions:
  local unitaries, computational-basis measurements whose bits are sent (or,
  after transcript guessing, checked against shared guess bits), Pauli
  corrections driven by received bits, and final local measurements.
* :class:`ZeroCommProtocol` -- a quantum strategy used as a protocol with no
  communication, optionally with its shared state replaced by the maximally
  mixed state.

Transcripts are integers whose first bit is the most significant one.  An
output of ``-1`` means the party aborts; it then answers 0 and the run counts
as a loss.
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, NamedTuple, Union

import numpy as np

from .boxes import Box
from .errors import (
    BudgetViolation,
    DimensionMismatch,
    InvalidMeasurement,
    NonUnitary,
    ProtocolError,
    ShapeMismatch,
)
from .games import Game, to_fraction
from .linalg import ATOL, CNOT, H, X, Z, apply_on_qubits, is_unitary, maximally_entangled, random_unitary
from .quantum import QuantumStrategy, correlation_table, random_strategy

MAX_QUBITS = 16
PARTIES = ("A", "B")


def _other(party: str) -> str:
    return "B" if party == "A" else "A"


def _bit(value: int, pos: int, width: int) -> int:
    return (value >> (width - 1 - pos)) & 1


class ProtocolRun(NamedTuple):
    """Outcome of :func:`run_protocol`.

    ``distribution[x, y, a, b]`` is the answer distribution per input pair
    (aborting parties answer 0).  ``success`` is the probability, over inputs
    drawn from the game, of winning without any abort.
    """

    success: Fraction | float
    distribution: np.ndarray
    no_abort: Fraction | float
    communication: int


# --------------------------------------------------------------------------
# classical


@dataclass(frozen=True, eq=False)
class ClassicalProtocol:
    """Tabulated deterministic protocol with public randomness.

    ``messages[k]`` has shape ``(inputs of the speaker, |R|, 2**k)`` and gives
    bit k from the speaker's input, the shared randomness and the transcript
    so far.  Output tables have shape ``(inputs, |R|, 2**c)``.
    """

    n_inputs_a: int
    n_inputs_b: int
    n_answers_a: int
    n_answers_b: int
    randomness: tuple[Fraction, ...]
    schedule: str
    messages: tuple[np.ndarray, ...]
    alice_outputs: np.ndarray
    bob_outputs: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "randomness", tuple(to_fraction(w) for w in self.randomness))
        if any(w < 0 for w in self.randomness) or sum(self.randomness) != 1:
            raise ProtocolError("shared randomness must be a probability distribution")
        if any(s not in PARTIES for s in self.schedule):
            raise ProtocolError(f"schedule must consist of 'A'/'B', got {self.schedule!r}")
        nr, c = len(self.randomness), len(self.schedule)
        msgs = []
        for k, (speaker, table) in enumerate(zip(self.schedule, self.messages)):
            t = np.array(table, dtype=int)
            n_in = self.n_inputs_a if speaker == "A" else self.n_inputs_b
            if t.shape != (n_in, nr, 2**k):
                raise ShapeMismatch(f"message table {k} has shape {t.shape}, expected {(n_in, nr, 2**k)}")
            if not np.isin(t, (0, 1)).all():
                raise ProtocolError(f"message table {k} holds values other than bits")
            t.flags.writeable = False
            msgs.append(t)
        if len(self.messages) != c:
            raise ShapeMismatch(f"{len(self.messages)} message tables for a {c}-bit schedule")
        object.__setattr__(self, "messages", tuple(msgs))
        for name, n_in, n_out in (
            ("alice_outputs", self.n_inputs_a, self.n_answers_a),
            ("bob_outputs", self.n_inputs_b, self.n_answers_b),
        ):
            t = np.array(getattr(self, name), dtype=int)
            if t.shape != (n_in, nr, 2**c):
                raise ShapeMismatch(f"{name} has shape {t.shape}, expected {(n_in, nr, 2**c)}")
            if t.min(initial=0) < -1 or t.max(initial=0) >= n_out:
                raise ProtocolError(f"{name} holds answers outside [-1, {n_out})")
            t.flags.writeable = False
            object.__setattr__(self, name, t)

    @property
    def communication(self) -> int:
        return len(self.schedule)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_inputs_a, self.n_inputs_b, self.n_answers_a, self.n_answers_b)

    def transcript(self, x: int, y: int, r: int) -> int:
        t = 0
        for k, speaker in enumerate(self.schedule):
            t = 2 * t + int(self.messages[k][x if speaker == "A" else y, r, t])
        return t

    @classmethod
    def from_functions(
        cls,
        shape: tuple[int, int, int, int],
        randomness: Sequence,
        schedule: str,
        message: Callable[[int, str, int, int, tuple[int, ...]], int],
        alice_output: Callable[[int, int, tuple[int, ...]], int | None],
        bob_output: Callable[[int, int, tuple[int, ...]], int | None],
        name: str = "",
    ) -> "ClassicalProtocol":
        """Tabulate callables.

        ``message(k, speaker, input, r, transcript)`` returns bit k; outputs
        take ``(input, r, transcript)`` and may return ``None`` to abort.
        Transcripts are passed as bit tuples.
        """
        nx, ny, na, nb = shape
        nr, c = len(randomness), len(schedule)

        def bits(t: int, k: int) -> tuple[int, ...]:
            return tuple(_bit(t, i, k) for i in range(k))

        msgs = []
        for k, speaker in enumerate(schedule):
            n_in = nx if speaker == "A" else ny
            msgs.append(
                [[[message(k, speaker, i, r, bits(t, k)) for t in range(2**k)] for r in range(nr)] for i in range(n_in)]
            )

        def table(fn: Callable, n_in: int) -> list:
            out = [[[fn(i, r, bits(t, c)) for t in range(2**c)] for r in range(nr)] for i in range(n_in)]
            return [[[-1 if v is None else v for v in row] for row in block] for block in out]

        return cls(nx, ny, na, nb, tuple(randomness), schedule, tuple(msgs),
                   table(alice_output, nx), table(bob_output, ny), name)


def _check_game(shape: tuple[int, int, int, int], g: Game) -> None:
    if shape != g.shape:
        raise ShapeMismatch(f"protocol answers/inputs {shape} do not match game {g.shape}")


def run_classical(p: ClassicalProtocol, g: Game, *, budget: int | None = None) -> ProtocolRun:
    _check_game(p.shape, g)
    if budget is not None and p.communication > budget:
        raise BudgetViolation(f"protocol sends {p.communication} bits, budget is {budget}")
    nx, ny, na, nb = p.shape
    dist = np.full((nx, ny, na, nb), Fraction(0), dtype=object)
    ok = np.full((nx, ny, na, nb), Fraction(0), dtype=object)
    for x in range(nx):
        for y in range(ny):
            for r, w in enumerate(p.randomness):
                if w == 0:
                    continue
                t = p.transcript(x, y, r)
                a, b = int(p.alice_outputs[x, r, t]), int(p.bob_outputs[y, r, t])
                dist[x, y, max(a, 0), max(b, 0)] += w
                if a >= 0 and b >= 0:
                    ok[x, y, a, b] += w
    success = Fraction(0)
    no_abort = Fraction(0)
    for x, y in g.support():
        pi = g.distribution[x, y]
        cell = ok[x, y]
        no_abort += pi * sum(cell.ravel(), Fraction(0))
        success += pi * sum(cell[g.accepts[x, y]], Fraction(0))
    return ProtocolRun(success, dist, no_abort, p.communication)


# --------------------------------------------------------------------------
# quantum


@dataclass(frozen=True, eq=False)
class QuantumRound:
    """The holder of the message qubit applies ``unitaries[input]`` to its
    private qubits, its EPR halves and the message qubit (last), then hands
    the message qubit over."""

    party: str
    unitaries: np.ndarray

    def __post_init__(self) -> None:
        if self.party not in PARTIES:
            raise ProtocolError(f"round party must be 'A' or 'B', got {self.party!r}")
        u = np.array(self.unitaries, dtype=complex)
        if u.ndim != 3 or u.shape[1] != u.shape[2]:
            raise DimensionMismatch(f"round unitaries must have shape (inputs, D, D), got {u.shape}")
        u.flags.writeable = False
        object.__setattr__(self, "unitaries", u)


def _check_measurement(name: str, m: np.ndarray, n_in: int, n_out: int, dim: int) -> np.ndarray:
    m = np.array(m, dtype=complex)
    if m.shape != (n_in, n_out, dim, dim):
        raise DimensionMismatch(f"{name} has shape {m.shape}, expected {(n_in, n_out, dim, dim)}")
    for q in range(n_in):
        if np.abs(m[q].sum(axis=0) - np.eye(dim)).max() > ATOL:
            raise InvalidMeasurement(f"{name}[{q}] does not sum to the identity")
        for a in range(n_out):
            e = m[q, a]
            if np.abs(e - e.conj().T).max() > ATOL or np.linalg.eigvalsh(e).min() < -ATOL:
                raise InvalidMeasurement(f"{name}[{q}, {a}] is not positive semidefinite")
    m.flags.writeable = False
    return m


@dataclass(frozen=True, eq=False)
class QuantumProtocol:
    """Qubit-message protocol.

    Alice owns ``alice_qubits`` private qubits and one half of each of the
    ``epr_pairs`` shared pairs, Bob likewise.  The message qubit starts in
    ``|0>`` with ``first_holder``; rounds alternate starting from that party.
    The final measurements act on the party's private qubits, then its EPR
    halves, then the message qubit if the party holds it at the end.
    """

    n_inputs_a: int
    n_inputs_b: int
    n_answers_a: int
    n_answers_b: int
    alice_qubits: int
    bob_qubits: int
    epr_pairs: int
    first_holder: str
    rounds: tuple[QuantumRound, ...]
    alice_measurement: np.ndarray
    bob_measurement: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        if self.first_holder not in PARTIES:
            raise ProtocolError("first_holder must be 'A' or 'B'")
        if self.n_qubits > MAX_QUBITS:
            raise BudgetViolation(f"{self.n_qubits} qubits exceed the simulation limit {MAX_QUBITS}")
        rounds = tuple(self.rounds)
        holder = self.first_holder
        for k, rnd in enumerate(rounds):
            if rnd.party != holder:
                raise ProtocolError(f"round {k} is played by {rnd.party} but {holder} holds the message")
            dim = 2 ** (self.local_qubits(holder) + 1)
            n_in = self.n_inputs_a if holder == "A" else self.n_inputs_b
            if rnd.unitaries.shape != (n_in, dim, dim):
                raise DimensionMismatch(f"round {k} unitaries have shape {rnd.unitaries.shape}, expected {(n_in, dim, dim)}")
            for i, u in enumerate(rnd.unitaries):
                if not is_unitary(u, ATOL):
                    raise NonUnitary(f"round {k} unitary for input {i} is not unitary")
            holder = _other(holder)
        object.__setattr__(self, "rounds", rounds)
        object.__setattr__(
            self, "alice_measurement",
            _check_measurement("alice_measurement", self.alice_measurement, self.n_inputs_a, self.n_answers_a,
                               2 ** len(self.final_qubits("A"))),
        )
        object.__setattr__(
            self, "bob_measurement",
            _check_measurement("bob_measurement", self.bob_measurement, self.n_inputs_b, self.n_answers_b,
                               2 ** len(self.final_qubits("B"))),
        )

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_inputs_a, self.n_inputs_b, self.n_answers_a, self.n_answers_b)

    @property
    def messages(self) -> int:
        return len(self.rounds)

    @property
    def final_holder(self) -> str:
        return self.first_holder if len(self.rounds) % 2 == 0 else _other(self.first_holder)

    @property
    def n_qubits(self) -> int:
        return self.alice_qubits + self.bob_qubits + 1 + 2 * self.epr_pairs

    @property
    def msg_qubit(self) -> int:
        return self.alice_qubits + self.bob_qubits

    def local_qubits(self, party: str) -> int:
        return (self.alice_qubits if party == "A" else self.bob_qubits) + self.epr_pairs

    def register(self, party: str) -> list[int]:
        """Global indices of the party's private qubits and EPR halves."""
        base = self.msg_qubit + 1
        if party == "A":
            return list(range(self.alice_qubits)) + [base + 2 * k for k in range(self.epr_pairs)]
        return [self.alice_qubits + i for i in range(self.bob_qubits)] + [base + 2 * k + 1 for k in range(self.epr_pairs)]

    def final_qubits(self, party: str) -> list[int]:
        return self.register(party) + ([self.msg_qubit] if self.final_holder == party else [])


def _epr_state(n: int, pairs: Sequence[tuple[int, int]], paulis: Sequence[int] | None = None) -> np.ndarray:
    """``|0...0>`` with ``(P (x) I)|Phi+>`` on each listed pair.

    ``paulis[k]`` picks P on pair k: 0 = I, 1 = X, 2 = Z, 3 = XZ.
    """
    state = np.zeros((2,) * n, dtype=complex)
    state[(0,) * n] = 1
    for k, (qa, qb) in enumerate(pairs):
        state = apply_on_qubits(state, H, (qa,))
        state = apply_on_qubits(state, CNOT, (qa, qb))
        label = paulis[k] if paulis is not None else 0
        if label in (2, 3):
            state = apply_on_qubits(state, Z, (qa,))
        if label in (1, 3):
            state = apply_on_qubits(state, X, (qa,))
    return state


def _final_probabilities(
    state: np.ndarray, qa: Sequence[int], qb: Sequence[int], ma: np.ndarray, mb: np.ndarray
) -> np.ndarray:
    """``P[a, b] = <psi| M_a (x) N_b |psi>`` for an unnormalized state tensor."""
    n = state.ndim
    rest = [q for q in range(n) if q not in qa and q not in qb]
    psi = np.transpose(state, list(qa) + list(qb) + rest).reshape(2 ** len(qa), 2 ** len(qb), -1)
    p = np.einsum("ijr,aik,bjl,klr->ab", psi.conj(), ma, mb, psi, optimize=True)
    return p.real


def run_quantum(p: QuantumProtocol, g: Game) -> ProtocolRun:
    """Direct state-vector simulation of the qubit-message protocol."""
    _check_game(p.shape, g)
    nx, ny, na, nb = p.shape
    pairs = [(p.msg_qubit + 1 + 2 * k, p.msg_qubit + 2 + 2 * k) for k in range(p.epr_pairs)]
    init = _epr_state(p.n_qubits, pairs)
    qa, qb = p.final_qubits("A"), p.final_qubits("B")
    dist = np.zeros((nx, ny, na, nb))
    for x in range(nx):
        for y in range(ny):
            state = init
            for rnd in p.rounds:
                u = rnd.unitaries[x if rnd.party == "A" else y]
                state = apply_on_qubits(state, u, tuple(p.register(rnd.party) + [p.msg_qubit]))
            dist[x, y] = _final_probabilities(state, qa, qb, p.alice_measurement[x], p.bob_measurement[y])
    success = float((g.weights * (dist * g.accepts).sum(axis=(2, 3))).sum())
    return ProtocolRun(success, dist, 1.0, p.messages)


# --------------------------------------------------------------------------
# hybrid (classical bits + entanglement)


@dataclass(frozen=True, eq=False)
class LocalUnitary:
    """``ops[input]`` (or a single input-independent ``ops``) on ``qubits``."""

    party: str
    qubits: tuple[int, ...]
    ops: np.ndarray


@dataclass(frozen=True, eq=False)
class SendBits:
    """Computational-basis measurement of ``qubits``; the bits are sent."""

    party: str
    qubits: tuple[int, ...]


@dataclass(frozen=True, eq=False)
class PauliCorrection:
    """Apply ``X^{t[x_bit]}`` then ``Z^{t[z_bit]}`` to ``qubit``, t the
    transcript as known to the party."""

    party: str
    qubit: int
    z_bit: int
    x_bit: int


Step = Union[LocalUnitary, SendBits, PauliCorrection]
SHARED_MODES = ("epr", "mixed", "residual")


@dataclass(frozen=True, eq=False)
class HybridProtocol:
    """Entanglement-assisted protocol with classical messages.

    ``epr`` lists shared pairs as ``(alice qubit, bob qubit)``; everything
    else starts in ``|0>``.  With ``shared='mixed'`` the pair qubits instead
    start maximally mixed, and ``'residual'`` uses the uniform mixture of the
    Bell-basis products other than ``|Phi+>^m``.

    When ``guessing`` is set the parties exchange nothing: the transcript is
    replaced by shared uniform guess bits, every sender checks its measured
    bits against the guess and aborts on mismatch, and corrections use the
    guess.
    """

    n_inputs_a: int
    n_inputs_b: int
    n_answers_a: int
    n_answers_b: int
    n_qubits: int
    epr: tuple[tuple[int, int], ...]
    steps: tuple[Step, ...]
    alice_final: tuple[int, ...]
    bob_final: tuple[int, ...]
    alice_measurement: np.ndarray
    bob_measurement: np.ndarray
    shared: str = "epr"
    guessing: bool = False
    name: str = ""
    qubit_messages: int = field(default=0, compare=False)

    def __post_init__(self) -> None:
        if self.shared not in SHARED_MODES:
            raise ProtocolError(f"shared must be one of {SHARED_MODES}")
        if self.n_qubits > MAX_QUBITS:
            raise BudgetViolation(f"{self.n_qubits} qubits exceed the simulation limit {MAX_QUBITS}")
        object.__setattr__(
            self, "alice_measurement",
            _check_measurement("alice_measurement", self.alice_measurement, self.n_inputs_a, self.n_answers_a,
                               2 ** len(self.alice_final)),
        )
        object.__setattr__(
            self, "bob_measurement",
            _check_measurement("bob_measurement", self.bob_measurement, self.n_inputs_b, self.n_answers_b,
                               2 ** len(self.bob_final)),
        )

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (self.n_inputs_a, self.n_inputs_b, self.n_answers_a, self.n_answers_b)

    @property
    def n_bits(self) -> int:
        return sum(len(s.qubits) for s in self.steps if isinstance(s, SendBits))

    @property
    def communication(self) -> int:
        return 0 if self.guessing else self.n_bits


def _bell_labels(m: int, mode: str) -> list[tuple[int, ...]]:
    labels = list(itertools.product(range(4), repeat=m))
    return labels if mode == "all" else labels[1:]


def _initial_ensemble(p: HybridProtocol) -> list[tuple[float, np.ndarray]]:
    n, m = p.n_qubits, len(p.epr)
    if p.shared == "epr":
        return [(1.0, _epr_state(n, p.epr))]
    if p.shared == "residual":
        labels = _bell_labels(m, "residual")
        return [(1 / len(labels), _epr_state(n, p.epr, lab)) for lab in labels]
    # maximally mixed pair qubits as a uniform ensemble of basis states
    qubits = [q for pair in p.epr for q in pair]
    out = []
    for bits in itertools.product((0, 1), repeat=len(qubits)):
        state = np.zeros((2,) * n, dtype=complex)
        idx = [0] * n
        for q, b in zip(qubits, bits):
            idx[q] = b
        state[tuple(idx)] = 1
        out.append((4.0**-m, state))
    return out


def run_hybrid(p: HybridProtocol, g: Game) -> ProtocolRun:
    """Exact expectation over the initial ensemble, the guess bits and every
    measurement branch (depth-first)."""
    _check_game(p.shape, g)
    nx, ny, na, nb = p.shape
    nbits = p.n_bits
    dist = np.zeros((nx, ny, na, nb))
    ok = np.zeros((nx, ny, na, nb))
    guesses = range(2**nbits) if p.guessing else [None]
    ensemble = _initial_ensemble(p)

    def walk(i: int, state: np.ndarray, bits: list[int], abort: tuple[bool, bool], x: int, y: int,
             guess: int | None, w: float) -> None:
        if i == len(p.steps):
            probs = _final_probabilities(state, p.alice_final, p.bob_final, p.alice_measurement[x], p.bob_measurement[y])
            seen = probs.copy()
            if abort[0]:
                seen = np.vstack([seen.sum(axis=0, keepdims=True), np.zeros((na - 1, nb))])
            if abort[1]:
                seen = np.hstack([seen.sum(axis=1, keepdims=True), np.zeros((na, nb - 1))])
            dist[x, y] += w * seen
            if not any(abort):
                ok[x, y] += w * probs
            return
        step = p.steps[i]
        if isinstance(step, LocalUnitary):
            ops = step.ops if step.ops.ndim == 2 else step.ops[x if step.party == "A" else y]
            walk(i + 1, apply_on_qubits(state, ops, step.qubits), bits, abort, x, y, guess, w)
        elif isinstance(step, SendBits):
            k = len(step.qubits)
            for outcome in range(2**k):
                out_bits = [_bit(outcome, j, k) for j in range(k)]
                idx: list[Any] = [slice(None)] * state.ndim
                for q, b in zip(step.qubits, out_bits):
                    idx[q] = b
                branch = np.zeros_like(state)
                branch[tuple(idx)] = state[tuple(idx)]
                if not np.any(branch):
                    continue
                new_abort = abort
                if guess is not None:
                    pos = len(bits)
                    if any(_bit(guess, pos + j, nbits) != b for j, b in enumerate(out_bits)):
                        side = PARTIES.index(step.party)
                        new_abort = tuple(True if s == side else abort[s] for s in range(2))  # type: ignore[assignment]
                walk(i + 1, branch, bits + out_bits, new_abort, x, y, guess, w)
        else:
            view = bits if guess is None else [_bit(guess, j, nbits) for j in range(nbits)]
            if view[step.x_bit]:
                state = apply_on_qubits(state, X, (step.qubit,))
            if view[step.z_bit]:
                state = apply_on_qubits(state, Z, (step.qubit,))
            walk(i + 1, state, bits, abort, x, y, guess, w)

    for weight, init in ensemble:
        for x in range(nx):
            for y in range(ny):
                for guess in guesses:
                    w = weight / len(guesses)
                    walk(0, init, [], (False, False), x, y, guess, w)
    success = float((g.weights * (ok * g.accepts).sum(axis=(2, 3))).sum())
    no_abort = float((g.weights * ok.sum(axis=(2, 3))).sum())
    return ProtocolRun(success, dist, no_abort, p.communication)


# --------------------------------------------------------------------------
# zero communication


@dataclass(frozen=True, eq=False)
class ZeroCommProtocol:
    """A quantum strategy played without communication.

    ``shared='pure'`` uses the strategy's own state.  ``'mixed'`` replaces it
    by the maximally mixed state on both sides and ``'residual'`` by the
    uniform mixture of the Bell-basis products other than the maximally
    entangled one (both need ``d_a = d_b = 2^m``).
    """

    strategy: QuantumStrategy
    shared: str = "pure"

    def __post_init__(self) -> None:
        if self.shared not in ("pure", "mixed", "residual"):
            raise ProtocolError("shared must be 'pure', 'mixed' or 'residual'")
        if self.shared != "pure":
            epr_count(self.strategy)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.strategy.shape

    @property
    def communication(self) -> int:
        return 0


def epr_count(qs: QuantumStrategy) -> int:
    """m when the local dimensions are both ``2^m``, else ProtocolError."""
    d = qs.d_a
    if qs.d_b != d or d & (d - 1):
        raise ProtocolError(f"local dimensions {qs.d_a}, {qs.d_b} are not a common power of two")
    return d.bit_length() - 1


def pauli_basis(m: int) -> list[np.ndarray]:
    """The ``4^m`` products of I, X, Z, XZ on m qubits (label order as in
    :func:`_bell_labels`); ``(P (x) I)|Phi>`` runs over the Bell basis."""
    singles = [np.eye(2, dtype=complex), X, Z, X @ Z]
    out = []
    for labels in itertools.product(range(4), repeat=m):
        op = np.eye(1, dtype=complex)
        for lab in labels:
            op = np.kron(op, singles[lab])
        out.append(op)
    return out


def _zerocomm_states(zc: ZeroCommProtocol) -> list[tuple[float, np.ndarray]]:
    qs = zc.strategy
    if zc.shared == "pure":
        return [(1.0, qs.state)]
    m = epr_count(qs)
    d = 2**m
    if zc.shared == "mixed":
        out = []
        for i in range(d):
            for j in range(d):
                v = np.zeros(d * d, dtype=complex)
                v[i * d + j] = 1
                out.append((1 / d**2, v))
        return out
    phi = maximally_entangled(d).reshape(d, d)
    paulis = pauli_basis(m)[1:]
    return [(1 / len(paulis), (p @ phi).reshape(-1)) for p in paulis]


def zerocomm_box(zc: ZeroCommProtocol) -> Box:
    qs = zc.strategy
    table = np.zeros(qs.shape)
    for w, psi in _zerocomm_states(zc):
        table += w * correlation_table(QuantumStrategy(psi, qs.alice, qs.bob)).table
    return Box(table)


def run_zerocomm(p: ZeroCommProtocol, g: Game) -> ProtocolRun:
    _check_game(p.shape, g)
    dist = zerocomm_box(p).table
    success = float((g.weights * (dist * g.accepts).sum(axis=(2, 3))).sum())
    return ProtocolRun(success, dist, 1.0, 0)


AnyProtocol = Union[ClassicalProtocol, QuantumProtocol, HybridProtocol, ZeroCommProtocol]


def run_protocol(p: AnyProtocol, g: Game) -> ProtocolRun:
    if isinstance(p, ClassicalProtocol):
        return run_classical(p, g)
    if isinstance(p, QuantumProtocol):
        return run_quantum(p, g)
    if isinstance(p, HybridProtocol):
        return run_hybrid(p, g)
    if isinstance(p, ZeroCommProtocol):
        return run_zerocomm(p, g)
    raise ProtocolError(f"not a protocol: {type(p).__name__}")


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """Largest total-variation distance between per-input answer distributions."""
    diff = np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    return float(diff.sum(axis=(2, 3)).max() / 2)


# --------------------------------------------------------------------------
# bundled protocols


def constant_protocol(shape: tuple[int, int, int, int], a: int = 0, b: int = 0) -> ClassicalProtocol:
    return ClassicalProtocol.from_functions(
        shape, (1,), "", lambda *args: 0, lambda *args: a, lambda *args: b, name="constant"
    )


def chsh_send_x_protocol() -> ClassicalProtocol:
    """Two bits: Alice sends x, Bob sends y.  Alice answers 0, Bob ``x AND y``."""
    return ClassicalProtocol.from_functions(
        (2, 2, 2, 2),
        (1,),
        "AB",
        lambda k, speaker, inp, r, t: inp,
        lambda x, r, t: 0,
        lambda y, r, t: t[0] & y,
        name="chsh-send-x",
    )


def _ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def chsh_qubit_protocol(angle: float = np.pi / 2) -> QuantumProtocol:
    """Alice rotates the message qubit by ``angle * x`` about Y and sends it;
    Bob answers 0 on y = 0 and his computational-basis reading on y = 1.
    Alice answers 0.  The default angle gives value 7/8, angle pi gives 1."""
    alice_u = np.array([_ry(angle * x) for x in range(2)])
    trivial = np.zeros((2, 2, 1, 1), dtype=complex)
    trivial[:, 0] = 1
    p0, p1 = np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex)
    bob = np.array([[np.eye(2), np.zeros((2, 2))], [p0, p1]], dtype=complex)
    return QuantumProtocol(2, 2, 2, 2, 0, 0, 0, "A", (QuantumRound("A", alice_u),), trivial, bob, name="chsh-qubit")


def plus_state_protocol() -> QuantumProtocol:
    """Alice sends ``|+>``; Bob measures in the diagonal basis."""
    trivial = np.zeros((1, 2, 1, 1), dtype=complex)
    trivial[:, 0] = 1
    plus = np.array([1, 1]) / np.sqrt(2)
    minus = np.array([1, -1]) / np.sqrt(2)
    bob = np.array([[np.outer(plus, plus), np.outer(minus, minus)]], dtype=complex)
    return QuantumProtocol(1, 1, 2, 2, 0, 0, 0, "A", (QuantumRound("A", H[None]),), trivial, bob, name="plus-state")


# --------------------------------------------------------------------------
# random instances


def random_classical_protocol(
    shape: tuple[int, int, int, int], c: int, rng: np.random.Generator, *, n_random: int = 2
) -> ClassicalProtocol:
    nx, ny, na, nb = shape
    raw = [int(v) for v in rng.integers(1, 5, size=n_random)]
    randomness = tuple(Fraction(v, sum(raw)) for v in raw)
    schedule = "".join(rng.choice(list(PARTIES), size=c)) if c else ""
    msgs = tuple(
        rng.integers(0, 2, size=(nx if s == "A" else ny, n_random, 2**k)) for k, s in enumerate(schedule)
    )
    return ClassicalProtocol(
        nx, ny, na, nb, randomness, schedule, msgs,
        rng.integers(0, na, size=(nx, n_random, 2**c)), rng.integers(0, nb, size=(ny, n_random, 2**c)),
        name="random",
    )


def random_projective(n_in: int, n_out: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """Rank-one projectors of a random basis grouped round-robin into n_out outcomes."""
    out = np.zeros((n_in, n_out, dim, dim), dtype=complex)
    for i in range(n_in):
        u = random_unitary(dim, rng)
        for k in range(dim):
            out[i, k % n_out] += np.outer(u[:, k], u[:, k].conj())
    return out


def random_quantum_protocol(
    shape: tuple[int, int, int, int],
    messages: int,
    rng: np.random.Generator,
    *,
    alice_qubits: int = 1,
    bob_qubits: int = 1,
    epr_pairs: int = 0,
    first_holder: str = "A",
) -> QuantumProtocol:
    nx, ny, na, nb = shape
    rounds = []
    holder = first_holder
    for _ in range(messages):
        priv = alice_qubits if holder == "A" else bob_qubits
        dim = 2 ** (priv + epr_pairs + 1)
        n_in = nx if holder == "A" else ny
        rounds.append(QuantumRound(holder, np.array([random_unitary(dim, rng) for _ in range(n_in)])))
        holder = _other(holder)
    final = holder
    da = 2 ** (alice_qubits + epr_pairs + (final == "A"))
    db = 2 ** (bob_qubits + epr_pairs + (final == "B"))
    return QuantumProtocol(
        nx, ny, na, nb, alice_qubits, bob_qubits, epr_pairs, first_holder, tuple(rounds),
        random_projective(nx, na, da, rng), random_projective(ny, nb, db, rng), name="random",
    )


def random_zerocomm(shape: tuple[int, int, int, int], d: int, rng: np.random.Generator) -> ZeroCommProtocol:
    nx, ny, na, nb = shape
    return ZeroCommProtocol(random_strategy(nx, ny, na, nb, d, rng))


# --------------------------------------------------------------------------
# JSON


def _complex_to_json(a: np.ndarray) -> list:
    a = np.asarray(a, dtype=complex)
    # adding 0.0 turns -0.0 into 0.0 so files are stable across round trips
    return (np.stack([a.real, a.imag], axis=-1) + 0.0).tolist()


def _complex_from_json(data: Any) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ProtocolError("complex arrays must be given as [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def protocol_to_dict(p: AnyProtocol) -> dict:
    if isinstance(p, ClassicalProtocol):
        return {
            "kind": "classical",
            "name": p.name,
            "n_inputs_a": p.n_inputs_a,
            "n_inputs_b": p.n_inputs_b,
            "n_answers_a": p.n_answers_a,
            "n_answers_b": p.n_answers_b,
            "randomness": [[w.numerator, w.denominator] for w in p.randomness],
            "schedule": p.schedule,
            "messages": [m.tolist() for m in p.messages],
            "alice_outputs": p.alice_outputs.tolist(),
            "bob_outputs": p.bob_outputs.tolist(),
        }
    if isinstance(p, QuantumProtocol):
        return {
            "kind": "quantum",
            "name": p.name,
            "n_inputs_a": p.n_inputs_a,
            "n_inputs_b": p.n_inputs_b,
            "n_answers_a": p.n_answers_a,
            "n_answers_b": p.n_answers_b,
            "alice_qubits": p.alice_qubits,
            "bob_qubits": p.bob_qubits,
            "epr_pairs": p.epr_pairs,
            "first_holder": p.first_holder,
            "rounds": [{"party": r.party, "unitaries": _complex_to_json(r.unitaries)} for r in p.rounds],
            "alice_measurement": _complex_to_json(p.alice_measurement),
            "bob_measurement": _complex_to_json(p.bob_measurement),
        }
    if isinstance(p, ZeroCommProtocol):
        qs = p.strategy
        return {
            "kind": "zerocomm",
            "shared": p.shared,
            "state": _complex_to_json(qs.state),
            "alice": _complex_to_json(qs.alice),
            "bob": _complex_to_json(qs.bob),
        }
    raise ProtocolError(f"cannot serialize {type(p).__name__}")


def protocol_from_dict(data: dict) -> AnyProtocol:
    try:
        kind = data["kind"]
        if kind == "classical":
            return ClassicalProtocol(
                data["n_inputs_a"], data["n_inputs_b"], data["n_answers_a"], data["n_answers_b"],
                tuple(Fraction(n, d) for n, d in data["randomness"]),
                data["schedule"],
                tuple(np.array(m, dtype=int).reshape(-1, len(data["randomness"]), 2**k)
                      for k, m in enumerate(data["messages"])),
                data["alice_outputs"], data["bob_outputs"], data.get("name", ""),
            )
        if kind == "quantum":
            rounds = tuple(QuantumRound(r["party"], _complex_from_json(r["unitaries"])) for r in data["rounds"])
            return QuantumProtocol(
                data["n_inputs_a"], data["n_inputs_b"], data["n_answers_a"], data["n_answers_b"],
                data["alice_qubits"], data["bob_qubits"], data["epr_pairs"], data["first_holder"], rounds,
                _complex_from_json(data["alice_measurement"]), _complex_from_json(data["bob_measurement"]),
                data.get("name", ""),
            )
        if kind == "zerocomm":
            qs = QuantumStrategy(
                _complex_from_json(data["state"]), _complex_from_json(data["alice"]), _complex_from_json(data["bob"])
            ).check()
            return ZeroCommProtocol(qs, data.get("shared", "pure"))
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed protocol description: {exc}") from exc
    raise ProtocolError(f"unknown protocol kind {data.get('kind')!r}")


def dumps_protocol(p: AnyProtocol) -> str:
    return json.dumps(protocol_to_dict(p), indent=1)


def load_protocol(path: str | Path) -> AnyProtocol:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"{path}: not valid JSON ({exc})") from exc
    return protocol_from_dict(data)


def save_protocol(p: AnyProtocol, path: str | Path) -> None:
    Path(path).write_text(dumps_protocol(p) + "\n")
