from fractions import Fraction

import numpy as np
import pytest

from nonlocal_lab import games
from nonlocal_lab.classical import DeterministicStrategy
from nonlocal_lab.errors import AmbiguousMode, BudgetViolation, ProtocolError, UnsupportedSharedState
from nonlocal_lab.linalg import maximally_entangled
from nonlocal_lab.protocols import (
    ZeroCommProtocol,
    chsh_qubit_protocol,
    chsh_send_x_protocol,
    constant_protocol,
    plus_state_protocol,
    random_classical_protocol,
    random_quantum_protocol,
    run_protocol,
    total_variation,
)
from nonlocal_lab.quantum import (
    QuantumStrategy,
    chsh_optimal_strategy,
    deterministic_strategy,
    mermin_peres_strategy,
    random_strategy,
)
from nonlocal_lab.reductions import (
    argmax_function_simulation,
    depolarize_entanglement,
    depolarizing_decomposition_error,
    reduction_pipeline,
    teleport_transform,
    transcript_guess_transform,
)


def test_teleport_zero_messages_unchanged():
    rng = np.random.default_rng(0)
    p = random_quantum_protocol((2, 2, 2, 2), 0, rng, epr_pairs=1)
    t = teleport_transform(p)
    g = games.chsh()
    assert total_variation(run_protocol(p, g).distribution, run_protocol(t, g).distribution) < 1e-12
    assert t.communication == 0


def test_teleport_plus_state():
    g = games.make_game(1, 1, 2, 2, {(0, 0): 1}, lambda x, y, a, b: b == 0)
    t = teleport_transform(plus_state_protocol())
    assert abs(run_protocol(t, g).success - 1) < 1e-12


def test_teleport_chsh_qubit():
    p = chsh_qubit_protocol()
    t = teleport_transform(p)
    assert t.communication == 2 and len(t.epr) == 1
    assert abs(run_protocol(t, games.chsh()).success - run_protocol(p, games.chsh()).success) < 1e-9


def test_teleport_random_protocols():
    rng = np.random.default_rng(1)
    g = games.chsh()
    for k in range(6):
        p = random_quantum_protocol((2, 2, 2, 2), 1 + k % 3, rng, epr_pairs=k % 2, first_holder="BA"[k % 2])
        t = teleport_transform(p)
        assert t.communication == 2 * p.messages
        assert total_variation(run_protocol(p, g).distribution, run_protocol(t, g).distribution) < 1e-9


def test_teleport_qubit_budget():
    rng = np.random.default_rng(2)
    p = random_quantum_protocol((2, 2, 2, 2), 6, rng, alice_qubits=1, bob_qubits=1, epr_pairs=1)
    with pytest.raises(BudgetViolation):
        teleport_transform(p)


def test_guess_no_communication_is_identity():
    p = constant_protocol((2, 2, 2, 2), 1, 0)
    g = games.chsh()
    assert run_protocol(transcript_guess_transform(p), g).success == run_protocol(p, g).success


def test_guess_send_x():
    run = run_protocol(transcript_guess_transform(chsh_send_x_protocol()), games.chsh())
    assert run.success == Fraction(1, 4) and run.no_abort == Fraction(1, 4)


def test_guess_random_three_bit_protocols():
    rng = np.random.default_rng(3)
    g = games.chsh()
    for _ in range(20):
        p = random_classical_protocol((2, 2, 2, 2), 3, rng)
        base = run_protocol(p, g).success
        guessed = run_protocol(transcript_guess_transform(p), g)
        assert guessed.success == base / 8 and guessed.no_abort == Fraction(1, 8)


def test_guess_on_teleported_protocol():
    t = teleport_transform(chsh_qubit_protocol())
    guessed = run_protocol(transcript_guess_transform(t), games.chsh())
    assert abs(guessed.success - 7 / 32) < 1e-12
    with pytest.raises(ProtocolError):
        transcript_guess_transform(transcript_guess_transform(t))


def test_decomposition_identity():
    for m in (1, 2, 3):
        assert depolarizing_decomposition_error(m) < 1e-12


def test_depolarize_ignored_registers():
    alice = np.zeros((2, 2, 2, 2), dtype=complex)
    alice[:, 0] = 0.3 * np.eye(2)
    alice[:, 1] = 0.7 * np.eye(2)
    bob = np.zeros((2, 2, 2, 2), dtype=complex)
    bob[:, 1] = np.eye(2)
    zc = ZeroCommProtocol(QuantumStrategy(maximally_entangled(2), alice, bob))
    res = depolarize_entanglement(zc, games.chsh())
    assert abs(res.success_after - res.success_before) < 1e-12


def test_depolarize_mermin_peres():
    res = depolarize_entanglement(ZeroCommProtocol(mermin_peres_strategy()), games.magic_square())
    assert res.pairs == 2
    assert res.success_after >= 1 / 16 - 1e-9
    assert res.decomposition_gap < 1e-12
    assert res.protocol.shared == "mixed"


def test_depolarize_rejects_other_states():
    rng = np.random.default_rng(4)
    with pytest.raises(UnsupportedSharedState):
        depolarize_entanglement(ZeroCommProtocol(random_strategy(2, 2, 2, 2, 2, rng)))
    with pytest.raises(UnsupportedSharedState):
        depolarize_entanglement(chsh_send_x_protocol())
    with pytest.raises(UnsupportedSharedState):
        depolarize_entanglement(ZeroCommProtocol(chsh_optimal_strategy(), shared="mixed"))


def test_argmax_deterministic_input():
    g = games.chsh()
    s = DeterministicStrategy((0, 1), (1, 1))
    res = argmax_function_simulation(ZeroCommProtocol(deterministic_strategy(s, g)), g)
    assert res.strategy == s and res.success == Fraction(res.original_success).limit_denominator()


def test_argmax_noisy_function():
    # Alice answers f(x) with probability 0.9, Bob has no choice
    f = [2, 0, 1]
    alice = np.zeros((3, 3, 1, 1), dtype=complex)
    for x, fx in enumerate(f):
        alice[x, :, 0, 0] = 0.05
        alice[x, fx, 0, 0] = 0.9
    bob = np.ones((1, 1, 1, 1), dtype=complex)
    zc = ZeroCommProtocol(QuantumStrategy(np.ones(1), alice, bob))
    res = argmax_function_simulation(zc, lambda x, y, a, b: a == f[x])
    assert res.success == 1 and abs(res.original_success - 0.9) < 1e-12


def test_argmax_ambiguous_modes():
    zc = ZeroCommProtocol(chsh_optimal_strategy())
    res = argmax_function_simulation(zc, games.chsh())
    assert res.ambiguous and res.strategy.alice == (0, 0)
    with pytest.raises(AmbiguousMode):
        argmax_function_simulation(zc, games.chsh(), strict=True)


def test_pipeline_rows():
    rows = reduction_pipeline(chsh_qubit_protocol(), games.chsh())
    assert [r.name for r in rows] == ["input", "teleport", "guess", "depolarize"]
    assert [r.communication for r in rows] == [1, 2, 0, 0]
    assert all(r.check for r in rows)
    assert float(rows[-1].success) >= 7 / 8 / 16 - 1e-9


def test_pipeline_zero_stages_echoes_run():
    rows = reduction_pipeline(chsh_send_x_protocol(), games.chsh(), ())
    assert len(rows) == 1 and rows[0].success == 1


def test_pipeline_stage_order_enforced():
    with pytest.raises(ProtocolError):
        reduction_pipeline(chsh_qubit_protocol(), games.chsh(), ("guess",))
    with pytest.raises(ProtocolError):
        reduction_pipeline(chsh_qubit_protocol(), games.chsh(), ("depolarize",))
    with pytest.raises(ProtocolError):
        reduction_pipeline(chsh_send_x_protocol(), games.chsh(), ("warp",))


def test_pipeline_argmax_stage():
    rows = reduction_pipeline(ZeroCommProtocol(chsh_optimal_strategy()), games.chsh(), ("argmax",))
    assert rows[-1].check and "ambiguous" in rows[-1].note
