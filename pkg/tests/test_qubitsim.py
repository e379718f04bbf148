from itertools import product

import numpy as np
import pytest

from conftest import dense_annihilator
from qresponse.errors import ConfigurationError, DomainError
from qresponse.fock import FockVector, basis_for
from qresponse.qubitsim import (
    BLOCK,
    GPHASE,
    PHASE,
    RY,
    UNITARY,
    H,
    PauliString,
    QubitState,
    X,
    apply_gate,
    apply_gates,
    controlled,
    gate_matrix,
    inject_fault,
    jw_majorana,
    measure,
    outcome_probabilities,
    prepare_register,
    project_branch,
    read_register,
    register_to_state,
)

_P = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]),
      "Z": np.diag([1, -1])}


def _kron_pauli(p: PauliString):
    out = np.array([[1.0]])
    for c in p.letters:  # qubit 0 least significant
        out = np.kron(_P[c], out)
    return p.phase * out


def _basis(n, k):
    v = np.zeros(2**n, dtype=complex)
    v[k] = 1
    return QubitState(n, 0, v)


def test_hadamard_on_zero():
    out = apply_gate(_basis(1, 0), H(0))
    assert np.allclose(out.amps, [1 / np.sqrt(2)] * 2, atol=1e-15)


def test_open_control_polarity():
    s = _basis(2, 0b01)  # control qubit 0 in |1>
    assert np.array_equal(apply_gate(s, X(1, [(0, 0)])).amps, s.amps)
    assert apply_gate(s, X(1, [(0, 1)])).amps[0b11] == 1


def test_pauli_matrix_against_kronecker():
    rng = np.random.default_rng(0)
    for _ in range(20):
        letters = "".join(rng.choice(list("IXYZ"), 4))
        ph = [1, -1, 1j, -1j][rng.integers(4)]
        p = PauliString(ph, letters)
        assert np.allclose(p.matrix(), _kron_pauli(p), atol=1e-15)
        q = PauliString(1, "".join(rng.choice(list("IXYZ"), 4)))
        assert np.allclose((p * q).matrix(), p.matrix() @ q.matrix(), atol=1e-14)
    with pytest.raises(DomainError):
        PauliString(2, "X")


def test_jw_strings():
    assert jw_majorana(0, 0, 3).letters == "XII"
    assert jw_majorana(2, 1, 3).letters == "ZZY"
    for m, kappa in product(range(3), (0, 1)):
        a = dense_annihilator(m, 3)
        want = a + a.T if kappa == 0 else a - a.T
        assert np.allclose(jw_majorana(m, kappa, 3).matrix(), want, atol=1e-15)
    for m in range(3):
        n = dense_annihilator(m, 3).T @ dense_annihilator(m, 3)
        prod = jw_majorana(m, 0, 3).matrix() @ jw_majorana(m, 1, 3).matrix()
        assert np.allclose(prod, -(np.eye(8) - 2 * n))


def test_fault_hook_breaks_tail():
    with inject_fault("jw-tail"):
        bad = jw_majorana(2, 0, 3).matrix()
    a = dense_annihilator(2, 3)
    assert not np.allclose(bad, a + a.T)
    assert np.allclose(jw_majorana(2, 0, 3).matrix(), a + a.T)


def _random_gate(rng, n):
    qs = list(rng.permutation(n))
    kind = rng.integers(6)
    ctrl = [(int(qs[-1]), int(rng.integers(2)))] if rng.random() < 0.5 else []
    t = int(qs[0])
    if kind == 0:
        return controlled(H(t), ctrl)
    if kind == 1:
        return X(t, ctrl)
    if kind == 2:
        return controlled(RY(t, rng.uniform(-3, 3)), ctrl)
    if kind == 3:
        return controlled(PHASE(t, rng.uniform(-3, 3)), ctrl)
    if kind == 4:
        z = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        u, _ = np.linalg.qr(z)
        return controlled(UNITARY([t, int(qs[1])], u), ctrl)
    return controlled(BLOCK([H(t), GPHASE(rng.uniform(-3, 3))]), [(int(qs[1]), 1)])


def test_random_six_qubit_circuit_against_gate_matrices():
    rng = np.random.default_rng(3)
    n = 6
    gates = [_random_gate(rng, n) for _ in range(60)]
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    v /= np.linalg.norm(v)
    got = apply_gates(QubitState(n, 0, v), gates).amps
    U = np.eye(2**n, dtype=complex)
    for g in gates:
        U = gate_matrix(g, n) @ U
    assert np.allclose(got, U @ v, atol=1e-12)
    assert np.allclose(U.conj().T @ U, np.eye(2**n), atol=1e-12)


def test_invalid_gates():
    s = _basis(2, 0)
    with pytest.raises(ConfigurationError):
        apply_gate(s, X(0, [(0, 1)]))
    with pytest.raises(ConfigurationError):
        apply_gate(s, H(5))
    with pytest.raises(ConfigurationError):
        UNITARY([0], np.ones((2, 2)))


def test_measure_basis_state():
    out, post, p = measure(_basis(1, 0), [0], np.random.default_rng(0))
    assert out == (0,) and p == 1.0


def test_measure_statistics():
    plus = apply_gate(_basis(1, 0), H(0))
    rng = np.random.default_rng(11)
    shots = 100_000
    zeros = sum(measure(plus, [0], rng)[0] == (0,) for _ in range(shots))
    assert abs(zeros / shots - 0.5) < 5 * np.sqrt(0.25 / shots)


def test_project_branch_matches_sampled_collapse():
    rng = np.random.default_rng(2)
    v = rng.normal(size=8) + 1j * rng.normal(size=8)
    s = QubitState(3, 0, v / np.linalg.norm(v))
    out, post, p = measure(s, [2, 0], rng)
    det, pd = project_branch(s, [2, 0], out)
    assert np.allclose(post.amps, det.amps, atol=1e-14) and p == pd
    assert sum(outcome_probabilities(s, [2, 0]).values()) == pytest.approx(1.0)
    zero = _basis(2, 0)
    with pytest.raises(DomainError):
        project_branch(zero, [0], (1,))


def test_register_examples():
    b = basis_for(2, (1, 1))
    det = FockVector.determinant(b, 0b01, 0b10)
    reg = prepare_register(det, 1)
    assert np.count_nonzero(reg.amps) == 1
    sup = FockVector(b, np.array([1, 0, 0, 1]) / np.sqrt(2))
    amps = prepare_register(sup).amps
    assert np.allclose(sorted(np.abs(amps[amps != 0])), [1 / np.sqrt(2)] * 2)
    rng = np.random.default_rng(0)
    v = FockVector.random(b, rng)
    back = read_register(prepare_register(v, 2), 2)
    assert np.abs(back[(1, 1)].amps - v.amps).max() <= 1e-15
    with pytest.raises(DomainError):
        prepare_register(v * 2)
    assert register_to_state(np.zeros(16), 2) == {}
