import numpy as np
import pytest

from conftest import dense_annihilator, dense_hamiltonian
from qresponse.errors import AssemblyError, DomainError, SectorRequiredError
from qresponse.fci import solve_all_sectors, solve_sector
from qresponse.fock import FockVector, basis_for
from qresponse.lehmann import (
    EigenLevels,
    assemble_components,
    chi,
    cross_section,
    exact_response,
    lehmann_sum,
    polarizability,
    transition_charge,
    transition_generic,
    transition_set,
    transition_spin,
    transition_spin_charge,
)
from qresponse.model import SPEED_OF_LIGHT_AU, OneBodyOperator, build_hubbard_dimer, random_hamiltonian
from qresponse.sampling import required_sectors


def _dense_ops(n):
    """n_m, s_pj on the full Fock space, built from Kronecker products."""
    a = [dense_annihilator(m, 2 * n) for m in range(2 * n)]
    num = [x.T @ x for x in a]
    spin = {}
    for p in range(n):
        aa, ab = a[2 * p], a[2 * p + 1]
        sp = aa.T @ ab
        spin[(p, "x")] = (sp + sp.T) / 2
        spin[(p, "y")] = (sp - sp.T) / 2j
        spin[(p, "z")] = (num[2 * p] - num[2 * p + 1]) / 2
    return a, num, spin


def _dense_chi(H, gs, A, B, omegas, delta):
    # A, B Hermitian
    e, v = np.linalg.eigh(H)
    e0 = (gs.conj() @ H @ gs).real
    left = v.conj().T @ (A @ gs)
    right = v.conj().T @ (B @ gs)
    w1 = np.conj(left) * right
    w2 = np.conj(right) * left
    de = e - e0
    out = []
    for om in omegas:
        z = om + 1j * delta
        out.append(np.sum(w1 / (z - de)) + np.sum(w2 / (-z - de)))
    return np.array(out)


def _embed(vec):
    out = np.zeros(4**vec.basis.n_orbs, dtype=complex)
    out[vec.basis.jw_indices()] = vec.amps
    return out


def test_levels_binning():
    ham = build_hubbard_dimer(1, 4)
    lv = EigenLevels(solve_all_sectors(ham, required_sectors((1, 1), 2), 10))
    # triplet at 0 spans three sectors, U level twice... bins are distinct energies
    assert lv.n_states == 6
    assert np.allclose(lv.energies, [2 - np.sqrt(8), 0, 4, 2 + np.sqrt(8)])


def test_dimer_charge_examples(dimer):
    ham, g, gs, levels = dimer
    N = transition_charge(gs, levels, 0, 0, 0, 0)
    assert N[0] == pytest.approx(0.25, abs=1e-12)
    assert N.sum() == pytest.approx(0.5, abs=1e-12)


def test_determinant_charge_example():
    ham = random_hamiltonian(3, 2, np.random.default_rng(5))
    sol = solve_sector(ham, (1, 1), 9)
    b = basis_for(3, (1, 1))
    det = FockVector.determinant(b, 0b001, 0b010)
    N = transition_charge(det, EigenLevels(sol), 0, 0, 0, 0)
    ov = np.abs(sol.coeffs.T @ det.amps) ** 2
    assert np.allclose(N.real, EigenLevels(sol).bin_sum(ov), atol=1e-12)


def test_transitions_against_dense_oracle(dimer):
    ham, g, gs, levels = dimer
    H = dense_hamiltonian(ham)
    e, v = np.linalg.eigh(H)
    psi = _embed(gs)
    a, num, spin = _dense_ops(2)
    lv_e = levels.energies

    def binned(A, B):
        w = np.conj(v.T.conj() @ (A.conj().T @ psi)) * (v.T.conj() @ (B @ psi))
        out = np.zeros(len(lv_e), dtype=complex)
        for ek, wk in zip(e, w):
            if abs(wk) > 1e-14:
                out[np.argmin(np.abs(lv_e - ek))] += wk
        return out

    assert np.allclose(transition_charge(gs, levels, 0, 1, 1, 0), binned(num[1], num[2]), atol=1e-12)
    assert np.allclose(transition_spin(gs, levels, 0, "x", 1, "y"), binned(spin[(0, "x")], spin[(1, "y")]), atol=1e-12)
    assert np.allclose(transition_spin_charge(gs, levels, 1, "x", 0, 1), binned(spin[(1, "x")], num[1]), atol=1e-12)
    E = lambda i, j: a[i].T @ a[j]
    assert np.allclose(transition_generic(gs, levels, 0, 2, 3, 1),
                       binned(E(0, 2), E(3, 1)), atol=1e-12)


def test_spin_z_via_charge(dimer):
    _, _, gs, levels = dimer
    Mz = transition_spin_charge(gs, levels, 0, "z", 1, 0)
    want = (transition_charge(gs, levels, 0, 0, 1, 0) - transition_charge(gs, levels, 0, 1, 1, 0)) / 2
    assert np.allclose(Mz, want, atol=1e-12)


def test_spin_x_restricted_to_own_sector_vanishes_or_errors(dimer):
    ham, g, gs, _ = dimer
    own = EigenLevels(solve_all_sectors(ham, [g.sector], 10))
    with pytest.raises(SectorRequiredError):
        transition_spin_charge(gs, own, 0, "x", 0, 0)


def test_transition_set_hermitian_and_sum_rules(dimer):
    _, g, gs, levels = dimer
    ts = transition_set(gs, levels, g.energy)
    for mat in (ts.N, ts.S):
        assert np.abs(mat - np.conj(np.swapaxes(mat, 1, 2))).max() < 1e-12
        assert np.einsum("bii->bi", mat).real.min() > -1e-14
    assert np.allclose(np.einsum("bii->i", ts.N).real + ts.sink_N, 0.5, atol=1e-10)
    # singlet: total S_z annihilates gs
    sz = [3 * p + 2 for p in range(2)]
    assert abs(ts.S[:, sz][:, :, sz].sum()) < 1e-12


def test_lehmann_sum_examples():
    assert lehmann_sum([1.0], [1.0], 0.0, 2.0) == pytest.approx(1.0)
    assert lehmann_sum([1.0], [1.0], 0.0, 1 + 0.01j) == pytest.approx(-100j)
    with pytest.raises(DomainError):
        lehmann_sum([1.0], [1.0], 0.0, 1.0)


def test_chi_against_dense(dimer):
    ham, g, gs, levels = dimer
    H = dense_hamiltonian(ham)
    _, num, spin = _dense_ops(2)
    om = np.random.default_rng(0).uniform(-6, 6, 50)
    grid = exact_response(gs, levels, g.energy, om)
    psi = _embed(gs)
    nc0 = num[0] + num[1]
    assert np.allclose(grid.component(0, "n", 0, "n"), _dense_chi(H, psi, nc0, nc0, om, 0.01), atol=1e-12)
    assert np.allclose(grid.component(0, "x", 1, "x"),
                       _dense_chi(H, psi, spin[(0, "x")], spin[(1, "x")], om, 0.01), atol=1e-12)
    assert np.allclose(grid.component(1, "z", 0, "z"),
                       _dense_chi(H, psi, spin[(1, "z")], spin[(0, "z")], om, 0.01), atol=1e-12)


def test_chi_symmetry_and_tail(dimer):
    _, g, gs, levels = dimer
    ts = transition_set(gs, levels, g.energy)
    w = ts.N[:, 0, 0]
    om = np.linspace(0.1, 8, 80)
    assert np.allclose(chi(w, w, ts.energies, g.energy, -om), np.conj(chi(w, w, ts.energies, g.energy, om)),
                       atol=1e-14)
    big = np.array([1e3, 1e4])
    vals = np.abs(chi(w, w, ts.energies, g.energy, big))
    slope = np.log10(vals[1] / vals[0])
    # the two Lehmann terms cancel at order 1/omega, leaving 1/omega^2
    assert slope == pytest.approx(-2, abs=0.01)


def test_assemble_components_examples():
    labels = "abxy"
    n = 1
    tmp = {(u, v): np.zeros((n, n)) for u in labels for v in labels}
    for k in [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")]:
        tmp[k] = np.full((n, n), 2.0)
    out = assemble_components(tmp)
    assert out[0, 0, 0, 0] == 8.0 and out[0, 3, 0, 3] == 0.0
    tmp = {(u, v): np.zeros((n, n)) for u in labels for v in labels}
    tmp[("a", "a")] = np.ones((n, n))
    out = assemble_components(tmp)
    assert (out[0, 0, 0, 0], out[0, 0, 0, 3], out[0, 3, 0, 0], out[0, 3, 0, 3]) == (1, 0.5, 0.5, 0.25)
    del tmp[("x", "y")]
    with pytest.raises(AssemblyError):
        assemble_components(tmp)


def _dimer_dipoles(R=1.4):
    z = np.zeros((2, 2))
    return [OneBodyOperator("x", np.diag([-R / 2, R / 2])), OneBodyOperator("y", z), OneBodyOperator("z", z)]


def test_polarizability_and_cross_section(dimer):
    _, g, gs, levels = dimer
    om = np.linspace(0.0, 8.0, 801)
    alpha = polarizability(_dimer_dipoles(), gs, levels, g.energy, om)
    sig = cross_section(alpha, om)
    assert sig[0] == 0.0
    assert sig[1:].min() >= -1e-12
    zero = [OneBodyOperator(k, np.zeros((2, 2))) for k in "xyz"]
    assert not np.any(polarizability(zero, gs, levels, g.energy, om))
    back = polarizability(_dimer_dipoles(), gs, levels, g.energy, -om)
    assert np.allclose(alpha, np.conj(np.swapaxes(back, 1, 2)), atol=1e-12)
    # charge-transfer pole only: the peak sits at the singlet excitation E=U with dE = 4 - (2 - 2 sqrt2)
    peak = om[np.argmax(sig)]
    assert peak == pytest.approx(4 - (2 - np.sqrt(8)), abs=0.01)
    assert cross_section(np.eye(3) * 1j / 3, 2.0) == pytest.approx(8 * np.pi / SPEED_OF_LIGHT_AU)
