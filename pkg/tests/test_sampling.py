import numpy as np
import pytest

from qresponse.errors import AssemblyError, ConfigurationError, DegenerateGroundStateError, DomainError
from qresponse.fci import solve_sector
from qresponse.fock import FockVector, apply_spin, basis_for, state_norm
from qresponse.lehmann import (
    EigenLevels,
    exact_response,
    polarizability,
    transition_charge,
    transition_generic,
    transition_set,
)
from qresponse.model import OneBodyOperator, build_hubbard_dimer
from qresponse.sampling import (
    SamplingConfig,
    assemble_offdiag,
    assemble_spin_charge,
    calc_resp_funcs,
    channel_rng,
    ideal_qpe_sample,
    response_channels,
    sample_channel,
    sample_charge_aux,
    sample_charge_diag,
    sample_generic,
    sample_spin_diag,
    sampled_polarizability,
    sampled_transitions,
)

DIPOLES = [OneBodyOperator("x", np.diag([-0.7, 0.7])), OneBodyOperator("y", np.zeros((2, 2))),
           OneBodyOperator("z", np.zeros((2, 2)))]


@pytest.fixture(scope="module")
def atomic():
    """t = 0 dimer: eigenvectors are determinants."""
    ham = build_hubbard_dimer(0.0, 4.0)
    sol = solve_sector(ham, (1, 1), 4)
    return EigenLevels(sol), basis_for(2, (1, 1))


def test_ideal_qpe(dimer):
    _, g, gs, levels = dimer
    sol = levels.solutions[g.sector]
    rng = np.random.default_rng(0)
    eig3 = FockVector(gs.basis, sol.coeffs[:, 3].astype(complex))
    assert {ideal_qpe_sample(eig3, levels, rng) for _ in range(50)} == {3}
    mix = FockVector(gs.basis, (sol.coeffs[:, 0] + sol.coeffs[:, 1]) / np.sqrt(2))
    shots = 100_000
    hits = np.array([ideal_qpe_sample(mix, levels, rng) for _ in range(shots)])
    assert abs(np.mean(hits == 0) - 0.5) < 5 * np.sqrt(0.25 / shots)
    only_one = EigenLevels(solve_sector(build_hubbard_dimer(1, 4), (1, 1), 1))
    orth = FockVector(gs.basis, sol.coeffs[:, 2].astype(complex))
    assert ideal_qpe_sample(orth, only_one, rng) == -1


def test_charge_diag_dimer_ground_bin(dimer):
    _, _, gs, levels = dimer
    est = sample_charge_diag(gs, levels, 0, 0, SamplingConfig(n_meas=100_000, seed=5))
    assert est.exact[0, 0] == pytest.approx(0.25, abs=1e-12)
    assert abs(est.estimates[0, 0] - 0.25) < 5 * est.stderr[0, 0]


def test_charge_diag_empty_orbital(atomic):
    levels, b = atomic
    det = FockVector.determinant(b, 0b01, 0b10)  # (1, alpha) empty
    est = sample_charge_diag(det, levels, 1, 0, SamplingConfig(n_meas=500))
    assert not est.counts.any() and est.other == 500


def test_single_shot(dimer):
    _, _, gs, levels = dimer
    for seed in range(5):
        est = sample_charge_diag(gs, levels, 1, 1, SamplingConfig(n_meas=1, seed=seed))
        assert est.counts.sum() + est.other == 1
        assert set(np.unique(est.estimates)) <= {0.0, 1.0}


def test_charge_aux_on_determinant(atomic):
    levels, b = atomic
    det = FockVector.determinant(b, 0b01, 0b10)  # (0, alpha) and (1, beta) occupied
    est = sample_charge_aux(det, levels, 0, 0, 1, 1, SamplingConfig(n_meas=10))
    own = int(np.argmin(np.abs(levels.energies - 0.0)))
    tot = est.exact.sum(axis=1)
    assert tot == pytest.approx([(2 + np.sqrt(2)) / 4, (2 - np.sqrt(2)) / 4], abs=1e-12)
    assert est.exact[:, own] == pytest.approx(tot, abs=1e-12)
    empty = sample_charge_aux(det, levels, 1, 0, 0, 1, SamplingConfig(n_meas=10))
    assert not empty.exact.any() and not empty.counts.any()


def test_assemble_offdiag_identities():
    rng = np.random.default_rng(0)
    t = rng.uniform(size=(2, 5))
    same = np.stack([t[0], t[0]])
    assert not np.any(assemble_offdiag(same, same))
    u = rng.uniform(size=(2, 5))
    assert np.allclose(assemble_offdiag(u, t), np.conj(assemble_offdiag(t, u)), atol=1e-15)
    with pytest.raises(AssemblyError):
        assemble_spin_charge(None, t, t, t)


def test_exact_pass_through_transitions(dimer):
    _, g, gs, levels = dimer
    cfg = SamplingConfig(n_meas=7, exact_substitution=True)
    samples = {k: sample_channel(k, gs, levels, cfg) for k in response_channels(2)}
    N, S, M = sampled_transitions(samples, 2, levels.n_bins)
    ts = transition_set(gs, levels, g.energy)
    xy = [3 * p + j for p in range(2) for j in (0, 1)]
    assert np.abs(N - ts.N).max() < 1e-12
    assert np.abs(S[:, xy][:, :, xy] - ts.S[:, xy][:, :, xy]).max() < 1e-12
    assert np.abs(M[:, xy] - ts.M[:, xy]).max() < 1e-12


def test_generic_pass_through(dimer):
    _, _, gs, levels = dimer
    cfg = SamplingConfig(n_meas=3, exact_substitution=True)
    diag = sample_generic(gs, levels, (2, 2), cfg)
    assert np.allclose(diag.estimates[0], transition_charge(gs, levels, 1, 0, 1, 0), atol=1e-12)
    fwd = sample_generic(gs, levels, (0, 2, 1, 3), cfg).estimates
    rev = sample_generic(gs, levels, (1, 3, 0, 2), cfg).estimates
    # G[(0,2),(1,3)] = <gs|E_(0,2)^dag|l><l|E_(1,3)|gs>
    want = transition_generic(gs, levels, 2, 0, 1, 3)
    assert np.allclose(assemble_offdiag(fwd, rev), want, atol=1e-12)


def test_spin_x_sum_rule_within_5_sigma(dimer):
    _, _, gs, levels = dimer
    n = 100_000
    est = sample_spin_diag(gs, levels, 0, "x", SamplingConfig(n_meas=n, seed=2))
    up, down = apply_spin(0, "x", gs)
    want = state_norm({up.sector: up, down.sector: down}) ** 2
    P = est.probs[0, :-1].sum()
    se = np.sqrt(P * (1 - P) / n) / est.scale2[0]
    assert abs(est.estimates.sum() - want) < 5 * se


def test_spin_annihilated_state_gives_zero(atomic):
    levels, b = atomic
    both = FockVector(basis_for(2, (1, 1)), np.array([0, 0, 0, 0], dtype=complex))
    both.amps[int(b.index(0b01, 0b01))] = 1  # doubly occupied site 0, s_0x = 0
    lv = EigenLevels([solve_sector(build_hubbard_dimer(0, 4), s, 4) for s in [(1, 1), (2, 0), (0, 2)]])
    est = sample_spin_diag(both, lv, 0, "x", SamplingConfig(n_meas=100))
    assert not est.counts.any()


def test_modes_agree(dimer):
    _, _, gs, levels = dimer
    keys = [("charge_diag", 1), ("charge_aux", 0, 3), ("spin_aux", 0, "x", 1, "y"),
            ("spin_charge", 1, "y", 2, -1), ("generic_aux", 0, 2, 1, 3)]
    for key in keys:
        a = sample_channel(key, gs, levels, SamplingConfig(n_meas=2000, seed=1))
        b = sample_channel(key, gs, levels, SamplingConfig(n_meas=2000, seed=1, mode="circuit"))
        assert np.allclose(a.probs, b.probs, atol=1e-12)
        assert np.array_equal(a.counts, b.counts)


def test_streams_are_independent_and_reproducible():
    a = channel_rng(3, ("charge_diag", 0)).random(4)
    assert np.array_equal(a, channel_rng(3, ("charge_diag", 0)).random(4))
    assert not np.array_equal(a, channel_rng(3, ("charge_diag", 1)).random(4))
    assert not np.array_equal(a, channel_rng(4, ("charge_diag", 0)).random(4))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        SamplingConfig(n_meas=0)
    with pytest.raises(ConfigurationError):
        SamplingConfig(mode="tomography")
    with pytest.raises(ConfigurationError):
        SamplingConfig(n_meas_overrides={"bogus": 10})
    cfg = SamplingConfig(n_meas=10, n_meas_overrides={"spin_charge": 40})
    assert cfg.shots("spin_charge") == 40 and cfg.shots("charge_diag") == 10
    with pytest.raises(DomainError):
        sample_generic(None, None, (0, 1, 2), cfg)


def test_exact_substitution_end_to_end(dimer):
    _, g, gs, levels = dimer
    om = np.linspace(-3, 8, 111)
    cfg = SamplingConfig(n_meas=10, omegas=om, exact_substitution=True)
    got = calc_resp_funcs(gs, levels, g.energy, cfg).grid.values
    want = exact_response(gs, levels, g.energy, om).values
    assert np.abs(got - want).max() < 1e-12
    spec = sampled_polarizability(DIPOLES, gs, levels, g.energy, cfg)
    assert np.abs(spec.alpha - polarizability(DIPOLES, gs, levels, g.energy, om)).max() < 1e-12


def test_zero_weights_give_zero_chi():
    # the vacuum is annihilated by every n and s operator
    sol = solve_sector(build_hubbard_dimer(1, 4), (0, 0), 1)
    gs = FockVector(basis_for(2, (0, 0)), sol.coeffs[:, 0].astype(complex))
    lv = EigenLevels([sol])
    cfg = SamplingConfig(n_meas=50, omegas=np.linspace(0.1, 2, 5))
    resp = calc_resp_funcs(gs, lv, sol.energies[0], cfg)
    assert not np.any(resp.grid.values)


def test_degenerate_is_refused(dimer):
    _, g, gs, levels = dimer
    with pytest.raises(DegenerateGroundStateError):
        calc_resp_funcs(gs, levels, g.energy, SamplingConfig(), degenerate=True)
