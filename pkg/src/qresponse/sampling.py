"""Statistical sampling of transition matrices with idealized phase estimation.

A *channel* is one ancilla circuit run repeatedly on the ground state.  Each
shot ends in one category: (tag, energy bin) when the ancillae show a tagged
outcome and phase estimation returns that bin, (tag, sink) when it returns a
level outside the kept eigenpairs, or "other" for any untagged outcome.  All
categories count toward N_meas, so an estimate is

    count(tag, bin) / (N_meas |scale_tag|^2)

where ``scale`` is the factor in front of the prepared operator (2 for the
spin circuits, which prepare 2 s|psi>).

Everything downstream of the tallies is linear in them.  Standard errors are
therefore exact multinomial propagations, computed by pushing one channel's
unit tallies through the same assembly code.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .circuits import (
    C8,
    branch_register_states,
    build_response_circuit,
    expected_register,
    outcome_distribution,
    run_circuit,
)
from .errors import AssemblyError, ConfigurationError, DegenerateGroundStateError, DomainError
from .fock import FockVector, Sector, spin_orbital, state_norm
from .lehmann import (
    DEFAULT_DELTA,
    EigenLevels,
    ResponseGrid,
    as_levels,
    assemble_components,
    cross_section,
    denominators,
)

SQRT2 = np.sqrt(2.0)
FAMILIES = (
    "charge_diag",
    "charge_aux",
    "spin_diag",
    "spin_aux",
    "spin_charge",
    "generic_diag",
    "generic_aux",
)
_SPIN_IDX = {"x": 0, "y": 1, "z": 2}
_DROP_TOL = 1e-24  # squared norm below which a circuit branch sector is round-off


@dataclass(frozen=True)
class SamplingConfig:
    """Shots, seed and grid for a sampling run.

    ``n_meas_overrides`` maps a channel family (see FAMILIES) to its own shot
    count.  ``exact_substitution`` replaces tallies by their exact
    expectation values.
    """

    n_meas: int = 10_000
    seed: int = 0
    mode: str = "eigenbasis"
    delta: float = DEFAULT_DELTA
    omegas: np.ndarray = field(default_factory=lambda: np.linspace(0.0, 2.0, 201))
    k_eigen: int | None = None
    n_meas_overrides: Mapping = field(default_factory=dict)
    exact_substitution: bool = False

    def __post_init__(self):
        if int(self.n_meas) < 1:
            raise ConfigurationError("n_meas must be at least 1")
        if not self.delta > 0:
            raise ConfigurationError("delta must be positive")
        if self.mode not in ("eigenbasis", "circuit"):
            raise ConfigurationError(f"mode must be 'eigenbasis' or 'circuit', got {self.mode!r}")
        for fam, n in dict(self.n_meas_overrides).items():
            if fam not in FAMILIES:
                raise ConfigurationError(f"unknown channel family {fam!r}")
            if int(n) < 1:
                raise ConfigurationError(f"n_meas override for {fam} must be at least 1")
        object.__setattr__(self, "omegas", np.asarray(self.omegas, dtype=float))

    def shots(self, family: str) -> int:
        return int(self.n_meas_overrides.get(family, self.n_meas))


# ---------------------------------------------------------------------------
# channels


@dataclass(frozen=True)
class ChannelSpec:
    key: tuple
    circuit_kind: str
    circuit_indices: tuple
    tags: tuple  # outcome keys of the tagged outcomes

    @property
    def family(self):
        return self.key[0]


def channel_spec(key: tuple) -> ChannelSpec:
    """Circuit and tagged outcomes for a channel key.

    Keys: ('charge_diag', m), ('charge_aux', m, m'), ('spin_diag', p, j),
    ('spin_aux', p, j, p', j'), ('spin_charge', p, j, m', sign),
    ('generic_diag', a, b), ('generic_aux', a, b, c, d).  m are spin-orbital
    indices 2p + s; the generic keys name excitations a+_a a_b.
    """
    fam = key[0]
    if fam == "charge_diag":
        m = key[1]
        return ChannelSpec(key, "charge_diag", (m // 2, m % 2), ((0,),))
    if fam == "charge_aux":
        m, mm = key[1:]
        return ChannelSpec(key, "charge_offdiag", (m // 2, m % 2, mm // 2, mm % 2), ((0, 1), (1, 1)))
    if fam == "spin_diag":
        return ChannelSpec(key, "spin_diag", tuple(key[1:]), ((0,),))
    if fam == "spin_aux":
        return ChannelSpec(key, "spin_offdiag", tuple(key[1:]), ((0, 0), (1, 0)))
    if fam == "spin_charge":
        p, j, mm, sign = key[1:]
        return ChannelSpec(key, "spin_charge", (p, j, mm // 2, mm % 2, sign), ((0, 0),))
    if fam == "generic_diag":
        return ChannelSpec(key, "generic_diag", tuple(key[1:]), ((1, 0),))
    if fam == "generic_aux":
        return ChannelSpec(key, "generic_offdiag", tuple(key[1:]), ((0, 1, 0), (1, 1, 0)))
    raise DomainError(f"unknown channel family {fam!r}")


def _key_ints(key):
    out = [FAMILIES.index(key[0])]
    for v in key[1:]:
        out.append(_SPIN_IDX[v] if isinstance(v, str) else int(v) % 2**32)
    return out


def channel_rng(seed: int, key: tuple) -> np.random.Generator:
    """Counter-based stream for one channel; shot i consumes the i-th draw."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), *_key_ints(key)])))


@dataclass
class SampledEstimates:
    """Tallies of one channel.

    ``counts[t, b]`` for tag t and bin b (the last column is the sink),
    ``other`` the shots landing on untagged outcomes, ``probs`` the exact
    category probabilities in the same layout.
    """

    key: tuple
    n_meas: int
    counts: np.ndarray
    other: int
    scale2: np.ndarray
    probs: np.ndarray
    other_prob: float

    @property
    def sink_count(self):
        return self.counts[:, -1]

    @property
    def estimates(self) -> np.ndarray:
        """Per-bin weights, shape (tags, bins)."""
        return self.counts[:, :-1] / (self.n_meas * self.scale2[:, None])

    @property
    def exact(self) -> np.ndarray:
        return self.probs[:, :-1] / self.scale2[:, None]

    @property
    def stderr(self) -> np.ndarray:
        """Binomial standard error of every per-bin estimate, from exact probabilities."""
        p = self.probs[:, :-1]
        return np.sqrt(p * (1 - p) / self.n_meas) / self.scale2[:, None]


def _normalized_probs(levels, state, drop_small=False):
    if drop_small:
        state = {k: v for k, v in state.items() if np.vdot(v.amps, v.amps).real > _DROP_TOL}
        if not state:
            return np.zeros(levels.n_bins), 0.0
    return levels.bin_probabilities(state)


def channel_probabilities(spec: ChannelSpec, gs: FockVector, levels: EigenLevels, mode="eigenbasis"):
    """Exact category probabilities: (array (tags, bins + 1), other, |scale|^2 per tag)."""
    circ = build_response_circuit(spec.circuit_kind, spec.circuit_indices, gs.basis.n_orbs)
    out = np.zeros((len(spec.tags), levels.n_bins + 1))
    scale2 = np.zeros(len(spec.tags))
    final = run_circuit(circ, gs) if mode == "circuit" else None
    for t, tag in enumerate(spec.tags):
        entry = circ.outcome(tag)
        scale2[t] = abs(entry.scale) ** 2
        if mode == "circuit":
            total = outcome_distribution(circ, final)[tag]
            bins = np.zeros(levels.n_bins)
            for st in branch_register_states(circ, final, tag, gs.basis.n_orbs):
                b, _ = _normalized_probs(levels, st, drop_small=True)
                bins += b
            out[t, :-1] = bins
            out[t, -1] = max(0.0, total - bins.sum())
        else:
            branch = expected_register(entry, gs)
            bins, sink = levels.bin_probabilities(branch)
            out[t, :-1] = bins
            out[t, -1] = sink
    other = max(0.0, 1.0 - out.sum())
    return out, other, scale2


def ideal_qpe_sample(state, levels, rng) -> int:
    """Energy bin drawn with probability |<lambda|state>|^2 (normalized); -1 for the sink."""
    levels = as_levels(levels)
    st = {state.sector: state} if isinstance(state, FockVector) else state
    nrm2 = state_norm(st) ** 2
    if nrm2 == 0:
        raise DomainError("cannot run phase estimation on the zero vector")
    probs, sink = levels.bin_probabilities(st)
    cdf = np.cumsum(np.append(probs, sink) / nrm2)
    cdf[-1] = 1.0
    k = int(np.searchsorted(cdf, rng.random(), side="right"))
    return -1 if k >= levels.n_bins else k


def draw_categories(probs: np.ndarray, n: int, rng) -> np.ndarray:
    """Counts of n independent categorical draws (one uniform per shot)."""
    p = np.clip(np.asarray(probs, dtype=float), 0, None)
    cdf = np.cumsum(p) / p.sum()
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, rng.random(n), side="right")
    return np.bincount(np.minimum(idx, len(p) - 1), minlength=len(p))


def sample_channel(key, gs: FockVector, levels, cfg: SamplingConfig) -> SampledEstimates:
    levels = as_levels(levels)
    spec = channel_spec(tuple(key))
    probs, other, scale2 = channel_probabilities(spec, gs, levels, cfg.mode)
    n = cfg.shots(spec.family)
    flat = np.append(probs.reshape(-1), other)
    if cfg.exact_substitution:
        counts = flat * n
    else:
        counts = draw_categories(flat, n, channel_rng(cfg.seed, spec.key))
    return SampledEstimates(spec.key, n, counts[:-1].reshape(probs.shape), counts[-1], scale2, probs, other)


# thin wrappers matching the algorithm steps

def sample_charge_diag(gs, eig, p, s, cfg) -> SampledEstimates:
    return sample_channel(("charge_diag", spin_orbital(p, s)), gs, eig, cfg)


def sample_charge_aux(gs, eig, p, s, pp, ss, cfg) -> SampledEstimates:
    return sample_channel(("charge_aux", spin_orbital(p, s), spin_orbital(pp, ss)), gs, eig, cfg)


def sample_spin_diag(gs, eig, p, j, cfg) -> SampledEstimates:
    return sample_channel(("spin_diag", p, j), gs, eig, cfg)


def sample_spin_aux(gs, eig, p, j, pp, jj, cfg) -> SampledEstimates:
    return sample_channel(("spin_aux", p, j, pp, jj), gs, eig, cfg)


def sample_spin_charge(gs, eig, p, j, pp, ss, sign, cfg) -> SampledEstimates:
    return sample_channel(("spin_charge", p, j, spin_orbital(pp, ss), sign), gs, eig, cfg)


def sample_generic(gs, eig, indices, cfg) -> SampledEstimates:
    """Two indices (m1, m2): diagonal circuit; four (m2, m1, m3, m4): off-diagonal."""
    indices = tuple(indices)
    if len(indices) == 2:
        return sample_channel(("generic_diag", *indices), gs, eig, cfg)
    if len(indices) == 4:
        return sample_channel(("generic_aux", *indices), gs, eig, cfg)
    raise DomainError("generic sampling takes 2 or 4 spin-orbital indices")


# ---------------------------------------------------------------------------
# assembly (pure algebra, leading batch axes allowed)


def assemble_offdiag(t_fwd, t_rev):
    """e^{-i pi/4} (T+ - T-)_{fwd} + e^{i pi/4} (T+ - T-)_{rev}; T arrays (..., 2, bins)."""
    t_fwd = np.asarray(t_fwd)
    t_rev = np.asarray(t_rev)
    d1 = t_fwd[..., 0, :] - t_fwd[..., 1, :]
    d2 = t_rev[..., 0, :] - t_rev[..., 1, :]
    return np.conj(C8) * d1 + C8 * d2


assemble_charge_offdiag = assemble_offdiag
assemble_spin_offdiag = assemble_offdiag


def assemble_spin_charge(t_plus, t_minus, s_diag, n_diag):
    """M = e^{-i pi/4} T+ + e^{i pi/4} T- - sqrt2 S - N / (2 sqrt2)."""
    if t_plus is None or t_minus is None:
        raise AssemblyError("spin-charge assembly needs both T+ and T- estimates")
    if s_diag is None or n_diag is None:
        raise AssemblyError("spin-charge assembly needs the diagonal S and N estimates")
    return (np.conj(C8) * np.asarray(t_plus) + C8 * np.asarray(t_minus)
            - SQRT2 * np.asarray(s_diag) - np.asarray(n_diag) / (2 * SQRT2))


class _Tallies:
    """Channel -> per-bin estimates (..., tags, bins); missing channels are zero when lenient."""

    def __init__(self, est: Mapping, n_bins: int, batch=(), strict=True):
        self.est = est
        self.n_bins = n_bins
        self.batch = tuple(batch)
        self.strict = strict

    def __call__(self, key, n_tags=1):
        try:
            return self.est[key]
        except KeyError:
            if self.strict:
                raise AssemblyError(f"estimates for channel {key} are required but missing") from None
            return np.zeros(self.batch + (n_tags, self.n_bins))


def transitions_from_tallies(tal: _Tallies, n_orbs: int):
    """Per-bin N (..., b, 2n, 2n), S (..., b, 3n, 3n) and M (..., b, 3n, 2n)."""
    nb = tal.n_bins
    ns = 2 * n_orbs
    lead = tal.batch
    N = np.zeros(lead + (nb, ns, ns), dtype=complex)
    S = np.zeros(lead + (nb, 3 * n_orbs, 3 * n_orbs), dtype=complex)
    M = np.zeros(lead + (nb, 3 * n_orbs, ns), dtype=complex)
    for m in range(ns):
        N[..., :, m, m] = tal(("charge_diag", m))[..., 0, :]
    for m in range(ns):
        for mm in range(m):
            w = assemble_charge_offdiag(tal(("charge_aux", m, mm), 2), tal(("charge_aux", mm, m), 2))
            N[..., :, m, mm] = w
            N[..., :, mm, m] = np.conj(w)
    spins = [(p, j) for p in range(n_orbs) for j in ("x", "y")]
    for p, j in spins:
        a = 3 * p + _SPIN_IDX[j]
        S[..., :, a, a] = tal(("spin_diag", p, j))[..., 0, :]
    for i, (p, j) in enumerate(spins):
        for pp, jj in spins[:i]:
            a, b = 3 * p + _SPIN_IDX[j], 3 * pp + _SPIN_IDX[jj]
            w = assemble_spin_offdiag(tal(("spin_aux", p, j, pp, jj), 2), tal(("spin_aux", pp, jj, p, j), 2))
            S[..., :, a, b] = w
            S[..., :, b, a] = np.conj(w)
    for p, j in spins:
        a = 3 * p + _SPIN_IDX[j]
        for mm in range(ns):
            M[..., :, a, mm] = assemble_spin_charge(
                tal(("spin_charge", p, j, mm, 1))[..., 0, :],
                tal(("spin_charge", p, j, mm, -1))[..., 0, :],
                S[..., :, a, a], N[..., :, mm, mm])
    return N, S, M


def response_from_transitions(N, S, M, energies, e_gs, omegas, delta):
    """chi over (n, x, y, z) by the diagonal / off-diagonal accumulation loops.

    Returns (..., n_omega, n, 4, n, 4).  Spin-charge blocks are accumulated
    for every (p, p') pair.
    """
    dp, dm = denominators(np.asarray(omegas, dtype=float), energies, e_gs, delta)
    n_orbs = N.shape[-1] // 2
    lead = N.shape[:-3]
    nw = dp.shape[0]

    def lam(w, w_rev):
        return np.einsum("...b,wb->...w", w, dp) + np.einsum("...b,wb->...w", w_rev, dm)

    labels = ("a", "b", "x", "y")
    tmp = {(u, v): np.zeros(lead + (nw, n_orbs, n_orbs), dtype=complex) for u in labels for v in labels}
    sig = ("a", "b")
    js = ("x", "y")

    for p in range(n_orbs):
        for s in (0, 1):
            m = 2 * p + s
            w = N[..., :, m, m]
            tmp[(sig[s], sig[s])][..., p, p] += lam(w, w)
        for j in js:
            a = 3 * p + _SPIN_IDX[j]
            w = S[..., :, a, a]
            tmp[(j, j)][..., p, p] += lam(w, w)

    for p in range(n_orbs):
        for pp in range(p + 1):
            for s in (0, 1):
                for ss in (0, 1):
                    if p > pp or (s == 1 and ss == 0):
                        w = N[..., :, 2 * p + s, 2 * pp + ss]
                        tmp[(sig[s], sig[ss])][..., p, pp] += lam(w, np.conj(w))
                        tmp[(sig[ss], sig[s])][..., pp, p] += lam(np.conj(w), w)
            for j in js:
                for jj in js:
                    if p > pp or (j == "y" and jj == "x"):
                        w = S[..., :, 3 * p + _SPIN_IDX[j], 3 * pp + _SPIN_IDX[jj]]
                        tmp[(j, jj)][..., p, pp] += lam(w, np.conj(w))
                        tmp[(jj, j)][..., pp, p] += lam(np.conj(w), w)

    for p in range(n_orbs):
        for pp in range(n_orbs):
            for j in js:
                for ss in (0, 1):
                    w = M[..., :, 3 * p + _SPIN_IDX[j], 2 * pp + ss]
                    tmp[(j, sig[ss])][..., p, pp] += lam(w, np.conj(w))
                    tmp[(sig[ss], j)][..., pp, p] += lam(np.conj(w), w)

    return assemble_components(tmp)


# ---------------------------------------------------------------------------
# channel sets and error propagation


def response_channels(n_orbs: int) -> list:
    ns = 2 * n_orbs
    keys = [("charge_diag", m) for m in range(ns)]
    keys += [("charge_aux", m, mm) for m in range(ns) for mm in range(ns) if m != mm]
    spins = [(p, j) for p in range(n_orbs) for j in ("x", "y")]
    keys += [("spin_diag", p, j) for p, j in spins]
    keys += [("spin_aux", p, j, pp, jj) for p, j in spins for pp, jj in spins if (p, j) != (pp, jj)]
    keys += [("spin_charge", p, j, mm, sg) for p, j in spins for mm in range(ns) for sg in (1, -1)]
    return keys


def _probe_tallies(sample: SampledEstimates, n_bins: int):
    """Unit tallies of every category of one channel, shaped (K, tags, bins)."""
    nt = sample.counts.shape[0]
    k = nt * (n_bins + 1) + 1
    probe = np.zeros((k, nt, n_bins))
    for t in range(nt):
        for b in range(n_bins):
            probe[t * (n_bins + 1) + b, t, b] = 1.0 / sample.scale2[t]
    flat_p = np.append(sample.probs.reshape(-1), sample.other_prob)
    flat_c = np.append(sample.counts.reshape(-1), sample.other) / sample.n_meas
    return probe, flat_p, flat_c


def propagate_stderr(pipeline, samples: Mapping, n_bins: int, use_exact=True):
    """Standard errors of Re and Im of ``pipeline(tallies)``.

    ``pipeline`` maps a _Tallies to a complex array and must be linear in
    the tallies.  Multinomial covariance within a channel, independence
    across channels; probabilities are the exact ones (``use_exact``) or
    the observed frequencies.
    """
    var_re = var_im = 0.0
    shape = None
    for key, smp in samples.items():
        probe, p_exact, p_obs = _probe_tallies(smp, n_bins)
        p = p_exact if use_exact else p_obs
        tal = _Tallies({key: probe}, n_bins, batch=(probe.shape[0],), strict=False)
        a = np.asarray(pipeline(tal))
        shape = a.shape[1:]
        a = a.reshape(a.shape[0], -1)
        for part, acc in ((a.real, "re"), (a.imag, "im")):
            mean = p @ part
            v = (p @ part**2 - mean**2) / smp.n_meas
            if acc == "re":
                var_re = var_re + v
            else:
                var_im = var_im + v
    if shape is None:
        return None, None
    return (np.sqrt(np.maximum(var_re, 0)).reshape(shape),
            np.sqrt(np.maximum(var_im, 0)).reshape(shape))


# ---------------------------------------------------------------------------
# top level


@dataclass
class SampledResponse:
    grid: ResponseGrid
    samples: dict
    stderr_re: np.ndarray | None = None
    stderr_im: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def required_sectors(gs_sector, n_orbs) -> list[Sector]:
    """Ground-state sector plus the spin-flip neighbours the x, y channels reach."""
    na, nb = gs_sector
    out = [Sector(na, nb)]
    for da in (1, -1):
        a, b = na + da, nb - da
        if 0 <= a <= n_orbs and 0 <= b <= n_orbs:
            out.append(Sector(a, b))
    return out


def _sample_all(keys, gs, levels, cfg):
    return {k: sample_channel(k, gs, levels, cfg) for k in keys}


def _meta(samples, cfg, t0):
    sink = {str(k): float(s.sink_count.sum() / s.n_meas) for k, s in samples.items()}
    return {
        "seed": cfg.seed,
        "mode": cfg.mode,
        "n_meas": cfg.n_meas,
        "n_meas_overrides": dict(cfg.n_meas_overrides),
        "exact_substitution": cfg.exact_substitution,
        "channels": len(samples),
        "sink_fraction_max": max(sink.values()) if sink else 0.0,
        "seconds": time.perf_counter() - t0,
    }


def calc_resp_funcs(gs: FockVector, eig, e_gs: float, cfg: SamplingConfig,
                    degenerate: bool = False, with_errors: bool = True,
                    exact_errors: bool = False) -> SampledResponse:
    """Sampled charge/spin response on cfg.omegas.

    Standard errors use the observed frequencies, or the exact category
    probabilities with ``exact_errors`` (for testing against the exact curve).
    """
    if degenerate:
        raise DegenerateGroundStateError("ground state is degenerate; sampled response is undefined")
    t0 = time.perf_counter()
    levels = as_levels(eig)
    n = gs.basis.n_orbs
    samples = _sample_all(response_channels(n), gs, levels, cfg)

    def pipeline(tal):
        N, S, M = transitions_from_tallies(tal, n)
        return response_from_transitions(N, S, M, levels.energies, e_gs, cfg.omegas, cfg.delta)

    est = {k: s.estimates for k, s in samples.items()}
    vals = pipeline(_Tallies(est, levels.n_bins))
    grid = ResponseGrid(cfg.omegas, cfg.delta, vals)
    se_re = se_im = None
    if with_errors and not cfg.exact_substitution:
        se_re, se_im = propagate_stderr(pipeline, samples, levels.n_bins, use_exact=exact_errors)
    return SampledResponse(grid, samples, se_re, se_im, _meta(samples, cfg, t0))


def sampled_transitions(samples: Mapping, n_orbs: int, n_bins: int):
    """(N, S, M) from a dict of SampledEstimates."""
    est = {k: s.estimates for k, s in samples.items()}
    return transitions_from_tallies(_Tallies(est, n_bins), n_orbs)


# generic one-body channels and the dipole pipeline

def excitation_coefficients(mat: np.ndarray) -> dict:
    """sum_pq,s mat_pq a+_ps a_qs as {(2p+s, 2q+s): mat_pq}, zeros dropped."""
    n = mat.shape[0]
    out = {}
    for p in range(n):
        for q in range(n):
            if mat[p, q] != 0:
                for s in (0, 1):
                    out[(2 * p + s, 2 * q + s)] = float(mat[p, q])
    return out


def generic_channels(kset) -> list:
    kset = list(kset)
    keys = [("generic_diag", *k) for k in kset]
    keys += [("generic_aux", *k1, *k2) for k1 in kset for k2 in kset if k1 != k2]
    return keys


def generic_matrix(tal: _Tallies, kset) -> np.ndarray:
    """G[..., b, K, K'] = <gs|E_K^dagger|lambda><lambda|E_K'|gs> from generic tallies."""
    kset = list(kset)
    G = np.zeros(tal.batch + (tal.n_bins, len(kset), len(kset)), dtype=complex)
    for i, k1 in enumerate(kset):
        G[..., :, i, i] = tal(("generic_diag", *k1))[..., 0, :]
        for j in range(i):
            k2 = kset[j]
            w = assemble_offdiag(tal(("generic_aux", *k1, *k2), 2), tal(("generic_aux", *k2, *k1), 2))
            G[..., :, i, j] = w
            G[..., :, j, i] = np.conj(w)
    return G


def onebody_response_from_generic(G, kset, mats, energies, e_gs, omegas, delta):
    """chi_{O_i O_j}(omega) for one-body matrices ``mats``: (..., n_omega, k, k)."""
    kset = list(kset)
    D = np.zeros((len(mats), len(kset)))
    for i, mat in enumerate(mats):
        coef = excitation_coefficients(np.asarray(mat))
        for a, k in enumerate(kset):
            D[i, a] = coef.get(k, 0.0)
    W = np.einsum("ia,...bac,jc->...bij", D, G, D)  # D real
    dp, dm = denominators(np.asarray(omegas, dtype=float), energies, e_gs, delta)
    W_rev = np.swapaxes(W, -1, -2)
    return np.einsum("...bij,wb->...wij", W, dp) + np.einsum("...bij,wb->...wij", W_rev, dm)


@dataclass
class SampledSpectrum:
    omegas: np.ndarray
    alpha: np.ndarray
    sigma: np.ndarray
    sigma_stderr: np.ndarray | None
    samples: dict
    meta: dict


def sampled_polarizability(dipoles, gs: FockVector, eig, e_gs: float, cfg: SamplingConfig,
                           with_errors=True, degenerate=False, exact_errors=False) -> SampledSpectrum:
    """alpha = -chi_dd from generic-circuit sampling, and the cross section."""
    if degenerate:
        raise DegenerateGroundStateError("ground state is degenerate; sampled response is undefined")
    dipoles = list(dipoles)
    if len(dipoles) != 3:
        raise DomainError("three dipole components required")
    t0 = time.perf_counter()
    levels = as_levels(eig)
    mats = [-np.asarray(d.mat) for d in dipoles]
    kset = sorted(set().union(*(excitation_coefficients(m) for m in mats)))
    samples = _sample_all(generic_channels(kset), gs, levels, cfg)

    def pipeline(tal):
        G = generic_matrix(tal, kset)
        return -onebody_response_from_generic(G, kset, mats, levels.energies, e_gs, cfg.omegas, cfg.delta)

    alpha = pipeline(_Tallies({k: s.estimates for k, s in samples.items()}, levels.n_bins))
    sigma = cross_section(alpha, cfg.omegas)
    se = None
    if with_errors and not cfg.exact_substitution and samples:
        se, _ = propagate_stderr(lambda tal: cross_section(pipeline(tal), cfg.omegas).astype(complex),
                                 samples, levels.n_bins, use_exact=exact_errors)
    meta = _meta(samples, cfg, t0)
    meta["negative_sigma_points"] = int(np.sum(sigma[cfg.omegas > 0] < 0))
    return SampledSpectrum(cfg.omegas, alpha, sigma, se, samples, meta)
