"""Exact transition weights and response functions from eigenpairs.

A weight for operators (O, O') at energy level b is

    W_b = sum_{lambda in b} <gs|O|lambda><lambda|O'|gs>,

where levels closer than ``BIN_TOL`` are merged into one bin because only
energies are resolved by phase estimation.  The retarded response is

    chi(w) = sum_b W^{OO'}_b / (w + i delta - dE_b) + W^{O'O}_b / (-w - i delta - dE_b).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import AssemblyError, DomainError, SectorRequiredError
from .fci import EigenSolution
from .fock import (
    ALPHA,
    BETA,
    FockVector,
    Sector,
    apply_excitation,
    apply_number,
    apply_onebody,
    apply_spin,
    as_state,
    state_norm,
)
from .model import SPEED_OF_LIGHT_AU, OneBodyOperator

BIN_TOL = 1e-8
SPIN_LABELS = ("x", "y", "z")
COMPONENTS = ("n", "x", "y", "z")
DEFAULT_DELTA = 0.01


class EigenLevels:
    """Eigen data of several sectors with energies binned across sectors."""

    def __init__(self, solutions, tol: float = BIN_TOL):
        if isinstance(solutions, EigenSolution):
            solutions = [solutions]
        if isinstance(solutions, Mapping):
            solutions = list(solutions.values())
        self.solutions = {Sector(*s.sector): s for s in solutions}
        self.tol = tol
        self.sectors = sorted(self.solutions)
        self.offsets = {}
        energies = []
        pos = 0
        for sec in self.sectors:
            self.offsets[sec] = pos
            energies.append(np.asarray(self.solutions[sec].energies, dtype=float))
            pos += self.solutions[sec].k_kept
        self.n_states = pos
        flat = np.concatenate(energies) if energies else np.zeros(0)
        order = np.argsort(flat, kind="stable")
        bin_of_sorted = np.zeros(len(flat), dtype=np.int64)
        if len(flat):
            bin_of_sorted[1:] = np.cumsum(np.diff(flat[order]) >= tol)
        self.bin_index = np.empty(len(flat), dtype=np.int64)
        self.bin_index[order] = bin_of_sorted
        self.n_bins = int(bin_of_sorted[-1]) + 1 if len(flat) else 0
        self.energies = np.array([flat[order][bin_of_sorted == b].min() for b in range(self.n_bins)])
        self.state_energies = flat

    def __contains__(self, sector):
        return Sector(*sector) in self.solutions

    def overlaps(self, state) -> np.ndarray:
        """<lambda|state> for every kept eigenvector (global ordering).

        ``state`` is a FockVector or a dict Sector -> FockVector.  A nonzero
        component in a sector without eigen data raises SectorRequiredError.
        """
        if isinstance(state, FockVector):
            state = as_state(state)
        out = np.zeros(self.n_states, dtype=complex)
        for sec, vec in state.items():
            sol = self.solutions.get(Sector(*sec))
            if sol is None:
                if np.linalg.norm(vec.amps) > 0:
                    raise SectorRequiredError(
                        f"eigenpairs for sector {tuple(sec)} are required but were not supplied"
                    )
                continue
            k = sol.k_kept
            out[self.offsets[sol.sector]:self.offsets[sol.sector] + k] = sol.coeffs.T @ vec.amps
        return out

    def bin_sum(self, per_state: np.ndarray) -> np.ndarray:
        """Sum a per-eigenstate array (last axis) into energy bins."""
        per_state = np.asarray(per_state)
        flat = per_state.reshape(-1, self.n_states)
        out = np.zeros((flat.shape[0], self.n_bins), dtype=flat.dtype)
        for r in range(flat.shape[0]):
            if np.iscomplexobj(flat):
                out[r] = (np.bincount(self.bin_index, flat[r].real, self.n_bins)
                          + 1j * np.bincount(self.bin_index, flat[r].imag, self.n_bins))
            else:
                out[r] = np.bincount(self.bin_index, flat[r], self.n_bins)
        return out.reshape(per_state.shape[:-1] + (self.n_bins,))

    def bin_probabilities(self, state) -> tuple[np.ndarray, float]:
        """(|<lambda|state>|^2 summed per bin, probability outside kept states)."""
        ov = self.overlaps(state)
        probs = self.bin_sum(np.abs(ov) ** 2)
        norm2 = state_norm(as_state(state) if isinstance(state, FockVector) else state) ** 2
        return probs, max(0.0, norm2 - float(probs.sum()))


def as_levels(eig) -> EigenLevels:
    return eig if isinstance(eig, EigenLevels) else EigenLevels(eig)


# ---------------------------------------------------------------------------
# operators acting on the ground state, as dicts Sector -> FockVector

def op_number(p, s):
    return lambda v: as_state(apply_number(p, s, v))


def op_spin(p, j):
    return lambda v: as_state(*apply_spin(p, j, v))


def op_excitation(m1, m2):
    return lambda v: as_state(apply_excitation(m1, m2, v))


def op_charge(p):
    return lambda v: as_state(apply_number(p, ALPHA, v) + apply_number(p, BETA, v))


def op_onebody(mat):
    return lambda v: as_state(apply_onebody(mat, v))


def weights(gs: FockVector, eig, op_left: Callable, op_right: Callable,
            op_left_dagger: Callable | None = None) -> np.ndarray:
    """Per-bin <gs|O|lambda><lambda|O'|gs> for operator callables O, O'.

    ``op_left_dagger`` must apply O^dagger; it defaults to O (Hermitian O).
    """
    levels = as_levels(eig)
    left = levels.overlaps((op_left_dagger or op_left)(gs))
    right = levels.overlaps(op_right(gs))
    return levels.bin_sum(np.conj(left) * right)


def _check_sector(gs, levels):
    if Sector(*gs.sector) not in levels:
        raise DomainError(f"eigen data does not cover the ground-state sector {tuple(gs.sector)}")


def transition_charge(gs, eig, p, s, pp, ss) -> np.ndarray:
    """N_{lambda p s, p' s'} per energy bin."""
    levels = as_levels(eig)
    _check_sector(gs, levels)
    return weights(gs, levels, op_number(p, s), op_number(pp, ss))


def transition_spin(gs, eig, p, j, pp, jj) -> np.ndarray:
    """S_{lambda p j, p' j'} per energy bin."""
    levels = as_levels(eig)
    return weights(gs, levels, op_spin(p, j), op_spin(pp, jj))


def transition_spin_charge(gs, eig, p, j, pp, ss) -> np.ndarray:
    """M_{lambda p j, p' s'} per energy bin."""
    levels = as_levels(eig)
    return weights(gs, levels, op_spin(p, j), op_number(pp, ss))


def transition_generic(gs, eig, m1, m2, m3, m4) -> np.ndarray:
    """B_{lambda m1 m2, m3 m4} = <gs|a+_m1 a_m2|lambda><lambda|a+_m3 a_m4|gs> per bin."""
    levels = as_levels(eig)
    return weights(gs, levels, op_excitation(m1, m2), op_excitation(m3, m4),
                   op_left_dagger=op_excitation(m2, m1))


# ---------------------------------------------------------------------------
# amplitude tables for many operators at once

def amplitude_table(gs: FockVector, levels: EigenLevels, ops) -> tuple[np.ndarray, np.ndarray]:
    """<lambda|O_i|gs> for a list of operator callables, plus ||O_i gs||^2."""
    amps = np.zeros((len(ops), levels.n_states), dtype=complex)
    norms = np.zeros(len(ops))
    for i, op in enumerate(ops):
        st = op(gs)
        amps[i] = levels.overlaps(st)
        norms[i] = state_norm(st) ** 2
    return amps, norms


def pair_weights(levels: EigenLevels, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """W[b, i, j] = sum_{lambda in b} conj(left[i, lambda]) right[j, lambda]."""
    out = np.zeros((levels.n_bins, left.shape[0], right.shape[0]), dtype=complex)
    lc = np.conj(left)
    for start in range(0, levels.n_states, 512):
        sl = slice(start, start + 512)
        prod = lc[:, None, sl] * right[None, :, sl]
        np.add.at(out, levels.bin_index[sl], np.moveaxis(prod, -1, 0))
    return out


@dataclass(frozen=True)
class TransitionSet:
    """Exact per-bin transition matrices of the charge/spin channels.

    N is indexed by spin orbital m = 2p + s, S by 3p + j (j = x, y, z) and
    M[b, 3p + j, 2p' + s'].  ``sink_*`` hold the diagonal probability mass
    outside the kept eigenvectors.
    """

    energies: np.ndarray
    e_gs: float
    N: np.ndarray
    S: np.ndarray
    M: np.ndarray
    sink_N: np.ndarray
    sink_S: np.ndarray
    B: np.ndarray | None = None


def charge_ops(n_orbs):
    return [op_number(m // 2, m % 2) for m in range(2 * n_orbs)]


def spin_ops(n_orbs):
    return [op_spin(p, j) for p in range(n_orbs) for j in SPIN_LABELS]


def transition_set(gs: FockVector, eig, e_gs: float, with_generic=False) -> TransitionSet:
    levels = as_levels(eig)
    n = gs.basis.n_orbs
    an, nn = amplitude_table(gs, levels, charge_ops(n))
    as_, ns = amplitude_table(gs, levels, spin_ops(n))
    N = pair_weights(levels, an, an)
    S = pair_weights(levels, as_, as_)
    M = pair_weights(levels, as_, an)
    sink_n = nn - np.einsum("bii->i", N).real
    sink_s = ns - np.einsum("bii->i", S).real
    B = None
    if with_generic:
        m = 2 * n
        kets = [op_excitation(a, b) for a in range(m) for b in range(m)]
        bras = [op_excitation(b, a) for a in range(m) for b in range(m)]
        ak, _ = amplitude_table(gs, levels, kets)
        ab, _ = amplitude_table(gs, levels, bras)
        B = pair_weights(levels, ab, ak).reshape(levels.n_bins, m, m, m, m)
    return TransitionSet(levels.energies, e_gs, N, S, M, sink_n, sink_s, B)


# ---------------------------------------------------------------------------
# response functions

def lehmann_sum(weights, energies, e_gs, z) -> complex:
    """R(z) = sum_b weights_b / (z - (E_b - E_gs))."""
    weights = np.asarray(weights)
    de = np.asarray(energies, dtype=float) - e_gs
    den = z - de
    if np.imag(z) == 0 and np.any((den == 0) & (weights != 0)):
        raise DomainError(f"z = {z} hits a pole of the Lehmann sum")
    return complex(np.sum(weights / den))


def denominators(omegas, energies, e_gs, delta):
    """1/d_{+} and 1/d_{-} on a frequency grid, shape (n_omega, n_bins)."""
    if delta <= 0:
        raise DomainError("broadening delta must be positive")
    w = np.asarray(omegas, dtype=float)[:, None] + 1j * delta
    de = (np.asarray(energies, dtype=float) - e_gs)[None, :]
    return 1.0 / (w - de), 1.0 / (-w - de)


def chi(w_oo, w_oo_rev, energies, e_gs, omega, delta=DEFAULT_DELTA):
    """chi(omega) = R_{OO'}(omega + i delta) + R_{O'O}(-omega - i delta).

    ``omega`` may be a scalar or an array; trailing axes of the weights (after
    the bin axis) are carried through.
    """
    scalar = np.ndim(omega) == 0
    dp, dm = denominators(np.atleast_1d(omega), energies, e_gs, delta)
    w1 = np.asarray(w_oo)
    w2 = np.asarray(w_oo_rev)
    shape = w1.shape[1:]
    out = dp @ w1.reshape(w1.shape[0], -1) + dm @ w2.reshape(w2.shape[0], -1)
    out = out.reshape((-1,) + shape)
    return out[0] if scalar else out


@dataclass(frozen=True)
class ResponseGrid:
    """chi on a real frequency grid.

    ``values[w, p, a, p', b]`` with component labels ``labels`` (default
    n, x, y, z) on both sides.
    """

    omegas: np.ndarray
    delta: float
    values: np.ndarray
    labels: tuple = COMPONENTS

    def component(self, p, a, pp, b):
        return self.values[:, p, self.labels.index(a), pp, self.labels.index(b)]


def response_ops(n_orbs):
    ops = []
    for p in range(n_orbs):
        ops.append(op_charge(p))
        ops.extend(op_spin(p, j) for j in SPIN_LABELS)
    return ops


def exact_response(gs: FockVector, eig, e_gs: float, omegas, delta=DEFAULT_DELTA) -> ResponseGrid:
    """Reference chi over (n, x, y, z) x orbitals, straight from the Lehmann form."""
    levels = as_levels(eig)
    n = gs.basis.n_orbs
    amps, _ = amplitude_table(gs, levels, response_ops(n))
    w = pair_weights(levels, amps, amps)  # all operators Hermitian
    w_rev = np.conj(w)
    vals = chi(w, w_rev, levels.energies, e_gs, np.asarray(omegas, dtype=float), delta)
    return ResponseGrid(np.asarray(omegas, dtype=float), delta, vals.reshape(len(omegas), n, 4, n, 4))


# ---------------------------------------------------------------------------
# (alpha, beta, x, y) -> (n, x, y, z)

TMP_LABELS = ("a", "b", "x", "y")


def assemble_components(tmp: Mapping) -> np.ndarray:
    """Map chi blocks over (alpha, beta, x, y) onto (n, x, y, z).

    ``tmp[(u, v)]`` holds the (p, p') block for row label u and column label
    v, with labels 'a' (alpha), 'b' (beta), 'x', 'y'; leading axes (such as
    frequency) are allowed.  Returns an array ``[..., p, c, p', c']``.
    """
    def get(u, v):
        try:
            return np.asarray(tmp[(u, v)])
        except KeyError:
            raise AssemblyError(f"block chi_tmp[{u}{v}] is required but missing") from None

    aa, ab, ba, bb = get("a", "a"), get("a", "b"), get("b", "a"), get("b", "b")
    lead = aa.shape[:-2]
    n = aa.shape[-1]
    out = np.zeros(lead + (n, 4, n, 4), dtype=complex)
    N, X, Y, Z = 0, 1, 2, 3
    out[..., :, N, :, N] = aa + ab + ba + bb
    out[..., :, N, :, Z] = (aa - ab + ba - bb) / 2
    out[..., :, Z, :, N] = (aa + ab - ba - bb) / 2
    out[..., :, Z, :, Z] = (aa - ab - ba + bb) / 4
    for j, J in (("x", X), ("y", Y)):
        aj, bj = get("a", j), get("b", j)
        ja, jb = get(j, "a"), get(j, "b")
        out[..., :, N, :, J] = aj + bj
        out[..., :, Z, :, J] = (aj - bj) / 2
        out[..., :, J, :, N] = ja + jb
        out[..., :, J, :, Z] = (ja - jb) / 2
        for jj, JJ in (("x", X), ("y", Y)):
            out[..., :, J, :, JJ] = get(j, jj)
    return out


# ---------------------------------------------------------------------------
# dipole response

def dipole_amplitudes(gs, levels, dipoles):
    """<lambda|d_j|gs> with d_j = -sum_pq,s r^j_pq a+_ps a_qs (electron charge -1)."""
    ops = [op_onebody(-np.asarray(d.mat)) for d in dipoles]
    return amplitude_table(gs, levels, ops)


def polarizability(dipoles, gs: FockVector, eig, e_gs: float, omegas, delta=DEFAULT_DELTA):
    """alpha_{jj'}(omega) = -chi_{d_j d_j'}(omega), shape (n_omega, 3, 3)."""
    dipoles = list(dipoles)
    if len(dipoles) != 3:
        raise DomainError(f"polarizability needs three dipole components, got {len(dipoles)}")
    levels = as_levels(eig)
    amps, _ = dipole_amplitudes(gs, levels, dipoles)
    w = pair_weights(levels, amps, amps)
    return -chi(w, np.conj(w), levels.energies, e_gs, np.asarray(omegas, dtype=float), delta)


def cross_section(alpha, omega):
    """sigma(omega) = (4 pi / c) omega Im Tr alpha(omega).

    ``alpha`` is (3, 3) for scalar omega or (n_omega, 3, 3) for a grid.
    """
    tr = np.trace(np.asarray(alpha), axis1=-2, axis2=-1)
    return 4 * np.pi / SPEED_OF_LIGHT_AU * np.asarray(omega) * tr.imag


def dipole_operators(ops: list[OneBodyOperator], labels=("x", "y", "z")) -> list[OneBodyOperator]:
    """Pick the x, y, z components out of a loaded operator list."""
    by_label = {op.label: op for op in ops}
    missing = [lab for lab in labels if lab not in by_label]
    if missing:
        raise DomainError(f"dipole component(s) {', '.join(missing)} missing")
    return [by_label[lab] for lab in labels]
