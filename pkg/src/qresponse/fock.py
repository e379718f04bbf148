"""Slater-determinant bases and fermionic operators with exact signs.

Spin orbitals are indexed m = 2p + s (s = 0 for alpha, 1 for beta).  A
determinant is stored as a pair of spatial occupation masks; its interleaved
spin-orbital mask (bit m set when m is occupied) doubles as the Jordan-Wigner
computational-basis index.  The determinant itself is the ordered product
a+_{m1} a+_{m2} ... |vac> with m1 < m2 < ..., so acting with a ladder operator
on m picks up (-1)^(number of occupied spin orbitals below m).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb
from typing import NamedTuple

import numpy as np

from .errors import DomainError

ALPHA, BETA = 0, 1


class Sector(NamedTuple):
    n_alpha: int
    n_beta: int

    @property
    def n_electrons(self):
        return self.n_alpha + self.n_beta

    @property
    def ms2(self):
        return self.n_alpha - self.n_beta


def spin_orbital(p: int, s: int) -> int:
    return 2 * p + s


def popcount(x):
    return np.bitwise_count(np.asarray(x, dtype=np.int64)).astype(np.int64)


def string_masks(n_orbs: int, n_occ: int) -> np.ndarray:
    """All n_orbs-bit masks with n_occ bits set, ascending."""
    masks = [sum(1 << i for i in occ) for occ in combinations(range(n_orbs), n_occ)]
    return np.array(sorted(masks), dtype=np.int64)


def interleave(alpha, beta, n_orbs: int):
    """Spatial alpha/beta masks -> interleaved spin-orbital mask (vectorized)."""
    alpha = np.asarray(alpha, dtype=np.int64)
    beta = np.asarray(beta, dtype=np.int64)
    out = np.zeros(np.broadcast(alpha, beta).shape, dtype=np.int64)
    for p in range(n_orbs):
        out |= ((alpha >> p) & 1) << (2 * p)
        out |= ((beta >> p) & 1) << (2 * p + 1)
    return out


def deinterleave(mask, n_orbs: int):
    mask = np.asarray(mask, dtype=np.int64)
    alpha = np.zeros_like(mask)
    beta = np.zeros_like(mask)
    for p in range(n_orbs):
        alpha |= ((mask >> (2 * p)) & 1) << p
        beta |= ((mask >> (2 * p + 1)) & 1) << p
    return alpha, beta


class DeterminantBasis:
    """Determinants of one (n_alpha, n_beta) sector.

    Ordering is lexicographic on (alpha mask, beta mask), so determinant
    ``i * n_beta_strings + j`` has alpha string ``alpha_strings[i]`` and beta
    string ``beta_strings[j]``.  A basis with ``valid=False`` is the empty
    sentinel used when an operator leaves the representable sectors.
    """

    def __init__(self, n_orbs: int, sector: Sector, valid: bool = True):
        self.n_orbs = n_orbs
        self.sector = Sector(*sector)
        self.valid = valid
        if valid:
            self.alpha_strings = string_masks(n_orbs, sector[0])
            self.beta_strings = string_masks(n_orbs, sector[1])
        else:
            self.alpha_strings = np.zeros(0, dtype=np.int64)
            self.beta_strings = np.zeros(0, dtype=np.int64)
        self.alpha_strings.setflags(write=False)
        self.beta_strings.setflags(write=False)

    @property
    def shape(self):
        return (len(self.alpha_strings), len(self.beta_strings))

    @property
    def size(self):
        return len(self.alpha_strings) * len(self.beta_strings)

    def __len__(self):
        return self.size

    def __repr__(self):
        tag = "" if self.valid else ", empty"
        return f"DeterminantBasis(n_orbs={self.n_orbs}, sector={tuple(self.sector)}{tag})"

    @property
    def dets(self):
        """(alpha_mask, beta_mask) arrays over all determinants, in order."""
        a = np.repeat(self.alpha_strings, len(self.beta_strings))
        b = np.tile(self.beta_strings, len(self.alpha_strings))
        return a, b

    def alpha_index(self, masks):
        masks = np.asarray(masks, dtype=np.int64)
        pos = np.searchsorted(self.alpha_strings, masks)
        pos = np.minimum(pos, len(self.alpha_strings) - 1)
        return np.where(self.alpha_strings[pos] == masks, pos, -1)

    def beta_index(self, masks):
        masks = np.asarray(masks, dtype=np.int64)
        pos = np.searchsorted(self.beta_strings, masks)
        pos = np.minimum(pos, len(self.beta_strings) - 1)
        return np.where(self.beta_strings[pos] == masks, pos, -1)

    def index(self, alpha, beta):
        """Position of determinant(s) (alpha, beta); -1 where absent."""
        ia = self.alpha_index(alpha)
        ib = self.beta_index(beta)
        return np.where((ia >= 0) & (ib >= 0), ia * len(self.beta_strings) + ib, -1)

    def jw_indices(self):
        """Computational-basis index of every determinant under Jordan-Wigner."""
        a, b = self.dets
        return interleave(a, b, self.n_orbs)


@lru_cache(maxsize=64)
def enumerate_determinants(n_orbs: int, sector) -> DeterminantBasis:
    n_alpha, n_beta = sector
    if not (0 <= n_alpha <= n_orbs and 0 <= n_beta <= n_orbs):
        raise DomainError(f"sector {tuple(sector)} out of range for {n_orbs} orbitals")
    return DeterminantBasis(n_orbs, Sector(n_alpha, n_beta))


def sector_dimension(n_orbs: int, sector) -> int:
    return comb(n_orbs, sector[0]) * comb(n_orbs, sector[1])


def empty_basis(n_orbs: int, sector) -> DeterminantBasis:
    return DeterminantBasis(n_orbs, Sector(*sector), valid=False)


def basis_for(n_orbs: int, sector) -> DeterminantBasis:
    """Basis of ``sector``, or the empty sentinel when the sector cannot exist."""
    if 0 <= sector[0] <= n_orbs and 0 <= sector[1] <= n_orbs:
        return enumerate_determinants(n_orbs, Sector(*sector))
    return empty_basis(n_orbs, sector)


class FockVector:
    """Complex amplitudes over one sector's determinant basis."""

    __slots__ = ("basis", "amps")

    def __init__(self, basis: DeterminantBasis, amps=None):
        self.basis = basis
        if amps is None:
            amps = np.zeros(basis.size, dtype=complex)
        amps = np.asarray(amps, dtype=complex).reshape(-1)
        if amps.shape[0] != basis.size:
            raise DomainError(f"{amps.shape[0]} amplitudes for basis of size {basis.size}")
        self.amps = amps

    @classmethod
    def determinant(cls, basis, alpha, beta):
        idx = int(basis.index(alpha, beta))
        if idx < 0:
            raise DomainError("determinant not in basis")
        v = cls(basis)
        v.amps[idx] = 1.0
        return v

    @classmethod
    def random(cls, basis, rng):
        z = rng.normal(size=basis.size) + 1j * rng.normal(size=basis.size)
        return cls(basis, z / np.linalg.norm(z))

    @property
    def sector(self):
        return self.basis.sector

    def norm(self):
        return float(np.linalg.norm(self.amps))

    def vdot(self, other: "FockVector") -> complex:
        if other.sector != self.sector:
            return 0j
        return complex(np.vdot(self.amps, other.amps))

    def copy(self):
        return FockVector(self.basis, self.amps.copy())

    def _check(self, other):
        if other.sector != self.sector or other.basis.n_orbs != self.basis.n_orbs:
            raise DomainError(f"sector mismatch: {self.sector} vs {other.sector}")

    def __add__(self, other):
        if not self.basis.valid:
            return other.copy()
        if not other.basis.valid:
            return self.copy()
        self._check(other)
        return FockVector(self.basis, self.amps + other.amps)

    def __sub__(self, other):
        return self + (-1) * other

    def __mul__(self, scalar):
        return FockVector(self.basis, self.amps * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return FockVector(self.basis, self.amps / scalar)

    def __repr__(self):
        return f"FockVector(sector={tuple(self.sector)}, norm={self.norm():.6g})"


def zero_like(v: FockVector) -> FockVector:
    return FockVector(v.basis)


# ---------------------------------------------------------------------------
# ladder operators


def _below(masks, p):
    return popcount(masks & ((1 << p) - 1))


def apply_ladder(m: int, kind: str, v: FockVector) -> FockVector:
    """a+_m v (``kind='create'``) or a_m v (``kind='annihilate'``).

    The result lives in the neighbouring sector; if that sector does not exist
    the zero vector over an empty sentinel basis is returned.
    """
    if kind not in ("create", "annihilate"):
        raise DomainError(f"unknown ladder kind {kind!r}")
    basis = v.basis
    n = basis.n_orbs
    p, s = divmod(m, 2)
    if not 0 <= p < n:
        raise DomainError(f"spin orbital {m} outside register of {2 * n}")
    step = 1 if kind == "create" else -1
    na, nb = basis.sector
    target = Sector(na + step, nb) if s == ALPHA else Sector(na, nb + step)
    out_basis = basis_for(n, target)
    out = FockVector(out_basis)
    if not basis.valid or not out_basis.valid:
        return out

    bit = 1 << p
    amps = v.amps.reshape(basis.shape)
    res = out.amps.reshape(out_basis.shape)
    alpha, beta = basis.alpha_strings, basis.beta_strings
    # occupied spin orbitals below m: alpha and beta of orbitals < p, plus alpha_p for beta
    sign_b = 1 - 2 * (_below(beta, p) & 1)
    sign_a = 1 - 2 * (_below(alpha, p) & 1)
    if s == ALPHA:
        ok = (alpha & bit) == 0 if step == 1 else (alpha & bit) != 0
        src = np.nonzero(ok)[0]
        dst = out_basis.alpha_index(alpha[src] ^ bit)
        res[dst, :] = (sign_a[src, None] * sign_b[None, :]) * amps[src, :]
    else:
        sign_a = 1 - 2 * (popcount(alpha & ((bit << 1) - 1)) & 1)
        ok = (beta & bit) == 0 if step == 1 else (beta & bit) != 0
        src = np.nonzero(ok)[0]
        dst = out_basis.beta_index(beta[src] ^ bit)
        res[:, dst] = (sign_a[:, None] * sign_b[None, src]) * amps[:, src]
    return out


def create(m, v):
    return apply_ladder(m, "create", v)


def annihilate(m, v):
    return apply_ladder(m, "annihilate", v)


def occupancy(basis: DeterminantBasis, p: int, s: int) -> np.ndarray:
    """0/1 occupation of spin orbital (p, s) for every determinant."""
    strings = basis.alpha_strings if s == ALPHA else basis.beta_strings
    occ = (strings >> p) & 1
    if s == ALPHA:
        return np.repeat(occ, len(basis.beta_strings)).astype(float)
    return np.tile(occ, len(basis.alpha_strings)).astype(float)


def apply_number(p: int, s: int, v: FockVector) -> FockVector:
    """n_{p s} v."""
    if not v.basis.valid:
        return v.copy()
    return FockVector(v.basis, occupancy(v.basis, p, s) * v.amps)


def apply_hole(p: int, s: int, v: FockVector) -> FockVector:
    """(1 - n_{p s}) v."""
    if not v.basis.valid:
        return v.copy()
    return FockVector(v.basis, (1.0 - occupancy(v.basis, p, s)) * v.amps)


def apply_excitation(m1: int, m2: int, v: FockVector) -> FockVector:
    """a+_{m1} a_{m2} v."""
    if m1 == m2:
        return apply_number(m1 // 2, m1 % 2, v)
    return apply_ladder(m1, "create", apply_ladder(m2, "annihilate", v))


def apply_spin(p: int, j: str, v: FockVector) -> tuple[FockVector, FockVector]:
    """s_{pj} v as a pair of sector-tagged parts.

    For j = 'x' or 'y' the pair is (part in (na+1, nb-1), part in (na-1, nb+1)),
    i.e. the a+_{p alpha} a_{p beta} and a+_{p beta} a_{p alpha} pieces with their
    coefficients.  For j = 'z' the first entry is the result and the second the
    zero vector over an empty sentinel basis.
    """
    ma, mb = spin_orbital(p, ALPHA), spin_orbital(p, BETA)
    if j == "z":
        na = apply_number(p, ALPHA, v)
        nb = apply_number(p, BETA, v)
        return FockVector(v.basis, (na.amps - nb.amps) / 2), empty_vector(v.basis.n_orbs)
    raise_ = apply_excitation(ma, mb, v)
    lower = apply_excitation(mb, ma, v)
    if j == "x":
        return raise_ * 0.5, lower * 0.5
    if j == "y":
        return raise_ * (-0.5j), lower * 0.5j
    raise DomainError(f"unknown spin component {j!r}")


def empty_vector(n_orbs: int) -> FockVector:
    return FockVector(empty_basis(n_orbs, Sector(-1, -1)))


# ---------------------------------------------------------------------------
# multi-sector states: dict Sector -> FockVector


def as_state(*parts: FockVector) -> dict:
    """Collect sector-tagged parts into a dict, summing parts of equal sector."""
    out: dict = {}
    for part in parts:
        if not part.basis.valid or part.basis.size == 0:
            continue
        key = part.sector
        out[key] = out[key] + part if key in out else part.copy()
    return out


def state_norm(state: dict) -> float:
    return float(np.sqrt(sum(np.vdot(v.amps, v.amps).real for v in state.values())))


def state_vdot(a: dict, b: dict) -> complex:
    return complex(sum(np.vdot(v.amps, b[k].amps) for k, v in a.items() if k in b))


def state_add(a: dict, b: dict, cb=1.0) -> dict:
    return as_state(*a.values(), *(cb * v for v in b.values()))


def state_scale(a: dict, c) -> dict:
    return {k: v * c for k, v in a.items()}


def apply_onebody(mat: np.ndarray, v: FockVector) -> FockVector:
    """sum_{pq,s} mat[p, q] a+_{p s} a_{q s} v for a spin-diagonal spatial operator."""
    out = FockVector(v.basis)
    n = v.basis.n_orbs
    for p in range(n):
        for q in range(n):
            c = mat[p, q]
            if c == 0.0:
                continue
            for s in (ALPHA, BETA):
                out.amps += c * apply_excitation(2 * p + s, 2 * q + s, v).amps
    return out
