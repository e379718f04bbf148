"""Sector Hamiltonians, eigensolvers and ground-state search.

The sigma vector H|C> is evaluated with string-excitation matrices in the
alpha-block ordering of creation operators (all alpha creators left of all
beta creators), where alpha and beta excitations act independently.  The
interleaved ordering used by :mod:`fock` differs from it by a per-determinant
sign, applied on the way in and out.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh

from .errors import ConvergenceError, DomainError, ResourceError
from .fock import (
    DeterminantBasis,
    FockVector,
    Sector,
    basis_for,
    enumerate_determinants,
    popcount,
    sector_dimension,
)
from .model import Hamiltonian

DEFAULT_MEMORY_BUDGET = 256 * 2**20  # bytes for an explicit sparse matrix
DENSE_LIMIT = 600
RESIDUAL_TOL = 1e-8
ARPACK_TOL = 1e-12  # relative Ritz-value accuracy
CACHE_VERSION = 1


# ---------------------------------------------------------------------------
# string excitations


def _excitation_matrices(strings: np.ndarray, n_orbs: int) -> list:
    """E_pq = a+_p a_q on a list of occupation strings, as sparse matrices.

    Returned as a flat list indexed p * n_orbs + q.
    """
    lookup = {int(s): i for i, s in enumerate(strings)}
    n_str = len(strings)
    mats = []
    for p in range(n_orbs):
        for q in range(n_orbs):
            rows, cols, vals = [], [], []
            for i, s in enumerate(strings):
                s = int(s)
                if not (s >> q) & 1:
                    continue
                sign = (-1) ** bin(s & ((1 << q) - 1)).count("1")
                t = s ^ (1 << q)
                if (t >> p) & 1:
                    continue
                sign *= (-1) ** bin(t & ((1 << p) - 1)).count("1")
                rows.append(lookup[t | (1 << p)])
                cols.append(i)
                vals.append(sign)
            mats.append(sp.csr_matrix((vals, (rows, cols)), shape=(n_str, n_str)))
    return mats


def block_to_interleaved_phase(basis: DeterminantBasis) -> np.ndarray:
    """Per-determinant sign between the alpha-block and interleaved orderings.

    Equals (-1)^(number of (beta at p, alpha at q) pairs with p < q).
    """
    a, b = basis.dets
    count = np.zeros(len(a), dtype=np.int64)
    for q in range(basis.n_orbs):
        alpha_q = (a >> q) & 1
        count += alpha_q * popcount(b & ((1 << q) - 1))
    return (1 - 2 * (count & 1)).astype(float)


class SectorHamiltonian:
    """Matrix-free H restricted to one (n_alpha, n_beta) sector."""

    def __init__(self, ham: Hamiltonian, basis: DeterminantBasis):
        if basis.n_orbs != ham.n_orbs:
            raise DomainError("basis and Hamiltonian disagree on n_orbs")
        self.ham = ham
        self.basis = basis
        n = ham.n_orbs
        self.n_orbs = n
        self.shape = (basis.size, basis.size)
        self.dtype = np.dtype(float)
        ea = _excitation_matrices(basis.alpha_strings, n)
        eb = _excitation_matrices(basis.beta_strings, n)
        self._ea_stack = sp.vstack(ea).tocsr()  # (n^2 * na, na)
        self._eb_stack = sp.vstack(eb).tocsr()
        self._ea_cat = sp.hstack(ea).tocsr()  # (na, n^2 * na)
        self._eb_cat = sp.hstack(eb).tocsr()
        self._eri2 = np.ascontiguousarray(ham.eri.reshape(n * n, n * n))
        self._k = (ham.h - 0.5 * np.einsum("prrq->pq", ham.eri)).reshape(-1)
        self._phase = block_to_interleaved_phase(basis)

    def _sigma_block(self, c):
        """H c in alpha-block ordering; c has shape (na, nb, batch)."""
        na, nb, nv = c.shape
        n2 = self.n_orbs**2
        if na == 0 or nb == 0:
            return np.zeros_like(c)
        # D[rs] = E_rs c
        d = (self._ea_stack @ c.reshape(na, nb * nv)).reshape(n2, na, nb, nv)
        ct = c.transpose(1, 0, 2).reshape(nb, na * nv)
        d += (self._eb_stack @ ct).reshape(n2, nb, na, nv).transpose(0, 2, 1, 3)
        g = 0.5 * (self._eri2 @ d.reshape(n2, -1)).reshape(n2, na, nb, nv)
        g += self._k[:, None, None, None] * c[None]
        # sigma = sum_pq E_pq g[pq]
        sigma = (self._ea_cat @ g.reshape(n2 * na, nb * nv)).reshape(na, nb, nv)
        gt = g.transpose(0, 2, 1, 3).reshape(n2 * nb, na * nv)
        sigma += (self._eb_cat @ gt).reshape(nb, na, nv).transpose(1, 0, 2)
        return sigma + self.ham.e_core * c

    def matmat(self, x):
        x = np.asarray(x)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[:, None]
        na, nb = self.basis.shape
        y = self._phase[:, None] * x
        if np.iscomplexobj(y):
            re = self._sigma_block(np.ascontiguousarray(y.real).reshape(na, nb, -1))
            im = self._sigma_block(np.ascontiguousarray(y.imag).reshape(na, nb, -1))
            out = (re + 1j * im).reshape(-1, x.shape[1])
        else:
            out = self._sigma_block(y.reshape(na, nb, -1)).reshape(-1, x.shape[1])
        out = self._phase[:, None] * out
        return out[:, 0] if squeeze else out

    def matvec(self, x):
        return self.matmat(x)

    def __matmul__(self, x):
        return self.matmat(x)

    def as_linear_operator(self) -> LinearOperator:
        return LinearOperator(self.shape, matvec=self.matvec, matmat=self.matmat, dtype=float)

    def diagonal(self):
        n = self.basis.size
        out = np.empty(n)
        for start in range(0, n, 256):
            stop = min(n, start + 256)
            cols = np.zeros((n, stop - start))
            cols[np.arange(start, stop), np.arange(stop - start)] = 1.0
            out[start:stop] = self.matmat(cols)[np.arange(start, stop), np.arange(stop - start)]
        return out

    def to_dense(self):
        return self.matmat(np.eye(self.basis.size))


def connectivity_estimate(n_orbs: int, sector) -> int:
    """Upper bound on nonzeros per row of the sector Hamiltonian."""
    n = n_orbs
    a, b = sector
    sa, sb = a * (n - a), b * (n - b)
    da = a * (a - 1) // 2 * ((n - a) * (n - a - 1) // 2)
    db = b * (b - 1) // 2 * ((n - b) * (n - b - 1) // 2)
    return 1 + sa + sb + da + db + sa * sb


def sector_operator(ham: Hamiltonian, sector) -> SectorHamiltonian:
    return SectorHamiltonian(ham, enumerate_determinants(ham.n_orbs, Sector(*sector)))


def build_sector_matrix(ham: Hamiltonian, basis: DeterminantBasis, memory_budget=DEFAULT_MEMORY_BUDGET):
    """Explicit sparse (CSR) sector Hamiltonian, e_core included on the diagonal.

    Raises ResourceError when the estimated storage exceeds ``memory_budget``;
    :func:`sector_operator` is the matrix-free alternative.
    """
    dim = basis.size
    nnz = dim * connectivity_estimate(basis.n_orbs, basis.sector)
    if nnz * 12 > memory_budget:
        raise ResourceError(
            f"explicit matrix for sector {tuple(basis.sector)} needs ~{nnz * 12 / 2**20:.0f} MiB "
            f"(budget {memory_budget / 2**20:.0f} MiB); use the matrix-free sector_operator"
        )
    op = SectorHamiltonian(ham, basis)
    blocks = []
    chunk = max(1, min(dim, 2**22 // max(dim, 1)))
    for start in range(0, dim, chunk):
        stop = min(dim, start + chunk)
        cols = np.zeros((dim, stop - start))
        cols[np.arange(start, stop), np.arange(stop - start)] = 1.0
        block = op.matmat(cols)
        block[np.abs(block) < 1e-14] = 0.0
        blocks.append(sp.csc_matrix(block))
    mat = sp.hstack(blocks).tocsr() if blocks else sp.csr_matrix((dim, dim))
    # remove round-off asymmetry
    return ((mat + mat.T) * 0.5).tocsr()


# ---------------------------------------------------------------------------
# eigensolver


@dataclass(frozen=True, eq=False)
class EigenSolution:
    """Lowest ``k_kept`` eigenpairs of one sector (coefficient columns real)."""

    sector: Sector
    energies: np.ndarray
    coeffs: np.ndarray
    basis: DeterminantBasis | None = None
    dim: int = 0
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def k_kept(self):
        return len(self.energies)

    @property
    def vectors(self):
        if self.basis is None:
            raise DomainError("EigenSolution has no basis attached")
        return [FockVector(self.basis, self.coeffs[:, i]) for i in range(self.k_kept)]

    def vector(self, i) -> FockVector:
        return FockVector(self.basis, self.coeffs[:, i])


def _as_operator(a):
    if isinstance(a, SectorHamiltonian):
        return a, a.basis
    return a, None


def _dense(a, dim):
    if isinstance(a, np.ndarray):
        return a
    if sp.issparse(a):
        return a.toarray()
    return a @ np.eye(dim)


def _fix_signs(vecs):
    # deterministic phase: largest-magnitude component positive
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def solve_eigen(a, k: int, seed: int = 0, basis: DeterminantBasis | None = None,
                sector=None, maxiter=None, dense_limit=DENSE_LIMIT) -> EigenSolution:
    """Lowest ``k`` eigenpairs of a real symmetric operator.

    ``a`` may be a :class:`SectorHamiltonian`, a scipy sparse matrix, a dense
    array or a LinearOperator.  Small problems (or k close to the dimension)
    are solved densely; otherwise implicitly restarted Lanczos (ARPACK) is used
    with a start vector drawn from ``seed``.
    """
    op, op_basis = _as_operator(a)
    basis = basis if basis is not None else op_basis
    dim = a.shape[0]
    if not 1 <= k <= dim:
        raise DomainError(f"k={k} outside [1, {dim}]")
    if sector is None:
        sector = basis.sector if basis is not None else Sector(-1, -1)

    if dim <= dense_limit or k >= dim - 1:
        w, v = np.linalg.eigh(_dense(op, dim))
        w, v = w[:k], v[:, :k]
    else:
        v0 = np.random.default_rng(seed).standard_normal(dim)
        lin = op.as_linear_operator() if isinstance(op, SectorHamiltonian) else op
        try:
            w, v = eigsh(lin, k=k, which="SA", v0=v0, tol=ARPACK_TOL, maxiter=maxiter,
                         ncv=min(dim, max(2 * k + 1, 40)))
        except ArpackNoConvergence as exc:
            res = _residuals(op, exc.eigenvalues, exc.eigenvectors)
            raise ConvergenceError(
                f"Lanczos did not converge for sector {tuple(sector)}: "
                f"{len(exc.eigenvalues)} of {k} pairs, residuals {res}",
                residuals=res,
            ) from None
        order = np.argsort(w)
        w, v = w[order], v[:, order]

    v = _fix_signs(v)
    res = _residuals(op, w, v)
    bad = res > RESIDUAL_TOL * np.maximum(1.0, np.abs(w))
    if np.any(bad):
        raise ConvergenceError(
            f"eigenpair residuals above tolerance for sector {tuple(sector)}: {res[bad]}",
            residuals=res,
        )
    return EigenSolution(Sector(*sector), w, v, basis, dim, res)


def _residuals(op, w, v):
    if v is None or len(w) == 0:
        return np.zeros(0)
    av = op @ v
    return np.linalg.norm(av - v * w[None, :], axis=0)


def solve_sector(ham: Hamiltonian, sector, k: int, seed: int = 0, **kw) -> EigenSolution:
    """Convenience wrapper: build the matrix-free operator and solve."""
    op = sector_operator(ham, sector)
    return solve_eigen(op, min(k, op.shape[0]), seed=seed, **kw)


# ---------------------------------------------------------------------------
# ground state


class GroundState(NamedTuple):
    sector: Sector
    index: int
    energy: float
    degenerate: bool
    solution: EigenSolution
    gap: float


def spin_sectors(n_orbs: int, n_electrons: int) -> list[Sector]:
    """All sectors with n_alpha + n_beta = N, ordered by |2 Ms| then n_alpha descending."""
    out = []
    for na in range(n_electrons + 1):
        nb = n_electrons - na
        if na <= n_orbs and nb <= n_orbs:
            out.append(Sector(na, nb))
    return sorted(out, key=lambda s: (abs(s.ms2), -s.n_alpha))


def ground_state(ham: Hamiltonian, seed: int = 0, degeneracy_tol=1e-8, cache=None) -> GroundState:
    """Global ground state over all sectors of fixed N.

    H is spin-free, so the lowest energy of a sector can only rise with |Ms|
    (every multiplet reaching |Ms| also has components at smaller |Ms|).  The
    minimum therefore sits in the smallest-|Ms| sector, and the runner-up is
    either that sector's second level or the lowest level one |Ms| step up;
    mirrored sectors (Ms <-> -Ms) have identical spectra.
    """
    sectors = spin_sectors(ham.n_orbs, ham.n_electrons)
    first = sectors[0]
    dim0 = sector_dimension(ham.n_orbs, first)
    sol = _cached_solve(ham, first, min(2, dim0), seed, cache)
    e0 = float(sol.energies[0])
    candidates = [float(sol.energies[1])] if sol.k_kept > 1 else []
    if first.ms2 != 0:
        candidates.append(e0)  # mirrored sector (Kramers partner)
    else:
        nxt = [s for s in sectors if abs(s.ms2) == 2]
        if nxt:
            up = _cached_solve(ham, nxt[0], 1, seed, cache)
            candidates.append(float(up.energies[0]))
    gap = (min(candidates) - e0) if candidates else np.inf
    return GroundState(first, 0, e0, bool(gap < degeneracy_tol), sol, float(gap))


def _cached_solve(ham, sector, k, seed, cache):
    if cache is not None:
        hit = cache.get(ham, sector, k)
        if hit is not None:
            return hit
    sol = solve_sector(ham, sector, k, seed=seed)
    if cache is not None:
        cache.put(ham, sol)
    return sol


def solve_all_sectors(ham: Hamiltonian, sectors, k: int, seed: int = 0, cache=None) -> dict:
    """EigenSolution per requested sector (k clipped to each dimension)."""
    out = {}
    for s in sectors:
        s = Sector(*s)
        if not (0 <= s.n_alpha <= ham.n_orbs and 0 <= s.n_beta <= ham.n_orbs):
            continue
        out[s] = _cached_solve(ham, s, min(k, sector_dimension(ham.n_orbs, s)), seed, cache)
    return out


# ---------------------------------------------------------------------------
# optional on-disk cache


class EigenCache:
    """npz files keyed by Hamiltonian content hash, sector and k."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, ham, sector, k):
        key = f"{ham.content_hash()}-{sector[0]}-{sector[1]}-{k}"
        return self.directory / (hashlib.sha256(key.encode()).hexdigest()[:24] + ".npz")

    def get(self, ham, sector, k):
        path = self._path(ham, sector, k)
        if not path.exists():
            return None
        with np.load(path) as data:
            header = json.loads(str(data["header"]))
            if header.get("version") != CACHE_VERSION or header.get("hash") != ham.content_hash():
                return None
            sector = Sector(*header["sector"])
            return EigenSolution(sector, data["energies"], data["coeffs"],
                                 basis_for(ham.n_orbs, sector), header["dim"], data["residuals"])

    def put(self, ham, sol: EigenSolution):
        header = {"version": CACHE_VERSION, "hash": ham.content_hash(),
                  "sector": list(sol.sector), "k": sol.k_kept, "dim": sol.dim}
        np.savez(self._path(ham, sol.sector, sol.k_kept), header=json.dumps(header, sort_keys=True),
                 energies=sol.energies, coeffs=sol.coeffs, residuals=sol.residuals)
