"""Shared fixtures and an independent dense Fock-space oracle."""

from functools import reduce

import numpy as np
import pytest

from qresponse.fci import ground_state, solve_all_sectors
from qresponse.lehmann import EigenLevels
from qresponse.model import build_hubbard_dimer
from qresponse.sampling import required_sectors

_I2 = np.eye(2)
_Z = np.diag([1.0, -1.0])
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>


def dense_annihilator(m, n_modes):
    """a_m on 2^n_modes states, bit m of the index = occupation of mode m.

    Built from Kronecker products alone so it shares no code with the package.
    """
    factors = []
    for q in reversed(range(n_modes)):
        factors.append(_Z if q < m else (_LOWER if q == m else _I2))
    return reduce(np.kron, factors)


def dense_hamiltonian(ham):
    """Full Fock-space matrix of a Hamiltonian (spin orbital m = 2p + s)."""
    n = ham.n_orbs
    ns = 2 * n
    a = [dense_annihilator(m, ns) for m in range(ns)]
    ad = [x.T for x in a]
    dim = 2**ns
    H = ham.e_core * np.eye(dim)
    for p in range(n):
        for q in range(n):
            for s in (0, 1):
                H += ham.h[p, q] * ad[2 * p + s] @ a[2 * q + s]
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for t in range(n):
                    v = ham.eri[p, q, r, t]
                    if v == 0:
                        continue
                    for s in (0, 1):
                        for u in (0, 1):
                            H += 0.5 * v * ad[2 * p + s] @ ad[2 * r + u] @ a[2 * t + u] @ a[2 * q + s]
    return H


def sector_mask_indices(n_orbs, na, nb):
    """Fock indices with na alpha (even bits) and nb beta (odd bits) electrons, ascending."""
    out = []
    for i in range(4**n_orbs):
        ca = sum((i >> (2 * p)) & 1 for p in range(n_orbs))
        cb = sum((i >> (2 * p + 1)) & 1 for p in range(n_orbs))
        if (ca, cb) == (na, nb):
            out.append(i)
    return np.array(out)


@pytest.fixture(scope="session")
def dimer():
    ham = build_hubbard_dimer(1.0, 4.0)
    g = ground_state(ham)
    gs = g.solution.vector(0)
    levels = EigenLevels(solve_all_sectors(ham, required_sectors(g.sector, ham.n_orbs), 10**6))
    return ham, g, gs, levels


# acceptance summary ---------------------------------------------------------

ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {msg}")
