import numpy as np
import pytest

from conftest import dense_hamiltonian, sector_mask_indices
from qresponse.errors import ConvergenceError, DomainError, ResourceError
from qresponse.fci import (
    EigenCache,
    build_sector_matrix,
    ground_state,
    sector_operator,
    solve_all_sectors,
    solve_eigen,
    solve_sector,
)
from qresponse.fock import basis_for
from qresponse.model import build_hubbard_dimer, random_hamiltonian


@pytest.mark.parametrize("sector", [(2, 2), (3, 1), (1, 2), (0, 3)])
def test_sector_matrix_matches_kronecker_oracle(sector):
    ham = random_hamiltonian(4, sum(sector), np.random.default_rng(7))
    op = sector_operator(ham, sector)
    dense = dense_hamiltonian(ham)
    basis = basis_for(4, sector)
    idx = basis.jw_indices()
    assert np.allclose(op.to_dense(), dense[np.ix_(idx, idx)], atol=1e-12)
    # the sector block is closed under H
    others = np.setdiff1d(np.arange(dense.shape[0]), sector_mask_indices(4, *sector))
    assert np.abs(dense[np.ix_(others, idx)]).max() < 1e-12


def test_sparse_matrix_equals_matrix_free():
    ham = random_hamiltonian(4, 4, np.random.default_rng(1))
    basis = basis_for(4, (2, 2))
    mat = build_sector_matrix(ham, basis)
    assert np.allclose(mat.toarray(), sector_operator(ham, (2, 2)).to_dense(), atol=1e-12)
    with pytest.raises(ResourceError):
        build_sector_matrix(ham, basis, memory_budget=10)


def test_dimer_analytic():
    for t, U in [(1.0, 4.0), (0.5, 1.0), (2.0, 0.0)]:
        g = ground_state(build_hubbard_dimer(t, U))
        assert g.energy == pytest.approx((U - np.sqrt(U**2 + 16 * t**2)) / 2, abs=1e-12)
        assert not g.degenerate


def test_dimer_spectrum():
    sol = solve_sector(build_hubbard_dimer(1, 4), (1, 1), 4)
    assert np.allclose(sol.energies, [2 - np.sqrt(8), 0, 4, 2 + np.sqrt(8)], atol=1e-12)


def test_degenerate_dimer_is_flagged():
    assert ground_state(build_hubbard_dimer(0.0, 4.0)).degenerate


def test_lanczos_agrees_with_dense():
    ham = random_hamiltonian(6, 6, np.random.default_rng(4))
    op = sector_operator(ham, (3, 3))
    lan = solve_eigen(op, 3, seed=1, dense_limit=0)
    den = solve_eigen(op, 3)
    assert np.allclose(lan.energies, den.energies, atol=1e-9)
    assert np.allclose(np.abs(lan.coeffs.T @ den.coeffs), np.eye(3), atol=1e-6)
    assert np.all(lan.residuals < 1e-8)


def test_nonconvergence_reports_residuals():
    op = sector_operator(random_hamiltonian(6, 6, np.random.default_rng(4)), (3, 3))
    with pytest.raises(ConvergenceError) as err:
        solve_eigen(op, 3, dense_limit=0, maxiter=1)
    assert err.value.residuals is not None


def test_bad_k():
    with pytest.raises(DomainError):
        solve_eigen(np.eye(3), 5)


def test_eigen_cache(tmp_path):
    ham = build_hubbard_dimer(1, 4)
    cache = EigenCache(tmp_path)
    a = solve_all_sectors(ham, [(1, 1)], 4, cache=cache)
    b = cache.get(ham, (1, 1), 4)
    assert np.array_equal(a[(1, 1)].coeffs, b.coeffs)
    assert cache.get(build_hubbard_dimer(1, 3), (1, 1), 4) is None
