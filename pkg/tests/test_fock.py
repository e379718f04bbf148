import time
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense_annihilator
from qresponse.errors import DomainError
from qresponse.fock import (
    FockVector,
    Sector,
    apply_excitation,
    apply_ladder,
    apply_spin,
    basis_for,
    deinterleave,
    enumerate_determinants,
    interleave,
    sector_dimension,
)


def test_dimensions_and_speed():
    t = time.perf_counter()
    assert enumerate_determinants(10, (6, 6)).size == 44100
    assert enumerate_determinants(10, (7, 7)).size == 14400
    assert time.perf_counter() - t < 1.0


@pytest.mark.parametrize("n,na,nb", [(3, 1, 2), (4, 2, 2), (5, 0, 3)])
def test_dimension_is_binomial_product(n, na, nb):
    assert sector_dimension(n, (na, nb)) == comb(n, na) * comb(n, nb) == enumerate_determinants(n, (na, nb)).size


def test_invalid_sector():
    with pytest.raises(DomainError):
        enumerate_determinants(3, (4, 0))


def test_interleave_roundtrip():
    a, b = np.arange(16), np.arange(16)[::-1]
    m = interleave(a, b, 4)
    ra, rb = deinterleave(m, 4)
    assert np.array_equal(ra, a) and np.array_equal(rb, b)


def _to_dense(v, n):
    out = np.zeros(4**n, dtype=complex)
    out[v.basis.jw_indices()] = v.amps
    return out


@pytest.mark.parametrize("sector", [(1, 1), (2, 1), (0, 2), (2, 2)])
def test_ladder_matches_kronecker_oracle(sector):
    n = 3
    rng = np.random.default_rng(1)
    v = FockVector.random(basis_for(n, sector), rng)
    for m in range(2 * n):
        a = dense_annihilator(m, 2 * n)
        for kind, mat in (("annihilate", a), ("create", a.T)):
            got = apply_ladder(m, kind, v)
            want = mat @ _to_dense(v, n)
            dense_got = _to_dense(got, n) if got.basis.valid else np.zeros(4**n)
            assert np.allclose(dense_got, want, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(m1=st.integers(0, 5), m2=st.integers(0, 5), seed=st.integers(0, 10**6))
def test_anticommutator(m1, m2, seed):
    # {a_m1, a+_m2} v = delta v
    n = 3
    v = FockVector.random(basis_for(n, (1, 2)), np.random.default_rng(seed))
    x = apply_ladder(m1, "annihilate", apply_ladder(m2, "create", v))
    y = apply_ladder(m2, "create", apply_ladder(m1, "annihilate", v))
    total = np.zeros(4**n, dtype=complex)
    for part in (x, y):
        if part.basis.valid:
            total += _to_dense(part, n)
    assert np.allclose(total, (m1 == m2) * _to_dense(v, n), atol=1e-13)


def test_spin_operators_hermitian_combination():
    n = 2
    v = FockVector.random(basis_for(n, (1, 1)), np.random.default_rng(3))
    up, down = apply_spin(0, "x", v)
    assert up.sector == Sector(2, 0) and down.sector == Sector(0, 2)
    # s_x = (s+ + s-)/2 with s+ = a+_a a_b
    assert np.allclose(up.amps, 0.5 * apply_excitation(0, 1, v).amps)
    z, empty = apply_spin(1, "z", v)
    assert not empty.basis.valid and z.sector == v.sector


def test_vector_arithmetic():
    b = basis_for(2, (1, 1))
    v = FockVector.determinant(b, 0b01, 0b10)
    assert v.norm() == 1.0
    assert (v * 2 - v).norm() == 1.0
    with pytest.raises(DomainError):
        v + FockVector(basis_for(2, (2, 0)))
