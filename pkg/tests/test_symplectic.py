import numpy as np
import pytest
from hypothesis import given
from scipy.linalg import expm

from lpai.symplectic import (J, block, is_symplectic, phase_vector, split, symplectic_inverse,
                             symplectic_product, symplectic_residual, symplectic_sandwich)

from strategies import sym3, vec6


def random_symplectic(rng):
    A = rng.normal(size=(6, 6))
    return expm(J @ (A + A.T) * 0.3)


def test_form_properties():
    assert np.array_equal(J.T, -J)
    assert np.array_equal(J @ J, -np.eye(6))
    assert not J.flags.writeable


def test_phase_vector_and_split():
    xi = phase_vector([1, 2, 3], [4, 5, 6])
    x, p = split(xi)
    assert np.array_equal(x, [1, 2, 3]) and np.array_equal(p, [4, 5, 6])
    assert np.array_equal(block(np.eye(3), 2 * np.eye(3), 3 * np.eye(3), 4 * np.eye(3))[3:, :3],
                          3 * np.eye(3))


@given(vec6(), vec6())
def test_product_antisymmetric(a, b):
    assert symplectic_product(a, b) == pytest.approx(-symplectic_product(b, a), abs=1e-14)
    assert symplectic_product(a, b) == pytest.approx(symplectic_sandwich(a, J, b), abs=1e-14)
    assert symplectic_product(a, a) == 0.0


@given(sym3(), sym3(), sym3())
def test_hamiltonian_flow_is_symplectic(a, b, c):
    S = np.block([[a, b], [b.T, c]])
    M = expm(J @ (S + S.T) / 2)
    assert is_symplectic(M, 1e-10)


def test_inverse_matches_linalg():
    rng = np.random.default_rng(1)
    for _ in range(20):
        S = random_symplectic(rng)
        np.testing.assert_allclose(symplectic_inverse(S), np.linalg.inv(S), atol=1e-9)


def test_inverse_rejects_non_symplectic():
    with pytest.raises(ValueError, match="not symplectic"):
        symplectic_inverse(2 * np.eye(6))
    with pytest.raises(ValueError):
        symplectic_inverse(np.full((6, 6), np.nan))


def test_inverse_accepts_si_scaled_matrices():
    m = 1.4e-25
    T = np.eye(6)
    T[:3, 3:] = np.eye(3) * 0.5 / m  # free flight
    np.testing.assert_allclose(symplectic_inverse(T) @ T, np.eye(6), atol=1e-12)


def test_residual_edge_cases():
    assert symplectic_residual(np.full((6, 6), np.inf)) == float("inf")
    assert not is_symplectic(np.full((6, 6), np.nan))
    with pytest.raises(ValueError):
        symplectic_residual(np.eye(5))
    with pytest.raises(ValueError):
        is_symplectic(np.eye(6), tol=0)
