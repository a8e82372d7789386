import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from lpai.constants import GM_EARTH
from lpai.frames import FrameSpec, GravityModel, comoving_coefficients, inertial_coefficients
from lpai.propagation import (MAX_ORDER, PropagationMethod, evolve_constant, evolve_perturbative,
                              general_solution, make_propagator, mass_normalized, ode_oracle,
                              particular_drift)
from lpai.symplectic import J

from strategies import sym3

M = 1.443e-25


def H_const(gamma, m=M):
    H = np.zeros((6, 6))
    H[:3, :3] = m * np.asarray(gamma)
    H[3:, 3:] = np.eye(3) / m
    return H


@given(sym3(1e-2), st.floats(-20.0, 20.0))
def test_evolve_constant_matches_expm(gamma, dt):
    """Spectral closed form against the generic matrix exponential (unit mass)."""
    T = np.asarray(evolve_constant(gamma, 1.0, dt))
    np.testing.assert_allclose(T, expm(J @ H_const(gamma, 1.0) * dt), atol=1e-10, rtol=1e-10)


@given(sym3(1e-5), st.floats(0.01, 10.0))
def test_evolve_constant_symplectic_and_group(gamma, dt):
    E = evolve_constant(gamma, M, dt)
    assert E.is_symplectic(1e-10)
    a = mass_normalized(np.asarray(evolve_constant(gamma, M, 0.3 * dt)), M)
    b = mass_normalized(np.asarray(evolve_constant(gamma, M, 0.7 * dt)), M)
    np.testing.assert_allclose(a @ b, E.normalized(), atol=1e-12)
    back = mass_normalized(np.asarray(evolve_constant(gamma, M, -dt)), M)
    np.testing.assert_allclose(back @ E.normalized(), np.eye(6), atol=1e-12)


def test_free_particle_exact():
    E = np.asarray(evolve_constant(np.zeros((3, 3)), M, 2.0))
    np.testing.assert_array_equal(E[:3, :3], np.eye(3))
    np.testing.assert_allclose(E[:3, 3:], 2.0 * np.eye(3) / M, rtol=1e-15)
    assert not E[3:, :3].any()


def test_unstable_direction():
    """Negative eigenvalues give hyperbolic functions."""
    E = np.asarray(evolve_constant(np.diag([-1.0, 0.0, 4.0]), 1.0, 0.5))
    assert E[0, 0] == pytest.approx(np.cosh(0.5))
    assert E[2, 2] == pytest.approx(np.cos(1.0))
    assert E[0, 3] == pytest.approx(np.sinh(0.5))


def test_evolve_constant_rejects_asymmetric():
    with pytest.raises(ValueError):
        evolve_constant(np.array([[0, 1e-6, 0], [0, 0, 0], [0, 0, 0]]), M, 1.0)


def test_method_parsing():
    for text in ("exact", "perturbative:3", "oracle:0.001"):
        assert str(PropagationMethod.parse(text)) == text
    assert PropagationMethod.parse("perturbative").order == 2
    for bad in ("exact:1", "rk45", "oracle:-1", f"perturbative:{MAX_ORDER + 1}", "perturbative:-1"):
        with pytest.raises(ValueError):
            PropagationMethod.parse(bad)


def test_perturbative_orders_converge():
    """Truncation error falls by ~(Gamma T^2) per order (unit mass)."""
    gamma = np.diag([0.3, 0.2, -0.5])
    H0 = H_const(np.zeros((3, 3)), 1.0)
    HI = lambda t: np.broadcast_to(H_const(gamma, 1.0) - H0, np.shape(t) + (6, 6))
    exact = np.asarray(evolve_constant(gamma, 1.0, 1.0))
    errs = [np.abs(np.asarray(evolve_perturbative(H0, HI, k, 1.0, 0.0)) - exact).max()
            for k in range(MAX_ORDER + 1)]
    assert all(b < 0.3 * a for a, b in zip(errs, errs[1:]))
    assert errs[MAX_ORDER] < 1e-3
    _, terms = evolve_perturbative(H0, HI, 2, 1.0, 0.0, return_terms=True)
    assert len(terms) == 3
    np.testing.assert_allclose(terms[0], expm(J @ H0))


def test_perturbative_rejects_nonfinite():
    H0 = H_const(np.zeros((3, 3)), 1.0)
    with pytest.raises(ValueError):
        evolve_perturbative(H0, lambda t: np.full(np.shape(t) + (6, 6), np.nan), 1, 1.0, 0.0)


def test_oracle_fourth_order():
    gamma = np.diag([1.0, 2.0, -0.5])
    H = lambda t: np.broadcast_to(H_const(gamma, 1.0), np.shape(t) + (6, 6))
    exact = np.asarray(evolve_constant(gamma, 1.0, 1.0))
    e = [np.abs(np.asarray(ode_oracle(H, 1.0, 0.0, h)) - exact).max() for h in (0.1, 0.05)]
    assert 13 < e[0] / e[1] < 19
    with pytest.raises(ValueError):
        ode_oracle(H, 1.0, 0.0, 0.0)


def test_drift_free_fall():
    g = np.array([0.0, 0.0, -9.81])
    c = inertial_coefficients(np.zeros((3, 3)), g, M)
    for method in ("exact", "perturbative:1", "oracle:1e-2"):
        P = make_propagator(c, method)
        xi = P.solution(0.7, 0.2, np.concatenate([[0, 0, 1.0], M * np.array([0, 1.0, 0])]))
        np.testing.assert_allclose(xi[:3], [0, 0.5, 1.0 - 0.5 * 9.81 * 0.25], rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(xi[3:] / M, [0, 1.0, -9.81 * 0.5], rtol=1e-12, atol=1e-14)


def test_particular_drift_quadrature():
    gamma = np.diag([1e-6, 1e-6, -2e-6])
    g = np.array([0.1, 0.0, -9.81])
    c = inertial_coefficients(gamma, g, M)
    P = make_propagator(c, "exact")
    d = particular_drift(lambda t, t0: evolve_constant(gamma, M, t - t0), c.G, 1.3, 0.0)
    np.testing.assert_allclose(d, P.drift(1.3, 0.0), rtol=1e-12)
    xi0 = np.array([1e-3, 0, 0, 0, M * 1e-2, 0])
    np.testing.assert_allclose(general_solution(P.matrix(1.3, 0.0), d, xi0),
                               P.solution(1.3, 0.0, xi0), rtol=1e-12)


@pytest.mark.parametrize("method", ["perturbative:3", "oracle:1e-3"])
def test_methods_agree_on_orbit(method):
    """Circular orbit in central gravity: all solvers agree on the phase integral."""
    model = GravityModel("central", gm=GM_EARTH)
    w = np.array([0.0, 0.0, 1.13e-3])
    fr = FrameSpec("circular", rho0=[6.771e6, 0, 0], orbit_rate=w, laser_rotation=w)
    c = comoving_coefficients(model, fr, M)
    ref = make_propagator(c, "exact")
    other = make_propagator(c, method)
    chibar = np.concatenate([np.zeros(3), 1.0545718e-34 * np.array([1.6e7, 0, 0])])
    np.testing.assert_allclose(other.matrix(0.0, 1.0) @ chibar, ref.matrix(0.0, 1.0) @ chibar,
                               rtol=1e-9, atol=1e-22)
    assert other.phase_integral(chibar, 1.0, 0.0) == pytest.approx(
        ref.phase_integral(chibar, 1.0, 0.0), rel=1e-9, abs=1e-9)


def test_exact_unavailable_for_general_trajectories():
    model = GravityModel("central", gm=GM_EARTH)
    fr = FrameSpec("polynomial", rho0=[6.771e6, 0, 0], velocity=[0, 7e3, 0])
    c = comoving_coefficients(model, fr, M)
    with pytest.raises(ValueError, match="closed-form"):
        make_propagator(c, "exact")
    make_propagator(c, "perturbative:2")


def test_first_order_blocks_constant_gradient():
    """Order-1 correction for constant Gamma: (-dt^2 G/2, -dt^3 G/6m, -m dt G, -dt^2 G/2)."""
    gamma = np.diag([1.0, -3.0, 2.0]) * 1e-6
    dt = 0.8
    H0 = H_const(np.zeros((3, 3)))
    HI = lambda t: np.broadcast_to(H_const(gamma) - H0, np.shape(t) + (6, 6))
    _, terms = evolve_perturbative(H0, HI, 1, dt, 0.0, m=M, return_terms=True)
    T1 = terms[1]
    np.testing.assert_allclose(T1[:3, :3], -dt ** 2 * gamma / 2, rtol=1e-12, atol=1e-25)
    np.testing.assert_allclose(T1[:3, 3:], -dt ** 3 * gamma / (6 * M), rtol=1e-12, atol=1e-2)
    np.testing.assert_allclose(T1[3:, :3], -M * dt * gamma, rtol=1e-12, atol=1e-40)
    np.testing.assert_allclose(T1[3:, 3:], -dt ** 2 * gamma / 2, rtol=1e-12, atol=1e-25)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_perturbative_scaling_exponents(order):
    """Residual against the exact solution and symplecticity violation both
    scale as Gamma^(k+1) under halving of Gamma."""
    pattern = np.array([[1.0, 0.3, 0.1], [0.3, -0.4, 0.2], [0.1, 0.2, -0.6]])
    H0 = H_const(np.zeros((3, 3)))
    res, sym = [], []
    for f in (0.02, 0.01, 0.005):
        g = pattern * f
        HI = lambda t, g=g: np.broadcast_to(H_const(g) - H0, np.shape(t) + (6, 6))
        P = evolve_perturbative(H0, HI, order, 1.0, 0.0, m=M)
        res.append(np.abs(P.normalized() - evolve_constant(g, M, 1.0).normalized()).max())
        sym.append(P.symplectic_residual())
    for series in (res, sym):
        slopes = np.log2(np.array(series[:-1]) / np.array(series[1:]))
        assert np.all(slopes >= order + 1 - 0.3), slopes
