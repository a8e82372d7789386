import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpai.constants import HBAR
from lpai.frames import inertial_coefficients
from lpai.propagation import make_propagator
from lpai.pulses import (PulseEffect, PulseSpec, butterfly, compose_beam_splitters,
                         compose_displacements, geometry_summary, kick_vector, mach_zehnder,
                         multi_loop, pulse_effects, vertex_coefficients)
from lpai.states import detection_probability, detection_probability_general, thermal_state
from lpai.symplectic import symplectic_product

from strategies import vec6

M = 1.443e-25
K = np.array([0.0, 0.0, -1.61e7])
G = np.array([0.0, 0.0, -9.81])
SCALE = dict(xscale=1e-3, pscale=1e-27)


def propagator(gamma=np.zeros((3, 3)), omega=np.zeros(3)):
    return make_propagator(inertial_coefficients(gamma, G, M, omega), "exact")


def test_vertex_coefficients():
    assert vertex_coefficients(3) == [1, -2, 1]
    assert vertex_coefficients(4) == [1, -2, 2, -1]
    assert vertex_coefficients(5) == [1, -2, 2, -2, 1]
    assert sum(vertex_coefficients(7)) == 0
    assert vertex_coefficients(2) == [1, -1]
    with pytest.raises(ValueError):
        vertex_coefficients(1)


def test_pulse_validation():
    with pytest.raises(ValueError):
        PulseSpec(0.0, K, area=0.0)
    with pytest.raises(ValueError):
        PulseSpec(0.0, K, area=2 * math.pi)
    assert PulseSpec(0.0, K).symmetric
    assert not PulseSpec(0.0, K, k_down=2 * K).symmetric
    with pytest.raises(ValueError):
        pulse_effects([PulseSpec(1.0, K), PulseSpec(0.5, K), PulseSpec(2.0, K)], propagator())


def test_kick_vector():
    np.testing.assert_allclose(kick_vector(K), np.concatenate([np.zeros(3), HBAR * K]))


def test_geometry_builders():
    assert [p.t for p in mach_zehnder(0.1, K, t0=1.0)] == pytest.approx([1.0, 1.1, 1.2])
    assert [p.area for p in mach_zehnder(0.1, K)] == [math.pi / 2, math.pi, math.pi / 2]
    assert [p.t for p in butterfly(0.1, K)] == pytest.approx([0.0, 0.1, 0.3, 0.4])
    assert len(multi_loop([0, 1, 2, 3, 4], K)) == 5
    assert [p.phase for p in mach_zehnder(0.1, K, phases=[0.1, 0.2, 0.3])] == [0.1, 0.2, 0.3]


@given(vec6(**SCALE), vec6(**SCALE), vec6(**SCALE))
def test_displacement_composition_associative(a, b, c):
    """(D(c) D(b)) D(a) = D(c) (D(b) D(a)) including the composition phases."""
    cb, p1 = compose_displacements(c, b)
    left, p2 = compose_displacements(cb, a)
    ba, q1 = compose_displacements(b, a)
    right, q2 = compose_displacements(c, ba)
    np.testing.assert_allclose(left, right, rtol=1e-14, atol=1e-30)
    scale = max(abs(p1), abs(p2), abs(q1), abs(q2), 1e-300)
    assert abs((p1 + p2) - (q1 + q2)) <= 1e-12 * scale


@given(vec6(**SCALE), vec6(**SCALE))
def test_composition_phase_antisymmetric(a, b):
    _, pab = compose_displacements(a, b)
    _, pba = compose_displacements(b, a)
    assert pab == pytest.approx(-pba, rel=1e-12, abs=1e-300)
    assert pab == pytest.approx(symplectic_product(b, a) / (2 * HBAR), rel=1e-12, abs=1e-300)


def test_free_fall_mach_zehnder():
    s = geometry_summary(pulse_effects(mach_zehnder(0.1, K), propagator()))
    assert s.Phi_I == pytest.approx(K @ G * 0.01, rel=1e-14)
    assert np.abs(s.chi_I).max() == 0.0
    assert s.sign == 1 and s.final_index == 2


def test_summary_requires_standard_sequence():
    P = propagator()
    effs = pulse_effects(mach_zehnder(0.1, K), P)
    with pytest.raises(ValueError):
        geometry_summary(effs[:2])
    asym = pulse_effects([PulseSpec(0.0, K), PulseSpec(0.1, K, k_down=1.01 * K), PulseSpec(0.2, K)], P)
    with pytest.raises(ValueError):
        geometry_summary(asym)


def test_pulse_effect_back_propagation():
    """chi_n is the kick at t_n seen at t_0: free flight shifts x by -hbar k t/m."""
    effs = pulse_effects(mach_zehnder(0.1, K), propagator())
    np.testing.assert_allclose(effs[2].chi[:3], -HBAR * K * 0.2 / M, rtol=1e-14)
    np.testing.assert_allclose(effs[2].chi[3:], HBAR * K, rtol=1e-14)
    # generalised phase: laser phase plus k.g t^2/2
    assert effs[2].Phi == pytest.approx(K @ G * 0.04 / 2, rel=1e-14)


@given(st.lists(st.floats(0.2, 2 * math.pi - 0.2), min_size=3, max_size=5),
       st.floats(-1e-5, 1e-5))
def test_ports_sum_to_one_any_area(areas, gam):
    P = propagator(np.diag([gam, gam, -2 * gam]), np.array([0.0, 3e-5, 0.0]))
    times = 0.05 * np.arange(len(areas))
    effs = pulse_effects(multi_loop(times, K), P)
    U = compose_beam_splitters(list(zip(areas, effs)))
    state = thermal_state(sigma_x=1e-4, sigma_v=3e-3, m=M)
    total = sum(detection_probability_general(U[i][0], state) for i in range(2))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_merge_does_not_change_probability():
    # without gradient the Butterfly closes, so paths share displacements
    P = propagator()
    effs = pulse_effects(butterfly(0.1, K, phases=[0, 0.3, 0.1, 0.2]), P)
    areas = [math.pi / 2 + 0.2, math.pi - 0.1, math.pi + 0.05, math.pi / 2]
    state = thermal_state(sigma_x=1e-4, sigma_v=3e-3, m=M)
    Um = compose_beam_splitters(list(zip(areas, effs)), merge=True)
    Uu = compose_beam_splitters(list(zip(areas, effs)), merge=False)
    assert len(Um[0][0]) < len(Uu[0][0])
    assert detection_probability_general(Um[0][0], state) == pytest.approx(
        detection_probability_general(Uu[0][0], state), abs=1e-12)


@pytest.mark.parametrize("builder", [lambda: mach_zehnder(0.1, K, T2=0.11, phases=[0.3, 0.1, 0.2]),
                                     lambda: butterfly(0.1, K, phases=[0.1, 0.5, 0.2, 0.9]),
                                     lambda: multi_loop([0, 0.1, 0.3, 0.5, 0.6], K)])
def test_operator_product_matches_vertex_rule(builder):
    """Ideal pulses: the operator product gives the closed-form probability."""
    P = propagator(np.diag([1.5e-6, 1.5e-6, -3e-6]), np.array([0.0, 5e-5, 4e-5]))
    effs = pulse_effects(builder(), P)
    state = thermal_state([1e-4, 0, 2e-4], [0, M * 1e-3, 0], sigma_x=1e-4, sigma_v=3e-3, m=M)
    closed = detection_probability(geometry_summary(effs), state).probability
    general = detection_probability_general(compose_beam_splitters(effs)[0][0], state)
    assert general == pytest.approx(closed, abs=1e-10)


def test_asymmetric_kicks_use_down_vector():
    P = propagator()
    e = pulse_effects([PulseSpec(0.0, K), PulseSpec(0.1, K, k_down=1.001 * K), PulseSpec(0.2, K)], P)[1]
    assert isinstance(e, PulseEffect) and not e.symmetric
    np.testing.assert_allclose(e.chi_down[3:], HBAR * 1.001 * K)
