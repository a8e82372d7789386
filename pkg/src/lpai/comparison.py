"""Halving studies: closed-form series versus the exact engine.

The residual ``|exact - series|`` of an expansion truncated after order
``n`` scales as ``2^{-(n+1) j}`` when the small parameters (gradient and
rotation rates) are halved ``j`` times.  Both sides are evaluated in
extended precision so that the residual is not masked by the rounding floor
of a ``1e6``-rad phase in double precision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import mpmath
import numpy as np

from .constants import HBAR
from .frames import gravity_gradient, local_acceleration
from .highprec import MPExactEngine, to_mp_array
from .rotations import OMEGA_ZERO
from .series import (ExpansionParams, delta_phi_butterfly_series, delta_phi_mz_series,
                     phi_atomic_fountain_series, phi_mz_noninertial_series)

__all__ = ["HalvingStudy", "SeriesSetup", "series_setup", "halving_study", "fit_exponent"]


@dataclass
class SeriesSetup:
    """Everything a halving study needs, in frame coordinates at ``t = 0``.

    Pulse times are ``multiples * T``; they are formed in extended precision
    because a rounded ``3 * T`` alone shifts a Butterfly phase by ~1e-9 rad.
    """

    series: str
    Gamma0: np.ndarray
    g0: np.ndarray
    k0: np.ndarray
    T: float
    multiples: List[int]
    m: float
    orbit: np.ndarray
    laser_rotation: np.ndarray
    x0: np.ndarray
    p0: np.ndarray
    phases: List[float]


@dataclass
class HalvingStudy:
    series: str
    factors: List[float]
    residuals: List[float]
    exponent: float
    exact: List[float]
    approx: List[float]

    def as_dict(self):
        return {
            "series": self.series,
            "factors": list(self.factors),
            "residuals_rad": list(self.residuals),
            "fitted_exponent": self.exponent,
            "exact_rad": list(self.exact),
            "series_rad": list(self.approx),
        }


def fit_exponent(factors, residuals) -> float:
    """Least-squares slope of ``log residual`` versus ``log factor``."""
    x = np.log(np.asarray(factors, dtype=float))
    y = np.log(np.asarray(residuals, dtype=float))
    A = np.column_stack([x, np.ones_like(x)])
    slope, _ = np.linalg.lstsq(A, y, rcond=None)[0]
    return float(slope)


def _equal(a, b, tol=1e-12):
    return np.allclose(a, b, rtol=tol, atol=1e-300)


def series_setup(scenario) -> SeriesSetup:
    """Map a scenario onto one of the closed-form expansions.

    Raises
    ------
    ValueError
        If no expansion applies (message names the reason).
    """
    geo = scenario.geometry
    if geo is None or geo.kind == "multi_loop":
        raise ValueError("series comparison needs a mach_zehnder or butterfly shorthand")
    if geo.t0 != 0.0:
        raise ValueError("series comparison assumes the first pulse at t = 0")
    T = geo.intervals[0]
    if geo.kind == "mach_zehnder" and not _equal(geo.intervals[1], T):
        raise ValueError("series comparison needs symmetric timing T1 = T2")
    if geo.kind == "butterfly" and not (_equal(geo.intervals[1], 2 * T) and _equal(geo.intervals[2], T)):
        raise ValueError("butterfly series needs timing T, 2T, T")
    frame = scenario.frame
    model = scenario.gravity
    if np.linalg.norm(frame.frame_rotation) >= OMEGA_ZERO:
        raise ValueError("series comparison needs a non-rotating (co-moving) frame")
    rho0 = frame.rho0
    Gamma0 = gravity_gradient(model, rho0)
    orbit = np.zeros(3)
    if frame.trajectory == "constant":
        g0 = local_acceleration(model, rho0)
    elif frame.trajectory == "polynomial" and model.mode == "uniform":
        g0 = local_acceleration(model, rho0) - frame.acceleration
    elif frame.trajectory == "circular" and model.mode == "central":
        orbit = frame.orbit_rate
        g0 = local_acceleration(model, rho0) - np.cross(orbit, np.cross(orbit, rho0))
    else:
        raise ValueError("no closed-form engine for this trajectory and gravity model")
    lr = frame.laser_rotation
    rotating = np.linalg.norm(orbit) >= OMEGA_ZERO
    if geo.kind == "butterfly":
        if rotating:
            raise ValueError("the butterfly series covers inertial frames only")
        name = "butterfly"
    elif not rotating:
        name = "mach_zehnder_inertial"
    elif _equal(lr, orbit):
        name = "atomic_fountain"
    else:
        name = "mach_zehnder_noninertial"
    multiples = [0, 1, 3, 4] if geo.kind == "butterfly" else [0, 1, 2]
    mean = scenario.state.mean
    return SeriesSetup(name, Gamma0, g0, np.array(geo.k, dtype=float), T, multiples,
                       scenario.mass, np.array(orbit, dtype=float), np.array(lr, dtype=float),
                       mean[:3].copy(), mean[3:].copy(), [p.phase for p in scenario.pulses])


def _series_value(setup: SeriesSetup, f):
    mp = to_mp_array
    p = ExpansionParams(
        k0=mp(setup.k0), g=mp(setup.g0), T=mpmath.mpf(setup.T), m=mpmath.mpf(setup.m),
        Gamma=mp(setup.Gamma0) * f, Omega=mp(setup.laser_rotation) * f,
        x0=mp(setup.x0), p0=mp(setup.p0), phases=[mpmath.mpf(x) for x in setup.phases],
        hbar=mpmath.mpf(HBAR))
    if setup.series == "mach_zehnder_inertial":
        return delta_phi_mz_series(p)
    if setup.series == "butterfly":
        return delta_phi_butterfly_series(p)
    if setup.series == "atomic_fountain":
        return phi_atomic_fountain_series(p)
    p.Omega_k = mp(setup.laser_rotation) * f
    p.Omega_g = mp(setup.orbit) * f
    p.Omega_Gamma = mp(setup.orbit) * f
    return phi_mz_noninertial_series(p)


def _exact_value(setup: SeriesSetup, f, dps):
    T = mpmath.mpf(setup.T)
    eng = MPExactEngine(
        Gamma0=to_mp_array(setup.Gamma0) * f, g0=setup.g0, k0=setup.k0,
        times=[j * T for j in setup.multiples],
        m=setup.m, orbit=to_mp_array(setup.orbit) * f,
        laser_rotation=to_mp_array(setup.laser_rotation) * f, phases=setup.phases, dps=dps)
    return eng.total_phase(setup.x0, setup.p0)


def halving_study(setup: SeriesSetup, halvings: int = 3, dps: int = 50) -> HalvingStudy:
    """Residual of the series under simultaneous halving of gradient and rotations.

    Parameters
    ----------
    setup : SeriesSetup
    halvings : int
        Number of halvings (``halvings + 1`` evaluations).
    dps : int
        Decimal digits of the extended-precision evaluation.
    """
    if halvings < 1:
        raise ValueError("need at least one halving")
    factors, res, ex, ap = [], [], [], []
    with mpmath.workdps(dps):
        for j in range(halvings + 1):
            f = mpmath.mpf(2) ** (-j)
            e = _exact_value(setup, f, dps)
            s = _series_value(setup, f)
            factors.append(float(f))
            res.append(float(abs(e - s)))
            ex.append(float(e))
            ap.append(float(s))
    if any(r == 0 or not math.isfinite(r) for r in res):
        exponent = float("nan")
    else:
        exponent = fit_exponent(factors, res)
    return HalvingStudy(setup.series, factors, res, exponent, ex, ap)
