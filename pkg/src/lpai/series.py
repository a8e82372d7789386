"""Closed-form series for Mach-Zehnder and Butterfly phase shifts.

These evaluators transcribe the known expansions term by term so that the
exact engine can be checked against them.  Angular velocities enter either
through cross products (``Omega x k0``) or as generator matrices
``Omega q = Omega x q``; products of generators and gradients are evaluated
in the order written (the matrices do not commute).

All functions accept plain floats/ndarrays or arrays of ``mpmath.mpf``
(object dtype); the arithmetic is carried out in the type supplied, which
allows residual studies below double precision.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction as F
from typing import Optional, Sequence

import numpy as np

from .constants import HBAR

__all__ = [
    "ExpansionParams",
    "generator_matrix",
    "delta_phi_mz_series",
    "delta_phi_butterfly_series",
    "phi_mz_noninertial_series",
    "phi_atomic_fountain_series",
    "phi_n_series",
]


def _as_array(v, shape):
    a = np.asarray(v)
    if a.dtype != object:
        a = a.astype(float)
    if shape is not None and a.shape != shape:
        a = a.reshape(shape)
    return a


def generator_matrix(w):
    """``Omega . Lambda`` for a 3-vector of any numeric type."""
    w = _as_array(w, (3,))
    z = w[0] * 0
    return np.array([[z, -w[2], w[1]],
                     [w[2], z, -w[0]],
                     [-w[1], w[0], z]], dtype=w.dtype)


@dataclass
class ExpansionParams:
    """Parameters of the phase-shift expansions (SI units).

    Attributes
    ----------
    k0 : array, shape (3,)
        Effective wave vector at the first pulse.
    g : array, shape (3,)
        Local acceleration ``g`` (inertial) or ``g'_0`` (co-moving).
    Gamma : array, shape (3, 3)
        Gravity gradient ``Gamma_0``.
    Omega : array, shape (3,)
        Rotation rate of the lasers (inertial expansions) or common rotation
        rate (fountain expansion).
    Omega_k, Omega_g, Omega_Gamma : array, shape (3,) or None
        Independent rotations of lasers, acceleration and gradient; ``None``
        falls back to ``Omega``.
    T : float
        Pulse separation (MZ: ``0, T, 2T``; Butterfly: ``0, T, 3T, 4T``).
    x0, p0 : array, shape (3,)
        Mean initial position and momentum.
    m : float
        Mass.
    phases : sequence of float
        Laser phases ``phi_n``.
    hbar : float
        Reduced Planck constant (overridable for extended precision).
    """

    k0: np.ndarray
    g: np.ndarray
    T: float
    m: float
    Gamma: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    Omega: np.ndarray = field(default_factory=lambda: np.zeros(3))
    Omega_k: Optional[np.ndarray] = None
    Omega_g: Optional[np.ndarray] = None
    Omega_Gamma: Optional[np.ndarray] = None
    x0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    p0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    phases: Sequence[float] = ()
    hbar: float = HBAR

    def __post_init__(self):
        self.k0 = _as_array(self.k0, (3,))
        self.g = _as_array(self.g, (3,))
        self.Gamma = _as_array(self.Gamma, (3, 3))
        self.Omega = _as_array(self.Omega, (3,))
        self.x0 = _as_array(self.x0, (3,))
        self.p0 = _as_array(self.p0, (3,))
        for name in ("Omega_k", "Omega_g", "Omega_Gamma"):
            v = getattr(self, name)
            setattr(self, name, self.Omega if v is None else _as_array(v, (3,)))
        if not self.T > 0:
            raise ValueError("T must be positive")
        G = self.Gamma
        if G.dtype != object and not np.allclose(G, G.T, rtol=0, atol=1e-14 * max(1.0, np.abs(G).max())):
            raise ValueError("Gamma must be symmetric")

    def scaled(self, gamma_factor=1, omega_factor=1) -> "ExpansionParams":
        """Copy with ``Gamma`` and all rotation rates multiplied."""
        return replace(
            self,
            Gamma=self.Gamma * gamma_factor,
            Omega=self.Omega * omega_factor,
            Omega_k=self.Omega_k * omega_factor,
            Omega_g=self.Omega_g * omega_factor,
            Omega_Gamma=self.Omega_Gamma * omega_factor,
        )

    def laser_phase_combination(self, coefficients) -> float:
        if not self.phases:
            return 0
        if len(self.phases) != len(coefficients):
            raise ValueError("number of laser phases does not match the geometry")
        return sum(c * ph for c, ph in zip(coefficients, self.phases))


def _q(c, x):
    """``c * x`` for a rational ``c`` without rounding ``c`` to binary."""
    c = F(c)
    return x * c.numerator / c.denominator


def _velocity(p):
    return p.hbar * p.k0 / (2 * p.m) + p.p0 / p.m


def delta_phi_mz_series(p: ExpansionParams):
    """Total Mach-Zehnder phase shift in an inertial frame with rotating lasers.

    Symmetric timing ``0, T, 2T``; laser rotation ``Omega``; constant
    ``Gamma`` and ``g``.  Valid through second order in both ``Gamma`` and
    ``Omega``.
    """
    T = p.T
    k = p.k0
    W = generator_matrix(p.Omega)
    Wk = W @ k
    WWk = W @ Wk
    G = p.Gamma
    g = p.g

    def curly(a, b, c):
        # {a k + b (Omega x k) T + c [Omega x (Omega x k)] T^2}
        return _q(a, k) + _q(b, Wk) * T + _q(c, WWk) * T ** 2

    phi = p.laser_phase_combination([1, -2, 1])
    out = phi
    out = out + curly(1, 3, F(7, 2)) @ g * T ** 2
    out = out - curly(7, 15, F(31, 2)) @ (G @ g) * T ** 4 / 12
    out = out + curly(31, 63, F(127, 2)) @ (G @ G @ g) * T ** 6 / 360
    xb = (WWk * T ** 2
          - G @ curly(1, 3, F(7, 2)) * T ** 2
          + G @ G @ curly(7, 15, F(31, 2)) * T ** 4 / 12)
    out = out + p.x0 @ xb
    pb = (2 * (Wk * T + 3 * WWk / 2 * T ** 2) * T
          - G @ curly(3, 7, F(15, 2)) * T ** 3 / 3
          + 2 * (G @ G @ curly(15, 31, F(63, 2))) * T ** 5 / 120)
    out = out + _velocity(p) @ pb
    return out


def delta_phi_butterfly_series(p: ExpansionParams):
    """Total Butterfly phase shift in an inertial frame with rotating lasers.

    Timing ``0, T, 3T, 4T``; valid through second order in ``Gamma`` and
    ``Omega``.
    """
    T = p.T
    k = p.k0
    W = generator_matrix(p.Omega)
    Wk = W @ k
    WWk = W @ Wk
    G = p.Gamma
    g = p.g

    def curly(a, b, c):
        return _q(a, k) + _q(b, Wk) * T + _q(c, WWk) * T ** 2

    phi = p.laser_phase_combination([1, -2, 2, -1])
    out = phi
    out = out - (6 * Wk * T + 24 * WWk * T ** 2) @ g * T ** 2
    out = out + curly(4, F(45, 2), 55) @ (G @ g) * T ** 4
    out = out - curly(F(11, 3), F(1001, 60), F(182, 5)) @ (G @ G @ g) * T ** 6
    xb = (G @ (6 * Wk * T + 24 * WWk * T ** 2) * T ** 2
          - G @ G @ curly(4, F(45, 2), 55) * T ** 4)
    out = out + p.x0 @ xb
    pb = (6 * WWk * T ** 3
          - G @ curly(2, 16, 45) * T ** 3
          + G @ G @ curly(F(9, 2), 22, F(1001, 20)) * T ** 5)
    out = out - _velocity(p) @ pb
    return out


def _mz_rotating_brackets(G0, Wk, Wg, WG, T, order):
    """The three matrix brackets of the non-inertial MZ expansion.

    Returns ``(Bg, Bx, Bp)`` such that
    ``dPhi = phi - k0^T Bg g'_0 T^2 + k0^T Bx x0 + k0^T Bp T v``.
    """
    I = np.eye(3, dtype=G0.dtype) if G0.dtype == object else np.eye(3)
    if G0.dtype == object:
        I = I * (G0[0, 0] * 0 + 1)
    M = lambda *ms: _chain(I, ms)  # noqa: E731
    Wk2, Wk3, Wk4, Wk5 = M(Wk, Wk), M(Wk, Wk, Wk), M(Wk, Wk, Wk, Wk), M(Wk, Wk, Wk, Wk, Wk)
    Wg2, Wg3, Wg4, Wg5 = M(Wg, Wg), M(Wg, Wg, Wg), M(Wg, Wg, Wg, Wg), M(Wg, Wg, Wg, Wg, Wg)
    WG2, WG3 = M(WG, WG), M(WG, WG, WG)
    G2 = M(G0, G0)

    g_terms = [
        -I,
        (3 * Wk - Wg) * T,
        7 * (G0 + 4 * M(Wk, Wg) - Wg2 - 6 * Wk2) * T ** 2 / 12,
        (3 * M(WG, G0) - 3 * M(G0, WG) + M(G0, Wg) + 5 * M(Wk, Wg2) - 10 * M(Wk2, Wg)
         - Wg3 - 5 * M(Wk, G0) + 10 * Wk3) * T ** 3 / 4,
        -31 * (12 * M(WG, G0, WG) - 6 * M(G0, WG2) - 6 * M(WG2, G0) + G2 - M(G0, Wg2)
               + 4 * M(G0, WG, Wg) - 4 * M(WG, G0, Wg) + 6 * M(Wk, G0, Wg) - 6 * M(Wk, Wg3)
               + 15 * M(Wk2, Wg2) - 20 * M(Wk3, Wg) + Wg4 - 15 * M(Wk2, G0)
               - 18 * M(Wk, G0, WG) + 18 * M(Wk, WG, G0) + 15 * Wk4) * T ** 4 / 360,
        (26 * M(G0, WG, G0) - 10 * M(G0, WG3) - 9 * M(G2, WG) - 17 * M(WG, G2) + 10 * M(WG3, G0)
         + 30 * M(WG, G0, WG2) - 30 * M(WG2, G0, WG) + M(G0, Wg3) - M(G2, Wg)
         - 5 * M(G0, WG, Wg2) + 10 * M(G0, WG2, Wg) + 5 * M(WG, G0, Wg2) + 10 * M(WG2, G0, Wg)
         - 20 * M(WG, G0, WG, Wg) - 7 * M(Wk, G0, Wg2) + 21 * M(Wk2, G0, Wg)
         + 28 * M(Wk, G0, WG, Wg) - 28 * M(Wk, WG, G0, Wg) + 7 * M(Wk, Wg4) - 21 * M(Wk2, Wg3)
         + 35 * M(Wk3, Wg2) - 35 * M(Wk4, Wg) - Wg5 + 7 * M(Wk, G2) - 35 * M(Wk3, G0)
         - 42 * M(Wk, G0, WG2) - 42 * M(Wk, WG2, G0) - 63 * M(Wk2, G0, WG)
         + 63 * M(Wk2, WG, G0) + 84 * M(Wk, WG, G0, WG) + 21 * Wk5) * T ** 5 / 40,
    ]
    x_terms = [
        0 * I,
        0 * I,
        (Wk2 - G0) * T ** 2,
        (M(G0, WG) - M(WG, G0) + 3 * M(Wk, G0) - Wk3) * T ** 3,
        7 * (2 * M(WG, G0, WG) - M(G0, WG2) - M(WG2, G0) + G2 - 6 * M(Wk2, G0)
             - 4 * M(Wk, G0, WG) + 4 * M(Wk, WG, G0) + Wk4) * T ** 4 / 12,
        (M(G0, WG3) - M(G2, WG) + 3 * M(WG, G2) - M(WG3, G0) - 2 * M(G0, WG, G0)
         - 3 * M(WG, G0, WG2) + 3 * M(WG2, G0, WG) - 5 * M(Wk, G2) + 10 * M(Wk3, G0)
         + 5 * M(Wk, G0, WG2) + 5 * M(Wk, WG2, G0) + 10 * M(Wk2, G0, WG)
         - 10 * M(Wk2, WG, G0) - 10 * M(Wk, WG, G0, WG) - Wk5) * T ** 5 / 4,
    ]
    p_terms = [
        0 * I,
        -2 * Wk * T,
        (3 * Wk2 - G0) * T ** 2,
        7 * (M(G0, WG) - M(WG, G0) + 2 * M(Wk, G0) - 2 * Wk3) * T ** 3 / 6,
        (6 * M(WG, G0, WG) + G2 - 3 * M(G0, WG2) - 3 * M(WG2, G0) - 10 * M(Wk2, G0)
         - 10 * M(Wk, G0, WG) + 10 * M(Wk, WG, G0) + 5 * Wk4) * T ** 4 / 4,
        -31 * (M(G0, WG, G0) - 2 * M(G0, WG3) + M(G2, WG) - 2 * M(WG, G2) + 2 * M(WG3, G0)
               + 6 * M(WG, G0, WG2) - 6 * M(WG2, G0, WG) + 3 * M(Wk, G2) - 10 * M(Wk3, G0)
               - 9 * M(Wk, G0, WG2) - 9 * M(Wk, WG2, G0) - 15 * M(Wk2, G0, WG)
               + 15 * M(Wk2, WG, G0) + 18 * M(Wk, WG, G0, WG) + 3 * Wk5) * T ** 5 / 180,
    ]
    cut = order + 1
    return sum(g_terms[:cut]), sum(x_terms[:cut]), sum(p_terms[:cut])


def _chain(I, ms):
    out = I
    for mtx in ms:
        out = out @ mtx
    return out


def phi_mz_noninertial_series(p: ExpansionParams, order: int = 5):
    """Total MZ phase shift in the co-moving frame of a circular trajectory.

    The gradient rotates with ``Omega_Gamma``, the effective acceleration
    ``g'_0`` with ``Omega_g`` and the lasers with ``Omega_k``; timing
    ``0, T, 2T``.

    Parameters
    ----------
    p : ExpansionParams
    order : int
        Highest power of ``T`` kept inside the brackets (0..5).
    """
    if not 0 <= order <= 5:
        raise ValueError("order must lie in 0..5")
    Wk = generator_matrix(p.Omega_k)
    Wg = generator_matrix(p.Omega_g)
    WG = generator_matrix(p.Omega_Gamma)
    Bg, Bx, Bp = _mz_rotating_brackets(p.Gamma, Wk, Wg, WG, p.T, order)
    k = p.k0
    phi = p.laser_phase_combination([1, -2, 1])
    return (phi - k @ (Bg @ p.g) * p.T ** 2
            + k @ (Bx @ p.x0)
            + k @ (Bp @ _velocity(p)) * p.T)


def phi_atomic_fountain_series(p: ExpansionParams):
    """Total MZ phase shift of a fountain fixed on a uniformly rotating body.

    All rotations equal ``Omega`` (lasers fixed to the ground); ``g`` is
    the effective acceleration ``g'_0`` including the centrifugal term.
    """
    T = p.T
    k = p.k0
    W = generator_matrix(p.Omega)
    G0 = p.Gamma
    I = np.eye(3) if G0.dtype != object else np.eye(3) * (G0[0, 0] * 0 + 1)
    M = lambda *ms: _chain(I, ms)  # noqa: E731
    W2, W3, W4, W5 = M(W, W), M(W, W, W), M(W, W, W, W), M(W, W, W, W, W)
    G2 = M(G0, G0)
    Bg = (-I + 2 * W * T + 7 * (G0 - 3 * W2) * T ** 2 / 12
          + (2 * W3 - M(W, G0) - M(G0, W)) * T ** 3 / 2
          + 31 * (3 * M(W2, G0) + 3 * M(G0, W2) + 4 * M(W, G0, W) - G2 - 5 * W4) * T ** 4 / 360
          + (3 * W5 - 2 * M(W3, G0) - 2 * M(G0, W3) - 3 * M(W, G0, W2) - 3 * M(W2, G0, W)
             - 5 * M(W, G2) - 5 * M(G2, W) + 13 * M(G0, W, G0)) * T ** 5 / 20)
    Bx = ((W2 - G0) * T ** 2
          + (2 * M(W, G0) + M(G0, W) - W3) * T ** 3
          + 7 * (W4 - 3 * M(W2, G0) - M(G0, W2) - 2 * M(W, G0, W) + G2) * T ** 4 / 12
          + (4 * M(W3, G0) + M(G0, W3) + 2 * M(W, G0, W2) + 3 * M(W2, G0, W) - 2 * M(W, G2)
             - M(G2, W) - 2 * M(G0, W, G0) - W5) * T ** 5 / 4)
    Bp = (-2 * W * T + (3 * W2 - G0) * T ** 2
          + 7 * (M(W, G0) + M(G0, W) - 2 * W3) * T ** 3 / 6
          + (5 * W4 - 3 * M(W2, G0) - 4 * M(W, G0, W) + G2 - 3 * M(G0, W2)) * T ** 4 / 4
          - 31 * (3 * W5 + M(G0, W, G0) + M(G2, W) + M(W, G2) - 2 * M(G0, W3) - 2 * M(W3, G0)
                  - 3 * M(W2, G0, W) - 3 * M(W, G0, W2)) * T ** 5 / 180)
    phi = p.laser_phase_combination([1, -2, 1])
    return (phi - k @ (Bg @ p.g) * T ** 2
            + k @ (Bx @ p.x0)
            + k @ (Bp @ _velocity(p)) * T)


def phi_n_series(p: ExpansionParams, dt, phase=0):
    """Generalised phase of a single pulse ``dt = t_n - t_0`` after the first.

    ``Phi_n = phi_n - k0^T {...} g'_0 dt^2`` through ``dt^5`` with independent
    rotations ``Omega_k``, ``Omega_g``, ``Omega_Gamma``.
    """
    Wk = generator_matrix(p.Omega_k)
    Wg = generator_matrix(p.Omega_g)
    WG = generator_matrix(p.Omega_Gamma)
    G0 = p.Gamma
    I = np.eye(3) if G0.dtype != object else np.eye(3) * (G0[0, 0] * 0 + 1)
    B = (-I / 2 + (3 * Wk - Wg) * dt / 6
         + (G0 + 4 * Wk @ Wg - Wg @ Wg - 6 * Wk @ Wk) * dt ** 2 / 24
         + (3 * WG @ G0 - 3 * G0 @ WG + G0 @ Wg + 5 * Wk @ Wg @ Wg - 10 * Wk @ Wk @ Wg
            - Wg @ Wg @ Wg - 5 * Wk @ G0 + 10 * Wk @ Wk @ Wk) * dt ** 3 / 120)
    return phase - p.k0 @ (B @ p.g) * dt ** 2
