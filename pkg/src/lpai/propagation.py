"""Time-evolution matrices, inhomogeneous drift and an RK4 reference.

Phase-space trajectories obey ``d xi/dt = J H(t) xi + J G(t)``.  The
homogeneous solution is the evolution matrix ``T(t, t0)``; the inhomogeneous
part is obtained by variation of constants.

Three families of solvers are provided:

* closed forms for constant coefficients (:func:`evolve_constant`, plus a
  matrix-exponential form for coefficients that become constant in rotating
  axes),
* the perturbative (Dyson-type) recursion :func:`evolve_perturbative`,
* a fixed-step RK4 reference :func:`ode_oracle`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from . import kernels
from .constants import HBAR
from .frames import CoefficientSet, ExactForm
from .rotations import block_rotation
from .symplectic import J, symplectic_inverse, symplectic_residual

__all__ = [
    "EvolutionMatrix",
    "PropagationMethod",
    "evolve_constant",
    "evolve_perturbative",
    "ode_oracle",
    "particular_drift",
    "general_solution",
    "gauss_legendre",
    "mass_normalized",
    "Propagator",
    "SpectralPropagator",
    "CarrierPropagator",
    "PerturbativePropagator",
    "OraclePropagator",
    "make_propagator",
    "SERIES_THRESHOLD",
    "MAX_ORDER",
]

#: Below ``|gamma| dt^2`` of this size the oscillator functions use Taylor series.
SERIES_THRESHOLD = 1e-8
#: Highest perturbative order accepted.
MAX_ORDER = 8


def mass_normalized(T, m: float) -> np.ndarray:
    """Conjugate an evolution matrix to unit mass, ``diag(I, I/m) T diag(I, m I)``.

    The map is a symplectic similarity, so symplecticity is unchanged, but the
    blocks become commensurate (``dt`` instead of ``dt/m`` and so on).
    """
    d = np.concatenate([np.ones(3), np.full(3, float(m))])
    return (np.asarray(T) / d[:, None]) * d[None, :]


@dataclass(frozen=True)
class EvolutionMatrix:
    """Evolution matrix ``T(t, t0)``.

    Attributes
    ----------
    T : ndarray, shape (6, 6)
    t, t0 : float
        Final and initial time [s].
    m : float
        Mass [kg], used for unit-aware checks.
    """

    T: np.ndarray
    t: float
    t0: float
    m: float = 1.0

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.T, dtype=dtype)

    def normalized(self) -> np.ndarray:
        """Unit-mass form, see :func:`mass_normalized`."""
        return mass_normalized(self.T, self.m)

    def symplectic_residual(self) -> float:
        """``||T^T J T - J||_max`` of the mass-normalised matrix."""
        return symplectic_residual(self.normalized())

    def is_symplectic(self, tol: float = 1e-9) -> bool:
        """Symplecticity check on the mass-normalised matrix."""
        return self.symplectic_residual() <= tol

    def __matmul__(self, other):
        if isinstance(other, EvolutionMatrix):
            return EvolutionMatrix(self.T @ other.T, self.t, other.t0, self.m)
        return self.T @ other


@dataclass(frozen=True)
class PropagationMethod:
    """Choice of solver.

    ``kind`` is ``'exact'``, ``'perturbative'`` (``order``, ``nodes``) or
    ``'oracle'`` (``step``).
    """

    kind: str = "exact"
    order: int = 2
    nodes: int = 32
    step: float = 1e-4

    def __post_init__(self):
        if self.kind not in ("exact", "perturbative", "oracle"):
            raise ValueError(f"unknown propagation method {self.kind!r}")
        if self.kind == "perturbative":
            if not (isinstance(self.order, (int, np.integer)) and 0 <= self.order):
                raise ValueError("perturbative order must be a non-negative integer")
            if self.order > MAX_ORDER:
                raise ValueError(f"perturbative order {self.order} exceeds the maximum {MAX_ORDER}")
            if self.nodes < 8:
                raise ValueError("at least 8 quadrature nodes are required")
        if self.kind == "oracle" and not self.step > 0:
            raise ValueError("oracle step must be positive")

    @classmethod
    def parse(cls, text: str) -> "PropagationMethod":
        """Parse ``exact``, ``perturbative:<k>`` or ``oracle:<h>``."""
        text = text.strip()
        name, _, arg = text.partition(":")
        if name == "exact" and not arg:
            return cls("exact")
        if name == "perturbative":
            return cls("perturbative", order=int(arg) if arg else 2)
        if name == "oracle":
            return cls("oracle", step=float(arg) if arg else 1e-4)
        raise ValueError(f"cannot parse propagation method {text!r}")

    def __str__(self):
        if self.kind == "perturbative":
            return f"perturbative:{self.order}"
        if self.kind == "oracle":
            return f"oracle:{self.step!r}"
        return "exact"


# ---------------------------------------------------------------------------
# constant coefficients: spectral closed form
# ---------------------------------------------------------------------------

def _oscillator_functions(w, dt):
    """Per-eigenvalue ``c = cos(sqrt(g) dt)``, ``s = sin(sqrt(g) dt)/sqrt(g)``
    and ``q = (cos(sqrt(g) dt) - 1)/g`` with hyperbolic continuation for
    negative ``g`` and Taylor series near zero."""
    w = np.asarray(w, dtype=float)
    c = np.empty_like(w)
    s = np.empty_like(w)
    q = np.empty_like(w)
    dt2 = dt * dt
    for i, g in enumerate(w):
        z = g * dt2
        if abs(z) < SERIES_THRESHOLD:
            c[i] = 1.0 - z / 2.0 + z * z / 24.0
            s[i] = dt * (1.0 - z / 6.0 + z * z / 120.0)
            q[i] = -dt2 * (0.5 - z / 24.0 + z * z / 720.0)
        elif g > 0:
            r = math.sqrt(g)
            x = r * dt
            half = math.sin(0.5 * x)
            c[i] = 1.0 - 2.0 * half * half
            s[i] = math.sin(x) / r
            q[i] = -2.0 * half * half / g
        else:
            r = math.sqrt(-g)
            y = r * dt
            half = math.sinh(0.5 * y)
            c[i] = 1.0 + 2.0 * half * half
            s[i] = math.sinh(y) / r
            q[i] = 2.0 * half * half / g
    return c, s, q


def _eigh_symmetric(Gamma):
    Gamma = np.asarray(Gamma, dtype=float)
    if Gamma.shape != (3, 3):
        raise ValueError("Gamma must be a 3x3 matrix")
    scale = max(1.0, float(np.abs(Gamma).max())) if Gamma.size else 1.0
    if not np.all(np.isfinite(Gamma)):
        raise ValueError("Gamma must be finite")
    if np.abs(Gamma - Gamma.T).max() > 1e-12 * scale:
        raise ValueError("Gamma must be symmetric")
    return np.linalg.eigh(0.5 * (Gamma + Gamma.T))


def _spectral(V, fvals):
    return (V * fvals) @ V.T


def evolve_constant(Gamma, m: float, dt: float) -> EvolutionMatrix:
    """Evolution matrix for a constant gradient.

    Blocks ``[[cos(w dt), sin(w dt)/(m w)], [-m w sin(w dt), cos(w dt)]]``
    with ``w = sqrt(Gamma)`` evaluated through the eigen-decomposition of
    ``Gamma``.

    Parameters
    ----------
    Gamma : array_like, shape (3, 3)
        Symmetric gravity gradient [1/s^2].
    m : float
        Mass [kg].
    dt : float
        Elapsed time ``t - t0`` [s] (negative values propagate backwards).

    Raises
    ------
    ValueError
        For a non-symmetric ``Gamma``.
    """
    w, V = _eigh_symmetric(Gamma)
    c, s, _ = _oscillator_functions(w, float(dt))
    A = _spectral(V, c)
    B = _spectral(V, s) / m
    C = -m * _spectral(V, w * s)
    T = np.block([[A, B], [C, A]])
    return EvolutionMatrix(T, float(dt), 0.0, float(m))


# ---------------------------------------------------------------------------
# Gauss-Legendre quadrature
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _gl(n):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(a, b, n: int = 32):
    """Nodes and weights on ``[a, b]`` (``b < a`` yields negative weights).

    ``a`` and ``b`` may be arrays of equal shape; the result then has shape
    ``a.shape + (n,)``.
    """
    x, w = _gl(int(n))
    a = np.asarray(a, dtype=float)[..., None]
    b = np.asarray(b, dtype=float)[..., None]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


# ---------------------------------------------------------------------------
# perturbative recursion
# ---------------------------------------------------------------------------

def _expm_batch(A, taus):
    taus = np.asarray(taus, dtype=float)
    if not np.any(A @ A):
        # nilpotent of degree two (free motion): the series stops after one term
        return np.eye(A.shape[0]) + A * taus[..., None, None]
    flat = taus.reshape(-1)
    out = expm(A[None, :, :] * flat[:, None, None]) if flat.size else np.zeros((0,) + A.shape)
    return out.reshape(taus.shape + A.shape)


@lru_cache(maxsize=16)
def _gl_integration(n):
    """Nodes ``x``, weights ``w`` and the matrix ``Q`` with
    ``(Q f)_i = int_{-1}^{x_i} p(x) dx`` for the degree ``n - 1``
    interpolant ``p`` of ``f`` at the Gauss-Legendre nodes."""
    x, w = _gl(n)
    leg = np.polynomial.legendre
    V = leg.legvander(x, n - 1)
    # discrete orthogonality: coefficients c = diag((2k + 1)/2) V^T diag(w) f
    Vinv = ((2 * np.arange(n) + 1) / 2.0)[:, None] * V.T * w[None, :]
    Vint = np.column_stack([leg.legval(x, leg.legint(np.eye(n)[k], lbnd=-1)) for k in range(n)])
    Q = Vint @ Vinv
    Q.setflags(write=False)
    return x, w, Q


def _dyson_grid(A0, JHI, order, tb, te, nodes):
    """Dyson terms ``T^(0..order)(s, tb)`` on Gauss-Legendre nodes of ``[tb, te]``.

    In the interaction picture ``T^(n)(s) = T^(0)(s - tb) U^(n)(s)`` with
    ``U^(n)(s) = int_tb^s K(t') U^(n-1)(t') dt'`` and
    ``K = T^(0)(tb - t') J H_I(t') T^(0)(t' - tb)``.  Each order is one
    application of the spectral integration matrix, so the cost is linear in
    the order.

    Returns
    -------
    s : ndarray, shape (N,)
        Nodes (running from ``tb`` towards ``te``).
    w : ndarray, shape (N,)
        Quadrature weights for ``int_tb^te`` (negative if ``te < tb``).
    at_nodes : list of ndarray, shape (N, 6, 6)
    at_end : list of ndarray, shape (6, 6)
        Terms at ``te``.
    """
    x, wstd, Q = _gl_integration(int(nodes))
    h = 0.5 * (float(te) - float(tb))
    s = float(tb) + h * (x + 1.0)
    E = _expm_batch(A0, s - tb)
    Einv = _expm_batch(A0, tb - s)
    K = np.einsum("nij,njk,nkl->nil", Einv, JHI(s), E)
    E_end = _expm_batch(A0, np.array(float(te) - float(tb)))
    U = np.broadcast_to(np.eye(6), (s.size, 6, 6))
    at_nodes = [E]
    at_end = [E_end]
    for _ in range(int(order)):
        KU = np.einsum("nij,njk->nik", K, U)
        U_end = h * np.einsum("n,nij->ij", wstd, KU)
        U = h * np.einsum("in,njk->ijk", Q, KU)
        at_nodes.append(np.einsum("nij,njk->nik", E, U))
        at_end.append(E_end @ U_end)
    return s, h * wstd, at_nodes, at_end


def evolve_perturbative(H0, HI: Callable, order: int, t: float, t0: float,
                        nodes: int = 32, m: float = 1.0,
                        return_terms: bool = False):
    """Truncated perturbative evolution matrix.

    ``T = sum_{n <= order} T^(n)`` with ``T^(0) = exp(J H0 (t - t0))`` and
    ``T^(n)(t, t0) = int_{t0}^{t} T^(0)(t, t') J HI(t') T^(n-1)(t', t0) dt'``
    evaluated by spectral (Gauss-Legendre) collocation on ``[t0, t]``.

    Parameters
    ----------
    H0 : array_like, shape (6, 6)
        Constant unperturbed coefficient matrix.
    HI : callable
        ``t -> HI(t)`` vectorised over arrays of times.
    order : int
        Truncation order, ``0 <= order <= MAX_ORDER``.
    t, t0 : float
    nodes : int
        Gauss-Legendre collocation nodes.
    m : float
        Mass, only stored on the result.
    return_terms : bool
        Also return the list of individual orders.

    Raises
    ------
    ValueError
        For invalid order or non-finite perturbation values.
    """
    PropagationMethod("perturbative", order=order, nodes=nodes)
    A0 = J @ np.asarray(H0, dtype=float)

    def JHI(tt):
        val = np.asarray(HI(tt), dtype=float)
        if not np.all(np.isfinite(val)):
            raise ValueError("perturbation H_I(t) is not finite at a quadrature node")
        return np.einsum("ij,...jk->...ik", J, val)

    if float(t) == float(t0):
        terms = [np.eye(6)] + [np.zeros((6, 6))] * int(order)
    else:
        terms = _dyson_grid(A0, JHI, int(order), float(t0), float(t), int(nodes))[3]
    T = sum(terms)
    res = EvolutionMatrix(np.asarray(T), float(t), float(t0), float(m))
    if return_terms:
        return res, [np.asarray(x) for x in terms]
    return res


# ---------------------------------------------------------------------------
# RK4 oracle
# ---------------------------------------------------------------------------

def _rk4_grid(t, t0, step):
    span = float(t) - float(t0)
    if span == 0.0:
        return 0, 0.0
    n = max(10, int(math.ceil(abs(span) / float(step) - 1e-9)))
    return n, span / n


def _sample(fn, t0, h, n):
    ts = t0 + 0.5 * h * np.arange(2 * n + 1)
    return ts, fn(ts)


def ode_oracle(H: Callable, t: float, t0: float, step: float, m: float = 1.0) -> EvolutionMatrix:
    """RK4 integration of ``dT/dt = J H(t) T`` from ``T(t0) = I``.

    The interval is split into ``n = max(10, ceil(|t - t0| / step))`` equal
    steps, so the effective step never exceeds ``step``.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    n, h = _rk4_grid(t, t0, step)
    if n == 0:
        return EvolutionMatrix(np.eye(6), float(t), float(t0), float(m))
    _, Hs = _sample(H, float(t0), h, n)
    Hs = np.asarray(Hs, dtype=float)
    if not np.all(np.isfinite(Hs)):
        raise ValueError("H(t) is not finite")
    M = np.einsum("ij,njk->nik", J, Hs)
    T = kernels.rk4_linear(M, np.eye(6), h)
    return EvolutionMatrix(T, float(t), float(t0), float(m))


def _oracle_affine(H, G, t, t0, step, z0):
    """RK4 for the augmented system ``(xi, 1)`` with ``xi(t0) = z0``."""
    n, h = _rk4_grid(t, t0, step)
    if n == 0:
        return np.asarray(z0, dtype=float)
    ts = float(t0) + 0.5 * h * np.arange(2 * n + 1)
    M = np.zeros((ts.size, 7, 7))
    M[:, :6, :6] = np.einsum("ij,njk->nik", J, H(ts))
    M[:, :6, 6] = np.einsum("ij,nj->ni", J, G(ts))
    Z0 = np.append(np.asarray(z0, dtype=float), 1.0)[:, None]
    return kernels.rk4_linear(M, Z0, h)[:6, 0]


# ---------------------------------------------------------------------------
# drift and full solution
# ---------------------------------------------------------------------------

def particular_drift(T_solver: Callable, G: Callable, t: float, t0: float,
                     nodes: int = 32) -> np.ndarray:
    """Inhomogeneous part ``T(t, t0) int_{t0}^{t} T^{-1}(t', t0) J G(t') dt'``.

    Parameters
    ----------
    T_solver : callable
        ``(t, t0) -> T(t, t0)`` as a 6x6 array (or :class:`EvolutionMatrix`).
    G : callable
        ``t -> G(t)``, vectorised.
    nodes : int
        Gauss-Legendre nodes.
    """
    tp, w = gauss_legendre(float(t0), float(t), nodes)
    Gs = np.asarray(G(tp), dtype=float)
    if not np.all(np.isfinite(Gs)):
        raise ValueError("G(t) is not finite at a quadrature node")
    acc = np.zeros(6)
    for ti, wi, gi in zip(tp, w, Gs):
        Tinv = symplectic_inverse(np.asarray(T_solver(ti, t0)))
        acc += wi * (Tinv @ (J @ gi))
    return np.asarray(T_solver(t, t0)) @ acc


def general_solution(T, drift, xi0) -> np.ndarray:
    """Classical phase-space point ``T(t, t0) xi0 + drift``."""
    return np.asarray(T) @ np.asarray(xi0, dtype=float) + np.asarray(drift, dtype=float)


# ---------------------------------------------------------------------------
# propagator objects used by the pulse machinery
# ---------------------------------------------------------------------------

class Propagator:
    """Common interface: evolution matrices, drift and single-pulse phase integral.

    Subclasses implement :meth:`matrix`; :meth:`drift` and
    :meth:`phase_integral` default to Gauss-Legendre quadrature.
    """

    name = "generic"

    def __init__(self, coeffs: CoefficientSet, nodes: int = 32):
        self.coeffs = coeffs
        self.m = coeffs.m
        self.nodes = int(nodes)

    def matrix(self, t: float, t0: float) -> np.ndarray:
        raise NotImplementedError

    def evolution(self, t: float, t0: float) -> EvolutionMatrix:
        return EvolutionMatrix(self.matrix(t, t0), float(t), float(t0), self.m)

    def matrices(self, ts, t0: float) -> np.ndarray:
        return np.stack([self.matrix(ti, t0) for ti in np.ravel(ts)])

    def drift(self, t: float, t0: float) -> np.ndarray:
        return particular_drift(self.matrix, self.coeffs.G, t, t0, self.nodes)

    def phase_integral(self, chibar, tn: float, t0: float) -> float:
        """``(1/hbar) int_{t0}^{tn} [T(t', tn) chibar]^T G(t') dt'``."""
        tp, w = gauss_legendre(float(t0), float(tn), self.nodes)
        Ts = self.matrices_from(tp, tn)
        Gs = self.coeffs.G(tp)
        vals = np.einsum("nij,j,ni->n", Ts, np.asarray(chibar, dtype=float), Gs)
        return float(w @ vals) / HBAR

    def matrices_from(self, ts, tb: float) -> np.ndarray:
        """``T(t_i, tb)`` for each ``t_i``."""
        return np.stack([self.matrix(ti, tb) for ti in np.ravel(ts)])

    def solution(self, t: float, t0: float, xi0) -> np.ndarray:
        return general_solution(self.matrix(t, t0), self.drift(t, t0), xi0)


class SpectralPropagator(Propagator):
    """Constant ``Gamma`` and ``g`` without rotation coupling (closed form)."""

    name = "exact"

    def __init__(self, coeffs: CoefficientSet, nodes: int = 32):
        super().__init__(coeffs, nodes)
        gamma, g = coeffs.exact.spectral
        self.gamma = np.asarray(gamma, dtype=float)
        self.g = np.asarray(g, dtype=float)
        self._w, self._V = _eigh_symmetric(self.gamma)

    def matrix(self, t, t0):
        return evolve_constant(self.gamma, self.m, float(t) - float(t0)).T

    def drift(self, t, t0):
        _, s, q = _oscillator_functions(self._w, float(t) - float(t0))
        x = -_spectral(self._V, q) @ self.g
        p = self.m * (_spectral(self._V, s) @ self.g)
        return np.concatenate([x, p])

    def phase_integral(self, chibar, tn, t0):
        chibar = np.asarray(chibar, dtype=float)
        _, s, q = _oscillator_functions(self._w, float(tn) - float(t0))
        pos = self.m * (_spectral(self._V, s) @ chibar[:3]) + _spectral(self._V, q) @ chibar[3:]
        return float(-(self.g @ pos)) / HBAR


def _expm_integral(A, tau):
    """``(exp(A tau), int_0^tau exp(A u) du)`` from one augmented exponential."""
    d = A.shape[0]
    big = np.zeros((2 * d, 2 * d))
    big[:d, :d] = A
    big[:d, d:] = np.eye(d)
    E = expm(big * tau)
    return E[:d, :d], E[:d, d:]


class CarrierPropagator(Propagator):
    """Coefficients that are constant in rotating axes, ``xi = diag(C, C) zeta``."""

    name = "exact"

    def __init__(self, coeffs: CoefficientSet, nodes: int = 32):
        super().__init__(coeffs, nodes)
        form: ExactForm = coeffs.exact
        self.form = form
        # work with (x, p/m): the raw generator mixes 1/m ~ 1e25 with
        # m Gamma ~ 1e-31, which ruins scaling-and-squaring
        m = self.m
        self._s = np.concatenate([np.ones(3), np.full(3, 1.0 / m)])
        A = J @ form.H_inner
        self.A = A
        self.An = (self._s[:, None] * A) / self._s[None, :]
        self.JG = J @ form.G_inner

    def _denorm(self, E):
        return (E / self._s[:, None]) * self._s[None, :]

    def _B(self, t):
        if self.form.carrier is None:
            return np.eye(6)
        return block_rotation(self.form.carrier(float(t)))

    def matrix(self, t, t0):
        E = self._denorm(expm(self.An * (float(t) - float(t0))))
        return self._B(t) @ E @ self._B(t0).T

    def drift(self, t, t0):
        _, I = _expm_integral(self.An, float(t) - float(t0))
        return self._B(t) @ (self._denorm(I) @ self.JG)

    def phase_integral(self, chibar, tn, t0):
        zeta = self._B(tn).T @ np.asarray(chibar, dtype=float)
        # int_{t0}^{tn} E(t' - tn) dt' = int_0^{tn - t0} exp(-A u) du
        _, I = _expm_integral(-self.An, float(tn) - float(t0))
        return float((self._denorm(I) @ zeta) @ self.form.G_inner) / HBAR


class PerturbativePropagator(Propagator):
    """Truncated perturbative series around free motion."""

    name = "perturbative"

    def __init__(self, coeffs: CoefficientSet, order: int = 2, nodes: int = 32):
        super().__init__(coeffs, nodes)
        PropagationMethod("perturbative", order=order, nodes=nodes)
        self.order = int(order)
        self.A0 = J @ coeffs.H0()

    def _JHI(self, tt):
        val = np.asarray(self.coeffs.HI(tt), dtype=float)
        if not np.all(np.isfinite(val)):
            raise ValueError("perturbation H_I(t) is not finite at a quadrature node")
        return np.einsum("ij,...jk->...ik", J, val)

    def _grid(self, tb, te):
        return _dyson_grid(self.A0, self._JHI, self.order, float(tb), float(te), self.nodes)

    def matrix(self, t, t0):
        if float(t) == float(t0):
            return np.eye(6)
        return sum(self._grid(t0, t)[3])

    def matrices_from(self, ts, tb):
        return np.stack([self.matrix(ti, tb) for ti in np.ravel(ts)])

    def drift(self, t, t0):
        if float(t) == float(t0):
            return np.zeros(6)
        s, w, nodes, end = self._grid(t0, t)
        Ts = sum(nodes)
        Gs = self.coeffs.G(s)
        acc = np.zeros(6)
        for Ti, wi, gi in zip(Ts, w, Gs):
            acc += wi * (symplectic_inverse(Ti) @ (J @ gi))
        return sum(end) @ acc

    def phase_integral(self, chibar, tn, t0):
        if float(tn) == float(t0):
            return 0.0
        # nodes run from tn back to t0; w integrates over [tn, t0]
        s, w, nodes, _ = self._grid(tn, t0)
        Ts = sum(nodes)
        vals = np.einsum("nij,j,ni->n", Ts, np.asarray(chibar, dtype=float), self.coeffs.G(s))
        return float(-(w @ vals)) / HBAR


class OraclePropagator(Propagator):
    """Fixed-step RK4 reference for arbitrary time dependence."""

    name = "oracle"

    def __init__(self, coeffs: CoefficientSet, step: float = 1e-4):
        super().__init__(coeffs)
        if not step > 0:
            raise ValueError("step must be positive")
        self.step = float(step)

    def matrix(self, t, t0):
        return ode_oracle(self.coeffs.H, t, t0, self.step, self.m).T

    def drift(self, t, t0):
        return _oracle_affine(self.coeffs.H, self.coeffs.G, t, t0, self.step, np.zeros(6))

    def phase_integral(self, chibar, tn, t0):
        # integrate y' = J H y together with s' = y^T G / hbar backwards from tn
        n, h = _rk4_grid(t0, tn, self.step)
        if n == 0:
            return 0.0
        ts = float(tn) + 0.5 * h * np.arange(2 * n + 1)
        M = np.zeros((ts.size, 7, 7))
        M[:, :6, :6] = np.einsum("ij,njk->nik", J, self.coeffs.H(ts))
        M[:, 6, :6] = self.coeffs.G(ts) / HBAR
        z0 = np.append(np.asarray(chibar, dtype=float), 0.0)[:, None]
        z = kernels.rk4_linear(M, z0, h)
        return float(-z[6, 0])


def make_propagator(coeffs: CoefficientSet, method: PropagationMethod | str = "exact") -> Propagator:
    """Instantiate the solver selected by ``method`` for ``coeffs``.

    Raises
    ------
    ValueError
        If ``exact`` is requested for coefficients without closed form.
    """
    if isinstance(method, str):
        method = PropagationMethod.parse(method)
    if method.kind == "exact":
        if coeffs.exact is None:
            raise ValueError("no closed-form solution for these coefficients; "
                             "use a perturbative or oracle method")
        if coeffs.exact.spectral is not None:
            return SpectralPropagator(coeffs)
        return CarrierPropagator(coeffs)
    if method.kind == "perturbative":
        return PerturbativePropagator(coeffs, method.order, method.nodes)
    return OraclePropagator(coeffs, method.step)
