"""Extended-precision exact phase engine (mpmath).

Evaluates the total phase of a multi-loop sequence for coefficients that are
constant up to a uniform rotation: gradient ``R Gamma_0 R^T`` and
acceleration ``R g_0`` with ``R = R_{Omega_orbit t}`` (``Omega_orbit = 0``
gives constant coefficients) and lasers rotating with ``Omega_k``.  This is
the same closed form as the double-precision carrier engine, carried out with
``mp.dps`` digits so that truncation residuals of the series far below the
double-precision floor of a ``1e6``-rad phase can be resolved.

Internally the dynamics is written for ``(x, v = p/m)``, which removes ``m``
and ``hbar`` from all matrix exponentials.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np

from .constants import HBAR
from .pulses import vertex_coefficients

__all__ = ["MPExactEngine", "to_mp_array", "DEFAULT_DPS"]

DEFAULT_DPS = 50


def to_mp_array(a):
    """Object array of ``mpf`` with the exact binary values of ``a``."""
    a = np.asarray(a)
    out = np.empty(a.shape, dtype=object)
    for idx, v in np.ndenumerate(a):
        out[idx] = mpmath.mpf(v) if not isinstance(v, mpmath.mpf) else v
    return out


def _mat(a):
    a = np.asarray(a, dtype=object)
    return mpmath.matrix(a.tolist())


def _vec(a):
    return mpmath.matrix([[x] for x in np.asarray(a, dtype=object).reshape(-1)])


def _gen(w):
    z = mpmath.mpf(0)
    return mpmath.matrix([[z, -w[2], w[1]], [w[2], z, -w[0]], [-w[1], w[0], z]])


def _rot(w, t):
    w = [mpmath.mpf(x) for x in w]
    norm = mpmath.sqrt(sum(x * x for x in w))
    if norm == 0:
        return mpmath.eye(3)
    n = [x / norm for x in w]
    a = norm * t
    K = _gen(n)
    return mpmath.eye(3) + mpmath.sin(a) * K + (1 - mpmath.cos(a)) * (K * K)


def _blockdiag(C):
    B = mpmath.zeros(6, 6)
    for i in range(3):
        for j in range(3):
            B[i, j] = C[i, j]
            B[i + 3, j + 3] = C[i, j]
    return B


@dataclass
class MPExactEngine:
    """Exact total phase in extended precision.

    Parameters
    ----------
    Gamma0 : (3, 3) array
        Gradient at ``t = 0`` (frame coordinates).
    g0 : (3,) array
        Effective acceleration at ``t = 0``.
    k0 : (3,) array
        Wave vector at ``t = 0``.
    times : sequence of float
        Pulse times; the first one is the reference time.
    orbit : (3,) array
        Rotation rate of gradient and acceleration (``Omega_Gamma = Omega_g``).
    laser_rotation : (3,) array
        Rotation rate of the wave vectors.
    m : float
    phases : sequence of float
    hbar : float
    dps : int
        Decimal digits.
    """

    Gamma0: np.ndarray
    g0: np.ndarray
    k0: np.ndarray
    times: Sequence[float]
    m: float
    orbit: np.ndarray = None
    laser_rotation: np.ndarray = None
    phases: Sequence[float] = ()
    hbar: float = HBAR
    dps: int = DEFAULT_DPS

    def _setup(self):
        z3 = np.zeros(3)
        self._G = _mat(to_mp_array(self.Gamma0))
        self._g = _vec(to_mp_array(self.g0))
        self._k = _vec(to_mp_array(self.k0))
        self._W = to_mp_array(z3 if self.orbit is None else self.orbit)
        self._Wk = to_mp_array(z3 if self.laser_rotation is None else self.laser_rotation)
        L = _gen(self._W)
        # d/dt (x, v) for the inner coordinates: [[-L, I], [-Gamma0, -L]]
        A = mpmath.zeros(6, 6)
        for i in range(3):
            A[i, i + 3] = 1
            for j in range(3):
                A[i, j] = -L[i, j]
                A[i + 3, j + 3] = -L[i, j]
                A[i + 3, j] = -self._G[i, j]
        self._A = A
        self._t = [mpmath.mpf(t) for t in self.times]

    def _integral(self, X, tau):
        big = mpmath.zeros(12, 12)
        for i in range(6):
            big[i, i + 6] = 1
            for j in range(6):
                big[i, j] = X[i, j]
        E = mpmath.expm(big * tau)
        return E[0:6, 6:12]

    def pulse_quantities(self):
        """Per pulse: scaled displacement ``u_n`` and phase integral.

        ``chi_n = ((hbar/m) u_x, hbar u_v)`` and ``Phi_n = phi_n + I_n``.
        """
        with mpmath.workdps(self.dps):
            return self._pulse_quantities()

    def _pulse_quantities(self):
        self._setup()
        t0 = self._t[0]
        B0 = _blockdiag(_rot(self._W, t0))
        out = []
        for tn in self._t:
            kn = _rot(self._Wk, tn) * self._k
            kick = mpmath.matrix([[0], [0], [0], [kn[0]], [kn[1]], [kn[2]]])
            Bn = _blockdiag(_rot(self._W, tn))
            zeta = Bn.T * kick
            E = mpmath.expm(self._A * (t0 - tn))
            u = B0 * (E * zeta)
            if tn == t0:
                integ = mpmath.mpf(0)
            else:
                Iu = self._integral(-self._A, tn - t0) * zeta
                integ = -sum(Iu[i] * self._g[i] for i in range(3))
            out.append((u, integ))
        return out

    def total_phase(self, x0=(0, 0, 0), p0=(0, 0, 0)):
        """Total phase ``Phi_I + (1/hbar)[chi_0/2 + xi_0]^T J chi_I``.

        Returns
        -------
        mpf
        """
        with mpmath.workdps(self.dps):
            return self._total_phase(x0, p0)

    def _total_phase(self, x0, p0):
        q = self._pulse_quantities()
        c = vertex_coefficients(len(q))
        hb = mpmath.mpf(self.hbar)
        m = mpmath.mpf(self.m)
        phases = list(self.phases) or [0] * len(q)
        Phi_I = sum(ci * (mpmath.mpf(ph) + I) for ci, ph, (_, I) in zip(c, phases, q))
        uI = mpmath.zeros(6, 1)
        for ci, (u, _) in zip(c, q):
            uI += ci * u
        u0 = q[0][0]

        def form(a, b):
            return sum(a[i] * b[i + 3] - a[i + 3] * b[i] for i in range(3))

        bch = hb / (2 * m) * form(u0, uI)
        x0 = to_mp_array(x0)
        p0 = to_mp_array(p0)
        mean = sum(x0[i] * uI[i + 3] - p0[i] / m * uI[i] for i in range(3))
        return Phi_I + bch + mean
