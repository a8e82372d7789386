"""Hamiltonian coefficients for inertial, co-moving and rotating frames.

The external Hamiltonian is quadratic in phase space,

    H = 1/2 xi^T H(t) xi + G(t)^T xi,

with ``G = (-m g, 0)`` built from the effective local acceleration and
``H`` carrying ``m Gamma`` in the position block, ``I/m`` in the momentum
block and, in rotating frames, the rotation coupling ``+-Omega.Lambda`` in the
off-diagonal blocks.  The scalar offset is dropped.

Rotating frames use canonical momenta: for a frame rotating with constant
``Omega_f`` the Hamiltonian ``p^2/2m + V - Omega_f . (x x p)`` with
``p = m (dx/dt + Omega_f x x)`` reproduces the Coriolis and centrifugal
accelerations without a separate centrifugal potential.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .rotations import OMEGA_ZERO, generator, rotation_about, block_rotation

__all__ = [
    "GravityModel",
    "FrameSpec",
    "CoefficientSet",
    "ExactForm",
    "local_acceleration",
    "gravity_gradient",
    "comoving_coefficients",
    "rotating_frame_coefficients",
    "inertial_coefficients",
]


def _vec3(v, name="vector"):
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} must be finite")
    return a


@dataclass(frozen=True)
class GravityModel:
    """Gravitational field expanded to second order about the frame origin.

    Attributes
    ----------
    mode : {'uniform', 'central'}
    g : ndarray, shape (3,)
        Fixed acceleration [m/s^2] (uniform mode).
    gamma : ndarray, shape (3, 3)
        Fixed gravity gradient [1/s^2] (uniform mode), symmetric.
    gm : float
        Gravitational parameter ``G M`` [m^3/s^2] (central mode).
    """

    mode: str = "uniform"
    g: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gamma: np.ndarray = field(default_factory=lambda: np.zeros((3, 3)))
    gm: float = 0.0

    def __post_init__(self):
        if self.mode not in ("uniform", "central"):
            raise ValueError(f"unknown gravity mode {self.mode!r}")
        object.__setattr__(self, "g", _vec3(self.g, "g"))
        gamma = np.asarray(self.gamma, dtype=float)
        if gamma.shape != (3, 3) or not np.all(np.isfinite(gamma)):
            raise ValueError("gamma must be a finite 3x3 matrix")
        if not np.allclose(gamma, gamma.T, rtol=0.0, atol=1e-14 * max(1.0, np.abs(gamma).max())):
            raise ValueError("gamma must be symmetric")
        object.__setattr__(self, "gamma", 0.5 * (gamma + gamma.T))
        if self.mode == "central" and not self.gm > 0:
            raise ValueError("central gravity requires gm > 0")


def _central_g(gm, rho):
    r2 = np.einsum("...i,...i->...", rho, rho)
    if np.any(r2 == 0.0):
        raise ZeroDivisionError("central gravity is singular at rho = 0")
    r = np.sqrt(r2)
    return -gm * rho / (r2 * r)[..., None]


def _central_gamma(gm, rho):
    r2 = np.einsum("...i,...i->...", rho, rho)
    if np.any(r2 == 0.0):
        raise ZeroDivisionError("central gravity gradient is singular at rho = 0")
    r5 = r2 ** 2 * np.sqrt(r2)
    outer = rho[..., :, None] * rho[..., None, :]
    eye = np.broadcast_to(np.eye(3), outer.shape)
    return gm * (eye * r2[..., None, None] - 3.0 * outer) / r5[..., None, None]


def local_acceleration(model: GravityModel, rho) -> np.ndarray:
    """Gravitational acceleration at ``rho`` [m/s^2].

    ``-GM rho / |rho|^3`` in central mode, the fixed ``g`` in uniform mode.
    """
    rho = np.asarray(rho, dtype=float)
    if model.mode == "uniform":
        return np.broadcast_to(model.g, rho.shape).copy()
    return _central_g(model.gm, rho)


def gravity_gradient(model: GravityModel, rho) -> np.ndarray:
    """Gravity gradient ``Gamma`` at ``rho`` [1/s^2].

    Central mode: ``GM (delta_ik |rho|^2 - 3 rho_i rho_k) / |rho|^5``, which is
    symmetric and traceless with eigenvalues ``(-2, 1, 1) GM/|rho|^3``.
    """
    rho = np.asarray(rho, dtype=float)
    if model.mode == "uniform":
        return np.broadcast_to(model.gamma, rho.shape[:-1] + (3, 3)).copy()
    return _central_gamma(model.gm, rho)


@dataclass(frozen=True)
class FrameSpec:
    """Trajectory of the frame origin and the rotations involved.

    Attributes
    ----------
    trajectory : {'constant', 'polynomial', 'circular'}
        ``constant``: ``rho(t) = rho0``; ``polynomial``:
        ``rho0 + v0 t + a0 t^2 / 2``; ``circular``: ``R_{Omega t} rho0`` with
        ``Omega = orbit_rate``.
    rho0, velocity, acceleration : ndarray, shape (3,)
    orbit_rate : ndarray, shape (3,)
        Angular velocity of the circular motion [rad/s].
    frame_rotation : ndarray, shape (3,)
        Constant angular velocity of the frame axes (zero for the co-moving
        frame).
    laser_rotation : ndarray, shape (3,)
        Angular velocity of the laser wave vectors, relative to inertial axes.
    """

    trajectory: str = "constant"
    rho0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    acceleration: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orbit_rate: np.ndarray = field(default_factory=lambda: np.zeros(3))
    frame_rotation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    laser_rotation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.trajectory not in ("constant", "polynomial", "circular"):
            raise ValueError(f"unsupported trajectory mode {self.trajectory!r}")
        for name in ("rho0", "velocity", "acceleration", "orbit_rate",
                     "frame_rotation", "laser_rotation"):
            object.__setattr__(self, name, _vec3(getattr(self, name), name))

    def rho(self, t):
        """Frame origin ``rho(t)``; ``t`` may be an array."""
        t = np.asarray(t, dtype=float)
        if self.trajectory == "constant":
            return np.broadcast_to(self.rho0, t.shape + (3,)).copy()
        if self.trajectory == "polynomial":
            tt = t[..., None]
            return self.rho0 + self.velocity * tt + 0.5 * self.acceleration * tt ** 2
        return _rotate_many(self.orbit_rate, t, self.rho0)

    def rho_ddot(self, t):
        """Second time derivative of the trajectory."""
        t = np.asarray(t, dtype=float)
        if self.trajectory == "constant":
            return np.zeros(t.shape + (3,))
        if self.trajectory == "polynomial":
            return np.broadcast_to(self.acceleration, t.shape + (3,)).copy()
        w = self.orbit_rate
        r = _rotate_many(w, t, self.rho0)
        return np.cross(w, np.cross(w, r))

    def laser_wave_vector(self, k0, t: float) -> np.ndarray:
        """Wave vector at time ``t`` expressed in the frame's coordinates."""
        k_inertial = rotation_about(self.laser_rotation, t) @ np.asarray(k0, dtype=float)
        return rotation_about(self.frame_rotation, t).T @ k_inertial


def _rotations(omega, t):
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    R = np.stack([rotation_about(omega, ti) for ti in flat]) if flat.size else np.zeros((0, 3, 3))
    return R.reshape(t.shape + (3, 3))


def _rotate_many(omega, t, q):
    return np.einsum("...ij,j->...i", _rotations(omega, t), q)


@dataclass(frozen=True)
class ExactForm:
    """Closed-form structure of a coefficient set.

    The phase-space coordinates are ``xi(t) = diag(C(t), C(t)) zeta(t)``
    where ``zeta`` obeys constant coefficients ``H_inner`` and ``G_inner``
    and ``C(t)`` is the ``carrier`` rotation.

    ``spectral`` is set when ``C = I`` and ``H_inner`` has no rotation
    coupling, i.e. ``H = diag(m Gamma, I/m)`` with constant ``Gamma`` and ``g``.
    """

    H_inner: np.ndarray
    G_inner: np.ndarray
    carrier: Optional[Callable[[float], np.ndarray]] = None
    spectral: Optional[tuple] = None  # (Gamma, g)


@dataclass(frozen=True)
class CoefficientSet:
    """Time-dependent coefficients ``G(t)`` and ``H(t)`` of one frame.

    Attributes
    ----------
    m : float
        Particle mass [kg].
    gamma_fn : callable
        ``t -> Gamma(t)`` in frame coordinates, vectorised over ``t``.
    accel_fn : callable
        ``t -> g(t)`` effective local acceleration in frame coordinates.
    frame_rotation : ndarray, shape (3,)
        Constant rotation of the frame axes (rotation coupling in ``H``).
    exact : ExactForm or None
        Closed-form structure if available.
    frame : FrameSpec
        The frame the coefficients refer to.
    """

    m: float
    gamma_fn: Callable
    accel_fn: Callable
    frame_rotation: np.ndarray
    exact: Optional[ExactForm]
    frame: FrameSpec

    def H(self, t) -> np.ndarray:
        """``H(t)``, shape ``t.shape + (6, 6)``."""
        t = np.asarray(t, dtype=float)
        gam = self.gamma_fn(t)
        out = np.zeros(t.shape + (6, 6))
        out[..., :3, :3] = self.m * gam
        out[..., 3:, 3:] = np.eye(3) / self.m
        L = generator(self.frame_rotation)
        out[..., :3, 3:] = L
        out[..., 3:, :3] = -L
        return out

    def G(self, t) -> np.ndarray:
        """``G(t) = (-m g(t), 0)``, shape ``t.shape + (6,)``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (6,))
        out[..., :3] = -self.m * self.accel_fn(t)
        return out

    def H0(self) -> np.ndarray:
        """Free-particle part ``diag(0, I/m)`` used as the unperturbed term."""
        out = np.zeros((6, 6))
        out[3:, 3:] = np.eye(3) / self.m
        return out

    def HI(self, t) -> np.ndarray:
        """Perturbation ``H(t) - H0``."""
        return self.H(t) - self.H0()

    def wave_vector(self, k0, t: float) -> np.ndarray:
        """Laser wave vector at ``t`` in this frame's coordinates."""
        return self.frame.laser_wave_vector(k0, t)


def _h_inner(m, gamma, coupling):
    L = generator(coupling)
    H = np.zeros((6, 6))
    H[:3, :3] = m * gamma
    H[3:, 3:] = np.eye(3) / m
    H[:3, 3:] = L
    H[3:, :3] = -L
    return H


def _g_inner(m, accel):
    G = np.zeros(6)
    G[:3] = -m * np.asarray(accel, dtype=float)
    return G


def comoving_coefficients(model: GravityModel, frame: FrameSpec, m: float) -> CoefficientSet:
    """Coefficients in the co-moving (non-rotating) frame following ``rho(t)``.

    The effective acceleration is ``g'(t) = g(rho(t)) - rho''(t)`` and the
    gradient is ``Gamma(rho(t))``.

    Raises
    ------
    ValueError
        If the frame has a non-zero ``frame_rotation``.
    """
    if np.linalg.norm(frame.frame_rotation) >= OMEGA_ZERO:
        raise ValueError("co-moving frame requires frame_rotation = 0")
    if not m > 0:
        raise ValueError("mass must be positive")
    return _comoving(model, frame, float(m))


def _comoving(model, frame, m):
    def gamma_fn(t):
        return gravity_gradient(model, frame.rho(t))

    def accel_fn(t):
        return local_acceleration(model, frame.rho(t)) - frame.rho_ddot(t)

    exact = None
    traj = frame.trajectory
    if traj == "constant" or (traj == "polynomial" and model.mode == "uniform"):
        gamma0 = gravity_gradient(model, frame.rho0)
        g0 = accel_fn(np.array(0.0))
        exact = ExactForm(_h_inner(m, gamma0, np.zeros(3)), _g_inner(m, g0),
                          carrier=None, spectral=(gamma0, g0))
    elif traj == "circular" and model.mode == "central":
        w = frame.orbit_rate
        gamma0 = gravity_gradient(model, frame.rho0)
        g0p = local_acceleration(model, frame.rho0) - np.cross(w, np.cross(w, frame.rho0))
        # In axes co-rotating with the orbit everything is constant.
        exact = ExactForm(_h_inner(m, gamma0, w), _g_inner(m, g0p),
                          carrier=lambda t, w=w: rotation_about(w, t))
    return CoefficientSet(m=m, gamma_fn=gamma_fn, accel_fn=accel_fn,
                          frame_rotation=np.zeros(3), exact=exact, frame=frame)


def rotating_frame_coefficients(model: GravityModel, frame: FrameSpec, m: float) -> CoefficientSet:
    """Coefficients in a frame whose axes rotate with constant ``frame_rotation``.

    Coordinates are ``x = rho + R(t) x''`` with canonical momentum
    ``p'' = R^T(t) m (dx/dt - drho/dt)``.  Then ``Gamma'' = R^T Gamma R``,
    ``g'' = R^T [g(rho) - rho'']`` and the off-diagonal blocks of ``H''`` are
    ``+Omega.Lambda`` (upper right) and ``-Omega.Lambda`` (lower left).
    With ``frame_rotation = 0`` this is exactly :func:`comoving_coefficients`.
    """
    if not m > 0:
        raise ValueError("mass must be positive")
    m = float(m)
    w_f = frame.frame_rotation
    base = _comoving(model, frame, m)
    if np.linalg.norm(w_f) < OMEGA_ZERO:
        return base

    def gamma_fn(t):
        R = _rotations(w_f, t)
        return np.einsum("...ji,...jk,...kl->...il", R, base.gamma_fn(t), R)

    def accel_fn(t):
        R = _rotations(w_f, t)
        return np.einsum("...ji,...j->...i", R, base.accel_fn(t))

    exact = None
    if base.exact is not None:
        inner = base.exact
        c0 = inner.carrier

        def carrier(t, c0=c0):
            Rf = rotation_about(w_f, t)
            return Rf.T if c0 is None else Rf.T @ c0(t)

        exact = ExactForm(inner.H_inner, inner.G_inner, carrier=carrier)
    return CoefficientSet(m=m, gamma_fn=gamma_fn, accel_fn=accel_fn,
                          frame_rotation=w_f.copy(), exact=exact, frame=frame)


def inertial_coefficients(gamma, g, m: float, laser_rotation=(0.0, 0.0, 0.0)) -> CoefficientSet:
    """Constant ``Gamma`` and ``g`` in an inertial frame, optional laser rotation."""
    model = GravityModel("uniform", g=g, gamma=gamma)
    frame = FrameSpec("constant", laser_rotation=laser_rotation)
    return comoving_coefficients(model, frame, m)


def carrier_block(form: ExactForm, t: float) -> np.ndarray:
    """``diag(C(t), C(t))`` for an exact form (identity without carrier)."""
    if form.carrier is None:
        return np.eye(6)
    return block_rotation(form.carrier(t))
