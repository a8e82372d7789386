"""SO(3) rotations: axis-angle matrices, generators and rotating wave vectors."""
from __future__ import annotations

import math

import numpy as np

__all__ = [
    "OMEGA_ZERO",
    "rotation_matrix",
    "rotation_about",
    "generator",
    "rotate_wave_vector",
    "second_derivative_action",
    "block_rotation",
]

#: Angular velocities below this magnitude [rad/s] count as no rotation.
OMEGA_ZERO = 1e-15

_AXIS_TOL = 1e-12


def _rodrigues(n, alpha):
    n = np.asarray(n, dtype=float)
    s = math.sin(alpha)
    one_minus_c = 2.0 * math.sin(0.5 * alpha) ** 2
    c = 1.0 - one_minus_c
    K = generator(n)
    # cos(a) delta_ik + sin(a) eps_ijk n_j + (1 - cos(a)) n_i n_k, where
    # eps_ijk n_j is exactly the generator matrix of n (q -> n x q).
    return c * np.eye(3) + s * K + one_minus_c * np.outer(n, n)


def rotation_matrix(axis, angle: float | None = None) -> np.ndarray:
    """Rotation matrix for a rotation vector.

    Parameters
    ----------
    axis : array_like, shape (3,)
        Unit rotation axis ``n``.  If ``angle`` is omitted, ``axis`` is the
        combined rotation vector ``alpha * n``.
    angle : float, optional
        Rotation angle ``alpha`` [rad], expected in ``[0, pi)``.

    Returns
    -------
    ndarray, shape (3, 3)
        Proper orthogonal matrix rotating vectors actively by ``alpha``
        about ``n``.

    Raises
    ------
    ValueError
        If an explicit axis is not a unit vector while ``angle > 0``.
    """
    axis = np.asarray(axis, dtype=float).reshape(3)
    if angle is None:
        alpha = float(np.linalg.norm(axis))
        if alpha == 0.0:
            return np.eye(3)
        return _rodrigues(axis / alpha, alpha)
    angle = float(angle)
    if angle == 0.0:
        return np.eye(3)
    if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
        raise ValueError("rotation axis must be a unit vector")
    return _rodrigues(axis, angle)


def rotation_about(omega, t) -> np.ndarray:
    """``R_{Omega t}``: rotation by ``|Omega| t`` about ``Omega / |Omega|``.

    Accepts any angle (no restriction to ``[0, pi)``) since it describes
    motion rather than a parametrisation.
    """
    omega = np.asarray(omega, dtype=float).reshape(3)
    w = float(np.linalg.norm(omega))
    if w < OMEGA_ZERO:
        return np.eye(3)
    alpha = math.remainder(w * float(t), 2.0 * math.pi)
    return _rodrigues(omega / w, alpha)


def generator(omega) -> np.ndarray:
    """Matrix ``Omega . Lambda`` with ``(Omega . Lambda) q = Omega x q``."""
    w1, w2, w3 = np.asarray(omega, dtype=float).reshape(3)
    return np.array([[0.0, -w3, w2],
                     [w3, 0.0, -w1],
                     [-w2, w1, 0.0]])


def rotate_wave_vector(k0, omega, t: float) -> np.ndarray:
    """Actively rotate ``k0`` about ``Omega`` by the angle ``|Omega| t``.

    Parameters
    ----------
    k0 : array_like, shape (3,)
        Wave vector at ``t = 0`` [1/m].
    omega : array_like, shape (3,)
        Angular velocity of the laser [rad/s].
    t : float
        Time [s].
    """
    return rotation_about(omega, t) @ np.asarray(k0, dtype=float)


def second_derivative_action(omega, t: float, q) -> np.ndarray:
    """``d^2/dt^2 [R_{Omega t}] q = Omega x (Omega x (R_{Omega t} q))``."""
    omega = np.asarray(omega, dtype=float)
    rq = rotation_about(omega, t) @ np.asarray(q, dtype=float)
    return np.cross(omega, np.cross(omega, rq))


def block_rotation(R) -> np.ndarray:
    """Phase-space action ``diag(R, R)`` of a spatial rotation."""
    B = np.zeros((6, 6))
    B[:3, :3] = R
    B[3:, 3:] = R
    return B
