"""Phase-space linear algebra on the 6-dimensional space ``xi = (x, p)``.

Phase-space vectors are plain ``numpy`` arrays of shape ``(6,)`` holding the
position (m) followed by the momentum (kg m/s).  Matrices acting on them are
``(6, 6)`` arrays.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "J",
    "DEFAULT_TOL",
    "phase_vector",
    "split",
    "is_symplectic",
    "symplectic_residual",
    "symplectic_inverse",
    "symplectic_sandwich",
    "symplectic_product",
    "block",
]

DEFAULT_TOL = 1e-10

_I3 = np.eye(3)
_Z3 = np.zeros((3, 3))

#: The symplectic form ``[[0, I], [-I, 0]]``.
J = np.block([[_Z3, _I3], [-_I3, _Z3]])
J.setflags(write=False)


def phase_vector(x=(0.0, 0.0, 0.0), p=(0.0, 0.0, 0.0)) -> np.ndarray:
    """Stack a position and a momentum 3-vector into a phase-space vector.

    Parameters
    ----------
    x : array_like, shape (3,)
        Position [m].
    p : array_like, shape (3,)
        Momentum [kg m/s].

    Returns
    -------
    ndarray, shape (6,)
    """
    x = np.asarray(x, dtype=float).reshape(3)
    p = np.asarray(p, dtype=float).reshape(3)
    return np.concatenate([x, p])


def split(xi):
    """Return the ``(x, p)`` halves of a phase-space vector."""
    xi = np.asarray(xi)
    return xi[..., :3], xi[..., 3:]


def block(a, b, c, d) -> np.ndarray:
    """Assemble a 6x6 matrix from four 3x3 blocks ``[[a, b], [c, d]]``."""
    return np.block([[a, b], [c, d]])


def symplectic_residual(M) -> float:
    """Max-norm of ``M^T J M - J``; ``inf`` for non-finite input."""
    M = np.asarray(M, dtype=float)
    if M.shape != (6, 6):
        raise ValueError(f"expected a 6x6 matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        return float("inf")
    return float(np.max(np.abs(M.T @ J @ M - J)))


def is_symplectic(M, tol: float = DEFAULT_TOL) -> bool:
    """Check ``||M^T J M - J||_max <= tol``.

    Parameters
    ----------
    M : array_like, shape (6, 6)
    tol : float
        Absolute tolerance, must be positive.

    Returns
    -------
    bool
        ``False`` for matrices with non-finite entries.

    Notes
    -----
    The test is in absolute terms, so it is only meaningful when the blocks
    are of comparable magnitude.  Evolution matrices in SI units for atomic
    masses have momentum-position blocks of order ``1/m ~ 1e25``; use
    :meth:`lpai.propagation.EvolutionMatrix.is_symplectic`, which checks the
    mass-normalised matrix instead.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    return symplectic_residual(M) <= tol


def symplectic_inverse(S, tol: float = 1e-6) -> np.ndarray:
    """Inverse of a symplectic matrix, ``J S^T J^T``.

    Parameters
    ----------
    S : array_like, shape (6, 6)
        Symplectic matrix.
    tol : float
        Loose tolerance used to reject matrices that are clearly not
        symplectic.  The check is relative to the magnitude of the
        off-diagonal blocks so that SI-unit evolution matrices pass.

    Raises
    ------
    ValueError
        If ``S`` violates the symplectic condition beyond ``tol``.
    """
    S = np.asarray(S, dtype=float)
    if S.shape != (6, 6):
        raise ValueError(f"expected a 6x6 matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix has non-finite entries")
    inv = J @ S.T @ J.T
    # Relative check: each entry of inv @ S is compared against the size of
    # the products that form it, so SI-unit matrices with 1/m ~ 1e25 blocks
    # are judged fairly.
    prod = inv @ S
    scale = np.abs(inv) @ np.abs(S)
    resid = np.abs(prod - np.eye(6))
    err = np.where(scale > 0, resid / np.where(scale > 0, scale, 1.0), resid)
    if np.max(err) > tol:
        raise ValueError(f"matrix is not symplectic (relative residual {np.max(err):.3e})")
    return inv


def symplectic_sandwich(a, M, b) -> float:
    """Bilinear form ``a^T M b``."""
    return float(np.asarray(a, dtype=float) @ np.asarray(M, dtype=float) @ np.asarray(b, dtype=float))


def symplectic_product(a, b) -> float:
    """Shorthand for ``a^T J b`` -- the antisymmetric form used throughout."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(a[:3] @ b[3:] - a[3:] @ b[:3])
