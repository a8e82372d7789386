"""Pure-numpy implementations of the hot loops (fallback for ``_kernels``)."""
import numpy as np


def rk4_linear(M, Z0, h):
    """Fixed-step RK4 for ``dZ/dt = M(t) Z``.

    Parameters
    ----------
    M : ndarray, shape (2 n + 1, d, d)
        ``M`` sampled at ``t0 + j h / 2`` for ``j = 0 .. 2 n``.
    Z0 : ndarray, shape (d, k)
        Initial value.
    h : float
        Step (may be negative).

    Returns
    -------
    ndarray, shape (d, k)
    """
    M = np.asarray(M, dtype=float)
    Z = np.array(Z0, dtype=float, copy=True)
    n = (M.shape[0] - 1) // 2
    half = 0.5 * h
    sixth = h / 6.0
    for i in range(n):
        Ma = M[2 * i]
        Mb = M[2 * i + 1]
        Mc = M[2 * i + 2]
        k1 = Ma @ Z
        k2 = Mb @ (Z + half * k1)
        k3 = Mb @ (Z + half * k2)
        k4 = Mc @ (Z + h * k3)
        Z = Z + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return Z


def trapz2_cos(W, xs, ps, a, bx, bp):
    """Trapezoid rule for ``sum W(x, p) cos(a + bx x + bp p) dx dp`` on a grid.

    ``W`` has shape ``(len(xs), len(ps))``; both axes must be uniform.
    """
    W = np.asarray(W, dtype=float)
    xs = np.asarray(xs, dtype=float)
    ps = np.asarray(ps, dtype=float)
    wx = np.full(xs.size, xs[1] - xs[0])
    wx[[0, -1]] *= 0.5
    wp = np.full(ps.size, ps[1] - ps[0])
    wp[[0, -1]] *= 0.5
    # cos(a + u + v) = cos(a + u) cos v - sin(a + u) sin v keeps memory O(n)
    cu = np.cos(a + bx * xs)
    su = np.sin(a + bx * xs)
    cv = np.cos(bp * ps)
    sv = np.sin(bp * ps)
    Wv = W * wp[None, :]
    return float(wx @ (cu * (Wv @ cv) - su * (Wv @ sv)))
