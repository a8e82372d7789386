# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: RK4 stepping of linear matrix ODEs and grid quadrature."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def rk4_linear(double[:, :, ::1] M, Z0, double h):
    """Fixed-step RK4 for ``dZ/dt = M(t) Z``; see the pure-Python twin."""
    cdef Py_ssize_t n = (M.shape[0] - 1) // 2
    cdef Py_ssize_t d = M.shape[1]
    cdef cnp.ndarray[double, ndim=2, mode="c"] Zarr = np.array(Z0, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] Z = Zarr
    cdef Py_ssize_t k = Z.shape[1]
    cdef double[:, ::1] k1 = np.empty((d, k))
    cdef double[:, ::1] k2 = np.empty((d, k))
    cdef double[:, ::1] k3 = np.empty((d, k))
    cdef double[:, ::1] k4 = np.empty((d, k))
    cdef double[:, ::1] tmp = np.empty((d, k))
    cdef double half = 0.5 * h, sixth = h / 6.0, acc
    cdef Py_ssize_t i, r, c, q, ia, ib, ic
    for i in range(n):
        ia = 2 * i
        ib = ia + 1
        ic = ia + 2
        # k1 = Ma Z
        for r in range(d):
            for c in range(k):
                acc = 0.0
                for q in range(d):
                    acc = acc + M[ia, r, q] * Z[q, c]
                k1[r, c] = acc
        for r in range(d):
            for c in range(k):
                tmp[r, c] = Z[r, c] + half * k1[r, c]
        for r in range(d):
            for c in range(k):
                acc = 0.0
                for q in range(d):
                    acc = acc + M[ib, r, q] * tmp[q, c]
                k2[r, c] = acc
        for r in range(d):
            for c in range(k):
                tmp[r, c] = Z[r, c] + half * k2[r, c]
        for r in range(d):
            for c in range(k):
                acc = 0.0
                for q in range(d):
                    acc = acc + M[ib, r, q] * tmp[q, c]
                k3[r, c] = acc
        for r in range(d):
            for c in range(k):
                tmp[r, c] = Z[r, c] + h * k3[r, c]
        for r in range(d):
            for c in range(k):
                acc = 0.0
                for q in range(d):
                    acc = acc + M[ic, r, q] * tmp[q, c]
                k4[r, c] = acc
        for r in range(d):
            for c in range(k):
                Z[r, c] = Z[r, c] + sixth * (k1[r, c] + 2.0 * k2[r, c] + 2.0 * k3[r, c] + k4[r, c])
    return Zarr


def trapz2_cos(W, xs, ps, double a, double bx, double bp):
    """Trapezoid rule for ``sum W(x, p) cos(a + bx x + bp p) dx dp``."""
    cdef double[:, ::1] Wv = np.ascontiguousarray(W, dtype=np.float64)
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] p = np.ascontiguousarray(ps, dtype=np.float64)
    cdef Py_ssize_t nx = x.shape[0], npts = p.shape[0], i, j
    cdef double dx = x[1] - x[0], dp = p[1] - p[0]
    cdef double[::1] cv = np.empty(npts)
    cdef double[::1] sv = np.empty(npts)
    cdef double wi, wj, rc, rs, total = 0.0, ang
    for j in range(npts):
        cv[j] = cos(bp * p[j])
        sv[j] = sin(bp * p[j])
    for i in range(nx):
        wi = dx * (0.5 if (i == 0 or i == nx - 1) else 1.0)
        rc = 0.0
        rs = 0.0
        for j in range(npts):
            wj = dp * (0.5 if (j == 0 or j == npts - 1) else 1.0)
            rc = rc + Wv[i, j] * wj * cv[j]
            rs = rs + Wv[i, j] * wj * sv[j]
        ang = a + bx * x[i]
        total = total + wi * (cos(ang) * rc - sin(ang) * rs)
    return total
