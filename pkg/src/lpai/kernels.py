"""Backend selection for the hot loops.

The compiled extension ``lpai._kernels`` is used when it was built; otherwise
the numpy twins in :mod:`lpai._kernels_py` take over transparently.
"""
import numpy as np

from . import _kernels_py

try:  # pragma: no cover - depends on the build
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

__all__ = ["BACKEND", "available_backends", "use_backend", "rk4_linear", "trapz2_cos"]

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

BACKEND = "cython" if _compiled is not None else "python"
_impl = _BACKENDS[BACKEND]


def available_backends():
    """Names of the usable kernel backends."""
    return sorted(_BACKENDS)


def use_backend(name: str) -> None:
    """Switch the kernel backend (``'cython'`` or ``'python'``)."""
    global BACKEND, _impl
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    BACKEND = name
    _impl = _BACKENDS[name]


def rk4_linear(M, Z0, h):
    """Dispatch to the active backend; see :func:`lpai._kernels_py.rk4_linear`."""
    return _impl.rk4_linear(np.ascontiguousarray(M, dtype=float), Z0, float(h))


def trapz2_cos(W, xs, ps, a, bx, bp):
    """Dispatch to the active backend; see :func:`lpai._kernels_py.trapz2_cos`."""
    return _impl.trapz2_cos(W, xs, ps, a, bx, bp)
