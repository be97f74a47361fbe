"""Backend selection for the pairwise kernels.

The compiled extension is used when importable; set ``BALLMAP_PURE_PYTHON=1``
to force the numpy fallback.  ``BALLMAP_THREADS`` caps the number of threads
used to split pairwise scans (the compiled loops release the GIL).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:
    _compiled = None

HAVE_COMPILED = _compiled is not None

if _compiled is None or os.environ.get("BALLMAP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    _impl = _compiled
    BACKEND = "cython"


def _resolve(impl):
    """None (selected backend), "python", "cython"/"compiled", or a module."""
    if impl is None:
        return _impl
    if impl == "python":
        return _kernels_py
    if impl in ("cython", "compiled"):
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return _compiled
    return impl


def thread_count() -> int:
    try:
        n = int(os.environ.get("BALLMAP_THREADS", "1"))
    except ValueError:
        n = 1
    return max(1, n)


def _chunks(n: int, parts: int, balance_triangle: bool) -> list[tuple[int, int]]:
    if parts <= 1 or n < 2 * parts:
        return [(0, n)]
    if balance_triangle:
        # row i of the upper triangle has n - i - 1 entries; equalize work
        fr = 1.0 - np.sqrt(1.0 - np.arange(1, parts) / parts)
        cuts = [0, *np.round(fr * n).astype(int).tolist(), n]
    else:
        cuts = np.linspace(0, n, parts + 1).round().astype(int).tolist()
    return [(a, b) for a, b in zip(cuts[:-1], cuts[1:]) if b > a]


def _c(a):
    return np.ascontiguousarray(a, dtype=float)


def min_ratio_pairs(X, Y, tol: float = 1e-12, impl=None) -> float:
    """Smallest |Y_i - Y_j| / |X_i - X_j| over pairs with |X_i - X_j| >= tol."""
    impl = _resolve(impl)
    X, Y = _c(X), _c(Y)
    parts = _chunks(len(X), thread_count(), True)
    if len(parts) == 1:
        return float(impl.min_ratio_pairs(X, Y, 0, len(X), tol))
    with ThreadPoolExecutor(len(parts)) as ex:
        vals = list(ex.map(lambda ab: impl.min_ratio_pairs(X, Y, ab[0], ab[1], tol), parts))
    return float(min(vals))


def min_ratio_cross(X1, Y1, X2, Y2, tol: float = 1e-12, impl=None) -> float:
    """Smallest |Y1_i - Y2_j| / |X1_i - X2_j| over pairs with |X1_i - X2_j| >= tol."""
    impl = _resolve(impl)
    X1, Y1, X2, Y2 = _c(X1), _c(Y1), _c(X2), _c(Y2)
    parts = _chunks(len(X1), thread_count(), False)
    if len(parts) == 1:
        return float(impl.min_ratio_cross(X1, Y1, X2, Y2, 0, len(X1), tol))
    with ThreadPoolExecutor(len(parts)) as ex:
        vals = list(ex.map(lambda ab: impl.min_ratio_cross(X1, Y1, X2, Y2, ab[0], ab[1], tol), parts))
    return float(min(vals))


def pair_energy(Y, Z, alpha: float, grad: bool = True, impl=None):
    impl = _resolve(impl)
    return impl.pair_energy(_c(Y), _c(Z), float(alpha), grad)
