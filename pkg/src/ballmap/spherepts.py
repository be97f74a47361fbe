"""Well-conditioned interpolation points on the sphere.

``extremal_points(n)`` maximizes log det(A A^T), A[j, i] = psi_i(z_j), over
(n+1)^2 points, which is the same as maximizing the interpolation
determinant of any basis of polynomials of degree <= n restricted to the
sphere.  Results for small degrees ship with the package.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .basis import get_basis
from .quality import fibonacci_sphere

MAX_PACKAGED = 10


def _to_xyz(angles):
    t, p = angles[0::2], angles[1::2]
    return np.stack([np.sin(t) * np.cos(p), np.sin(t) * np.sin(p), np.cos(t)], axis=1)


def _logdet(angles, basis):
    A = basis.values(_to_xyz(angles))
    sign, val = np.linalg.slogdet(A @ A.T)
    return -val if sign > 0 else np.inf


def extremal_points(n: int, maxiter: int = 400) -> np.ndarray:
    basis = get_basis(3, n)
    z = fibonacci_sphere((n + 1) ** 2)
    ang = np.empty(2 * len(z))
    ang[0::2] = np.arccos(np.clip(z[:, 2], -1, 1))
    ang[1::2] = np.arctan2(z[:, 1], z[:, 0])
    res = minimize(_logdet, ang, args=(basis,), method="BFGS", options={"maxiter": maxiter})
    return _to_xyz(res.x)


def packaged_point_file(n: int) -> Path:
    path = resources.files("ballmap") / "data" / f"sphere_points_n{n}.txt"
    if not path.is_file():
        raise FileNotFoundError(f"no packaged sphere point set for degree {n}; pass a point file")
    return Path(str(path))
