"""Grid-based injectivity and into-ness measures for 3D mappings.

m_K(phi)   = min over distinct sphere-grid pairs of |phi(x) - phi(y)| / |x - y|
E1(Phi)    = min over distinct ball-grid pairs of |Phi(x) - Phi(y)| / |x - y|, over m_K
E2(Phi)    = min over ball x, sphere y (x != y) of |Phi(x) - phi(y)| / |x - y|, over m_K

Both E values are about 1 for well-behaved maps; values near zero flag a
possible fold (E1) or a point mapped onto the boundary (E2).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels

log = logging.getLogger(__name__)

DEFAULT_K = 40
DEFAULT_L = 10


@dataclass(frozen=True, eq=False)
class SphereGrid:
    K: int
    points: np.ndarray


@dataclass(frozen=True, eq=False)
class CubeBallGrid:
    L: int
    points: np.ndarray


def sphere_grid(K: int = DEFAULT_K) -> SphereGrid:
    """Latitude/longitude grid with steps pi/K; the duplicated poles are kept once."""
    if K < 1:
        raise ValueError("K must be positive")
    j = np.arange(K + 1)
    i = np.arange(2 * K)
    J, I = np.meshgrid(j, i, indexing="ij")
    st, ct = np.sin(np.pi * J / K), np.cos(np.pi * J / K)
    pts = np.stack([st * np.cos(np.pi * I / K), st * np.sin(np.pi * I / K), ct], axis=-1).reshape(-1, 3)
    pts = pts[np.isin(J.ravel(), (0, K), invert=True) | (I.ravel() == 0)]
    # the sine of pi is not exactly zero
    pts[np.abs(pts) < 1e-15] = 0.0
    return SphereGrid(K, _dedupe(pts))


def _dedupe(pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    key = np.round(pts / tol).astype(np.int64)
    _, idx = np.unique(key, axis=0, return_index=True)
    return pts[np.sort(idx)]


def cube_ball_grid(L: int = DEFAULT_L) -> CubeBallGrid:
    """Points (i, j, k) / L with i^2 + j^2 + k^2 <= L^2."""
    if L < 1:
        raise ValueError("L must be positive")
    a = np.arange(-L, L + 1)
    I, J, K = np.meshgrid(a, a, a, indexing="ij")
    keep = I**2 + J**2 + K**2 <= L * L
    pts = np.stack([I[keep], J[keep], K[keep]], axis=1) / L
    return CubeBallGrid(L, pts)


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly uniform points on the unit sphere (golden-angle spiral)."""
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    t = np.pi * (1.0 + np.sqrt(5.0)) * k
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(t), s * np.sin(t), z], axis=1)


def boundary_modulus(boundary, grid: SphereGrid | None = None) -> float:
    """m_K: smallest difference quotient of phi over the sphere grid."""
    grid = grid or sphere_grid()
    if len(grid.points) < 2:
        raise ValueError("sphere grid needs at least two points")
    val = kernels.min_ratio_pairs(grid.points, boundary.at(grid.points))
    if val < 1e-14:
        log.warning("boundary map collapses two sphere-grid points (m_K = %g)", val)
        return 0.0
    return val


def injectivity_measure(m, grid: CubeBallGrid | None = None, mK: float = 1.0) -> float:
    """E1: smallest difference quotient of Phi over the ball grid, divided by m_K."""
    if not mK > 0:
        raise ValueError("m_K must be positive")
    grid = grid or cube_ball_grid()
    return kernels.min_ratio_pairs(grid.points, m(grid.points)) / mK


def into_measure(m, boundary, ball: CubeBallGrid | None = None, sphere: SphereGrid | None = None,
                 mK: float = 1.0) -> float:
    """E2: smallest |Phi(x) - phi(y)| / |x - y| over ball x and sphere y, divided by m_K."""
    if not mK > 0:
        raise ValueError("m_K must be positive")
    ball = ball or cube_ball_grid()
    sphere = sphere or sphere_grid()
    return kernels.min_ratio_cross(ball.points, m(ball.points), sphere.points, boundary.at(sphere.points)) / mK


def measures_3d(m, boundary, K: int = DEFAULT_K, L: int = DEFAULT_L) -> dict:
    sg, bg = sphere_grid(K), cube_ball_grid(L)
    mK = boundary_modulus(boundary, sg)
    out = {"K": K, "L": L, "sphere_points": len(sg.points), "ball_points": len(bg.points), "m_K": mK}
    if mK > 0:
        out["E1"] = injectivity_measure(m, bg, mK)
        out["E2"] = into_measure(m, boundary, bg, sg, mK)
    else:
        out["E1"] = out["E2"] = None
    return out
