"""Orthonormal polynomial bases on the unit disk and ball, and quadratures.

Disk: Logan-Shepp ridge polynomials

    psi_{m,k}(x) = U_m(x . xi_{m,k}) / sqrt(pi),  xi_{m,k} = (cos t_k, sin t_k),
    t_k = k pi / (m + 1),  k = 0..m,

ordered degree-major, k ascending within a degree.

Ball: graded-lexicographic monomials orthonormalized by modified Gram-Schmidt
(two passes) under :class:`BallQuadrature`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np

DISK_TAG = "ridge-ls"
BALL_TAG = "ball-gs"


def gauss_legendre_01(count: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [0, 1]; exact to degree 2*count - 1."""
    if count < 1:
        raise ValueError("Gauss-Legendre rule needs at least one node")
    x, w = np.polynomial.legendre.leggauss(count)
    return 0.5 * (x + 1.0), 0.5 * w


@dataclass(frozen=True)
class DiskQuadrature:
    """Product rule on the disk: (p+1)-point Gauss-Legendre in r, 2p+1 angles.

    Exact for polynomials of total degree <= 2p (the angular trapezoid sum
    aliases the harmonic of order 2p+1).
    """

    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("quadrature order must be nonnegative")
        r, w = gauss_legendre_01(self.p + 1)
        m = 2 * self.p + 1
        t = 2.0 * np.pi * np.arange(m) / m
        R, T = np.meshgrid(r, t, indexing="ij")
        W = np.repeat(2.0 * np.pi / m * w * r, m)
        pts = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", W)

    def integrate(self, g) -> float:
        return float(np.asarray(g(self.points)) @ self.weights)


@dataclass(frozen=True)
class BallQuadrature:
    """Product rule on the ball, exact for polynomials of total degree <= 2p+1.

    (p+2)-point Gauss-Legendre in r with the r^2 factor folded into the
    weights, (p+1)-point Gauss-Legendre in cos(theta), 2p+2 equispaced phi.
    """

    p: int

    def __post_init__(self):
        if self.p < 0:
            raise ValueError("quadrature order must be nonnegative")
        r, wr = gauss_legendre_01(self.p + 2)
        wr = wr * r**2
        ct, wt = np.polynomial.legendre.leggauss(self.p + 1)
        nphi = 2 * self.p + 2
        ph = 2.0 * np.pi * np.arange(nphi) / nphi
        wp = np.full(nphi, 2.0 * np.pi / nphi)
        R, C, P = np.meshgrid(r, ct, ph, indexing="ij")
        S = np.sqrt(1.0 - C**2)
        pts = np.stack([(R * S * np.cos(P)).ravel(), (R * S * np.sin(P)).ravel(), (R * C).ravel()], axis=1)
        W = (wr[:, None, None] * wt[None, :, None] * wp[None, None, :]).ravel()
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", W)

    def integrate(self, g) -> float:
        return float(np.asarray(g(self.points)) @ self.weights)


def integrate_disk(g, q: DiskQuadrature) -> float:
    return q.integrate(g)


def integrate_ball(g, q: BallQuadrature) -> float:
    return q.integrate(g)


def chebyshev_u(m: int, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of U_0..U_m at t; arrays of shape (m+1, *t.shape)."""
    t = np.asarray(t, dtype=float)
    u = np.empty((m + 1,) + t.shape)
    du = np.empty_like(u)
    u[0], du[0] = 1.0, 0.0
    if m >= 1:
        u[1], du[1] = 2.0 * t, 2.0
    for k in range(1, m):
        u[k + 1] = 2.0 * t * u[k] - u[k - 1]
        du[k + 1] = 2.0 * u[k] + 2.0 * t * du[k] - du[k - 1]
    return u, du


class DiskBasis:
    """Ridge-polynomial orthonormal basis of polynomials of degree <= n on the disk."""

    tag = DISK_TAG
    dim = 2

    def __init__(self, degree: int):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        self.degree = degree
        self.size = (degree + 1) * (degree + 2) // 2
        deg, ang = [], []
        for m in range(degree + 1):
            for k in range(m + 1):
                deg.append(m)
                ang.append(k * np.pi / (m + 1))
        self.degrees = np.array(deg)
        self.directions = np.stack([np.cos(ang), np.sin(ang)], axis=1)

    def _ridge(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = x @ self.directions.T  # (npts, size)
        return t

    def values(self, x) -> np.ndarray:
        """Matrix (npts, size) of basis values."""
        t = self._ridge(x)
        out = np.empty_like(t)
        for m in range(self.degree + 1):
            cols = np.nonzero(self.degrees == m)[0]
            u, _ = chebyshev_u(m, t[:, cols])
            out[:, cols] = u[m]
        return out / np.sqrt(np.pi)

    def gradients(self, x) -> np.ndarray:
        """Array (npts, size, 2) of basis gradients."""
        t = self._ridge(x)
        out = np.empty(t.shape + (2,))
        for m in range(self.degree + 1):
            cols = np.nonzero(self.degrees == m)[0]
            _, du = chebyshev_u(m, t[:, cols])
            out[:, cols, :] = du[m][..., None] * self.directions[cols][None, :, :]
        return out / np.sqrt(np.pi)

    def quadrature(self, extra: int = 2) -> DiskQuadrature:
        return DiskQuadrature(self.degree + extra)


def graded_exponents(dim: int, degree: int) -> np.ndarray:
    """Monomial exponents of total degree <= degree, degree-major then lexicographic."""
    rows = []
    for d in range(degree + 1):
        block = []
        for combo in combinations_with_replacement(range(dim), d):
            e = [0] * dim
            for c in combo:
                e[c] += 1
            block.append(tuple(e))
        rows.extend(sorted(set(block), reverse=True))
    return np.array(rows, dtype=int).reshape(-1, dim)


def _monomials(x: np.ndarray, exps: np.ndarray, max_deg: int) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    pw = x[:, :, None] ** np.arange(max_deg + 1)[None, None, :]  # (npts, dim, deg+1)
    out = np.ones((x.shape[0], len(exps)))
    for d in range(x.shape[1]):
        out *= pw[:, d, exps[:, d]]
    return out


class BallBasis:
    """Orthonormal basis of polynomials of degree <= n on the unit ball in R^3.

    ``coeffs[:, j]`` holds the monomial coefficients of the j-th basis
    function; the matrix is upper triangular in graded order.
    """

    tag = BALL_TAG
    dim = 3

    def __init__(self, degree: int):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        self.degree = degree
        self.size = (degree + 1) * (degree + 2) * (degree + 3) // 6
        self.exponents = graded_exponents(3, degree)
        q = BallQuadrature(degree + 1)
        sw = np.sqrt(q.weights)
        V = _monomials(q.points, self.exponents, degree) * sw[:, None]
        C = np.eye(self.size)
        Q = V.copy()
        for j in range(self.size):
            for _ in range(2):
                for i in range(j):
                    h = Q[:, i] @ Q[:, j]
                    Q[:, j] -= h * Q[:, i]
                    C[:, j] -= h * C[:, i]
            nrm = np.linalg.norm(Q[:, j])
            Q[:, j] /= nrm
            C[:, j] /= nrm
        self.coeffs = C

    def values(self, x) -> np.ndarray:
        return _monomials(x, self.exponents, self.degree) @ self.coeffs

    def gradients(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty((x.shape[0], self.size, 3))
        for d in range(3):
            e = self.exponents.copy()
            fac = e[:, d].astype(float)
            e[:, d] = np.maximum(e[:, d] - 1, 0)
            out[:, :, d] = (_monomials(x, e, self.degree) * fac) @ self.coeffs
        return out

    def quadrature(self, extra: int = 2) -> BallQuadrature:
        return BallQuadrature(self.degree + extra)


@lru_cache(maxsize=None)
def get_basis(dim: int, degree: int):
    if dim == 2:
        return DiskBasis(degree)
    if dim == 3:
        return BallBasis(degree)
    raise ValueError(f"unsupported dimension {dim}")


def eval_basis(basis, j: int, x) -> np.ndarray:
    """Value of the j-th (0-based) basis function at x."""
    if not 0 <= j < basis.size:
        raise IndexError(f"basis index {j} out of range 0..{basis.size - 1}")
    return basis.values(x)[:, j]


def grad_basis(basis, j: int, x) -> np.ndarray:
    if not 0 <= j < basis.size:
        raise IndexError(f"basis index {j} out of range 0..{basis.size - 1}")
    return basis.gradients(x)[:, j, :]


def project(f, basis, quadrature) -> np.ndarray:
    """L2 projection coefficients (size, d) of a vector field ``f`` sampled at
    the quadrature nodes."""
    F = np.asarray(f(quadrature.points), dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    return basis.values(quadrature.points).T @ (quadrature.weights[:, None] * F)
