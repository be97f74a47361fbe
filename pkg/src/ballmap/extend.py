"""Initial extensions of a boundary map into the disk or ball.

All evaluators take an array of points of shape (npts, d) and return the
image points (npts, d).

* :class:`HarmonicMap2D` -- componentwise harmonic (Poisson) extension of a
  truncated Fourier series.
* :class:`SmoothBlendMap` -- blends the radial profile with a constant
  scaling through T(r; kappa) = exp(kappa (1 - 1/r)), optionally with an
  identity core of radius delta.
* :func:`integral_extend_2d` / :func:`integral_extend_3d` -- average over all
  chords through a point of the linear interpolant between the chord's two
  boundary images.
* :func:`radial_extend_3d` -- x -> rho(x/|x|) x.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .basis import gauss_legendre_01
from .boundary import TWO_PI, BoundaryError, BoundaryMap2D, StarSpherical, fourier_coefficients, min_radius

log = logging.getLogger(__name__)

# within this distance of the rim the integral operator returns phi directly
RIM_GUARD = 1e-12


def _points(x, d=None):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if d is not None and x.shape[1] != d:
        raise ValueError(f"expected points of dimension {d}, got {x.shape[1]}")
    return x


class HarmonicMap2D:
    """F(r, t) = a0/2 + sum_k r^k (a_k cos kt + b_k sin kt), per component."""

    dim = 2

    def __init__(self, a: np.ndarray, b: np.ndarray):
        # a, b: (2, n+1); b[:, 0] unused
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.degree = self.a.shape[1] - 1

    @classmethod
    def from_boundary(cls, boundary: BoundaryMap2D, degree: int, nodes: int) -> "HarmonicMap2D":
        if nodes < 2 * degree + 2:
            raise ValueError(f"need nodes >= {2 * degree + 2} for degree {degree}")
        a = np.zeros((2, degree + 1))
        b = np.zeros((2, degree + 1))
        for c in range(2):
            tp = fourier_coefficients(lambda t: boundary(t)[:, c], degree, nodes)
            a[c, 0] = 2.0 * tp.half_a0
            a[c, 1:] = tp.cos_coeffs
            b[c, 1:] = tp.sin_coeffs
        return cls(a, b)

    def _powers(self, x):
        z = x[:, 0] + 1j * x[:, 1]
        return z[:, None] ** np.arange(self.degree + 1)[None, :]  # r^k e^{ikt}

    def __call__(self, x) -> np.ndarray:
        x = _points(x, 2)
        zk = self._powers(x)
        out = 0.5 * self.a[:, 0][None, :] + (zk.real[:, 1:] @ self.a[:, 1:].T + zk.imag[:, 1:] @ self.b[:, 1:].T)
        return out

    def jacobian(self, x) -> np.ndarray:
        """Analytic Jacobian (npts, 2, 2) from the termwise derivatives."""
        x = _points(x, 2)
        zk = self._powers(x)[:, :-1]  # z^(k-1), k = 1..n
        k = np.arange(1, self.degree + 1)
        ka, kb = k * self.a[:, 1:], k * self.b[:, 1:]
        dx1 = zk.real @ ka.T + zk.imag @ kb.T
        dx2 = -zk.imag @ ka.T + zk.real @ kb.T
        return np.stack([dx1, dx2], axis=-1)


def harmonic_extend_2d(boundary: BoundaryMap2D, degree: int, nodes: int) -> HarmonicMap2D:
    return HarmonicMap2D.from_boundary(boundary, degree, nodes)


def blend_T(r, kappa: float) -> np.ndarray:
    """T(r; kappa) = exp(kappa (1 - 1/r)) for r > 0, and T(0) = 0."""
    r = np.asarray(r, dtype=float)
    safe = np.where(r > 0.0, r, 1.0)
    return np.where(r > 0.0, np.exp(kappa * (1.0 - 1.0 / safe)), 0.0)


def _radial_profile(boundary):
    if isinstance(boundary, StarSpherical):
        return 3, boundary.radial_at
    if not boundary.is_star_like:
        raise BoundaryError(f"{boundary.kind} boundary is not star-like")
    return 2, lambda u: boundary.radial(np.arctan2(u[:, 1], u[:, 0]))


def _sphere_min_radius(boundary: StarSpherical) -> float:
    th = np.linspace(0.0, np.pi, 400)
    ph = TWO_PI * np.arange(800) / 800
    T, P = np.meshgrid(th, ph, indexing="ij")
    return float(boundary.radial(T, P).min())


class SmoothBlendMap:
    """Blend of the star-like boundary profile with a uniform scaling.

    Without ``delta``:
        Phi(x) = [T(r) rho(t) + (1 - T(r)) omega] x,
    with ``delta`` (identity core on |x| <= delta):
        Phi(x) = [T(s) rho(t) + 1 - T(s)] x,  s = (r - delta) / (1 - delta).
    """

    def __init__(self, boundary, kappa: float, omega: float | None = None, delta: float | None = None,
                 strict: bool = True):
        self.boundary = boundary
        self.dim, self._rho = _radial_profile(boundary)
        if not kappa > 0.0:
            raise ValueError(f"kappa must be positive, got {kappa}")
        w0 = _sphere_min_radius(boundary) if self.dim == 3 else min_radius(boundary)
        self.omega0 = w0
        if delta is None:
            if omega is None or not omega > 0.0:
                raise ValueError(f"omega must be positive, got {omega}")
            if not omega < w0:
                msg = f"omega must lie in (0, {w0:.6g}) for a guaranteed injective blend, got {omega}"
                if strict:
                    raise ValueError(msg)
                log.warning(msg)
        else:
            if not 0.0 < delta < 1.0:
                raise ValueError(f"delta must lie in (0, 1), got {delta}")
            if not delta < w0:
                raise ValueError(f"core disk of radius {delta} is not inside the region (min radius {w0:.6g})")
        self.kappa = float(kappa)
        self.omega = None if omega is None else float(omega)
        self.delta = None if delta is None else float(delta)

    def scale(self, x) -> np.ndarray:
        """The scalar factor multiplying x."""
        x = _points(x, self.dim)
        r = np.linalg.norm(x, axis=1)
        u = x / np.where(r > 0, r, 1.0)[:, None]
        u[r == 0] = np.eye(self.dim)[0]
        rho = self._rho(u)
        if self.delta is None:
            t = blend_T(r, self.kappa)
            return t * rho + (1.0 - t) * self.omega
        s = np.clip((r - self.delta) / (1.0 - self.delta), 0.0, None)
        t = blend_T(s, self.kappa)
        return np.where(r <= self.delta, 1.0, t * rho + 1.0 - t)

    def __call__(self, x) -> np.ndarray:
        x = _points(x, self.dim)
        return self.scale(x)[:, None] * x

    def radial_section(self, r, theta) -> np.ndarray:
        """f(r) with Phi(r u) = f(r) u, for the direction at angle theta (2D)."""
        r = np.asarray(r, dtype=float)
        x = np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1).reshape(-1, 2)
        return (self.scale(x) * np.linalg.norm(x, axis=1)).reshape(r.shape)

    def jacobian(self, x, h: float = 1e-6) -> np.ndarray:
        return fd_jacobian(self, x, h)


def smooth_blend_eval(m: SmoothBlendMap, x) -> np.ndarray:
    return m(x)


def fd_jacobian(f, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian (npts, d, d); one-sided (inward) within 2h of the rim."""
    x = _points(x)
    n, d = x.shape
    J = np.empty((n, d, d))
    rim = np.linalg.norm(x, axis=1) > 1.0 - 2.0 * h
    for k in range(d):
        e = np.zeros(d)
        e[k] = h
        fp, fm = f(x + e), f(x - e)
        J[:, :, k] = (fp - fm) / (2.0 * h)
        if rim.any():
            xr = x[rim]
            # second-order one-sided stencil pointing into the disk
            sgn = np.where(xr[:, k] > 0, -1.0, 1.0)[:, None]
            f0 = f(xr)
            f1 = f(xr + sgn * e)
            f2 = f(xr + 2.0 * sgn * e)
            J[rim, :, k] = sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h)
    return J


@dataclass(frozen=True)
class ChordFrame:
    point: np.ndarray
    theta: float
    r_plus: float
    r_minus: float
    p_plus: np.ndarray
    p_minus: np.ndarray


def chord_frame(P, theta: float) -> ChordFrame:
    """Intersections of the line through P with direction angle theta and the circle."""
    P = np.asarray(P, dtype=float)
    r = float(np.hypot(P[0], P[1]))
    if r >= 1.0:
        raise ValueError("chord_frame needs an interior point |P| < 1")
    alpha = float(np.arctan2(P[1], P[0]))
    c, s = np.cos(theta - alpha), np.sin(theta - alpha)
    root = np.sqrt(1.0 - r * r * s * s)
    r_plus = -r * c + root
    r_minus = r * c + root
    eta = np.array([np.cos(theta), np.sin(theta)])
    return ChordFrame(P, float(theta), float(r_plus), float(r_minus), P + r_plus * eta, P - r_minus * eta)


def kernel_pair(r, theta) -> tuple[np.ndarray, np.ndarray]:
    """Weight k(r, t) and boundary angle psi*(r, t) of the rotated chord integral.

    Arrays broadcast; at r = 1 the piecewise limits are used.
    """
    r, theta = np.broadcast_arrays(np.asarray(r, dtype=float), np.asarray(theta, dtype=float))
    th = np.mod(theta, TWO_PI)
    th = np.where((theta > 0) & (th == 0.0), TWO_PI, th)
    s2 = np.sin(th) ** 2
    c = np.cos(th)
    root = np.sqrt(np.clip(1.0 - r * r * s2, 0.0, None))
    inner = r < 1.0
    safe = np.where(inner, root, 1.0)
    k = np.where(inner, 1.0 + r * c / safe, 0.0)
    u = np.clip(r * s2 + c * root, -1.0, 1.0)
    base = np.arccos(u)
    psi = np.where(th <= np.pi, base, TWO_PI - base)
    # r = 1 branches
    half, three_half = 0.5 * np.pi, 1.5 * np.pi
    k1 = np.where((th < half) | (th > three_half), 2.0, 0.0)
    psi1 = np.where(th <= half, 0.0, np.where(th >= three_half, TWO_PI, 2.0 * th - np.pi))
    k = np.where(inner, k, k1)
    psi = np.where(inner, psi, psi1)
    return k, psi


def integral_extend_2d(boundary: BoundaryMap2D, P, nodes: int = 100) -> np.ndarray:
    """Chord-interpolation extension at points P (npts, 2), trapezoidal rule in
    the chord angle with ``nodes`` points; points on the rim map to phi."""
    if nodes < 8:
        raise ValueError("integral extension needs at least 8 nodes")
    P = _points(P, 2)
    r = np.hypot(P[:, 0], P[:, 1])
    alpha = np.arctan2(P[:, 1], P[:, 0])
    out = np.empty_like(P)
    rim = r >= 1.0 - RIM_GUARD
    if rim.any():
        out[rim] = boundary(alpha[rim])
    idx = np.nonzero(~rim)[0]
    t = TWO_PI * np.arange(nodes) / nodes
    for chunk in np.array_split(idx, max(1, len(idx) * nodes // 2_000_000 + 1)):
        if len(chunk) == 0:
            continue
        k, psi = kernel_pair(r[chunk][:, None], t[None, :])
        vals = boundary(psi + alpha[chunk][:, None])  # (m, nodes, 2)
        out[chunk] = np.einsum("mn,mnc->mc", k, vals) / nodes
    return out


class IntegralMap2D:
    def __init__(self, boundary: BoundaryMap2D, nodes: int = 100):
        self.boundary = boundary
        self.nodes = nodes
        self.dim = 2

    def __call__(self, x):
        return integral_extend_2d(self.boundary, x, self.nodes)

    def jacobian(self, x, h: float = 1e-6):
        return fd_jacobian(self, x, h)


def integral_extend_3d(boundary: StarSpherical, P, n_theta: int = 64, n_omega: int = 32) -> np.ndarray:
    """Average of the chord interpolant over all line directions through P.

    Directions eta(t, w) = (sin w cos t, sin w sin t, cos w) over the upper
    hemisphere, trapezoidal in t and Gauss-Legendre in w, weighted by sin w.
    """
    P = _points(P, 3)
    r = np.linalg.norm(P, axis=1)
    out = np.empty_like(P)
    rim = r >= 1.0 - RIM_GUARD
    if rim.any():
        out[rim] = boundary.at(P[rim] / r[rim, None])
    t = TWO_PI * np.arange(n_theta) / n_theta
    g, wg = gauss_legendre_01(n_omega)
    w = 0.5 * np.pi * g
    ww = 0.5 * np.pi * wg * np.sin(w)
    T, W = np.meshgrid(t, w, indexing="ij")
    eta = np.stack([np.sin(W) * np.cos(T), np.sin(W) * np.sin(T), np.cos(W)], axis=-1).reshape(-1, 3)
    weights = (np.full(n_theta, 1.0 / n_theta)[:, None] * ww[None, :]).ravel()
    idx = np.nonzero(~rim)[0]
    for chunk in np.array_split(idx, max(1, len(idx) * len(eta) // 1_000_000 + 1)):
        if len(chunk) == 0:
            continue
        Pc = P[chunk]
        pe = Pc @ eta.T  # (m, ndir)
        root = np.sqrt(pe**2 + 1.0 - np.sum(Pc**2, axis=1)[:, None])
        rp, rm = -pe + root, pe + root
        Pp = Pc[:, None, :] + rp[..., None] * eta[None]
        Pm = Pc[:, None, :] - rm[..., None] * eta[None]
        Pp /= np.linalg.norm(Pp, axis=-1, keepdims=True)
        Pm /= np.linalg.norm(Pm, axis=-1, keepdims=True)
        fp = boundary.at(Pp)
        fm = boundary.at(Pm)
        star = (rm[..., None] * fp + rp[..., None] * fm) / (rp + rm)[..., None]
        out[chunk] = np.einsum("n,mnc->mc", weights, star)
    return out


class IntegralMap3D:
    def __init__(self, boundary: StarSpherical, n_theta: int = 64, n_omega: int = 32):
        self.boundary = boundary
        self.n_theta = n_theta
        self.n_omega = n_omega
        self.dim = 3

    def __call__(self, x):
        return integral_extend_3d(self.boundary, x, self.n_theta, self.n_omega)

    def jacobian(self, x, h: float = 1e-6):
        return fd_jacobian(self, x, h)


def radial_extend_3d(boundary: StarSpherical, x) -> np.ndarray:
    """x -> rho(x / |x|) x, with value 0 at the origin."""
    x = _points(x, 3)
    r = np.linalg.norm(x, axis=1)
    u = x / np.where(r > 0, r, 1.0)[:, None]
    u[r == 0] = (0.0, 0.0, 1.0)
    return boundary.radial_at(u)[:, None] * x


class RadialMap3D:
    def __init__(self, boundary: StarSpherical):
        self.boundary = boundary
        self.dim = 3

    def __call__(self, x):
        return radial_extend_3d(self.boundary, x)

    def jacobian(self, x, h: float = 1e-6):
        return fd_jacobian(self, x, h)
