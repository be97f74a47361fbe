"""Boundary parametrizations of the target region.

A boundary map sends the unit circle (or sphere) one-to-one onto the
boundary of the region.  Only a closed set of families is supported, which
keeps configuration files and serialization exact:

* :class:`StarTrig` -- star-like, radial profile a trigonometric polynomial
* :class:`Cassini` -- the ovals of Cassini, ``a > 1``
* :class:`ParametricTrig` -- both coordinates trigonometric polynomials
* :class:`StarSpherical` -- star-like surface in 3D, radial profile a sum of
  products of powers of sines and cosines of the polar/azimuthal angles
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

TWO_PI = 2.0 * np.pi

# reject star-likeness / positivity when the sampled radius drops to this
POSITIVITY_TOL = 1e-9


class BoundaryError(ValueError):
    """Invalid boundary description."""


@dataclass(frozen=True)
class TrigPoly:
    """f(t) = half_a0 + sum_k a_k cos(k t) + b_k sin(k t), k = 1..m."""

    half_a0: float
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    def __post_init__(self):
        c = tuple(float(v) for v in self.cos_coeffs)
        s = tuple(float(v) for v in self.sin_coeffs)
        m = max(len(c), len(s))
        c = c + (0.0,) * (m - len(c))
        s = s + (0.0,) * (m - len(s))
        object.__setattr__(self, "half_a0", float(self.half_a0))
        object.__setattr__(self, "cos_coeffs", c)
        object.__setattr__(self, "sin_coeffs", s)

    @property
    def degree(self) -> int:
        for k in range(len(self.cos_coeffs), 0, -1):
            if self.cos_coeffs[k - 1] != 0.0 or self.sin_coeffs[k - 1] != 0.0:
                return k
        return 0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.full(t.shape, self.half_a0)
        for k, (a, b) in enumerate(zip(self.cos_coeffs, self.sin_coeffs), start=1):
            if a != 0.0:
                out = out + a * np.cos(k * t)
            if b != 0.0:
                out = out + b * np.sin(k * t)
        return out

    def derivative(self) -> "TrigPoly":
        ks = np.arange(1, len(self.cos_coeffs) + 1)
        return TrigPoly(
            0.0,
            tuple(ks * np.asarray(self.sin_coeffs)),
            tuple(-ks * np.asarray(self.cos_coeffs)),
        )

    def to_dict(self) -> dict:
        return {
            "half_a0": self.half_a0,
            "cos": list(self.cos_coeffs),
            "sin": list(self.sin_coeffs),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPoly":
        return cls(d.get("half_a0", 0.0), tuple(d.get("cos", ())), tuple(d.get("sin", ())))


def fourier_coefficients(f: Callable, degree: int, nodes: int) -> TrigPoly:
    """Trapezoidal-rule Fourier coefficients a_0..a_m, b_1..b_m of a periodic f.

    ``f`` is called once with the array of ``nodes`` equispaced angles.  The
    result is exact when f is a trigonometric polynomial of degree d and
    ``nodes >= d + degree + 1``.
    """
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    if nodes < 2 * degree + 1:
        raise ValueError(f"need at least {2 * degree + 1} nodes for degree {degree}, got {nodes}")
    t = TWO_PI * np.arange(nodes) / nodes
    v = np.asarray(f(t), dtype=float)
    k = np.arange(1, degree + 1)[:, None]
    a = 2.0 / nodes * (np.cos(k * t) @ v)
    b = 2.0 / nodes * (np.sin(k * t) @ v)
    return TrigPoly(float(v.mean()), tuple(a), tuple(b))


def _angles_of(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return np.mod(np.arctan2(u[..., 1], u[..., 0]), TWO_PI)


class BoundaryMap2D:
    """Base class of planar boundary maps; evaluate with ``b(theta)``."""

    kind: str = ""
    is_star_like: bool = False
    trig_degree: int | None = None

    def __call__(self, theta) -> np.ndarray:
        raise NotImplementedError

    def radial(self, theta) -> np.ndarray:
        raise BoundaryError(f"{self.kind} boundary is not given by a radial profile")

    def at(self, u) -> np.ndarray:
        """Evaluate at points ``u`` (..., 2) of the unit circle."""
        return self(_angles_of(u))

    @property
    def dim(self) -> int:
        return 2

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check_positive(self):
        t = TWO_PI * np.arange(10_000) / 10_000
        if np.min(self.radial(t)) <= POSITIVITY_TOL:
            raise BoundaryError(f"{self.kind}: radial profile is not positive")


@dataclass(frozen=True)
class StarTrig(BoundaryMap2D):
    radius: TrigPoly
    kind: str = field(default="star_trig", init=False)
    is_star_like: bool = field(default=True, init=False)

    def __post_init__(self):
        self._check_positive()

    @property
    def trig_degree(self) -> int:
        return self.radius.degree + 1

    def radial(self, theta):
        return self.radius(theta)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.radius(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def to_dict(self):
        return {"kind": self.kind, **self.radius.to_dict()}


@dataclass(frozen=True)
class Cassini(BoundaryMap2D):
    a: float
    kind: str = field(default="cassini", init=False)
    is_star_like: bool = field(default=True, init=False)
    trig_degree: None = field(default=None, init=False)

    def __post_init__(self):
        if not self.a > 1.0:
            raise BoundaryError(f"cassini: need a > 1 for a single oval, got {self.a}")

    def radial(self, theta):
        theta = np.asarray(theta, dtype=float)
        s2 = np.sin(2.0 * theta) ** 2
        return np.sqrt(np.cos(2.0 * theta) + np.sqrt(self.a - s2))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        r = self.radial(theta)
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)

    def to_dict(self):
        return {"kind": self.kind, "a": self.a}


@dataclass(frozen=True)
class ParametricTrig(BoundaryMap2D):
    x: TrigPoly
    y: TrigPoly
    kind: str = field(default="parametric_trig", init=False)
    is_star_like: bool = field(default=False, init=False)

    @property
    def trig_degree(self) -> int:
        return max(self.x.degree, self.y.degree)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return np.stack([self.x(theta), self.y(theta)], axis=-1)

    def to_dict(self):
        return {"kind": self.kind, "x": self.x.to_dict(), "y": self.y.to_dict()}


def ellipse(a: float, b: float) -> ParametricTrig:
    return ParametricTrig(TrigPoly(0.0, (a,)), TrigPoly(0.0, (), (b,)))


def unit_circle() -> ParametricTrig:
    return ellipse(1.0, 1.0)


def eval_boundary_2d(b: BoundaryMap2D, theta) -> np.ndarray:
    return b(theta)


def min_radius(b: BoundaryMap2D, samples: int = 10_000) -> float:
    """Radius of the largest origin-centred disk inside a star-like region.

    Dense scan followed by golden-section refinement around the smallest
    sample.
    """
    if not b.is_star_like:
        raise BoundaryError(f"{b.kind} boundary is not star-like")
    t = TWO_PI * np.arange(samples) / samples
    v = b.radial(t)
    i = int(np.argmin(v))
    h = TWO_PI / samples
    f = lambda s: float(b.radial(np.array(s)))
    lo, mid, hi = t[i] - h, t[i], t[i] + h
    if not (f(mid) <= f(lo) and f(mid) <= f(hi)):
        return float(v[i])
    try:
        res = minimize_scalar(f, bracket=(lo, mid, hi), method="golden", tol=1e-12)
    except ValueError:
        # flat profile, no strict bracket
        return float(v[i])
    return float(min(res.fun, v[i]))


@dataclass(frozen=True)
class StarSpherical:
    """Star-like surface x -> rho(theta, phi) x on the unit sphere.

    ``terms`` holds tuples (c, p, q, r, s) for
    c * cos(theta)^p * sin(theta)^q * cos(phi)^r * sin(phi)^s, with theta the
    polar angle measured from the z axis.
    """

    terms: tuple[tuple[float, int, int, int, int], ...]
    kind: str = field(default="star_spherical", init=False)
    is_star_like: bool = field(default=True, init=False)

    def __post_init__(self):
        terms = []
        for t in self.terms:
            if len(t) != 5:
                raise BoundaryError("star_spherical terms are (c, p, q, r, s)")
            c, *ex = t
            if any(int(e) != e or e < 0 for e in ex):
                raise BoundaryError("star_spherical exponents must be nonnegative integers")
            terms.append((float(c), *(int(e) for e in ex)))
        object.__setattr__(self, "terms", tuple(terms))
        th = np.linspace(0.0, np.pi, 200)
        ph = TWO_PI * np.arange(400) / 400
        T, P = np.meshgrid(th, ph, indexing="ij")
        if np.min(self.radial(T, P)) <= POSITIVITY_TOL:
            raise BoundaryError("star_spherical: radial profile is not positive")

    @property
    def dim(self) -> int:
        return 3

    def radial(self, theta, phi):
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        ct, st, cp, sp = np.cos(theta), np.sin(theta), np.cos(phi), np.sin(phi)
        out = np.zeros(np.broadcast(theta, phi).shape)
        for c, p, q, r, s in self.terms:
            out = out + c * ct**p * st**q * cp**r * sp**s
        return out

    def radial_at(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        theta = np.arccos(np.clip(u[..., 2] / np.linalg.norm(u, axis=-1), -1.0, 1.0))
        phi = np.arctan2(u[..., 1], u[..., 0])
        return self.radial(theta, phi)

    def __call__(self, theta, phi) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        r = self.radial(theta, phi)
        st = np.sin(theta)
        return np.stack([r * st * np.cos(phi), r * st * np.sin(phi), r * np.cos(theta) + 0 * phi], axis=-1)

    def at(self, u) -> np.ndarray:
        """Evaluate at unit vectors ``u`` of shape (..., 3)."""
        u = np.asarray(u, dtype=float)
        return self.radial_at(u)[..., None] * u

    def to_dict(self):
        return {"kind": self.kind, "terms": [list(t) for t in self.terms]}


BoundaryMap3D = StarSpherical


def sphere(c: float = 1.0) -> StarSpherical:
    return StarSpherical(((c, 0, 0, 0, 0),))


def boundary_from_dict(d: dict):
    """Build a boundary from its JSON block (``kind`` discriminator)."""
    kind = d.get("kind")
    try:
        if kind == "star_trig":
            return StarTrig(TrigPoly.from_dict(d))
        if kind == "cassini":
            return Cassini(float(d["a"]))
        if kind == "parametric_trig":
            return ParametricTrig(TrigPoly.from_dict(d["x"]), TrigPoly.from_dict(d["y"]))
        if kind == "ellipse":
            return ellipse(float(d["a"]), float(d["b"]))
        if kind == "star_spherical":
            return StarSpherical(tuple(tuple(t) for t in d["terms"]))
    except KeyError as exc:
        raise BoundaryError(f"boundary.{exc.args[0]} is required for kind {kind!r}") from None
    raise BoundaryError(f"unknown boundary kind {kind!r}")


def star_trig(half_a0: float, cos: Sequence[float] = (), sin: Sequence[float] = ()) -> StarTrig:
    return StarTrig(TrigPoly(half_a0, tuple(cos), tuple(sin)))
