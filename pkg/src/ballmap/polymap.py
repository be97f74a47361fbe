"""Polynomial mappings Phi(x) = sum_j alpha_j psi_j(x) and their quality.

Mapping files are JSON documents::

    {"version": 1, "dim": 2, "degree": 3, "basis": "ridge-ls",
     "coeffs": [[...], ...]}          # size x dim, row j = alpha_j
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .basis import BALL_TAG, DISK_TAG, get_basis, project

FORMAT_VERSION = 1
_TAGS = {2: DISK_TAG, 3: BALL_TAG}


class MapFileError(ValueError):
    """Malformed mapping file."""


class VersionMismatchError(MapFileError):
    pass


class SizeMismatchError(MapFileError):
    pass


class UnsupportedBasisError(MapFileError):
    pass


def basis_size(dim: int, degree: int) -> int:
    if dim == 2:
        return (degree + 1) * (degree + 2) // 2
    return (degree + 1) * (degree + 2) * (degree + 3) // 6


@dataclass(frozen=True, eq=False)
class PolyMap:
    dim: int
    degree: int
    coeffs: np.ndarray
    basis_tag: str = ""

    def __post_init__(self):
        if self.dim not in _TAGS:
            raise ValueError(f"unsupported dimension {self.dim}")
        tag = self.basis_tag or _TAGS[self.dim]
        if tag != _TAGS[self.dim]:
            raise UnsupportedBasisError(f"basis {tag!r} does not match dimension {self.dim}")
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (basis_size(self.dim, self.degree), self.dim):
            raise SizeMismatchError(
                f"coeffs shape {c.shape} != ({basis_size(self.dim, self.degree)}, {self.dim})"
            )
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "basis_tag", tag)

    @property
    def basis(self):
        return get_basis(self.dim, self.degree)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.basis.values(x) @ self.coeffs

    def jacobian(self, x) -> np.ndarray:
        """(npts, d, d) with J[:, i, k] = d Phi_i / d x_k."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.einsum("jc,njk->nck", self.coeffs, self.basis.gradients(x))

    def with_coeffs(self, coeffs) -> "PolyMap":
        return PolyMap(self.dim, self.degree, coeffs)


def eval_map(m: PolyMap, x) -> np.ndarray:
    return m(x)


def jacobian(m: PolyMap, x) -> np.ndarray:
    return m.jacobian(x)


def project_map(f, dim: int, degree: int, quad_order: int | None = None) -> PolyMap:
    """Orthogonal projection of the extension ``f`` onto polynomials of degree <= n."""
    basis = get_basis(dim, degree)
    q = basis.quadrature() if quad_order is None else type(basis.quadrature())(quad_order)
    return PolyMap(dim, degree, project(f, basis, q))


def identity_map(dim: int, degree: int = 1) -> PolyMap:
    return project_map(lambda x: x, dim, degree)


# -- evaluation grids --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class EvalGrid:
    dim: int
    points: np.ndarray
    label: str = ""


def polar_grid(circles: int = 30) -> EvalGrid:
    """Circles r = j/P (j = 0..P) crossed with rays t = pi j / P (j = 0..2P-1)."""
    P = circles
    r = np.arange(1, P + 1) / P
    t = np.pi * np.arange(2 * P) / P
    R, T = np.meshgrid(r, t, indexing="ij")
    pts = np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
    pts = np.vstack([np.zeros((1, 2)), pts])
    return EvalGrid(2, pts, f"polar-{P}")


def spherical_grid(shells: int = 12, K: int = 24) -> EvalGrid:
    """Shells r = j/S (j = 0..S) crossed with the angular grid t = pi i/K,
    p = pi l/K (poles deduplicated)."""
    from .quality import sphere_grid

    u = sphere_grid(K).points
    r = np.arange(1, shells + 1) / shells
    pts = (r[:, None, None] * u[None, :, :]).reshape(-1, 3)
    pts = np.vstack([np.zeros((1, 3)), pts])
    return EvalGrid(3, pts, f"spherical-{shells}-{K}")


def quadrature_ball_grid(p: int = 10, rim: int = 1200) -> EvalGrid:
    """Nodes of BallQuadrature(p) (p + 2 radial nodes) plus ``rim`` Fibonacci
    points on the unit sphere."""
    from .basis import BallQuadrature
    from .quality import fibonacci_sphere

    pts = np.vstack([BallQuadrature(p).points, fibonacci_sphere(rim)])
    return EvalGrid(3, pts, f"ballquad-{p}-rim-{rim}")


def standard_grid(dim: int) -> EvalGrid:
    return polar_grid(30) if dim == 2 else quadrature_ball_grid()


@dataclass
class QualityReport:
    lam: float
    det_min: float
    det_max: float
    boundary_error: float = float("nan")
    nonpositive: int = 0
    grid: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        extra = d.pop("extra")
        d.update(extra)
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def det_values(jac: np.ndarray) -> np.ndarray:
    if jac.shape[-1] == 2:
        return jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    return np.linalg.det(jac)


def lambda_from_dets(det: np.ndarray) -> tuple[float, float, float, int]:
    a = np.abs(det)
    lo, hi = float(a.min()), float(a.max())
    lam = hi / lo if lo > 0.0 else math.inf
    return lam, lo, hi, int(np.count_nonzero(det <= 0.0))


def lambda_ratio(m, grid: EvalGrid | None = None) -> QualityReport:
    """max |det DPhi| / min |det DPhi| over the grid.

    Works for any map exposing ``jacobian(x)``; nonpositive determinants are
    counted since a sign change certifies a fold.
    """
    grid = grid or standard_grid(m.dim)
    lam, lo, hi, bad = lambda_from_dets(det_values(m.jacobian(grid.points)))
    return QualityReport(lam, lo, hi, nonpositive=bad, grid=grid.label)


def rim_points(dim: int, samples: int) -> np.ndarray:
    if dim == 2:
        t = 2.0 * np.pi * np.arange(samples) / samples
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    from .quality import fibonacci_sphere

    return fibonacci_sphere(samples)


def boundary_error(m, boundary, samples: int = 720) -> float:
    """max over equispaced rim samples of |Phi(x) - phi(x)|."""
    if samples < 16:
        raise ValueError("boundary_error needs at least 16 samples")
    u = rim_points(m.dim, samples)
    return float(np.max(np.linalg.norm(m(u) - boundary.at(u), axis=1)))


def quality_report(m, boundary=None, grid: EvalGrid | None = None, samples: int = 720) -> QualityReport:
    rep = lambda_ratio(m, grid)
    if boundary is not None:
        rep.boundary_error = boundary_error(m, boundary, samples)
    return rep


# -- files -------------------------------------------------------------------

def map_to_dict(m: PolyMap) -> dict:
    return {
        "version": FORMAT_VERSION,
        "dim": m.dim,
        "degree": m.degree,
        "basis": m.basis_tag,
        "coeffs": [[float(v) for v in row] for row in m.coeffs],
    }


def map_from_dict(d: dict) -> PolyMap:
    if not isinstance(d, dict):
        raise MapFileError("mapping document must be a JSON object")
    missing = {"version", "dim", "degree", "basis", "coeffs"} - d.keys()
    if missing:
        raise MapFileError(f"mapping file lacks field(s): {', '.join(sorted(missing))}")
    if d["version"] != FORMAT_VERSION:
        raise VersionMismatchError(f"mapping file version {d['version']!r}, expected {FORMAT_VERSION}")
    dim, degree, tag = d["dim"], d["degree"], d["basis"]
    if dim not in _TAGS or not isinstance(degree, int) or degree < 0:
        raise MapFileError(f"invalid dim/degree ({dim!r}, {degree!r})")
    if tag not in _TAGS.values():
        raise UnsupportedBasisError(f"unsupported basis {tag!r}")
    try:
        c = np.array(d["coeffs"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise MapFileError(f"coeffs is not a numeric matrix: {exc}") from None
    if c.ndim != 2:
        raise MapFileError("coeffs must be a matrix")
    return PolyMap(dim, degree, c, tag)


def save_map(m: PolyMap, path) -> None:
    # json writes floats with repr, which round-trips exactly
    Path(path).write_text(json.dumps(map_to_dict(m), indent=1) + "\n")


def load_map(path) -> PolyMap:
    try:
        d = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MapFileError(f"{path}: not valid JSON ({exc})") from None
    return map_from_dict(d)
