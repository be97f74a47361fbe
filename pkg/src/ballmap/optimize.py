"""Boundary-constrained improvement of polynomial mappings.

The interpolation conditions Phi(z_j) = phi(z_j) read A alpha = phi with
A[j, i] = psi_i(z_j).  With the SVD A = U diag(s) V^T the coefficients split
as alpha = V [gamma; delta]: gamma is fixed by the constraints and delta
(size N - q per component) is free, so any objective of alpha becomes an
unconstrained function of delta.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize as spo

from . import kernels
from .polymap import EvalGrid, PolyMap, det_values, lambda_from_dets, rim_points, standard_grid

log = logging.getLogger(__name__)

# A is rejected when sigma_min < RANK_TOL * sigma_max
RANK_TOL = 1e-10
SIGMA_MIN_3D = 0.5
FD_STEP = 1e-6


class ConstraintError(ValueError):
    pass


class NonFiniteObjective(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ConstraintSet:
    points: np.ndarray   # (q, d) on the unit sphere
    targets: np.ndarray  # (q, d) boundary values
    A: np.ndarray        # (q, N) basis values

    @property
    def q(self) -> int:
        return self.A.shape[0]

    def residual(self, coeffs) -> float:
        return float(np.max(np.abs(self.A @ coeffs - self.targets)))


def _check_rank(A: np.ndarray, what: str) -> np.ndarray:
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] < RANK_TOL * s[0]:
        raise ConstraintError(f"{what}: interpolation matrix is rank deficient "
                              f"(sigma_min/sigma_max = {s[-1] / s[0]:.3g})")
    return s


def build_constraints_2d(boundary, basis, q_n: int | None = None) -> ConstraintSet:
    """Interpolation at q_n equispaced points of the circle (default 2n+1)."""
    n = basis.degree
    q = 2 * n + 1 if q_n is None else int(q_n)
    if not 1 <= q <= 2 * n + 1:
        raise ConstraintError(f"q_n = {q} must lie in 1..2n+1 = {2 * n + 1} for degree {n}")
    t = 2.0 * np.pi * np.arange(q) / q
    z = np.stack([np.cos(t), np.sin(t)], axis=1)
    A = basis.values(z)
    _check_rank(A, f"degree {n}, q_n = {q}")
    return ConstraintSet(z, boundary(t), A)


def load_sphere_points(path) -> np.ndarray:
    """Read a point file: one "x y z" triple per line."""
    try:
        pts = np.loadtxt(path, ndmin=2)
    except ValueError as exc:
        raise ConstraintError(f"{path}: malformed point file ({exc})") from None
    if pts.shape[1] != 3:
        raise ConstraintError(f"{path}: expected 3 columns, got {pts.shape[1]}")
    if np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0)) > 1e-10:
        raise ConstraintError(f"{path}: points are not unit vectors to 1e-10")
    return pts


def save_sphere_points(points: np.ndarray, path) -> None:
    np.savetxt(path, points, fmt="%.17g")


def build_constraints_3d(boundary, basis, point_file=None, points=None) -> ConstraintSet:
    """Interpolation at (n+1)^2 points of the sphere read from ``point_file``
    (or passed directly); the set must keep sigma_min(A) >= 0.5."""
    n = basis.degree
    if points is None:
        if point_file is None:
            from .spherepts import packaged_point_file

            point_file = packaged_point_file(n)
        points = load_sphere_points(point_file)
    points = np.asarray(points, dtype=float)
    if len(points) != (n + 1) ** 2:
        raise ConstraintError(f"degree {n} needs {(n + 1) ** 2} sphere points, got {len(points)}")
    A = basis.values(points)
    s = _check_rank(A, f"degree {n}, {len(points)} sphere points")
    if s[-1] < SIGMA_MIN_3D:
        raise ConstraintError(f"point set rejected: sigma_min(A) = {s[-1]:.3g} < {SIGMA_MIN_3D}")
    return ConstraintSet(points, boundary.at(points), A)


class ReducedParametrization:
    """Affine parametrization alpha(delta) of all coefficient matrices that
    satisfy the constraints."""

    def __init__(self, constraints: ConstraintSet, dim: int, degree: int):
        self.constraints = constraints
        self.dim = dim
        self.degree = degree
        A = constraints.A
        q, N = A.shape
        U, s, Vt = np.linalg.svd(A, full_matrices=True)
        if s[-1] < RANK_TOL * s[0]:
            raise ConstraintError("interpolation matrix is rank deficient")
        self.singular_values = s
        self.gamma = (U.T @ constraints.targets) / s[:, None]  # (q, d)
        self.row_basis = Vt[:q]    # (q, N)
        self.null_basis = Vt[q:]   # (N - q, N)
        self.particular = self.row_basis.T @ self.gamma  # minimum-norm solution

    @property
    def n_free(self) -> int:
        return self.null_basis.shape[0] * self.dim

    def coeffs(self, delta) -> np.ndarray:
        d = np.asarray(delta, dtype=float).reshape(self.null_basis.shape[0], self.dim)
        return self.particular + self.null_basis.T @ d

    def assemble(self, delta) -> PolyMap:
        return PolyMap(self.dim, self.degree, self.coeffs(delta))

    def split(self, coeffs) -> np.ndarray:
        """Free part delta of a coefficient matrix (its gamma part is discarded)."""
        return (self.null_basis @ np.asarray(coeffs, dtype=float)).ravel()


def reduce(constraints: ConstraintSet, dim: int, degree: int) -> ReducedParametrization:
    return ReducedParametrization(constraints, dim, degree)


def assemble(rp: ReducedParametrization, delta) -> PolyMap:
    return rp.assemble(delta)


# -- objectives ---------------------------------------------------------------

class LambdaObjective:
    """delta -> max |det DPhi| / min |det DPhi| over a fixed grid."""

    smooth = False

    def __init__(self, rp: ReducedParametrization, grid: EvalGrid | None = None):
        from .basis import get_basis

        self.rp = rp
        self.grid = grid or standard_grid(rp.dim)
        G = get_basis(rp.dim, rp.degree).gradients(self.grid.points)  # (npts, N, d)
        npts, N, d = G.shape
        Gm = G.transpose(1, 0, 2).reshape(N, npts * d)
        self._base = (rp.particular.T @ Gm).reshape(d, npts, d)
        self._H = rp.null_basis @ Gm  # (N - q, npts * d)
        self._shape = (d, npts, d)
        self.nfev = 0

    def dets(self, delta) -> np.ndarray:
        d = np.asarray(delta, dtype=float).reshape(-1, self.rp.dim)
        J = self._base + (d.T @ self._H).reshape(self._shape)  # J[c, n, k]
        if self.rp.dim == 2:
            return J[0, :, 0] * J[1, :, 1] - J[0, :, 1] * J[1, :, 0]
        return det_values(J.transpose(1, 0, 2))

    def __call__(self, delta) -> float:
        self.nfev += 1
        return lambda_from_dets(self.dets(delta))[0]


@dataclass
class EnergyConfig:
    """Lattice density k1 (points (1/k1) Z^d inside the open ball), rim count L1
    and exponent alpha.  Unset k1 picks the smallest lattice with at least
    N_n points; unset L1 is 20 k1."""

    k1: int | None = None
    L1: int | None = None
    alpha: float = 2.0

    def __post_init__(self):
        if self.k1 is not None and self.k1 < 1:
            raise ValueError("k1 must be >= 1")
        if self.L1 is not None and self.L1 < 3:
            raise ValueError("L1 must be >= 3")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def interior_lattice(dim: int, k1: int) -> np.ndarray:
    a = np.arange(-k1, k1 + 1)
    mesh = np.meshgrid(*([a] * dim), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return pts[np.sum(pts**2, axis=1) < k1 * k1] / k1


def resolve_energy_config(cfg: EnergyConfig, dim: int, size: int) -> tuple[int, int]:
    k1 = cfg.k1
    if k1 is None:
        k1 = 1
        while len(interior_lattice(dim, k1)) < size:
            k1 += 1
    L1 = cfg.L1 if cfg.L1 is not None else 20 * k1
    return k1, L1


def energy_rim_points(dim: int, L1: int) -> np.ndarray:
    if dim == 2:
        t = 2.0 * np.pi * np.arange(1, L1 + 1) / L1
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    return rim_points(3, L1)


class EnergyObjective:
    """delta -> pair energy of interior lattice images plus their interaction
    with the images of rim points, with analytic gradient."""

    smooth = True

    def __init__(self, rp: ReducedParametrization, cfg: EnergyConfig | None = None):
        from .basis import get_basis

        self.rp = rp
        self.cfg = cfg or EnergyConfig()
        basis = get_basis(rp.dim, rp.degree)
        self.k1, self.L1 = resolve_energy_config(self.cfg, rp.dim, basis.size)
        self.xi = interior_lattice(rp.dim, self.k1)
        self.zeta = energy_rim_points(rp.dim, self.L1)
        self.Vxi = basis.values(self.xi)
        self.Vzeta = basis.values(self.zeta)
        self.nfev = 0

    @property
    def K1(self) -> int:
        return len(self.xi)

    def images(self, delta):
        c = self.rp.coeffs(delta)
        return self.Vxi @ c, self.Vzeta @ c

    def value_and_grad(self, delta):
        self.nfev += 1
        Y, Z = self.images(delta)
        e, gY, gZ = kernels.pair_energy(Y, Z, self.cfg.alpha, grad=True)
        if not math.isfinite(e):
            return math.inf, np.zeros(self.rp.n_free)
        gc = self.Vxi.T @ gY + self.Vzeta.T @ gZ
        return e, (self.rp.null_basis @ gc).ravel()

    def __call__(self, delta) -> float:
        self.nfev += 1
        Y, Z = self.images(delta)
        return kernels.pair_energy(Y, Z, self.cfg.alpha, grad=False)[0]

    def gradient(self, delta) -> np.ndarray:
        return self.value_and_grad(delta)[1]


def objective_lambda(rp, delta, grid=None) -> float:
    return LambdaObjective(rp, grid)(delta)


def objective_energy(rp, delta, cfg: EnergyConfig | None = None) -> float:
    return EnergyObjective(rp, cfg)(delta)


# -- minimizers ---------------------------------------------------------------

@dataclass
class MinimizeResult:
    delta: np.ndarray
    value: float
    initial_value: float
    nfev: int
    method: str
    message: str = ""


class _Tracker:
    def __init__(self, f):
        self.f = f
        self.best_x = None
        self.best = math.inf
        self.nfev = 0

    def __call__(self, x):
        v = self.f(x)
        self.nfev += 1
        if v < self.best:
            self.best, self.best_x = v, np.array(x, dtype=float)
        return v


def central_difference_gradient(f, x, h: float = FD_STEP) -> np.ndarray:
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(len(x)):
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
        e[i] = 0.0
    return g


def minimize(objective, delta0, method: str = "simplex", budget: int = 500) -> MinimizeResult:
    """Local unconstrained minimization from delta0; never returns a point
    worse than delta0.

    ``method`` is ``"simplex"`` (Nelder-Mead) or ``"quasi-newton"`` (BFGS;
    analytic gradient when the objective provides ``value_and_grad``,
    central differences otherwise).
    """
    x0 = np.asarray(delta0, dtype=float).ravel()
    tr = _Tracker(objective)
    f0 = tr(x0)
    if not math.isfinite(f0):
        raise NonFiniteObjective("objective is not finite at the initial point; try a different initial guess")
    if method == "simplex":
        res = spo.minimize(tr, x0, method="Nelder-Mead",
                           options={"maxiter": budget, "maxfev": 20 * budget, "xatol": 1e-10,
                                    "fatol": 1e-12 * abs(f0), "adaptive": len(x0) > 10})
    elif method == "quasi-newton":
        if hasattr(objective, "value_and_grad"):
            def fg(x):
                v, g = objective.value_and_grad(x)
                tr.nfev += 1
                if v < tr.best:
                    tr.best, tr.best_x = v, np.array(x)
                return v, g
            res = spo.minimize(fg, x0, jac=True, method="BFGS", options={"maxiter": budget, "gtol": 1e-10})
        else:
            res = spo.minimize(tr, x0, jac=lambda x: central_difference_gradient(tr, x), method="BFGS",
                               options={"maxiter": budget, "gtol": 1e-10})
    else:
        raise ValueError(f"unknown method {method!r}")
    return MinimizeResult(tr.best_x, tr.best, f0, tr.nfev, method, str(res.message))


@dataclass
class Schedule:
    stages: int = 5
    max_iter: int = 500
    rel_tol: float = 1e-6
    first: str = "quasi-newton"

    def __post_init__(self):
        if self.first not in ("quasi-newton", "simplex"):
            raise ValueError(f"unknown method {self.first!r}")
        if self.stages < 1 or self.max_iter < 1:
            raise ValueError("stages and max_iter must be positive")


@dataclass
class ImproveResult:
    map: PolyMap
    initial_value: float
    value: float
    trace: list = field(default_factory=list)
    delta: np.ndarray | None = None


def make_objective(kind: str, rp: ReducedParametrization, grid=None, energy: EnergyConfig | None = None):
    if kind == "lambda":
        return LambdaObjective(rp, grid)
    if kind == "energy":
        return EnergyObjective(rp, energy)
    raise ValueError(f"unknown objective {kind!r}")


def improve(map0: PolyMap, constraints: ConstraintSet, objective="lambda",
            schedule: Schedule | None = None, grid=None, energy: EnergyConfig | None = None,
            callback=None) -> ImproveResult:
    """Alternate quasi-Newton and simplex stages from the free part of map0.

    A stage is accepted only if it lowers the objective by at least
    ``rel_tol`` relative; the first stage that does not ends the run.
    ``objective`` is "lambda", "energy" or a factory rp -> objective.
    ``callback(entry, map)`` is called after every stage with the stage's
    best map.
    """
    schedule = schedule or Schedule()
    rp = ReducedParametrization(constraints, map0.dim, map0.degree)
    if constraints.A.shape[1] != map0.coeffs.shape[0]:
        raise ConstraintError("constraint set and initial map have different degrees")
    obj = make_objective(objective, rp, grid, energy) if isinstance(objective, str) else objective(rp)
    delta = rp.split(map0.coeffs)
    value = obj(delta)
    if not math.isfinite(value):
        raise NonFiniteObjective("objective is not finite at the initial map; try a different initial guess")
    trace = [{"stage": 0, "method": "initial", "value": value,
              "constraint_residual": constraints.residual(rp.coeffs(delta))}]
    initial = value
    method = schedule.first
    for stage in range(1, schedule.stages + 1):
        res = minimize(obj, delta, method, schedule.max_iter)
        resid = constraints.residual(rp.coeffs(res.delta))
        gain = (value - res.value) / abs(value)
        entry = {"stage": stage, "method": method, "value": res.value, "nfev": res.nfev,
                 "constraint_residual": resid, "accepted": gain >= schedule.rel_tol}
        log.info("stage %d (%s): %.6g -> %.6g", stage, method, value, res.value)
        trace.append(entry)
        if callback is not None:
            callback(entry, rp.assemble(res.delta))
        if gain < schedule.rel_tol:
            break
        delta, value = res.delta, res.value
        method = "simplex" if method == "quasi-newton" else "quasi-newton"
    return ImproveResult(rp.assemble(delta), initial, value, trace, delta)
