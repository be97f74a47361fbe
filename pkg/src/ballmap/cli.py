"""Command-line interface.

    ballmap build   --config run.json [--out map.json]
    ballmap improve --config run.json --in map.json [--out improved.json]
    ballmap grid    --config run.json --in map.json [--out prefix]
    ballmap quality --config run.json --in map.json [--out report.json]

Every run is described by a JSON config (see ``configs/`` for examples).
Relative paths in the config are resolved against the config's directory.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import jsonschema
import numpy as np

from .basis import get_basis
from .boundary import BoundaryError, boundary_from_dict, min_radius
from .extend import HarmonicMap2D, IntegralMap2D, IntegralMap3D, RadialMap3D, SmoothBlendMap
from .optimize import (ConstraintError, EnergyConfig, EnergyObjective, NonFiniteObjective,
                       ReducedParametrization, Schedule, build_constraints_2d, build_constraints_3d,
                       improve)
from .polymap import MapFileError, PolyMap, load_map, project_map, quality_report, save_map, standard_grid
from .quality import measures_3d

log = logging.getLogger("ballmap")

METHODS_2D = ("harmonic", "blend", "blend-core", "integral")
METHODS_3D = ("blend", "blend-core", "integral", "radial3d")

_trig = {
    "type": "object",
    "properties": {
        "half_a0": {"type": "number"},
        "cos": {"type": "array", "items": {"type": "number"}},
        "sin": {"type": "array", "items": {"type": "number"}},
    },
    "additionalProperties": False,
}

_boundary = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["star_trig", "cassini", "parametric_trig", "ellipse", "star_spherical"]},
        "half_a0": {"type": "number"},
        "cos": {"type": "array", "items": {"type": "number"}},
        "sin": {"type": "array", "items": {"type": "number"}},
        "a": {"type": "number"},
        "b": {"type": "number"},
        "x": _trig,
        "y": _trig,
        "terms": {"type": "array", "items": {"type": "array", "minItems": 5, "maxItems": 5,
                                             "items": {"type": "number"}}},
    },
    "additionalProperties": False,
}

_pos_int = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["boundary"],
    "properties": {
        "boundary": _boundary,
        "build": {
            "type": "object",
            "required": ["method", "degree"],
            "properties": {
                "method": {"enum": ["harmonic", "blend", "blend-core", "integral", "radial3d"]},
                "degree": {"type": "integer", "minimum": 0},
                "nodes": _pos_int,
                "kappa": {"type": "number", "exclusiveMinimum": 0},
                "omega": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                "quad_order": _pos_int,
                "n_theta": _pos_int,
                "n_omega": _pos_int,
                "constrain": {"type": "boolean"},
                "omega_check": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
        "improve": {
            "type": "object",
            "properties": {
                "objective": {"enum": ["lambda", "energy"]},
                "q_n": _pos_int,
                "point_file": {"type": "string"},
                "energy": {
                    "type": "object",
                    "properties": {"k1": _pos_int, "L1": {"type": "integer", "minimum": 3},
                                   "alpha": {"type": "number", "exclusiveMinimum": 0}},
                    "additionalProperties": False,
                },
                "schedule": {
                    "type": "object",
                    "properties": {"stages": _pos_int, "max_iter": _pos_int,
                                   "rel_tol": {"type": "number", "minimum": 0},
                                   "first": {"enum": ["quasi-newton", "simplex"]}},
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {"circles": _pos_int, "rays": _pos_int, "samples": {"type": "integer", "minimum": 2},
                           "shells": _pos_int},
            "additionalProperties": False,
        },
        "quality": {
            "type": "object",
            "properties": {"K": _pos_int, "L": _pos_int, "samples": {"type": "integer", "minimum": 16}},
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"map": {"type": "string"}, "report": {"type": "string"}, "grid": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    pass


class Config:
    def __init__(self, data: dict, base: Path):
        self.data = data
        self.base = base
        self.boundary = boundary_from_dict(data["boundary"])

    def section(self, name) -> dict:
        return dict(self.data.get(name, {}))

    def path(self, value) -> Path:
        p = Path(value)
        return p if p.is_absolute() else self.base / p

    def output(self, key: str, override, default: str) -> Path:
        if override is not None:
            return Path(override)
        return self.path(self.data.get("output", {}).get(key, default))


def _field_name(err: jsonschema.ValidationError) -> str:
    path = ".".join(str(p) for p in err.absolute_path)
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        return ".".join(filter(None, [path, extra[0] if extra else ""]))
    if err.validator == "required":
        missing = err.message.split("'")[1]
        return ".".join(filter(None, [path, missing]))
    return path or "<root>"


def validate_config(data) -> None:
    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(v.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(f"config field '{_field_name(e)}': {e.message}")


def load_config(path) -> Config:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    validate_config(data)
    try:
        cfg = Config(data, path.parent)
    except BoundaryError as exc:
        raise ConfigError(f"config field 'boundary': {exc}") from None
    _check_ranges(cfg)
    return cfg


def _check_ranges(cfg: Config) -> None:
    b, dim = cfg.boundary, cfg.boundary.dim
    build = cfg.section("build")
    if build:
        method, n = build["method"], build["degree"]
        if method not in (METHODS_2D if dim == 2 else METHODS_3D):
            raise ConfigError(f"config field 'build.method': {method!r} is not available in {dim}D")
        if method in ("blend", "blend-core") and "kappa" not in build:
            raise ConfigError("config field 'build.kappa' is required for blend maps")
        if method == "blend" and "omega" not in build:
            raise ConfigError("config field 'build.omega' is required for method 'blend'")
        if method == "blend-core" and "delta" not in build:
            raise ConfigError("config field 'build.delta' is required for method 'blend-core'")
        if method == "blend" and dim == 2 and b.is_star_like and build.get("omega_check", True):
            w0 = min_radius(b)
            if not build["omega"] < w0:
                raise ConfigError(f"config field 'build.omega': must be < min radius {w0:.6g}")
        if method in ("blend", "blend-core") and not b.is_star_like:
            raise ConfigError("config field 'build.method': blend maps need a star-like boundary")
        if method == "harmonic" and build.get("nodes", 2 * n + 2) < 2 * n + 2:
            raise ConfigError(f"config field 'build.nodes': need at least 2n+2 = {2 * n + 2}")
        if method == "integral" and dim == 2 and build.get("nodes", 100) < 8:
            raise ConfigError("config field 'build.nodes': need at least 8")
        imp = cfg.section("improve")
        if dim == 2 and imp.get("q_n", 0) > 2 * n + 1:
            raise ConfigError(f"config field 'improve.q_n': must be <= 2n+1 = {2 * n + 1}")
    imp = cfg.section("improve")
    if dim == 3 and "q_n" in imp:
        raise ConfigError("config field 'improve.q_n': 3D runs use point_file")
    if dim == 2 and "point_file" in imp:
        raise ConfigError("config field 'improve.point_file': only used in 3D")


# -- commands -------------------------------------------------------------------

def make_extension(cfg: Config):
    build, b = cfg.section("build"), cfg.boundary
    method, n = build["method"], build["degree"]
    if method == "harmonic":
        return HarmonicMap2D.from_boundary(b, n, build.get("nodes", max(2 * n + 2, 4 * n)))
    if method == "blend":
        return SmoothBlendMap(b, build["kappa"], omega=build["omega"], strict=build.get("omega_check", True))
    if method == "blend-core":
        return SmoothBlendMap(b, build["kappa"], delta=build["delta"])
    if method == "integral":
        if b.dim == 2:
            return IntegralMap2D(b, build.get("nodes", 100))
        return IntegralMap3D(b, build.get("n_theta", 64), build.get("n_omega", 32))
    return RadialMap3D(b)


def default_quad_order(dim: int, degree: int, method: str) -> int:
    # the extensions are not polynomials, so integrate well past degree 2n
    return 2 * degree + 10 if dim == 2 else 2 * degree + 8


def constraint_set(cfg: Config, degree: int):
    imp, b = cfg.section("improve"), cfg.boundary
    basis = get_basis(b.dim, degree)
    if b.dim == 2:
        return build_constraints_2d(b, basis, imp.get("q_n"))
    pf = imp.get("point_file")
    return build_constraints_3d(b, basis, cfg.path(pf) if pf else None)


def build_map(cfg: Config) -> tuple[PolyMap, dict]:
    build, b = cfg.section("build"), cfg.boundary
    if not build:
        raise ConfigError("config field 'build' is required for this command")
    n, method = build["degree"], build["method"]
    ext = make_extension(cfg)
    p = build.get("quad_order", default_quad_order(b.dim, n, method))
    m = project_map(ext, b.dim, n, quad_order=p)
    params = {"method": method, "degree": n, "quad_order": p}
    for k in ("nodes", "kappa", "omega", "delta", "n_theta", "n_omega", "omega_check"):
        if k in build:
            params[k] = build[k]
    if method == "harmonic":
        params["nodes"] = build.get("nodes", max(2 * n + 2, 4 * n))
    # 3D initial maps are taken with the interpolation conditions applied
    constrain = build.get("constrain", b.dim == 3)
    params["constrain"] = constrain
    if constrain:
        c = constraint_set(cfg, n)
        rp = ReducedParametrization(c, b.dim, n)
        m = rp.assemble(rp.split(m.coeffs))
        params["constraint_points"] = c.q
    return m, params


def report_for(cfg: Config, m: PolyMap) -> dict:
    q = cfg.section("quality")
    grid = standard_grid(m.dim)
    rep = quality_report(m, cfg.boundary, grid, q.get("samples", 720)).to_dict()
    rep["grid_points"] = len(grid.points)
    rep["boundary_samples"] = q.get("samples", 720)
    if m.dim == 3:
        meas = measures_3d(m, cfg.boundary, q.get("K", 40), q.get("L", 10))
        rep.update(meas)
    return rep


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, allow_nan=False) + "\n")


def _report_path(map_path: Path, cfg: Config) -> Path:
    rp = cfg.data.get("output", {}).get("report")
    return cfg.path(rp) if rp else map_path.with_name(map_path.stem + ".report.json")


def _check_map(cfg: Config, m: PolyMap) -> None:
    if m.dim != cfg.boundary.dim:
        raise ConfigError(f"mapping is {m.dim}D but the boundary is {cfg.boundary.dim}D")


def cmd_build(cfg: Config, out=None) -> dict:
    m, params = build_map(cfg)
    path = cfg.output("map", out, "map.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    save_map(m, path)
    rep = {"command": "build", "boundary": cfg.boundary.to_dict(), "build": params, **report_for(cfg, m)}
    _write_json(_report_path(path, cfg), rep)
    return rep


def cmd_improve(cfg: Config, in_map, out=None) -> dict:
    m0 = load_map(in_map)
    _check_map(cfg, m0)
    imp = cfg.section("improve")
    objective = imp.get("objective", "lambda")
    sched = Schedule(**imp.get("schedule", {}))
    ecfg = EnergyConfig(**imp.get("energy", {}))
    c = constraint_set(cfg, m0.degree)
    before = report_for(cfg, m0)
    res = improve(m0, c, objective, sched, energy=ecfg)
    path = cfg.output("map", out, "improved.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    save_map(res.map, path)
    params = {"objective": objective, "constraint_points": c.q, "schedule": vars(sched),
              "grid": standard_grid(m0.dim).label}
    if objective == "energy":
        eo = EnergyObjective(ReducedParametrization(c, m0.dim, m0.degree), ecfg)
        params["energy"] = {"k1": eo.k1, "K1": eo.K1, "L1": eo.L1, "alpha": ecfg.alpha}
    rep = {"command": "improve", "input": str(in_map), "boundary": cfg.boundary.to_dict(),
           "improve": params, "initial_objective": res.initial_value, "final_objective": res.value,
           "trace": res.trace, "before": before, "after": report_for(cfg, res.map)}
    _write_json(_report_path(path, cfg), rep)
    return rep


def cmd_quality(cfg: Config, in_map, out=None) -> dict:
    m = load_map(in_map)
    _check_map(cfg, m)
    rep = {"command": "quality", "input": str(in_map), "dim": m.dim, "degree": m.degree, **report_for(cfg, m)}
    path = cfg.output("report", out, "quality.json")
    _write_json(path, rep)
    return rep


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def grid_curves_2d(circles: int, rays: int, samples: int):
    """Circles r = j/circles and rays at angles 2 pi j / rays in the disk."""
    t = 2.0 * np.pi * np.arange(samples + 1) / samples
    for j in range(1, circles + 1):
        r = j / circles
        yield f"circle-{j}", t, np.stack([r * np.cos(t), r * np.sin(t)], axis=1)
    r = np.linspace(0.0, 1.0, samples + 1)
    for j in range(1, rays + 1):
        a = 2.0 * np.pi * j / rays
        yield f"ray-{j}", r, np.stack([r * np.cos(a), r * np.sin(a)], axis=1)


def grid_curves_sphere(radius: float, circles: int, rays: int, samples: int):
    """Parallels and meridians of the sphere of the given radius."""
    p = 2.0 * np.pi * np.arange(samples + 1) / samples
    for j in range(1, circles):
        th = np.pi * j / circles
        yield f"parallel-{j}", p, radius * np.stack(
            [np.sin(th) * np.cos(p), np.sin(th) * np.sin(p), np.full_like(p, np.cos(th))], axis=1)
    th = np.linspace(0.0, np.pi, samples + 1)
    for j in range(rays):
        ph = 2.0 * np.pi * j / rays
        yield f"meridian-{j + 1}", th, radius * np.stack(
            [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=1)


def _write_csv(path: Path, rows, dim: int) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    names = ["s", "t", "u"][:dim]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve_id", "param", *names])
        for cid, par, img in rows:
            for a, y in zip(par, img):
                w.writerow([cid, _fmt(a), *(_fmt(v) for v in y)])


def _svg_panel(curves, x0: float, size: float, labels: tuple[str, str], title: str) -> list[str]:
    pts = np.vstack([c for _, c in curves])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 40.0
    scale = (size - 2 * pad) / span
    cx = (lo + hi) / 2.0

    def tr(p):
        return (x0 + size / 2 + (p[:, 0] - cx[0]) * scale, size / 2 - (p[:, 1] - cx[1]) * scale)

    out = [f'<g><text x="{x0 + size / 2:.1f}" y="20" text-anchor="middle">{title}</text>']
    for cid, c in curves:
        X, Y = tr(c)
        d = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(X, Y))
        out.append(f'<polyline class="{cid.split("-")[0]}" fill="none" stroke="black" '
                   f'stroke-width="0.7" points="{d}"/>')
    out.append(f'<text x="{x0 + size - pad / 2:.1f}" y="{size - 10:.1f}">{labels[0]}</text>')
    out.append(f'<text x="{x0 + 8:.1f}" y="{pad:.1f}">{labels[1]}</text></g>')
    return out


def write_svg(path: Path, disk_curves, image_curves) -> None:
    size = 500.0
    body = _svg_panel(disk_curves, 0.0, size, ("x", "y"), "unit disk")
    body += _svg_panel(image_curves, size, size, ("s", "t"), "image")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * size:.0f}" height="{size:.0f}">\n'
                    + "\n".join(body) + "\n</svg>\n")


def cmd_grid(cfg: Config, in_map, out=None) -> dict:
    m = load_map(in_map)
    _check_map(cfg, m)
    g = cfg.section("grid")
    circles, samples = g.get("circles", 15), g.get("samples", 200)
    rays = g.get("rays", 2 * circles)
    prefix = cfg.output("grid", out, "grid")
    written = []
    if m.dim == 2:
        disk = list(grid_curves_2d(circles, rays, samples))
        rows = [(cid, par, m(x)) for cid, par, x in disk]
        _write_csv(prefix.with_suffix(".csv"), rows, 2)
        write_svg(prefix.with_suffix(".svg"), [(c, x) for c, _, x in disk], [(c, y) for c, _, y in rows])
        written += [str(prefix.with_suffix(".csv")), str(prefix.with_suffix(".svg"))]
    else:
        shells = g.get("shells", 4)
        for i in range(1, shells + 1):
            rows = [(cid, par, m(x)) for cid, par, x in grid_curves_sphere(i / shells, circles, rays, samples)]
            p = prefix.with_name(f"{prefix.name}_shell{i}.csv")
            _write_csv(p, rows, 3)
            written.append(str(p))
    return {"command": "grid", "circles": circles, "rays": rays, "samples": samples, "files": written}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ballmap", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=["build", "improve", "grid", "quality"])
    ap.add_argument("--config", required=True, help="run configuration (JSON)")
    ap.add_argument("--in", dest="in_map", help="input mapping file")
    ap.add_argument("--out", help="output path (map, report or grid prefix)")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.command == "build":
            rep = cmd_build(cfg, args.out)
        else:
            if not args.in_map:
                raise ConfigError(f"'{args.command}' needs --in <map>")
            fn = {"improve": cmd_improve, "grid": cmd_grid, "quality": cmd_quality}[args.command]
            rep = fn(cfg, args.in_map, args.out)
    except (ConfigError, BoundaryError, MapFileError, ConstraintError, NonFiniteObjective,
            FileNotFoundError, ValueError) as exc:
        print(f"ballmap: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ballmap: error: {exc}", file=sys.stderr)
        return 1
    summary = {k: rep[k] for k in ("lambda", "boundary_error", "m_K", "E1", "E2", "final_objective", "files")
               if k in rep}
    if "after" in rep:
        summary.update(lambda_before=rep["before"]["lambda"], lambda_after=rep["after"]["lambda"])
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
