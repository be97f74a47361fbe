import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballmap.basis import get_basis
from ballmap.boundary import ellipse, star_trig, unit_circle
from ballmap.extend import SmoothBlendMap, fd_jacobian
from ballmap.polymap import (EvalGrid, MapFileError, PolyMap, SizeMismatchError, UnsupportedBasisError,
                             VersionMismatchError, boundary_error, identity_map, lambda_ratio, load_map,
                             map_to_dict, polar_grid, project_map, save_map, standard_grid)
from conftest import random_ball, random_disk


def random_map(rng, dim, n):
    c = rng.normal(size=(get_basis(dim, n).size, dim))
    return PolyMap(dim, n, c)


def test_identity(rng):
    m = identity_map(2)
    x = np.array([[0.3, -0.4]])
    assert np.allclose(m(x), x, atol=1e-15)
    assert np.allclose(m.jacobian(x)[0], np.eye(2), atol=1e-14)
    assert lambda_ratio(m).lam == pytest.approx(1.0, abs=1e-12)


def test_linear_det():
    m = project_map(lambda p: p * [2.0, 1.0], 2, 1)
    rep = lambda_ratio(m)
    assert rep.det_min == pytest.approx(2) and rep.det_max == pytest.approx(2)


@pytest.mark.parametrize("dim", [2, 3])
def test_jacobian_vs_fd(dim, rng):
    m = random_map(rng, dim, 3)
    x = (random_disk if dim == 2 else random_ball)(rng, 100, 0.95)
    J, F = m.jacobian(x), fd_jacobian(m, x)
    assert np.max(np.abs(J - F) / (1 + np.abs(J))) <= 1e-6


def test_it1_projection_jacobian_vs_fd(rng):
    b = star_trig(5, [1.0], [0.0, 2.0])
    m = project_map(SmoothBlendMap(b, 0.5, 1.0), 2, 3, quad_order=16)
    x = random_disk(rng, 100)
    J, F = m.jacobian(x), fd_jacobian(m, x)
    assert np.max(np.abs(J - F) / (1 + np.abs(J))) <= 1e-6


@given(st.floats(0.01, 100))
def test_lambda_scale_invariance(c):
    rng = np.random.default_rng(3)
    for dim in (2, 3):
        m = PolyMap(dim, 1, np.vstack([np.zeros((1, dim)), np.eye(dim) + 0.1 * rng.normal(size=(dim, dim))]))
        m = project_map(lambda p: m(p) + 0.05 * p**2, dim, 2)
        a = lambda_ratio(m).lam
        b = lambda_ratio(m.with_coeffs(c * m.coeffs)).lam
        assert abs(a - b) <= 1e-12 * a


def test_nonpositive_dets_flag_lambda_inf():
    m = project_map(lambda p: np.column_stack([p[:, 0] ** 2, p[:, 1]]), 2, 2)
    rep = lambda_ratio(m)
    assert rep.nonpositive > 0
    assert rep.lam == np.inf or rep.lam > 1e6
    assert rep.to_dict()["lambda"] is None or rep.to_dict()["lambda"] > 1e6


def test_grid_refinement_monotone():
    b = star_trig(5, [1.0], [0.0, 2.0])
    m = project_map(SmoothBlendMap(b, 0.5, 1.0), 2, 3)
    coarse, fine = polar_grid(10), polar_grid(30)  # circles j/10 are among j/30
    a, f = lambda_ratio(m, coarse), lambda_ratio(m, fine)
    assert f.det_max >= a.det_max and f.det_min <= a.det_min


def test_standard_grids_include_rim():
    for dim in (2, 3):
        g = standard_grid(dim)
        r = np.linalg.norm(g.points, axis=1)
        assert r.max() <= 1 + 1e-14
        assert np.sum(np.abs(r - 1) < 1e-14) >= 60


def test_boundary_error():
    assert boundary_error(identity_map(2), unit_circle()) <= 1e-15
    m = project_map(lambda p: p * [2.0, 1.0], 2, 1)
    assert boundary_error(m, ellipse(2, 1)) < 1e-14
    with pytest.raises(ValueError):
        boundary_error(m, ellipse(2, 1), samples=8)


def test_round_trip_bitwise(tmp_path, rng):
    for dim in (2, 3):
        m = random_map(rng, dim, 4)
        save_map(m, tmp_path / "m.json")
        back = load_map(tmp_path / "m.json")
        assert back.coeffs.tobytes() == m.coeffs.tobytes()
        assert (back.dim, back.degree, back.basis_tag) == (m.dim, m.degree, m.basis_tag)


def test_file_errors(tmp_path, rng):
    d = map_to_dict(random_map(rng, 2, 2))
    p = tmp_path / "m.json"

    def write(doc):
        p.write_text(json.dumps(doc))
        return p

    with pytest.raises(SizeMismatchError):
        load_map(write({**d, "coeffs": d["coeffs"][:-1]}))
    with pytest.raises(UnsupportedBasisError):
        load_map(write({**d, "basis": "zernike"}))
    with pytest.raises(VersionMismatchError):
        load_map(write({**d, "version": 2}))
    with pytest.raises(MapFileError):
        load_map(write({k: v for k, v in d.items() if k != "dim"}))
    p.write_text("{not json")
    with pytest.raises(MapFileError):
        load_map(p)
    with pytest.raises(UnsupportedBasisError):
        PolyMap(2, 1, np.zeros((3, 2)), "ball-gs")


def test_coeffs_read_only(rng):
    m = random_map(rng, 2, 1)
    with pytest.raises(ValueError):
        m.coeffs[0, 0] = 1.0
