import numpy as np
import pytest

from ballmap.basis import get_basis
from ballmap.boundary import StarSpherical, star_trig, unit_circle
from ballmap.extend import SmoothBlendMap, radial_extend_3d
from ballmap.optimize import (ConstraintError, EnergyConfig, EnergyObjective, LambdaObjective,
                              NonFiniteObjective, ReducedParametrization, Schedule, build_constraints_2d,
                              build_constraints_3d, central_difference_gradient, improve, interior_lattice,
                              load_sphere_points, minimize, objective_energy, objective_lambda,
                              save_sphere_points)
from ballmap.polymap import PolyMap, boundary_error, identity_map, lambda_ratio, project_map
from ballmap.spherepts import packaged_point_file


def e20(a=5.0):
    return star_trig(a, [1.0], [0.0, 2.0])


def it1_start():
    return project_map(SmoothBlendMap(e20(), 0.5, 1.0), 2, 3, quad_order=16)


def test_constraints_identity():
    c = build_constraints_2d(unit_circle(), get_basis(2, 3), 7)
    assert c.A.shape == (7, 10)
    rp = ReducedParametrization(c, 2, 3)
    assert rp.n_free == 2 * 3
    m = identity_map(2, 3)
    assert c.residual(m.coeffs) < 1e-14
    assert np.allclose(rp.coeffs(rp.split(m.coeffs)), m.coeffs, atol=1e-11)


def test_constraints_q_rules():
    with pytest.raises(ConstraintError):
        build_constraints_2d(e20(), get_basis(2, 3), 8)
    c = build_constraints_2d(e20(), get_basis(2, 3))
    assert c.q == 7


def test_delta_zero_is_min_norm():
    c = build_constraints_2d(e20(), get_basis(2, 3), 7)
    rp = ReducedParametrization(c, 2, 3)
    a = rp.coeffs(np.zeros(rp.n_free))
    assert c.residual(a) <= 1e-11
    assert np.allclose(a, np.linalg.pinv(c.A) @ c.targets, atol=1e-12)


def test_split_assemble_round_trip():
    c = build_constraints_2d(e20(), get_basis(2, 3), 7)
    rp = ReducedParametrization(c, 2, 3)
    m = rp.assemble(np.arange(rp.n_free, dtype=float))
    assert np.allclose(rp.assemble(rp.split(m.coeffs)).coeffs, m.coeffs, atol=1e-11)


def test_random_delta_preserves_constraints(rng):
    for dim, n, c in [(2, 5, build_constraints_2d(e20(), get_basis(2, 5)))]:
        rp = ReducedParametrization(c, dim, n)
        for _ in range(50):
            a = rp.coeffs(rng.normal(size=rp.n_free) * 10)
            assert np.max(np.abs(c.A @ a - c.targets)) <= 1e-10
    b = StarSpherical(((2, 0, 0, 0, 0), (1, 2, 0, 0, 0)))
    c3 = build_constraints_3d(b, get_basis(3, 4))
    rp = ReducedParametrization(c3, 3, 4)
    for _ in range(50):
        assert c3.residual(rp.coeffs(rng.normal(size=rp.n_free))) <= 1e-10


def test_single_delta_component(rng):
    c = build_constraints_2d(e20(), get_basis(2, 3), 7)
    rp = ReducedParametrization(c, 2, 3)
    d = np.zeros(rp.n_free)
    for k in range(rp.n_free):
        d[k] = 1.0
        assert c.residual(rp.coeffs(d)) <= 1e-10
        d[k] = 0.0


def test_trig_boundary_interpolation_is_exact():
    # q = 2n+1 conditions on a degree-m trig boundary, n >= m
    for n in (3, 5):
        c = build_constraints_2d(e20(), get_basis(2, n))
        rp = ReducedParametrization(c, 2, n)
        m = rp.assemble(np.random.default_rng(n).normal(size=rp.n_free))
        assert boundary_error(m, e20()) <= 1e-10


def test_3d_point_file_checks(tmp_path):
    b = StarSpherical(((2, 0, 0, 0, 0),))
    basis = get_basis(3, 2)
    pts = load_sphere_points(packaged_point_file(2))
    c = build_constraints_3d(b, basis, points=pts)
    assert np.linalg.svd(c.A, compute_uv=False)[-1] >= 0.5
    with pytest.raises(ConstraintError, match="needs 9"):
        build_constraints_3d(b, basis, points=pts[:-1])
    bad = pts.copy()
    bad[:, 2] = 1.0
    bad /= np.linalg.norm(bad, axis=1)[:, None]
    with pytest.raises(ConstraintError):
        build_constraints_3d(b, basis, points=bad)
    f = tmp_path / "p.txt"
    f.write_text("1 0 0\n0 1 0.1\n")
    with pytest.raises(ConstraintError, match="unit"):
        load_sphere_points(f)
    save_sphere_points(pts, f)
    assert np.array_equal(load_sphere_points(f), pts)


def test_3d_constrained_map_interpolates_on_sphere():
    # phi restricted to the sphere is a degree-6 polynomial, so the
    # interpolation conditions pin the whole boundary
    b = StarSpherical(((2, 0, 0, 0, 0), (1, 1, 0, 0, 0), (0.5, 0, 1, 0, 1)))
    m0 = project_map(lambda x: radial_extend_3d(b, x), 3, 6, quad_order=14)
    c = build_constraints_3d(b, get_basis(3, 6))
    rp = ReducedParametrization(c, 3, 6)
    assert boundary_error(rp.assemble(rp.split(m0.coeffs)), b) < 1e-12


def test_lambda_objective_matches_report():
    c = build_constraints_2d(e20(), get_basis(2, 3))
    rp = ReducedParametrization(c, 2, 3)
    m0 = it1_start()
    d = rp.split(m0.coeffs)
    assert objective_lambda(rp, d) == pytest.approx(lambda_ratio(rp.assemble(d)).lam, rel=1e-12)
    c = build_constraints_2d(unit_circle(), get_basis(2, 3))
    rp = ReducedParametrization(c, 2, 3)
    assert objective_lambda(rp, rp.split(identity_map(2, 3).coeffs)) == pytest.approx(1.0, abs=1e-12)


def brute_energy(Y, Z, a):
    e = 0.0
    for i in range(len(Y)):
        for j in range(len(Y)):
            if i != j:
                e += np.linalg.norm(Y[i] - Y[j]) ** -a
        for j in range(len(Z)):
            e += np.linalg.norm(Y[i] - Z[j]) ** -a
    return e


def test_energy_brute_force_identity():
    c = build_constraints_2d(unit_circle(), get_basis(2, 3))
    rp = ReducedParametrization(c, 2, 3)
    ob = EnergyObjective(rp, EnergyConfig(k1=3, L1=40))
    assert ob.K1 == 25
    d = rp.split(identity_map(2, 3).coeffs)
    assert ob(d) == pytest.approx(brute_energy(ob.xi, ob.zeta, 2.0), rel=1e-12)


def test_energy_defaults():
    c = build_constraints_2d(e20(), get_basis(2, 3))
    ob = EnergyObjective(ReducedParametrization(c, 2, 3))
    assert (ob.k1, ob.K1, ob.L1) == (3, 25, 60)
    # lattice points lie strictly inside the disk
    assert np.linalg.norm(interior_lattice(2, 5), axis=1).max() < 1


def test_energy_gradient(rng):
    c = build_constraints_2d(e20(), get_basis(2, 3))
    rp = ReducedParametrization(c, 2, 3)
    ob = EnergyObjective(rp)
    d0 = rp.split(it1_start().coeffs)
    for _ in range(20):
        d = d0 + 0.05 * rng.normal(size=d0.size)
        v, g = ob.value_and_grad(d)
        fd = central_difference_gradient(ob, d, 1e-5)
        assert np.max(np.abs(g - fd)) / np.max(np.abs(fd)) <= 1e-5


def test_energy_coincidence():
    c = build_constraints_2d(e20(), get_basis(2, 3))
    rp = ReducedParametrization(c, 2, 3)
    ob = EnergyObjective(rp)
    ob.Vxi[1] = ob.Vxi[0]
    assert ob(np.zeros(rp.n_free)) == np.inf
    assert objective_energy(rp, rp.split(it1_start().coeffs)) > 0


def test_energy_config_validation():
    for bad in ({"k1": 0}, {"L1": 2}, {"alpha": 0.0}):
        with pytest.raises(ValueError):
            EnergyConfig(**bad)


@pytest.mark.parametrize("method", ["simplex", "quasi-newton"])
def test_minimize_quadratic(method):
    target = np.array([1.0, -2.0, 0.5])
    res = minimize(lambda d: float(np.sum((d - target) ** 2)), np.zeros(3), method, budget=2000)
    assert np.max(np.abs(res.delta - target)) <= 1e-8
    assert res.value <= res.initial_value


def test_minimize_rejects_nonfinite_start():
    with pytest.raises(NonFiniteObjective):
        minimize(lambda d: np.inf, np.zeros(2))
    with pytest.raises(ValueError):
        minimize(lambda d: 0.0, np.zeros(2), "newton")


def test_minimize_never_worse():
    # objective with a nasty cliff; whatever happens we keep the start
    f = lambda d: 1.0 if np.all(d == 0) else 2.0 + np.sum(d * d)
    res = minimize(f, np.zeros(2), "quasi-newton", budget=20)
    assert res.value <= 1.0


def test_improve_it1_quick():
    m0 = it1_start()
    c = build_constraints_2d(e20(), get_basis(2, 3), 7)
    res = improve(m0, c, "lambda", Schedule(stages=2, max_iter=100))
    values = [t["value"] for t in res.trace if t["stage"] == 0 or t["accepted"]]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert all(t["constraint_residual"] <= 1e-10 for t in res.trace)
    assert res.value < res.initial_value and res.value <= 10
    assert boundary_error(res.map, e20()) <= 1e-10


def test_improve_keeps_optimal_input():
    # identity on the disk already has lambda = 1
    c = build_constraints_2d(unit_circle(), get_basis(2, 3))
    res = improve(identity_map(2, 3), c, "lambda", Schedule(stages=3, max_iter=50))
    assert len(res.trace) == 2
    assert np.allclose(res.map.coeffs, identity_map(2, 3).coeffs, atol=1e-12)


def test_improve_degree_mismatch():
    c = build_constraints_2d(e20(), get_basis(2, 3))
    with pytest.raises(ConstraintError):
        improve(identity_map(2, 4), c)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(first="newton")
    with pytest.raises(ValueError):
        Schedule(stages=0)
