import json
import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from prequant import geometry as geo
from prequant import holonomy as hol
from prequant import lie
from prequant import obstruction as ob
from prequant.errors import InconsistentScenarioError
from prequant.holonomy import ModOne

from support import FOUR_PI, circle_scenario, connection_for, random_axis, sphere_scenario

TWO_PI = 2 * math.pi


# -- delta ----------------------------------------------------------------------------


@pytest.mark.parametrize("c", [0.1, -0.37, 1 / TWO_PI, 0.05])
@pytest.mark.parametrize("z", [1, -2, 5])
def test_delta_trivial_bundle_closed_form(c, z):
    s = circle_scenario(c)
    d = ob.delta(s, connection_for(s), lie.circle().element((TWO_PI * z,)))
    assert d.value.isclose(TWO_PI * z * c, 1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_delta_so3_sphere(n, k):
    s = sphere_scenario(n=n)
    conn = connection_for(s)
    X = lie.so3().element(TWO_PI * k * np.array([0.6, 0.0, -0.8]))
    for route, val in ob.delta_routes(s, conn, X).items():
        assert val.value.isclose(n * k / 2, 5e-5), route


def test_delta_routes_on_sphere_cover_all_three():
    s = sphere_scenario()
    routes = ob.delta_routes(s, connection_for(s), lie.so3().element((0.0, TWO_PI, 0.0)))
    assert set(routes) == {"action_zero", "extremum", "holonomy"}


def test_delta_of_zero():
    s = sphere_scenario()
    d = ob.delta(s, connection_for(s), lie.so3().zero())
    assert d.value.value == 0.0 and d.route == "trivial"


def test_delta_requires_ker_exp():
    s = sphere_scenario()
    with pytest.raises(ValueError):
        ob.delta(s, connection_for(s), lie.so3().element((1.0, 0.0, 0.0)))


def test_delta_requires_matching_curvature():
    s = sphere_scenario(n=1)
    other = connection_for(sphere_scenario(n=2))
    with pytest.raises(ValueError):
        ob.delta(s, other, lie.so3().element((0.0, 0.0, TWO_PI)))


def test_unknown_route_is_rejected():
    s = sphere_scenario()
    with pytest.raises(ValueError):
        ob.delta(s, connection_for(s), lie.so3().element((0.0, 0.0, TWO_PI)), route="magic")


def test_extremum_route_needs_symplectic_form():
    s = circle_scenario(0.1)
    with pytest.raises(ValueError):
        ob.delta(s, connection_for(s), lie.circle().element((TWO_PI,)), route="extremum")


def test_torus_uses_holonomy_route():
    s = circle_scenario(0.2, manifold="torus2")
    d = ob.delta(s, connection_for(s), lie.circle().element((TWO_PI,)))
    assert d.route == "holonomy"
    assert d.value.isclose(TWO_PI * 0.2, 1e-9)
    assert len(d.samples) >= 3


def test_inconsistent_moment_map_is_detected():
    s = sphere_scenario()
    bad = geo.MomentMapSpec(lambda X, p: s.moment.evaluate(X, p) + 0.05 * X[2] * p[..., 0] ** 2)
    with pytest.raises(InconsistentScenarioError):
        ob.delta(s.with_moment(bad), connection_for(s), lie.so3().element((0.0, 0.0, TWO_PI)),
                 route="holonomy")


def test_base_point_independence():
    s = sphere_scenario(n=3)
    conn = connection_for(s)
    rng = np.random.default_rng(1)
    for X in lie.ker_exp_generators(lie.so3()):
        vals = [ob.orbit_delta(s, conn, X, x) for x in s.manifold.random_points(rng, 4)]
        assert all(v.isclose(vals[0], 1e-5) for v in vals)


def test_homomorphism_on_colinear_elements():
    s = sphere_scenario(n=1)
    conn = connection_for(s)
    axis = random_axis(np.random.default_rng(9))
    a, b = lie.so3().element(TWO_PI * axis), lie.so3().element(2 * TWO_PI * axis)
    lhs = ob.delta(s, conn, a + b).value
    rhs = ob.delta(s, conn, a).value + ob.delta(s, conn, b).value
    assert lhs.isclose(rhs, 1e-5)


def test_homomorphism_on_torus():
    s = circle_scenario(0.13, manifold="torus2")
    conn = connection_for(s)
    X, Y = lie.circle().element((TWO_PI,)), lie.circle().element((3 * TWO_PI,))
    assert ob.delta(s, conn, X + Y).value.isclose(
        ob.delta(s, conn, X).value + ob.delta(s, conn, Y).value, 1e-9)


# -- lift_exists_fixed_mu / torsion -------------------------------------------------------


@pytest.mark.parametrize(
    "scenario, expected",
    [
        (lambda: circle_scenario(1 / TWO_PI), True),
        (lambda: circle_scenario(0.1), False),
        (lambda: sphere_scenario(n=1), False),
        (lambda: sphere_scenario(n=2), True),
        (lambda: sphere_scenario("su2", n=1), True),
    ],
)
def test_lift_exists_fixed_mu(scenario, expected):
    s = scenario()
    ok, report = ob.lift_exists_fixed_mu(s, connection_for(s))
    assert ok is expected
    assert all(lie.in_ker_exp(s.group, d.X) for d in report.entries)
    assert len(report.generators) == len(lie.ker_exp_generators(s.group))
    assert len(report.samples) == s.samples


def test_failing_witness_has_half():
    s = sphere_scenario(n=1)
    _, report = ob.lift_exists_fixed_mu(s, connection_for(s))
    first = report.generators[0]
    assert first.value.isclose(0.5, 5e-5)
    assert first.route == "action_zero"
    np.testing.assert_allclose(np.abs(first.witness), [0, 0, 1], atol=1e-9)


def test_torsion_table_so3_covers_whole_batch():
    s = sphere_scenario(n=1)
    conn = connection_for(s)
    gens, batch = ob.kernel_test_set(s)
    table = ob.lambda_on_torsion(s, conn)
    assert len(table) == 1 + len(gens) + len(batch)


def test_torsion_table_circle_is_zero_only():
    s = circle_scenario(0.1)
    table = ob.lambda_on_torsion(s, connection_for(s))
    assert [d.X.coords for d in table] == [(0.0,)]
    assert table[0].value.value == 0.0


def test_torsion_table_su2_vanishes():
    s = sphere_scenario("su2", n=1)
    table = ob.lambda_on_torsion(s, connection_for(s))
    assert len(table) > 1
    assert all(d.value.is_zero(5e-5) for d in table)


# -- solvers ------------------------------------------------------------------------------


def test_moment_shift_circle_on_sphere():
    s = sphere_scenario("circle", n=1, action="axis:x")
    conn = connection_for(s)
    sol = ob.solve_moment_shift(s, conn)
    assert sol.feasible
    assert sol.b[0] == pytest.approx(-1 / FOUR_PI, abs=1e-6)
    shifted = s.with_moment(sol.moment)
    for k in range(1, 6):
        assert ob.delta(shifted, conn, lie.circle().element((TWO_PI * k,))).value.is_zero(5e-5)


def test_moment_shift_unobstructed_is_zero():
    s = circle_scenario(1 / TWO_PI)
    sol = ob.solve_moment_shift(s, connection_for(s))
    assert sol.feasible and sol.b == pytest.approx((0.0,), abs=1e-12)


def test_moment_shift_so3_infeasible():
    s = sphere_scenario(n=1)
    sol = ob.solve_moment_shift(s, connection_for(s))
    assert not sol.feasible and "torsion" in sol.reason


def test_moment_shift_su2_is_noop():
    s = sphere_scenario("su2", n=1)
    sol = ob.solve_moment_shift(s, connection_for(s))
    assert sol.feasible and sol.b == ()


@pytest.mark.parametrize("c", [0.1, 0.3, -0.45, 2.0])
def test_flat_twist_on_torus(c):
    s = circle_scenario(c, manifold="torus2", twisting=True)
    sol = ob.solve_flat_twist(s, connection_for(s))
    assert sol.feasible
    assert sol.beta[0].isclose(TWO_PI * c, 1e-9)
    for z in range(1, 6):
        X = lie.circle().element((TWO_PI * z,))
        assert ob.delta(s, sol.connection, X).value.is_zero(5e-5)


def test_flat_twist_sphere_infeasible():
    s = sphere_scenario("circle", n=1, action="axis:x")
    assert not ob.solve_flat_twist(s, connection_for(s)).feasible


def test_flat_twist_unobstructed_is_zero():
    s = circle_scenario(1 / TWO_PI, manifold="torus2")
    sol = ob.solve_flat_twist(s, connection_for(s))
    assert sol.feasible and all(b.value == 0.0 for b in sol.beta)


def test_mod_one_solver_uses_integer_lifts():
    H = np.array([[2.0, 0.0], [0.0, 1.0]])
    d = np.array([0.3, 0.4])
    beta = ob._solve_mod_one(H, d, 1e-9)
    r = H @ beta - d
    assert np.allclose(r, np.round(r))
    assert ob._solve_mod_one(np.zeros((1, 2)), np.array([0.3]), 1e-9) is None


@pytest.mark.parametrize(
    "scenario, r",
    [
        (lambda: sphere_scenario(n=1), 2),
        (lambda: sphere_scenario(n=2), 1),
        (lambda: sphere_scenario("su2", n=1), 1),
        (lambda: circle_scenario(0.1), 1),
        (lambda: circle_scenario(0.1, manifold="torus2"), 1),
    ],
)
def test_min_tensor_power(scenario, r):
    s = scenario()
    got = ob.min_tensor_power(s, connection_for(s))
    assert got == r
    assert lie.torsion_exponent(s.group) % got == 0


def test_min_tensor_power_reports_none():
    s = sphere_scenario(n=1)
    assert ob.min_tensor_power(s, connection_for(s), r_max=1) is None


# -- tensor products ----------------------------------------------------------------------


@pytest.mark.parametrize("k", [1, 2, 3])
def test_tensor_delta_so3_cancels(k):
    s = sphere_scenario(n=1)
    conn = connection_for(s)
    X = lie.so3().element((0.0, TWO_PI * k, 0.0))
    assert ob.tensor_delta(s, conn, s, conn, X).is_zero(5e-5)
    # oracle: delta on the lambda = 1/2pi scenario
    s2 = sphere_scenario(n=2)
    assert ob.delta(s2, connection_for(s2), X).value.is_zero(5e-5)


def test_tensor_delta_with_trivial_factor():
    s = sphere_scenario(n=1)
    conn = connection_for(s)
    zero = replace(s, omega=geo.zero_form(geo.SPHERE),
                   moment=geo.MomentMapSpec(lambda X, p: np.zeros(p.shape[:-1])))
    X = lie.so3().element((TWO_PI, 0.0, 0.0))
    got = ob.tensor_delta(s, conn, zero, hol.trivial_connection(s.manifold), X)
    assert got.isclose(ob.delta(s, conn, X).value, 1e-9)


@pytest.mark.parametrize("c1, c2", [(0.1, 0.2), (0.33, -0.5)])
def test_tensor_delta_trivial_bundles(c1, c2):
    s1, s2 = circle_scenario(c1), circle_scenario(c2)
    X = lie.circle().element((2 * TWO_PI,))
    got = ob.tensor_delta(s1, connection_for(s1), s2, connection_for(s2), X)
    assert got.isclose(2 * TWO_PI * (c1 + c2), 1e-9)


# -- invariants --------------------------------------------------------------------------


@pytest.mark.parametrize("group", ["so3", "su2", "circle"])
def test_moment_shift_does_not_touch_torsion(group):
    action = "axis:z" if group == "circle" else "standard"
    s = sphere_scenario(group, n=1, action=action)
    conn = connection_for(s)
    base = ob.lambda_on_torsion(s, conn)
    rng = np.random.default_rng(2)
    basis = lie.h1_basis(s.group)
    for _ in range(10):
        b = rng.normal(size=basis.shape[0]) @ basis if basis.shape[0] else np.zeros(3)
        shifted = ob.lambda_on_torsion(s.with_moment(s.moment.shifted(b)), conn)
        for d0, d1 in zip(base, shifted):
            assert d0.value.isclose(d1.value, 1e-9)


def test_rational_maxima_on_torsion():
    s = sphere_scenario(n=3)
    _, report = ob.lift_exists_fixed_mu(s, connection_for(s))
    r = lie.torsion_exponent(s.group)
    for d in report.torsion_only[1:]:
        _, top = geo.extremum_of_moment(s.moment, d.X, s.manifold)
        frac = Fraction(top).limit_denominator(r)
        assert abs(top - float(frac)) < 1e-5
        assert r % frac.denominator == 0


def test_fixed_point_values_differ_by_integers():
    s = sphere_scenario(n=3)
    act = s.action
    for X in lie.sample_ker_exp(s.group, np.random.default_rng(4), 5):
        zeros = geo.find_action_zeros(act, X, s.manifold)
        vals = [float(s.moment(X, z)) for z in zeros]
        assert len(vals) == 2
        assert abs((vals[0] - vals[1]) - round(vals[0] - vals[1])) < 1e-6


def test_report_json_shape():
    s = sphere_scenario(n=1, samples=2)
    _, report = ob.lift_exists_fixed_mu(s, connection_for(s))
    data = json.loads(json.dumps(report.to_dict()))
    assert {"generators", "torsion_only", "moment_shift", "flat_twist", "tensor_power"} <= set(data)
    assert set(data["generators"][0]) == {"X", "delta", "route", "witness"}
    assert ModOne(data["generators"][0]["delta"]).isclose(0.5, 5e-5)
