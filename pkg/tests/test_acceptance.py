"""End-to-end acceptance checks, one marker per criterion."""

import math
from dataclasses import replace

import numpy as np
import pytest

from prequant import geometry as geo
from prequant import holonomy as hol
from prequant import lie
from prequant import obstruction as ob
from prequant import verdict as vd
from prequant.holonomy import ModOne
from prequant.scenarios import builtin, list_builtins

from support import FOUR_PI, circle_scenario, connection_for, curve_in, small, sphere_scenario

TWO_PI = 2 * math.pi
SPHERE = geo.ManifoldSpec(geo.SPHERE)
VERDICT_TOL = 5e-5

C_VALUES = [0.1, -0.37, 0.05, 0.2718, -0.9, 1.3, 1 / TWO_PI, -2 / TWO_PI, 3 / TWO_PI, 0.0]


def criterion(n):
    return pytest.mark.criterion(n)


# -- 1: integrality ----------------------------------------------------------------------


def _lambda_sweep():
    integral = [n / FOUR_PI for n in range(-8, 9)]
    rng = np.random.default_rng(2024)
    fluxes = rng.integers(-8, 8, size=83) + rng.uniform(1e-3, 1 - 1e-3, size=83)
    return integral, [float(f) / FOUR_PI for f in fluxes]


@criterion(1)
def test_sphere_flux_and_integrality_sweep():
    integral, other = _lambda_sweep()
    assert len(integral) + len(other) == 100
    for lam in integral + other:
        omega = geo.scalar_times_volume(geo.SPHERE, lam)
        assert geo.integrate_two_form(SPHERE, omega) == pytest.approx(FOUR_PI * lam, abs=1e-6)
        assert geo.is_integral(SPHERE, omega).integral is (lam in integral)


# -- 2: SO(3) obstruction -----------------------------------------------------------------


@criterion(2)
def test_so3_delta_all_routes():
    rng = np.random.default_rng(7)
    g = lie.so3()
    scenarios = {n: sphere_scenario(n=n) for n in (-2, -1, 1, 2, 3)}
    for _ in range(20):
        n = int(rng.choice(list(scenarios)))
        k = int(rng.integers(1, 4))
        axis = rng.normal(size=3)
        X = g.element(TWO_PI * k * axis / np.linalg.norm(axis))
        s = scenarios[n]
        routes = ob.delta_routes(s, connection_for(s), X)
        assert set(routes) == {"action_zero", "extremum", "holonomy"}
        for name, d in routes.items():
            assert d.value.isclose(n * k / 2, VERDICT_TOL), (n, k, name, d.value)


# -- 3: equivariant verdicts --------------------------------------------------------------


@criterion(3)
@pytest.mark.parametrize("n", [-3, -2, -1, 1, 2, 3, 4])
def test_so3_equivariant_iff_even(n):
    v = vd.assess(sphere_scenario(n=n, samples=4))
    assert v.prequantizable
    assert v.equivariant_fixed_mu is (n % 2 == 0)
    assert v.equivariant_some_mu is (n % 2 == 0)


@criterion(3)
@pytest.mark.parametrize("n", [-1, 1, 2, 3])
def test_su2_equivariant_at_every_integral_level(n):
    v = vd.assess(sphere_scenario("su2", n=n, samples=4))
    assert v.prequantizable and v.equivariant_fixed_mu


# -- 4: moment shift ------------------------------------------------------------------------


@criterion(4)
def test_moment_shift_witness():
    s = builtin("sphere-s1-shift").scenario
    conn = connection_for(s)
    sol = ob.solve_moment_shift(s, conn)
    assert sol.feasible
    assert sol.b[0] == pytest.approx(-1 / FOUR_PI, abs=1e-6)
    shifted = s.with_moment(sol.moment)
    for k in range(1, 6):
        X = s.group.element((TWO_PI * k,))
        for name, d in ob.delta_routes(shifted, conn, X).items():
            assert d.value.is_zero(VERDICT_TOL), (k, name, d.value)


# -- 5: trivial bundle --------------------------------------------------------------------


@criterion(5)
@pytest.mark.parametrize("c", C_VALUES)
def test_trivial_bundle_closed_form(c):
    s = circle_scenario(c, samples=4)
    conn = connection_for(s)
    for z in range(-5, 6):
        d = ob.delta(s, conn, s.group.element((TWO_PI * z,)))
        assert d.route in ("action_zero", "trivial")
        assert d.value.isclose(TWO_PI * z * c, 1e-9)
    on_lattice = abs(TWO_PI * c - round(TWO_PI * c)) < 1e-12
    assert vd.assess(s).equivariant_fixed_mu is on_lattice


# -- 6: torus twist -------------------------------------------------------------------------


@criterion(6)
@pytest.mark.parametrize("c", C_VALUES)
def test_torus_flat_twist(c):
    s = circle_scenario(c, manifold="torus2", samples=4, twisting=True)
    conn = connection_for(s)
    sol = ob.solve_flat_twist(s, conn)
    assert sol.feasible
    for z in range(1, 6):
        X = s.group.element((TWO_PI * z,))
        assert ob.delta(s, sol.connection, X).value.is_zero(VERDICT_TOL)
    on_lattice = abs(TWO_PI * c - round(TWO_PI * c)) < 1e-12
    fixed = vd.check_equivariant_fixed_mu(replace(s, twisting_enabled=False), conn)
    assert fixed.holds is on_lattice


# -- 7: tensor power ----------------------------------------------------------------------


@criterion(7)
def test_so3_needs_square():
    s = small("sphere-so3-n1", samples=4).scenario
    conn = connection_for(s)
    assert ob.min_tensor_power(s, conn) == 2
    assert vd.check_equivariant_fixed_mu(s.scaled(2), hol.power(conn, 2)).holds


@criterion(7)
@pytest.mark.parametrize(
    "name", [n for n, _ in list_builtins() if builtin(n).scenario.group.kind in ("circle", "torus", "su2")]
)
def test_torsion_free_builtins_need_no_power(name):
    s = small(name, samples=4).scenario
    assert ob.min_tensor_power(s, connection_for(s)) == 1


# -- 8: property suites -------------------------------------------------------------------


def _sphere_setup(n=1):
    conn = hol.make_connection(SPHERE, geo.scalar_times_volume(geo.SPHERE, n / FOUR_PI))
    act = geo.standard_sphere_action(lie.so3())
    return conn, act, geo.height_moment(act, n / FOUR_PI)


@criterion(8)
def test_8a_holonomy_laws_on_random_curves():
    conn, act, mu = _sphere_setup()
    eh = lambda Z, c: hol.equivariant_holonomy(conn, act, mu, Z, c, "potential")
    for seed in range(50):
        rng = np.random.default_rng(seed)
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        X, Y = rng.uniform(-2, 2) * axis, rng.uniform(-2, 2) * axis
        x0 = SPHERE.random_points(rng, 1)[0]
        g1 = curve_in(act, SPHERE, X, x0, rng)
        g2 = curve_in(act, SPHERE, Y, g1.end, rng)
        assert eh(X + Y, g1.then(g2)).isclose(eh(X, g1) + eh(Y, g2), 1e-5), seed
        assert eh(-X, g1.reverse()).isclose(-eh(X, g1), 1e-5), seed
        zeta = hol.great_arc(x0, SPHERE.random_points(rng, 1)[0])
        phi = lie.exp_group(lie.so3(), lie.so3().element(X))
        conj = zeta.reverse().then(g1).then(zeta.moved(act, phi))
        assert eh(X, conj).isclose(eh(X, g1), 1e-5), seed


@criterion(8)
def test_8b_gauss_bonnet_latitude_loops():
    rng = np.random.default_rng(11)
    for i in range(20):
        n = int(rng.integers(1, 4))
        conn, _, _ = _sphere_setup(n)
        alpha = float(rng.uniform(0.05, math.pi - 0.05))
        loop = hol.latitude_loop(SPHERE, alpha, axis=rng.normal(size=3))
        routes = hol.holonomy_routes(conn, loop)
        assert routes["cap"].isclose(routes["potential"], 1e-5), i
        far = hol.SphericalCap(-loop.cap.center, math.pi - alpha, -1.0)
        total = loop.cap.flux(conn.curvature) + far.flux(conn.curvature)
        assert total == pytest.approx(conn.chern[0], abs=1e-5), i
        assert ModOne(far.flux(conn.curvature)).isclose(-routes["cap"], 1e-5), i


@criterion(8)
@pytest.mark.parametrize(
    "scenario",
    [
        lambda: sphere_scenario(n=1),
        lambda: sphere_scenario(n=3),
        lambda: sphere_scenario("su2", n=1),
        lambda: sphere_scenario("circle", n=1, action="axis:x"),
        lambda: circle_scenario(0.13, manifold="torus2"),
    ],
)
def test_8c_base_point_independence(scenario):
    s = scenario()
    conn = connection_for(s)
    rng = np.random.default_rng(5)
    for X in lie.ker_exp_generators(s.group) or lie.sample_ker_exp(s.group, rng, 3):
        points = s.manifold.random_points(rng, 4)
        vals = [ob.orbit_delta(s, conn, X, x) for x in points]
        assert all(v.isclose(vals[0], 1e-5) for v in vals)


@criterion(8)
@pytest.mark.parametrize("group, action, n", [("so3", "standard", 1), ("so3", "standard", 3),
                                              ("su2", "standard", 2), ("circle", "axis:y", 1)])
def test_8d_extrema_and_fixed_points_differ_by_integers(group, action, n):
    s = sphere_scenario(group, n=n, action=action)
    rng = np.random.default_rng(3)
    for X in lie.sample_ker_exp(s.group, rng, 5):
        if not np.any(X.array):
            continue
        _, hi = geo.extremum_of_moment(s.moment, X, s.manifold, "max")
        _, lo = geo.extremum_of_moment(s.moment, X, s.manifold, "min")
        assert abs((hi - lo) - round(hi - lo)) < 1e-5
        vals = [float(s.moment(X, z)) for z in geo.find_action_zeros(s.action, X, s.manifold)]
        assert len(vals) >= 2
        for v in vals[1:]:
            assert abs((v - vals[0]) - round(v - vals[0])) < 1e-5


@criterion(8)
@pytest.mark.parametrize("group, action", [("so3", "standard"), ("su2", "standard"),
                                           ("circle", "axis:x")])
def test_8e_moment_shifts_leave_torsion_untouched(group, action):
    s = sphere_scenario(group, n=1, action=action)
    conn = connection_for(s)
    base = ob.lambda_on_torsion(s, conn)
    basis = lie.h1_basis(s.group)
    gens = lie.free_generators(s.group)
    rng = np.random.default_rng(13)
    for _ in range(10):
        b = rng.normal(size=basis.shape[0]) @ basis if basis.shape[0] else np.zeros(3)
        shifted = s.with_moment(s.moment.shifted(b))
        for d0, d1 in zip(base, ob.lambda_on_torsion(shifted, conn)):
            assert d0.value.isclose(d1.value, 1e-9)
        # on the free part the shift moves Delta by exactly b(X)
        for X in gens:
            lhs = ob.delta(shifted, conn, X).value
            assert lhs.isclose(ob.delta(s, conn, X).value + ModOne(float(b @ X.array)), 1e-9)


@criterion(8)
def test_8f_tensor_additivity():
    rng = np.random.default_rng(17)
    g = lie.so3()
    for i in range(10):
        if i % 2:
            c1, c2 = rng.uniform(-1, 1, size=2)
            s1, s2 = circle_scenario(float(c1)), circle_scenario(float(c2))
            X = lie.circle().element((TWO_PI * int(rng.integers(1, 4)),))
        else:
            n1, n2 = (int(v) for v in rng.integers(1, 4, size=2))
            s1, s2 = sphere_scenario(n=n1), sphere_scenario(n=n2)
            X = lie.sample_ker_exp(g, rng, 1)[0]
        k1, k2 = connection_for(s1), connection_for(s2)
        got = ob.tensor_delta(s1, k1, s2, k2, X)
        want = ob.delta(s1, k1, X).value + ob.delta(s2, k2, X).value
        assert got.isclose(want, 1e-5), i
