"""Obstructions to lifting a Hamiltonian action to a prequantization bundle.

For ``X`` in ``ker exp`` the obstruction ``Delta(X)`` in R/Z is evaluated by
one of three routes:

``action_zero``
    ``mu_X(x)`` at a zero of ``X_M``;
``extremum``
    ``max mu_X`` when the form is symplectic (critical points of ``mu_X`` are
    zeros of ``X_M``);
``holonomy``
    ``mu_X(x) - hol(tau_{x,X})`` at several base points ``x``, where ``tau``
    is the closed orbit of ``x``.

Vanishing on the generators of ``ker exp`` (plus a random sample that guards
the reduction to generators) decides whether the action lifts with ``mu``
fixed; vanishing on the torsion part decides whether it lifts for some
moment map. The solvers return explicit corrections: a moment shift in
``H^1(g)``, a flat twist on ``H_1(M)``, or a tensor power.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import config, lie
from .errors import InconsistentScenarioError
from .geometry import (
    MomentMapSpec,
    Scenario,
    extremum_of_moment,
    find_action_zeros,
)
from .holonomy import (
    ConnectionSpec,
    LoopSpec,
    ModOne,
    holonomy,
    orbit_curve,
    tensor,
)
from .lie import AlgebraElement

log = logging.getLogger(__name__)

ROUTE_ORDER = ("action_zero", "extremum", "holonomy")


@dataclass(frozen=True, eq=False)
class DeltaValue:
    X: AlgebraElement
    value: ModOne
    route: str
    witness: np.ndarray | None = None
    samples: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "X": list(self.X.coords),
            "delta": self.value.value,
            "route": self.route,
            "witness": None if self.witness is None else [float(c) for c in self.witness],
        }


def _check_inputs(scenario: Scenario, conn: ConnectionSpec, X: AlgebraElement) -> None:
    if not lie.in_ker_exp(scenario.group, X):
        raise ValueError(f"{X.coords} is not in ker exp of {scenario.group.name}")
    pts = scenario.manifold.random_points(np.random.default_rng(7), 8)
    if np.max(np.abs(conn.curvature(pts) - scenario.omega(pts))) > config.ALGEBRA_TOL:
        raise ValueError("connection curvature does not match the scenario form")


def _route_action_zero(s: Scenario, conn, X) -> DeltaValue | None:
    zeros = find_action_zeros(s.action, X, s.manifold)
    if not zeros:
        return None
    x = zeros[0]
    return DeltaValue(X, ModOne(float(s.moment(X, x))), "action_zero", x)


def _route_extremum(s: Scenario, conn, X) -> DeltaValue | None:
    if not s.omega.is_nondegenerate(s.manifold):
        return None
    x, val = extremum_of_moment(s.moment, X, s.manifold, "max")
    return DeltaValue(X, ModOne(val), "extremum", x)


def orbit_delta(s: Scenario, conn: ConnectionSpec, X, x) -> ModOne:
    """``mu_X(x) - hol(tau_{x,X})`` at a single base point."""
    loop = orbit_curve(s.action, x, X, s.manifold)
    if not isinstance(loop, LoopSpec):
        raise ValueError("orbit is not closed; X must lie in ker exp")
    return ModOne(float(s.moment(X, x))) - holonomy(conn, loop)


def _route_holonomy(s: Scenario, conn, X, base_points=None) -> DeltaValue:
    if base_points is None:
        base_points = s.manifold.random_points(s.rng(salt=101), config.DELTA_BASE_POINTS)
    values = [orbit_delta(s, conn, X, x) for x in base_points]
    ref = values[0]
    spread = max(ref.distance(v) for v in values)
    if spread > config.ROUTE_TOL:
        raise InconsistentScenarioError(
            f"Delta({X.coords}) depends on the base point: {[v.value for v in values]}"
        )
    return DeltaValue(X, ref, "holonomy", np.asarray(base_points[0]),
                      tuple(v.value for v in values))


def _trivial(X) -> DeltaValue:
    return DeltaValue(X, ModOne(0.0), "trivial")


_ROUTES = {
    "action_zero": _route_action_zero,
    "extremum": _route_extremum,
    "holonomy": _route_holonomy,
}


def delta(scenario: Scenario, conn: ConnectionSpec, X: AlgebraElement,
          route: str | None = None) -> DeltaValue:
    """``Delta(X)`` by the requested route, or the first applicable one.

    Preference order: action zero, symplectic extremum, general holonomy.
    A requested route that does not apply raises ``ValueError``.
    """
    _check_inputs(scenario, conn, X)
    if not np.any(X.array):
        return _trivial(X)
    order = (route,) if route else ROUTE_ORDER
    for name in order:
        if name not in _ROUTES:
            raise ValueError(f"unknown route {name!r}")
        out = _ROUTES[name](scenario, conn, X)
        if out is not None:
            return out
    raise ValueError(f"route {route!r} does not apply to {X.coords}")


def delta_routes(scenario: Scenario, conn: ConnectionSpec, X: AlgebraElement) -> dict[str, DeltaValue]:
    """Every applicable route's value of ``Delta(X)``."""
    _check_inputs(scenario, conn, X)
    if not np.any(X.array):
        return {"trivial": _trivial(X)}
    out = {}
    for name in ROUTE_ORDER:
        val = _ROUTES[name](scenario, conn, X)
        if val is not None:
            out[name] = val
    return out


def cross_checked_delta(scenario, conn, X, tol: float = config.ROUTE_TOL) -> DeltaValue:
    """``Delta(X)`` by the preferred route after checking all routes agree."""
    vals = delta_routes(scenario, conn, X)
    first = next(iter(vals.values()))
    for name, v in vals.items():
        if not first.value.isclose(v.value, tol):
            raise InconsistentScenarioError(
                f"routes disagree on {X.coords}: "
                + ", ".join(f"{k}={w.value.value!r}" for k, w in vals.items())
            )
    return first


# -- reports --------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class MomentShift:
    feasible: bool
    b: tuple[float, ...] | None = None
    functional: tuple[float, ...] | None = None
    moment: MomentMapSpec | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {"feasible": self.feasible, "b": None if self.b is None else list(self.b),
                "functional": None if self.functional is None else list(self.functional),
                "reason": self.reason}


@dataclass(frozen=True, eq=False)
class FlatTwist:
    feasible: bool
    beta: tuple[ModOne, ...] | None = None
    connection: ConnectionSpec | None = None
    reason: str = ""

    def to_dict(self) -> dict:
        return {"feasible": self.feasible,
                "beta": None if self.beta is None else [b.value for b in self.beta],
                "reason": self.reason}


@dataclass(eq=False)
class ObstructionReport:
    generators: list[DeltaValue] = field(default_factory=list)
    samples: list[DeltaValue] = field(default_factory=list)
    torsion_only: list[DeltaValue] = field(default_factory=list)
    lift_exists: bool | None = None
    torsion_vanishes: bool | None = None
    moment_shift: MomentShift | None = None
    flat_twist: FlatTwist | None = None
    tensor_power: int | None = None

    @property
    def entries(self) -> list[DeltaValue]:
        return self.generators + self.samples

    def to_dict(self) -> dict:
        return {
            "generators": [d.to_dict() for d in self.generators],
            "samples": [d.to_dict() for d in self.samples],
            "torsion_only": [d.to_dict() for d in self.torsion_only],
            "lift_exists": self.lift_exists,
            "torsion_vanishes": self.torsion_vanishes,
            "moment_shift": None if self.moment_shift is None else self.moment_shift.to_dict(),
            "flat_twist": None if self.flat_twist is None else self.flat_twist.to_dict(),
            "tensor_power": self.tensor_power,
        }


def kernel_test_set(scenario: Scenario) -> tuple[list[AlgebraElement], list[AlgebraElement]]:
    """Generators of ``ker exp`` and a seeded random batch from it."""
    g = scenario.group
    gens = lie.ker_exp_generators(g)
    batch = lie.sample_ker_exp(g, scenario.rng(salt=17), scenario.samples)
    return gens, batch


def evaluate_obstruction(scenario: Scenario, conn: ConnectionSpec) -> ObstructionReport:
    """Delta on generators (all routes cross-checked) and on the sample batch."""
    gens, batch = kernel_test_set(scenario)
    report = ObstructionReport()
    report.generators = [cross_checked_delta(scenario, conn, X) for X in gens]
    report.samples = [delta(scenario, conn, X) for X in batch]
    report.lift_exists = all(d.value.is_zero(scenario.tol) for d in report.entries)
    report.torsion_only = lambda_on_torsion(scenario, conn, report.entries)
    report.torsion_vanishes = all(d.value.is_zero(scenario.tol) for d in report.torsion_only)
    return report


def lift_exists_fixed_mu(scenario: Scenario, conn: ConnectionSpec):
    """Whether the action lifts with the connection and moment map fixed."""
    report = evaluate_obstruction(scenario, conn)
    return report.lift_exists, report


def lambda_on_torsion(scenario: Scenario, conn: ConnectionSpec,
                      entries: list[DeltaValue] | None = None) -> list[DeltaValue]:
    """Delta restricted to the torsion cone (the zero element is always included)."""
    g = scenario.group
    if entries is None:
        gens, batch = kernel_test_set(scenario)
        entries = [delta(scenario, conn, X) for X in gens + batch]
    out = [_trivial(g.zero())]
    out.extend(d for d in entries if np.any(d.X.array) and lie.in_torsion_cone(g, d.X))
    return out


def _all_vanish(scenario, conn, elements, tol) -> tuple[bool, float]:
    worst = 0.0
    for X in elements:
        worst = max(worst, delta(scenario, conn, X).value.distance(0.0))
    return worst < tol, worst


def solve_moment_shift(scenario: Scenario, conn: ConnectionSpec,
                       report: ObstructionReport | None = None) -> MomentShift:
    """Find ``b`` in ``H^1(g)`` with ``Delta^{mu + b} = 0`` on ``ker exp``.

    Solves ``b(X_i) = -Delta(X_i)`` on free generators, taking the
    representative of ``Delta(X_i)`` in ``(-1/2, 1/2]``.
    """
    g = scenario.group
    torsion = report.torsion_only if report is not None else lambda_on_torsion(scenario, conn)
    bad = [d for d in torsion if not d.value.is_zero(scenario.tol)]
    if bad:
        return MomentShift(False, reason=f"torsion obstruction {bad[0].value.value:.6g} "
                                         f"at X={list(bad[0].X.coords)}")
    basis = lie.h1_basis(g)
    gens = lie.free_generators(g)
    if gens and basis.shape[0]:
        d = np.array([-delta(scenario, conn, X).value.centered(scenario.tol) for X in gens])
        A = np.array([[row @ X.array for row in basis] for X in gens])
        b, *_ = np.linalg.lstsq(A, d, rcond=None)
    else:
        b = np.zeros(basis.shape[0])
    functional = b @ basis if basis.shape[0] else np.zeros(g.algebra_dim)
    mu2 = scenario.moment.shifted(functional)
    shifted = scenario.with_moment(mu2)
    gens_all, batch = kernel_test_set(scenario)
    ok, worst = _all_vanish(shifted, conn, gens_all + batch, scenario.tol)
    if not ok:
        return MomentShift(False, tuple(b), tuple(functional), None,
                           f"shifted moment map still obstructed ({worst:.3g})")
    return MomentShift(True, tuple(float(c) for c in b), tuple(float(c) for c in functional), mu2)


def _solve_mod_one(H: np.ndarray, d: np.ndarray, tol: float, reach: int = 2):
    """Real ``beta`` with ``H beta = d (mod 1)``, searching small integer lifts of ``d``."""
    g = H.shape[0]
    offsets = sorted(itertools.product(range(-reach, reach + 1), repeat=g),
                     key=lambda m: (sum(abs(c) for c in m), m))
    for m in offsets:
        beta, *_ = np.linalg.lstsq(H, d + np.array(m, dtype=float), rcond=None)
        resid = H @ beta - d
        if np.max(np.abs(resid - np.round(resid)), initial=0.0) < tol:
            return beta
    return None


def solve_flat_twist(scenario: Scenario, conn: ConnectionSpec) -> FlatTwist:
    """Find a flat twist ``beta`` cancelling Delta.

    Twisting by ``beta`` changes ``Delta(X)`` into ``Delta(X) - beta([tau_X])``,
    so the system solved is ``beta . [tau_{X_i}] = Delta(X_i) (mod 1)``.
    """
    m = scenario.manifold
    gens, batch = kernel_test_set(scenario)
    gen_deltas = [delta(scenario, conn, X) for X in gens]
    if all(d.value.is_zero(scenario.tol) for d in gen_deltas) and _all_vanish(
        scenario, conn, batch, scenario.tol
    )[0]:
        zero = tuple(ModOne(0.0) for _ in range(m.h1_rank))
        return FlatTwist(True, zero, conn)
    if m.h1_rank == 0:
        return FlatTwist(False, reason="H_1(M) = 0: no flat twist available")
    x = m.random_points(scenario.rng(salt=23), 1)[0]
    H = np.array([orbit_curve(scenario.action, x, X, m).homology for X in gens], dtype=float)
    d = np.array([dv.value.centered(scenario.tol) for dv in gen_deltas])
    beta = _solve_mod_one(H, d, scenario.tol)
    if beta is None:
        return FlatTwist(False, reason=f"no twist solves the system over orbit classes {H.tolist()}")
    beta_m = tuple(ModOne(b) for b in beta)
    twisted = conn.twisted([b.value for b in beta_m])
    ok, worst = _all_vanish(scenario, twisted, gens + batch, scenario.tol)
    if not ok:
        return FlatTwist(False, beta_m, None, f"twisted connection still obstructed ({worst:.3g})")
    return FlatTwist(True, beta_m, twisted)


def min_tensor_power(scenario: Scenario, conn: ConnectionSpec, r_max: int | None = None,
                     report: ObstructionReport | None = None) -> int | None:
    """Smallest ``r`` with ``r Delta = 0`` on the torsion cone."""
    g = scenario.group
    r_max = r_max or max(lie.torsion_exponent(g), 1)
    torsion = report.torsion_only if report is not None else lambda_on_torsion(scenario, conn)
    for r in range(1, r_max + 1):
        if all((d.value * r).is_zero(scenario.tol * r) for d in torsion):
            if lie.torsion_exponent(g) % r:
                log.warning("tensor power %d does not divide the torsion exponent", r)
            return r
    return None


def tensor_delta(s1: Scenario, conn1: ConnectionSpec, s2: Scenario, conn2: ConnectionSpec,
                 X: AlgebraElement, route: str | None = None) -> ModOne:
    """Delta of ``(conn1 (x) conn2, mu1 + mu2)``."""
    return delta(s1.tensor(s2), tensor(conn1, conn2), X, route).value

