"""Decision procedures assembled from integrality and obstruction results.

Three nested questions are answered for a scenario:

* is ``omega`` prequantizable (integral);
* does the action lift to the prequantization with ``mu`` fixed;
* does it lift for some moment map (torsion part of Delta vanishes).

Each check yields :class:`Reason` records so a verdict can be audited.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import config
from .errors import InconsistentScenarioError, MomentMapError
from .geometry import Scenario, check_equivariance, check_moment_compatibility, is_integral
from .holonomy import ConnectionSpec, make_connection, power
from .obstruction import (
    ObstructionReport,
    evaluate_obstruction,
    min_tensor_power,
    solve_flat_twist,
    solve_moment_shift,
)

CLAUSES = {
    "action_zero": "fixed-point criterion",
    "extremum": "maximum criterion",
    "holonomy": "holonomy criterion",
    "trivial": "trivial element",
}


@dataclass(frozen=True)
class Reason:
    check: str
    passed: bool
    value: float | None
    threshold: float | None
    clause: str
    detail: str = ""

    def to_dict(self) -> dict:
        return {"check": self.check, "passed": self.passed, "value": self.value,
                "threshold": self.threshold, "clause": self.clause, "detail": self.detail}

    def line(self) -> str:
        mark = "ok  " if self.passed else "FAIL"
        val = "" if self.value is None else f" value={self.value:.9g}"
        thr = "" if self.threshold is None else f" threshold={self.threshold:.3g}"
        extra = f" ({self.detail})" if self.detail else ""
        return f"[{mark}] {self.check}: {self.clause}{val}{thr}{extra}"


@dataclass(eq=False)
class CheckOutcome:
    """Result of one check: whether it holds, why, and the evidence gathered."""

    holds: bool
    reasons: list[Reason] = field(default_factory=list)
    report: ObstructionReport | None = None


@dataclass(eq=False)
class Verdict:
    scenario: str
    prequantizable: bool
    equivariant_fixed_mu: bool
    equivariant_some_mu: bool
    tensor_power: int | None
    reasons: list[Reason] = field(default_factory=list)
    report: ObstructionReport | None = None

    def __post_init__(self):
        if self.equivariant_fixed_mu and not self.equivariant_some_mu:
            raise InconsistentScenarioError("fixed-mu lift without a some-mu lift")
        if self.equivariant_some_mu and not self.prequantizable:
            raise InconsistentScenarioError("equivariant lift of a non-integral form")

    def fields(self) -> dict:
        return {
            "prequantizable": self.prequantizable,
            "equivariant_fixed_mu": self.equivariant_fixed_mu,
            "equivariant_some_mu": self.equivariant_some_mu,
            "tensor_power": self.tensor_power,
        }

    def to_dict(self) -> dict:
        out = {"scenario": self.scenario, **self.fields()}
        out["reasons"] = [r.to_dict() for r in self.reasons]
        out["witnesses"] = None if self.report is None else self.report.to_dict()
        return out

    def mismatches(self, expected: dict) -> list[str]:
        got = self.fields()
        return [f"{k}: expected {v!r}, got {got[k]!r}" for k, v in expected.items() if got[k] != v]


def check_prequantizable(scenario: Scenario) -> CheckOutcome:
    rep = is_integral(scenario.manifold, scenario.omega)
    reason = Reason("prequantizable", rep.integral, rep.fluxes[0], config.INTEGRALITY_TOL,
                    "integrality of the flux", f"distance to Z {rep.distances[0]:.3g}")
    return CheckOutcome(rep.integral, [reason])


def check_moment_map(scenario: Scenario) -> list[Reason]:
    """Compatibility ``d mu_X = i_{X_M} omega`` and equivariance; raises on failure."""
    s = scenario
    comp = check_moment_compatibility(s.manifold, s.omega, s.action, s.moment)
    eq = check_equivariance(s.action, s.moment, s.group, rng=s.rng(salt=5))
    reasons = [
        Reason("moment_compatibility", comp.passed, comp.max_residual, comp.tol, "moment map"),
        Reason("moment_equivariance", eq.passed, eq.max_residual, eq.tol, "moment map"),
    ]
    for r in reasons:
        if not r.passed:
            raise MomentMapError(f"{r.check} fails: residual {r.value:.3g} >= {r.threshold:.3g}")
    return reasons


def _worst(entries, tol):
    bad = [d for d in entries if not d.value.is_zero(tol)]
    if bad:
        return bad[0]
    return max(entries, key=lambda d: d.value.distance(0.0), default=None)


def _delta_reason(check: str, entry, tol: float) -> Reason:
    if entry is None:
        return Reason(check, True, 0.0, tol, "empty test set")
    dist = entry.value.distance(0.0)
    return Reason(check, dist < tol, entry.value.value, tol, CLAUSES[entry.route],
                  f"X={[round(c, 12) for c in entry.X.coords]}")


def check_equivariant_fixed_mu(scenario: Scenario, conn: ConnectionSpec | None = None,
                               report: ObstructionReport | None = None) -> CheckOutcome:
    """Integrality and vanishing of Delta on ``ker exp`` with ``mu`` fixed.

    With twisting enabled, a failing fixed connection may be replaced by a
    flat twist of it; the twist is recorded as the witness.
    """
    pre = check_prequantizable(scenario)
    if not pre.holds:
        return pre
    reasons = pre.reasons + check_moment_map(scenario)
    conn = conn or make_connection(scenario.manifold, scenario.omega, scenario.beta or None)
    report = report or evaluate_obstruction(scenario, conn)
    reasons.append(_delta_reason("equivariant_fixed_mu", _worst(report.entries, scenario.tol),
                                 scenario.tol))
    holds = bool(report.lift_exists)
    if not holds and scenario.twisting_enabled:
        report.flat_twist = solve_flat_twist(scenario, conn)
        ft = report.flat_twist
        reasons.append(Reason("flat_twist", ft.feasible, None, scenario.tol, "flat twist",
                              ft.reason or f"beta={[b.value for b in ft.beta]}"))
        holds = ft.feasible
    return CheckOutcome(holds, reasons, report)


def check_equivariant_some_mu(scenario: Scenario, conn: ConnectionSpec | None = None,
                              fixed: CheckOutcome | None = None) -> CheckOutcome:
    """Integrality and vanishing of Delta on the torsion cone.

    When this holds but the fixed-mu check failed, the moment shift (and, with
    twisting enabled, the flat twist) is attached as a witness.
    """
    fixed = fixed or check_equivariant_fixed_mu(scenario, conn)
    if fixed.report is None:
        return CheckOutcome(False, [], None)
    report = fixed.report
    conn = conn or make_connection(scenario.manifold, scenario.omega, scenario.beta or None)
    reasons = [_delta_reason("equivariant_some_mu", _worst(report.torsion_only, scenario.tol),
                             scenario.tol)]
    holds = fixed.holds or bool(report.torsion_vanishes)
    if report.torsion_vanishes and not report.lift_exists:
        report.moment_shift = solve_moment_shift(scenario, conn, report)
        ms = report.moment_shift
        reasons.append(Reason("moment_shift", ms.feasible, None, scenario.tol, "moment shift",
                              ms.reason or f"b={list(ms.b)}"))
        if scenario.twisting_enabled and report.flat_twist is None:
            report.flat_twist = solve_flat_twist(scenario, conn)
    return CheckOutcome(holds, reasons, report)


def check_power_statement(scenario: Scenario, conn: ConnectionSpec | None = None,
                          report: ObstructionReport | None = None):
    """Smallest ``r`` killing the torsion obstruction, with the ``r``-fold verdict.

    Returns ``(r, outcome)``; ``outcome`` is ``None`` when no ``r`` up to the
    torsion exponent works. Raises if the ``r``-fold scenario is still
    obstructed.
    """
    conn = conn or make_connection(scenario.manifold, scenario.omega, scenario.beta or None)
    r = min_tensor_power(scenario, conn, report=report)
    if r is None:
        return None, None
    if r == 1 and report is not None:
        outcome = check_equivariant_some_mu(scenario, conn,
                                            CheckOutcome(bool(report.lift_exists), [], report))
    else:
        outcome = check_equivariant_some_mu(scenario.scaled(r), power(conn, r))
    if not outcome.holds:
        raise InconsistentScenarioError(f"{r}-fold scenario is still obstructed")
    return r, outcome


def assess(scenario: Scenario, conn: ConnectionSpec | None = None) -> Verdict:
    """Full pipeline: integrality, fixed-mu lift, some-mu lift, tensor power."""
    pre = check_prequantizable(scenario)
    if not pre.holds:
        return Verdict(scenario.name, False, False, False, None, pre.reasons)
    conn = conn or make_connection(scenario.manifold, scenario.omega, scenario.beta or None)
    fixed = check_equivariant_fixed_mu(scenario, conn)
    some = check_equivariant_some_mu(scenario, conn, fixed)
    reasons = fixed.reasons + some.reasons
    r, _ = check_power_statement(scenario, conn, fixed.report)
    fixed.report.tensor_power = r
    reasons.append(Reason("tensor_power", r is not None, None if r is None else float(r), None,
                          "tensor power"))
    return Verdict(scenario.name, True, fixed.holds, some.holds, r, reasons, fixed.report)
