"""Model surfaces with group actions, invariant 2-forms and moment maps.

Points are stored in the representation where all catalog data is smooth:
unit vectors in R^3 on the sphere and (unwrapped) angle pairs on the torus.
Chart coordinates, (theta, phi) and (alpha, beta), are only used to lay out
grids and finite-difference stencils.

Sign conventions: for an algebra element X the induced vector field is
``X_M(x) = d/dt exp(-tX) x`` and the orbit through x is ``s -> exp(sX) x``,
so the orbit velocity is ``-X_M``.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.optimize import minimize

from . import config, lie
from .errors import CatalogError, NumericalError, QuadratureError
from .lie import TWO_PI, AlgebraElement, GroupSpec

log = logging.getLogger(__name__)

SPHERE = "sphere2"
TORUS = "torus2"


def _as_coords(X) -> np.ndarray:
    return X.array if isinstance(X, AlgebraElement) else np.asarray(X, dtype=float)


@dataclass(frozen=True)
class ManifoldSpec:
    kind: str
    grid: int = config.DEFAULT_GRID

    def __post_init__(self):
        if self.kind not in (SPHERE, TORUS):
            raise CatalogError(f"unknown manifold {self.kind!r}")
        if self.grid < 4:
            raise ValueError("grid resolution must be at least 4")

    @property
    def point_dim(self) -> int:
        return 3 if self.kind == SPHERE else 2

    @property
    def h1_rank(self) -> int:
        return 0 if self.kind == SPHERE else 2

    @property
    def area(self) -> float:
        return 4 * math.pi if self.kind == SPHERE else TWO_PI**2

    def from_chart(self, u, v) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == TORUS:
            return np.stack(np.broadcast_arrays(u, v), axis=-1)
        st = np.sin(u)
        return np.stack([st * np.cos(v), st * np.sin(v), np.cos(u) + 0 * v], axis=-1)

    def chart_grid(self, n: int):
        """Uniform cell-centred grid; returns ``(U, V, h)`` with ``h`` the step of U."""
        if self.kind == SPHERE:
            theta = (np.arange(n) + 0.5) * math.pi / n
            phi = (np.arange(2 * n) + 0.5) * math.pi / n
            U, V = np.meshgrid(theta, phi, indexing="ij")
            return U, V, math.pi / n
        a = (np.arange(n) + 0.5) * TWO_PI / n
        U, V = np.meshgrid(a, a, indexing="ij")
        return U, V, TWO_PI / n

    def special_points(self) -> np.ndarray:
        if self.kind == SPHERE:
            return np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        return np.zeros((0, 2))

    def reference_point(self) -> np.ndarray:
        return np.array([0.0, 0.0, 1.0]) if self.kind == SPHERE else np.zeros(2)

    def quadrature(self, n: int):
        """Tensor quadrature nodes and weights for the area element.

        Sphere: Gauss-Legendre in theta (poles excluded) times the periodic
        midpoint rule in phi. Torus: periodic midpoint rule in both angles.
        """
        return _quadrature(self.kind, n)

    def tangent_frame(self, points):
        """Orthonormal frame ``(e1, e2)`` positively oriented w.r.t. the area form.

        On the sphere this is ``(e_theta, e_phi)``, undefined at the poles.
        """
        p = np.asarray(points, dtype=float)
        if self.kind == TORUS:
            e1 = np.broadcast_to(np.array([1.0, 0.0]), p.shape)
            e2 = np.broadcast_to(np.array([0.0, 1.0]), p.shape)
            return e1, e2
        theta = np.arccos(np.clip(p[..., 2], -1.0, 1.0))
        phi = np.arctan2(p[..., 1], p[..., 0])
        e1 = np.stack(
            [np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), -np.sin(theta)], axis=-1
        )
        e2 = np.stack([-np.sin(phi), np.cos(phi), np.zeros_like(phi)], axis=-1)
        return e1, e2

    def local_chart(self, x0) -> Callable[[np.ndarray], np.ndarray]:
        """A chart ``u (2,) -> point`` centred at ``x0`` that is regular at ``x0``."""
        x0 = np.asarray(x0, dtype=float)
        if self.kind == TORUS:
            return lambda u: x0 + np.asarray(u)
        helper = np.array([1.0, 0.0, 0.0]) if abs(x0[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        e1 = np.cross(x0, helper)
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(x0, e1)

        def chart(u):
            y = x0 + u[0] * e1 + u[1] * e2
            return y / np.linalg.norm(y)

        return chart

    def random_points(self, rng: np.random.Generator, count: int) -> np.ndarray:
        if self.kind == TORUS:
            return rng.uniform(0.0, TWO_PI, size=(count, 2))
        p = rng.normal(size=(count, 3))
        return p / np.linalg.norm(p, axis=-1, keepdims=True)

    def distance(self, a, b) -> np.ndarray:
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        if self.kind == TORUS:
            d = np.mod(d + math.pi, TWO_PI) - math.pi
        return np.linalg.norm(d, axis=-1)


@functools.lru_cache(maxsize=16)
def _quadrature(kind: str, n: int):
    if kind == SPHERE:
        x, w = np.polynomial.legendre.leggauss(n)
        theta = 0.5 * math.pi * (x + 1.0)
        wt = 0.5 * math.pi * w * np.sin(theta)
        phi = (np.arange(2 * n) + 0.5) * math.pi / n
        U, V = np.meshgrid(theta, phi, indexing="ij")
        W = np.outer(wt, np.full(2 * n, math.pi / n))
    else:
        a = (np.arange(n) + 0.5) * TWO_PI / n
        U, V = np.meshgrid(a, a, indexing="ij")
        W = np.full(U.shape, (TWO_PI / n) ** 2)
    m = ManifoldSpec(kind)
    pts = m.from_chart(U, V).reshape(-1, m.point_dim)
    W = W.ravel()
    pts.flags.writeable = False
    W.flags.writeable = False
    return pts, W


@dataclass(frozen=True)
class TwoFormSpec:
    """``omega = density * (area element)``.

    ``scale`` is set for the catalog forms ``scale * vol`` and is what the
    closed-form flux and the monopole potential are built from.
    """

    manifold_kind: str
    density: Callable[[np.ndarray], np.ndarray]
    scale: float | None = None
    label: str = ""

    def __call__(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.broadcast_to(np.asarray(self.density(p), dtype=float), p.shape[:-1])

    @property
    def exact_flux(self) -> float | None:
        if self.scale is None:
            return None
        return self.scale * ManifoldSpec(self.manifold_kind).area

    @property
    def is_zero(self) -> bool:
        return self.scale == 0.0

    def is_nondegenerate(self, m: ManifoldSpec) -> bool:
        if self.scale is not None:
            return self.scale != 0.0
        pts, _ = m.quadrature(min(m.grid, 64))
        return bool(np.min(np.abs(self(pts))) > 0.0)

    def __add__(self, other: TwoFormSpec) -> TwoFormSpec:
        if other.manifold_kind != self.manifold_kind:
            raise ValueError("forms live on different manifolds")
        if self.scale is not None and other.scale is not None:
            return scalar_times_volume(self.manifold_kind, self.scale + other.scale)
        a, b = self.density, other.density
        return TwoFormSpec(self.manifold_kind, lambda p: a(p) + b(p), None,
                           f"({self.label}) + ({other.label})")

    def scaled(self, r: float) -> TwoFormSpec:
        if self.scale is not None:
            return scalar_times_volume(self.manifold_kind, r * self.scale)
        d = self.density
        return TwoFormSpec(self.manifold_kind, lambda p: r * d(p), None, f"{r}*({self.label})")


def scalar_times_volume(kind: str, lam: float) -> TwoFormSpec:
    lam = float(lam)
    return TwoFormSpec(kind, lambda p: np.full(np.shape(p)[:-1], lam), lam, f"{lam!r}*vol")


def zero_form(kind: str) -> TwoFormSpec:
    return scalar_times_volume(kind, 0.0)


@dataclass(frozen=True)
class ActionSpec:
    """Linear action of a catalog group on a catalog surface.

    ``generator`` maps algebra coordinates to a rotation vector (sphere) or to
    angle rates (torus); it fixes both the point action and ``X_M``.
    """

    group: GroupSpec
    manifold_kind: str
    generator: np.ndarray
    label: str = ""

    def rate(self, X) -> np.ndarray:
        return np.asarray(self.generator) @ _as_coords(X)

    def act(self, element, points) -> np.ndarray:
        """Action of a group element (as returned by :func:`lie.exp_group`)."""
        p = np.asarray(points, dtype=float)
        g = self.group
        if g.is_abelian:
            w = np.asarray(self.generator) @ np.asarray(element, dtype=float)
            return rotate_or_shift(self.manifold_kind, p, w)
        if self.manifold_kind != SPHERE:
            raise CatalogError(f"{g.name} does not act on {self.manifold_kind}")
        r = np.asarray(element) if g.kind == "so3" else lie.su2_to_so3(element)
        return p @ r.T

    def flow(self, X, s, x) -> np.ndarray:
        """Points ``exp(s X) x``; vectorised over an array of ``s``."""
        s = np.asarray(s, dtype=float)
        w = self.rate(X)
        return rotate_or_shift(self.manifold_kind, np.asarray(x, dtype=float), s[..., None] * w)

    def vector_field(self, X, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        w = self.rate(X)
        if self.manifold_kind == SPHERE:
            return np.cross(np.broadcast_to(w, p.shape), p)
        return np.broadcast_to(-w, p.shape).copy()


def rotate_or_shift(kind: str, points, w) -> np.ndarray:
    """The element ``exp(X)`` with effective rate ``w = L X`` applied to points."""
    if kind == SPHERE:
        return lie.rotate(points, -np.asarray(w))
    return np.asarray(points) + np.asarray(w)


def standard_sphere_action(g: GroupSpec) -> ActionSpec:
    if g.kind not in ("so3", "su2"):
        raise CatalogError(f"standard sphere action needs so3 or su2, got {g.name}")
    return ActionSpec(g, SPHERE, np.eye(3), "standard")


def axis_rotation(axis, g: GroupSpec | None = None) -> ActionSpec:
    """Circle acting on the sphere with rotation vector ``X * axis``."""
    g = g or lie.circle()
    if g.kind != "circle":
        raise CatalogError("axis rotations are circle actions")
    a = np.asarray(axis, dtype=float).reshape(3, 1)
    return ActionSpec(g, SPHERE, a, f"axis:{a.ravel().tolist()}")


def torus_rotation(g: GroupSpec, direction=None) -> ActionSpec:
    """Circle or 2-torus acting on T^2 by translation of the angles.

    For the circle ``direction`` is the integer winding vector of an orbit of
    period 2pi, default ``(1, 0)``.
    """
    if g.kind == "circle":
        d = np.asarray(direction if direction is not None else (1, 0), dtype=float)
        return ActionSpec(g, TORUS, d.reshape(2, 1), f"rotation:{d.tolist()}")
    if g.kind == "torus" and g.algebra_dim <= 2:
        gen = np.eye(2)[:, : g.algebra_dim]
        return ActionSpec(g, TORUS, gen, "rotation")
    raise CatalogError(f"{g.name} has no catalog action on the torus")


@dataclass(frozen=True)
class MomentMapSpec:
    """``evaluate(X_coords, points) -> values``; linear in ``X``."""

    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    label: str = ""

    def __call__(self, X, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.broadcast_to(np.asarray(self.evaluate(_as_coords(X), p), dtype=float),
                               p.shape[:-1])

    def __add__(self, other: MomentMapSpec) -> MomentMapSpec:
        a, b = self.evaluate, other.evaluate
        return MomentMapSpec(lambda X, p: a(X, p) + b(X, p), f"{self.label} + {other.label}")

    def scaled(self, r: float) -> MomentMapSpec:
        f = self.evaluate
        return MomentMapSpec(lambda X, p: r * f(X, p), f"{r}*({self.label})")

    def shifted(self, functional) -> MomentMapSpec:
        """``mu + b`` for a constant linear functional ``b`` given in algebra coordinates."""
        b = np.asarray(functional, dtype=float)
        f = self.evaluate
        return MomentMapSpec(lambda X, p: f(X, p) + float(b @ X), f"{self.label} + b{b.tolist()}")


def height_moment(action: ActionSpec, scale: float, offset=None) -> MomentMapSpec:
    """``mu_X(x) = scale * <L X, x> + <offset, X>`` on the sphere."""
    L = np.asarray(action.generator, dtype=float)
    off = None if offset is None else np.asarray(offset, dtype=float)
    scale = float(scale)

    def evaluate(X, p):
        val = scale * (p @ (L @ X))
        return val if off is None else val + float(off @ X)

    return MomentMapSpec(evaluate, f"{scale!r}*height")


def constant_moment(c) -> MomentMapSpec:
    """``mu_X(x) = <c, X>`` independent of the point."""
    c = np.atleast_1d(np.asarray(c, dtype=float))
    return MomentMapSpec(lambda X, p: np.full(np.shape(p)[:-1], float(c @ X)),
                         f"constant{c.tolist()}")


@dataclass(frozen=True)
class Scenario:
    """A surface with a group action, an invariant 2-form and a moment map."""

    name: str
    manifold: ManifoldSpec
    group: GroupSpec
    omega: TwoFormSpec
    action: ActionSpec
    moment: MomentMapSpec
    twisting_enabled: bool = False
    tol: float = config.VERDICT_TOL
    samples: int = config.DEFAULT_SAMPLES
    seed: int = config.DEFAULT_SEED
    beta: tuple[float, ...] = field(default=())

    def with_moment(self, mu: MomentMapSpec) -> Scenario:
        return replace(self, moment=mu)

    def scaled(self, r: int) -> Scenario:
        """The ``r``-fold tensor scenario ``(r omega, r mu)``."""
        return replace(
            self,
            name=f"{self.name}^{r}",
            omega=self.omega.scaled(r),
            moment=self.moment.scaled(r),
            beta=tuple((r * b) % 1.0 for b in self.beta),
        )

    def tensor(self, other: Scenario) -> Scenario:
        if other.manifold.kind != self.manifold.kind or other.group != self.group:
            raise ValueError("tensor needs the same manifold and group")
        if not np.array_equal(other.action.generator, self.action.generator):
            raise ValueError("tensor needs the same action")
        beta = self.beta or (0.0,) * self.manifold.h1_rank
        obeta = other.beta or (0.0,) * self.manifold.h1_rank
        return replace(
            self,
            name=f"{self.name}*{other.name}",
            omega=self.omega + other.omega,
            moment=self.moment + other.moment,
            beta=tuple((a + b) % 1.0 for a, b in zip(beta, obeta)),
        )

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])


# -- integration ---------------------------------------------------------------


def converged(f: Callable[[int], float], n: int, tol: float = config.QUADRATURE_TOL) -> float:
    """Evaluate a resolution-``n`` rule at ``n`` and ``2n``; return the finer value."""
    coarse = f(n)
    fine = f(2 * n)
    if not abs(fine - coarse) < tol:
        raise QuadratureError(coarse, fine, tol)
    return fine


def integrate_two_form(m: ManifoldSpec, omega: TwoFormSpec, n: int | None = None) -> float:
    """Total flux of ``omega`` over the surface."""

    def rule(k):
        pts, w = m.quadrature(k)
        return float(np.sum(omega(pts) * w))

    return converged(rule, n or m.grid)


@dataclass(frozen=True)
class IntegralityReport:
    integral: bool
    fluxes: tuple[float, ...]
    distances: tuple[float, ...]

    def __bool__(self) -> bool:
        return self.integral


def is_integral(m: ManifoldSpec, omega: TwoFormSpec, tol: float = config.INTEGRALITY_TOL):
    """Integrality of the flux over the (single) H_2 generator of the surface."""
    flux = integrate_two_form(m, omega)
    dist = abs(flux - round(flux))
    return IntegralityReport(dist < tol, (flux,), (dist,))


# -- moment map checks ----------------------------------------------------------


@dataclass(frozen=True)
class CheckReport:
    passed: bool
    max_residual: float
    tol: float

    def __bool__(self) -> bool:
        return self.passed


def check_moment_compatibility(
    m: ManifoldSpec,
    omega: TwoFormSpec,
    act: ActionSpec,
    mu: MomentMapSpec,
    tol: float | None = None,
    grid: int | None = None,
) -> CheckReport:
    """Compare ``d mu_X`` (central differences) with ``i_{X_M} omega`` on a grid.

    Written in the orthonormal frame ``(e1, e2)``: ``d mu(e1) = -rho <X_M, e2>``
    and ``d mu(e2) = rho <X_M, e1>``. The stencil step is a quarter of the grid
    step ``h`` and the default tolerance is ``max(floor, C h^2)``.
    """
    n = min(grid or m.grid, config.COMPAT_MAX_GRID)
    U, V, h = m.chart_grid(n)
    step = h / 4
    if tol is None:
        tol = max(config.COMPAT_TOL_FLOOR, config.COMPAT_C * h * h)
    pts = m.from_chart(U, V)
    e1, e2 = m.tangent_frame(pts)
    rho = omega(pts)
    # metric factor of the second chart coordinate in the orthonormal frame
    stretch = np.sin(U) if m.kind == SPHERE else np.ones_like(U)
    worst = 0.0
    for X in act.group.basis():
        vf = act.vector_field(X, pts)
        a = np.sum(vf * e1, axis=-1)
        b = np.sum(vf * e2, axis=-1)
        du = (mu(X, m.from_chart(U + step, V)) - mu(X, m.from_chart(U - step, V))) / (2 * step)
        dv = (mu(X, m.from_chart(U, V + step)) - mu(X, m.from_chart(U, V - step))) / (2 * step)
        dv = dv / stretch
        res = np.maximum(np.abs(du + rho * b), np.abs(dv - rho * a))
        worst = max(worst, float(np.max(res)))
    return CheckReport(worst < tol, worst, tol)


def check_equivariance(
    act: ActionSpec,
    mu: MomentMapSpec,
    g: GroupSpec,
    samples: int = 16,
    rng: np.random.Generator | None = None,
    tol: float = config.EQUIVARIANCE_TOL,
) -> CheckReport:
    """Check ``mu_{Ad_phi X}(phi x) = mu_X(x)`` on random ``(phi, X, x)``."""
    rng = rng or np.random.default_rng(0)
    m = ManifoldSpec(act.manifold_kind)
    worst = 0.0
    for _ in range(samples):
        phi = lie.exp_group(g, g.element(rng.normal(size=g.algebra_dim) * math.pi))
        X = g.element(rng.normal(size=g.algebra_dim))
        x = m.random_points(rng, 8)
        lhs = mu(lie.adjoint_action(g, phi, X), act.act(phi, x))
        rhs = mu(X, x)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return CheckReport(worst < tol, worst, tol)


# -- zeros and extrema --------------------------------------------------------------


def _scan(m: ManifoldSpec, n: int):
    U, V, h = m.chart_grid(n)
    return m.from_chart(U, V), h


def min_action_speed(act: ActionSpec, X, m: ManifoldSpec, n: int | None = None) -> float:
    """Smallest ``|X_M|`` over the scan grid and special points."""
    pts, _ = _scan(m, n or min(m.grid, config.SCAN_GRID))
    allp = np.concatenate([pts.reshape(-1, m.point_dim), m.special_points()])
    return float(np.min(np.linalg.norm(act.vector_field(X, allp), axis=-1)))


def _local_minima(speed: np.ndarray, periodic_rows: bool) -> np.ndarray:
    s = np.pad(speed, ((1, 1), (0, 0)), mode="wrap" if periodic_rows else "edge")
    s = np.pad(s, ((0, 0), (1, 1)), mode="wrap")
    centre = s[1:-1, 1:-1]
    mask = np.ones_like(centre, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                mask &= centre <= s[1 + di : s.shape[0] - 1 + di, 1 + dj : s.shape[1] - 1 + dj]
    return mask


def _newton_zero(act: ActionSpec, X, m: ManifoldSpec, x0, tol: float):
    x = np.asarray(x0, dtype=float)
    for _ in range(config.NEWTON_MAX_ITER):
        vf = act.vector_field(X, x)
        if np.linalg.norm(vf) < tol:
            return x
        chart = m.local_chart(x)
        e1, e2 = _chart_frame(m, chart)

        def F(u):
            v = act.vector_field(X, chart(u))
            return np.array([v @ e1, v @ e2])

        eps = 1e-6
        J = np.column_stack(
            [(F(np.array([eps, 0.0])) - F(np.array([-eps, 0.0]))) / (2 * eps),
             (F(np.array([0.0, eps])) - F(np.array([0.0, -eps]))) / (2 * eps)]
        )
        du, *_ = np.linalg.lstsq(J, -F(np.zeros(2)), rcond=None)
        if not np.all(np.isfinite(du)) or np.linalg.norm(du) > 1.0:
            return None
        x = chart(du)
    return x if np.linalg.norm(act.vector_field(X, x)) < tol else None


def _chart_frame(m: ManifoldSpec, chart):
    eps = 1e-7
    c0 = chart(np.zeros(2))
    e1 = (chart(np.array([eps, 0.0])) - c0) / eps
    e2 = (chart(np.array([0.0, eps])) - c0) / eps
    return e1 / np.linalg.norm(e1), e2 / np.linalg.norm(e2)


def find_action_zeros(
    act: ActionSpec, X, m: ManifoldSpec, n: int | None = None, tol: float = config.ZERO_TOL
) -> list[np.ndarray]:
    """Zeros of ``X_M`` found by a grid scan plus Newton refinement.

    An empty result only means no zero was found at the scan resolution; use
    :func:`min_action_speed` for a quantitative lower bound.
    """
    X = _as_coords(X)
    if not np.any(X):
        raise ValueError("find_action_zeros needs X != 0")
    n = n or min(m.grid, config.SCAN_GRID)
    pts, h = _scan(m, n)
    speed = np.linalg.norm(act.vector_field(X, pts), axis=-1)
    top = float(np.max(speed))
    if top < tol:
        # X acts trivially: every point is a zero.
        return [m.reference_point()]
    threshold = config.ZERO_SCAN_FACTOR * h * top
    mask = _local_minima(speed, periodic_rows=m.kind == TORUS) & (speed < threshold)
    candidates = list(pts[mask])
    sp = m.special_points()
    if len(sp):
        sp_speed = np.linalg.norm(act.vector_field(X, sp), axis=-1)
        candidates.extend(sp[sp_speed < threshold])
    candidates.sort(key=lambda c: float(np.linalg.norm(act.vector_field(X, c))))
    found: list[np.ndarray] = []
    for c in candidates:
        # plateaus of the speed give many candidates around one zero
        if any(m.distance(c, f) < 8 * h for f in found):
            continue
        z = _newton_zero(act, X, m, c, tol)
        if z is None:
            log.debug("Newton refinement diverged from candidate %s", c)
            continue
        if m.kind == TORUS:
            z = np.mod(z, TWO_PI)
        if all(m.distance(z, f) > 1e-6 for f in found):
            found.append(z)
    found.sort(key=lambda p: tuple(np.round(-p, 9)))
    return found


def extremum_of_moment(mu: MomentMapSpec, X, m: ManifoldSpec, mode: str = "max"):
    """Global maximum or minimum of ``mu_X``: grid scan, then local refinement.

    Returns ``(point, value)``.
    """
    if mode not in ("max", "min"):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    X = _as_coords(X)
    sign = 1.0 if mode == "max" else -1.0
    if not np.any(X):
        x0 = m.reference_point()
        return x0, float(mu(X, x0))
    pts, h = _scan(m, min(m.grid, config.SCAN_GRID))
    allp = np.concatenate([pts.reshape(-1, m.point_dim), m.special_points()])
    vals = sign * mu(X, allp)
    best = int(np.argmax(vals))
    x0 = allp[best]
    chart = m.local_chart(x0)
    res = minimize(
        lambda u: -sign * float(mu(X, chart(u))),
        np.zeros(2),
        method="Nelder-Mead",
        options={
            "xatol": 1e-10,
            "fatol": 1e-15,
            "maxiter": 2000,
            "initial_simplex": np.array([[0.0, 0.0], [h, 0.0], [0.0, h]]),
        },
    )
    x = chart(res.x)
    value = float(mu(X, x))
    if sign * value < vals[best]:
        x, value = x0, float(mu(X, x0))
    if m.kind == TORUS:
        x = np.mod(x, TWO_PI)
    return x, value


def check_linearity(mu: MomentMapSpec, g: GroupSpec, m: ManifoldSpec, rng, count: int = 10):
    """Largest deviation from linearity of ``X -> mu_X`` on random samples."""
    worst = 0.0
    x = m.random_points(rng, 16)
    for _ in range(count):
        X = rng.normal(size=g.algebra_dim)
        Y = rng.normal(size=g.algebra_dim)
        a, b = rng.normal(size=2)
        dev = mu(a * X + b * Y, x) - a * mu(X, x) - b * mu(Y, x)
        worst = max(worst, float(np.max(np.abs(dev))))
    return worst


def require(report: CheckReport, what: str) -> None:
    if not report:
        raise NumericalError(f"{what}: residual {report.max_residual:g} >= {report.tol:g}")
