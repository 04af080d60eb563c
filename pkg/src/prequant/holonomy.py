"""U(1) connections on the catalog surfaces and their (equivariant) holonomy.

Holonomies are stored additively as elements of R/Z (the exponent ``h`` of
``exp(2 pi i h)``). A connection is described by its curvature, its Chern
number and a flat twist on ``H_1(M, Z)``; over the catalog surfaces this data
fixes every holonomy. Three independent routes evaluate the holonomy of a loop:

``cap``
    flux of the curvature through a bounding patch, times the signed number of
    times the loop runs around the patch boundary, plus twist . homology;
``flat``
    twist . homology, for connections with zero curvature;
``potential``
    line integral of a chart potential (the monopole potential on the sphere,
    the constant flat potential on the torus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import (
    LoopError,
    NoHolonomyRouteError,
    NotIntegralError,
    NumericalError,
)
from .geometry import (
    SPHERE,
    TORUS,
    ActionSpec,
    ManifoldSpec,
    MomentMapSpec,
    TwoFormSpec,
    converged,
    integrate_two_form,
    zero_form,
)
from .lie import TWO_PI

ROUTES = ("cap", "flat", "potential")
_SNAP = 1e-15


@dataclass(frozen=True)
class ModOne:
    """A real number modulo 1, normalised into ``[0, 1)``."""

    value: float

    def __post_init__(self):
        v = float(self.value) % 1.0
        # snapping rounding-level residues keeps a + (-a) == 0 exact
        if v < _SNAP or v > 1.0 - _SNAP:
            v = 0.0
        object.__setattr__(self, "value", v)

    def __add__(self, other) -> ModOne:
        if not isinstance(other, ModOne):
            other = ModOne(other)
        s = self.value + other.value
        if s >= 1.0:
            s -= 1.0
        return ModOne(s)

    __radd__ = __add__

    def __neg__(self) -> ModOne:
        return ModOne(0.0 if self.value == 0.0 else 1.0 - self.value)

    def __sub__(self, other) -> ModOne:
        if not isinstance(other, ModOne):
            other = ModOne(other)
        return self + (-other)

    def __mul__(self, n: int) -> ModOne:
        if int(n) != n:
            raise TypeError("ModOne can only be scaled by integers")
        return ModOne((int(n) * self.value) % 1.0)

    __rmul__ = __mul__

    def __float__(self) -> float:
        return self.value

    def distance(self, other) -> float:
        """Wrap-around distance ``min(d, 1 - d)``."""
        o = other.value if isinstance(other, ModOne) else float(other) % 1.0
        d = abs(self.value - o)
        return min(d, 1.0 - d)

    def isclose(self, other, tol: float = config.ROUTE_TOL) -> bool:
        return self.distance(other) < tol

    def is_zero(self, tol: float = config.VERDICT_TOL) -> bool:
        return self.distance(0.0) < tol

    def centered(self, tol: float = 0.0) -> float:
        """Representative in ``(-1/2, 1/2]``; values within ``tol`` of 1/2 map to +1/2."""
        v = self.value
        if abs(v - 0.5) <= tol:
            return 0.5
        return v if v < 0.5 else v - 1.0

    def __repr__(self) -> str:
        return f"ModOne({self.value!r})"


# -- curves ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Curve:
    """A curve ``[0, 1] -> M`` evaluated on arrays of parameters.

    ``point`` maps ``t (m,)`` to ``(m, dim)``; ``velocity`` likewise. Curves
    without an analytic velocity fall back to central differences.
    """

    point: object
    velocity: object = None

    def __call__(self, t) -> np.ndarray:
        return self.point(np.atleast_1d(np.asarray(t, dtype=float)))

    def at(self, t: float) -> np.ndarray:
        return self(np.array([t]))[0]

    @property
    def start(self) -> np.ndarray:
        return self.at(0.0)

    @property
    def end(self) -> np.ndarray:
        return self.at(1.0)

    def tangent(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if self.velocity is not None:
            return self.velocity(t)
        h = 1e-6
        lo = np.clip(t - h, 0.0, 1.0)
        hi = np.clip(t + h, 0.0, 1.0)
        return (self(hi) - self(lo)) / (hi - lo)[:, None]

    def reverse(self) -> Curve:
        p, v = self.point, self.velocity
        vel = None if v is None else (lambda t: -v(1.0 - t))
        return Curve(lambda t: p(1.0 - t), vel)

    def then(self, other: Curve) -> Curve:
        """Concatenation: ``self`` on ``[0, 1/2]``, ``other`` on ``[1/2, 1]``."""
        a, b = self, other

        def point(t):
            first = t <= 0.5
            out = np.empty((t.size, a.start.size))
            if first.any():
                out[first] = a(2 * t[first])
            if (~first).any():
                out[~first] = b(2 * t[~first] - 1)
            return out

        def velocity(t):
            first = t <= 0.5
            out = np.empty((t.size, a.start.size))
            if first.any():
                out[first] = 2 * a.tangent(2 * t[first])
            if (~first).any():
                out[~first] = 2 * b.tangent(2 * t[~first] - 1)
            return out

        return Curve(point, velocity)

    def moved(self, act: ActionSpec, element) -> Curve:
        """``phi . gamma``; the action is affine so velocities transform linearly."""
        p = self

        def vel(t):
            v = p.tangent(t)
            return act.act(element, v) - act.act(element, np.zeros_like(v))

        return Curve(lambda t: act.act(element, p(t)), vel)

    def sample(self, count: int = 2049) -> np.ndarray:
        return self(np.linspace(0.0, 1.0, count))


def constant_curve(x) -> Curve:
    x = np.asarray(x, dtype=float)
    return Curve(lambda t: np.tile(x, (t.size, 1)), lambda t: np.zeros((t.size, x.size)))


def great_arc(a, b) -> Curve:
    """Shortest great-circle arc between two non-antipodal unit vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    omega = math.acos(float(np.clip(a @ b, -1.0, 1.0)))
    if omega < 1e-12:
        return constant_curve(a)
    if math.pi - omega < 1e-9:
        raise ValueError("great_arc endpoints are antipodal")
    s = math.sin(omega)

    def point(t):
        return (np.sin((1 - t) * omega)[:, None] * a + np.sin(t * omega)[:, None] * b) / s

    def velocity(t):
        return omega * (-np.cos((1 - t) * omega)[:, None] * a
                        + np.cos(t * omega)[:, None] * b) / s

    return Curve(point, velocity)


def segment(a, b) -> Curve:
    """Straight segment in a flat chart (lifted torus coordinates)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return Curve(lambda t: a + t[:, None] * (b - a), lambda t: np.tile(b - a, (t.size, 1)))


def path_through(m: ManifoldSpec, points) -> Curve:
    """Piecewise-geodesic path visiting ``points`` in order."""
    pieces = [
        great_arc(p, q) if m.kind == SPHERE else segment(p, q)
        for p, q in zip(points[:-1], points[1:])
    ]
    out = pieces[0]
    for piece in pieces[1:]:
        out = out.then(piece)
    return out


# -- bounding patches ----------------------------------------------------------


def _orthonormal_completion(c):
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - (helper @ c) * c
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(c, e1)


@dataclass(frozen=True, eq=False)
class SphericalCap:
    """Geodesic disc of angular ``radius`` about ``center`` on the unit sphere.

    ``sign`` is the signed number of times the loop runs around the cap
    boundary, positive for the Stokes orientation (counter-clockwise seen from
    outside, i.e. right-handed about ``center``).
    """

    center: np.ndarray
    radius: float
    sign: float = 1.0

    def flux(self, omega: TwoFormSpec, n: int = config.DEFAULT_GRID) -> float:
        c = np.asarray(self.center, dtype=float)
        e1, e2 = _orthonormal_completion(c)
        r = float(self.radius)
        if r <= 0.0:
            return 0.0

        def rule(k):
            x, w = np.polynomial.legendre.leggauss(k)
            t = 0.5 * r * (x + 1.0)
            wt = 0.5 * r * w * np.sin(t)
            p = (np.arange(2 * k) + 0.5) * math.pi / k
            T, P = np.meshgrid(t, p, indexing="ij")
            pts = (np.cos(T)[..., None] * c
                   + np.sin(T)[..., None] * (np.cos(P)[..., None] * e1 + np.sin(P)[..., None] * e2))
            W = np.outer(wt, np.full(2 * k, math.pi / k))
            return float(np.sum(omega(pts) * W))

        return converged(rule, n)

    def check_boundary(self, curve: Curve, count: int = 2049) -> None:
        c = np.asarray(self.center, dtype=float)
        pts = curve.sample(count)
        off = np.abs(pts @ c - math.cos(self.radius))
        if np.max(off) > 1e-6:
            raise LoopError(f"cap boundary mismatch: {np.max(off):.3g}")
        if self.radius < 1e-6 or math.pi - self.radius < 1e-6:
            return
        e1, e2 = _orthonormal_completion(c)
        ang = np.unwrap(np.arctan2(pts @ e2, pts @ e1))
        turns = (ang[-1] - ang[0]) / TWO_PI
        if abs(turns - self.sign) > 1e-6:
            raise LoopError(f"cap orientation mismatch: loop turns {turns:.6g}, cap sign {self.sign}")


@dataclass(frozen=True, eq=False)
class ChartRectangle:
    """Rectangle ``[a0, a1] x [b0, b1]`` in lifted torus coordinates."""

    a0: float
    a1: float
    b0: float
    b1: float
    sign: float = 1.0

    def flux(self, omega: TwoFormSpec, n: int = config.DEFAULT_GRID) -> float:
        def rule(k):
            x, w = np.polynomial.legendre.leggauss(k)
            a = self.a0 + 0.5 * (self.a1 - self.a0) * (x + 1)
            b = self.b0 + 0.5 * (self.b1 - self.b0) * (x + 1)
            A, B = np.meshgrid(a, b, indexing="ij")
            W = np.outer(w, w) * 0.25 * (self.a1 - self.a0) * (self.b1 - self.b0)
            return float(np.sum(omega(np.stack([A, B], axis=-1)) * W))

        return converged(rule, n)

    def check_boundary(self, curve: Curve, count: int = 2049) -> None:
        pts = curve.sample(count)
        da = np.minimum(np.abs(pts[:, 0] - self.a0), np.abs(pts[:, 0] - self.a1))
        db = np.minimum(np.abs(pts[:, 1] - self.b0), np.abs(pts[:, 1] - self.b1))
        if np.max(np.minimum(da, db)) > 1e-6:
            raise LoopError("loop leaves the rectangle boundary")
        x, y = pts[:, 0], pts[:, 1]
        area = 0.5 * np.sum(x[:-1] * y[1:] - x[1:] * y[:-1])
        turns = area / ((self.a1 - self.a0) * (self.b1 - self.b0))
        if abs(turns - self.sign) > 1e-6:
            raise LoopError(f"rectangle orientation mismatch: {turns:.6g} vs {self.sign}")


@dataclass(frozen=True, eq=False)
class LoopSpec:
    curve: Curve
    manifold: ManifoldSpec
    cap: SphericalCap | ChartRectangle | None = None
    homology: tuple[int, ...] | None = None

    def validate(self) -> None:
        gap = float(self.manifold.distance(self.curve.start, self.curve.end))
        if gap > 1e-9:
            raise LoopError(f"curve is not closed (gap {gap:.3g})")
        if self.cap is not None:
            self.cap.check_boundary(self.curve)


def latitude_loop(m: ManifoldSpec, alpha: float, axis=(0.0, 0.0, 1.0), turns: int = 1) -> LoopSpec:
    """Circle at angle ``alpha`` from ``axis``, run ``turns`` times right-handedly."""
    k = np.asarray(axis, dtype=float)
    k = k / np.linalg.norm(k)
    e1, e2 = _orthonormal_completion(k)
    sa, ca = math.sin(alpha), math.cos(alpha)
    w = TWO_PI * turns

    def point(t):
        return ca * k + sa * (np.cos(w * t)[:, None] * e1 + np.sin(w * t)[:, None] * e2)

    def velocity(t):
        return sa * w * (-np.sin(w * t)[:, None] * e1 + np.cos(w * t)[:, None] * e2)

    return LoopSpec(Curve(point, velocity), m, cap=SphericalCap(k, alpha, float(turns)))


def torus_cycle(m: ManifoldSpec, p: int, q: int, base=(0.0, 0.0)) -> LoopSpec:
    """Straight loop of class ``(p, q)`` on the torus."""
    b = np.asarray(base, dtype=float)
    return LoopSpec(segment(b, b + TWO_PI * np.array([p, q], dtype=float)), m, homology=(p, q))


def homology_class(m: ManifoldSpec, loop: LoopSpec) -> tuple[int, ...]:
    """Class in ``H_1(M, Z)`` from unwrapped angle increments."""
    if m.kind == SPHERE:
        return ()
    results = []
    for count in (4097, 8193):
        pts = loop.curve.sample(count)
        inc = np.unwrap(pts, axis=0)
        turns = (inc[-1] - inc[0]) / TWO_PI
        cls = np.round(turns)
        if np.max(np.abs(turns - cls)) > 1e-6:
            raise LoopError(f"homology rounding residual too large: {turns}")
        results.append(tuple(int(c) for c in cls))
    if results[0] != results[1]:
        raise LoopError("loop sampled too coarsely for its homology class")
    return results[1]


# -- connections ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ConnectionSpec:
    manifold: ManifoldSpec
    curvature: TwoFormSpec
    chern: tuple[int, ...]
    flat_twist: tuple[ModOne, ...] = field(default=())

    def __post_init__(self):
        if len(self.flat_twist) != self.manifold.h1_rank:
            raise ValueError(
                f"flat twist needs {self.manifold.h1_rank} entries, got {len(self.flat_twist)}"
            )

    @property
    def has_potential(self) -> bool:
        if self.manifold.kind == SPHERE:
            return self.curvature.scale is not None
        return self.curvature.is_zero

    def twisted(self, beta) -> ConnectionSpec:
        """Same curvature, flat twist shifted by ``beta``."""
        return ConnectionSpec(
            self.manifold,
            self.curvature,
            self.chern,
            tuple(a + ModOne(b) for a, b in zip(self.flat_twist, beta)),
        )

    def twist_pairing(self, cls) -> ModOne:
        total = ModOne(0.0)
        for b, z in zip(self.flat_twist, cls):
            total = total + b * int(z)
        return total


def make_connection(
    m: ManifoldSpec, omega: TwoFormSpec, beta=None, tol: float = config.INTEGRALITY_TOL
) -> ConnectionSpec:
    """Prequantization datum with curvature ``omega``; fails unless ``omega`` is integral."""
    flux = integrate_two_form(m, omega)
    chern = round(flux)
    if abs(flux - chern) >= tol:
        raise NotIntegralError(f"flux {flux!r} is not an integer")
    beta = tuple(beta) if beta else (0.0,) * m.h1_rank
    return ConnectionSpec(m, omega, (int(chern),), tuple(ModOne(b) for b in beta))


def trivial_connection(m: ManifoldSpec) -> ConnectionSpec:
    return ConnectionSpec(m, zero_form(m.kind), (0,), (ModOne(0.0),) * m.h1_rank)


def tensor(c1: ConnectionSpec, c2: ConnectionSpec) -> ConnectionSpec:
    if c1.manifold.kind != c2.manifold.kind:
        raise ValueError("tensor product needs connections on the same manifold")
    return ConnectionSpec(
        c1.manifold,
        c1.curvature + c2.curvature,
        tuple(a + b for a, b in zip(c1.chern, c2.chern)),
        tuple(a + b for a, b in zip(c1.flat_twist, c2.flat_twist)),
    )


def power(c: ConnectionSpec, r: int) -> ConnectionSpec:
    out = c
    for _ in range(r - 1):
        out = tensor(out, c)
    return out


# -- line integrals --------------------------------------------------------------


def line_integral(curve: Curve, one_form) -> float:
    """``int A(gamma'(t)) dt`` by composite Gauss, halving until stable."""
    nodes, weights = np.polynomial.legendre.leggauss(config.LINE_GAUSS_NODES)

    def rule(segs):
        edges = np.linspace(0.0, 1.0, segs + 1)
        a, b = edges[:-1, None], edges[1:, None]
        t = (0.5 * (a + b) + 0.5 * (b - a) * nodes).ravel()
        w = (0.5 * (b - a) * weights).ravel()
        return float(np.sum(w * one_form(curve(t), curve.tangent(t))))

    segs = config.LINE_START_SEGMENTS
    prev = rule(segs)
    while segs < config.LINE_MAX_SEGMENTS:
        segs *= 2
        cur = rule(segs)
        if abs(cur - prev) < config.LINE_TOL:
            return cur
        prev = cur
    raise NumericalError(f"line integral did not stabilise ({prev!r})")


def _fibonacci_directions(count: int) -> np.ndarray:
    i = np.arange(count) + 0.5
    z = 1 - 2 * i / count
    r = np.sqrt(1 - z * z)
    phi = math.pi * (1 + 5**0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def monopole_potential(lam: float, north):
    """``A = lam <n x x, dx> / (1 + <n, x>)``, smooth away from ``-n``; ``dA = lam vol``."""
    n = np.asarray(north, dtype=float)

    def A(x, v):
        return lam * np.sum(np.cross(n, x) * v, axis=-1) / (1.0 + x @ n)

    return A


def _potential_holonomy(conn: ConnectionSpec, loop: LoopSpec) -> ModOne:
    m = conn.manifold
    if m.kind == TORUS:
        beta = np.array([b.value for b in conn.flat_twist]) / TWO_PI
        return ModOne(line_integral(loop.curve, lambda x, v: v @ beta))
    pts = loop.curve.sample(1025)
    dirs = _fibonacci_directions(256)
    # the chart singularity sits at -n; keep it as far from the loop as possible
    clearance = np.min(np.linalg.norm(pts[None, :, :] + dirs[:, None, :], axis=-1), axis=1)
    best = int(np.argmax(clearance))
    if clearance[best] < 0.05:
        raise NoHolonomyRouteError("no chart of the monopole potential avoids the loop")
    A = monopole_potential(conn.curvature.scale, dirs[best])
    return ModOne(line_integral(loop.curve, A))


def applicable_routes(conn: ConnectionSpec, loop: LoopSpec) -> list[str]:
    routes = []
    if loop.cap is not None:
        routes.append("cap")
    if conn.curvature.is_zero:
        routes.append("flat")
    if conn.has_potential:
        routes.append("potential")
    return routes


def _loop_class(conn: ConnectionSpec, loop: LoopSpec) -> tuple[int, ...]:
    if loop.homology is not None:
        return loop.homology
    return homology_class(conn.manifold, loop)


def holonomy(conn: ConnectionSpec, loop: LoopSpec, route: str | None = None) -> ModOne:
    """Holonomy of a closed loop; ``route`` defaults to the first applicable one."""
    routes = applicable_routes(conn, loop)
    if route is None:
        if not routes:
            raise NoHolonomyRouteError("loop has no cap and the connection no potential")
        route = routes[0]
    elif route not in routes:
        raise NoHolonomyRouteError(f"route {route!r} does not apply (available: {routes})")
    loop.validate()
    if route == "cap":
        flux = loop.cap.flux(conn.curvature, conn.manifold.grid)
        return ModOne(loop.cap.sign * flux) + conn.twist_pairing(_loop_class(conn, loop))
    if route == "flat":
        return conn.twist_pairing(_loop_class(conn, loop))
    return _potential_holonomy(conn, loop)


def holonomy_routes(conn: ConnectionSpec, loop: LoopSpec) -> dict[str, ModOne]:
    return {r: holonomy(conn, loop, r) for r in applicable_routes(conn, loop)}


# -- orbits and equivariant holonomy -------------------------------------------------


def orbit_curve(act: ActionSpec, x, X, m: ManifoldSpec) -> LoopSpec | Curve:
    """The orbit ``s -> exp(sX) x`` for ``s`` in ``[0, 1]``.

    Closed orbits come back as a :class:`LoopSpec` carrying a spherical cap on
    the side of the nearer fixed point (sphere) or their homology class (torus).
    """
    x = np.asarray(x, dtype=float)
    w = act.rate(X)
    curve = Curve(
        lambda s: act.flow(X, s, x),
        lambda s: -act.vector_field(X, act.flow(X, s, x)),
    )
    if float(m.distance(curve.end, x)) > 1e-9:
        return curve
    if m.kind == TORUS:
        return LoopSpec(curve, m, homology=tuple(int(round(c)) for c in w / TWO_PI))
    theta = float(np.linalg.norm(w))
    if theta < 1e-15:
        return LoopSpec(curve, m, cap=SphericalCap(x, 0.0, 0.0))
    k = w / theta
    turns = theta / TWO_PI
    if abs(turns - round(turns)) < 1e-9:
        turns = float(round(turns))
    # exp(sX) turns by -theta about k, i.e. by +theta about -k
    cosang = float(np.clip(x @ k, -1.0, 1.0))
    if cosang >= 0.0:
        cap = SphericalCap(k, math.acos(cosang), -turns)
    else:
        cap = SphericalCap(-k, math.acos(-cosang), turns)
    return LoopSpec(curve, m, cap=cap)


def _as_curve(obj) -> Curve:
    return obj.curve if isinstance(obj, LoopSpec) else obj


def equivariant_holonomy(
    conn: ConnectionSpec,
    act: ActionSpec,
    mu: MomentMapSpec,
    X,
    gamma: Curve,
    route: str | None = None,
) -> ModOne:
    """``hol_{exp X}(gamma)`` for ``gamma`` with ``gamma(1) = exp(X) gamma(0)``.

    Closing ``gamma`` with the reversed orbit gives an ordinary loop, and
    ``hol_{exp X}(gamma) = hol(gamma * reverse(tau)) + mu_X(gamma(0))``.
    """
    m = conn.manifold
    x0 = gamma.start
    tau = _as_curve(orbit_curve(act, x0, X, m))
    gap = float(m.distance(gamma.end, tau.end))
    if gap > 1e-9:
        raise LoopError(f"curve does not end at exp(X) of its start (gap {gap:.3g})")
    loop = LoopSpec(gamma.then(tau.reverse()), m)
    return holonomy(conn, loop, route) + ModOne(float(mu(X, x0)))
