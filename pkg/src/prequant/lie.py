"""Closed catalog of compact connected Lie groups.

Algebra elements are stored in coordinates. For ``so3`` and ``su2`` the three
coordinates are the rotation vector ``v`` of an element whose matrix is

    [[ 0,   a,  b],
     [-a,   0,  c],
     [-b,  -c,  0]],      v = (c, -b, a),

i.e. the matrix is ``-hat(v)`` where ``hat(v) @ w = v x w``.  With this
convention ``exp(X)`` is the rotation by ``-|v|`` about ``v`` and the induced
vector field on the sphere, ``X_M(x) = d/dt exp(-tX) x``, equals ``v x x``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import CatalogError

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-9

_PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


@dataclass(frozen=True)
class GroupSpec:
    """A catalog group together with its fundamental-group data.

    ``kind`` is one of ``circle``, ``torus``, ``so3``, ``su2``, ``abstract``.
    ``pi1_torsion_invariants`` lists ``d_i`` with torsion part ``sum Z_{d_i}``.
    """

    kind: str
    algebra_dim: int
    pi1_free_rank: int
    pi1_torsion_invariants: tuple[int, ...] = ()
    h1_algebra_dim: int = 0
    w_exponential: bool = True

    @property
    def name(self) -> str:
        if self.kind == "torus":
            return f"torus:{self.algebra_dim}"
        if self.kind == "abstract":
            torsion = ",".join(str(d) for d in self.pi1_torsion_invariants)
            return f"abstract:k={self.pi1_free_rank};torsion={torsion}"
        return self.kind

    @property
    def is_concrete(self) -> bool:
        return self.kind != "abstract"

    @property
    def is_abelian(self) -> bool:
        return self.kind in ("circle", "torus")

    def element(self, coords) -> AlgebraElement:
        return AlgebraElement(self.name, tuple(float(c) for c in np.ravel(coords)))

    def zero(self) -> AlgebraElement:
        return self.element(np.zeros(self.algebra_dim))

    def basis(self) -> list[AlgebraElement]:
        return [self.element(row) for row in np.eye(self.algebra_dim)]

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class AlgebraElement:
    group: str
    coords: tuple[float, ...]

    def __post_init__(self):
        dim = parse_group(self.group).algebra_dim
        if len(self.coords) != dim:
            raise ValueError(
                f"{self.group} algebra has dimension {dim}, got {len(self.coords)} coords"
            )

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def _like(self, arr) -> AlgebraElement:
        return AlgebraElement(self.group, tuple(float(c) for c in arr))

    def __add__(self, other: AlgebraElement) -> AlgebraElement:
        if other.group != self.group:
            raise ValueError(f"cannot add {self.group} and {other.group} elements")
        return self._like(self.array + other.array)

    def __neg__(self) -> AlgebraElement:
        return self._like(-self.array)

    def __sub__(self, other: AlgebraElement) -> AlgebraElement:
        return self + (-other)

    def __mul__(self, s: float) -> AlgebraElement:
        return self._like(float(s) * self.array)

    __rmul__ = __mul__


# -- catalog ---------------------------------------------------------------


def circle() -> GroupSpec:
    return GroupSpec("circle", 1, 1, (), 1)


def torus(n: int) -> GroupSpec:
    if n < 1:
        raise CatalogError(f"torus dimension must be positive, got {n}")
    return GroupSpec("torus", n, n, (), n)


def so3() -> GroupSpec:
    return GroupSpec("so3", 3, 0, (2,), 0)


def su2() -> GroupSpec:
    return GroupSpec("su2", 3, 0, (), 0)


def abstract(free_rank: int, torsion: tuple[int, ...] = ()) -> GroupSpec:
    """A compact group known only through ``H_1(G, Z) = Z^k + sum Z_{d_i}``."""
    if free_rank < 0 or any(d < 1 for d in torsion):
        raise CatalogError(f"invalid abstract group data k={free_rank}, torsion={torsion}")
    return GroupSpec("abstract", 0, free_rank, tuple(int(d) for d in torsion), free_rank)


def parse_group(ident: str) -> GroupSpec:
    """Resolve a catalog string id such as ``"so3"`` or ``"torus:2"``."""
    s = ident.strip().lower()
    if s == "circle":
        return circle()
    if s == "so3":
        return so3()
    if s == "su2":
        return su2()
    if s.startswith("torus:"):
        try:
            return torus(int(s.split(":", 1)[1]))
        except ValueError:
            raise CatalogError(f"bad torus id {ident!r}") from None
    if s.startswith("abstract:"):
        fields = dict(
            part.split("=", 1) for part in s.split(":", 1)[1].split(";") if "=" in part
        )
        try:
            k = int(fields.get("k", "0"))
            raw = fields.get("torsion", "").strip()
            tors = tuple(int(d) for d in raw.split(",") if d.strip())
        except ValueError:
            raise CatalogError(f"bad abstract group id {ident!r}") from None
        return abstract(k, tors)
    raise CatalogError(f"unknown group id {ident!r}")


def _require_concrete(g: GroupSpec) -> None:
    if not g.is_concrete:
        raise CatalogError(f"{g.name} carries no exponential map")


# -- so(3) helpers ----------------------------------------------------------


def hat(v) -> np.ndarray:
    """Cross-product matrix, ``hat(v) @ w == np.cross(v, w)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def algebra_matrix(v) -> np.ndarray:
    """The so(3) matrix with rotation vector ``v`` (the ``-hat(v)`` convention)."""
    return -hat(v)


def matrix_to_vector(m) -> np.ndarray:
    """Inverse of :func:`algebra_matrix`."""
    m = np.asarray(m, dtype=float)
    return np.array([m[1, 2], -m[0, 2], m[0, 1]])


def rotate(points, w) -> np.ndarray:
    """Apply the right-handed rotation by ``|w|`` about ``w`` to ``points[..., 3]``.

    ``w`` may be a single vector or have the same leading shape as ``points``.
    """
    p = np.asarray(points, dtype=float)
    w = np.asarray(w, dtype=float)
    angle = np.linalg.norm(w, axis=-1, keepdims=True)
    safe = np.where(angle > 0, angle, 1.0)
    k = np.where(angle > 0, w / safe, 0.0)
    k = np.broadcast_to(k, np.broadcast_shapes(k.shape, p.shape))
    c = np.cos(angle)
    s = np.sin(angle)
    kdotp = np.sum(k * p, axis=-1, keepdims=True)
    return p * c + np.cross(k, p) * s + k * kdotp * (1.0 - c)


def rotation_matrix(w) -> np.ndarray:
    """Right-handed rotation by ``|w|`` about ``w`` as a 3x3 matrix."""
    return rotate(np.eye(3), np.asarray(w, dtype=float)).T


def su2_to_so3(u) -> np.ndarray:
    """Two-to-one covering map, ``R_ij = tr(s_i U s_j U^*) / 2``."""
    u = np.asarray(u, dtype=complex)
    r = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            r[i, j] = 0.5 * np.trace(_PAULI[i] @ u @ _PAULI[j] @ u.conj().T).real
    return r


# -- group structure ----------------------------------------------------------


def exp_group(g: GroupSpec, X: AlgebraElement) -> np.ndarray:
    """Exponential map.

    Angles (circle, torus) are returned reduced to ``[0, 2pi)``; ``so3`` gives a
    rotation matrix and ``su2`` a 2x2 unitary matrix.
    """
    _require_concrete(g)
    v = X.array
    if g.is_abelian:
        return np.mod(v, TWO_PI)
    if g.kind == "so3":
        return rotation_matrix(-v)
    theta = np.linalg.norm(v)
    if theta == 0.0:
        return np.eye(2, dtype=complex)
    n = v / theta
    sigma = np.tensordot(n, _PAULI, axes=1)
    return math.cos(theta / 2) * np.eye(2) + 1j * math.sin(theta / 2) * sigma


def identity(g: GroupSpec) -> np.ndarray:
    _require_concrete(g)
    if g.is_abelian:
        return np.zeros(g.algebra_dim)
    if g.kind == "so3":
        return np.eye(3)
    return np.eye(2, dtype=complex)


def compose(g: GroupSpec, a, b) -> np.ndarray:
    """Group product ``a * b``."""
    _require_concrete(g)
    if g.is_abelian:
        return np.mod(np.asarray(a) + np.asarray(b), TWO_PI)
    return np.asarray(a) @ np.asarray(b)


def identity_distance(g: GroupSpec, a) -> float:
    """Distance of a group element from the identity (max-abs entries / wrapped angles)."""
    _require_concrete(g)
    a = np.asarray(a)
    if g.is_abelian:
        r = np.mod(a, TWO_PI)
        return float(np.max(np.minimum(r, TWO_PI - r), initial=0.0))
    return float(np.max(np.abs(a - identity(g))))


def _distance_to_lattice(x: float, spacing: float) -> float:
    r = math.fmod(abs(x), spacing)
    return min(r, spacing - r)


def in_ker_exp(g: GroupSpec, X: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    _require_concrete(g)
    v = X.array
    if g.is_abelian:
        return all(_distance_to_lattice(c, TWO_PI) < tol for c in v)
    period = TWO_PI if g.kind == "so3" else 2 * TWO_PI
    return _distance_to_lattice(float(np.linalg.norm(v)), period) < tol


def _in_ker_exp_cover(g: GroupSpec, X: AlgebraElement, tol: float) -> bool:
    # Universal covers: R^n for circle/torus, SU(2) for so3/su2.
    if g.is_abelian:
        return bool(np.all(np.abs(X.array) < tol))
    return in_ker_exp(su2(), AlgebraElement("su2", X.coords), tol)


def in_torsion_cone(g: GroupSpec, X: AlgebraElement, tol: float = DEFAULT_TOL) -> bool:
    """Whether some multiple ``nX`` exponentiates to 1 in the universal cover.

    The order of a torsion class divides the torsion exponent, so only
    ``n <= torsion_exponent(g)`` needs checking.
    """
    if not in_ker_exp(g, X, tol):
        raise ValueError(f"{X.coords} is not in ker exp of {g.name}")
    r = torsion_exponent(g)
    return any(_in_ker_exp_cover(g, n * X, n * tol) for n in range(1, r + 1))


def ker_exp_generators(g: GroupSpec) -> list[AlgebraElement]:
    """Deterministic generators of ``ker exp``.

    For the non-abelian catalog groups ``ker exp`` is a union of spheres, not a
    lattice; one representative per radius class up to ``k = 3`` is returned and
    :func:`sample_ker_exp` supplies random axes.
    """
    _require_concrete(g)
    if g.is_abelian:
        return [g.element(TWO_PI * row) for row in np.eye(g.algebra_dim)]
    period = TWO_PI if g.kind == "so3" else 2 * TWO_PI
    return [g.element((0.0, 0.0, period * k)) for k in (1, 2, 3)]


def free_generators(g: GroupSpec) -> list[AlgebraElement]:
    """Elements whose cover exponentials generate the free part of ``pi_1``."""
    _require_concrete(g)
    if g.is_abelian:
        return ker_exp_generators(g)
    return []


def sample_ker_exp(
    g: GroupSpec, rng: np.random.Generator, count: int, kmax: int = 3
) -> list[AlgebraElement]:
    """Random elements of ``ker exp``.

    Non-abelian groups: random unit axis times ``period * k`` with ``k`` in
    ``1..kmax``. Abelian groups: random integer combinations of the lattice basis.
    """
    _require_concrete(g)
    out = []
    if g.is_abelian:
        for _ in range(count):
            z = rng.integers(-kmax, kmax + 1, size=g.algebra_dim)
            out.append(g.element(TWO_PI * z))
        return out
    period = TWO_PI if g.kind == "so3" else 2 * TWO_PI
    for _ in range(count):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        k = int(rng.integers(1, kmax + 1))
        out.append(g.element(period * k * axis))
    return out


def torsion_exponent(g: GroupSpec) -> int:
    """Exponent of the torsion subgroup of ``pi_1(G)`` (lcm of the invariants)."""
    return reduce(math.lcm, g.pi1_torsion_invariants, 1)


def bracket(g: GroupSpec, X: AlgebraElement, Y: AlgebraElement) -> AlgebraElement:
    """Lie bracket; for so3/su2 this is the commutator of the ``-hat`` matrices."""
    _require_concrete(g)
    if g.is_abelian:
        return g.zero()
    return g.element(-np.cross(X.array, Y.array))


def adjoint_action(g: GroupSpec, phi, X: AlgebraElement) -> AlgebraElement:
    _require_concrete(g)
    if g.is_abelian:
        return X
    r = np.asarray(phi) if g.kind == "so3" else su2_to_so3(phi)
    return g.element(r @ X.array)


def h1_basis(g: GroupSpec) -> np.ndarray:
    """Basis of linear functionals on the algebra that vanish on brackets.

    Rows are functionals in algebra coordinates; shape ``(h1_dim, algebra_dim)``.
    """
    _require_concrete(g)
    if g.is_abelian:
        return np.eye(g.algebra_dim)
    return np.zeros((0, g.algebra_dim))
