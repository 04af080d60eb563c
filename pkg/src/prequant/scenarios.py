"""Scenario files and the builtin catalog.

A scenario file is a JSON object::

    {
      "name": "sphere-so3-n1",
      "description": "...",
      "manifold": "sphere2",
      "grid": 256,
      "group": "so3",
      "omega": {"kind": "scalar_times_volume", "lambda": 0.0796} | {"kind": "zero"},
      "action": "standard",
      "moment_map": {"kind": "height", "scale": 0.0796, "shift": [0, 0, 0]},
      "connection": {"beta": [0.0, 0.0]},
      "flags": {"twisting_enabled": false, "tol": 5e-5, "samples": 32, "seed": 0},
      "expected": {"prequantizable": true, "equivariant_fixed_mu": false}
    }

``omega`` may give ``"flux": n`` instead of ``"lambda"``; the height moment
map defaults its scale to the form's ``lambda``. A ``"factors"`` list of
scenario objects builds their tensor product instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

from . import config, lie
from .errors import CatalogError, ScenarioParseError
from .geometry import (
    SPHERE,
    TORUS,
    ActionSpec,
    ManifoldSpec,
    MomentMapSpec,
    Scenario,
    axis_rotation,
    constant_moment,
    height_moment,
    scalar_times_volume,
    standard_sphere_action,
    torus_rotation,
    zero_form,
)

VERDICT_FIELDS = ("prequantizable", "equivariant_fixed_mu", "equivariant_some_mu", "tensor_power")
AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}
FLAG_FIELDS = {"twisting_enabled": bool, "tol": float, "samples": int, "seed": int}


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    scenario: Scenario
    expected: dict[str, Any] = field(default_factory=dict)
    description: str = ""
    source: dict[str, Any] = field(default_factory=dict)


def _get(d: dict, key: str, kind=None, default=...):
    if key not in d:
        if default is ...:
            raise ScenarioParseError(f"missing field {key!r}")
        return default
    val = d[key]
    if kind is float and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    if kind is not None and not isinstance(val, kind):
        raise ScenarioParseError(f"field {key!r} should be {kind.__name__}, got {val!r}")
    return val


def parse_omega(kind: str, frag: dict):
    if not isinstance(frag, dict):
        raise ScenarioParseError("omega must be an object")
    form = _get(frag, "kind", str)
    if form == "zero":
        return zero_form(kind), 0.0
    if form != "scalar_times_volume":
        raise CatalogError(f"unknown 2-form kind {form!r}")
    if "lambda" in frag:
        lam = _get(frag, "lambda", float)
    elif "flux" in frag:
        lam = _get(frag, "flux", float) / ManifoldSpec(kind).area
    else:
        raise ScenarioParseError("scalar_times_volume needs 'lambda' or 'flux'")
    return scalar_times_volume(kind, lam), lam


def parse_action(action_id: str, g: lie.GroupSpec, kind: str) -> ActionSpec:
    if not isinstance(action_id, str):
        raise ScenarioParseError("action must be a string id")
    head, _, arg = action_id.partition(":")
    if kind == SPHERE and head == "standard":
        return standard_sphere_action(g)
    if kind == SPHERE and head == "axis":
        if arg in AXES:
            axis = AXES[arg]
        else:
            try:
                axis = tuple(float(a) for a in arg.split(","))
            except ValueError:
                raise ScenarioParseError(f"bad axis {arg!r}") from None
            if len(axis) != 3:
                raise ScenarioParseError(f"axis needs 3 components, got {arg!r}")
        return axis_rotation(axis, g)
    if kind == TORUS and head == "rotation":
        direction = None
        if arg:
            try:
                direction = tuple(int(a) for a in arg.split(","))
            except ValueError:
                raise ScenarioParseError(f"bad direction {arg!r}") from None
        return torus_rotation(g, direction)
    raise CatalogError(f"unknown action {action_id!r} on {kind}")


def parse_moment(frag: dict, act: ActionSpec, lam: float) -> MomentMapSpec:
    if not isinstance(frag, dict):
        raise ScenarioParseError("moment_map must be an object")
    kind = _get(frag, "kind", str)
    dim = act.group.algebra_dim
    if kind == "height":
        if act.manifold_kind != SPHERE:
            raise CatalogError("height moment maps live on the sphere")
        scale = _get(frag, "scale", float, lam)
        shift = frag.get("shift")
        if shift is not None and len(shift) != dim:
            raise ScenarioParseError(f"shift needs {dim} entries")
        return height_moment(act, scale, shift)
    if kind == "constant":
        c = frag.get("c", 0.0)
        c = [c] if isinstance(c, (int, float)) else list(c)
        if len(c) != dim:
            raise ScenarioParseError(f"constant moment needs {dim} entries")
        return constant_moment(c)
    raise CatalogError(f"unknown moment map kind {kind!r}")


def parse_scenario(data: dict) -> ScenarioFile:
    """Build a :class:`ScenarioFile` from a decoded JSON object."""
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    name = _get(data, "name", str, "scenario")
    expected = _get(data, "expected", dict, {})
    unknown = set(expected) - set(VERDICT_FIELDS)
    if unknown:
        raise ScenarioParseError(f"expected block has unknown fields {sorted(unknown)}")
    flags = _get(data, "flags", dict, {})
    for key, typ in FLAG_FIELDS.items():
        if key in flags:
            _get(flags, key, float if typ is float else typ)
    if "factors" in data:
        parts = [parse_scenario(f).scenario for f in _get(data, "factors", list)]
        if not parts:
            raise ScenarioParseError("factors must not be empty")
        scen = parts[0]
        for p in parts[1:]:
            try:
                scen = scen.tensor(p)
            except ValueError as exc:
                raise ScenarioParseError(str(exc)) from None
    else:
        kind = _get(data, "manifold", str)
        if kind not in (SPHERE, TORUS):
            raise CatalogError(f"unknown manifold {kind!r}")
        grid = _get(data, "grid", int, config.DEFAULT_GRID)
        m = ManifoldSpec(kind, grid)
        g = lie.parse_group(_get(data, "group", str))
        omega, lam = parse_omega(kind, _get(data, "omega", dict))
        act = parse_action(_get(data, "action"), g, kind)
        mu = parse_moment(_get(data, "moment_map", dict), act, lam)
        conn = _get(data, "connection", dict, {})
        beta = tuple(float(b) for b in conn.get("beta", ()))
        if beta and len(beta) != m.h1_rank:
            raise ScenarioParseError(f"beta needs {m.h1_rank} entries on {kind}")
        scen = Scenario(name, m, g, omega, act, mu, beta=beta)
    scen = replace(
        scen,
        name=name,
        twisting_enabled=bool(flags.get("twisting_enabled", scen.twisting_enabled)),
        tol=float(flags.get("tol", scen.tol)),
        samples=int(flags.get("samples", scen.samples)),
        seed=int(flags.get("seed", scen.seed)),
    )
    return ScenarioFile(scen, dict(expected), str(data.get("description", "")), data)


def load_scenario(path: str | Path) -> ScenarioFile:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from None
    return parse_scenario(data)


def with_overrides(sf: ScenarioFile, grid=None, tol=None, samples=None, seed=None) -> ScenarioFile:
    s = sf.scenario
    if grid is not None:
        s = replace(s, manifold=ManifoldSpec(s.manifold.kind, int(grid)))
    changes = {k: v for k, v in (("tol", tol), ("samples", samples), ("seed", seed)) if v is not None}
    return replace(sf, scenario=replace(s, **changes))


# -- builtins ---------------------------------------------------------------------


def _sphere(name, group, lam, action="standard", shift=None, expected=None, description=""):
    mom = {"kind": "height", "scale": lam}
    if shift is not None:
        mom["shift"] = shift
    return {
        "name": name,
        "description": description,
        "manifold": SPHERE,
        "group": group,
        "omega": {"kind": "scalar_times_volume", "lambda": lam},
        "action": action,
        "moment_map": mom,
        "expected": expected or {},
    }


def _sphere_so3(n: int = 1) -> dict:
    lam = n / (4 * math.pi)
    ok = n % 2 == 0
    return _sphere(
        f"sphere-so3-n{n}", "so3", lam,
        expected={"prequantizable": True, "equivariant_fixed_mu": ok,
                  "equivariant_some_mu": ok, "tensor_power": 1 if ok else 2},
        description=f"SO(3) rotating S^2, omega = {n}/(4 pi) vol, mu = lambda * height",
    )


def _sphere_su2(n: int = 1) -> dict:
    return _sphere(
        f"sphere-su2-n{n}", "su2", n / (4 * math.pi),
        expected={"prequantizable": True, "equivariant_fixed_mu": True,
                  "equivariant_some_mu": True, "tensor_power": 1},
        description=f"SU(2) acting through SO(3) on S^2, omega = {n}/(4 pi) vol",
    )


def _sphere_s1_shift(n: int = 1) -> dict:
    odd = n % 2 == 1
    return _sphere(
        "sphere-s1-shift", "circle", n / (4 * math.pi), action="axis:x",
        expected={"prequantizable": True, "equivariant_fixed_mu": not odd,
                  "equivariant_some_mu": True, "tensor_power": 1},
        description="circle rotating S^2 about the x axis; fixed mu obstructed, a constant shift repairs it",
    )


def _trivial_circle(c: float = 0.1) -> dict:
    ok = abs(2 * math.pi * c - round(2 * math.pi * c)) < 1e-9
    return {
        "name": "trivial-circle",
        "description": "circle on S^2 with omega = 0, mu = c X, trivial bundle",
        "manifold": SPHERE,
        "group": "circle",
        "omega": {"kind": "zero"},
        "action": "axis:z",
        "moment_map": {"kind": "constant", "c": c},
        "expected": {"prequantizable": True, "equivariant_fixed_mu": ok,
                     "equivariant_some_mu": True, "tensor_power": 1},
    }


def _torus_flat_twist(c: float = 0.1, twisting: bool = True) -> dict:
    ok = twisting or abs(2 * math.pi * c - round(2 * math.pi * c)) < 1e-9
    return {
        "name": "torus-flat-twist",
        "description": "circle translating T^2, omega = 0, mu = c X; a flat twist repairs any c",
        "manifold": TORUS,
        "group": "circle",
        "omega": {"kind": "zero"},
        "action": "rotation",
        "moment_map": {"kind": "constant", "c": c},
        "connection": {"beta": [0.0, 0.0]},
        "flags": {"twisting_enabled": bool(twisting)},
        "expected": {"prequantizable": True, "equivariant_fixed_mu": ok,
                     "equivariant_some_mu": True, "tensor_power": 1},
    }


def _tensor_so3(n: int = 1) -> dict:
    factor = _sphere_so3(n)
    factor.pop("expected")
    return {
        "name": "tensor-so3",
        "description": "square of sphere-so3-n1: the torsion obstructions cancel",
        "factors": [factor, factor],
        "expected": {"prequantizable": True, "equivariant_fixed_mu": True,
                     "equivariant_some_mu": True, "tensor_power": 1},
    }


BUILTINS: dict[str, tuple[Callable[..., dict], str]] = {
    "sphere-so3-n1": (lambda **kw: _sphere_so3(1, **kw), "SO(3) on S^2, lambda = 1/(4 pi): obstructed, r = 2"),
    "sphere-so3-n2": (lambda **kw: _sphere_so3(2, **kw), "SO(3) on S^2, lambda = 1/(2 pi): equivariant"),
    "sphere-su2-n1": (lambda **kw: _sphere_su2(1, **kw), "SU(2) on S^2, lambda = 1/(4 pi): equivariant"),
    "sphere-s1-shift": (_sphere_s1_shift, "circle on S^2: shift mu by c = -1/(4 pi)"),
    "torus-flat-twist": (_torus_flat_twist, "circle on T^2 with omega = 0: repaired by a flat twist"),
    "trivial-circle": (_trivial_circle, "trivial bundle on S^2: equivariant iff 2 pi c is an integer"),
    "tensor-so3": (_tensor_so3, "tensor square of sphere-so3-n1: equivariant"),
}


def _coerce(value: str):
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        raise ScenarioParseError(f"parameter value {value!r} is not a number or boolean") from None


def builtin_data(name: str, params: dict[str, Any] | None = None) -> dict:
    if name not in BUILTINS:
        raise CatalogError(f"unknown builtin {name!r}")
    params = {k: _coerce(v) if isinstance(v, str) else v for k, v in (params or {}).items()}
    try:
        return BUILTINS[name][0](**params)
    except TypeError as exc:
        raise ScenarioParseError(f"bad parameters for {name}: {exc}") from None


def builtin(name: str, params: dict[str, Any] | None = None) -> ScenarioFile:
    return parse_scenario(builtin_data(name, params))


def list_builtins() -> list[tuple[str, str]]:
    return [(name, desc) for name, (_, desc) in BUILTINS.items()]


def resolve(target: str, params: dict[str, Any] | None = None) -> ScenarioFile:
    """A builtin name or a path to a scenario file."""
    if target in BUILTINS:
        return builtin(target, params)
    if params:
        raise ScenarioParseError("--param only applies to builtins")
    return load_scenario(target)
