"""Shared builders for the test suite."""

import math
from dataclasses import replace

import numpy as np

from prequant import geometry as geo
from prequant import holonomy as hol
from prequant.scenarios import builtin, parse_scenario

FOUR_PI = 4 * math.pi


def sphere_scenario(group="so3", n=1, samples=8, action="standard", seed=0):
    lam = n / FOUR_PI
    return parse_scenario({
        "name": f"sphere-{group}-{n}",
        "manifold": "sphere2",
        "group": group,
        "omega": {"kind": "scalar_times_volume", "lambda": lam},
        "action": action,
        "moment_map": {"kind": "height", "scale": lam},
        "flags": {"samples": samples, "seed": seed},
    }).scenario


def circle_scenario(c, manifold="sphere2", samples=8, twisting=False, beta=None):
    data = {
        "name": "circle-constant",
        "manifold": manifold,
        "group": "circle",
        "omega": {"kind": "zero"},
        "action": "axis:z" if manifold == "sphere2" else "rotation",
        "moment_map": {"kind": "constant", "c": c},
        "flags": {"samples": samples, "twisting_enabled": twisting},
    }
    if beta is not None:
        data["connection"] = {"beta": list(beta)}
    return parse_scenario(data).scenario


def connection_for(s):
    return hol.make_connection(s.manifold, s.omega, s.beta or None)


def small(name, samples=8, **params):
    sf = builtin(name, params or None)
    return replace(sf, scenario=replace(sf.scenario, samples=samples))


def random_axis(rng):
    a = rng.normal(size=3)
    return a / np.linalg.norm(a)


def curve_in(act, m, X, x0, rng, stops=1):
    """A piecewise-geodesic curve from ``x0`` to ``exp(X) x0`` through random stops."""
    end = act.flow(X, np.array([1.0]), x0)[0]
    if m.kind == geo.SPHERE:
        mids = [random_near(x0, end, rng) for _ in range(stops)]
    else:
        mids = [x0 + rng.uniform(-1, 1, size=2) for _ in range(stops)]
    return hol.path_through(m, [x0, *mids, end])


def random_near(a, b, rng, spread=0.5):
    p = 0.5 * (a + b) + spread * rng.normal(size=3)
    return p / np.linalg.norm(p)

