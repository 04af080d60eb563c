"""Equivariant prequantization of Lie group actions on surfaces."""

from .errors import PrequantError
from .geometry import ManifoldSpec, Scenario, TwoFormSpec
from .holonomy import ConnectionSpec, ModOne, make_connection
from .lie import AlgebraElement, GroupSpec, parse_group
from .obstruction import delta, lift_exists_fixed_mu, min_tensor_power
from .scenarios import builtin, load_scenario, parse_scenario
from .verdict import Verdict, assess

__all__ = [
    "AlgebraElement",
    "ConnectionSpec",
    "GroupSpec",
    "ManifoldSpec",
    "ModOne",
    "PrequantError",
    "Scenario",
    "TwoFormSpec",
    "Verdict",
    "assess",
    "builtin",
    "delta",
    "lift_exists_fixed_mu",
    "load_scenario",
    "make_connection",
    "min_tensor_power",
    "parse_group",
    "parse_scenario",
]
