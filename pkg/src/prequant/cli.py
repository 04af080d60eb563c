"""Command line interface: ``prequant run | list | sweep``.

Exit codes: 0 when every asserted expectation holds, 2 when a verdict
differs from the scenario's expected block, 3 on numerical failure and 4 on
parse, I/O or catalog errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import config
from .errors import CatalogError, MomentMapError, NumericalError, PrequantError, ScenarioParseError
from .scenarios import ScenarioFile, list_builtins, resolve, with_overrides
from .verdict import Verdict, assess

EXIT_OK, EXIT_MISMATCH, EXIT_NUMERICAL, EXIT_INPUT = 0, 2, 3, 4

log = logging.getLogger("prequant")


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def build_report(sf: ScenarioFile, verdict: Verdict) -> dict:
    return {
        "input": sf.source,
        "verdict": verdict.to_dict(),
        "expected": sf.expected,
        "mismatches": verdict.mismatches(sf.expected),
    }


def emit(report: dict, fmt: str = "text") -> str:
    """Serialise a run report; identical inputs give identical bytes."""
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2, default=_json_default)
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    v = report["verdict"]
    lines = [f"scenario: {v['scenario']}"]
    desc = report.get("input", {}).get("description")
    if desc:
        lines.append(f"  {desc}")
    for key in ("prequantizable", "equivariant_fixed_mu", "equivariant_some_mu", "tensor_power"):
        lines.append(f"{key:>22}: {v[key]}")
    lines.append("reasons:")
    for r in v["reasons"]:
        mark = "ok  " if r["passed"] else "FAIL"
        val = "" if r["value"] is None else f" value={r['value']:.9g}"
        thr = "" if r["threshold"] is None else f" threshold={r['threshold']:.3g}"
        extra = f" ({r['detail']})" if r["detail"] else ""
        lines.append(f"  [{mark}] {r['check']}: {r['clause']}{val}{thr}{extra}")
    if report["expected"]:
        status = "; ".join(report["mismatches"]) if report["mismatches"] else "all met"
        lines.append(f"expectations: {status}")
    return "\n".join(lines)


def _params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ScenarioParseError(f"--param expects key=value, got {item!r}")
        out[key] = value
    return out


def _env_int(name: str):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ScenarioParseError(f"{name} must be an integer, got {raw!r}") from None


def _overrides(args) -> dict:
    grid = args.grid if args.grid is not None else _env_int("PREQUANT_GRID")
    seed = args.seed if args.seed is not None else _env_int("PREQUANT_SEED")
    return {"grid": grid, "tol": args.tol, "samples": args.samples, "seed": seed}


def _apply_to_source(source: dict, ov: dict) -> dict:
    src = json.loads(json.dumps(source, default=_json_default))
    if ov["grid"] is not None:
        if "factors" in src:
            for f in src["factors"]:
                f["grid"] = ov["grid"]
        else:
            src["grid"] = ov["grid"]
    flags = src.setdefault("flags", {})
    for key in ("tol", "samples", "seed"):
        if ov[key] is not None:
            flags[key] = ov[key]
    return src


def run_one(sf: ScenarioFile, ov: dict) -> tuple[int, dict]:
    sf = with_overrides(sf, **ov)
    sf = replace(sf, source=_apply_to_source(sf.source, ov))
    verdict = assess(sf.scenario)
    report = build_report(sf, verdict)
    return (EXIT_MISMATCH if report["mismatches"] else EXIT_OK), report


def _guarded(fn):
    """Run ``fn`` mapping library errors to exit codes."""
    try:
        return fn()
    except (ScenarioParseError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, None
    except (NumericalError, MomentMapError, PrequantError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, None


def cmd_run(args) -> int:
    def go():
        sf = resolve(args.target, _params(args.param))
        return run_one(sf, _overrides(args))

    code, report = _guarded(go)
    if report is not None:
        print(emit(report, args.format))
    return code


def cmd_list(args) -> int:
    for name, desc in list_builtins():
        print(f"{name:<18} {desc}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    root = Path(args.directory)
    if not root.is_dir():
        print(f"error: {root} is not a directory", file=sys.stderr)
        return EXIT_INPUT
    worst = EXIT_OK
    reports = []
    for path in sorted(root.glob("*.json")):
        code, report = _guarded(lambda p=path: run_one(resolve(str(p)), _overrides(args)))
        worst = max(worst, code)
        if report is None:
            reports.append({"file": path.name, "exit": code})
            continue
        report["file"] = path.name
        reports.append(report)
        if args.format == "text":
            print(emit(report, "text"))
            print()
    if args.format == "json":
        print(json.dumps(reports, sort_keys=True, indent=2, default=_json_default))
    return worst


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=None,
                   help=f"quadrature grid (default {config.DEFAULT_GRID}, env PREQUANT_GRID)")
    p.add_argument("--tol", type=float, default=None,
                   help=f"verdict tolerance (default {config.VERDICT_TOL:g})")
    p.add_argument("--samples", type=int, default=None,
                   help=f"random ker exp samples (default {config.DEFAULT_SAMPLES})")
    p.add_argument("--seed", type=int, default=None,
                   help=f"sampler seed (default {config.DEFAULT_SEED}, env PREQUANT_SEED)")
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prequant",
        description="Equivariant prequantization checks for group actions on surfaces.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="assess a scenario file or builtin")
    run.add_argument("target", help="builtin name or path to a scenario JSON file")
    run.add_argument("--param", action="append", metavar="KEY=VALUE",
                     help="builtin parameter, e.g. c=0.159 (repeatable)")
    _common(run)
    run.set_defaults(func=cmd_run)

    lst = sub.add_parser("list", help="list builtin scenarios")
    lst.set_defaults(func=cmd_list)

    sweep = sub.add_parser("sweep", help="assess every *.json scenario in a directory")
    sweep.add_argument("directory")
    _common(sweep)
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
