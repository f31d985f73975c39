"""Command-line front end: generate, solve, sweep, report.

``generate`` draws a scenario and writes the explicit YAML document;
``solve`` runs one scheme on one scenario; ``sweep`` executes a grid of
(axis value, seed, scheme) cells with persisted artifacts; ``report``
turns a sweep directory into a text table with scheme gaps.

Overrides use ``--config-override key=value``.  Against a scenario
file the key is a dotted document path (``network.num_cells=3``);
against the generator it is a flat GeneratorParams field name
(``server_capacity_cps=8e10``).  Values are parsed as YAML literals,
so numbers, booleans and lists all work.

Exit codes: 0 on full success, 2 when a sweep finished with failed
cells (their errors live in the manifest), 1 on hard errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path

import yaml

from .baselines import SchemeId, solve_scheme
from .orchestrator import SolveOptions
from .scenario import (GeneratorParams, ScenarioError, generate_scenario,
                       load_scenario, save_scenario)
from .sweep import SweepAxis, SweepError, SweepSpec, report, run_sweep

log = logging.getLogger(__name__)

_PARAM_FIELDS = {f.name for f in dataclasses.fields(GeneratorParams)} - {"slices"}


def _parse_overrides(pairs) -> dict:
    out = {}
    for pair in pairs or []:
        key, sep, raw = pair.partition("=")
        if not sep or not key:
            raise SystemExit(f"bad --config-override {pair!r}, expected key=value")
        try:
            value = yaml.safe_load(raw)
        except yaml.YAMLError:
            value = raw
        if isinstance(value, str):
            # YAML leaves dotless scientific notation ("8e10") as a string
            try:
                value = float(value)
            except ValueError:
                pass
        out[key] = value
    return out


def _params_from_overrides(overrides: dict) -> GeneratorParams:
    unknown = set(overrides) - _PARAM_FIELDS
    if unknown:
        raise SystemExit(
            f"unknown generator field(s) {sorted(unknown)}; "
            f"valid: {sorted(_PARAM_FIELDS)}")
    return GeneratorParams(**overrides)


def _scenario_from_args(args):
    overrides = _parse_overrides(args.config_override)
    if args.scenario:
        return load_scenario(args.scenario, overrides=overrides or None)
    return generate_scenario(_params_from_overrides(overrides), seed=args.seed)


def _solve_options(args) -> SolveOptions:
    opts = SolveOptions()
    if getattr(args, "outer_cap", None) is not None:
        opts = dataclasses.replace(opts, outer_cap=args.outer_cap)
    if getattr(args, "obj_tol", None) is not None:
        opts = dataclasses.replace(opts, obj_tol=args.obj_tol)
    return opts


def _cmd_generate(args) -> int:
    overrides = _parse_overrides(args.config_override)
    scen = generate_scenario(_params_from_overrides(overrides), seed=args.seed)
    save_scenario(scen, args.out)
    print(f"wrote {args.out}: {scen.num_users} users, {scen.num_cells} cells, "
          f"{scen.num_subchannels} subchannels, {scen.num_slices} slices")
    return 0


def _cmd_solve(args) -> int:
    scen = _scenario_from_args(args)
    sol = solve_scheme(scen, SchemeId(args.scheme), _solve_options(args))
    print(f"{sol.scheme}: objective {sol.objective:.6f} "
          f"(converged={sol.converged}, {len(sol.trace) - 1} outer iterations, "
          f"{sol.solve_seconds:.1f}s)")
    if args.out:
        out = Path(args.out)
        sol.save(out, scen)
        trace_path = out.with_suffix(".trace.csv")
        sol.write_trace(trace_path)
        print(f"wrote {out} and {trace_path}")
    return 0


def _parse_seeds(raw: str):
    seeds = []
    for part in raw.split(","):
        lo, sep, hi = part.partition("-")
        if sep:
            seeds.extend(range(int(lo), int(hi) + 1))
        else:
            seeds.append(int(part))
    return tuple(seeds)


def _cmd_sweep(args) -> int:
    overrides = _parse_overrides(args.config_override)
    if args.scenario:
        params = GeneratorParams()
        scenario_path = args.scenario
    else:
        params = _params_from_overrides(overrides)
        scenario_path = None
    schemes = (tuple(SchemeId) if args.scheme == "all"
               else tuple(SchemeId(s) for s in args.scheme.split(",")))
    spec = SweepSpec(
        axis=SweepAxis(args.axis),
        values=tuple(int(v) for v in args.values.split(",")),
        schemes=schemes,
        seeds=_parse_seeds(args.seeds) if args.seeds else (args.seed,),
        params=params,
        scenario_path=scenario_path,
        solve=_solve_options(args))
    summary = run_sweep(spec, args.out)
    print(f"sweep: {summary.total_cells - len(summary.failed_cells)}/"
          f"{summary.total_cells} cells ok -> {summary.out_dir}")
    for cell in summary.failed_cells:
        print(f"  FAILED {cell['stem']}: {cell['error'].splitlines()[0]}",
              file=sys.stderr)
    return 0 if summary.ok else 2


def _cmd_report(args) -> int:
    print(report(args.out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mecslice",
        description="Delay-deviation minimization for sliced multi-cell "
                    "MEC networks.")
    parser.add_argument("--verbose", action="store_true",
                        help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scenario=True):
        if scenario:
            p.add_argument("--scenario", help="scenario YAML (omit to generate)")
        p.add_argument("--seed", type=int, default=0, help="generator seed")
        p.add_argument("--config-override", action="append", metavar="KEY=VALUE",
                       help="override a scenario/generator field (repeatable)")

    p = sub.add_parser("generate", help="draw a scenario and write its YAML")
    add_common(p, scenario=False)
    p.add_argument("--out", required=True, help="output scenario path")
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="solve one scenario with one scheme")
    add_common(p)
    p.add_argument("--scheme", default=SchemeId.PROPOSED.value,
                   choices=[s.value for s in SchemeId])
    p.add_argument("--out", help="write Solution JSON (and trace CSV) here")
    p.add_argument("--outer-cap", type=int, help="outer iteration cap")
    p.add_argument("--obj-tol", type=float, help="outer convergence tolerance")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="run a figure-style experiment grid")
    add_common(p)
    p.add_argument("--axis", required=True,
                   choices=[a.value for a in SweepAxis])
    p.add_argument("--values", required=True,
                   help="comma-separated axis values, e.g. 4,6,8,10")
    p.add_argument("--scheme", default="all",
                   help="'all' or comma-separated scheme names")
    p.add_argument("--seeds", help="seed list like 0,1,2 or range like 0-9 "
                                   "(default: --seed alone)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--outer-cap", type=int, help="outer iteration cap")
    p.add_argument("--obj-tol", type=float, help="outer convergence tolerance")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("report", help="summarize a sweep directory")
    p.add_argument("--out", required=True, help="sweep output directory")
    p.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ScenarioError, SweepError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
