"""Sweep execution and reporting for figure-style experiments.

A sweep runs every (axis value, seed, scheme) combination, persists one
Solution JSON and one trace CSV per combination, and aggregates mean
and standard deviation of the objective into a single CSV.  Failing
cells never abort the rest: each failure is recorded in the manifest
and the aggregate is computed from whatever succeeded.

Two axis kinds exist.  Load axes (``users_per_cell``, ``num_cells``)
rewrite the corresponding generator field, so they need a
generator-backed base.  The ``iterations`` axis solves each
(seed, scheme) pair once and reports the objective after each outer
iteration, giving convergence curves; it accepts either a generator
base or a fixed scenario file.

Cells run in a worker pool sized by the MECSLICE_WORKERS environment
variable (default 1); results are written to temporary files and
renamed into place, so concurrent cells never interleave within one
file, and aggregates are assembled in a fixed order so identical specs
reproduce identical CSVs byte for byte.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import tempfile
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .baselines import SchemeId, solve_scheme
from .orchestrator import SolveOptions, Solution
from .scenario import GeneratorParams, Scenario, generate_scenario, load_scenario

log = logging.getLogger(__name__)

WORKERS_ENV = "MECSLICE_WORKERS"

AGGREGATE_NAME = "aggregate.csv"
MANIFEST_NAME = "manifest.json"
CELLS_DIR = "cells"


class SweepError(RuntimeError):
    """A sweep could not be set up or reported."""


class SweepAxis(str, Enum):
    USERS_PER_CELL = "users_per_cell"
    NUM_CELLS = "num_cells"
    ITERATIONS = "iterations"


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: an axis, its values, and the scheme/seed ensemble.

    ``params`` is the generator base; every load-axis value is produced
    by rewriting one field of it.  ``scenario_path`` fixes the scenario
    instead and is only meaningful for the iterations axis.
    """

    axis: SweepAxis
    values: Tuple
    schemes: Tuple[SchemeId, ...] = tuple(SchemeId)
    seeds: Tuple[int, ...] = tuple(range(10))
    params: GeneratorParams = field(default_factory=GeneratorParams)
    scenario_path: Optional[str] = None
    solve: SolveOptions = field(default_factory=SolveOptions)

    def __post_init__(self):
        object.__setattr__(self, "axis", SweepAxis(self.axis))
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "schemes",
                           tuple(SchemeId(s) for s in self.schemes))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if not self.values:
            raise SweepError("sweep needs at least one axis value")
        if not self.seeds:
            raise SweepError("sweep needs at least one seed")
        if not self.schemes:
            raise SweepError("sweep needs at least one scheme")
        if self.scenario_path is not None and self.axis is not SweepAxis.ITERATIONS:
            raise SweepError(
                f"a fixed scenario file cannot vary {self.axis.value}; "
                "use a generator base for load axes")
        if self.axis is not SweepAxis.ITERATIONS:
            bad = [v for v in self.values if int(v) != v or int(v) < 1]
            if bad:
                raise SweepError(f"{self.axis.value} values must be positive "
                                 f"integers, got {bad}")

    def to_dict(self) -> dict:
        return {
            "axis": self.axis.value,
            "values": list(self.values),
            "schemes": [s.value for s in self.schemes],
            "seeds": list(self.seeds),
            "scenario_path": self.scenario_path,
            "params": dataclasses.asdict(self.params),
        }


@dataclass(frozen=True)
class SweepCell:
    """One solve of the sweep grid; ``value`` is None on the iterations axis."""

    value: Optional[int]
    seed: int
    scheme: SchemeId

    def stem(self, axis: SweepAxis) -> str:
        if self.value is None:
            return f"seed-{self.seed}_{self.scheme.value}"
        return f"{axis.value}-{self.value}_seed-{self.seed}_{self.scheme.value}"


@dataclass
class CellOutcome:
    cell: SweepCell
    ok: bool
    objective: Optional[float] = None
    objective_per_iteration: Optional[List[float]] = None
    converged: Optional[bool] = None
    solve_seconds: Optional[float] = None
    error: Optional[str] = None


@dataclass
class SweepSummary:
    out_dir: str
    total_cells: int
    failed_cells: List[dict]

    @property
    def ok(self) -> bool:
        return not self.failed_cells


def _atomic_write(path: Path, writer) -> None:
    """Write via ``writer(tmp_path)`` then rename onto ``path``."""
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _cell_scenario(spec: SweepSpec, cell: SweepCell) -> Scenario:
    if spec.scenario_path is not None:
        return load_scenario(spec.scenario_path)
    params = spec.params
    if spec.axis is SweepAxis.USERS_PER_CELL:
        params = replace(params, users_per_cell=int(cell.value))
    elif spec.axis is SweepAxis.NUM_CELLS:
        params = replace(params, num_cells=int(cell.value))
    return generate_scenario(params, seed=cell.seed)


def _cell_options(spec: SweepSpec) -> SolveOptions:
    if spec.axis is SweepAxis.ITERATIONS:
        # run far enough that every requested iteration index exists
        return replace(spec.solve, outer_cap=max(int(v) for v in spec.values))
    return spec.solve


def _curve(sol: Solution) -> List[float]:
    # same series Solution.to_dict persists as objective_per_iteration,
    # so aggregate.csv and report() agree by construction
    return [r.objective for r in sol.trace]


def _run_cell(spec: SweepSpec, cell: SweepCell, out_dir: str) -> CellOutcome:
    """Solve one cell and persist its artifacts; never raises."""
    try:
        scen = _cell_scenario(spec, cell)
        sol = solve_scheme(scen, cell.scheme, _cell_options(spec))
        cells = Path(out_dir) / CELLS_DIR
        stem = cell.stem(spec.axis)
        _atomic_write(cells / f"{stem}.json", lambda p: sol.save(p, scen))
        _atomic_write(cells / f"{stem}.trace.csv", sol.write_trace)
        return CellOutcome(cell, True, objective=sol.objective,
                           objective_per_iteration=_curve(sol),
                           converged=sol.converged,
                           solve_seconds=sol.solve_seconds)
    except Exception as exc:  # a failing cell must not sink the sweep
        log.warning("sweep cell %s failed: %s", cell, exc)
        return CellOutcome(cell, False,
                           error=f"{type(exc).__name__}: {exc}\n"
                                 f"{traceback.format_exc(limit=5)}")


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise SweepError(f"{WORKERS_ENV}={raw!r} is not an integer")
    if n < 1:
        raise SweepError(f"{WORKERS_ENV} must be >= 1, got {n}")
    return n


def _grid(spec: SweepSpec) -> List[SweepCell]:
    if spec.axis is SweepAxis.ITERATIONS:
        return [SweepCell(None, seed, scheme)
                for seed in spec.seeds for scheme in spec.schemes]
    return [SweepCell(int(value), seed, scheme)
            for value in spec.values
            for seed in spec.seeds for scheme in spec.schemes]


def _pad(curve: Sequence[float], n: int) -> List[float]:
    """Extend a converged trace by holding its final value."""
    out = list(curve[:n])
    while len(out) < n:
        out.append(out[-1])
    return out


def _aggregate_rows(spec: SweepSpec, outcomes: List[CellOutcome]) -> List[list]:
    rows = []
    by_key = {}
    for oc in outcomes:
        if oc.ok:
            by_key.setdefault((oc.cell.value, oc.cell.scheme), []).append(oc)
    if spec.axis is SweepAxis.ITERATIONS:
        horizon = max(int(v) for v in spec.values) + 1
        for scheme in spec.schemes:
            group = by_key.get((None, scheme), [])
            if not group:
                continue
            curves = np.array([_pad(oc.objective_per_iteration, horizon)
                               for oc in sorted(group, key=lambda o: o.cell.seed)])
            for value in spec.values:
                col = curves[:, int(value)]
                rows.append([spec.axis.value, int(value), scheme.value,
                             float(col.mean()), float(col.std()), len(col)])
    else:
        for value in spec.values:
            for scheme in spec.schemes:
                group = by_key.get((int(value), scheme), [])
                if not group:
                    continue
                objs = np.array([oc.objective for oc in
                                 sorted(group, key=lambda o: o.cell.seed)])
                rows.append([spec.axis.value, int(value), scheme.value,
                             float(objs.mean()), float(objs.std()), len(objs)])
    return rows


def _write_aggregate(path: Path, rows: List[list]) -> None:
    def writer(tmp):
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["axis", "value", "scheme",
                        "mean_objective", "std_objective", "num_seeds"])
            for axis, value, scheme, mean, std, n in rows:
                w.writerow([axis, value, scheme,
                            f"{mean:.12g}", f"{std:.12g}", n])
    _atomic_write(path, writer)


def run_sweep(spec: SweepSpec, out_dir) -> SweepSummary:
    """Execute the full grid, persist artifacts, and summarize.

    Returns a summary whose ``failed_cells`` list is empty on full
    success; the command-line wrapper maps partial failure to exit
    code 2.
    """
    out = Path(out_dir)
    (out / CELLS_DIR).mkdir(parents=True, exist_ok=True)
    cells = _grid(spec)
    workers = _worker_count()
    log.info("sweep: %d cells on %d worker(s) -> %s", len(cells), workers, out)

    if workers == 1:
        outcomes = [_run_cell(spec, cell, str(out)) for cell in cells]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell, [spec] * len(cells), cells,
                                     [str(out)] * len(cells)))

    _write_aggregate(out / AGGREGATE_NAME, _aggregate_rows(spec, outcomes))

    manifest = {
        "spec": spec.to_dict(),
        "cells": [
            {"stem": oc.cell.stem(spec.axis),
             "value": oc.cell.value, "seed": oc.cell.seed,
             "scheme": oc.cell.scheme.value, "ok": oc.ok,
             **({"objective": oc.objective,
                 "converged": oc.converged,
                 "solve_seconds": oc.solve_seconds} if oc.ok
                else {"error": oc.error})}
            for oc in outcomes
        ],
        "failed": sum(not oc.ok for oc in outcomes),
    }
    _atomic_write(out / MANIFEST_NAME, lambda p: Path(p).write_text(
        json.dumps(manifest, indent=2), encoding="utf-8"))

    failed = [c for c in manifest["cells"] if not c["ok"]]
    for c in failed:
        log.error("failed cell %s: %s", c["stem"], c["error"].splitlines()[0])
    return SweepSummary(out_dir=str(out), total_cells=len(cells),
                        failed_cells=failed)


# ---------------------------------------------------------------------------
# reporting


def report(out_dir) -> str:
    """Summarize a sweep directory as a text table with scheme gaps.

    Every objective is re-read from the persisted Solution files; the
    manifest supplies only the grid structure.  Missing or corrupt
    result files are named explicitly and skipped.
    """
    out = Path(out_dir)
    manifest_path = out / MANIFEST_NAME
    if not manifest_path.exists():
        raise SweepError(f"no results in {out} (missing {MANIFEST_NAME})")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SweepError(f"corrupt manifest {manifest_path}: {exc}") from exc

    axis = manifest["spec"]["axis"]
    values = manifest["spec"]["values"]
    schemes = manifest["spec"]["schemes"]
    iterations = axis == SweepAxis.ITERATIONS.value
    lines = [f"sweep over {axis}: values {values}, "
             f"{len(manifest['spec']['seeds'])} seed(s)"]

    # (value, scheme) -> list of objectives; the iterations axis expands
    # each solution's per-iteration curve into one entry per value
    objectives = {}
    broken = []
    for cell in manifest["cells"]:
        if not cell["ok"]:
            broken.append(f"{cell['stem']}: failed during sweep")
            continue
        path = out / CELLS_DIR / f"{cell['stem']}.json"
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
            if iterations:
                horizon = max(int(v) for v in values) + 1
                curve = _pad([float(v) for v in doc["objective_per_iteration"]],
                             horizon)
                for value in values:
                    objectives.setdefault((value, cell["scheme"]),
                                          []).append(curve[int(value)])
            else:
                objectives.setdefault((cell["value"], cell["scheme"]),
                                      []).append(float(doc["objective"]))
        except (OSError, json.JSONDecodeError, KeyError,
                ValueError, IndexError) as exc:
            broken.append(f"{path}: {type(exc).__name__}: {exc}")

    if not objectives:
        raise SweepError(f"no readable results in {out}")

    proposed = SchemeId.PROPOSED.value
    has_gaps = proposed in schemes and len(schemes) > 1
    label = "iteration" if iterations else "value"
    header = f"{label:>9} {'scheme':>10} {'mean':>12} {'std':>10} {'n':>4}"
    if has_gaps:
        header += f" {'gap_vs_proposed_%':>18}"
    lines.append(header)

    for value in values:
        base = objectives.get((value, proposed))
        base_mean = float(np.mean(base)) if base else None
        for scheme in schemes:
            group = objectives.get((value, scheme))
            if not group:
                continue
            mean, std = float(np.mean(group)), float(np.std(group))
            line = f"{value:>9} {scheme:>10} {mean:>12.4f} {std:>10.4f} {len(group):>4}"
            if has_gaps:
                if scheme == proposed or base_mean is None:
                    line += f" {'-':>18}"
                else:
                    gap = 100.0 * (mean - base_mean) / base_mean
                    line += f" {gap:>17.2f}%"
            lines.append(line)

    if broken:
        lines.append("skipped results:")
        lines.extend(f"  {b}" for b in broken)
    return "\n".join(lines)
