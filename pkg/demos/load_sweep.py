"""
Figure-style experiment: objective versus offered load
======================================================

Runs a small sweep over users per cell with two schemes and two
seeds, then prints the aggregate table.  Artifacts land in
./sweep_out: one JSON + trace CSV per cell, aggregate.csv with the
mean curves, and manifest.json tying it all together.

The command line equivalent is:

    mecslice sweep --axis users_per_cell --values 4,8 \
        --scheme proposed,jocra --seeds 0-1 --out sweep_out \
        --config-override server_capacity_cps=8e10
    mecslice report --out sweep_out

The gap you should see is jocra paying for its frozen fair-share
spectrum and power.  Loose tolerances keep the demo quick; export
MECSLICE_WORKERS to parallelize cells on bigger runs.
"""

from mecslice.fp_alm import P2Options
from mecslice.orchestrator import SolveOptions
from mecslice.scenario import GeneratorParams
from mecslice.sweep import SweepAxis, SweepSpec, report, run_sweep

spec = SweepSpec(
    axis=SweepAxis.USERS_PER_CELL,
    values=(4, 8),
    schemes=("proposed", "jocra"),
    seeds=(0, 1),
    params=GeneratorParams(server_capacity_cps=8e10),
    solve=SolveOptions(obj_tol=1e-3, p2=P2Options(obj_tol=1e-3)),
)

summary = run_sweep(spec, "sweep_out")
print(f"{summary.total_cells} cells solved, "
      f"{len(summary.failed_cells)} failed\n")
print(report("sweep_out"))
