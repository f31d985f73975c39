"""Delay-deviation minimization for sliced multi-cell MEC networks.

The package splits the problem the way the solver does: scenarios and
their physics live in :mod:`mecslice.scenario` and
:mod:`mecslice.perfmodel`, the task-split LP in
:mod:`mecslice.offload_lp`, the transformed joint resource allocation
in :mod:`mecslice.fp_alm`, and the alternation that ties them together
in :mod:`mecslice.orchestrator`.  Comparison schemes are thin
restrictions of the same machinery (:mod:`mecslice.baselines`), and
:mod:`mecslice.sweep` plus the ``mecslice`` command drive experiment
grids.
"""

from .scenario import (
    ChannelState,
    GeneratorParams,
    HandoffMatrix,
    Scenario,
    ScenarioError,
    ScenarioParseError,
    ScenarioValidationError,
    Server,
    SliceSla,
    Task,
    User,
    default_slices,
    generate_scenario,
    load_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .perfmodel import (
    AllocationState,
    DelayBreakdown,
    constraint_report,
    delays,
    max_violation,
    objective,
    rate_matrix,
)
from .offload_lp import (
    OffloadError,
    OffloadInfeasibleError,
    OffloadLp,
    OffloadResult,
    build_offload_lp,
    dump_lp,
    solve_offload_lp,
)
from .fp_alm import (
    AlmState,
    FpAuxiliary,
    P2Options,
    fair_share_state,
    solve_p2,
)
from .orchestrator import (
    SolveOptions,
    Solution,
    round_and_repair,
    solve,
)
from .baselines import (
    SchemeId,
    solve_jocra,
    solve_jspra,
    solve_no_coop,
    solve_scheme,
)
from .sweep import (
    SweepAxis,
    SweepError,
    SweepSpec,
    SweepSummary,
    report,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AllocationState",
    "AlmState",
    "ChannelState",
    "DelayBreakdown",
    "FpAuxiliary",
    "GeneratorParams",
    "HandoffMatrix",
    "OffloadError",
    "OffloadInfeasibleError",
    "OffloadLp",
    "OffloadResult",
    "P2Options",
    "Scenario",
    "ScenarioError",
    "ScenarioParseError",
    "ScenarioValidationError",
    "SchemeId",
    "Server",
    "SliceSla",
    "Solution",
    "SolveOptions",
    "SweepAxis",
    "SweepError",
    "SweepSpec",
    "SweepSummary",
    "Task",
    "User",
    "build_offload_lp",
    "constraint_report",
    "default_slices",
    "delays",
    "dump_lp",
    "fair_share_state",
    "generate_scenario",
    "load_scenario",
    "max_violation",
    "objective",
    "rate_matrix",
    "report",
    "round_and_repair",
    "run_sweep",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "solve",
    "solve_jocra",
    "solve_jspra",
    "solve_no_coop",
    "solve_offload_lp",
    "solve_p2",
    "solve_scheme",
    "__version__",
]
