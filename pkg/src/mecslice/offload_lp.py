"""Task-split LP for fixed radio and compute resources.

With subchannels, powers and CPU shares held fixed, each user's delay is
linear in its split vector y (local fraction plus one fraction per
server), so the weighted delay-deviation objective minimizes as a small
LP: per-user simplex rows, a local-cycle cap on the local fraction and
per-server cycle budgets coupling the users.

Server columns whose route is unusable (zero rate, zero CPU share, or a
remote server when cooperation is off) are pinned to zero instead of
being dropped, which keeps the variable layout dense and predictable.

Ties between equally priced routes are broken deterministically toward
the lowest server index and then toward local execution, via a cost
perturbation small enough (1e-9 of the largest route cost) to leave the
reported objective within 1e-7 relative of the true optimum.  The
reported values are always computed from the unperturbed costs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .perfmodel import AllocationState, rate_matrix
from .scenario import Scenario


class OffloadError(RuntimeError):
    pass


class OffloadInfeasibleError(OffloadError):
    """No split satisfies the local cap and server budgets; says why."""


@dataclass
class OffloadLp:
    """Assembled LP data.  Column 0 is local, column 1 + j is server j."""

    costs: np.ndarray           # (U, 1 + M), +inf on unusable columns
    usable: np.ndarray          # (U, 1 + M) bool
    local_cap: np.ndarray       # (U,) upper bound on the local fraction
    capacity: np.ndarray        # (M,) server cycle budgets
    task_cycles: np.ndarray     # (U,)
    rates: np.ndarray           # (U,) achieved rates, for diagnostics
    dropped_constant: float     # sum of weight * delay target

    @property
    def num_users(self) -> int:
        return self.costs.shape[0]

    @property
    def num_servers(self) -> int:
        return self.costs.shape[1] - 1


@dataclass
class OffloadResult:
    y: np.ndarray               # (U, 1 + M)
    lp_value: float             # unperturbed cost of y
    objective: float            # weighted delay deviation of y
    status: str


def build_offload_lp(scen: Scenario, state: AllocationState,
                     cooperation: bool = True) -> OffloadLp:
    """Assemble costs, caps and budgets from the current allocation.

    Raises :class:`OffloadInfeasibleError` immediately when some user has
    no usable server column and a local cap below one; no split can then
    satisfy that user's simplex row.
    """
    U, M = scen.num_users, scen.num_cells
    lam = scen.weights[scen.slice_of]
    rates = rate_matrix(scen, state).sum(axis=1)

    costs = np.full((U, 1 + M), np.inf)
    costs[:, 0] = lam * scen.task_cycles / scen.local_cpu

    with np.errstate(divide="ignore"):
        comm = np.where(rates > 0, scen.task_bits / rates, np.inf)
        comp = np.where(state.f > 0, scen.task_cycles[:, None] / state.f, np.inf)
    ho = scen.handoff.delays_s[scen.serving, :]
    costs[:, 1:] = lam[:, None] * (comm[:, None] + ho + comp)

    usable = np.isfinite(costs)
    if not cooperation:
        remote = np.ones((U, M), dtype=bool)
        remote[np.arange(U), scen.serving] = False
        usable[:, 1:] &= ~remote
    costs[:, 1:][~usable[:, 1:]] = np.inf

    local_cap = np.minimum(1.0, scen.local_budget / scen.task_cycles)
    stuck = ~usable[:, 1:].any(axis=1) & (local_cap < 1.0 - 1e-12)
    if np.any(stuck):
        u = int(np.argmax(stuck))
        raise OffloadInfeasibleError(
            f"user {scen.users[u].user_id} has no usable offload route and a "
            f"local cycle budget covering only {local_cap[u]:.3f} of its task")

    dropped = float(np.sum(lam * scen.targets[scen.slice_of]))
    return OffloadLp(costs=costs, usable=usable, local_cap=local_cap,
                     capacity=scen.capacity.copy(),
                     task_cycles=scen.task_cycles.copy(), rates=rates,
                     dropped_constant=dropped)


def _diagnose_infeasibility(lp: OffloadLp, solver_message: str) -> str:
    forced = (1.0 - lp.local_cap) * lp.task_cycles
    lines = [f"task-split LP infeasible: {solver_message.strip()}",
             f"cycles that cannot run locally: {forced.sum():.3e}",
             f"total server cycle budget: {lp.capacity.sum():.3e}"]
    for j in range(lp.num_servers):
        reachable = forced[lp.usable[:, 1 + j]].sum()
        lines.append(f"server {j}: budget {lp.capacity[j]:.3e}, "
                     f"forced cycles with access {reachable:.3e}")
    return "\n".join(lines)


def solve_offload_lp(lp: OffloadLp) -> OffloadResult:
    """Solve the assembled LP exactly (HiGHS) and clean the split.

    The returned rows sum to one up to float round-off (they are clipped
    to their bounds and renormalized); capacity rows hold to 1e-9
    relative of the budgets.
    """
    U, M = lp.num_users, lp.num_servers
    ncols = 1 + M

    finite_costs = lp.costs[lp.usable]
    cmax = float(np.abs(finite_costs).max(initial=0.0)) or 1.0
    # server j gets rank j, local gets rank M: lowest index wins, then local
    rank = np.tile(np.concatenate(([float(M)], np.arange(M, dtype=float))), (U, 1))
    eps = 1e-9 * cmax / max(1, M + 1)
    c = np.where(lp.usable, lp.costs + eps * rank, 0.0).ravel()

    bounds = []
    for u in range(U):
        bounds.append((0.0, float(lp.local_cap[u])))
        for j in range(M):
            bounds.append((0.0, 1.0) if lp.usable[u, 1 + j] else (0.0, 0.0))

    a_eq = np.zeros((U, U * ncols))
    for u in range(U):
        a_eq[u, u * ncols:(u + 1) * ncols] = 1.0
    b_eq = np.ones(U)

    a_ub = np.zeros((M, U * ncols))
    for j in range(M):
        a_ub[j, 1 + j::ncols] = lp.task_cycles
    b_ub = lp.capacity

    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds,
                  method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-9})
    if not res.success:
        raise OffloadInfeasibleError(_diagnose_infeasibility(lp, res.message))

    y = res.x.reshape(U, ncols)
    y = np.clip(y, 0.0, np.concatenate(
        (lp.local_cap[:, None], np.where(lp.usable[:, 1:], 1.0, 0.0)), axis=1))
    y /= y.sum(axis=1, keepdims=True)

    lp_value = float(np.sum(np.where(lp.usable, lp.costs, 0.0) * y))
    return OffloadResult(y=y, lp_value=lp_value,
                         objective=lp_value - lp.dropped_constant,
                         status="optimal")


def dump_lp(lp: OffloadLp, path) -> None:
    """Write the LP (unperturbed costs) in CPLEX LP text format."""
    U, M = lp.num_users, lp.num_servers
    names = [[f"y_{u}_{c}" for c in range(1 + M)] for u in range(U)]
    lines = ["\\ task-split LP", "Minimize", " obj:"]
    terms = []
    for u in range(U):
        for col in range(1 + M):
            if lp.usable[u, col]:
                terms.append(f" + {lp.costs[u, col]:.12g} {names[u][col]}")
    lines.append("   " + "".join(terms).lstrip(" +"))
    lines.append("Subject To")
    for u in range(U):
        row = " + ".join(names[u][col] for col in range(1 + M))
        lines.append(f" split_{u}: {row} = 1")
    for j in range(M):
        row = " + ".join(f"{lp.task_cycles[u]:.12g} {names[u][1 + j]}"
                         for u in range(U))
        lines.append(f" budget_{j}: {row} <= {lp.capacity[j]:.12g}")
    lines.append("Bounds")
    for u in range(U):
        lines.append(f" 0 <= {names[u][0]} <= {lp.local_cap[u]:.12g}")
        for j in range(M):
            if lp.usable[u, 1 + j]:
                lines.append(f" 0 <= {names[u][1 + j]} <= 1")
            else:
                lines.append(f" {names[u][1 + j]} = 0")
    lines.append("End")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
