"""Ground-truth evaluation of rates, delays and constraint residuals.

Every solver and baseline in this package reports numbers produced here,
so comparisons are apples-to-apples.  All functions are pure in
(Scenario, AllocationState); states that force a division like
"offloads but has zero rate" evaluate to an infinite delay marker
instead of raising.

Delay model per user: local computing on the retained fraction, uplink
transfer of the offloaded bits at the Shannon sum rate, a fixed hand-off
delay for fragments placed on non-serving servers, and edge execution at
the granted CPU share.  The uplink rate on each subchannel sees
inter-cell interference only (in-cell users never share a subchannel in
a feasible allocation).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from .scenario import Scenario


@dataclass
class AllocationState:
    """Decision variables for one scenario.

    x : (U, N)   subchannel shares in [0, 1]; binary at reported solutions
    p : (U, N)   uplink transmit powers, watts
    f : (U, M)   edge CPU allocations, cycles/s
    y : (U, 1+M) task split fractions; column 0 is local execution
    """

    x: np.ndarray
    p: np.ndarray
    f: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        self.y = np.asarray(self.y, dtype=float)

    @classmethod
    def zeros(cls, scen: Scenario) -> "AllocationState":
        """All-local state: no channels, no power, no edge CPU, y = e0."""
        U, M, N = scen.num_users, scen.num_cells, scen.num_subchannels
        y = np.zeros((U, 1 + M))
        y[:, 0] = 1.0
        return cls(x=np.zeros((U, N)), p=np.zeros((U, N)), f=np.zeros((U, M)), y=y)

    def copy(self) -> "AllocationState":
        return AllocationState(self.x.copy(), self.p.copy(), self.f.copy(), self.y.copy())

    @property
    def offloaded_fraction(self) -> np.ndarray:
        return 1.0 - self.y[:, 0]


@dataclass
class DelayBreakdown:
    """Per-user delay components plus per-slice deviation aggregates."""

    comm: np.ndarray
    local: np.ndarray
    handoff: np.ndarray
    edge_compute: np.ndarray
    total: np.ndarray
    deviation: np.ndarray            # total - slice target, per user
    slice_mean_deviation: np.ndarray  # mean deviation per slice

    def rows(self, scen: Scenario):
        for u in range(scen.num_users):
            yield (u, int(scen.slice_of[u]), self.comm[u], self.local[u],
                   self.handoff[u], self.edge_compute[u], self.total[u],
                   self.deviation[u])

    def to_csv(self, path, scen: Scenario):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["user_id", "slice_id", "comm", "local", "handoff",
                             "edge", "total", "deviation"])
            writer.writerows(self.rows(scen))


def interference(scen: Scenario, state: AllocationState, u: int, n: int) -> float:
    """Received other-cell power at user u's serving BS on subchannel n."""
    mask = scen.other_cell[u]
    return float(np.sum(state.x[mask, n] * state.p[mask, n] * scen.cross_gain[u, mask, n]))


def interference_matrix(scen: Scenario, state: AllocationState) -> np.ndarray:
    """(U, N) interference seen by every user on every subchannel."""
    xp = state.x * state.p
    return np.einsum("uvn,vn->un", scen.interference_tensor, xp)


def rate_matrix(scen: Scenario, state: AllocationState) -> np.ndarray:
    """(U, N) per-subchannel Shannon rates in bit/s."""
    inr = interference_matrix(scen, state)
    snr = (state.x * state.p * scen.gain_to_serving) / (scen.channel.noise_power_w + inr)
    return scen.channel.subchannel_bandwidth_hz * np.log2(1.0 + snr)


def rate(scen: Scenario, state: AllocationState, u: Optional[int] = None):
    """Total uplink rate in bit/s; one user or the whole (U,) vector."""
    rates = rate_matrix(scen, state).sum(axis=1)
    return rates if u is None else float(rates[u])


def delays(scen: Scenario, state: AllocationState) -> DelayBreakdown:
    """Evaluate all delay components.

    Conventions: a fragment share of zero excuses a zero CPU grant
    (0/0 -> 0); offloading with zero rate, or a positive share on a
    server with zero CPU, yields an infinite total instead of an error.
    """
    U, M = scen.num_users, scen.num_cells
    y_local = state.y[:, 0]
    y_edge = state.y[:, 1:]
    offloaded_bits = y_edge.sum(axis=1) * scen.task_bits

    rates = rate(scen, state)
    comm = np.zeros(U)
    has_offload = offloaded_bits > 0
    with np.errstate(divide="ignore"):
        comm[has_offload] = offloaded_bits[has_offload] / rates[has_offload]
    # offloading with no rate: infinite-delay marker
    comm[has_offload & (rates <= 0)] = np.inf

    local = y_local * scen.task_cycles / scen.local_cpu

    ho = scen.handoff.delays_s[scen.serving, :]          # (U, M)
    handoff = (y_edge * ho).sum(axis=1)

    share_cycles = y_edge * scen.task_cycles[:, None]     # (U, M)
    with np.errstate(divide="ignore", invalid="ignore"):
        per_server = np.where(share_cycles > 0, share_cycles / state.f, 0.0)
    per_server[(share_cycles > 0) & (state.f <= 0)] = np.inf
    edge = per_server.sum(axis=1)

    total = local + comm + handoff + edge
    deviation = total - scen.targets[scen.slice_of]
    slice_dev = np.array([deviation[scen.slice_of == k].mean() if np.any(scen.slice_of == k)
                          else 0.0 for k in range(scen.num_slices)])
    return DelayBreakdown(comm=comm, local=local, handoff=handoff, edge_compute=edge,
                          total=total, deviation=deviation,
                          slice_mean_deviation=slice_dev)


def objective(scen: Scenario, state: AllocationState) -> float:
    """Priority-weighted sum of per-user delay deviations.

    Negative when delays beat their targets; +inf when any user is in an
    infeasible configuration (see :func:`delays`).
    """
    breakdown = delays(scen, state)
    weights = scen.weights[scen.slice_of]
    return float(np.sum(weights * breakdown.deviation))


def objective_from_breakdown(scen: Scenario, breakdown: DelayBreakdown) -> float:
    weights = scen.weights[scen.slice_of]
    return float(np.sum(weights * breakdown.deviation))


def constraint_report(scen: Scenario, state: AllocationState) -> Dict[str, float]:
    """Max violation magnitude per constraint family, scale-free.

    Keys: subchannel reuse per cell (c1), binariness distance (c2),
    per-user power budget (c3), power-indicator coupling incl. p >= 0
    (c3_1), local cycle budget (c4), server cycle budget (c5), slice
    spectrum quota (c6), slice compute quota (c7), split simplex (c8),
    split box (c9), plus x_box / f_box for the projection-handled boxes.

    Every magnitude is reported relative to its constraint's scale
    (power rows by the power budget, cycle rows by the cycle budget,
    and so on), so one tolerance is meaningful across families; raw
    cycle counts near 1e10 would drown a float threshold otherwise.
    """
    U, M, N = scen.num_users, scen.num_cells, scen.num_subchannels
    x, p, f, y = state.x, state.p, state.f, state.y
    rep: Dict[str, float] = {}

    reuse = np.zeros((M, N))
    for j in range(M):
        members = scen.cell_members(j)
        if members.size:
            reuse[j] = x[members].sum(axis=0)
    rep["c1"] = float(np.maximum(reuse - 1.0, 0.0).max(initial=0.0))

    rep["c2"] = float(np.abs(x - x * x).max(initial=0.0))
    rep["x_box"] = float(max(np.maximum(-x, 0.0).max(initial=0.0),
                             np.maximum(x - 1.0, 0.0).max(initial=0.0)))

    used_power = (x * p).sum(axis=1) / scen.max_power
    rep["c3"] = float(max(np.maximum(used_power - 1.0, 0.0).max(initial=0.0),
                          np.maximum(-used_power, 0.0).max(initial=0.0)))
    coupling = p / scen.max_power[:, None] - x
    rep["c3_1"] = float(max(np.maximum(coupling, 0.0).max(initial=0.0),
                            np.maximum(-p / scen.max_power[:, None], 0.0).max(initial=0.0)))

    local_frac = y[:, 0] * scen.task_cycles / scen.local_budget
    rep["c4"] = float(np.maximum(local_frac - 1.0, 0.0).max(initial=0.0))

    server_frac = (y[:, 1:] * scen.task_cycles[:, None]).sum(axis=0) / scen.capacity
    rep["c5"] = float(np.maximum(server_frac - 1.0, 0.0).max(initial=0.0))

    c6 = 0.0
    c7 = 0.0
    pool = M * N
    se = scen.total_edge_capacity
    for k in range(scen.num_slices):
        members = scen.slice_members(k)
        quota_x = max(scen.alpha[k] * pool, 1e-300)
        quota_f = max(scen.beta[k] * se, 1e-300)
        c6 = max(c6, float(x[members].sum() / quota_x - 1.0))
        c7 = max(c7, float(f[members].sum() / quota_f - 1.0))
    rep["c6"] = max(c6, 0.0)
    rep["c7"] = max(c7, 0.0)

    rep["c8"] = float(np.abs(y.sum(axis=1) - 1.0).max(initial=0.0))
    rep["c9"] = float(max(np.maximum(-y, 0.0).max(initial=0.0),
                          np.maximum(y - 1.0, 0.0).max(initial=0.0)))
    f_unit = max(se, 1e-300) / U
    rep["f_box"] = float(np.maximum(-f / f_unit, 0.0).max(initial=0.0))
    return rep


def max_violation(report: Dict[str, float]) -> float:
    return max(report.values())
