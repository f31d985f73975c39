"""Independent brute-force oracles shared by unit and acceptance tests.

Everything here recomputes answers from first principles, deliberately
avoiding the package's own solver paths.  The task-split oracle scans
an explicit grid (step 1e-3 per split component) and handles shared
server budgets by combining per-user grids through prefix-min tables
indexed by capacity consumption:

- two users, two servers: user 1's cheapest cost over integer grid
  levels is tabulated as a 2-D prefix-min, so each grid point of user 0
  looks up "cheapest user-1 point within the residual budgets" exactly;
- one server, any user count: users chain back to front over a finely
  binned budget axis with consumption rounded UP, so every admitted
  combination is genuinely feasible (the value is attained by a real
  grid point, which is all the acceptance bound needs).
"""

import numpy as np

STEP = 1e-3


def user_grid(costs_u, usable_u, local_cap_u, step=STEP):
    """All feasible splits of one user at the given resolution.

    Returns (points, cost, edge): points is (P, 1+M) with column 0 the
    local fraction, cost the per-point objective contribution, edge the
    per-server fractions used for capacity accounting.
    """
    M = costs_u.shape[0] - 1
    axes = [np.arange(0.0, 1.0 + step / 2, step) if usable_u[1 + j]
            else np.array([0.0]) for j in range(M)]
    mesh = np.meshgrid(*axes, indexing="ij")
    edge = np.stack([m.ravel() for m in mesh], axis=1)      # (P, M)
    y0 = 1.0 - edge.sum(axis=1)
    ok = (y0 >= -1e-12) & (y0 <= local_cap_u + 1e-12)
    edge, y0 = edge[ok], np.clip(y0[ok], 0.0, None)
    safe = np.where(np.isfinite(costs_u), costs_u, 0.0)
    cost = y0 * safe[0] + edge @ safe[1:]
    points = np.concatenate([y0[:, None], edge], axis=1)
    return points, cost, edge


def grid_min_separable(lp, step=STEP):
    """Per-user independent minima; valid when no shared budget binds."""
    total = 0.0
    for u in range(lp.num_users):
        _, cost, edge = user_grid(lp.costs[u], lp.usable[u],
                                  lp.local_cap[u], step)
        load = edge * lp.task_cycles[u]
        ok = np.all(load <= lp.capacity[None, :]
                    + 1e-9 * np.maximum(lp.capacity, 1.0), axis=1)
        total += float(cost[ok].min())
    return total


def grid_min_single_server(lp, step=STEP):
    """Grid minimum for M = 1 with one shared budget (see module notes)."""
    budget = float(lp.capacity[0])
    nbins = 4001
    scale = budget / (nbins - 1) if budget > 0 else 1.0

    # best[b] = cheapest total of the users processed so far when they
    # may consume at most b*scale cycles; nonincreasing in b
    best = np.zeros(nbins)
    for u in range(lp.num_users - 1, -1, -1):
        _, cost, edge = user_grid(lp.costs[u], lp.usable[u],
                                  lp.local_cap[u], step)
        consume = edge[:, 0] * lp.task_cycles[u]
        nxt = np.full(nbins, np.inf)
        for i in range(len(cost)):
            if consume[i] > budget + 1e-9 * max(budget, 1.0):
                continue
            b0 = int(np.ceil(consume[i] / scale - 1e-9)) if budget > 0 else 0
            if b0 >= nbins:
                continue
            cand = cost[i] + best[: nbins - b0]
            np.minimum(nxt[b0:], cand, out=nxt[b0:])
        best = nxt
    return float(best[-1])


def grid_min_two_servers_two_users(lp, step=STEP):
    """Exact grid minimum for U = 2, M = 2 via a 2-D prefix-min table."""
    g0 = user_grid(lp.costs[0], lp.usable[0], lp.local_cap[0], step)
    g1 = user_grid(lp.costs[1], lp.usable[1], lp.local_cap[1], step)
    caps = lp.capacity

    n = int(round(1.0 / step)) + 1
    table = np.full((n, n), np.inf)
    lv = np.rint(g1[2] / step).astype(int)
    for (l1, l2), c in zip(lv, g1[1]):
        if c < table[l1, l2]:
            table[l1, l2] = c
    for i in range(n):
        if i:
            np.minimum(table[i], table[i - 1], out=table[i])
        np.minimum.accumulate(table[i], out=table[i])

    cyc0, cyc1 = lp.task_cycles[0], lp.task_cycles[1]
    _, cost0, edge0 = g0
    rem = caps[None, :] - edge0 * cyc0                      # (P, 2)
    ok = np.all(rem >= -1e-9 * np.maximum(caps, 1.0), axis=1)
    lv0 = np.minimum(np.floor(rem[ok] / (cyc1 * step) + 1e-9), n - 1).astype(int)
    ok2 = np.all(lv0 >= 0, axis=1)
    cand = cost0[ok][ok2] + table[lv0[ok2, 0], lv0[ok2, 1]]
    return float(cand.min())


def grid_minimum(lp, step=STEP):
    """Dispatch to an enumeration strategy this tiny shape supports."""
    U, M = lp.num_users, lp.num_servers
    if np.all(lp.capacity >= lp.task_cycles.sum() - 1e-6):
        return grid_min_separable(lp, step)
    if U == 1:
        return grid_min_separable(lp, step)
    if M == 1:
        return grid_min_single_server(lp, step)
    if U == 2 and M == 2:
        return grid_min_two_servers_two_users(lp, step)
    raise ValueError(f"no tiny-grid strategy for U={U}, M={M} "
                     "with binding capacity")


# ---------------------------------------------------------------------------
# tiny random instances for the split-LP suite


def tiny_lp_instance(rng):
    """Random scenario + allocation with a shape the grid oracle covers.

    Shapes are drawn from (U, M) in {1,2,3} x {1,2} with U=3 restricted
    to one server.  Half the draws get a binding shared budget (between
    the cycles that cannot run locally and total demand), the other
    half ample capacity.
    """
    from mecslice.perfmodel import AllocationState
    from mecslice.scenario import scenario_from_dict

    shapes = [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)]
    U, M = shapes[rng.integers(len(shapes))]
    N = 2

    cpb = rng.choice([1500.0, 2000.0, 2500.0], size=U)
    local_cap = np.where(rng.random(U) < 0.5, 1.0,
                         rng.uniform(0.3, 0.9, size=U))
    cycles = 8e6 * cpb
    forced = ((1.0 - local_cap) * cycles).sum()

    if rng.random() < 0.5 or forced == 0.0:
        caps = [float(cycles.sum()) * 2.0] * M
    else:
        total = rng.uniform(forced * 1.05 + 1e8, cycles.sum())
        if M == 1:
            caps = [float(total)]
        else:
            a = rng.uniform(0.55, 0.85)
            caps = [float(total * a), float(total * (1 - a))]
            # keep the instance feasible: every user reaches both servers
            # below, so only the pooled budget must cover forced cycles

    gains = rng.uniform(1e-10, 1e-8, size=(U, M, N))
    doc = {
        "network": {"num_cells": M, "server_capacity_cps": caps,
                    "handoff_delay_s": 5e-3},
        "channel": {"num_subchannels": N, "subchannel_bandwidth_hz": 180e3,
                    "noise_power_w": 1e-15, "gains": gains.tolist()},
        "slices": [{"slice_id": 0, "weight": float(rng.choice([1.0, 2.0, 3.0])),
                    "delay_target_s": 0.1, "bandwidth_share": 1.0,
                    "compute_share": 1.0}],
        "users": [
            {"slice_id": 0, "serving_server": int(rng.integers(M)),
             "task": {"size_bits": 8e6, "cycles_per_bit": float(cpb[u])},
             "local_cpu_cps": float(rng.uniform(0.5e9, 2e9)),
             "local_budget_cycles": float(local_cap[u] * cycles[u]),
             "max_power_w": 0.2}
            for u in range(U)
        ],
    }
    scen = scenario_from_dict(doc)

    state = AllocationState.zeros(scen)
    for u in range(U):
        n = u % N
        state.x[u, n] = 1.0
        state.p[u, n] = 0.2
    state.f = rng.uniform(1e9, 2e10, size=(U, M))
    return scen, state
