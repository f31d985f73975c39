"""Shared scenario builders and random-state helpers."""

import numpy as np
import pytest

from mecslice.perfmodel import AllocationState
from mecslice.scenario import GeneratorParams, generate_scenario


@pytest.fixture(scope="session")
def paper_scen():
    """Default-sized instance: 2 cells, 6 users/cell, 16 subchannels."""
    return generate_scenario(GeneratorParams(), seed=0)


@pytest.fixture(scope="session")
def small_scen():
    """Fast instance for solver-in-the-loop tests."""
    return generate_scenario(
        GeneratorParams(users_per_cell=2, num_subchannels=8), seed=0)


def random_state(scen, rng, binary_x=False) -> AllocationState:
    """A random allocation that respects shapes, not necessarily feasible.

    Powers stay under the per-user budget and splits lie on the simplex
    so delay evaluations stay finite; constraint families like reuse or
    quotas may well be violated, which is what report tests want.
    """
    U, M, N = scen.num_users, scen.num_cells, scen.num_subchannels
    x = rng.random((U, N))
    if binary_x:
        x = (x > 0.5).astype(float)
    p = rng.random((U, N)) * scen.max_power[:, None] / N
    f = rng.random((U, M)) * scen.total_edge_capacity / (U * M)
    y = rng.random((U, 1 + M))
    y /= y.sum(axis=1, keepdims=True)
    return AllocationState(x=x, p=p, f=f, y=y)


def feasible_binary_state(scen, rng) -> AllocationState:
    """A modest allocation satisfying every constraint family.

    One subchannel per user (unique within each cell, inside slice
    spectrum quotas), power split over held channels, equal compute
    shares inside slice quotas, and an all-local split except where a
    user holds a channel and CPU.
    """
    U, M, N = scen.num_users, scen.num_cells, scen.num_subchannels
    x = np.zeros((U, N))
    pool = M * N
    used = {j: set() for j in range(M)}
    granted = np.zeros(scen.num_slices)
    order = rng.permutation(U)
    for u in order:
        j = scen.serving[u]
        k = scen.slice_of[u]
        if granted[k] + 1 > scen.alpha[k] * pool:
            continue
        free = [n for n in range(N) if n not in used[j]]
        if not free:
            continue
        n = free[rng.integers(len(free))]
        x[u, n] = 1.0
        used[j].add(n)
        granted[k] += 1
    p = x * scen.max_power[:, None] / np.maximum(x.sum(axis=1, keepdims=True), 1.0)

    f = np.zeros((U, M))
    for k in range(scen.num_slices):
        members = scen.slice_members(k)
        if members.size:
            f[members, :] = scen.beta[k] * scen.total_edge_capacity / (members.size * M)

    y = np.zeros((U, 1 + M))
    y[:, 0] = 1.0
    holders = np.flatnonzero(x.sum(axis=1) > 0)
    share = 0.2
    for u in holders:
        j = scen.serving[u]
        cap = scen.capacity[j] / scen.task_cycles[u]
        frac = min(share, 0.9 * cap / max(1, holders.size))
        y[u, 0] = 1.0 - frac
        y[u, 1 + j] = frac
    return AllocationState(x=x, p=p, f=f, y=y)
