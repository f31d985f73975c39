"""Ground-truth evaluator checks against hand arithmetic and loop oracles."""

import math

import numpy as np
import pytest

from mecslice import perfmodel as pm
from mecslice.perfmodel import AllocationState
from mecslice.scenario import scenario_from_dict

from conftest import random_state


def _two_cell_doc(gains):
    """Explicit 2-cell, 2-user document with fully controlled gains."""
    return {
        "network": {"num_cells": 2, "server_capacity_cps": [20e9, 20e9],
                    "handoff_delay_s": 5e-3},
        "channel": {"num_subchannels": 1, "subchannel_bandwidth_hz": 180e3,
                    "noise_power_w": 1e-15, "gains": gains},
        "users": [
            {"slice_id": 0, "serving_server": 0,
             "task": {"size_bits": 8e6, "cycles_per_bit": 1500}},
            {"slice_id": 0, "serving_server": 1,
             "task": {"size_bits": 8e6, "cycles_per_bit": 1500}},
        ],
    }


def test_interference_single_term():
    # user 0 served by cell 0; user 1 transmits at 0.1 W with gain 1e-9
    # toward cell 0, so user 0 sees exactly 1e-10 W
    gains = [[[1e-8], [1e-9]], [[1e-9], [1e-8]]]
    scen = scenario_from_dict(_two_cell_doc(gains))
    state = AllocationState.zeros(scen)
    state.x[:, 0] = 1.0
    state.p[1, 0] = 0.1
    assert pm.interference(scen, state, 0, 0) == pytest.approx(1e-10, rel=1e-12)
    assert pm.interference(scen, state, 1, 0) == 0.0


def test_interference_matrix_matches_double_loop(paper_scen):
    rng = np.random.default_rng(1)
    state = random_state(paper_scen, rng)
    mat = pm.interference_matrix(paper_scen, state)
    U, N = mat.shape
    for u in range(U):
        for n in range(N):
            acc = 0.0
            for v in range(U):
                if paper_scen.serving[v] != paper_scen.serving[u]:
                    acc += (state.x[v, n] * state.p[v, n]
                            * paper_scen.channel.gains[v, paper_scen.serving[u], n])
            assert mat[u, n] == pytest.approx(acc, rel=1e-12, abs=1e-30)


def test_rate_zero_power_and_unit_snr():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    scen = scenario_from_dict(_two_cell_doc(gains))
    state = AllocationState.zeros(scen)
    assert pm.rate(scen, state, 0) == 0.0

    # lone transmitter with x p h / sigma^2 = 1 gives exactly B bit/s
    state.x[0, 0] = 1.0
    state.p[0, 0] = scen.channel.noise_power_w / 1e-8
    assert pm.rate(scen, state, 0) == pytest.approx(180e3, rel=1e-12)


def test_rate_matches_per_term_shannon_sum(paper_scen):
    rng = np.random.default_rng(2)
    state = random_state(paper_scen, rng, binary_x=True)
    rates = pm.rate(paper_scen, state)
    B = paper_scen.channel.subchannel_bandwidth_hz
    for u in range(paper_scen.num_users):
        acc = 0.0
        for n in range(paper_scen.num_subchannels):
            inr = pm.interference(paper_scen, state, u, n)
            snr = (state.x[u, n] * state.p[u, n]
                   * paper_scen.gain_to_serving[u, n]) / (
                       paper_scen.channel.noise_power_w + inr)
            acc += B * math.log2(1.0 + snr)
        assert rates[u] == pytest.approx(acc, rel=1e-12)


def test_all_local_delay():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    scen = scenario_from_dict(_two_cell_doc(gains))
    state = AllocationState.zeros(scen)
    br = pm.delays(scen, state)
    # 8e6 bits * 1500 cycles/bit / 1e9 cycles/s = 12 s
    assert br.total[0] == pytest.approx(12.0)
    assert br.comm[0] == br.handoff[0] == br.edge_compute[0] == 0.0


def test_unit_arithmetic_full_offload():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    doc = _two_cell_doc(gains)
    scen = scenario_from_dict(doc)
    state = AllocationState.zeros(scen)
    state.x[0, 0] = 1.0
    # choose p for R = 8 Mbit/s: need B log2(1+snr) = 8e6
    snr = 2 ** (8e6 / 180e3) - 1.0
    state.p[0, 0] = snr * scen.channel.noise_power_w / 1e-8
    state.y[0] = [0.0, 1.0, 0.0]
    state.f[0, 0] = 8e6 * 1500      # edge compute takes exactly 1 s
    br = pm.delays(scen, state)
    assert br.comm[0] == pytest.approx(1.0, rel=1e-9)
    assert br.edge_compute[0] == pytest.approx(1.0)
    assert br.handoff[0] == 0.0
    assert br.total[0] == pytest.approx(2.0, rel=1e-9)


def test_split_offload_charges_half_handoff():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    scen = scenario_from_dict(_two_cell_doc(gains))
    state = AllocationState.zeros(scen)
    state.x[0, 0] = 1.0
    state.p[0, 0] = 0.1
    state.y[0] = [0.5, 0.0, 0.5]     # half local, half on the remote server
    state.f[0, 1] = 1e9
    br = pm.delays(scen, state)
    assert br.handoff[0] == pytest.approx(0.5 * 5e-3, rel=1e-12)


def test_offload_without_rate_is_infinite():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    scen = scenario_from_dict(_two_cell_doc(gains))
    state = AllocationState.zeros(scen)
    state.y[0] = [0.5, 0.5, 0.0]
    state.f[0, 0] = 1e9
    assert pm.delays(scen, state).total[0] == np.inf
    assert pm.objective(scen, state) == np.inf


def test_zero_share_excuses_zero_cpu():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    scen = scenario_from_dict(_two_cell_doc(gains))
    state = AllocationState.zeros(scen)        # y = e0, f = 0 everywhere
    assert np.all(np.isfinite(pm.delays(scen, state).total))


def test_objective_zero_at_target_and_linearity():
    gains = [[[1e-8], [1e-12]], [[1e-12], [1e-8]]]
    doc = _two_cell_doc(gains)
    doc["slices"] = [{"slice_id": 0, "weight": 2.0, "delay_target_s": 12.0,
                      "bandwidth_share": 1.0, "compute_share": 1.0}]
    scen = scenario_from_dict(doc)
    state = AllocationState.zeros(scen)        # both users take exactly 12 s
    assert pm.objective(scen, state) == pytest.approx(0.0, abs=1e-12)

    # move both users to target + 0.1 s via a slower local CPU
    doc["defaults"] = {"local_cpu_cps": 8e6 * 1500 / 12.1}
    scen2 = scenario_from_dict(doc)
    state2 = AllocationState.zeros(scen2)
    assert pm.objective(scen2, state2) == pytest.approx(0.4, rel=1e-9)


def test_objective_recomposes_from_breakdown(paper_scen):
    rng = np.random.default_rng(3)
    state = random_state(paper_scen, rng)
    state.f += 1.0                              # keep edge terms finite
    br = pm.delays(paper_scen, state)
    obj = pm.objective(paper_scen, state)
    manual = sum(paper_scen.weights[paper_scen.slice_of[u]]
                 * (br.total[u] - paper_scen.targets[paper_scen.slice_of[u]])
                 for u in range(paper_scen.num_users))
    assert obj == pytest.approx(manual, rel=1e-12)
    assert pm.objective_from_breakdown(paper_scen, br) == pytest.approx(obj, rel=1e-12)


def test_constraint_report_clean_state(paper_scen):
    rep = pm.constraint_report(paper_scen, AllocationState.zeros(paper_scen))
    # an all-local state with f_u^L = 1 GHz and a 2e10-cycle budget is clean
    assert pm.max_violation(rep) == 0.0


def test_constraint_report_reuse_conflict(paper_scen):
    state = AllocationState.zeros(paper_scen)
    members = paper_scen.cell_members(0)
    state.x[members[0], 0] = 1.0
    state.x[members[1], 0] = 1.0
    rep = pm.constraint_report(paper_scen, state)
    assert rep["c1"] == pytest.approx(1.0)


def _loop_report(scen, state):
    """Independent per-family oracle, deliberately written as plain loops."""
    U, M, N = scen.num_users, scen.num_cells, scen.num_subchannels
    x, p, f, y = state.x, state.p, state.f, state.y
    rep = {}
    c1 = 0.0
    for j in range(M):
        for n in range(N):
            total = sum(x[u, n] for u in range(U) if scen.serving[u] == j)
            c1 = max(c1, total - 1.0)
    rep["c1"] = max(c1, 0.0)
    rep["c2"] = max(abs(x[u, n] - x[u, n] ** 2)
                    for u in range(U) for n in range(N))
    c3 = 0.0
    for u in range(U):
        used = sum(x[u, n] * p[u, n] for n in range(N)) / scen.max_power[u]
        c3 = max(c3, used - 1.0, -used)
    rep["c3"] = max(c3, 0.0)
    c31 = 0.0
    for u in range(U):
        for n in range(N):
            c31 = max(c31, p[u, n] / scen.max_power[u] - x[u, n],
                      -p[u, n] / scen.max_power[u])
    rep["c3_1"] = max(c31, 0.0)
    rep["c4"] = max(max(y[u, 0] * scen.task_cycles[u] / scen.local_budget[u] - 1.0
                        for u in range(U)), 0.0)
    c5 = 0.0
    for j in range(M):
        load = sum(y[u, 1 + j] * scen.task_cycles[u] for u in range(U))
        c5 = max(c5, load / scen.capacity[j] - 1.0)
    rep["c5"] = max(c5, 0.0)
    c6 = c7 = 0.0
    for k in range(scen.num_slices):
        members = [u for u in range(U) if scen.slice_of[u] == k]
        got_x = sum(x[u, n] for u in members for n in range(N))
        got_f = sum(f[u, j] for u in members for j in range(M))
        c6 = max(c6, got_x / (scen.alpha[k] * M * N) - 1.0)
        c7 = max(c7, got_f / (scen.beta[k] * scen.total_edge_capacity) - 1.0)
    rep["c6"] = max(c6, 0.0)
    rep["c7"] = max(c7, 0.0)
    rep["c8"] = max(abs(sum(y[u]) - 1.0) for u in range(U))
    return rep


def test_constraint_report_matches_loop_oracle(paper_scen):
    rng = np.random.default_rng(4)
    state = random_state(paper_scen, rng)
    rep = pm.constraint_report(paper_scen, state)
    oracle = _loop_report(paper_scen, state)
    for key, want in oracle.items():
        assert rep[key] == pytest.approx(want, rel=1e-10, abs=1e-14), key


def test_more_cpu_never_slows_edge(paper_scen):
    rng = np.random.default_rng(5)
    state = random_state(paper_scen, rng)
    state.f += 1.0
    before = pm.delays(paper_scen, state).edge_compute
    state.f *= 2.0
    after = pm.delays(paper_scen, state).edge_compute
    assert np.all(after <= before + 1e-15)


def test_removing_interference_helps_everyone(paper_scen):
    rng = np.random.default_rng(6)
    state = random_state(paper_scen, rng, binary_x=True)
    with_int = pm.rate(paper_scen, state)
    # silence every other-cell transmitter for each user in turn
    for u in range(paper_scen.num_users):
        solo = state.copy()
        mask = paper_scen.other_cell[u]
        solo.p[mask, :] = 0.0
        assert pm.rate(paper_scen, solo, u) >= with_int[u] - 1e-9


def test_breakdown_csv(tmp_path, small_scen):
    state = AllocationState.zeros(small_scen)
    br = pm.delays(small_scen, state)
    path = tmp_path / "rows.csv"
    br.to_csv(path, small_scen)
    lines = path.read_text().strip().splitlines()
    assert lines[0].split(",") == ["user_id", "slice_id", "comm", "local",
                                  "handoff", "edge", "total", "deviation"]
    assert len(lines) == 1 + small_scen.num_users
