"""Scheme wiring, per-seed dominance and a closed-form CPU-split oracle."""

import math

import numpy as np
import pytest

from mecslice import perfmodel as pm
from mecslice.baselines import (SchemeId, options_for, solve_jocra,
                                solve_jspra, solve_no_coop, solve_scheme)
from mecslice.fp_alm import fair_share_state
from mecslice.orchestrator import SolveOptions, solve
from mecslice.scenario import GeneratorParams, generate_scenario, scenario_from_dict


def test_options_mapping_and_passthrough():
    base = SolveOptions(obj_tol=3e-4, outer_cap=7)
    cases = {SchemeId.PROPOSED: ((), True),
             SchemeId.JOCRA: (("x", "p"), True),
             SchemeId.JSPRA: (("f",), True),
             SchemeId.NO_COOP: ((), False)}
    for scheme, (frozen, coop) in cases.items():
        opts = options_for(scheme, base)
        assert opts.p2.frozen == frozen
        assert opts.cooperation is coop
        assert opts.obj_tol == 3e-4 and opts.outer_cap == 7


def test_scheme_accepts_names_and_rejects_unknown(small_scen):
    with pytest.raises(ValueError):
        solve_scheme(small_scen, "grand_unified")
    sol = solve_scheme(small_scen, "jocra", SolveOptions(outer_cap=2))
    assert sol.scheme == "jocra"


def test_proposed_dominates_every_baseline(small_scen):
    opts = SolveOptions()
    results = {s: solve_scheme(small_scen, s, opts) for s in SchemeId}
    prop = results[SchemeId.PROPOSED].objective
    for scheme in (SchemeId.JOCRA, SchemeId.JSPRA, SchemeId.NO_COOP):
        other = results[scheme].objective
        assert prop <= other + 1e-9 * max(1.0, abs(other))
    for scheme, sol in results.items():
        assert sol.scheme == scheme.value
        assert pm.max_violation(
            pm.constraint_report(small_scen, sol.allocation)) <= 1e-6


def test_single_cell_makes_cooperation_irrelevant():
    # with one server there is no remote cell to borrow, so the
    # unrestricted and cooperation-off runs walk the same path
    scen = generate_scenario(
        GeneratorParams(num_cells=1, users_per_cell=4, num_subchannels=8),
        seed=1)
    coop = solve(scen, SolveOptions(multi_phase=False))
    no_coop = solve_no_coop(scen, SolveOptions())
    assert coop.objective == no_coop.objective
    np.testing.assert_array_equal(coop.allocation.x, no_coop.allocation.x)
    np.testing.assert_array_equal(coop.allocation.p, no_coop.allocation.p)
    np.testing.assert_array_equal(coop.allocation.f, no_coop.allocation.f)
    np.testing.assert_array_equal(coop.allocation.y, no_coop.allocation.y)


def test_jspra_keeps_fair_share_cpu(small_scen):
    sol = solve_jspra(small_scen, SolveOptions(outer_cap=5))
    np.testing.assert_array_equal(sol.allocation.f,
                                  fair_share_state(small_scen, binary=True).f)
    assert sol.policy["frozen_blocks"] == ["f"]


def test_jocra_keeps_fair_share_radio(small_scen):
    sol = solve_jocra(small_scen, SolveOptions(outer_cap=5))
    anchor = fair_share_state(small_scen, binary=True)
    np.testing.assert_array_equal(sol.allocation.x, anchor.x)
    np.testing.assert_array_equal(sol.allocation.p, anchor.p)
    assert sol.policy["frozen_blocks"] == ["x", "p"]


def test_jocra_cpu_split_matches_square_root_rule():
    # all users offload fully to an uncontested server, so the optimal
    # CPU split under a shared pool puts f_u proportional to the square
    # root of the offloaded cycles
    cycles = (1500, 1500, 2000, 2500)
    doc = {
        "network": {"num_cells": 1, "server_capacity_cps": 1e12},
        "channel": {"num_subchannels": 4, "subchannel_bandwidth_hz": 180e3,
                    "noise_power_w": 1e-15,
                    "gains": [[[1e-9] * 4] for _ in cycles]},
        "slices": [{"weight": 3.0, "delay_target_s": 0.05,
                    "bandwidth_share": 1.0, "compute_share": 1.0}],
        "users": [{"slice_id": 0, "serving_server": 0, "max_power_w": 0.2,
                   "local_cpu_cps": 1e8,
                   "task": {"size_bits": 8e6, "cycles_per_bit": c}}
                  for c in cycles],
    }
    scen = scenario_from_dict(doc)
    sol = solve_jocra(scen)
    y = sol.allocation.y
    assert np.all(y[:, 1] >= 0.999)          # local CPUs are hopeless here

    f = sol.allocation.f[:, 0]
    weights = np.sqrt(scen.task_cycles * y[:, 1])
    expect = f.sum() * weights / weights.sum()
    np.testing.assert_allclose(f, expect, rtol=2e-2)
    assert f.sum() <= 1e12 * (1 + 1e-6)
    assert f.sum() >= 0.98e12


def test_no_coop_scheme_never_borrows_remote_cpu(small_scen):
    sol = solve_no_coop(small_scen, SolveOptions())
    y = sol.allocation.y
    for u in range(small_scen.num_users):
        for j in range(small_scen.num_cells):
            if j != small_scen.serving[u]:
                assert y[u, 1 + j] == 0.0
    assert sol.scheme == "no_coop"
    assert sol.policy["cooperation"] is False
