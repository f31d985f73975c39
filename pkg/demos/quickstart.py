"""
Quickstart: one scenario, one solve, one look at the result
===========================================================

Generates the default desk-scale instance (2 cells, 6 users per cell,
16 subchannels, 3 slices), runs the full alternating solver, and walks
through the Solution object it returns.
"""

import numpy as np

from mecslice import GeneratorParams, generate_scenario, solve

# draw a reproducible instance; seed controls geometry, fading and tasks
scen = generate_scenario(GeneratorParams(), seed=0)
print(f"scenario: {scen.num_users} users in {scen.num_cells} cells, "
      f"{scen.num_subchannels} subchannels, {scen.num_slices} slices")

sol = solve(scen)
print(f"\nobjective (weighted delay deviation): {sol.objective:.3f}")
print(f"converged: {sol.converged} after {len(sol.trace) - 1} outer rounds "
      f"in {sol.solve_seconds:.1f}s")

# the breakdown holds per-user delay components in seconds
print("\nuser slice    comm   local handoff    edge   total  deviation")
for u, k, comm, local, handoff, edge, total, dev in sol.breakdown.rows(scen):
    print(f"{u:>4} {k:>5} "
          f"{comm:>7.3f} {local:>7.3f} {handoff:>7.3f} "
          f"{edge:>7.3f} {total:>7.3f} {dev:>+10.3f}")

# allocations are plain numpy arrays
alloc = sol.allocation
held = int(alloc.x.sum())
print(f"\nsubchannels assigned: {held} of {scen.num_cells * scen.num_subchannels}")
print(f"power in use: {alloc.p.sum():.3f} W of "
      f"{scen.max_power.sum():.3f} W available")
print(f"offloaded fraction per user: "
      f"{np.round(1.0 - alloc.y[:, 0], 2).tolist()}")
