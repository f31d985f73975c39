"""Compare the full scheme against the three restricted baselines.

JOCRA keeps the fair-share spectrum and power and only optimizes CPU
and splits; JSPRA does the opposite and pins CPU; NO_COOP forbids
offloading to any server other than the serving one.  On a loaded
instance the full scheme should win on all three fronts.

Takes about a minute: sixteen users at default tolerances.
"""

from mecslice import GeneratorParams, generate_scenario
from mecslice.baselines import SchemeId, solve_scheme

scen = generate_scenario(
    GeneratorParams(users_per_cell=8, server_capacity_cps=8e10), seed=1)

results = {}
for scheme in SchemeId:
    sol = solve_scheme(scen, scheme)
    results[scheme.value] = sol.objective
    print(f"{scheme.value:>10}: objective {sol.objective:10.3f}  "
          f"({len(sol.trace) - 1} outer rounds, {sol.solve_seconds:.1f}s)")

base = results["proposed"]
print()
for name, obj in results.items():
    if name != "proposed":
        print(f"{name:>10} pays {100.0 * (obj - base) / base:+6.2f}% "
              "over the full scheme")
