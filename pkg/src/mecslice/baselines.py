"""Reference schemes the joint solver is measured against.

All schemes share the alternation loop in :mod:`mecslice.orchestrator`;
a baseline is the same loop with some resource block pinned to the
deterministic fair share:

* ``jocra`` - joint offloading and compute allocation: subchannels and
  powers stay at the binary fair share, only CPU shares and the split
  move.
* ``jspra`` - joint split and radio allocation: CPU shares stay at the
  equal per-slice split, subchannels and powers move.
* ``no_coop`` - the full joint solver, but tasks may only run locally
  or at the serving cell's server.

Each baseline therefore solves a restriction of the same problem, and
the proposed scheme should never do worse on the same scenario.
"""

from __future__ import annotations

import enum
from dataclasses import replace
from typing import Optional

from .orchestrator import Solution, SolveOptions, solve
from .scenario import Scenario


class SchemeId(str, enum.Enum):
    PROPOSED = "proposed"
    JOCRA = "jocra"
    JSPRA = "jspra"
    NO_COOP = "no_coop"


def options_for(scheme: SchemeId, base: Optional[SolveOptions] = None) -> SolveOptions:
    """Translate a scheme into frozen blocks and the cooperation flag."""
    opts = base or SolveOptions()
    if scheme is SchemeId.PROPOSED:
        frozen, cooperation = (), True
    elif scheme is SchemeId.JOCRA:
        frozen, cooperation = ("x", "p"), True
    elif scheme is SchemeId.JSPRA:
        frozen, cooperation = ("f",), True
    elif scheme is SchemeId.NO_COOP:
        frozen, cooperation = (), False
    else:
        raise ValueError(f"unknown scheme: {scheme!r}")
    return replace(opts, cooperation=cooperation,
                   p2=replace(opts.p2, frozen=frozen))


def solve_scheme(scen: Scenario, scheme: SchemeId | str,
                 opts: Optional[SolveOptions] = None) -> Solution:
    """Solve one scenario under the given scheme."""
    scheme = SchemeId(scheme)
    return solve(scen, options_for(scheme, opts), scheme=scheme.value)


def solve_jocra(scen: Scenario, opts: Optional[SolveOptions] = None) -> Solution:
    return solve_scheme(scen, SchemeId.JOCRA, opts)


def solve_jspra(scen: Scenario, opts: Optional[SolveOptions] = None) -> Solution:
    return solve_scheme(scen, SchemeId.JSPRA, opts)


def solve_no_coop(scen: Scenario, opts: Optional[SolveOptions] = None) -> Solution:
    return solve_scheme(scen, SchemeId.NO_COOP, opts)
