"""Joint subchannel/power/compute allocation for a fixed task split.

For a fixed split Y the delay objective is a sum of ratios (offloaded
bits over a non-convex interference-limited rate).  Two transforms make
it tractable:

* a sum-of-ratios rewrite with per-user auxiliaries ``t``: each ratio
  w/R becomes t*w^2 + 1/(4t) * 1/R^2, tight at t = 1/(2 w R);
* a quadratic transform of each per-subchannel rate with slacks ``z``:
  r_hat = B log2(1 + 2 z sqrt(h p) - z^2 (I + sigma^2)), concave in p
  and equal to the Shannon term at z = sqrt(h p) / (I + sigma^2).

The transformed problem is minimized by an augmented Lagrangian loop:
block-coordinate projected gradient over (x, p, f) with multipliers for
the power budgets, slice quotas, subchannel reuse, binariness of x and
the power-indicator coupling, then multiplier ascent, then slack
refresh.

Within this module the subchannel indicator has been folded into the
power variables (p > 0 implies the channel is used; the coupling
constraint p <= x * P_max restores consistency), so rates here depend on
powers only.  On states whose powers are masked by a binary x this
coincides exactly with the ground-truth evaluator in ``perfmodel``.

All constraints are scaled to O(1) violations before entering the
penalty (power rows by P_max, compute rows by the slice quota, spectrum
rows by the slice channel pool); a single penalty coefficient cannot
serve watts and 1e10-scale cycles/s otherwise.  The multiplier updates
keep the plain projected form [multiplier + psi * violation]+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .perfmodel import AllocationState
from .scenario import Scenario

_LN2 = math.log(2.0)
_P_GUARD = 1e-30        # keeps d(sqrt(p))/dp finite at p == 0
_F_GUARD = 1e-30


class AlGradientError(RuntimeError):
    """Non-finite gradient entry; carries the offending block and index."""

    def __init__(self, block: str, index):
        self.block = block
        self.index = index
        super().__init__(f"non-finite gradient in block {block!r} at index {index}")


@dataclass
class FpAuxiliary:
    """Transform auxiliaries: rate slacks z (U, N) and ratio weights t (U,).

    ``t`` holds a placeholder 1.0 for users with no offloaded bits; those
    users contribute no fractional term and the placeholder is never read.
    """

    z: np.ndarray
    t: np.ndarray


@dataclass
class AlmState:
    """Multiplier estimates per constraint family plus the penalty weight."""

    theta: np.ndarray   # (U,)    per-user power budget
    delta: np.ndarray   # (K,)    per-slice compute quota
    phi: np.ndarray     # (M, N)  per-(cell, subchannel) reuse
    xi: np.ndarray      # (U, N)  binariness of x (cell is implied by the user)
    bigxi: np.ndarray   # (U, N)  coupling p <= x * P_max
    chi: np.ndarray     # (K,)    per-slice spectrum quota
    psi: float = 1.0

    @classmethod
    def fresh(cls, scen: Scenario, psi: float = 1.0) -> "AlmState":
        U, M, N, K = (scen.num_users, scen.num_cells,
                      scen.num_subchannels, scen.num_slices)
        return cls(theta=np.zeros(U), delta=np.zeros(K), phi=np.zeros((M, N)),
                   xi=np.zeros((U, N)), bigxi=np.zeros((U, N)),
                   chi=np.zeros(K), psi=psi)


@dataclass
class P2Options:
    """Tolerances and caps for the transformed-problem solve."""

    inner_cap: int = 500
    inner_tol: float = 1e-6       # projected-gradient sup norm, scaled variables
    feas_tol: float = 1e-6        # scaled max constraint violation
    obj_tol: float = 1e-4         # relative transformed-objective change per slack round
    outer_cap: int = 10           # slack refresh rounds
    multiplier_cap: int = 40      # multiplier rounds per slack round
    psi0: float = 1.0
    psi_growth: float = 5.0
    psi_cap: float = 1e6
    shrink_factor: float = 0.5    # violation must shrink this much or psi grows
    armijo: float = 1e-4
    frozen: tuple = ()            # any of "x", "p", "f": blocks held at start


@dataclass
class P2TraceRow:
    outer_iter: int
    inner_iters: int
    transformed_obj: float
    true_obj: float
    max_violation: Dict[str, float]
    psi: float


# ---------------------------------------------------------------------------
# shared per-split context and term helpers


@dataclass
class _Context:
    """Quantities fixed for the duration of one fixed-Y solve."""

    y: np.ndarray
    w: np.ndarray            # (U,) offloaded bits
    active: np.ndarray       # (U,) bool, w > 0
    lam: np.ndarray          # (U,) slice weights per user
    share: np.ndarray        # (U, M) offloaded cycles per server
    base_const: float        # weighted local + hand-off - target, f-independent


def _context(scen: Scenario, y: np.ndarray) -> _Context:
    y = np.asarray(y, dtype=float)
    w = y[:, 1:].sum(axis=1) * scen.task_bits
    lam = scen.weights[scen.slice_of]
    share = y[:, 1:] * scen.task_cycles[:, None]
    local = y[:, 0] * scen.task_cycles / scen.local_cpu
    ho = (y[:, 1:] * scen.handoff.delays_s[scen.serving, :]).sum(axis=1)
    base = float(np.sum(lam * (local + ho - scen.targets[scen.slice_of])))
    return _Context(y=y, w=w, active=w > 0, lam=lam, share=share,
                    base_const=base)


def offloaded_bits(scen: Scenario, y: np.ndarray) -> np.ndarray:
    return np.asarray(y, dtype=float)[:, 1:].sum(axis=1) * scen.task_bits


def power_interference(scen: Scenario, p: np.ndarray) -> np.ndarray:
    """(U, N) other-cell interference from powers alone (indicator folded in)."""
    return np.einsum("uvn,vn->un", scen.interference_tensor, p)


def substituted_rate_matrix(scen: Scenario, p: np.ndarray) -> np.ndarray:
    """Per-subchannel Shannon rates of the power-only model, bit/s."""
    inr = power_interference(scen, p)
    snr = p * scen.gain_to_serving / (scen.channel.noise_power_w + inr)
    return scen.channel.subchannel_bandwidth_hz * np.log2(1.0 + snr)


def transformed_rate_matrix(scen: Scenario, p: np.ndarray, z: np.ndarray) -> np.ndarray:
    """(U, N) quadratic-transform rates r_hat at slack z, bit/s.

    The concave inner expression is floored at zero before the log so the
    value stays defined far from the optimal slack; the floor is inactive
    in a neighbourhood of every slack refresh.
    """
    inr = power_interference(scen, p)
    inner = (2.0 * z * np.sqrt(scen.gain_to_serving * p)
             - z * z * (inr + scen.channel.noise_power_w))
    return scen.channel.subchannel_bandwidth_hz * np.log2(1.0 + np.maximum(inner, 0.0))


def transformed_rate(scen: Scenario, state: AllocationState, aux: FpAuxiliary,
                     u: int, n: int) -> float:
    """Single (user, subchannel) transformed rate, bit/s."""
    return float(transformed_rate_matrix(scen, state.p, aux.z)[u, n])


def update_slacks(scen: Scenario, state: AllocationState, y: np.ndarray) -> FpAuxiliary:
    """Closed-form refresh of both auxiliaries at the current powers.

    z = sqrt(h p) / (I + sigma^2) maximizes every transformed rate term;
    t = 1 / (2 w R_hat) makes the ratio rewrite tight.
    """
    p = state.p
    inr = power_interference(scen, p)
    z = np.sqrt(scen.gain_to_serving * p) / (inr + scen.channel.noise_power_w)
    rhat = transformed_rate_matrix(scen, p, z).sum(axis=1)
    w = offloaded_bits(scen, y)
    t = np.ones_like(w)
    act = (w > 0) & (rhat > 0)
    t[act] = 1.0 / (2.0 * w[act] * rhat[act])
    return FpAuxiliary(z=z, t=t)


def _comm_term(ctx: _Context, aux: FpAuxiliary, rhat: np.ndarray) -> float:
    """Weighted transformed comm delay; +inf if an offloader has no rate."""
    act = ctx.active
    if np.any(act & (rhat <= 0)):
        return float("inf")
    t, w = aux.t[act], ctx.w[act]
    comm = t * w * w + 1.0 / (4.0 * t * rhat[act] ** 2)
    return float(np.sum(ctx.lam[act] * comm))


def _edge_term(ctx: _Context, f: np.ndarray) -> float:
    """Weighted edge compute delay; +inf when a used share has no CPU."""
    share = ctx.share
    used = share > 0
    if np.any(used & (f <= 0)):
        return float("inf")
    with np.errstate(divide="ignore", invalid="ignore"):
        per = np.where(used, share / np.where(used, f, 1.0), 0.0)
    return float(np.sum(ctx.lam[:, None] * per))


# constraint-family violations, all scaled to O(1)

def _v_theta(scen: Scenario, p: np.ndarray) -> np.ndarray:
    return p.sum(axis=1) / scen.max_power - 1.0


def _v_delta(scen: Scenario, f: np.ndarray) -> np.ndarray:
    quota = np.maximum(scen.beta * scen.total_edge_capacity, 1e-300)
    return scen.slice_matrix @ f.sum(axis=1) / quota - 1.0


def _v_phi(scen: Scenario, x: np.ndarray) -> np.ndarray:
    return scen.cell_matrix @ x - 1.0


def _v_bigxi(scen: Scenario, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    return p / scen.max_power[:, None] - x


def _v_chi(scen: Scenario, x: np.ndarray) -> np.ndarray:
    quota = np.maximum(scen.alpha * scen.num_cells * scen.num_subchannels, 1e-300)
    return scen.slice_matrix @ x.sum(axis=1) / quota - 1.0


def constraint_violations(scen: Scenario, state: AllocationState) -> Dict[str, np.ndarray]:
    """Signed violations of every multiplier family, scaled to O(1).

    Positive means violated.  Scaling: power rows by P_max, compute rows
    by the slice compute quota, spectrum rows by the slice channel pool;
    reuse, binariness and coupling are O(1) already (coupling by P_max).
    """
    x, p, f = state.x, state.p, state.f
    return {"theta": _v_theta(scen, p), "delta": _v_delta(scen, f),
            "phi": _v_phi(scen, x), "xi": x - x * x,
            "bigxi": _v_bigxi(scen, x, p), "chi": _v_chi(scen, x)}


def max_violation_by_family(viol: Dict[str, np.ndarray]) -> Dict[str, float]:
    return {name: float(np.maximum(v, 0.0).max(initial=0.0)) for name, v in viol.items()}


def _pen(mult: np.ndarray, v: np.ndarray, psi: float) -> float:
    shifted = np.maximum(mult + psi * v, 0.0)
    return float(np.sum(shifted * shifted - mult * mult)) / (2.0 * psi)


def _pen_x(scen: Scenario, alm: AlmState, x: np.ndarray) -> float:
    """All penalty terms that move when only x moves (p held fixed)."""
    psi = alm.psi
    return (_pen(alm.phi, _v_phi(scen, x), psi)
            + _pen(alm.xi, x - x * x, psi)
            + _pen(alm.chi, _v_chi(scen, x), psi))


# ---------------------------------------------------------------------------
# public objective evaluators


def transformed_objective(scen: Scenario, state: AllocationState, y: np.ndarray,
                          aux: FpAuxiliary) -> float:
    """Weighted delay-deviation objective with the comm ratios transformed.

    Users with no offloaded bits contribute no fractional term (the
    continuous limit of the rewrite as w -> 0).  Returns +inf when an
    offloading user has a nonpositive transformed rate.
    """
    ctx = _context(scen, y)
    rhat = transformed_rate_matrix(scen, state.p, aux.z).sum(axis=1)
    return _comm_term(ctx, aux, rhat) + _edge_term(ctx, state.f) + ctx.base_const


def p2_objective(scen: Scenario, state: AllocationState, y: np.ndarray) -> float:
    """Untransformed objective of the power-only model (tightness reference)."""
    ctx = _context(scen, y)
    rates = substituted_rate_matrix(scen, state.p).sum(axis=1)
    act = ctx.active
    if np.any(act & (rates <= 0)):
        return float("inf")
    comm = float(np.sum(ctx.lam[act] * ctx.w[act] / rates[act]))
    return comm + _edge_term(ctx, state.f) + ctx.base_const


def augmented_lagrangian(scen: Scenario, state: AllocationState, y: np.ndarray,
                         aux: FpAuxiliary, alm: AlmState) -> float:
    """Transformed objective plus the quadratic multiplier penalties.

    Box constraints (x in [0,1], p >= 0, f >= 0) are handled by
    projection in the inner solver, not by multipliers.
    """
    base = transformed_objective(scen, state, y, aux)
    if not np.isfinite(base):
        return base
    psi = alm.psi
    return (base
            + _pen(alm.theta, _v_theta(scen, state.p), psi)
            + _pen(alm.delta, _v_delta(scen, state.f), psi)
            + _pen(alm.bigxi, _v_bigxi(scen, state.x, state.p), psi)
            + _pen_x(scen, alm, state.x))


def al_value_and_grad(scen: Scenario, state: AllocationState, y: np.ndarray,
                      aux: FpAuxiliary, alm: AlmState
                      ) -> Tuple[float, Dict[str, np.ndarray]]:
    """Augmented Lagrangian value and its analytic gradient over (x, p, f).

    Raises :class:`AlGradientError` on a non-finite entry, which signals a
    modeling bug (e.g. evaluating at an infinite-objective state).
    """
    ctx = _context(scen, y)
    return _value_and_grad(scen, ctx, state, aux, alm)


def _value_and_grad(scen: Scenario, ctx: _Context, state: AllocationState,
                    aux: FpAuxiliary, alm: AlmState
                    ) -> Tuple[float, Dict[str, np.ndarray]]:
    U, N = scen.num_users, scen.num_subchannels
    x, p, f = state.x, state.p, state.f
    sigma2 = scen.channel.noise_power_w
    bw = scen.channel.subchannel_bandwidth_hz
    h = scen.gain_to_serving
    z = aux.z
    lam = ctx.lam

    inr = power_interference(scen, p)
    inner = 2.0 * z * np.sqrt(h * p) - z * z * (inr + sigma2)
    pos = inner > 0
    rhat = (bw * np.log2(1.0 + np.maximum(inner, 0.0))).sum(axis=1)

    value = (_comm_term(ctx, aux, rhat) + _edge_term(ctx, f) + ctx.base_const)
    if not np.isfinite(value):
        return float("inf"), {}

    # d(objective)/d(rhat_u), nonzero only for offloading users
    coef_r = np.zeros(U)
    act = ctx.active
    coef_r[act] = -lam[act] / (2.0 * aux.t[act] * rhat[act] ** 3)
    # d(rhat_un)/d(inner) where the floor is inactive
    dr = np.where(pos, bw / (_LN2 * (1.0 + np.maximum(inner, 0.0))), 0.0)
    cz = coef_r[:, None] * dr                      # (U, N)

    grad_p = cz * z * np.sqrt(h / np.maximum(p, _P_GUARD))
    # interference path: victim u, transmitter v on the same subchannel
    grad_p -= np.einsum("un,uvn->vn", cz * z * z, scen.interference_tensor)

    used = ctx.share > 0
    grad_f = np.where(used,
                      -lam[:, None] * ctx.share / np.maximum(f, _F_GUARD) ** 2, 0.0)

    grad_x = np.zeros((U, N))
    psi = alm.psi

    v = _v_theta(scen, p)
    value += _pen(alm.theta, v, psi)
    grad_p += (np.maximum(alm.theta + psi * v, 0.0) / scen.max_power)[:, None]

    v = _v_delta(scen, f)
    value += _pen(alm.delta, v, psi)
    quota_f = np.maximum(scen.beta * scen.total_edge_capacity, 1e-300)
    act_delta = np.maximum(alm.delta + psi * v, 0.0) / quota_f
    grad_f += act_delta[scen.slice_of][:, None]

    v = _v_phi(scen, x)
    value += _pen(alm.phi, v, psi)
    grad_x += np.maximum(alm.phi + psi * v, 0.0)[scen.serving, :]

    v = x - x * x
    value += _pen(alm.xi, v, psi)
    grad_x += np.maximum(alm.xi + psi * v, 0.0) * (1.0 - 2.0 * x)

    v = _v_bigxi(scen, x, p)
    value += _pen(alm.bigxi, v, psi)
    act_cpl = np.maximum(alm.bigxi + psi * v, 0.0)
    grad_p += act_cpl / scen.max_power[:, None]
    grad_x -= act_cpl

    v = _v_chi(scen, x)
    value += _pen(alm.chi, v, psi)
    quota_x = np.maximum(scen.alpha * scen.num_cells * N, 1e-300)
    act_chi = np.maximum(alm.chi + psi * v, 0.0) / quota_x
    grad_x += act_chi[scen.slice_of][:, None]

    grads = {"x": grad_x, "p": grad_p, "f": grad_f}
    for block, g in grads.items():
        if not np.all(np.isfinite(g)):
            bad = np.argwhere(~np.isfinite(g))[0]
            raise AlGradientError(block, tuple(int(i) for i in bad))
    return value, grads


def update_multipliers(alm: AlmState, viol: Dict[str, np.ndarray]) -> AlmState:
    """Projected multiplier ascent, elementwise [mult + psi * violation]+."""
    psi = alm.psi
    return AlmState(
        theta=np.maximum(alm.theta + psi * viol["theta"], 0.0),
        delta=np.maximum(alm.delta + psi * viol["delta"], 0.0),
        phi=np.maximum(alm.phi + psi * viol["phi"], 0.0),
        xi=np.maximum(alm.xi + psi * viol["xi"], 0.0),
        bigxi=np.maximum(alm.bigxi + psi * viol["bigxi"], 0.0),
        chi=np.maximum(alm.chi + psi * viol["chi"], 0.0),
        psi=psi,
    )


# ---------------------------------------------------------------------------
# inner block-coordinate projected-gradient descent


@dataclass
class InnerInfo:
    iterations: int
    value: float
    pg_norm: float
    converged: bool


def _scales(scen: Scenario) -> Tuple[float, float]:
    p_ref = float(scen.max_power.max())
    f_ref = scen.total_edge_capacity / scen.num_users
    return p_ref, f_ref


def inner_minimize(scen: Scenario, y: np.ndarray, aux: FpAuxiliary, alm: AlmState,
                   start: AllocationState, opts: P2Options
                   ) -> Tuple[AllocationState, InnerInfo]:
    """Descend the augmented Lagrangian over (x, p, f) inside the boxes.

    Cyclic block-coordinate projected gradient: each iteration takes one
    Armijo-backtracked step per free block (f, then p, then x), with an
    independent doubling/halving step length per block.  Variables are
    internally rescaled (p by max P_max, f by the mean per-user edge
    capacity) so the step lengths are dimensionless; a shared step
    across blocks would crawl on whichever block is stiffest.

    Line-search trials are priced with block-specialized evaluators:
    an f or x trial only recomputes the few terms that block touches,
    never the interference contraction.  The accepted value never
    increases; stops at block stationarity (unit-step projected
    gradient below ``opts.inner_tol``), on two consecutive stalled
    iterations, or at ``opts.inner_cap``.
    """
    p_ref, f_ref = _scales(scen)
    ref = {"x": 1.0, "p": p_ref, "f": f_ref}
    blocks = [b for b in ("f", "p", "x") if b not in opts.frozen]
    ctx = _context(scen, y)
    psi = alm.psi

    state = start.copy()
    state.x = np.clip(state.x, 0.0, 1.0)
    state.p = np.maximum(state.p, 0.0)
    state.f = np.maximum(state.f, 0.0)

    def clipped(block, arr):
        if block == "x":
            return np.clip(arr, 0.0, 1.0)
        return np.maximum(arr, 0.0)

    def block_terms(block, st):
        """The AL terms that move when only this block moves."""
        if block == "f":
            return _edge_term(ctx, st.f) + _pen(alm.delta, _v_delta(scen, st.f), psi)
        if block == "x":
            return (_pen_x(scen, alm, st.x)
                    + _pen(alm.bigxi, _v_bigxi(scen, st.x, st.p), psi))
        inr = power_interference(scen, st.p)
        inner = (2.0 * aux.z * np.sqrt(scen.gain_to_serving * st.p)
                 - aux.z * aux.z * (inr + scen.channel.noise_power_w))
        rhat = (scen.channel.subchannel_bandwidth_hz
                * np.log2(1.0 + np.maximum(inner, 0.0))).sum(axis=1)
        return (_comm_term(ctx, aux, rhat)
                + _pen(alm.theta, _v_theta(scen, st.p), psi)
                + _pen(alm.bigxi, _v_bigxi(scen, st.x, st.p), psi))

    def value_grad(st):
        val, grads = _value_and_grad(scen, ctx, st, aux, alm)
        if not grads:
            raise AlGradientError("objective", "infinite value at evaluation point")
        return val, grads

    alphas = {b: 1.0 for b in blocks}
    val, grads = value_grad(state)
    it = 0
    pg = math.inf
    converged = False
    stalls = 0
    while it < opts.inner_cap:
        it += 1
        iter_start_val = val
        pg = 0.0
        any_accepted = False
        for b in blocks:
            g_scaled = grads[b] * ref[b]
            cur = getattr(state, b)
            unit_move = np.abs(clipped(b, cur - g_scaled * ref[b]) - cur
                               ).max(initial=0.0) / ref[b]
            pg = max(pg, unit_move)
            if unit_move <= opts.inner_tol:
                continue

            base = val - block_terms(b, state)
            alpha = alphas[b]
            accepted = False
            while alpha > 1e-18:
                trial = clipped(b, cur - alpha * g_scaled * ref[b])
                moved = np.abs(trial - cur).max(initial=0.0) / ref[b]
                if moved <= 1e-16:
                    break
                cand = state.copy()
                setattr(cand, b, trial)
                cand_val = base + block_terms(b, cand)
                decrease = float(np.sum(g_scaled * (cur - trial))) / ref[b]
                if (np.isfinite(cand_val) and decrease > 0
                        and cand_val <= val - opts.armijo * decrease):
                    accepted = True
                    break
                alpha *= 0.5
            if accepted:
                any_accepted = True
                alphas[b] = min(alpha * 2.0, 1e3)
                state = cand
                val, grads = value_grad(state)
            else:
                # remember roughly where the search gave up, retry a bit higher
                alphas[b] = max(alpha * 4.0, 1e-10)
        if pg <= opts.inner_tol:
            converged = True
            break
        if not any_accepted:
            break
        if iter_start_val - val <= 1e-10 * max(1.0, abs(val)):
            stalls += 1
            if stalls >= 2:
                break
        else:
            stalls = 0
    return state, InnerInfo(iterations=it, value=val, pg_norm=float(pg),
                            converged=converged)


# ---------------------------------------------------------------------------
# full transformed-problem solve (multiplier loop + slack refresh)


def fair_share_state(scen: Scenario, binary: bool = False) -> AllocationState:
    """Deterministic starting allocation.

    Fractional (default): every user holds the same fraction of each
    subchannel, sized so each slice exactly fills its spectrum quota;
    powers spread the full budget over the held fractions; edge CPU
    splits each slice's quota equally over its users and all servers.

    Binary: per cell, subchannels go round-robin to the cell's users,
    skipping users whose slice already holds its quota of channels.
    Binary fair share satisfies every constraint family exactly, which
    anchors the relaxation: from a fractional start the binariness
    penalty can push the whole allocation into the degenerate
    all-scaled-down corner instead of toward a usable assignment.
    """
    U, M, N, K = scen.num_users, scen.num_cells, scen.num_subchannels, scen.num_slices
    state = AllocationState.zeros(scen)
    slice_count = np.maximum(scen.slice_matrix.sum(axis=1), 1.0)

    if not binary:
        share = np.minimum(1.0, scen.alpha * M * N / (slice_count * N))
        state.x[:] = share[scen.slice_of][:, None]
    else:
        quota_left = np.floor(scen.alpha * M * N).astype(int)
        for j in range(M):
            members = list(scen.cell_members(j))
            if not members:
                continue
            pos = 0
            for n in range(N):
                for _ in range(len(members)):
                    u = members[pos % len(members)]
                    pos += 1
                    k = scen.slice_of[u]
                    if quota_left[k] > 0:
                        state.x[u, n] = 1.0
                        quota_left[k] -= 1
                        break

    held = state.x.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        budget_scale = np.where(held > 0, np.minimum(1.0 / held, 1.0), 0.0)
    state.p = state.x * (scen.max_power * budget_scale)[:, None]

    quota_f = scen.beta * scen.total_edge_capacity
    state.f[:] = (quota_f[scen.slice_of] / (slice_count[scen.slice_of] * M))[:, None]
    return state


def solve_p2(scen: Scenario, y: np.ndarray, start: AllocationState,
             opts: Optional[P2Options] = None, warm: Optional[AlmState] = None
             ) -> Tuple[AllocationState, list, bool, AlmState]:
    """Run the full transformed solve for fixed Y.

    Alternates multiplier rounds (inner descent + projected ascent, with
    the penalty coefficient grown whenever the max violation fails to
    shrink by ``shrink_factor``) and slack refreshes, until the
    transformed objective settles or the round caps hit.

    Multipliers start at zero (or at ``warm``, the estimates from a
    previous solve against the same scenario) and are carried across
    slack refreshes: they are the running dual estimates, and resetting
    them would let every refresh round re-violate the budgets before
    re-learning the same prices.

    Returns (state, trace rows, converged flag, multipliers); on hitting
    the caps the best state found so far is returned with the flag
    False, never an exception.
    """
    opts = opts or P2Options()
    state = start.copy()
    state.y = np.asarray(y, dtype=float)
    aux = update_slacks(scen, state, y)
    alm = warm if warm is not None else AlmState.fresh(scen, opts.psi0)
    psi = alm.psi
    trace = []
    prev_obj = None
    converged = False
    for outer in range(opts.outer_cap):
        prev_maxv = math.inf
        inner_total = 0
        for _ in range(opts.multiplier_cap):
            state, info = inner_minimize(scen, y, aux, alm, state, opts)
            inner_total += info.iterations
            viol = constraint_violations(scen, state)
            by_family = max_violation_by_family(viol)
            maxv = max(by_family.values())
            if maxv <= opts.feas_tol:
                break
            alm = update_multipliers(alm, viol)
            if maxv > opts.shrink_factor * prev_maxv:
                psi = min(psi * opts.psi_growth, opts.psi_cap)
                alm.psi = psi
            prev_maxv = maxv

        tobj = transformed_objective(scen, state, y, aux)
        trace.append(P2TraceRow(
            outer_iter=outer, inner_iters=inner_total, transformed_obj=tobj,
            true_obj=p2_objective(scen, state, y),
            max_violation=max_violation_by_family(constraint_violations(scen, state)),
            psi=psi))

        aux = update_slacks(scen, state, y)
        refreshed = transformed_objective(scen, state, y, aux)
        if prev_obj is not None and abs(refreshed - prev_obj) <= opts.obj_tol * max(
                1.0, abs(prev_obj)):
            converged = True
            break
        prev_obj = refreshed
    return state, trace, converged, alm
