"""Problem instances for sliced multi-cell MEC resource allocation.

A Scenario bundles everything a solver needs and nothing it may change:
cell/server topology, per-tenant SLAs (priority weight, delay target,
bandwidth and compute quotas), user tasks, uplink channel gains, and
hand-off delays between servers.  Instances are either generated from
:class:`GeneratorParams` (deterministic per seed) or loaded from a YAML
document (see ``docs/scenario-format.md``).

Scenarios are immutable after construction and safe to share between
concurrent solver runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import yaml

DBM_PER_HZ_THERMAL_NOISE = -174.0


class ScenarioError(ValueError):
    """Base class for scenario construction problems."""


class ScenarioParseError(ScenarioError):
    """The scenario document could not be parsed."""


class ScenarioValidationError(ScenarioError):
    """A parsed scenario violates an invariant; ``field`` names the culprit."""

    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class SliceSla:
    """SLA of one tenant: priority weight, delay target and resource quotas."""

    slice_id: int
    weight: float               # priority weight in the delay-deviation objective
    delay_target_s: float
    bandwidth_share: float      # fraction of the M*N subchannel pool
    compute_share: float        # fraction of the pooled edge capacity

    def __post_init__(self):
        if self.weight <= 0:
            raise ScenarioValidationError("weight", f"must be > 0, got {self.weight}")
        if self.delay_target_s <= 0:
            raise ScenarioValidationError(
                "delay_target_s", f"must be > 0, got {self.delay_target_s}")
        for name in ("bandwidth_share", "compute_share"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ScenarioValidationError(name, f"must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class Task:
    size_bits: float
    cycles_per_bit: float

    def __post_init__(self):
        if self.size_bits <= 0:
            raise ScenarioValidationError("size_bits", f"must be > 0, got {self.size_bits}")
        if self.cycles_per_bit <= 0:
            raise ScenarioValidationError(
                "cycles_per_bit", f"must be > 0, got {self.cycles_per_bit}")

    @property
    def cycles(self) -> float:
        return self.size_bits * self.cycles_per_bit


@dataclass(frozen=True)
class User:
    user_id: int
    slice_id: int
    serving_server: int
    task: Task
    local_cpu_cps: float        # device CPU speed, cycles/s
    local_budget_cycles: float  # per-task cap on locally executed cycles
    max_power_w: float

    def __post_init__(self):
        if self.local_cpu_cps <= 0:
            raise ScenarioValidationError(
                "local_cpu_cps", f"must be > 0, got {self.local_cpu_cps}")
        if self.local_budget_cycles <= 0:
            raise ScenarioValidationError(
                "local_budget_cycles", f"must be > 0, got {self.local_budget_cycles}")
        if self.max_power_w <= 0:
            raise ScenarioValidationError(
                "max_power_w", f"must be > 0, got {self.max_power_w}")


@dataclass(frozen=True)
class Server:
    server_id: int
    capacity_cps: float

    def __post_init__(self):
        if self.capacity_cps <= 0:
            raise ScenarioValidationError(
                "capacity_cps", f"must be > 0, got {self.capacity_cps}")


@dataclass(frozen=True)
class ChannelState:
    """Uplink path gains per (user, cell, subchannel) plus PHY constants."""

    gains: np.ndarray           # shape (U, M, N), linear power gains
    noise_power_w: float        # receiver noise over one subchannel
    subchannel_bandwidth_hz: float
    num_subchannels: int

    def __post_init__(self):
        g = np.asarray(self.gains, dtype=float)
        object.__setattr__(self, "gains", g)
        if g.ndim != 3:
            raise ScenarioValidationError(
                "gains", f"expected a (user, cell, subchannel) tensor, got shape {g.shape}")
        if np.any(g < 0):
            raise ScenarioValidationError("gains", "negative path gain")
        if self.noise_power_w <= 0:
            raise ScenarioValidationError(
                "noise_power_w", f"must be > 0, got {self.noise_power_w}")
        if g.shape[2] != self.num_subchannels:
            raise ScenarioValidationError(
                "num_subchannels",
                f"gains last axis {g.shape[2]} != num_subchannels {self.num_subchannels}")


@dataclass(frozen=True)
class HandoffMatrix:
    """Fixed transfer delays between servers; zero on the diagonal."""

    delays_s: np.ndarray        # shape (M, M)

    def __post_init__(self):
        d = np.asarray(self.delays_s, dtype=float)
        object.__setattr__(self, "delays_s", d)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ScenarioValidationError("delays_s", f"expected square matrix, got {d.shape}")
        if np.any(np.diag(d) != 0):
            raise ScenarioValidationError("delays_s", "diagonal must be zero")
        if np.any(d < 0):
            raise ScenarioValidationError("delays_s", "negative hand-off delay")

    @classmethod
    def uniform(cls, num_cells: int, delay_s: float) -> "HandoffMatrix":
        d = np.full((num_cells, num_cells), delay_s, dtype=float)
        np.fill_diagonal(d, 0.0)
        return cls(d)


@dataclass(frozen=True)
class Scenario:
    """Immutable network instance.

    Besides the raw records, exposes flat numpy views (weights, targets,
    per-user task constants, cell membership, cross gains toward each
    user's serving BS) that solvers index repeatedly.
    """

    users: tuple
    servers: tuple
    slices: tuple
    channel: ChannelState
    handoff: HandoffMatrix
    rng_seed: int = 0

    # derived, filled in __post_init__
    serving: np.ndarray = field(init=False, repr=False)
    slice_of: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)
    targets: np.ndarray = field(init=False, repr=False)
    alpha: np.ndarray = field(init=False, repr=False)
    beta: np.ndarray = field(init=False, repr=False)
    task_bits: np.ndarray = field(init=False, repr=False)
    task_cycles: np.ndarray = field(init=False, repr=False)
    local_cpu: np.ndarray = field(init=False, repr=False)
    local_budget: np.ndarray = field(init=False, repr=False)
    max_power: np.ndarray = field(init=False, repr=False)
    capacity: np.ndarray = field(init=False, repr=False)
    gain_to_serving: np.ndarray = field(init=False, repr=False)
    cross_gain: np.ndarray = field(init=False, repr=False)
    other_cell: np.ndarray = field(init=False, repr=False)
    interference_tensor: np.ndarray = field(init=False, repr=False)
    cell_matrix: np.ndarray = field(init=False, repr=False)
    slice_matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "users", tuple(self.users))
        object.__setattr__(self, "servers", tuple(self.servers))
        object.__setattr__(self, "slices", tuple(self.slices))
        U, M, K = len(self.users), len(self.servers), len(self.slices)
        if U == 0:
            raise ScenarioValidationError("users", "at least one user required")
        if M == 0:
            raise ScenarioValidationError("servers", "at least one server required")
        if self.channel.gains.shape[:2] != (U, M):
            raise ScenarioValidationError(
                "gains", f"shape {self.channel.gains.shape} does not match "
                f"{U} users x {M} cells")
        if self.handoff.delays_s.shape != (M, M):
            raise ScenarioValidationError(
                "delays_s", f"shape {self.handoff.delays_s.shape} != ({M}, {M})")
        slice_ids = {s.slice_id for s in self.slices}
        if len(slice_ids) != K:
            raise ScenarioValidationError("slice_id", "duplicate slice ids")
        for u in self.users:
            if u.slice_id not in slice_ids:
                raise ScenarioValidationError(
                    "slice_id", f"user {u.user_id} references unknown slice {u.slice_id}")
            if not 0 <= u.serving_server < M:
                raise ScenarioValidationError(
                    "serving_server", f"user {u.user_id} has invalid cell {u.serving_server}")
        asum = sum(s.bandwidth_share for s in self.slices)
        if asum > 1.0 + 1e-9:
            raise ScenarioValidationError(
                "bandwidth_share", f"slice bandwidth shares sum to {asum:.6g} > 1")
        bsum = sum(s.compute_share for s in self.slices)
        if bsum > 1.0 + 1e-9:
            raise ScenarioValidationError(
                "compute_share", f"slice compute shares sum to {bsum:.6g} > 1")

        by_slice = {s.slice_id: i for i, s in enumerate(sorted(self.slices,
                                                               key=lambda s: s.slice_id))}
        ordered = sorted(self.slices, key=lambda s: s.slice_id)
        set_ = object.__setattr__
        set_(self, "serving", np.array([u.serving_server for u in self.users], dtype=int))
        set_(self, "slice_of", np.array([by_slice[u.slice_id] for u in self.users], dtype=int))
        set_(self, "weights", np.array([s.weight for s in ordered]))
        set_(self, "targets", np.array([s.delay_target_s for s in ordered]))
        set_(self, "alpha", np.array([s.bandwidth_share for s in ordered]))
        set_(self, "beta", np.array([s.compute_share for s in ordered]))
        set_(self, "task_bits", np.array([u.task.size_bits for u in self.users]))
        set_(self, "task_cycles", np.array([u.task.cycles for u in self.users]))
        set_(self, "local_cpu", np.array([u.local_cpu_cps for u in self.users]))
        set_(self, "local_budget", np.array([u.local_budget_cycles for u in self.users]))
        set_(self, "max_power", np.array([u.max_power_w for u in self.users]))
        set_(self, "capacity", np.array([s.capacity_cps for s in self.servers]))
        gains = self.channel.gains
        set_(self, "gain_to_serving", gains[np.arange(U), self.serving, :])
        # cross_gain[u, v, n]: gain of transmitter v at user u's serving BS
        set_(self, "cross_gain", np.ascontiguousarray(
            np.swapaxes(gains[:, self.serving, :], 0, 1)))
        set_(self, "other_cell", self.serving[:, None] != self.serving[None, :])
        # cross gains masked to other-cell pairs; contracting this tensor
        # against transmit powers gives each user's interference directly
        set_(self, "interference_tensor", np.ascontiguousarray(
            self.other_cell[:, :, None] * self.cross_gain))
        cell_m = np.zeros((M, U))
        cell_m[self.serving, np.arange(U)] = 1.0
        set_(self, "cell_matrix", cell_m)
        slice_m = np.zeros((K, U))
        slice_m[self.slice_of, np.arange(U)] = 1.0
        set_(self, "slice_matrix", slice_m)

    @property
    def num_users(self) -> int:
        return len(self.users)

    @property
    def num_cells(self) -> int:
        return len(self.servers)

    @property
    def num_subchannels(self) -> int:
        return self.channel.num_subchannels

    @property
    def num_slices(self) -> int:
        return len(self.slices)

    @property
    def total_edge_capacity(self) -> float:
        """Pooled edge capacity, the base of the per-slice compute quotas."""
        return float(self.capacity.sum())

    def cell_members(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.serving == j)

    def slice_members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.slice_of == k)


def default_slices(num_slices: int = 3) -> tuple:
    """Three service classes: low-latency, latency-sensitive, background."""
    profiles = [
        (3.0, 0.05),
        (2.0, 0.10),
        (1.0, 5.0),
    ]
    profiles = profiles[:num_slices]
    share = 1.0 / len(profiles)
    return tuple(
        SliceSla(slice_id=k, weight=w, delay_target_s=t,
                 bandwidth_share=share, compute_share=share)
        for k, (w, t) in enumerate(profiles)
    )


@dataclass(frozen=True)
class GeneratorParams:
    """Knobs for synthetic instances; defaults give the desk-scale baseline.

    Geometry: cells sit on a line ``cell_spacing_m`` apart, each cell's users
    uniform in a disc of ``cell_radius_m`` (at least ``min_user_distance_m``
    from the BS).  Gains combine 128.1 + 37.6 log10(d_km) dB path loss with
    i.i.d. Rayleigh fading per subchannel.  Users associate with the cell
    whose subchannel-averaged gain is strongest, which may differ from the
    cell they were placed in.
    """

    num_cells: int = 2
    users_per_cell: int = 6
    num_subchannels: int = 16
    slices: tuple = field(default_factory=default_slices)
    cell_spacing_m: float = 500.0
    cell_radius_m: float = 250.0
    min_user_distance_m: float = 35.0
    pathloss_fixed_db: float = 128.1
    pathloss_per_decade_db: float = 37.6
    subchannel_bandwidth_hz: float = 180e3
    noise_psd_dbm_per_hz: float = DBM_PER_HZ_THERMAL_NOISE
    max_power_dbm: float = 23.0
    local_cpu_cps: float = 1e9
    local_budget_cycles: float = 2e10
    server_capacity_cps: float = 20e9
    handoff_delay_s: float = 5e-3
    task_size_bits: float = 8e6
    cycles_per_bit_choices: tuple = (1500.0, 2000.0, 2500.0)

    def __post_init__(self):
        if self.num_cells < 1:
            raise ScenarioValidationError("num_cells", f"must be >= 1, got {self.num_cells}")
        if self.users_per_cell < 1:
            raise ScenarioValidationError(
                "users_per_cell", f"must be >= 1, got {self.users_per_cell}")
        if self.num_subchannels < 1:
            raise ScenarioValidationError(
                "num_subchannels", f"must be >= 1, got {self.num_subchannels}")
        object.__setattr__(self, "slices", tuple(self.slices))
        object.__setattr__(self, "cycles_per_bit_choices",
                           tuple(self.cycles_per_bit_choices))

    @property
    def noise_power_w(self) -> float:
        return dbm_to_watt(self.noise_psd_dbm_per_hz) * self.subchannel_bandwidth_hz


def generate_scenario(params: GeneratorParams, seed: int) -> Scenario:
    """Draw a Scenario; identical (params, seed) give bit-identical results."""
    rng = np.random.default_rng(seed)
    M = params.num_cells
    N = params.num_subchannels
    U = M * params.users_per_cell
    K = len(params.slices)

    cell_x = np.arange(M) * params.cell_spacing_m
    cell_pos = np.stack([cell_x, np.zeros(M)], axis=1)

    # uniform in the annulus [min_user_distance, cell_radius] around the home cell
    home = np.repeat(np.arange(M), params.users_per_cell)
    r2 = rng.uniform(params.min_user_distance_m ** 2, params.cell_radius_m ** 2, size=U)
    radius = np.sqrt(r2)
    angle = rng.uniform(0.0, 2.0 * math.pi, size=U)
    pos = cell_pos[home] + np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)

    dist = np.linalg.norm(pos[:, None, :] - cell_pos[None, :, :], axis=2)
    dist = np.maximum(dist, params.min_user_distance_m)
    pl_db = params.pathloss_fixed_db + params.pathloss_per_decade_db * np.log10(dist / 1000.0)
    mean_gain = 10.0 ** (-pl_db / 10.0)
    fading = rng.exponential(1.0, size=(U, M, N))
    gains = mean_gain[:, :, None] * fading

    serving = np.argmax(gains.mean(axis=2), axis=1)

    cpb = rng.choice(np.asarray(params.cycles_per_bit_choices, dtype=float), size=U)
    max_power_w = dbm_to_watt(params.max_power_dbm)

    users = tuple(
        User(user_id=u,
             slice_id=int(u % K),
             serving_server=int(serving[u]),
             task=Task(size_bits=params.task_size_bits, cycles_per_bit=float(cpb[u])),
             local_cpu_cps=params.local_cpu_cps,
             local_budget_cycles=params.local_budget_cycles,
             max_power_w=max_power_w)
        for u in range(U)
    )
    servers = tuple(Server(server_id=j, capacity_cps=params.server_capacity_cps)
                    for j in range(M))
    channel = ChannelState(gains=gains,
                           noise_power_w=params.noise_power_w,
                           subchannel_bandwidth_hz=params.subchannel_bandwidth_hz,
                           num_subchannels=N)
    return Scenario(users=users, servers=servers, slices=params.slices,
                    channel=channel,
                    handoff=HandoffMatrix.uniform(M, params.handoff_delay_s),
                    rng_seed=seed)


# ---------------------------------------------------------------------------
# YAML loading


def _apply_overrides(doc: dict, overrides: dict) -> dict:
    """Apply flat dotted-key overrides (``network.users_per_cell: 4``)."""
    for key, value in overrides.items():
        parts = str(key).split(".")
        node = doc
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ScenarioParseError(f"override {key!r} descends into a non-mapping")
        node[parts[-1]] = value
    return doc


def _require(section: dict, key: str, where: str):
    if key not in section:
        raise ScenarioValidationError(f"{where}.{key}", "missing required key")
    return section[key]


def _slices_from_doc(raw: Sequence[dict]) -> tuple:
    slices = []
    for i, entry in enumerate(raw):
        where = f"slices[{i}]"
        slices.append(SliceSla(
            slice_id=int(entry.get("slice_id", i)),
            weight=float(_require(entry, "weight", where)),
            delay_target_s=float(_require(entry, "delay_target_s", where)),
            bandwidth_share=float(_require(entry, "bandwidth_share", where)),
            compute_share=float(_require(entry, "compute_share", where)),
        ))
    return tuple(slices)


def scenario_from_dict(doc: dict, extra_overrides: Optional[dict] = None) -> Scenario:
    """Build a Scenario from a parsed scenario document."""
    if not isinstance(doc, dict):
        raise ScenarioParseError(f"scenario document must be a mapping, got {type(doc).__name__}")
    doc = {k: v for k, v in doc.items()}
    overrides = dict(doc.pop("overrides", {}) or {})
    if extra_overrides:
        overrides.update(extra_overrides)
    if overrides:
        doc = _apply_overrides(doc, overrides)

    network = doc.get("network", {}) or {}
    channel = doc.get("channel", {}) or {}
    defaults = doc.get("defaults", {}) or {}
    slices_raw = doc.get("slices")
    slices = _slices_from_doc(slices_raw) if slices_raw else default_slices()

    if "users" not in doc or doc["users"] is None:
        # generator-backed document
        kwargs = {}
        for key in ("num_cells", "users_per_cell", "cell_spacing_m", "cell_radius_m",
                    "min_user_distance_m", "handoff_delay_s", "server_capacity_cps"):
            if key in network:
                kwargs[key] = network[key]
        for src, dst in (("num_subchannels", "num_subchannels"),
                         ("subchannel_bandwidth_hz", "subchannel_bandwidth_hz"),
                         ("noise_psd_dbm_per_hz", "noise_psd_dbm_per_hz"),
                         ("pathloss_fixed_db", "pathloss_fixed_db"),
                         ("pathloss_per_decade_db", "pathloss_per_decade_db")):
            if src in channel:
                kwargs[dst] = channel[src]
        for src, dst in (("task_size_bits", "task_size_bits"),
                         ("cycles_per_bit_choices", "cycles_per_bit_choices"),
                         ("local_cpu_cps", "local_cpu_cps"),
                         ("local_budget_cycles", "local_budget_cycles"),
                         ("max_power_dbm", "max_power_dbm")):
            if src in defaults:
                kwargs[dst] = defaults[src]
        if "num_cells" in kwargs:
            kwargs["num_cells"] = int(kwargs["num_cells"])
        if "users_per_cell" in kwargs:
            kwargs["users_per_cell"] = int(kwargs["users_per_cell"])
        if "num_subchannels" in kwargs:
            kwargs["num_subchannels"] = int(kwargs["num_subchannels"])
        params = GeneratorParams(slices=slices, **kwargs)
        return generate_scenario(params, seed=int(network.get("rng_seed", 0)))

    num_cells = int(_require(network, "num_cells", "network"))
    num_subchannels = int(_require(channel, "num_subchannels", "channel"))
    if "noise_power_w" in channel:
        noise = float(channel["noise_power_w"])
    else:
        bw = float(_require(channel, "subchannel_bandwidth_hz", "channel"))
        noise = dbm_to_watt(float(channel.get("noise_psd_dbm_per_hz",
                                              DBM_PER_HZ_THERMAL_NOISE))) * bw
    gains = channel.get("gains")
    if gains is None:
        raise ScenarioValidationError(
            "channel.gains", "explicit users require an explicit gains tensor")
    gains = np.asarray(gains, dtype=float)

    users = []
    for i, entry in enumerate(doc["users"]):
        where = f"users[{i}]"
        task_doc = _require(entry, "task", where)
        users.append(User(
            user_id=int(entry.get("user_id", i)),
            slice_id=int(_require(entry, "slice_id", where)),
            serving_server=int(_require(entry, "serving_server", where)),
            task=Task(size_bits=float(_require(task_doc, "size_bits", where + ".task")),
                      cycles_per_bit=float(_require(task_doc, "cycles_per_bit",
                                                    where + ".task"))),
            local_cpu_cps=float(entry.get("local_cpu_cps",
                                          defaults.get("local_cpu_cps", 1e9))),
            local_budget_cycles=float(entry.get("local_budget_cycles",
                                                defaults.get("local_budget_cycles", 2e10))),
            max_power_w=float(entry.get("max_power_w",
                                        dbm_to_watt(defaults.get("max_power_dbm", 23.0)))),
        ))

    caps = network.get("server_capacity_cps", 20e9)
    if isinstance(caps, (list, tuple)):
        if len(caps) != num_cells:
            raise ScenarioValidationError(
                "network.server_capacity_cps",
                f"{len(caps)} entries for {num_cells} cells")
        servers = tuple(Server(server_id=j, capacity_cps=float(c))
                        for j, c in enumerate(caps))
    else:
        servers = tuple(Server(server_id=j, capacity_cps=float(caps))
                        for j in range(num_cells))

    handoff = network.get("handoff_delay_s", 5e-3)
    if isinstance(handoff, (list, tuple)):
        hmat = HandoffMatrix(np.asarray(handoff, dtype=float))
    else:
        hmat = HandoffMatrix.uniform(num_cells, float(handoff))

    channel_state = ChannelState(
        gains=gains, noise_power_w=noise,
        subchannel_bandwidth_hz=float(channel.get("subchannel_bandwidth_hz", 180e3)),
        num_subchannels=num_subchannels)
    return Scenario(users=tuple(users), servers=servers, slices=slices,
                    channel=channel_state, handoff=hmat,
                    rng_seed=int(network.get("rng_seed", 0)))


def load_scenario(path, overrides: Optional[dict] = None) -> Scenario:
    """Load and validate a scenario document from ``path``.

    Raises :class:`ScenarioParseError` on malformed YAML and
    :class:`ScenarioValidationError` (naming the offending field) on
    invariant violations.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except FileNotFoundError:
        raise
    except yaml.YAMLError as exc:
        raise ScenarioParseError(f"{path}: {exc}") from exc
    return scenario_from_dict(doc, extra_overrides=overrides)


def scenario_to_dict(scen: Scenario) -> dict:
    """Serialize to the explicit document form accepted by ``scenario_from_dict``.

    The output spells out every user and the full gains tensor, so a
    round trip through :func:`load_scenario` reproduces the scenario
    bit-for-bit regardless of generator defaults.
    """
    return {
        "network": {
            "num_cells": scen.num_cells,
            "rng_seed": scen.rng_seed,
            "server_capacity_cps": [s.capacity_cps for s in scen.servers],
            "handoff_delay_s": scen.handoff.delays_s.tolist(),
        },
        "channel": {
            "num_subchannels": scen.num_subchannels,
            "subchannel_bandwidth_hz": scen.channel.subchannel_bandwidth_hz,
            "noise_power_w": scen.channel.noise_power_w,
            "gains": scen.channel.gains.tolist(),
        },
        "slices": [
            {"slice_id": s.slice_id, "weight": s.weight,
             "delay_target_s": s.delay_target_s,
             "bandwidth_share": s.bandwidth_share,
             "compute_share": s.compute_share}
            for s in scen.slices
        ],
        "users": [
            {"user_id": u.user_id, "slice_id": u.slice_id,
             "serving_server": u.serving_server,
             "task": {"size_bits": u.task.size_bits,
                      "cycles_per_bit": u.task.cycles_per_bit},
             "local_cpu_cps": u.local_cpu_cps,
             "local_budget_cycles": u.local_budget_cycles,
             "max_power_w": u.max_power_w}
            for u in scen.users
        ],
    }


def save_scenario(scen: Scenario, path) -> None:
    """Write the explicit YAML document for ``scen`` to ``path``."""
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(scenario_to_dict(scen), fh, sort_keys=False,
                       default_flow_style=None)
