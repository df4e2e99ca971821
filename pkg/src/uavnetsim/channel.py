"""Link budget chain and capacitated link-graph construction.

The chain runs log-distance path loss -> linear loss factor -> SNR ->
Shannon capacity, with optional per-edge Rayleigh fading drawn from a
seeded generator so runs stay reproducible.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Iterator, Mapping

from . import energy
from .deployment import DroneNode
from .errors import (
    BelowReferenceDistanceError,
    DegenerateNetworkError,
    InvalidParameterError,
    InvalidStateError,
)

LIGHT_SPEED_M_S = 2.998e8  # m/s

FADING_MODES = ("off", "rayleigh")
NEIGHBOR_RULES = ("grid", "max_distance")

# Residual bookkeeping tolerance: decrements this far below zero are float
# noise and clamp to zero; anything larger is a bookkeeping bug.
_RESIDUAL_EPS = 1e-6


@dataclass(frozen=True)
class ChannelParams:
    """RF configuration shared by every link in a scenario."""

    transmit_power_w: float = 10.0 ** -0.4  # W
    gain_tx: float = 10.0
    gain_rx: float = 10.0
    frequency_hz: float = 2.4e9  # Hz
    path_loss_exponent: float = 2.0  # free space
    uplink_exponent: float | None = None  # defaults to path_loss_exponent
    channel_coefficient: float = 1.0  # linear prefactor on the loss factor
    reference_distance_m: float = 1.0  # m
    noise_power_w: float = 1.4332e-15  # W
    bandwidth_hz: float = 360e3  # Hz
    fading_mode: str = "off"
    fading_seed: int | str | None = None

    def __post_init__(self):
        positive = {
            "transmit_power_w": self.transmit_power_w,
            "gain_tx": self.gain_tx,
            "gain_rx": self.gain_rx,
            "frequency_hz": self.frequency_hz,
            "path_loss_exponent": self.path_loss_exponent,
            "channel_coefficient": self.channel_coefficient,
            "reference_distance_m": self.reference_distance_m,
            "noise_power_w": self.noise_power_w,
            "bandwidth_hz": self.bandwidth_hz,
        }
        for name, value in positive.items():
            if value <= 0:
                raise InvalidParameterError(f"{name} must be positive, got {value}")
        if self.uplink_exponent is not None and self.uplink_exponent <= 0:
            raise InvalidParameterError(
                f"uplink_exponent must be positive, got {self.uplink_exponent}"
            )
        if self.fading_mode not in FADING_MODES:
            raise InvalidParameterError(f"unknown fading mode {self.fading_mode!r}")
        if self.fading_mode == "rayleigh" and self.fading_seed is None:
            raise InvalidParameterError("rayleigh fading requires a seed")

    @property
    def wavelength_m(self) -> float:
        return LIGHT_SPEED_M_S / self.frequency_hz

    @property
    def exponent(self) -> float:
        return self.path_loss_exponent if self.uplink_exponent is None else self.uplink_exponent

    @property
    def reference_loss_db(self) -> float:
        """Free-space loss at the reference distance, antenna gains included."""
        d0 = self.reference_distance_m
        return 20.0 * math.log10(4.0 * math.pi * d0 / self.wavelength_m) - 10.0 * math.log10(
            self.gain_tx * self.gain_rx
        )


@dataclass(frozen=True)
class LinkBudget:
    """Computed RF figures for one link at one distance."""

    distance_m: float
    path_loss_db: float
    loss_factor: float  # linear-scale attenuation, >= 1 for lossy links
    snr: float  # linear ratio
    capacity_bps: float


@dataclass(frozen=True)
class NeighborRule:
    """Which drone pairs get a communication edge.

    "grid" links drones in edge-adjacent grid cells; "max_distance" links any
    pair within ``max_distance_m`` meters.
    """

    kind: str = "grid"
    max_distance_m: float | None = None

    def __post_init__(self):
        if self.kind not in NEIGHBOR_RULES:
            raise InvalidParameterError(f"unknown neighbor rule {self.kind!r}")
        if self.kind == "max_distance":
            if self.max_distance_m is None or self.max_distance_m <= 0:
                raise InvalidParameterError("max_distance rule needs a positive distance")

    def admits(self, a: DroneNode, b: DroneNode, distance_m: float) -> bool:
        if self.kind == "grid":
            dr = abs(a.cell[0] - b.cell[0])
            dc = abs(a.cell[1] - b.cell[1])
            return dr + dc == 1
        return distance_m <= self.max_distance_m


def path_loss_db(params: ChannelParams, distance_m: float) -> float:
    """Log-distance path loss in dB at ``distance_m``."""
    d0 = params.reference_distance_m
    if distance_m < d0:
        raise BelowReferenceDistanceError(
            f"distance {distance_m} m is below the reference distance {d0} m"
        )
    return params.reference_loss_db + 10.0 * params.exponent * math.log10(distance_m / d0)


def linear_loss_factor(params: ChannelParams, distance_m: float) -> float:
    """Linear-scale attenuation factor; its inverse is the channel power gain."""
    return params.channel_coefficient * 10.0 ** (path_loss_db(params, distance_m) / 10.0)


def snr(params: ChannelParams, distance_m: float, fading_gain: float = 1.0) -> float:
    """Linear signal-to-noise ratio at the receiver."""
    if fading_gain <= 0:
        raise InvalidParameterError(f"fading gain must be positive, got {fading_gain}")
    loss = linear_loss_factor(params, distance_m)
    return params.transmit_power_w / loss * fading_gain / params.noise_power_w


def capacity(params: ChannelParams, snr_linear: float) -> float:
    """Shannon capacity in bits/second for a linear SNR."""
    if snr_linear < 0:
        raise InvalidParameterError(f"SNR must be non-negative, got {snr_linear}")
    return params.bandwidth_hz * math.log2(1.0 + snr_linear)


def link_budget(params: ChannelParams, distance_m: float, fading_gain: float = 1.0) -> LinkBudget:
    """Full budget for one link: loss, SNR, and capacity at ``distance_m``."""
    loss_db = path_loss_db(params, distance_m)
    loss = params.channel_coefficient * 10.0 ** (loss_db / 10.0)
    ratio = params.transmit_power_w / loss * fading_gain / params.noise_power_w
    return LinkBudget(
        distance_m=distance_m,
        path_loss_db=loss_db,
        loss_factor=loss,
        snr=ratio,
        capacity_bps=capacity(params, ratio),
    )


@dataclass
class _Edge:
    budget: LinkBudget
    static_bps: float  # undeterated capacity (RF-derived or pinned)
    residual_bps: float


class LinkGraph:
    """Directed capacitated graph over drone ids.

    Edge residuals are the single source of truth for the scheduler; only one
    writer may mutate them at a time.
    """

    def __init__(self):
        self._neighbors: dict[int, list[int]] = {}
        self._edges: dict[tuple[int, int], _Edge] = {}

    def add_node(self, node: int) -> None:
        self._neighbors.setdefault(node, [])

    def add_edge(self, u: int, v: int, budget: LinkBudget, static_bps: float,
                 residual_bps: float | None = None) -> None:
        if u == v:
            raise InvalidParameterError("self-loops are not allowed")
        if static_bps < 0:
            raise InvalidParameterError(f"static capacity must be non-negative, got {static_bps}")
        self.add_node(u)
        self.add_node(v)
        if v not in self._neighbors[u]:
            self._neighbors[u].append(v)
            self._neighbors[u].sort()
        self._edges[(u, v)] = _Edge(
            budget=budget,
            static_bps=static_bps,
            residual_bps=static_bps if residual_bps is None else residual_bps,
        )

    @property
    def nodes(self) -> list[int]:
        return sorted(self._neighbors)

    def neighbors(self, node: int) -> list[int]:
        """Ascending neighbor ids; unknown nodes have none."""
        return list(self._neighbors.get(node, ()))

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._edges

    def edges(self) -> Iterator[tuple[int, int]]:
        return iter(self._edges)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def _edge(self, u: int, v: int) -> _Edge:
        try:
            return self._edges[(u, v)]
        except KeyError:
            raise InvalidParameterError(f"no edge {u}->{v} in the graph") from None

    def budget(self, u: int, v: int) -> LinkBudget:
        return self._edge(u, v).budget

    def static_capacity_bps(self, u: int, v: int) -> float:
        return self._edge(u, v).static_bps

    def residual_bps(self, u: int, v: int) -> float:
        return self._edge(u, v).residual_bps

    def set_residual(self, u: int, v: int, value_bps: float) -> None:
        edge = self._edge(u, v)
        if value_bps < 0:
            raise InvalidStateError(f"residual for {u}->{v} cannot be negative")
        edge.residual_bps = value_bps

    def decrement(self, u: int, v: int, amount_bps: float) -> None:
        edge = self._edge(u, v)
        remaining = edge.residual_bps - amount_bps
        if remaining < -_RESIDUAL_EPS * max(1.0, edge.static_bps):
            raise InvalidStateError(
                f"decrement of {amount_bps} overdraws residual {edge.residual_bps} on {u}->{v}"
            )
        edge.residual_bps = max(0.0, remaining)

    def zero(self, u: int, v: int) -> None:
        self._edge(u, v).residual_bps = 0.0

    def refresh_residuals(self, levels: Mapping[int, float]) -> None:
        """Reset every residual to its battery-derated capacity.

        The transmitting end of each edge is the one whose battery derates it.
        """
        for (u, _v), edge in self._edges.items():
            edge.residual_bps = energy.derate_capacity(edge.static_bps, levels.get(u, 1.0))


def build_link_graph(
    fleet: list[DroneNode],
    distances: list[list[float]],
    params: ChannelParams,
    rule: NeighborRule | None = None,
    pinned_capacities: Mapping[tuple[int, int], float] | None = None,
    pinned_default_bps: float | None = None,
) -> LinkGraph:
    """Build the directed link graph over a placed fleet.

    Every admitted pair gets both directed edges with a full link budget at
    the pair distance. Capacities come from the budget unless a pinned map is
    supplied, in which case listed edges take their pinned value and the rest
    fall back to ``pinned_default_bps`` (or the RF value when no default is
    given). Initial residuals are derated by each transmitter's battery.
    """
    if len(fleet) < 2:
        raise DegenerateNetworkError(f"need at least 2 drones, got {len(fleet)}")
    if rule is None:
        rule = NeighborRule()
    rng = None
    if params.fading_mode == "rayleigh":
        rng = random.Random(f"{params.fading_seed}/fading")
    graph = LinkGraph()
    by_id = {d.id: d for d in fleet}
    for drone_id in sorted(by_id):
        graph.add_node(drone_id)
    ids = sorted(by_id)
    for u in ids:
        for v in ids:
            if u == v:
                continue
            d = distances[u][v]
            if not rule.admits(by_id[u], by_id[v], d):
                continue
            gain = rng.expovariate(1.0) if rng is not None else 1.0
            budget = link_budget(params, d, gain)
            if pinned_capacities is not None and (u, v) in pinned_capacities:
                static = float(pinned_capacities[(u, v)])
            elif pinned_capacities is not None and pinned_default_bps is not None:
                static = float(pinned_default_bps)
            else:
                static = budget.capacity_bps
            residual = energy.derate_capacity(static, by_id[u].battery.level)
            graph.add_edge(u, v, budget, static, residual)
    return graph
