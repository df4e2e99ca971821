"""Hop-bounded path enumeration and greedy bottleneck multipath scheduling."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import LinkGraph
from .errors import CapacityExhaustedError, InvalidParameterError, NoRouteError


@dataclass(frozen=True)
class RoutingConfig:
    """Routing job description: endpoints and the hop budget."""

    source: int
    sink: int
    hop_threshold: int = 5  # maximum number of nodes on a path

    def __post_init__(self):
        if self.hop_threshold < 2:
            raise InvalidParameterError(
                f"hop threshold must be at least 2, got {self.hop_threshold}"
            )
        if self.source == self.sink:
            raise InvalidParameterError("source and sink must differ")


@dataclass(frozen=True)
class PathAllocation:
    """One scheduled path: the rate it won and the data booked onto it."""

    nodes: tuple[int, ...]
    rate_bps: float  # path bottleneck at selection time
    allocated_bits: float
    capacities_before_bps: tuple[float, ...]
    hop_times_s: tuple[float, ...]


@dataclass(frozen=True)
class TransmissionPlan:
    total_data_bits: float
    allocations: tuple[PathAllocation, ...]

    @property
    def allocated_bits(self) -> float:
        return sum(a.allocated_bits for a in self.allocations)

    @property
    def combined_rate_bps(self) -> float:
        return sum(a.rate_bps for a in self.allocations)

    @property
    def completion_time_s(self) -> float:
        """Seconds to deliver the job with all selected paths active at once."""
        if self.total_data_bits == 0:
            return 0.0
        return self.total_data_bits / self.combined_rate_bps


def find_all_paths(
    graph: LinkGraph, start: int, end: int, threshold: int
) -> list[tuple[int, ...]]:
    """Every simple path from start to end with at most ``threshold`` nodes.

    Depth-first extension, neighbors visited in ascending id order, so the
    result order is deterministic. A start equal to the end yields the
    single-node path; a start or end missing from the graph yields nothing.
    """
    if threshold < 1:
        raise InvalidParameterError(f"threshold must be at least 1, got {threshold}")
    return _extend(graph, start, end, threshold, ())


def _extend(
    graph: LinkGraph, node: int, end: int, threshold: int, path: tuple[int, ...]
) -> list[tuple[int, ...]]:
    path = path + (node,)
    if node == end:
        return [path]
    found = []
    for neighbor in graph.neighbors(node):
        if neighbor not in path and len(path) < threshold:
            found.extend(_extend(graph, neighbor, end, threshold, path))
    return found


def path_bottleneck(graph: LinkGraph, nodes: tuple[int, ...]) -> float:
    """Minimum residual capacity along a path; infinite for a single node."""
    if len(nodes) < 2:
        return math.inf
    return min(graph.residual_bps(u, v) for u, v in zip(nodes, nodes[1:]))


def select_widest(
    graph: LinkGraph, paths: list[tuple[int, ...]]
) -> tuple[int, float]:
    """Index and bottleneck of the widest path; ties keep the earliest path."""
    if not paths:
        raise NoRouteError("no candidate paths to select from")
    best_index = 0
    best_bottleneck = path_bottleneck(graph, paths[0])
    for index in range(1, len(paths)):
        bottleneck = path_bottleneck(graph, paths[index])
        if bottleneck > best_bottleneck:
            best_index = index
            best_bottleneck = bottleneck
    return best_index, best_bottleneck


def _hop_capacities(graph: LinkGraph, nodes: tuple[int, ...]) -> tuple[float, ...]:
    return tuple(graph.residual_bps(u, v) for u, v in zip(nodes, nodes[1:]))


def schedule(
    graph: LinkGraph,
    config: RoutingConfig,
    data_bits: float,
    *,
    zero_out_chosen_path: bool = False,
) -> TransmissionPlan:
    """Greedy bottleneck scheduling of a job across the enumerated paths.

    Each round picks the candidate path with the largest residual bottleneck,
    books that bottleneck's worth of the job onto it, and subtracts the
    bottleneck from every edge of the path (or zeroes the whole path in the
    compatibility mode). Rounds repeat until the job is covered or no path
    has residual capacity left, which raises with the remaining shortfall.
    """
    if data_bits < 0:
        raise InvalidParameterError(f"data size must be non-negative, got {data_bits}")
    paths = find_all_paths(graph, config.source, config.sink, config.hop_threshold)
    if not paths:
        raise NoRouteError(f"no path from {config.source} to {config.sink}")
    allocations = []
    remaining = data_bits
    while remaining > 0:
        index, bottleneck = select_widest(graph, paths)
        if bottleneck <= 0:
            raise CapacityExhaustedError(remaining)
        chosen = paths[index]
        capacities = _hop_capacities(graph, chosen)
        allocations.append(
            PathAllocation(
                nodes=chosen,
                rate_bps=bottleneck,
                allocated_bits=bottleneck,
                capacities_before_bps=capacities,
                hop_times_s=tuple(bottleneck / c for c in capacities),
            )
        )
        for u, v in zip(chosen, chosen[1:]):
            if zero_out_chosen_path:
                graph.zero(u, v)
            else:
                graph.decrement(u, v, bottleneck)
        remaining -= bottleneck
    return TransmissionPlan(total_data_bits=data_bits, allocations=tuple(allocations))


def single_path_baseline(
    graph: LinkGraph, config: RoutingConfig, data_bits: float
) -> TransmissionPlan:
    """Send the whole job over the single widest path; no residual bookkeeping."""
    if data_bits < 0:
        raise InvalidParameterError(f"data size must be non-negative, got {data_bits}")
    paths = find_all_paths(graph, config.source, config.sink, config.hop_threshold)
    if not paths:
        raise NoRouteError(f"no path from {config.source} to {config.sink}")
    index, bottleneck = select_widest(graph, paths)
    if bottleneck <= 0:
        raise CapacityExhaustedError(data_bits)
    chosen = paths[index]
    capacities = _hop_capacities(graph, chosen)
    allocation = PathAllocation(
        nodes=chosen,
        rate_bps=bottleneck,
        allocated_bits=data_bits,
        capacities_before_bps=capacities,
        hop_times_s=tuple(data_bits / c for c in capacities),
    )
    return TransmissionPlan(total_data_bits=data_bits, allocations=(allocation,))
