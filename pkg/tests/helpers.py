"""Shared test utilities: hand-built graphs, oracles, frozen transcripts."""

from __future__ import annotations

import itertools
import random

from uavnetsim.channel import LinkBudget, LinkGraph

# Reference transcript for the bundled scenario, frozen after hand-checking
# every cell against the model formulas.
EXPECTED_BUNDLED_REPORT = (
    "data_bits,path,prev_capacity_bps,transmission_time_s,"
    "initial_battery_pct,remaining_battery_pct,current_capacity_bps\n"
    "600000000,4->8->15->23->24,3500000->3500000->3400000->3500000,"
    "171.43->171.43->176.47->171.43,100->100->100->100,31->31->29->31,"
    "1085000->1085000->986000->1085000\n"
    "600000000,12->18->25->24,3400000->3400000->3300000,"
    "176.47->176.47->181.82,100->100->100,29->29->27,"
    "986000->986000->891000\n"
    "600000000,29->30->31->24,3500000->3500000->3300000,"
    "171.43->171.43->181.82,100->100->100,31->31->27,"
    "1085000->1085000->891000\n"
    "600000000,40->33->24,3400000->3400000,"
    "176.47->176.47,100->100,29->29,"
    "986000->986000\n"
)


def unit_budget(capacity_bps: float) -> LinkBudget:
    """Placeholder budget for graphs built directly from capacities."""
    return LinkBudget(
        distance_m=1.0,
        path_loss_db=0.0,
        loss_factor=1.0,
        snr=1.0,
        capacity_bps=capacity_bps,
    )


def graph_from_capacities(
    capacities: dict[tuple[int, int], float],
    extra_nodes: tuple[int, ...] = (),
) -> LinkGraph:
    """LinkGraph with the given directed edge capacities and full residuals."""
    graph = LinkGraph()
    for node in extra_nodes:
        graph.add_node(node)
    for (u, v), capacity in capacities.items():
        graph.add_edge(u, v, unit_budget(capacity), capacity)
    return graph


def brute_force_paths(
    capacities: dict[tuple[int, int], float],
    start: int,
    end: int,
    max_nodes: int,
) -> set[tuple[int, ...]]:
    """All simple start-end paths with at most max_nodes nodes, by permutations.

    Deliberately naive so it stays an independent check on the DFS enumerator.
    """
    nodes = set()
    for u, v in capacities:
        nodes.add(u)
        nodes.add(v)
    if start == end:
        return {(start,)}
    if start not in nodes or end not in nodes or max_nodes < 2:
        return set()
    middles = [n for n in nodes if n not in (start, end)]
    found = set()
    for length in range(0, max_nodes - 1):
        for middle in itertools.permutations(middles, length):
            path = (start,) + middle + (end,)
            if all((a, b) in capacities for a, b in zip(path, path[1:])):
                found.add(path)
    return found


def random_capacities(
    rng: random.Random,
    max_nodes: int = 8,
    *,
    integer_caps: bool = False,
) -> tuple[dict[tuple[int, int], float], int]:
    """Random directed graph with symmetric edges and positive capacities."""
    n = rng.randint(2, max_nodes)
    p = rng.uniform(0.25, 0.75)
    capacities: dict[tuple[int, int], float] = {}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                forward = float(rng.randint(1, 10)) if integer_caps else rng.uniform(0.5, 10.0)
                backward = float(rng.randint(1, 10)) if integer_caps else rng.uniform(0.5, 10.0)
                capacities[(u, v)] = forward
                capacities[(v, u)] = backward
    return capacities, n
