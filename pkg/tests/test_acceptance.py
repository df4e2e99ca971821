"""Acceptance gate: nine checks over the whole pipeline.

Each test prints exactly one PASS/FAIL line on the real stdout so the
verdicts survive pytest capture, then asserts.
"""

import math
import random
import sys
import time
from pathlib import Path

import pytest

from uavnetsim.channel import ChannelParams, path_loss_db, capacity, snr
from uavnetsim.cli import EXIT_OK, main
from uavnetsim.deployment import FovSpec, place_fleet
from uavnetsim.energy import derate_capacity, drain, report_percent, BatteryState
from uavnetsim.errors import CapacityExhaustedError, NoRouteError
from uavnetsim.geometry import CoverageGrid, PlanarPolygon, rasterize
from uavnetsim.routing import (
    RoutingConfig,
    find_all_paths,
    schedule,
    single_path_baseline,
)
from uavnetsim.simulator import load_scenario, run_scenario

from helpers import brute_force_paths, graph_from_capacities, random_capacities

BUNDLED_SCENARIO = Path(__file__).resolve().parent.parent / "scenarios" / "table1.scenario"

# Rounded reference figures the bundled scenario mirrors, kept verbatim with
# their known internal inconsistencies (see the tolerance carve-outs below).
# Columns: data rate cells are Mbps, times are seconds, percentages integer.
REFERENCE_ROWS = [
    {
        "path": (4, 8, 15, 23, 24),
        "caps_mbps": (3.5, 3.5, 3.4, 3.5),
        "times_s": (172.0, 172.0, 176.0, 172.0),
        "end_pct": (31, 31, 32, 31),
        "current_mbps": (1.085, 1.085, 1.088, 1.085),
    },
    {
        "path": (12, 18, 25, 24),
        "caps_mbps": (3.4, 3.4, 3.3),
        "times_s": (176.0, 176.0, 180.0),
        "end_pct": (32, 32, 34),
        "current_mbps": (1.088, 1.088, 1.122),
    },
    {
        "path": (29, 30, 31, 24),
        "caps_mbps": (3.5, 3.5, 3.3),
        "times_s": (172.0, 172.0, 180.0),
        "end_pct": (31, 31, 34),
        "current_mbps": (1.085, 1.085, 1.122),
    },
    {
        "path": (40, 33, 24),
        "caps_mbps": (3.4, 3.4),
        "times_s": (176.0, 176.0),
        "end_pct": (32, 32),
        "current_mbps": (1.088, 1.088),
    },
]

# Reference battery cells printed as 34 disagree with the drain law by more
# than any other cell (the law gives 27); they are carved out of criterion 3
# and checked against the law instead.
INCONSISTENT_PCT_CELLS = {(1, 2), (2, 2)}  # (row index, hop index)


def _verdict(number: int, label: str, ok: bool) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"\ncriterion {number}: {status} ({label})", file=sys.__stdout__)


@pytest.fixture(scope="module")
def bundled_reports():
    return run_scenario(load_scenario(BUNDLED_SCENARIO))


class TestCriterion1CapacityDerating:
    def test_derated_capacity_matches_reference_to_3_decimals(self, bundled_reports):
        started = time.perf_counter()
        ok = True
        for row in REFERENCE_ROWS:
            for cap_mbps, pct, current_mbps in zip(
                row["caps_mbps"], row["end_pct"], row["current_mbps"]
            ):
                derated = derate_capacity(cap_mbps, pct / 100.0)
                ok = ok and round(derated, 3) == current_mbps
        for report in bundled_reports:
            for cap, pct, current in zip(
                report.prev_capacity_bps,
                report.remaining_battery_pct,
                report.current_capacity_bps,
            ):
                ok = ok and round(derate_capacity(cap, pct / 100.0), 3) == round(current, 3)
        elapsed = time.perf_counter() - started
        ok = ok and elapsed < 1.0
        _verdict(1, "capacity derating exact to 3 decimals", ok)
        assert ok, f"derating mismatch or too slow ({elapsed:.3f} s)"


class TestCriterion2TransmissionTimes:
    def test_hop_times_within_2s_of_reference(self, bundled_reports):
        ok = True
        worst = 0.0
        for index, (row, report) in enumerate(zip(REFERENCE_ROWS, bundled_reports)):
            ok = ok and report.path == row["path"]
            if index == 2:
                # reference row 3 prints times for a different data size than
                # its own data cell; excluded from the strict check
                continue
            for printed, actual in zip(row["times_s"], report.transmission_time_s):
                gap = abs(actual - printed)
                worst = max(worst, gap)
                ok = ok and gap <= 2.0
        _verdict(2, "per-hop transmission times within 2 s", ok)
        assert ok, f"worst hop-time gap {worst:.3f} s"

    def test_first_row_closed_form(self, bundled_reports):
        assert bundled_reports[0].transmission_time_s[0] == pytest.approx(
            600e6 / 3.5e6, rel=1e-12
        )


class TestCriterion3BatteryDrain:
    def test_remaining_battery_against_reference(self, bundled_reports):
        params = ChannelParams()
        ok = True

        # closed form for the first hop: 171.43 s at 10^-0.4 points/s
        state = drain(BatteryState(), 600e6 / 3.5e6, params)
        ok = ok and abs(state.level * 100.0 - 31.753) < 1e-2
        ok = ok and report_percent(state.level) == 31

        for printed, actual in zip(
            REFERENCE_ROWS[0]["end_pct"], bundled_reports[0].remaining_battery_pct
        ):
            ok = ok and abs(actual - printed) <= 3

        for row_index in (1, 2, 3):
            row = REFERENCE_ROWS[row_index]
            report = bundled_reports[row_index]
            for hop, (printed, actual) in enumerate(
                zip(row["end_pct"], report.remaining_battery_pct)
            ):
                if (row_index, hop) in INCONSISTENT_PCT_CELLS:
                    # carved out: the printed 34 contradicts the drain law;
                    # require our value to follow the law instead
                    ok = ok and actual == 27
                else:
                    ok = ok and abs(actual - printed) <= 5
        _verdict(3, "battery drain within printed tolerances", ok)
        assert ok


class TestCriterion4PathEnumeration:
    def test_enumerator_equals_brute_force_on_200_graphs(self):
        started = time.perf_counter()
        rng = random.Random(2024)
        ok = True
        compared = 0
        while compared < 200:
            capacities, n = random_capacities(rng, max_nodes=8)
            start = rng.randrange(n)
            end = rng.randrange(n)
            if start == end:
                continue
            threshold = rng.randint(2, 6)
            graph = graph_from_capacities(capacities, extra_nodes=tuple(range(n)))
            mine = set(find_all_paths(graph, start, end, threshold))
            reference = brute_force_paths(capacities, start, end, threshold)
            ok = ok and mine == reference
            compared += 1
        elapsed = time.perf_counter() - started
        ok = ok and elapsed < 10.0
        _verdict(4, "path enumeration equals brute force on 200 graphs", ok)
        assert ok, f"enumeration mismatch or too slow ({elapsed:.3f} s)"


class TestCriterion5SchedulerProperties:
    def test_greedy_schedule_properties_on_100_graphs(self):
        started = time.perf_counter()
        rng = random.Random(515)
        ok = True
        instances = 0
        completions = 0
        while instances < 100:
            capacities, n = random_capacities(rng, max_nodes=7)
            source, sink = 0, n - 1
            threshold = min(n, 5)
            candidates = sorted(brute_force_paths(capacities, source, sink, threshold))
            if not candidates:
                instances += 1
                continue
            data = rng.uniform(1.0, 15.0)
            config = RoutingConfig(source=source, sink=sink, hop_threshold=threshold)
            graph = graph_from_capacities(capacities, extra_nodes=tuple(range(n)))
            residuals = dict(capacities)
            exhausted = False
            try:
                plan = schedule(graph, config, data)
            except CapacityExhaustedError:
                exhausted = True
                plan = None

            if plan is not None:
                for allocation in plan.allocations:
                    best = max(
                        min(residuals[(u, v)] for u, v in zip(p, p[1:]))
                        for p in candidates
                    )
                    chosen_bottleneck = min(
                        residuals[(u, v)]
                        for u, v in zip(allocation.nodes, allocation.nodes[1:])
                    )
                    # (a) every round picks an argmax-bottleneck path
                    ok = ok and math.isclose(allocation.rate_bps, best, rel_tol=1e-12)
                    ok = ok and math.isclose(chosen_bottleneck, best, rel_tol=1e-12)
                    for u, v in zip(allocation.nodes, allocation.nodes[1:]):
                        residuals[(u, v)] -= allocation.rate_bps
                # (c) covered jobs actually cover the request
                ok = ok and plan.allocated_bits >= plan.total_data_bits
                completions += 1
            else:
                # (c) the job either completes or raises; the raise path was
                # taken, which satisfies the either-or contract
                ok = ok and exhausted

            # (b) residuals never negative, in the replay and in the graph
            ok = ok and all(value >= -1e-9 for value in residuals.values())
            for u, v in graph.edges():
                ok = ok and graph.residual_bps(u, v) >= 0.0

            # (d) multipath never loses to the single-path baseline
            try:
                multi = schedule(
                    graph_from_capacities(capacities, tuple(range(n))), config, data
                )
                base = single_path_baseline(
                    graph_from_capacities(capacities, tuple(range(n))), config, data
                )
                ok = ok and multi.completion_time_s <= base.completion_time_s + 1e-9
            except (NoRouteError, CapacityExhaustedError):
                pass
            instances += 1
        elapsed = time.perf_counter() - started
        ok = ok and elapsed < 10.0 and completions >= 20
        _verdict(5, "greedy scheduler argmax/residual/coverage/dominance", ok)
        assert ok, f"{completions} completed instances, {elapsed:.3f} s"


class TestCriterion6LinkBudgetNumerics:
    def test_closed_form_checks(self):
        params = ChannelParams()
        ok = True

        d0 = params.reference_distance_m
        friis_reference = 20.0 * math.log10(
            4.0 * math.pi * d0 / params.wavelength_m
        ) - 10.0 * math.log10(params.gain_tx * params.gain_rx)
        ok = ok and abs(path_loss_db(params, d0) - friis_reference) < 1e-9

        ratio = snr(params, 100.0) / snr(params, 200.0)
        ok = ok and abs(ratio - 4.0) / 4.0 < 1e-9

        ok = ok and capacity(params, 1.0) == params.bandwidth_hz
        ok = ok and abs(capacity(params, 3.0) - 2.0 * params.bandwidth_hz) / (
            2.0 * params.bandwidth_hz
        ) < 1e-9

        _verdict(6, "link budget closed-form identities", ok)
        assert ok


class TestCriterion7Coverage:
    FOV = FovSpec(45.0, 50.0)

    def fixtures(self):
        side = self.FOV.footprint_side_m
        masks = [
            ("111110000", "111111110", "011111111", "011111111", "011111000", "111111100"),
            ("1",),
            ("11", "11"),
            ("1111",),
            ("010", "111", "010"),
            ("11", "11", "10"),
            ("100", "100", "111"),
        ]
        rng = random.Random(7)
        while len(masks) < 9:
            width = rng.randint(2, 6)
            rows = tuple(
                "".join(str(rng.randint(0, 1)) for _ in range(width))
                for _ in range(rng.randint(2, 5))
            )
            if any("1" in row for row in rows):
                masks.append(rows)
        grids = [
            CoverageGrid(tuple(tuple(int(ch) for ch in row) for row in rows), side)
            for rows in masks
        ]
        triangle = PlanarPolygon(((0.0, 0.0), (4.0 * side, 0.0), (0.0, 4.0 * side)))
        grids.append(rasterize(triangle, side))
        return grids

    def test_every_active_cell_covered_exactly_once(self):
        ok = True
        grids = self.fixtures()
        assert len(grids) == 10
        tol = 1e-9
        for grid in grids:
            fleet = place_fleet(grid, self.FOV)
            side = self.FOV.footprint_side_m
            for row, col in grid.active_cells():
                cx, cy = grid.cell_center(row, col)
                cell_bounds = (
                    cx - grid.cell_size_m / 2.0,
                    cy - grid.cell_size_m / 2.0,
                    cx + grid.cell_size_m / 2.0,
                    cy + grid.cell_size_m / 2.0,
                )
                covering = 0
                for drone in fleet:
                    fp = (
                        drone.x_m - side / 2.0,
                        drone.y_m - side / 2.0,
                        drone.x_m + side / 2.0,
                        drone.y_m + side / 2.0,
                    )
                    if (
                        fp[0] <= cell_bounds[0] + tol
                        and fp[1] <= cell_bounds[1] + tol
                        and fp[2] >= cell_bounds[2] - tol
                        and fp[3] >= cell_bounds[3] - tol
                    ):
                        covering += 1
                ok = ok and covering == 1
        _verdict(7, "every active cell covered by exactly one footprint", ok)
        assert ok


class TestCriterion8Determinism:
    def test_two_cli_runs_byte_identical(self, tmp_path, capsys):
        first = tmp_path / "first.csv"
        second = tmp_path / "second.csv"
        code_a = main(
            ["simulate", str(BUNDLED_SCENARIO), "--seed", "7", "--out", str(first)]
        )
        code_b = main(
            ["simulate", str(BUNDLED_SCENARIO), "--seed", "7", "--out", str(second)]
        )
        capsys.readouterr()
        ok = (
            code_a == EXIT_OK
            and code_b == EXIT_OK
            and first.read_bytes() == second.read_bytes()
        )
        _verdict(8, "repeated runs produce byte-identical reports", ok)
        assert ok


class TestCriterion9Runtime:
    def test_reference_scenario_under_5_seconds(self):
        config = load_scenario(BUNDLED_SCENARIO)
        started = time.perf_counter()
        reports = run_scenario(config)
        elapsed = time.perf_counter() - started
        ok = elapsed < 5.0 and len(reports) == 4
        _verdict(9, "41-drone scenario completes in under 5 s", ok)
        assert ok, f"took {elapsed:.3f} s"
