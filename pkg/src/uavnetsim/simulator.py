"""End-to-end scenario pipeline: area -> fleet -> graph -> transmissions -> report.

A scenario file is a JSON document whose keys mirror ScenarioConfig. Runs are
fully deterministic for a fixed config and seed: stochastic stages draw from
generators seeded with purpose-tagged strings, and report files are written
atomically with byte-stable formatting.
"""

from __future__ import annotations

import json
import os
import random
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import energy, routing
from .channel import ChannelParams, LinkGraph, NeighborRule, build_link_graph
from .deployment import DroneNode, FovSpec, distance_matrix, place_fleet, select_anchor
from .energy import BatteryState
from .errors import NoSourcesError, ScenarioError
from .geometry import CoverageGrid, load_binary_matrix, normalize, parse_polygon_file, rasterize

BATTERY_DRAW_RANGE = (0.80, 1.00)  # starting level window when not pinned

_TOP_LEVEL_KEYS = {
    "polygon_file",
    "matrix_file",
    "fov",
    "channel",
    "battery",
    "activation_fraction",
    "sources",
    "data_bits",
    "hop_threshold",
    "seed",
    "neighbor_rule",
    "drain_mode",
    "fading",
    "pinned_capacities",
    "pinned_default_bps",
}
_FOV_KEYS = {"half_angle_deg", "altitude_m"}
_CHANNEL_KEYS = {
    "transmit_power_w",
    "gain_tx",
    "gain_rx",
    "frequency_hz",
    "path_loss_exponent",
    "uplink_exponent",
    "channel_coefficient",
    "reference_distance_m",
    "noise_power_w",
    "bandwidth_hz",
}
_BATTERY_KEYS = {"voltage_v", "charge_mah", "initial_level", "initial_levels"}
_NEIGHBOR_KEYS = {"kind", "max_distance_m"}

REPORT_HEADER = (
    "data_bits,path,prev_capacity_bps,transmission_time_s,"
    "initial_battery_pct,remaining_battery_pct,current_capacity_bps"
)


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one run needs; the single source of truth for a scenario."""

    polygon_file: str | None = None
    matrix_file: str | None = None
    fov: FovSpec = field(default_factory=lambda: FovSpec(45.0, 50.0))
    channel: ChannelParams = field(default_factory=ChannelParams)
    battery_voltage_v: float = energy.DEFAULT_VOLTAGE_V
    battery_charge_mah: float = energy.DEFAULT_CHARGE_MAH
    battery_initial_level: float | None = None  # scalar pin for the whole fleet
    battery_overrides: dict[int, float] = field(default_factory=dict)
    activation_fraction: float = 0.10
    sources: tuple[int, ...] | None = None  # pinned source set
    data_bits: float = 600_000_000.0  # per-source job size
    hop_threshold: int = 5
    seed: int | None = None
    neighbor_rule: NeighborRule = field(default_factory=NeighborRule)
    drain_mode: str = "percent"
    fading: str = "off"
    pinned_capacities: dict[tuple[int, int], float] | None = None
    pinned_default_bps: float | None = None
    base_dir: Path = field(default_factory=Path.cwd)

    def __post_init__(self):
        if (self.polygon_file is None) == (self.matrix_file is None):
            raise ScenarioError("exactly one of polygon_file or matrix_file is required")
        if not 0.0 < self.activation_fraction <= 1.0:
            raise ScenarioError(
                f"activation fraction must be in (0, 1], got {self.activation_fraction}"
            )
        if self.data_bits < 0:
            raise ScenarioError(f"data_bits must be non-negative, got {self.data_bits}")
        if self.hop_threshold < 2:
            raise ScenarioError(f"hop threshold must be at least 2, got {self.hop_threshold}")
        if self.drain_mode not in energy.DRAIN_MODES:
            raise ScenarioError(f"unknown drain mode {self.drain_mode!r}")
        if self.fading not in ("off", "rayleigh"):
            raise ScenarioError(f"unknown fading mode {self.fading!r}")
        if self.fading == "rayleigh" and self.seed is None:
            raise ScenarioError("rayleigh fading needs a seed")

    def resolve_path(self, name: str) -> Path:
        path = Path(name)
        return path if path.is_absolute() else self.base_dir / path


@dataclass(frozen=True)
class TransmissionReport:
    """One job's row in the output report; mirrors the seven report columns."""

    data_bits: float
    path: tuple[int, ...]
    prev_capacity_bps: tuple[float, ...]
    transmission_time_s: tuple[float, ...]
    initial_battery_pct: tuple[int, ...]
    remaining_battery_pct: tuple[int, ...]
    current_capacity_bps: tuple[float, ...]
    failed: bool = False


def _require_keys(mapping: dict, allowed: set[str], context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioError(f"unknown {context} keys: {sorted(unknown)}")


def _parse_edge_key(key: str) -> tuple[int, int]:
    parts = key.split("->")
    if len(parts) != 2:
        raise ScenarioError(f"edge key must look like 'u->v', got {key!r}")
    try:
        return int(parts[0]), int(parts[1])
    except ValueError as exc:
        raise ScenarioError(f"edge key endpoints must be integers, got {key!r}") from exc


def scenario_from_dict(raw: dict, base_dir: Path | None = None) -> ScenarioConfig:
    """Build a validated ScenarioConfig from a parsed scenario document."""
    if not isinstance(raw, dict):
        raise ScenarioError("scenario document must be a JSON object")
    _require_keys(raw, _TOP_LEVEL_KEYS, "scenario")

    fov_raw = raw.get("fov", {})
    _require_keys(fov_raw, _FOV_KEYS, "fov")
    fov = FovSpec(
        half_angle_deg=float(fov_raw.get("half_angle_deg", 45.0)),
        altitude_m=float(fov_raw.get("altitude_m", 50.0)),
    )

    channel_raw = raw.get("channel", {})
    _require_keys(channel_raw, _CHANNEL_KEYS, "channel")
    seed = raw.get("seed")
    fading = raw.get("fading", "off")
    channel = ChannelParams(
        **{key: value for key, value in channel_raw.items()},
        fading_mode=fading if fading in ("off", "rayleigh") else "off",
        fading_seed=f"{seed}/fading" if fading == "rayleigh" else None,
    )

    battery_raw = raw.get("battery", {})
    _require_keys(battery_raw, _BATTERY_KEYS, "battery")
    overrides_raw = battery_raw.get("initial_levels", {})
    try:
        overrides = {int(drone_id): float(level) for drone_id, level in overrides_raw.items()}
    except (TypeError, ValueError) as exc:
        raise ScenarioError("battery initial_levels must map drone ids to fractions") from exc

    neighbor_raw = raw.get("neighbor_rule", {})
    _require_keys(neighbor_raw, _NEIGHBOR_KEYS, "neighbor_rule")
    neighbor = NeighborRule(
        kind=neighbor_raw.get("kind", "grid"),
        max_distance_m=neighbor_raw.get("max_distance_m"),
    )

    pinned_raw = raw.get("pinned_capacities")
    pinned = None
    if pinned_raw is not None:
        if not isinstance(pinned_raw, dict):
            raise ScenarioError("pinned_capacities must be an object of 'u->v' keys")
        pinned = {_parse_edge_key(key): float(value) for key, value in pinned_raw.items()}

    sources_raw = raw.get("sources")
    sources = None
    if sources_raw is not None:
        try:
            sources = tuple(sorted(int(s) for s in sources_raw))
        except (TypeError, ValueError) as exc:
            raise ScenarioError("sources must be a list of drone ids") from exc

    initial_level = battery_raw.get("initial_level")
    try:
        return ScenarioConfig(
            polygon_file=raw.get("polygon_file"),
            matrix_file=raw.get("matrix_file"),
            fov=fov,
            channel=channel,
            battery_voltage_v=float(battery_raw.get("voltage_v", energy.DEFAULT_VOLTAGE_V)),
            battery_charge_mah=float(battery_raw.get("charge_mah", energy.DEFAULT_CHARGE_MAH)),
            battery_initial_level=None if initial_level is None else float(initial_level),
            battery_overrides=overrides,
            activation_fraction=float(raw.get("activation_fraction", 0.10)),
            sources=sources,
            data_bits=float(raw.get("data_bits", 600_000_000)),
            hop_threshold=int(raw.get("hop_threshold", 5)),
            seed=None if seed is None else int(seed),
            neighbor_rule=neighbor,
            drain_mode=raw.get("drain_mode", "percent"),
            fading=fading,
            pinned_capacities=pinned,
            pinned_default_bps=(
                None if raw.get("pinned_default_bps") is None else float(raw["pinned_default_bps"])
            ),
            base_dir=base_dir if base_dir is not None else Path.cwd(),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"invalid scenario value: {exc}") from exc


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Parse a scenario file; relative data files resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    return scenario_from_dict(raw, base_dir=path.parent)


def resolved_config_dict(config: ScenarioConfig) -> dict:
    """JSON-friendly view of the fully resolved configuration."""
    return {
        "polygon_file": config.polygon_file,
        "matrix_file": config.matrix_file,
        "fov": {
            "half_angle_deg": config.fov.half_angle_deg,
            "altitude_m": config.fov.altitude_m,
            "footprint_side_m": config.fov.footprint_side_m,
        },
        "channel": {
            "transmit_power_w": config.channel.transmit_power_w,
            "gain_tx": config.channel.gain_tx,
            "gain_rx": config.channel.gain_rx,
            "frequency_hz": config.channel.frequency_hz,
            "path_loss_exponent": config.channel.path_loss_exponent,
            "uplink_exponent": config.channel.exponent,
            "channel_coefficient": config.channel.channel_coefficient,
            "reference_distance_m": config.channel.reference_distance_m,
            "noise_power_w": config.channel.noise_power_w,
            "bandwidth_hz": config.channel.bandwidth_hz,
        },
        "battery": {
            "voltage_v": config.battery_voltage_v,
            "charge_mah": config.battery_charge_mah,
            "initial_level": config.battery_initial_level,
            "initial_levels": {str(k): v for k, v in sorted(config.battery_overrides.items())},
        },
        "activation_fraction": config.activation_fraction,
        "sources": None if config.sources is None else list(config.sources),
        "data_bits": config.data_bits,
        "hop_threshold": config.hop_threshold,
        "seed": config.seed,
        "neighbor_rule": {
            "kind": config.neighbor_rule.kind,
            "max_distance_m": config.neighbor_rule.max_distance_m,
        },
        "drain_mode": config.drain_mode,
        "fading": config.fading,
        "pinned_capacities": (
            None
            if config.pinned_capacities is None
            else {f"{u}->{v}": bps for (u, v), bps in sorted(config.pinned_capacities.items())}
        ),
        "pinned_default_bps": config.pinned_default_bps,
    }


def build_grid(config: ScenarioConfig) -> CoverageGrid:
    """Ingest the configured area at FOV resolution."""
    cell = config.fov.footprint_side_m
    if config.matrix_file is not None:
        return load_binary_matrix(config.resolve_path(config.matrix_file), cell)
    polygon = parse_polygon_file(config.resolve_path(config.polygon_file))
    return rasterize(normalize(polygon), cell)


def assign_batteries(config: ScenarioConfig, fleet: list[DroneNode]) -> None:
    """Give every drone its starting battery, pinned or seeded-uniform."""
    unpinned = [
        d.id
        for d in fleet
        if d.id not in config.battery_overrides and config.battery_initial_level is None
    ]
    rng = None
    if unpinned:
        if config.seed is None:
            raise ScenarioError("random initial batteries need a seed")
        rng = random.Random(f"{config.seed}/battery")
    for drone in sorted(fleet, key=lambda d: d.id):
        if drone.id in config.battery_overrides:
            level = config.battery_overrides[drone.id]
        elif config.battery_initial_level is not None:
            level = config.battery_initial_level
        else:
            level = rng.uniform(*BATTERY_DRAW_RANGE)
        drone.battery = BatteryState(
            voltage_v=config.battery_voltage_v,
            charge_mah=config.battery_charge_mah,
            initial_level=level,
            level=level,
        )


def activate_sources(
    fleet: list[DroneNode],
    fraction: float,
    seed: int | None,
    pinned: tuple[int, ...] | None = None,
) -> tuple[int, ...]:
    """Pick the source drones for a run, ascending ids.

    A pinned set wins outright; otherwise round(fraction * (fleet size - 1))
    non-anchor drones (at least one) are drawn without replacement from a
    seeded generator.
    """
    anchor_ids = {d.id for d in fleet if d.is_anchor}
    non_anchor = sorted(d.id for d in fleet if not d.is_anchor)
    if pinned is not None:
        known = {d.id for d in fleet}
        for source in pinned:
            if source not in known:
                raise ScenarioError(f"pinned source {source} is not a fleet drone")
            if source in anchor_ids:
                raise ScenarioError(f"pinned source {source} is the anchor")
        return tuple(sorted(pinned))
    if not non_anchor:
        raise NoSourcesError("fleet has no non-anchor drone to activate")
    if not 0.0 < fraction <= 1.0:
        raise ScenarioError(f"activation fraction must be in (0, 1], got {fraction}")
    if seed is None:
        raise ScenarioError("random source activation needs a seed")
    count = max(1, round(fraction * (len(fleet) - 1)))
    count = min(count, len(non_anchor))
    rng = random.Random(f"{seed}/activation")
    return tuple(sorted(rng.sample(non_anchor, count)))


@dataclass
class _PreparedScenario:
    grid: CoverageGrid
    fleet: list[DroneNode]
    anchor_id: int
    graph: LinkGraph
    sources: tuple[int, ...]


def prepare_scenario(config: ScenarioConfig) -> _PreparedScenario:
    """Run the pipeline up to (but not including) the transmissions."""
    return _prepare(config)


def _prepare(config: ScenarioConfig) -> _PreparedScenario:
    grid = build_grid(config)
    fleet = place_fleet(grid, config.fov)
    anchor_id = select_anchor(fleet)
    assign_batteries(config, fleet)
    distances = distance_matrix(fleet)
    channel = config.channel
    if config.fading == "rayleigh" and channel.fading_mode != "rayleigh":
        channel = replace(channel, fading_mode="rayleigh", fading_seed=f"{config.seed}/fading")
    graph = build_link_graph(
        fleet,
        distances,
        channel,
        config.neighbor_rule,
        pinned_capacities=config.pinned_capacities,
        pinned_default_bps=config.pinned_default_bps,
    )
    sources = activate_sources(fleet, config.activation_fraction, config.seed, config.sources)
    return _PreparedScenario(grid, fleet, anchor_id, graph, sources)


def _failed_report(data_bits: float, source: int) -> TransmissionReport:
    return TransmissionReport(
        data_bits=data_bits,
        path=(source,),
        prev_capacity_bps=(),
        transmission_time_s=(),
        initial_battery_pct=(),
        remaining_battery_pct=(),
        current_capacity_bps=(),
        failed=True,
    )


def run_scenario(config: ScenarioConfig) -> list[TransmissionReport]:
    """Run the full pipeline and return one report per transmission job.

    Jobs run sequentially in ascending source id order. Before each job the
    edge residuals refresh to their battery-derated values; the job rides the
    widest path to the anchor, every sending drone drains by its own hop
    time, and a source with no route is recorded as failed without stopping
    the run.
    """
    prepared = _prepare(config)
    by_id = {d.id: d for d in prepared.fleet}
    reports = []
    for source in prepared.sources:
        paths = routing.find_all_paths(
            prepared.graph, source, prepared.anchor_id, config.hop_threshold
        )
        if not paths:
            reports.append(_failed_report(config.data_bits, source))
            continue
        levels = {d.id: d.battery.level for d in prepared.fleet}
        prepared.graph.refresh_residuals(levels)
        index, bottleneck = routing.select_widest(prepared.graph, paths)
        if bottleneck <= 0:
            reports.append(_failed_report(config.data_bits, source))
            continue
        chosen = paths[index]
        hops = list(zip(chosen, chosen[1:]))
        capacities = tuple(prepared.graph.residual_bps(u, v) for u, v in hops)
        times = tuple(energy.transmission_time(config.data_bits, c) for c in capacities)
        initial_pct = tuple(energy.report_percent(by_id[u].battery.level) for u, _ in hops)
        for (u, _v), hop_time in zip(hops, times):
            drone = by_id[u]
            drone.battery = energy.drain(
                drone.battery, hop_time, config.channel, mode=config.drain_mode
            )
        remaining_pct = tuple(energy.report_percent(by_id[u].battery.level) for u, _ in hops)
        current = tuple(
            capacity * pct / 100.0 for capacity, pct in zip(capacities, remaining_pct)
        )
        reports.append(
            TransmissionReport(
                data_bits=config.data_bits,
                path=chosen,
                prev_capacity_bps=capacities,
                transmission_time_s=times,
                initial_battery_pct=initial_pct,
                remaining_battery_pct=remaining_pct,
                current_capacity_bps=current,
            )
        )
    return reports


def compare_with_baseline(config: ScenarioConfig) -> dict:
    """Run multipath scheduling and the single-path baseline on equal footing.

    Both modes start from identical fleets and graphs; the returned record
    holds completion time, delivered fraction, and the spread between the
    fullest and emptiest battery as a load-balance proxy.
    """
    results = {}
    for mode in ("multipath", "baseline"):
        prepared = _prepare(config)
        by_id = {d.id: d for d in prepared.fleet}
        total_time = 0.0
        delivered = 0.0
        requested = 0.0
        for source in prepared.sources:
            requested += config.data_bits
            job = routing.RoutingConfig(
                source=source, sink=prepared.anchor_id, hop_threshold=config.hop_threshold
            )
            levels = {d.id: d.battery.level for d in prepared.fleet}
            prepared.graph.refresh_residuals(levels)
            if mode == "multipath":
                plan = routing.schedule(prepared.graph, job, config.data_bits)
            else:
                plan = routing.single_path_baseline(prepared.graph, job, config.data_bits)
            total_time += plan.completion_time_s
            delivered += min(config.data_bits, plan.allocated_bits)
            for allocation in plan.allocations:
                for (u, _v), hop_time in zip(
                    zip(allocation.nodes, allocation.nodes[1:]), allocation.hop_times_s
                ):
                    drone = by_id[u]
                    drone.battery = energy.drain(
                        drone.battery, hop_time, config.channel, mode=config.drain_mode
                    )
        fleet_levels = [d.battery.level for d in prepared.fleet]
        results[mode] = {
            "completion_time_s": total_time,
            "delivered_fraction": 1.0 if requested == 0 else delivered / requested,
            "battery_spread_pct": (max(fleet_levels) - min(fleet_levels)) * 100.0,
        }
    return results


def _format_bps(value: float) -> str:
    return str(int(value)) if float(value).is_integer() else repr(float(value))


def _format_time(value: float) -> str:
    return f"{value:.2f}"


def _report_row(report: TransmissionReport) -> str:
    if report.failed:
        return ",".join(
            [str(int(report.data_bits)), "->".join(str(n) for n in report.path), "", "", "", "", ""]
        )
    return ",".join(
        [
            str(int(report.data_bits)),
            "->".join(str(n) for n in report.path),
            "->".join(_format_bps(c) for c in report.prev_capacity_bps),
            "->".join(_format_time(t) for t in report.transmission_time_s),
            "->".join(str(p) for p in report.initial_battery_pct),
            "->".join(str(p) for p in report.remaining_battery_pct),
            "->".join(_format_bps(c) for c in report.current_capacity_bps),
        ]
    )


def render_report(reports: list[TransmissionReport]) -> str:
    lines = [REPORT_HEADER]
    lines.extend(_report_row(report) for report in reports)
    return "\n".join(lines) + "\n"


def write_report(reports: list[TransmissionReport], out_path: str | Path) -> Path:
    """Write the report file atomically (temp file then rename)."""
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    content = render_report(reports)
    fd, temp_name = tempfile.mkstemp(dir=out_path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(content)
        os.replace(temp_name, out_path)
    except BaseException:
        if os.path.exists(temp_name):
            os.unlink(temp_name)
        raise
    return out_path
