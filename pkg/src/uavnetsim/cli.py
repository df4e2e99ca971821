"""Command-line front end for the simulator pipeline.

Commands: deploy (area -> fleet listing), linkbudget (distances -> RF table),
plan (scenario -> multipath allocations), simulate (scenario -> report file),
compare (scenario -> multipath vs single-path record).

Exit codes: 0 success, 1 usage error, 2 scenario or input error,
3 residual capacity exhausted.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import routing, simulator
from .channel import ChannelParams, link_budget
from .deployment import place_fleet, select_anchor
from .errors import CapacityExhaustedError, ScenarioError, UavNetError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SCENARIO = 2
EXIT_CAPACITY = 3


class UsageError(Exception):
    """Bad command line; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); keep 2 for scenario errors
        raise UsageError(message)


def _add_scenario_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--area", help="polygon file (lat,lon per line) overriding the scenario")
    parser.add_argument("--matrix", help="binary matrix file overriding the scenario")
    parser.add_argument("--fov-angle", type=float, help="FOV half-angle, degrees")
    parser.add_argument("--altitude", type=float, help="flight altitude, meters")
    parser.add_argument("--activation", type=float, help="activation fraction in (0, 1]")
    parser.add_argument("--seed", type=int, help="RNG seed override")
    parser.add_argument("--hop-threshold", type=int, help="maximum nodes per path")
    parser.add_argument("--drain-mode", choices=["percent", "joule"], help="battery drain mode")
    parser.add_argument("--fading", choices=["off", "rayleigh"], help="fading mode")
    parser.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override any scenario key, dotted for nesting (e.g. channel.bandwidth_hz=360000)",
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="uavnetsim", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    deploy = commands.add_parser("deploy", help="place the fleet and print the listing")
    deploy.add_argument("--area", help="polygon file, one lat,lon vertex per line")
    deploy.add_argument("--matrix", help="binary matrix file of 0/1 rows")
    deploy.add_argument("--fov-angle", type=float, default=45.0, help="FOV half-angle, degrees")
    deploy.add_argument("--altitude", type=float, default=50.0, help="flight altitude, meters")
    deploy.add_argument("--out", help="write the listing here instead of stdout")

    budget = commands.add_parser("linkbudget", help="print RF figures for given distances")
    budget.add_argument("--distance", type=float, nargs="+", required=True, metavar="METERS")
    budget.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override channel parameters (e.g. channel.frequency_hz=2.4e9)",
    )
    budget.add_argument("--out", help="write the table here instead of stdout")

    for name, help_text in (
        ("plan", "print the multipath allocation per source"),
        ("simulate", "run the scenario and write the transmission report"),
        ("compare", "compare multipath scheduling against the single-path baseline"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("scenario", help="scenario file (JSON)")
        _add_scenario_flags(sub)
        sub.add_argument("--out", help="output file path")
    return parser


def _parse_override(item: str) -> tuple[list[str], object]:
    if "=" not in item:
        raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
    key, raw_value = item.split("=", 1)
    key = key.strip()
    if not key:
        raise UsageError(f"--set expects a non-empty key, got {item!r}")
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    return key.split("."), value


def _apply_overrides(document: dict, args: argparse.Namespace) -> dict:
    flag_map = {
        "area": ("polygon_file",),
        "matrix": ("matrix_file",),
        "fov_angle": ("fov", "half_angle_deg"),
        "altitude": ("fov", "altitude_m"),
        "activation": ("activation_fraction",),
        "seed": ("seed",),
        "hop_threshold": ("hop_threshold",),
        "drain_mode": ("drain_mode",),
        "fading": ("fading",),
    }
    for flag, path in flag_map.items():
        value = getattr(args, flag, None)
        if value is not None:
            _set_nested(document, list(path), value)
    if getattr(args, "area", None) is not None:
        document.pop("matrix_file", None)
    if getattr(args, "matrix", None) is not None:
        document.pop("polygon_file", None)
    for item in getattr(args, "set", []):
        path, value = _parse_override(item)
        _set_nested(document, path, value)
    return document


def _set_nested(document: dict, path: list[str], value) -> None:
    node = document
    for part in path[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise UsageError(f"cannot override through non-object key {part!r}")
    node[path[-1]] = value


def _load_scenario_with_overrides(args: argparse.Namespace) -> simulator.ScenarioConfig:
    path = Path(args.scenario)
    if not path.is_file():
        raise ScenarioError(f"scenario file not found: {path}")
    try:
        document = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if not isinstance(document, dict):
        raise ScenarioError("scenario document must be a JSON object")
    document = _apply_overrides(document, args)
    return simulator.scenario_from_dict(document, base_dir=path.parent)


def _echo_config(config: simulator.ScenarioConfig) -> None:
    resolved = json.dumps(simulator.resolved_config_dict(config), sort_keys=True)
    print(f"resolved-config: {resolved}", file=sys.stderr)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out_path = Path(out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text)


def _cmd_deploy(args: argparse.Namespace) -> int:
    if (args.area is None) == (args.matrix is None):
        raise UsageError("deploy needs exactly one of --area or --matrix")
    document = {
        "fov": {"half_angle_deg": args.fov_angle, "altitude_m": args.altitude},
    }
    if args.area is not None:
        document["polygon_file"] = args.area
    else:
        document["matrix_file"] = args.matrix
    config = simulator.scenario_from_dict(document, base_dir=Path.cwd())
    _echo_config(config)
    grid = simulator.build_grid(config)
    fleet = place_fleet(grid, config.fov)
    anchor_id = select_anchor(fleet)
    lines = ["id,x_m,y_m,altitude_m,anchor"]
    for drone in fleet:
        lines.append(
            f"{drone.id},{drone.x_m:.3f},{drone.y_m:.3f},{drone.altitude_m:.3f},"
            f"{1 if drone.id == anchor_id else 0}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_linkbudget(args: argparse.Namespace) -> int:
    document: dict = {}
    for item in args.set:
        path, value = _parse_override(item)
        _set_nested(document, path, value)
    channel_raw = document.pop("channel", {})
    if document:
        raise UsageError(f"linkbudget only accepts channel.* overrides, got {sorted(document)}")
    try:
        params = ChannelParams(**channel_raw)
    except TypeError as exc:
        raise UsageError(f"unknown channel parameter: {exc}") from exc
    resolved = json.dumps({"channel": dataclasses.asdict(params)}, sort_keys=True)
    print(f"resolved-config: {resolved}", file=sys.stderr)
    lines = ["distance_m,path_loss_db,loss_factor,snr,capacity_bps"]
    for distance in args.distance:
        budget = link_budget(params, distance)
        lines.append(
            f"{budget.distance_m!r},{budget.path_loss_db!r},{budget.loss_factor!r},"
            f"{budget.snr!r},{budget.capacity_bps!r}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_plan(args: argparse.Namespace) -> int:
    config = _load_scenario_with_overrides(args)
    _echo_config(config)
    prepared = simulator.prepare_scenario(config)
    lines = ["source,path,rate_bps,allocated_bits"]
    for source in prepared.sources:
        levels = {d.id: d.battery.level for d in prepared.fleet}
        prepared.graph.refresh_residuals(levels)
        job = routing.RoutingConfig(
            source=source, sink=prepared.anchor_id, hop_threshold=config.hop_threshold
        )
        plan = routing.schedule(prepared.graph, job, config.data_bits)
        for allocation in plan.allocations:
            path_text = "->".join(str(n) for n in allocation.nodes)
            lines.append(
                f"{source},{path_text},{allocation.rate_bps!r},{allocation.allocated_bits!r}"
            )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_scenario_with_overrides(args)
    _echo_config(config)
    reports = simulator.run_scenario(config)
    out = args.out
    if out is None:
        out = f"{Path(args.scenario).stem}_report.csv"
    written = simulator.write_report(reports, out)
    print(f"report written to {written}", file=sys.stderr)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    config = _load_scenario_with_overrides(args)
    _echo_config(config)
    record = simulator.compare_with_baseline(config)
    lines = ["mode,completion_time_s,delivered_fraction,battery_spread_pct"]
    for mode in ("multipath", "baseline"):
        entry = record[mode]
        lines.append(
            f"{mode},{entry['completion_time_s']!r},{entry['delivered_fraction']!r},"
            f"{entry['battery_spread_pct']!r}"
        )
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


_COMMANDS = {
    "deploy": _cmd_deploy,
    "linkbudget": _cmd_linkbudget,
    "plan": _cmd_plan,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityExhaustedError as exc:
        print(f"capacity exhausted: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (UavNetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO


if __name__ == "__main__":
    raise SystemExit(main())
