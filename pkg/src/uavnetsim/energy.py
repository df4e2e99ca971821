"""Battery tracking, capacity derating, and per-transmission drain."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from .errors import DeadLinkError, InvalidParameterError, InvalidStateError

if TYPE_CHECKING:
    from .channel import ChannelParams

DEFAULT_VOLTAGE_V = 11.1  # V
DEFAULT_CHARGE_MAH = 2200.0  # mAh
JOULES_PER_VOLT_MAH = 3.6  # V * mAh -> J conversion factor

# Drain modes: "percent" treats the transmit power figure as percentage points
# per second, which is the only reading consistent with the reference
# transmission log; "joule" spends actual transmit energy against pack energy.
DRAIN_MODES = ("percent", "joule")

_PCT_EPS = 1e-9  # absorbs float noise right at an integer percent boundary


@dataclass(frozen=True)
class BatteryState:
    """Charge state of one drone's battery.

    ``level`` is the current fraction of a full pack, ``initial_level`` the
    fraction the drone started the run with (drawn in [0.80, 1.00] unless a
    scenario pins it).
    """

    voltage_v: float = DEFAULT_VOLTAGE_V
    charge_mah: float = DEFAULT_CHARGE_MAH
    initial_level: float = 1.0
    level: float = 1.0

    def __post_init__(self):
        if self.voltage_v <= 0 or self.charge_mah <= 0:
            raise InvalidStateError("battery voltage and charge must be positive")
        if not 0.0 < self.initial_level <= 1.0:
            raise InvalidStateError(f"initial level {self.initial_level} outside (0, 1]")
        if not 0.0 <= self.level <= 1.0:
            raise InvalidStateError(f"battery level {self.level} outside [0, 1]")

    @property
    def battery_max_joules(self) -> float:
        """Usable pack energy in joules, scaled by the starting fraction."""
        return self.voltage_v * self.charge_mah * JOULES_PER_VOLT_MAH * self.initial_level


def derate_capacity(c_max_bps: float, level: float) -> float:
    """Scale a link capacity by the transmitting drone's battery fraction."""
    if c_max_bps < 0:
        raise InvalidParameterError(f"capacity must be non-negative, got {c_max_bps}")
    if not 0.0 <= level <= 1.0:
        raise InvalidStateError(f"battery level {level} outside [0, 1]")
    return c_max_bps * level


def transmission_time(data_bits: float, capacity_bps: float) -> float:
    """Seconds needed to push ``data_bits`` through a link at ``capacity_bps``."""
    if data_bits < 0:
        raise InvalidParameterError(f"data size must be non-negative, got {data_bits}")
    if capacity_bps < 0:
        raise InvalidParameterError(f"capacity must be non-negative, got {capacity_bps}")
    if capacity_bps == 0:
        if data_bits > 0:
            raise DeadLinkError("cannot transmit over a zero-capacity link")
        return 0.0
    return data_bits / capacity_bps


def drain(
    state: BatteryState,
    duration_s: float,
    params: "ChannelParams",
    mode: str = "percent",
) -> BatteryState:
    """Battery state after transmitting for ``duration_s`` seconds.

    Percent mode subtracts transmit_power * duration percentage points;
    joule mode subtracts transmit_power * duration joules out of the pack.
    The level clamps at zero and never goes back up.
    """
    if duration_s < 0:
        raise InvalidParameterError(f"duration must be non-negative, got {duration_s}")
    if mode not in DRAIN_MODES:
        raise InvalidParameterError(f"unknown drain mode {mode!r}")
    scale = 100.0 if mode == "percent" else state.battery_max_joules
    drop = params.transmit_power_w * duration_s / scale
    return replace(state, level=max(0.0, state.level - drop))


def report_percent(level: float) -> int:
    """Integer display percentage for a battery fraction, floored."""
    if not 0.0 <= level <= 1.0:
        raise InvalidStateError(f"battery level {level} outside [0, 1]")
    return int(math.floor(level * 100.0 + _PCT_EPS))
