"""Per-activity transceiver energy.

Defaults are the CC2520 figures at 3 V / 0 dBm: 25.8 mA TX, 22.3 mA RX,
7.4 mA for 192 us of start-up, 250 kbps.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from enum import Enum

__all__ = [
    "Activity",
    "FrameEnergies",
    "FrameLengths",
    "TransceiverParams",
    "activity_energy",
    "frame_airtime",
]


class Activity(str, Enum):
    TX = "TX"
    RX = "RX"


@dataclass(frozen=True)
class TransceiverParams:
    tx_current: float = 25.8e-3
    rx_current: float = 22.3e-3
    startup_current: float = 7.4e-3
    startup_time: float = 192e-6
    supply_voltage: float = 3.0
    data_rate: float = 250e3
    # additional RX listening beyond the frame airtime
    guard_time: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if f.name == "guard_time":
                if value < 0:
                    raise ValueError(f"guard_time must be >= 0, got {value!r}")
            elif not value > 0:
                raise ValueError(f"{f.name} must be > 0, got {value!r}")


@dataclass(frozen=True)
class FrameLengths:
    """Frame lengths in bytes. The XOR-coded frame is as long as the longer
    of beacon and data, since the shorter one is zero-padded."""

    beacon: int = 14
    data: int = 11
    gack: int = 12

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if int(value) != value or value < 1:
                raise ValueError(f"{f.name} length must be a positive integer, got {value!r}")

    @property
    def coded(self) -> int:
        return max(self.beacon, self.data)


def frame_airtime(length: int, params: TransceiverParams = TransceiverParams()) -> float:
    if length < 1:
        raise ValueError(f"frame length must be >= 1 byte, got {length!r}")
    return 8.0 * length / params.data_rate


def activity_energy(kind, length: int, params: TransceiverParams = TransceiverParams()) -> float:
    """Energy in joules of one transmission or reception of ``length`` bytes,
    including one start-up phase."""
    kind = Activity(kind)
    airtime = frame_airtime(length, params)
    if kind is Activity.TX:
        active = params.tx_current * airtime
    else:
        active = params.rx_current * (airtime + params.guard_time)
    return params.supply_voltage * (active + params.startup_current * params.startup_time)


@dataclass(frozen=True)
class FrameEnergies:
    """The per-activity energies the mode equations are written in."""

    tx_data: float
    rx_data: float
    rx_beacon: float
    rx_gack: float
    rx_coded: float

    @classmethod
    def from_params(cls, params: TransceiverParams = TransceiverParams(),
                    lengths: FrameLengths = FrameLengths()) -> "FrameEnergies":
        return cls(
            tx_data=activity_energy(Activity.TX, lengths.data, params),
            rx_data=activity_energy(Activity.RX, lengths.data, params),
            rx_beacon=activity_energy(Activity.RX, lengths.beacon, params),
            rx_gack=activity_energy(Activity.RX, lengths.gack, params),
            rx_coded=activity_energy(Activity.RX, lengths.coded, params),
        )
