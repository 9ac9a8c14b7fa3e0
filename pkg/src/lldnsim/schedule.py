"""LLDN superframe layout, group acknowledgement bitmap and XOR frame coding."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from enum import Enum

from lldnsim.energy import FrameLengths, TransceiverParams, frame_airtime

__all__ = [
    "Frame",
    "FrameKind",
    "GackBitmap",
    "InfeasibleScheduleError",
    "Mode",
    "Slot",
    "SlotKind",
    "SuperframeConfig",
    "build_superframe",
    "gack_bit",
    "schedule_to_json",
    "worst_case_latency",
    "xor_decode",
    "xor_encode",
]

COORDINATOR = "coordinator"


class InfeasibleScheduleError(ValueError):
    """A frame does not fit into the slot it is scheduled in."""


class Mode(str, Enum):
    SM = "SM"
    RM = "RM"
    ETM = "ETM"


class SlotKind(str, Enum):
    BEACON = "Beacon"
    UPLINK = "Uplink"
    GACK = "Gack"
    RETRANSMISSION = "Retransmission"


class FrameKind(str, Enum):
    BEACON = "Beacon"
    DATA = "Data"
    GACK = "Gack"
    CODED = "Coded"


@dataclass(frozen=True)
class SuperframeConfig:
    """``n_slots`` counts every slot except the beacon, GACK included."""

    duration: float = 10e-3
    n_slots: int = 17
    r_slots: int = 8
    n_devices: int = 8

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be > 0, got {self.duration!r}")
        if self.n_devices < 1:
            raise ValueError(f"n_devices must be >= 1, got {self.n_devices!r}")
        if not 0 <= self.r_slots <= self.n_devices:
            raise ValueError(f"r_slots must lie in [0, n_devices], got {self.r_slots!r}")
        if self.n_slots != self.n_devices + 1 + self.r_slots:
            raise ValueError(
                f"n_slots must equal n_devices + 1 + r_slots "
                f"({self.n_devices + 1 + self.r_slots}), got {self.n_slots!r}"
            )

    @property
    def slot_length(self) -> float:
        return self.duration / (1 + self.n_slots)


@dataclass(frozen=True)
class Slot:
    index: int
    kind: SlotKind
    owner: str | int
    start: float
    length: float

    @property
    def end(self) -> float:
        return self.start + self.length


def build_superframe(config: SuperframeConfig = SuperframeConfig(),
                     lengths: FrameLengths = FrameLengths(),
                     params: TransceiverParams = TransceiverParams()) -> list[Slot]:
    """Lay out beacon, uplink, GACK and retransmission slots of equal length.

    Start-up is assumed to happen before the slot boundary, so only the
    airtime has to fit. Raises :class:`InfeasibleScheduleError` otherwise.
    """
    total = 1 + config.n_slots
    slot_length = config.slot_length
    needs = {
        SlotKind.BEACON: lengths.beacon,
        SlotKind.UPLINK: lengths.data,
        SlotKind.GACK: lengths.gack,
        # retransmission slots carry either a data frame or an ETM coded frame
        SlotKind.RETRANSMISSION: max(lengths.data, lengths.coded),
    }
    for kind, nbytes in needs.items():
        if kind is SlotKind.RETRANSMISSION and config.r_slots == 0:
            continue
        airtime = frame_airtime(nbytes, params)
        if airtime > slot_length:
            raise InfeasibleScheduleError(
                f"{kind.value} slot of {slot_length * 1e6:.1f} us cannot hold a "
                f"{nbytes}-byte frame ({airtime * 1e6:.1f} us airtime)"
            )

    layout = [(SlotKind.BEACON, COORDINATOR)]
    layout += [(SlotKind.UPLINK, dev) for dev in range(1, config.n_devices + 1)]
    layout.append((SlotKind.GACK, COORDINATOR))
    # retransmission slot i is statically paired with uplink slot i
    layout += [(SlotKind.RETRANSMISSION, dev) for dev in range(1, config.r_slots + 1)]

    starts = [i * config.duration / total for i in range(total)] + [config.duration]
    return [
        Slot(i, kind, owner, starts[i], starts[i + 1] - starts[i])
        for i, (kind, owner) in enumerate(layout)
    ]


def schedule_to_json(slots: list[Slot]) -> str:
    rows = [
        {"index": s.index, "kind": s.kind.value, "owner": s.owner, "start": s.start, "length": s.length}
        for s in slots
    ]
    return json.dumps(rows, indent=2)


@dataclass(frozen=True)
class GackBitmap:
    """One acknowledgement bit per uplink slot; bit ``i - 1`` belongs to the
    device in uplink slot ``i``."""

    bits: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("GACK bitmap needs at least one bit")
        if not 0 <= self.bits < (1 << self.width):
            raise ValueError(f"bits {self.bits:#b} do not fit in width {self.width}")

    @classmethod
    def from_received(cls, received) -> "GackBitmap":
        bits = 0
        for i, ok in enumerate(received):
            if ok:
                bits |= 1 << i
        return cls(bits, len(received))

    def __iter__(self):
        return (bool(self.bits >> i & 1) for i in range(self.width))


def gack_bit(bitmap: GackBitmap, device: int) -> int:
    if not 1 <= device <= bitmap.width:
        raise KeyError(f"device {device!r} owns no uplink slot (1..{bitmap.width})")
    return bitmap.bits >> (device - 1) & 1


@dataclass(frozen=True)
class Frame:
    kind: FrameKind
    payload: bytes
    source: str | int = COORDINATOR
    # (kind, length) of each constituent, only for coded frames
    parts: tuple = field(default=())

    @property
    def length(self) -> int:
        return len(self.payload)


def xor_encode(beacon: Frame, data: Frame, source: str | int = "relay") -> Frame:
    if beacon.kind is not FrameKind.BEACON or data.kind is not FrameKind.DATA:
        raise ValueError(f"expected (Beacon, Data) frames, got ({beacon.kind}, {data.kind})")
    n = max(beacon.length, data.length)
    a = int.from_bytes(beacon.payload.ljust(n, b"\0"), "big")
    b = int.from_bytes(data.payload.ljust(n, b"\0"), "big")
    return Frame(
        FrameKind.CODED,
        (a ^ b).to_bytes(n, "big"),
        source,
        parts=((FrameKind.BEACON, beacon.length, beacon.source), (FrameKind.DATA, data.length, data.source)),
    )


def xor_decode(coded: Frame, known: Frame) -> Frame:
    """Recover the constituent of ``coded`` that is not ``known``."""
    if coded.kind is not FrameKind.CODED:
        raise ValueError(f"expected a Coded frame, got {coded.kind}")
    by_kind = {kind: (length, src) for kind, length, src in coded.parts}
    if known.kind not in by_kind:
        raise ValueError(f"{known.kind} is not a constituent of this coded frame")
    if known.length != by_kind[known.kind][0] or known.length > coded.length:
        raise ValueError(
            f"known {known.kind.value} frame is {known.length} bytes, coded frame expects "
            f"{by_kind[known.kind][0]} of {coded.length}"
        )
    (other,) = [k for k in by_kind if k is not known.kind]
    other_len, other_src = by_kind[other]
    n = coded.length
    x = int.from_bytes(coded.payload, "big") ^ int.from_bytes(known.payload.ljust(n, b"\0"), "big")
    return Frame(other, x.to_bytes(n, "big")[:other_len], other_src)


def worst_case_latency(mode, config: SuperframeConfig = SuperframeConfig()) -> float:
    """Worst-case delay from data generation to arrival at the coordinator.

    ETM forwards through the relay in the retransmission slots, adding half
    a superframe.
    """
    mode = Mode(mode)
    return (1.5 if mode is Mode.ETM else 1.0) * config.duration


def superframes_latency(mode) -> float:
    return 1.5 if Mode(mode) is Mode.ETM else 1.0
