"""Experiment configuration: a flat ``section.key = value`` text format.

Blank lines and ``#`` comments are ignored. Every key is typed; unknown keys
and malformed values raise :class:`ConfigError` naming the key.

Example::

    transceiver.tx_current_ma = 25.8
    superframe.duration_ms = 10
    simulate.modes = SM, RM, ETM
    placement.device_powers_dbm = 0, -3, -6
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from lldnsim.analytic import PAPER_PLACEMENTS
from lldnsim.channel import DEFAULT_KAPPA
from lldnsim.energy import FrameLengths, TransceiverParams
from lldnsim.placement import Geometry, GridSpec
from lldnsim.schedule import Mode, SuperframeConfig

__all__ = ["ConfigError", "ExperimentConfig", "KEYS", "load_config", "parse_config"]


class ConfigError(ValueError):
    pass


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError("expected true/false")


def _floats(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _modes(text):
    return tuple(Mode(v.strip().upper()) for v in text.split(",") if v.strip())


def _pairs(text):
    pairs = []
    for item in text.split(","):
        a, b = item.split("/")
        pairs.append((float(a), float(b)))
    return tuple(pairs)


# key -> (parser, default, description of accepted values)
KEYS = {
    "transceiver.tx_current_ma": (float, 25.8, "positive number"),
    "transceiver.rx_current_ma": (float, 22.3, "positive number"),
    "transceiver.startup_current_ma": (float, 7.4, "positive number"),
    "transceiver.startup_time_us": (float, 192.0, "positive number"),
    "transceiver.supply_voltage_v": (float, 3.0, "positive number"),
    "transceiver.data_rate_kbps": (float, 250.0, "positive number"),
    "transceiver.guard_time_us": (float, 0.0, "non-negative number"),
    "frames.beacon_bytes": (int, 14, "positive integer"),
    "frames.data_bytes": (int, 11, "positive integer"),
    "frames.gack_bytes": (int, 12, "positive integer"),
    "superframe.duration_ms": (float, 10.0, "positive number"),
    "superframe.n_slots": (int, 17, "integer n_devices + 1 + r_slots"),
    "superframe.r_slots": (int, 8, "integer in [0, n_devices]"),
    "superframe.n_devices": (int, 8, "positive integer"),
    "channel.kappa": (float, DEFAULT_KAPPA, "number >= 2"),
    "analyze.per_start": (float, 0.0, "probability"),
    "analyze.per_stop": (float, 1.0, "probability"),
    "analyze.per_samples": (int, 101, "integer >= 2"),
    "analyze.placements": (_pairs, PAPER_PLACEMENTS, "comma-separated alpha/beta pairs, e.g. 0.5/0.5, 0.3/0.9"),
    "simulate.modes": (_modes, tuple(Mode), "comma-separated subset of SM, RM, ETM"),
    "simulate.grid": (_floats, (0.01, 0.1, 0.3, 0.5, 0.9), "comma-separated probabilities"),
    "simulate.superframes": (int, 1_000_000, "positive integer"),
    "simulate.seed": (int, 42, "integer"),
    "simulate.workers": (int, 1, "positive integer"),
    "simulate.sigmas": (float, 4.0, "positive number"),
    "simulate.model_beacon_loss": (_bool, False, "true or false"),
    "placement.device_x_m": (float, 0.0, "number"),
    "placement.device_y_m": (float, 0.0, "number"),
    "placement.coordinator_x_m": (float, 0.0, "number"),
    "placement.coordinator_y_m": (float, 50.0, "number"),
    "placement.device_powers_dbm": (_floats, (0.0, -3.0, -6.0), "comma-separated dBm values"),
    "placement.relay_power_dbm": (float, 0.0, "number"),
    "placement.coordinator_power_dbm": (float, 0.0, "number"),
    "placement.ref_per_d2c": (float, 0.1, "probability in (0, 1)"),
    "placement.ref_power_dbm": (float, 0.0, "number"),
    "placement.min_distance_m": (float, 0.1, "positive number"),
    "placement.x_min_m": (float, -20.0, "number"),
    "placement.x_max_m": (float, 20.0, "number"),
    "placement.y_min_m": (float, -10.0, "number"),
    "placement.y_max_m": (float, 60.0, "number"),
    "placement.resolution_m": (float, 0.5, "positive number"),
    "placement.line_samples": (int, 101, "integer >= 3"),
    "placement.refine": (_bool, True, "true or false"),
    "output.dir": (str, "out", "directory path"),
}


def parse_config(text: str) -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}; accepted keys: {', '.join(KEYS)}")
        parser, _, accepted = KEYS[key]
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key!r} (accepted: {accepted}): {exc}") from None
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        merged = {key: default for key, (_, default, _) in KEYS.items()}
        unknown = set(self.values) - set(KEYS)
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}; accepted keys: {', '.join(KEYS)}")
        merged.update(self.values)
        object.__setattr__(self, "values", merged)
        # build every derived object once so invalid values fail early
        for name in ("params", "lengths", "superframe", "grid"):
            try:
                getattr(self, name)
            except ValueError as exc:
                raise ConfigError(f"invalid {name} settings: {exc}") from None
        try:
            self.geometry()
        except ValueError as exc:
            raise ConfigError(f"invalid placement settings: {exc}") from None

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return ExperimentConfig({**self.values, **overrides})

    @property
    def params(self) -> TransceiverParams:
        v = self.values
        return TransceiverParams(
            tx_current=v["transceiver.tx_current_ma"] * 1e-3,
            rx_current=v["transceiver.rx_current_ma"] * 1e-3,
            startup_current=v["transceiver.startup_current_ma"] * 1e-3,
            startup_time=v["transceiver.startup_time_us"] * 1e-6,
            supply_voltage=v["transceiver.supply_voltage_v"],
            data_rate=v["transceiver.data_rate_kbps"] * 1e3,
            guard_time=v["transceiver.guard_time_us"] * 1e-6,
        )

    @property
    def lengths(self) -> FrameLengths:
        v = self.values
        return FrameLengths(v["frames.beacon_bytes"], v["frames.data_bytes"], v["frames.gack_bytes"])

    @property
    def superframe(self) -> SuperframeConfig:
        v = self.values
        return SuperframeConfig(v["superframe.duration_ms"] * 1e-3, v["superframe.n_slots"],
                                v["superframe.r_slots"], v["superframe.n_devices"])

    @property
    def grid(self) -> GridSpec:
        v = self.values
        return GridSpec(v["placement.x_min_m"], v["placement.x_max_m"], v["placement.y_min_m"],
                        v["placement.y_max_m"], v["placement.resolution_m"])

    def geometry(self, device_power_dbm: float | None = None) -> Geometry:
        v = self.values
        if device_power_dbm is None:
            device_power_dbm = v["placement.device_powers_dbm"][0] if v["placement.device_powers_dbm"] else 0.0
        return Geometry(
            device_pos=(v["placement.device_x_m"], v["placement.device_y_m"]),
            coordinator_pos=(v["placement.coordinator_x_m"], v["placement.coordinator_y_m"]),
            device_tx_power=device_power_dbm,
            relay_tx_power=v["placement.relay_power_dbm"],
            coordinator_tx_power=v["placement.coordinator_power_dbm"],
            ref_per_d2c=v["placement.ref_per_d2c"],
            ref_power_dbm=v["placement.ref_power_dbm"],
            kappa=v["channel.kappa"],
            packet_length=8 * v["frames.data_bytes"],
            gack_length=8 * v["frames.gack_bytes"],
            min_distance=v["placement.min_distance_m"],
        )

    def to_dict(self) -> dict:
        out = {}
        for key, value in self.values.items():
            if isinstance(value, tuple):
                value = [list(x) if isinstance(x, tuple) else (x.value if isinstance(x, Mode) else x) for x in value]
            out[key] = value
        return out


def load_config(path: str | Path | None) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return ExperimentConfig(parse_config(text))
