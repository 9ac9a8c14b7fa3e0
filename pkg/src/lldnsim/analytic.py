"""Closed-form per-superframe metrics for Standard, Retransmission and
Extended Topology Mode."""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from lldnsim.channel import DEFAULT_KAPPA, ReferenceLink, TargetLink, derive_per
from lldnsim.energy import FrameEnergies, FrameLengths
from lldnsim.schedule import Mode, SuperframeConfig, worst_case_latency

__all__ = [
    "LINK_NAMES",
    "PAPER_PLACEMENTS",
    "PER_CAP",
    "LinkMatrix",
    "ModeMetrics",
    "SWEEP_COLUMNS",
    "etm_metrics",
    "links_for_mode",
    "metrics",
    "rm_metrics",
    "sm_metrics",
    "sweep",
]

LINK_NAMES = ("per_d2c", "per_c2d", "per_d2r", "per_r2d", "per_c2r", "per_r2c")

# (alpha, beta) relay placements compared in the energy and loss sweeps
PAPER_PLACEMENTS = ((0.5, 0.5), (0.3, 0.9), (0.8, 0.4))

# a PER of exactly 1 has no finite SNR; sweeps derive links from this instead
PER_CAP = 1.0 - 1e-12

_REQUIRED = {
    Mode.SM: ("per_d2c", "per_c2d"),
    Mode.RM: ("per_d2c", "per_d2r", "per_c2r", "per_r2c"),
    Mode.ETM: ("per_d2r", "per_r2c"),
}


@dataclass(frozen=True)
class LinkMatrix:
    """Directed packet error rates between device (D), relay (R) and
    coordinator (C). Links a mode does not use may be left as ``None``."""

    per_d2c: float | None = None
    per_c2d: float | None = None
    per_d2r: float | None = None
    per_r2d: float | None = None
    per_c2r: float | None = None
    per_r2c: float | None = None

    def __post_init__(self):
        for f in fields(self):
            p = getattr(self, f.name)
            if p is not None and not 0.0 <= p <= 1.0:
                raise ValueError(f"{f.name} must lie in [0, 1], got {p!r}")

    @classmethod
    def symmetric(cls, per: float) -> "LinkMatrix":
        """Every directed link at the same error rate."""
        return cls(*(per,) * len(LINK_NAMES))

    def require(self, mode) -> None:
        missing = [name for name in _REQUIRED[Mode(mode)] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{Mode(mode).value} needs links {', '.join(missing)}")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in LINK_NAMES}


@dataclass(frozen=True)
class ModeMetrics:
    mode: Mode
    retr_prob: float
    device_energy: float
    relay_energy: float | None
    plr: float
    worst_latency: float


def _energies(energies):
    return FrameEnergies.from_params() if energies is None else energies


def sm_metrics(links: LinkMatrix, energies: FrameEnergies | None = None,
               config: SuperframeConfig = SuperframeConfig()) -> ModeMetrics:
    """The device retransmits if its frame was lost or it missed the GACK."""
    links.require(Mode.SM)
    e = _energies(energies)
    d2c, c2d = links.per_d2c, links.per_c2d
    retr = c2d + d2c - c2d * d2c
    return ModeMetrics(
        Mode.SM,
        retr_prob=retr,
        device_energy=(1.0 + retr) * e.tx_data + e.rx_beacon + e.rx_gack,
        relay_energy=None,
        plr=d2c * d2c,
        worst_latency=worst_case_latency(Mode.SM, config),
    )


def rm_metrics(links: LinkMatrix, energies: FrameEnergies | None = None,
               config: SuperframeConfig = SuperframeConfig()) -> ModeMetrics:
    """The relay overhears the frame and the GACK and retransmits on the
    device's behalf. The device never listens for the GACK."""
    links.require(Mode.RM)
    e = _energies(energies)
    d2c, d2r, c2r, r2c = links.per_d2c, links.per_d2r, links.per_c2r, links.per_r2c
    retr = (1.0 - d2r) * (d2c + c2r - d2c * c2r)
    return ModeMetrics(
        Mode.RM,
        retr_prob=retr,
        device_energy=e.rx_beacon + e.tx_data,
        relay_energy=e.rx_data + e.rx_gack + retr * e.tx_data,
        plr=d2c - d2c * (1.0 - d2r) * (1.0 - r2c),
        worst_latency=worst_case_latency(Mode.RM, config),
    )


def etm_metrics(links: LinkMatrix, energies: FrameEnergies | None = None,
                config: SuperframeConfig = SuperframeConfig()) -> ModeMetrics:
    """Two-hop device behind a relay that sends data and beacon as one
    XOR-coded frame in the retransmission slot, every superframe."""
    links.require(Mode.ETM)
    e = _energies(energies)
    d2r, r2c = links.per_d2r, links.per_r2c
    return ModeMetrics(
        Mode.ETM,
        retr_prob=1.0,
        device_energy=e.tx_data + e.rx_coded,
        relay_energy=e.rx_beacon + e.rx_data + e.tx_data,
        plr=d2r + r2c - d2r * r2c,
        worst_latency=worst_case_latency(Mode.ETM, config),
    )


_BY_MODE = {Mode.SM: sm_metrics, Mode.RM: rm_metrics, Mode.ETM: etm_metrics}


def metrics(mode, links: LinkMatrix, energies: FrameEnergies | None = None,
            config: SuperframeConfig = SuperframeConfig()) -> ModeMetrics:
    return _BY_MODE[Mode(mode)](links, energies, config)


def _scaled(per, fraction, length_bits, ref_length_bits, kappa):
    """PER of a link at ``fraction`` of the reference distance."""
    if per == 0.0:
        return 0.0
    ref = ReferenceLink(min(per, PER_CAP), ref_length_bits, 1.0)
    return derive_per(ref, TargetLink(length_bits, fraction), kappa)


def links_for_mode(mode, per: float, alpha: float = 0.5, beta: float = 0.5,
                   kappa: float = DEFAULT_KAPPA, lengths: FrameLengths = FrameLengths()) -> LinkMatrix:
    """Link set behind one point of a PER sweep.

    For SM and RM, ``per`` is the device-coordinator error rate and the relay
    links are derived at distances ``alpha`` and ``beta`` times the
    device-coordinator distance, all nodes at equal power. For ETM, ``per``
    is the error rate of both hops.
    """
    mode = Mode(mode)
    if not 0.0 <= per <= 1.0:
        raise ValueError(f"per must lie in [0, 1], got {per!r}")
    if mode is Mode.SM:
        return LinkMatrix(per_d2c=per, per_c2d=per)
    if mode is Mode.ETM:
        return LinkMatrix.symmetric(per)
    data_bits, gack_bits = 8 * lengths.data, 8 * lengths.gack
    return LinkMatrix(
        per_d2c=per,
        per_c2d=per,
        per_d2r=_scaled(per, alpha, data_bits, data_bits, kappa),
        per_r2d=_scaled(per, alpha, data_bits, data_bits, kappa),
        per_c2r=_scaled(per, beta, gack_bits, data_bits, kappa),
        per_r2c=_scaled(per, beta, data_bits, data_bits, kappa),
    )


SWEEP_COLUMNS = (
    "per", "mode", "alpha", "beta",
    *LINK_NAMES,
    "retr_prob", "device_energy", "relay_energy", "plr",
)


def sweep(per_grid, alpha: float = 0.5, beta: float = 0.5, modes=tuple(Mode),
          kappa: float = DEFAULT_KAPPA, energies: FrameEnergies | None = None,
          lengths: FrameLengths = FrameLengths(),
          config: SuperframeConfig = SuperframeConfig()) -> list[dict]:
    """Closed-form metrics over a PER grid, one row per (per, mode), keyed by
    :data:`SWEEP_COLUMNS`."""
    rows = []
    for per in np.asarray(per_grid, dtype=float):
        for mode in modes:
            mode = Mode(mode)
            links = links_for_mode(mode, float(per), alpha, beta, kappa, lengths)
            m = metrics(mode, links, energies, config)
            rows.append({
                "per": float(per), "mode": mode.value, "alpha": alpha, "beta": beta,
                **links.as_dict(),
                "retr_prob": m.retr_prob, "device_energy": m.device_energy,
                "relay_energy": m.relay_energy, "plr": m.plr,
            })
    return rows
