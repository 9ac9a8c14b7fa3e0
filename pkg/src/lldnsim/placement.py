"""Placement of the RM relay: loss-rate fields over relay positions, sweeps
along the device-coordinator segment, and optimum search."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize_scalar

from lldnsim.channel import DEFAULT_KAPPA, ReferenceLink, dbm_to_ratio, derive_per_grid

__all__ = [
    "Geometry",
    "GridSpec",
    "PlrField",
    "find_optimum",
    "grid_sweep",
    "line_sweep",
    "link_pers",
    "plr_at",
]


@dataclass(frozen=True)
class Geometry:
    """Device, coordinator and powers for a relay placement study.

    ``ref_per_d2c`` is the device-coordinator PER measured at
    ``ref_power_dbm``; other device powers re-derive it.
    """

    device_pos: tuple[float, float] = (0.0, 0.0)
    coordinator_pos: tuple[float, float] = (0.0, 50.0)
    device_tx_power: float = 0.0
    relay_tx_power: float = 0.0
    coordinator_tx_power: float = 0.0
    ref_per_d2c: float = 0.1
    ref_power_dbm: float = 0.0
    kappa: float = DEFAULT_KAPPA
    packet_length: int = 88
    gack_length: int = 96
    # distances below this are evaluated at this distance
    min_distance: float = 0.1

    def __post_init__(self):
        if np.allclose(self.device_pos, self.coordinator_pos):
            raise ValueError("device and coordinator positions must differ")
        if not 0.0 < self.ref_per_d2c < 1.0:
            raise ValueError(f"ref_per_d2c must lie in (0, 1), got {self.ref_per_d2c!r}")
        if self.kappa < 2:
            raise ValueError(f"kappa must be >= 2, got {self.kappa!r}")
        if self.min_distance <= 0:
            raise ValueError("min_distance must be > 0")

    @property
    def d2c_distance(self) -> float:
        return float(np.hypot(*np.subtract(self.coordinator_pos, self.device_pos)))

    @property
    def reference(self) -> ReferenceLink:
        return ReferenceLink(self.ref_per_d2c, self.packet_length, self.d2c_distance,
                             float(dbm_to_ratio(self.ref_power_dbm)))

    def replace(self, **changes) -> "Geometry":
        return replace(self, **changes)


def _per(geometry, distance, power_dbm, length=None):
    d = np.maximum(np.asarray(distance, dtype=float), geometry.min_distance)
    return derive_per_grid(geometry.reference, d, dbm_to_ratio(power_dbm),
                           packet_length=length, kappa=geometry.kappa)


def link_pers(geometry: Geometry, relay_x, relay_y) -> dict:
    """All RM link error rates for relays at the given coordinates."""
    rx = np.asarray(relay_x, dtype=float)
    ry = np.asarray(relay_y, dtype=float)
    dx, dy = geometry.device_pos
    cx, cy = geometry.coordinator_pos
    d_d2r = np.hypot(rx - dx, ry - dy)
    d_r2c = np.hypot(cx - rx, cy - ry)
    return {
        "per_d2c": float(_per(geometry, geometry.d2c_distance, geometry.device_tx_power)),
        "per_d2r": _per(geometry, d_d2r, geometry.device_tx_power),
        "per_r2c": _per(geometry, d_r2c, geometry.relay_tx_power),
        "per_c2r": _per(geometry, d_r2c, geometry.coordinator_tx_power, geometry.gack_length),
    }


def _plr(geometry, rx, ry):
    links = link_pers(geometry, rx, ry)
    p = links["per_d2c"]
    return p - p * (1.0 - links["per_d2r"]) * (1.0 - links["per_r2c"])


def plr_at(geometry: Geometry, relay_pos) -> float:
    """RM packet loss rate with the relay at ``relay_pos``."""
    x, y = relay_pos
    return float(_plr(geometry, x, y))


@dataclass(frozen=True)
class GridSpec:
    x_min: float = -20.0
    x_max: float = 20.0
    y_min: float = -10.0
    y_max: float = 60.0
    resolution: float = 0.5

    def axes(self):
        if self.resolution <= 0:
            raise ValueError("grid resolution must be > 0")
        if self.x_max < self.x_min or self.y_max < self.y_min:
            raise ValueError("empty grid: max below min")
        nx = int(round((self.x_max - self.x_min) / self.resolution)) + 1
        ny = int(round((self.y_max - self.y_min) / self.resolution)) + 1
        xs = self.x_min + self.resolution * np.arange(nx)
        ys = self.y_min + self.resolution * np.arange(ny)
        return xs, ys


@dataclass(frozen=True)
class PlrField:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # shape (len(ys), len(xs))

    @property
    def argmin_cell(self) -> tuple[int, int]:
        """(row, column) of the smallest loss rate; first one on ties."""
        return np.unravel_index(int(np.argmin(self.values)), self.values.shape)

    @property
    def argmin(self) -> tuple[float, float]:
        iy, ix = self.argmin_cell
        return float(self.xs[ix]), float(self.ys[iy])

    @property
    def min(self) -> float:
        return float(self.values.min())

    def rows(self):
        for iy, y in enumerate(self.ys):
            for ix, x in enumerate(self.xs):
                yield float(x), float(y), float(self.values[iy, ix])


def grid_sweep(geometry: Geometry, grid: GridSpec = GridSpec()) -> PlrField:
    xs, ys = grid.axes()
    if xs.size == 0 or ys.size == 0:
        raise ValueError("empty grid")
    gx, gy = np.meshgrid(xs, ys)
    return PlrField(xs, ys, _plr(geometry, gx, gy))


def line_sweep(geometry: Geometry, samples: int = 101):
    """Loss rate at ``samples`` equally spaced relay positions from the
    device (fraction 0) to the coordinator (fraction 1)."""
    if samples < 3:
        raise ValueError(f"samples must be >= 3, got {samples!r}")
    frac = np.linspace(0.0, 1.0, samples)
    dx, dy = geometry.device_pos
    cx, cy = geometry.coordinator_pos
    return frac, _plr(geometry, dx + frac * (cx - dx), dy + frac * (cy - dy))


def find_optimum(geometry: Geometry, grid: GridSpec = GridSpec(), refine: bool = True,
                 xtol: float = 0.01) -> tuple[float, float]:
    """Grid argmin, optionally refined by alternating bounded 1-D searches
    within one grid step of the current point on each axis."""
    x, y = grid_sweep(geometry, grid).argmin
    if not refine:
        return x, y
    step = grid.resolution
    for _ in range(20):
        x_old, y_old = x, y
        x = minimize_scalar(lambda t: plr_at(geometry, (t, y)), bounds=(x - step, x + step),
                            method="bounded", options={"xatol": xtol / 4}).x
        y = minimize_scalar(lambda t: plr_at(geometry, (x, t)), bounds=(y - step, y + step),
                            method="bounded", options={"xatol": xtol / 4}).x
        if abs(x - x_old) < xtol and abs(y - y_old) < xtol:
            break
    return float(x), float(y)
