"""Seeded Monte Carlo simulation of LLDN superframes.

Each superframe draws independent Bernoulli failures per directed link and
per transmission, and counts the transceiver activities of device and
relay. Superframes are simulated in fixed-size blocks; block ``b`` owns the
random substream keyed by ``(seed, b)``, so results depend only on
``(scenario, n, seed)`` and never on how blocks are spread over workers.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from lldnsim.analytic import LinkMatrix, ModeMetrics
from lldnsim.energy import FrameEnergies, FrameLengths, TransceiverParams
from lldnsim.schedule import GackBitmap, Mode, SuperframeConfig, superframes_latency

__all__ = [
    "BLOCK_SIZE",
    "COMPARISON_COLUMNS",
    "Outcome",
    "Scenario",
    "SimResult",
    "compare",
    "draw_gack",
    "run",
    "step",
    "step_etm",
    "step_rm",
    "step_sm",
]

BLOCK_SIZE = 1 << 16

# activity counters kept per superframe, as (node, activity) -> energy key
ACTIVITIES = {
    "device_tx_data": "tx_data",
    "device_rx_beacon": "rx_beacon",
    "device_rx_gack": "rx_gack",
    "device_rx_coded": "rx_coded",
    "relay_rx_beacon": "rx_beacon",
    "relay_rx_data": "rx_data",
    "relay_rx_gack": "rx_gack",
    # the ETM relay's coded transmission is charged as a data transmission,
    # as in the closed-form relay energy
    "relay_tx_data": "tx_data",
}


@dataclass(frozen=True)
class Scenario:
    mode: Mode
    links: LinkMatrix
    config: SuperframeConfig = SuperframeConfig()
    lengths: FrameLengths = FrameLengths()
    params: TransceiverParams = TransceiverParams()
    # draw beacon reception too; breaks agreement with the closed forms
    model_beacon_loss: bool = False

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        self.links.require(self.mode)
        if self.model_beacon_loss:
            extra = {Mode.SM: ("per_c2d",), Mode.RM: ("per_c2d",), Mode.ETM: ("per_c2r", "per_r2d")}
            missing = [k for k in extra[self.mode] if getattr(self.links, k) is None]
            if missing:
                raise ValueError(f"beacon-loss modelling needs links {', '.join(missing)}")

    @property
    def energies(self) -> FrameEnergies:
        return FrameEnergies.from_params(self.params, self.lengths)


@dataclass
class Outcome:
    """Per-superframe results for a batch of superframes.

    ``retransmitted`` marks a retransmission-slot transmission (by the device
    in SM, by the relay in RM and ETM); ``counts`` maps activity names to
    per-superframe counts.
    """

    retransmitted: np.ndarray
    lost: np.ndarray
    counts: dict[str, np.ndarray]

    @property
    def size(self) -> int:
        return len(self.lost)


def _fail(rng, per, size):
    return rng.random(size) < per


def _beacon_ok(links, rng, size, model_beacon_loss, name="per_c2d"):
    if not model_beacon_loss:
        return np.ones(size, dtype=bool)
    return ~_fail(rng, getattr(links, name), size)


def step_sm(links: LinkMatrix, rng: np.random.Generator, size: int = 1,
            model_beacon_loss: bool = False) -> Outcome:
    """Device retransmits when its frame failed or when it missed the GACK,
    including the needless retransmission after a lost GACK."""
    synced = _beacon_ok(links, rng, size, model_beacon_loss)
    first_fail = _fail(rng, links.per_d2c, size)
    gack_lost = _fail(rng, links.per_c2d, size)
    second_fail = _fail(rng, links.per_d2c, size)
    retr = synced & (first_fail | gack_lost)
    lost = ~synced | (first_fail & second_fail)
    ones = np.ones(size, dtype=np.int64)
    return Outcome(retr, lost, {
        "device_tx_data": synced.astype(np.int64) + retr,
        "device_rx_beacon": ones,
        "device_rx_gack": synced.astype(np.int64),
    })


def step_rm(links: LinkMatrix, rng: np.random.Generator, size: int = 1,
            model_beacon_loss: bool = False) -> Outcome:
    """The relay retransmits when it holds the frame and the GACK either
    reported a failure or was not heard."""
    synced = _beacon_ok(links, rng, size, model_beacon_loss)
    d2c_fail = ~synced | _fail(rng, links.per_d2c, size)
    relay_has = synced & ~_fail(rng, links.per_d2r, size)
    gack_lost = _fail(rng, links.per_c2r, size)
    relay_tx = relay_has & (d2c_fail | gack_lost)
    delivered_by_relay = relay_tx & ~_fail(rng, links.per_r2c, size)
    # a relay that missed the frame leaves the retransmission slot silent
    lost = d2c_fail & ~delivered_by_relay
    ones = np.ones(size, dtype=np.int64)
    return Outcome(relay_tx, lost, {
        "device_tx_data": synced.astype(np.int64),
        "device_rx_beacon": ones,
        "relay_rx_data": ones,
        "relay_rx_gack": ones,
        "relay_tx_data": relay_tx.astype(np.int64),
    })


def step_etm(links: LinkMatrix, rng: np.random.Generator, size: int = 1,
             model_beacon_loss: bool = False) -> Outcome:
    """The relay always sends the coded beacon+data frame; the coordinator
    decodes the data when the relay held it and the coded frame arrives."""
    if model_beacon_loss:
        # the device synchronises on the beacon forwarded in the previous
        # superframe; draws are independent across superframes
        synced = ~(_fail(rng, links.per_c2r, size) | _fail(rng, links.per_r2d, size))
    else:
        synced = np.ones(size, dtype=bool)
    relay_has = synced & ~_fail(rng, links.per_d2r, size)
    delivered = relay_has & ~_fail(rng, links.per_r2c, size)
    ones = np.ones(size, dtype=np.int64)
    return Outcome(np.ones(size, dtype=bool), ~delivered, {
        "device_tx_data": synced.astype(np.int64),
        "device_rx_coded": ones,
        "relay_rx_beacon": ones,
        "relay_rx_data": ones,
        "relay_tx_data": ones,
    })


_STEPS = {Mode.SM: step_sm, Mode.RM: step_rm, Mode.ETM: step_etm}


def step(scenario: Scenario, rng: np.random.Generator, size: int = 1) -> Outcome:
    return _STEPS[scenario.mode](scenario.links, rng, size, scenario.model_beacon_loss)


def draw_gack(received_per: float, n_devices: int, rng: np.random.Generator) -> GackBitmap:
    """GACK bitmap of one superframe where each device's uplink frame fails
    independently with ``received_per``."""
    return GackBitmap.from_received(~_fail(rng, received_per, n_devices))


def _device_energy(counts, e: FrameEnergies):
    return sum(counts[k] * getattr(e, ACTIVITIES[k]) for k in counts if k.startswith("device_"))


def _relay_energy(counts, e: FrameEnergies):
    return sum(counts[k] * getattr(e, ACTIVITIES[k]) for k in counts if k.startswith("relay_"))


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))


def _run_block(scenario: Scenario, seed: int, block: int, size: int) -> dict:
    out = step(scenario, _block_rng(seed, block), size)
    keys = sorted(out.counts)
    stacked = np.stack([out.counts[k] for k in keys], axis=1)
    return {
        "retr": int(out.retransmitted.sum()),
        "lost": int(out.lost.sum()),
        "counts": {k: int(v) for k, v in zip(keys, stacked.sum(axis=0))},
        # exact integer second moments of the activity counts
        "moments": {(a, b): int(v) for a, row in zip(keys, stacked.T @ stacked)
                    for b, v in zip(keys, row)},
    }


def _energy_se(counts, moments, weights, n):
    """Standard error of the mean of a linear combination of counts."""
    keys = [k for k in counts if weights.get(k)]
    var = 0.0
    for a in keys:
        for b in keys:
            cov = moments[(a, b)] / n - (counts[a] / n) * (counts[b] / n)
            var += weights[a] * weights[b] * cov
    return math.sqrt(max(var, 0.0) / n)


@dataclass
class SimResult:
    mode: Mode
    n_superframes: int
    seed: int
    empirical_retr_prob: float
    empirical_plr: float
    mean_device_energy: float
    mean_relay_energy: float | None
    latency_histogram: dict[str, int]
    std_errors: dict[str, float]
    activity_counts: dict[str, int] = field(default_factory=dict)
    links: dict = field(default_factory=dict)
    superframe_duration: float = 10e-3

    @property
    def worst_latency(self) -> float:
        """Largest observed delivery latency in seconds."""
        if not self.latency_histogram:
            return 0.0
        return max(float(k) for k in self.latency_histogram) * self.superframe_duration

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "n_superframes": self.n_superframes,
            "seed": self.seed,
            "links": self.links,
            "empirical_retr_prob": self.empirical_retr_prob,
            "empirical_plr": self.empirical_plr,
            "mean_device_energy": self.mean_device_energy,
            "mean_relay_energy": self.mean_relay_energy,
            "latency_histogram": self.latency_histogram,
            "superframe_duration": self.superframe_duration,
            "std_errors": self.std_errors,
            "activity_counts": self.activity_counts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _binomial_se(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


def run(scenario: Scenario, n: int, seed: int = 0, workers: int = 1,
        block_size: int = BLOCK_SIZE) -> SimResult:
    """Simulate ``n`` superframes of ``scenario``.

    ``workers`` only changes wall time: blocks are merged in index order.
    ``block_size`` is part of the stream layout, so changing it changes the
    sampled values.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n!r}")
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers!r}")
    sizes = [min(block_size, n - start) for start in range(0, n, block_size)]
    jobs = [(scenario, seed, b, size) for b, size in enumerate(sizes)]
    if workers == 1:
        parts = [_run_block(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _run_block(*job), jobs))

    retr = sum(p["retr"] for p in parts)
    lost = sum(p["lost"] for p in parts)
    counts: dict[str, int] = {}
    moments: dict[tuple[str, str], int] = {}
    for p in parts:
        for k, v in p["counts"].items():
            counts[k] = counts.get(k, 0) + v
        for k, v in p["moments"].items():
            moments[k] = moments.get(k, 0) + v
    e = scenario.energies
    dev_mean = _device_energy(counts, e) / n
    has_relay = scenario.mode is not Mode.SM
    rel_mean = _relay_energy(counts, e) / n if has_relay else None
    dev_w = {k: getattr(e, ACTIVITIES[k]) for k in counts if k.startswith("device_")}
    rel_w = {k: getattr(e, ACTIVITIES[k]) for k in counts if k.startswith("relay_")}

    p_retr, p_lost = retr / n, lost / n
    std_errors = {
        "retr_prob": _binomial_se(p_retr, n),
        "plr": _binomial_se(p_lost, n),
        "device_energy": _energy_se(counts, moments, dev_w, n),
    }
    if has_relay:
        std_errors["relay_energy"] = _energy_se(counts, moments, rel_w, n)

    delivered = n - lost
    histogram = {repr(superframes_latency(scenario.mode)): delivered} if delivered else {}
    return SimResult(
        mode=scenario.mode,
        n_superframes=n,
        seed=seed,
        empirical_retr_prob=p_retr,
        empirical_plr=p_lost,
        mean_device_energy=dev_mean,
        mean_relay_energy=rel_mean,
        latency_histogram=histogram,
        std_errors=std_errors,
        activity_counts=dict(sorted(counts.items())),
        links=scenario.links.as_dict(),
        superframe_duration=scenario.config.duration,
    )


COMPARISON_COLUMNS = ("mode", "metric", "analytic", "empirical", "std_error", "tolerance", "pass")


def compare(analytic: ModeMetrics, result: SimResult, sigmas: float = 4.0,
            energies: FrameEnergies | None = None, rel_tol: float = 1e-9) -> list[dict]:
    """Analytic-vs-empirical rows with a pass flag per metric.

    Probabilities pass within ``sigmas`` binomial standard errors computed
    at the closed-form value. Energies are affine in the retransmission
    count, so their band is the retransmission band times the TX energy
    plus ``rel_tol`` relative slack.
    """
    n = result.n_superframes
    e = FrameEnergies.from_params() if energies is None else energies
    se_retr = _binomial_se(analytic.retr_prob, n)
    rows = []

    def add(metric, expected, observed, se, slack=0.0):
        tol = sigmas * se + slack
        rows.append({
            "mode": result.mode.value, "metric": metric, "analytic": expected,
            "empirical": observed, "std_error": se, "tolerance": tol,
            "pass": abs(observed - expected) <= tol,
        })

    add("retr_prob", analytic.retr_prob, result.empirical_retr_prob, se_retr)
    add("plr", analytic.plr, result.empirical_plr, _binomial_se(analytic.plr, n))
    dev_se = se_retr * e.tx_data if result.mode is Mode.SM else 0.0
    add("device_energy", analytic.device_energy, result.mean_device_energy, dev_se,
        rel_tol * abs(analytic.device_energy))
    if analytic.relay_energy is not None:
        rel_se = se_retr * e.tx_data if result.mode is Mode.RM else 0.0
        add("relay_energy", analytic.relay_energy, result.mean_relay_energy, rel_se,
            rel_tol * abs(analytic.relay_energy))
    if result.latency_histogram:
        add("worst_latency", analytic.worst_latency, result.worst_latency, 0.0,
            rel_tol * analytic.worst_latency)
    return rows
