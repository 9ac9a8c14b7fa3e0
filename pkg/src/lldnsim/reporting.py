"""CSV/JSON emitters and the experiment drivers behind the CLI.

CSV files use ',' separators, LF line endings, '.' decimals and 9
significant digits for floats; headers are fixed per file kind.
"""

from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np

from lldnsim.analytic import SWEEP_COLUMNS, LinkMatrix, links_for_mode, metrics
from lldnsim.config import ExperimentConfig
from lldnsim.energy import FrameEnergies
from lldnsim.placement import find_optimum, grid_sweep, line_sweep, plr_at
from lldnsim.schedule import Mode, build_superframe, schedule_to_json
from lldnsim.simulator import COMPARISON_COLUMNS, Scenario, compare, run

__all__ = [
    "ENERGY_COLUMNS",
    "FIELD_COLUMNS",
    "LINE_COLUMNS",
    "PLR_COLUMNS",
    "cmd_analyze",
    "cmd_figures",
    "cmd_placement",
    "cmd_simulate",
    "format_value",
    "grid_links",
    "write_csv",
]

log = logging.getLogger(__name__)

ENERGY_COLUMNS = (
    "per", "per_d2r", "per_r2c", "per_c2r",
    "sm_retr_prob", "sm_device_energy_j",
    "rm_retr_prob", "rm_device_energy_j", "rm_relay_energy_j",
    "etm_device_energy_j", "etm_relay_energy_j",
)
PLR_COLUMNS = ("per", "per_d2r", "per_r2c", "sm_plr", "rm_plr", "etm_plr")
FIELD_COLUMNS = ("x_m", "y_m", "plr")
LINE_COLUMNS = ("fraction", "plr", "device_power_dbm")


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".9g")
    return str(value)


def write_csv(path: Path, columns, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[c]) for c in columns])
    return path


def write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _tag(alpha, beta):
    return f"a{alpha:g}_b{beta:g}"


def _power_tag(dbm):
    return f"{'m' if dbm < 0 else 'p'}{abs(dbm):g}dbm"


def cmd_analyze(config: ExperimentConfig, out: Path) -> list[Path]:
    """Energy-vs-PER and loss-vs-PER tables, one pair per relay placement."""
    out = Path(out)
    per_grid = np.linspace(config["analyze.per_start"], config["analyze.per_stop"],
                           config["analyze.per_samples"])
    energies = FrameEnergies.from_params(config.params, config.lengths)
    kappa = config["channel.kappa"]
    written = []
    for alpha, beta in config["analyze.placements"]:
        energy_rows, plr_rows = [], []
        for per in per_grid:
            per = float(per)
            m = {mode: metrics(mode, links_for_mode(mode, per, alpha, beta, kappa, config.lengths),
                               energies, config.superframe)
                 for mode in Mode}
            rm_links = links_for_mode(Mode.RM, per, alpha, beta, kappa, config.lengths)
            common = {"per": per, "per_d2r": rm_links.per_d2r, "per_r2c": rm_links.per_r2c,
                      "per_c2r": rm_links.per_c2r}
            energy_rows.append({
                **common,
                "sm_retr_prob": m[Mode.SM].retr_prob, "sm_device_energy_j": m[Mode.SM].device_energy,
                "rm_retr_prob": m[Mode.RM].retr_prob, "rm_device_energy_j": m[Mode.RM].device_energy,
                "rm_relay_energy_j": m[Mode.RM].relay_energy,
                "etm_device_energy_j": m[Mode.ETM].device_energy,
                "etm_relay_energy_j": m[Mode.ETM].relay_energy,
            })
            plr_rows.append({**common, "sm_plr": m[Mode.SM].plr, "rm_plr": m[Mode.RM].plr,
                             "etm_plr": m[Mode.ETM].plr})
        tag = _tag(alpha, beta)
        written.append(write_csv(out / f"energy_{tag}.csv", ENERGY_COLUMNS, energy_rows))
        written.append(write_csv(out / f"plr_{tag}.csv", PLR_COLUMNS, plr_rows))
    log.info("analyze wrote %d files to %s", len(written), out)
    return written


def grid_links(mode, a: float, b: float) -> LinkMatrix:
    """Links at one point of the simulation grid.

    ``a`` is the first-hop error rate (D2C, or D2R for ETM). ``b`` is the
    GACK link for SM, every relay link for RM, and R2C for ETM.
    """
    mode = Mode(mode)
    if mode is Mode.SM:
        return LinkMatrix(per_d2c=a, per_c2d=b)
    if mode is Mode.RM:
        return LinkMatrix(per_d2c=a, per_c2d=a, per_d2r=b, per_r2d=b, per_c2r=b, per_r2c=b)
    return LinkMatrix(per_d2r=a, per_r2d=a, per_c2r=b, per_r2c=b)


def _run_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _sweep_row(per, mode, links, retr, dev, rel, plr):
    return {"per": per, "mode": mode.value, "alpha": None, "beta": None, **links.as_dict(),
            "retr_prob": retr, "device_energy": dev, "relay_energy": rel, "plr": plr}


def cmd_simulate(config: ExperimentConfig, out: Path) -> list[Path]:
    """Monte Carlo over the simulation grid, with analytic and empirical
    tables in the same layout and a per-metric pass/fail comparison."""
    out = Path(out)
    n = config["simulate.superframes"]
    seed = config["simulate.seed"]
    energies = FrameEnergies.from_params(config.params, config.lengths)
    build_superframe(config.superframe, config.lengths, config.params)

    results, analytic_rows, empirical_rows, comparison = [], [], [], []
    index = 0
    for mode in config["simulate.modes"]:
        for a in config["simulate.grid"]:
            for b in config["simulate.grid"]:
                links = grid_links(mode, a, b)
                scenario = Scenario(mode, links, config.superframe, config.lengths, config.params,
                                    config["simulate.model_beacon_loss"])
                result = run(scenario, n, _run_seed(seed, index), workers=config["simulate.workers"])
                index += 1
                expected = metrics(mode, links, energies, config.superframe)
                results.append({"grid_a": a, "grid_b": b, **result.to_dict()})
                analytic_rows.append(_sweep_row(a, mode, links, expected.retr_prob, expected.device_energy,
                                                expected.relay_energy, expected.plr))
                empirical_rows.append(_sweep_row(a, mode, links, result.empirical_retr_prob,
                                                 result.mean_device_energy, result.mean_relay_energy,
                                                 result.empirical_plr))
                for row in compare(expected, result, config["simulate.sigmas"], energies):
                    comparison.append({"grid_a": a, "grid_b": b, **row})

    # worker count only affects wall time, so it stays out of the record
    recorded = {k: v for k, v in config.to_dict().items() if k != "simulate.workers"}
    payload = {"config": recorded, "n_superframes": n, "seed": seed, "results": results}
    written = [
        write_json(out / "simulation.json", payload),
        write_csv(out / "analytic.csv", SWEEP_COLUMNS, analytic_rows),
        write_csv(out / "empirical.csv", SWEEP_COLUMNS, empirical_rows),
        write_csv(out / "comparison.csv", ("grid_a", "grid_b", *COMPARISON_COLUMNS), comparison),
    ]
    failed = sum(not row["pass"] for row in comparison)
    log.info("simulate: %d comparison rows, %d failed", len(comparison), failed)
    return written


def cmd_placement(config: ExperimentConfig, out: Path) -> list[Path]:
    """Loss-rate field per device power, a line sweep, and the optima."""
    out = Path(out)
    grid = config.grid
    written, line_rows, optima = [], [], []
    for dbm in config["placement.device_powers_dbm"]:
        geometry = config.geometry(dbm)
        field = grid_sweep(geometry, grid)
        written.append(write_csv(out / f"field_{_power_tag(dbm)}.csv", FIELD_COLUMNS,
                                 ({"x_m": x, "y_m": y, "plr": v} for x, y, v in field.rows())))
        fractions, values = line_sweep(geometry, config["placement.line_samples"])
        line_rows += [{"fraction": f, "plr": v, "device_power_dbm": dbm} for f, v in zip(fractions, values)]
        x, y = find_optimum(geometry, grid, refine=config["placement.refine"])
        optima.append({"device_power_dbm": dbm, "x_m": round(x, 6) + 0.0, "y_m": round(y, 6) + 0.0,
                       "plr": plr_at(geometry, (x, y)), "grid_argmin": list(field.argmin),
                       "grid_min_plr": field.min})
    written.append(write_csv(out / "line.csv", LINE_COLUMNS, line_rows))
    written.append(write_json(out / "placement_summary.json", {"optima": optima}))
    return written


def cmd_figures(config: ExperimentConfig, out: Path) -> list[Path]:
    """Paper-default energy, loss and placement outputs under ``paper_repro/``."""
    target = Path(out) / "paper_repro"
    written = cmd_analyze(config, target) + cmd_placement(config, target)
    slots = build_superframe(config.superframe, config.lengths, config.params)
    path = target / "schedule.json"
    path.write_text(schedule_to_json(slots) + "\n")
    written.append(path)
    return written
