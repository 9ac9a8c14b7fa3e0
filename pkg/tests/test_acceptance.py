"""Exit criteria. Each test records one PASS/FAIL line, printed in the
pytest terminal summary under "acceptance criteria"."""

import math
import random
import time

import numpy as np
import pytest

import oracles
from conftest import record
from lldnsim.analytic import LinkMatrix, links_for_mode, metrics, rm_metrics, sm_metrics
from lldnsim.channel import ReferenceLink, TargetLink, derive_per
from lldnsim.cli import main
from lldnsim.energy import FrameEnergies
from lldnsim.placement import Geometry, GridSpec, find_optimum, grid_sweep, line_sweep
from lldnsim.reporting import grid_links
from lldnsim.schedule import (
    Frame,
    FrameKind,
    InfeasibleScheduleError,
    SuperframeConfig,
    build_superframe,
    xor_decode,
    xor_encode,
)
from lldnsim.simulator import Scenario, run

E = FrameEnergies.from_params()
GRID = (0.01, 0.1, 0.3, 0.5, 0.9)


def check(criterion, ok, detail=""):
    record(criterion, bool(ok), detail)
    assert ok, f"{criterion}: {detail}"


def test_1_appendix_pipeline():
    start = time.perf_counter()
    worst = 0.0
    for per in (1e-6, 0.01, 0.1, 0.5, 0.9, 0.999):
        ref = ReferenceLink(per, 88, 1.0, 1.0)
        got = derive_per(ref, TargetLink(88, 1.0, 1.0), 3)
        worst = max(worst, abs(got - per) / per)
    half = derive_per(ReferenceLink(0.1, 88, 1.0, 1.0), TargetLink(88, 0.5, 1.0), 3)
    oracle = oracles.per2(0.1, 88, 1, 1, 88, 0.5, 1, 3)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and abs(half - 0.01312) <= 1e-5 and abs(half - oracle) <= 1e-12 and elapsed < 1.0
    check("1 appendix pipeline", ok,
          f"identity rel err {worst:.1e}, half-distance {half:.7f} (oracle {oracle:.7f}), {elapsed:.3f} s")


def test_2_closed_form_vs_monte_carlo():
    n = 1_000_000
    start = time.perf_counter()
    failures, checked, seed = [], 0, 0
    for mode in ("SM", "RM", "ETM"):
        for a in GRID:
            for b in GRID:
                links = grid_links(mode, a, b)
                r = run(Scenario(mode, links), n, seed=seed)
                seed += 1
                m = metrics(mode, links)
                for name, emp, exp in (("retr_prob", r.empirical_retr_prob, m.retr_prob),
                                       ("plr", r.empirical_plr, m.plr)):
                    se = math.sqrt(exp * (1 - exp) / n)
                    checked += 1
                    if abs(emp - exp) > 4 * se:
                        failures.append((mode, a, b, name, emp, exp))
                # energies are deterministic given the activity counts
                at_emp = metrics(mode, links, E)
                q = r.empirical_retr_prob
                if mode == "SM":
                    dev_expected = (1 + q) * E.tx_data + E.rx_beacon + E.rx_gack
                    rel_expected = None
                elif mode == "RM":
                    dev_expected = at_emp.device_energy
                    rel_expected = E.rx_data + E.rx_gack + q * E.tx_data
                else:
                    dev_expected, rel_expected = at_emp.device_energy, at_emp.relay_energy
                pairs = [("device_energy", r.mean_device_energy, dev_expected)]
                if rel_expected is not None:
                    pairs.append(("relay_energy", r.mean_relay_energy, rel_expected))
                for name, emp, exp in pairs:
                    checked += 1
                    if abs(emp - exp) > 1e-9 * abs(exp):
                        failures.append((mode, a, b, name, emp, exp))
    elapsed = time.perf_counter() - start
    check("2 closed form vs Monte Carlo (4 SE / 1e-9 rel)", not failures and elapsed < 120,
          f"{checked} checks, {len(failures)} failed, {elapsed:.1f} s")


def test_3_energy_savings():
    rm = rm_metrics(links_for_mode("RM", 0.0)).device_energy
    at_zero = 1 - rm / sm_metrics(links_for_mode("SM", 0.0)).device_energy
    at_one = 1 - rm / sm_metrics(links_for_mode("SM", 1.0)).device_energy
    near_one = 1 - rm / sm_metrics(links_for_mode("SM", 0.999999)).device_energy
    ok = at_zero >= 0.30 and abs(at_one - 0.48) <= 0.03 and abs(near_one - 0.48) <= 0.03
    check("3 RM vs SM device energy saving", ok,
          f"{at_zero:.1%} at PER=0, {at_one:.1%} at PER=1")


def test_4_plr_reduction():
    sm = sm_metrics(links_for_mode("SM", 0.9)).plr
    rm = rm_metrics(links_for_mode("RM", 0.9, 0.5, 0.5, 3)).plr
    reduction = 1 - rm / sm
    p = oracles.per2(0.9, 88, 1, 1, 88, 0.5, 1, 3)
    oracle = 1 - oracles.plr_rm(0.9, p, p) / 0.81
    ok = abs(reduction - 0.49) <= 0.02 and abs(reduction - oracle) <= 1e-12
    check("4 PLR reduction at PER 0.9", ok, f"{reduction:.2%} (oracle {oracle:.2%})")


def test_5_placement():
    start = time.perf_counter()
    base = Geometry()
    grid = GridSpec(resolution=0.5)
    frac, plr = line_sweep(base, 1001)
    asym = float(np.max(np.abs(plr - plr[::-1])))
    field = grid_sweep(base, grid)
    gx, gy = field.argmin
    optima = [find_optimum(base.replace(device_tx_power=p), grid) for p in (0.0, -3.0, -6.0)]
    elapsed = time.perf_counter() - start
    ys = [y for _, y in optima]
    ok = (asym <= 1e-12 and abs(gx) <= 0.5 and abs(gy - 25.0) <= 0.5
          and abs(ys[0] - 25.0) <= 0.5 and ys[0] > ys[1] > ys[2] and elapsed < 30)
    check("5 placement symmetry and shift", ok,
          f"asymmetry {asym:.1e}, grid argmin ({gx:g}, {gy:g}), optima y "
          f"{ys[0]:.2f}/{ys[1]:.2f}/{ys[2]:.2f} m, {elapsed:.1f} s")


def test_6_schedule_feasibility():
    slots = build_superframe(SuperframeConfig(10e-3, 17, 8, 8))
    try:
        build_superframe(SuperframeConfig(5e-3, 17, 8, 8))
        rejected = False
    except InfeasibleScheduleError:
        rejected = True
    check("6 schedule feasibility", len(slots) == 18 and rejected,
          f"{len(slots)} slots at 10 ms, 5 ms rejected: {rejected}")


def test_7_xor_codec():
    rng = random.Random(2024)
    bad = 0
    for _ in range(1000):
        beacon = Frame(FrameKind.BEACON, rng.randbytes(14))
        data = Frame(FrameKind.DATA, rng.randbytes(11), source=1)
        coded = xor_encode(beacon, data)
        bad += xor_decode(coded, beacon) != data or xor_decode(coded, data) != beacon
    check("7 XOR codec round trips", bad == 0, f"{1000 - bad}/1000 exact")


def test_8_latency():
    worst = {}
    for mode in ("SM", "RM", "ETM"):
        r = run(Scenario(mode, LinkMatrix.symmetric(0.3)), 100_000, seed=8)
        worst[mode] = max(float(k) for k in r.latency_histogram)
    ok = worst == {"SM": 1.0, "RM": 1.0, "ETM": 1.5}
    check("8 worst-case latency in superframes", ok, str(worst))


def test_9_determinism(tmp_path):
    args = ["simulate", "--superframes", "150000", "--seed", "42"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    assert main(args + ["--out", str(tmp_path / "c"), "--workers", "4"]) == 0
    docs = [(tmp_path / d / "simulation.json").read_bytes() for d in "abc"]
    check("9 determinism across reruns and worker counts", docs[0] == docs[1] == docs[2],
          f"{len(docs[0])} bytes")
