import math

import numpy as np
import pytest

from lldnsim.analytic import LinkMatrix, links_for_mode, metrics
from lldnsim.energy import FrameEnergies
from lldnsim.simulator import Scenario, compare, run, step_etm, step_rm, step_sm

E = FrameEnergies.from_params()
N = 1_000_000


def within(observed, expected, n, k=3.0):
    se = math.sqrt(expected * (1 - expected) / n)
    return abs(observed - expected) <= k * se


def test_sm_perfect_links():
    out = step_sm(LinkMatrix(per_d2c=0.0, per_c2d=0.0), np.random.default_rng(0), 1000)
    assert not out.lost.any()
    assert (out.counts["device_tx_data"] == 1).all()
    assert (out.counts["device_rx_beacon"] + out.counts["device_rx_gack"] == 2).all()


def test_sm_needless_retransmission_when_gack_lost():
    out = step_sm(LinkMatrix(per_d2c=0.0, per_c2d=1.0), np.random.default_rng(0), 100)
    assert out.retransmitted.all()
    assert not out.lost.any()


def test_sm_rates():
    r = run(Scenario("SM", LinkMatrix(per_d2c=0.1, per_c2d=0.1)), N, seed=1)
    assert within(r.empirical_retr_prob, 0.19, N)
    assert within(r.empirical_plr, 0.01, N)
    assert abs(r.empirical_plr - 0.01) < 3 * math.sqrt(0.01 * 0.99 / N)


def test_rm_perfect_relay():
    for d2c in (0.0, 0.5, 1.0):
        links = LinkMatrix(per_d2c=d2c, per_d2r=0.0, per_c2r=0.0, per_r2c=0.0)
        out = step_rm(links, np.random.default_rng(2), 10_000)
        assert not out.lost.any()


def test_rm_relay_tx_fraction():
    r = run(Scenario("RM", LinkMatrix.symmetric(0.1)), N, seed=3)
    assert within(r.empirical_retr_prob, 0.9 * 0.19, N)
    assert r.mean_device_energy == pytest.approx(E.rx_beacon + E.tx_data, rel=1e-12)


def test_rm_high_per_scaled_links():
    links = links_for_mode("RM", 0.9, 0.5, 0.5)
    r = run(Scenario("RM", links), N, seed=4)
    assert within(r.empirical_plr, metrics("RM", links).plr, N)


def test_rm_silent_slot_when_relay_missed_frame():
    links = LinkMatrix(per_d2c=1.0, per_d2r=1.0, per_c2r=0.0, per_r2c=0.0)
    out = step_rm(links, np.random.default_rng(0), 1000)
    assert not out.retransmitted.any()
    assert out.lost.all()


def test_etm_perfect_and_lossy():
    out = step_etm(LinkMatrix(per_d2r=0.0, per_r2c=0.0), np.random.default_rng(0), 1000)
    assert not out.lost.any()
    r = run(Scenario("ETM", LinkMatrix(per_d2r=0.1, per_r2c=0.1)), N, seed=5)
    assert within(r.empirical_plr, 0.19, N)
    assert r.std_errors["device_energy"] == 0.0
    assert r.std_errors["relay_energy"] == 0.0


def test_activity_conservation():
    rng = np.random.default_rng(9)
    sm = step_sm(LinkMatrix(per_d2c=0.4, per_c2d=0.4), rng, 5000)
    assert ((sm.counts["device_rx_beacon"] + sm.counts["device_rx_gack"]) == 2).all()
    rm = step_rm(LinkMatrix.symmetric(0.4), rng, 5000)
    assert (rm.counts["device_tx_data"] == 1).all() and (rm.counts["device_rx_beacon"] == 1).all()
    etm = step_etm(LinkMatrix.symmetric(0.4), rng, 5000)
    for key in ("relay_rx_beacon", "relay_rx_data", "relay_tx_data"):
        assert (etm.counts[key] == 1).all()


def test_determinism_and_worker_independence():
    scenario = Scenario("RM", LinkMatrix.symmetric(0.3))
    a = run(scenario, 300_000, seed=11)
    b = run(scenario, 300_000, seed=11)
    c = run(scenario, 300_000, seed=11, workers=4)
    assert a.to_json() == b.to_json() == c.to_json()
    assert run(scenario, 300_000, seed=12).to_json() != a.to_json()


def test_latency_histogram():
    for mode, links, sf in (("SM", LinkMatrix.symmetric(0.2), 1.0), ("RM", LinkMatrix.symmetric(0.2), 1.0),
                            ("ETM", LinkMatrix.symmetric(0.2), 1.5)):
        r = run(Scenario(mode, links), 20_000, seed=0)
        assert set(r.latency_histogram) == {repr(sf)}
        assert sum(r.latency_histogram.values()) == 20_000 - round(r.empirical_plr * 20_000)
        assert r.worst_latency == pytest.approx(sf * 10e-3)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        run(Scenario("SM", LinkMatrix.symmetric(0.1)), 0)
    with pytest.raises(ValueError):
        Scenario("RM", LinkMatrix(per_d2c=0.1))
    with pytest.raises(ValueError):
        Scenario("ETM", LinkMatrix(per_d2r=0.1, per_r2c=0.1), model_beacon_loss=True)


def test_beacon_loss_flag_adds_loss():
    links = LinkMatrix.symmetric(0.2)
    plain = run(Scenario("SM", links), 200_000, seed=0)
    lossy = run(Scenario("SM", links, model_beacon_loss=True), 200_000, seed=0)
    # lost beacon -> no uplink: 1 - 0.8 * (1 - 0.04)
    assert within(lossy.empirical_plr, 1 - 0.8 * 0.96, 200_000, 4)
    assert lossy.empirical_plr > plain.empirical_plr
    etm = run(Scenario("ETM", links, model_beacon_loss=True), 200_000, seed=0)
    assert within(etm.empirical_plr, 1 - 0.64 * 0.64, 200_000, 4)


def test_compare_small_n_passes():
    links = LinkMatrix.symmetric(0.1)
    for mode in ("SM", "RM", "ETM"):
        r = run(Scenario(mode, links), 100, seed=42)
        rows = compare(metrics(mode, links), r)
        assert all(row["pass"] for row in rows), rows


def test_compare_flags_wrong_model():
    links = LinkMatrix.symmetric(0.3)
    r = run(Scenario("SM", links), 200_000, seed=1)
    wrong = metrics("SM", LinkMatrix.symmetric(0.2))
    rows = {row["metric"]: row for row in compare(wrong, r)}
    assert not rows["plr"]["pass"]
    assert not rows["retr_prob"]["pass"]


def test_energy_standard_error_sm():
    r = run(Scenario("SM", LinkMatrix(per_d2c=0.1, per_c2d=0.1)), 100_000, seed=2)
    p = r.empirical_retr_prob
    assert r.std_errors["device_energy"] == pytest.approx(E.tx_data * math.sqrt(p * (1 - p) / 100_000), rel=1e-6)
