import math

import numpy as np

import pytest
from hypothesis import given, settings, strategies as st

from lteu_coexist.config import WifiMacConfig
from lteu_coexist.dcf import (
    busy_probability, collision_from_tau, fixed_point_residual, occupancy_durations,
    slot_level_simulate, solve_tau, success_probability, tau_from_collision, wifi_throughput,
)

MAC = WifiMacConfig()


def test_single_station_attempt_rate():
    tau, p = solve_tau(1, MAC)
    assert tau == 2 / 17
    assert p == 0.0


def test_tau_formula_limit_at_half():
    w, stages = MAC.min_window, MAC.max_stage
    at_half = tau_from_collision(0.5, MAC)
    assert at_half == pytest.approx(2 / (w + 1 + w * stages / 2))
    for p in (0.5 - 1e-6, 0.5 + 1e-6):
        assert tau_from_collision(p, MAC) == pytest.approx(at_half, rel=1e-4)


def test_occupancy_durations_golden():
    q_s, q_c = occupancy_durations(MAC)
    # (192+224+12000)/300e6 + 16us + (224+112)/300e6 + 34us
    assert q_s == pytest.approx(9.250666666666667e-05, rel=1e-14)
    assert q_c == pytest.approx(7.538666666666667e-05, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.0, max_value=60.0))
def test_fixed_point_residual_property(m):
    tau, p = solve_tau(m, MAC)
    assert 0 < tau < 1 and 0 <= p < 1
    assert fixed_point_residual(tau, p, m, MAC) < 1e-12


def test_attempt_rate_falls_with_contention():
    taus = [solve_tau(m, MAC)[0] for m in (1, 2, 5, 10, 20)]
    assert taus == sorted(taus, reverse=True)


def test_success_and_busy_probabilities():
    assert success_probability(0.1, 1) == pytest.approx(1.0)
    tau = 0.05
    assert busy_probability(tau, 4) == pytest.approx(1 - 0.95 ** 4)
    assert success_probability(tau, 4) == pytest.approx(4 * tau * 0.95 ** 3 / (1 - 0.95 ** 4))
    assert collision_from_tau(tau, 1) == 0.0


def test_invalid_contenders():
    with pytest.raises(ValueError):
        solve_tau(0.5, MAC)
    with pytest.raises(ValueError):
        slot_level_simulate(0, MAC, 100)


def test_single_station_throughput_matches_simulation():
    model = wifi_throughput(1, MAC)
    sim = slot_level_simulate(1, MAC, n_slots=200_000, seed=3)
    assert sim.collision_rate == 0.0
    assert sim.throughput_bps == pytest.approx(model.throughput_bps, rel=0.01)


def test_simulation_is_seeded():
    a = slot_level_simulate(5, MAC, n_slots=20_000, seed=11)
    b = slot_level_simulate(5, MAC, n_slots=20_000, seed=11)
    c = slot_level_simulate(5, MAC, n_slots=20_000, seed=12)
    assert a == b
    assert a != c
    assert a.n_slots == 20_000
    assert math.isfinite(a.throughput_ci) and a.throughput_ci > 0


def test_simulated_attempt_rate_close_to_model():
    sim = slot_level_simulate(10, MAC, n_slots=300_000, seed=5)
    tau, _ = solve_tau(10, MAC)
    assert sim.attempt_rate == pytest.approx(tau, rel=0.05)


def test_success_probability_examples():
    assert success_probability(0.2, 2) == pytest.approx(0.32 / 0.36)
    assert success_probability(1e-9, 6) == pytest.approx(1.0, abs=1e-7)


def test_busy_probability_examples():
    assert busy_probability(0.0, 3) == 0.0
    assert busy_probability(2 / 17, 1) == pytest.approx(2 / 17)
    tau, _ = solve_tau(5, MAC)
    sim = slot_level_simulate(5, MAC, n_slots=400_000, seed=8)
    assert sim.busy_fraction == pytest.approx(busy_probability(tau, 5), rel=0.02)


def test_occupancy_degenerate_frame():
    mac = WifiMacConfig(payload_bits=0, mac_header_bits=0, phy_header_bits=0, ack_bits=0)
    q_s, q_c = occupancy_durations(mac)
    assert q_s == pytest.approx(mac.sifs + mac.difs)
    assert q_c < q_s or q_c == pytest.approx(mac.difs)
    assert occupancy_durations(MAC)[1] < occupancy_durations(MAC)[0]


def test_single_station_throughput_formula():
    sol = wifi_throughput(1, MAC)
    q_s, _ = occupancy_durations(MAC)
    tau = 2 / 17
    expected = tau * MAC.payload_bits / ((1 - tau) * MAC.slot_time + tau * q_s)
    assert sol.p_success == pytest.approx(1.0)
    assert sol.throughput_bps == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("m", [2, 5, 10])
def test_throughput_within_three_percent_of_simulation(m):
    sim = slot_level_simulate(m, MAC, n_slots=300_000, seed=2)
    assert sim.throughput_bps == pytest.approx(wifi_throughput(m, MAC).throughput_bps, rel=0.03)


def test_collision_rate_five_stations():
    sim = slot_level_simulate(5, MAC, n_slots=300_000, seed=4)
    assert sim.collision_rate == pytest.approx(solve_tau(5, MAC)[1], rel=0.05)


def test_confidence_interval_shrinks_with_root_n():
    # half-width scales as 1/sqrt(n): doubling n shrinks it by about sqrt(2)
    short = [slot_level_simulate(5, MAC, n_slots=50_000, seed=s).throughput_ci for s in range(6)]
    long = [slot_level_simulate(5, MAC, n_slots=100_000, seed=s).throughput_ci for s in range(6)]
    ratio = np.mean(short) / np.mean(long)
    assert 1.15 < ratio < 1.75
