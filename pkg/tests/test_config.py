import math

import pytest

from lteu_coexist.config import (
    ConfigError, GeometryConfig, ScenarioConfig, SmallCellConfig, WifiMacConfig, Weights,
    dbm_per_hz_to_watts, quant_error_bound,
)


def test_defaults_match_reference_setup():
    cfg = ScenarioConfig()
    assert cfg.small_cell.n_antennas == 8
    assert cfg.small_cell.tx_power == pytest.approx(0.023)
    assert cfg.small_cell.bandwidth_hz == 20e6
    assert cfg.mac.payload_bits == 12000
    assert (cfg.mac.min_window, cfg.mac.max_stage) == (16, 6)
    assert cfg.reqs.min_sue_rate == cfg.reqs.min_wifi_rate == 10e6


def test_noise_power_from_density():
    # -174 dBm/Hz over 20 MHz is about -101 dBm
    n0 = dbm_per_hz_to_watts(-174.0, 20e6)
    assert 10 * math.log10(n0 / 1e-3) == pytest.approx(-174 + 10 * math.log10(20e6))
    assert SmallCellConfig().noise_power == pytest.approx(n0)


def test_quant_error_default_and_override():
    assert SmallCellConfig().b == pytest.approx(2 ** (-8 / 7))
    assert quant_error_bound(4, 8) == pytest.approx(2 ** (-4 / 7))
    assert SmallCellConfig(quant_error=0.1).b == 0.1


def test_threshold_default_is_ten_noise_powers():
    cfg = ScenarioConfig()
    assert cfg.access_threshold == pytest.approx(10 * cfg.small_cell.noise_power)
    assert cfg.replace(threshold=1e-12).access_threshold == 1e-12


@pytest.mark.parametrize("bad", [
    lambda: WifiMacConfig(min_window=0),
    lambda: Weights(0.6, 0.6),
    lambda: GeometryConfig(cell_radius=-1),
    lambda: ScenarioConfig(dist_mode="nope"),
    lambda: ScenarioConfig(samples=0),
])
def test_invalid_values_rejected(bad):
    with pytest.raises(ConfigError):
        bad()


def test_flat_round_trip_and_digest():
    cfg = ScenarioConfig(seed=7, n_wifi=3)
    again = ScenarioConfig.loads(cfg.dumps())
    assert again == cfg
    assert again.digest() == cfg.digest()
    assert cfg.replace(seed=8).digest() != cfg.digest()


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        ScenarioConfig.loads("mac.window_size: 16\n")
    with pytest.raises(ConfigError):
        ScenarioConfig.loads("colour: red\n")


def test_path_loss_clamped_at_reference_distance():
    g = GeometryConfig()
    assert g.path_loss(0.1) == g.path_loss(g.reference_distance) == 1.0
    assert g.path_loss(100.0) == pytest.approx(100.0 ** -3.5)
