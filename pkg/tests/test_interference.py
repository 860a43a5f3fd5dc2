import math

import numpy as np
import pytest
from scipy import stats

from lteu_coexist.config import GeometryConfig, SmallCellConfig
from lteu_coexist.interference import (
    InterferenceModel, WifiInterference, access_probability, expected_active_users, gamma_cdf,
    interference_model, precoder_gram_moment, sum_distribution,
)
from lteu_coexist.montecarlo import simulate_interference_samples
from lteu_coexist.rng import stream

SC = SmallCellConfig()


def test_gamma_cdf_against_scipy():
    x = np.linspace(0, 30, 50)
    np.testing.assert_allclose(gamma_cdf(x, 8.0, 4.0), stats.gamma.cdf(x, 8.0, scale=4.0), rtol=1e-12, atol=1e-15)
    with pytest.raises(ValueError):
        gamma_cdf(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        gamma_cdf(-1.0, 1.0, 1.0)


def test_sum_distribution_modes():
    assert sum_distribution(4, "paper") == (8.0, 4.0)
    assert sum_distribution(4, "erlang") == (4.0, 1.0)
    shape, scale = sum_distribution(4, "matched", 8, 4)
    # mean K (each term unit-mean), variance inflated by precoder correlation
    assert shape * scale == pytest.approx(4.0)
    assert shape * scale ** 2 > 4.0
    with pytest.raises(ValueError):
        sum_distribution(4, "other")


def test_gram_moment_bounds():
    assert precoder_gram_moment(8, 4, 1) == 1.0
    m2 = precoder_gram_moment(8, 4, 4)
    assert 4.0 <= m2 <= 16.0
    with pytest.raises(ValueError):
        precoder_gram_moment(8, 3, 4)


def test_access_probability_edge_cases():
    model = interference_model(False, 4, 1e-7, 0.999, SC.tx_power, "erlang")
    assert access_probability(model, math.inf) == 1.0
    assert access_probability(model, 0.0) == 0.0
    assert access_probability(InterferenceModel(4.0, 1.0, 0.0), 0.0) == 1.0
    with pytest.raises(ValueError):
        access_probability(model, -1.0)


def test_nulling_raises_access_probability():
    thr = 10 * SC.noise_power
    users = WifiInterference((1e-7, 1e-8, 1e-9), 2, 0.999, SC.tx_power, "matched", 8, 4)
    gains = users.gains(thr)
    assert np.all(gains >= 0)
    profile = expected_active_users((0,), users, thr)
    assert profile.expected_active == pytest.approx(sum(profile.per_user_access))
    assert profile.per_user_access[0] == pytest.approx(users.access(0, True, thr))
    with pytest.raises(ValueError):
        expected_active_users((7,), users, thr)


def test_model_sampling_consistent_with_cdf():
    model = interference_model(True, 4, 100.0 ** -3.5, 0.999, SC.tx_power, "matched", 8, 4)
    thr = 10 * SC.noise_power
    draws = model.sample(stream(1, "draws"), 100_000)
    assert np.mean(draws <= thr) == pytest.approx(access_probability(model, thr), abs=0.01)
    assert np.mean(draws) == pytest.approx(model.mean, rel=0.02)


def test_access_probability_against_channel_monte_carlo():
    # nulled user at 100 m, K = N = 4, threshold ten noise powers
    k, pl = 4, GeometryConfig().path_loss(100.0)
    thr = 10 * SC.noise_power
    model = interference_model(True, k, pl, SC.wifi_csi_corr, SC.tx_power, "matched", SC.n_antennas, k)
    x = simulate_interference_samples(SC, k, n_samples=100_000, seed=7, n_wifi_nulled=SC.n_antennas - 1 - k)
    empirical = np.mean(model.coefficient * x.values <= thr)
    assert access_probability(model, thr) == pytest.approx(empirical, abs=0.01)


def test_gamma_cdf_examples():
    assert gamma_cdf(0.0, 3.0, 2.0) == 0.0
    assert gamma_cdf(1.7, 1.0, 0.5) == pytest.approx(1 - math.exp(-3.4))
    draws = np.random.default_rng(0).gamma(4.0, 1.0, 1_000_000)
    assert gamma_cdf(4.0, 4.0, 1.0) == pytest.approx(np.mean(draws <= 4.0), abs=0.003)


def test_interference_model_examples():
    perfect = interference_model(True, 4, 1e-6, 1.0, SC.tx_power)
    assert perfect.coefficient == 0.0
    assert np.all(perfect.sample(stream(0, "z"), 10) == 0.0)
    single = interference_model(False, 1, 1e-6, 0.999, SC.tx_power, "erlang")
    assert (single.shape, single.scale) == (1.0, 1.0)
    assert single.mean == pytest.approx(single.coefficient)
    assert single.coefficient == pytest.approx(SC.tx_power * 1e-6)


def test_expected_active_users_examples():
    pl = (1e-7, 3e-8, 1e-9, 5e-10)
    thr = 10 * SC.noise_power
    perfect = WifiInterference(pl, 3, 1.0, SC.tx_power, "matched", 8, 4)
    assert expected_active_users(range(4), perfect, thr).expected_active == pytest.approx(4.0)
    noisy = WifiInterference(pl, 3, 0.999, SC.tx_power, "matched", 8, 4)
    assert expected_active_users((), noisy, 0.0).expected_active == 0.0
    base = expected_active_users((), noisy, thr).expected_active
    for m in range(4):
        assert expected_active_users((m,), noisy, thr).expected_active > base
    assert 0.0 <= base <= 4.0
