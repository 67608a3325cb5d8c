import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from femtocoop.channel import (
    INDOOR, OUTDOOR, ChannelParams, classify_link, mean_gain, path_loss_db, sample_gains, sinr, success_probability,
)
from femtocoop.topology import LayoutParams, generate_topology

from conftest import hand_topology


def test_path_loss_table_values():
    assert path_loss_db(INDOOR, 1.0) == pytest.approx(37.0, abs=1e-12)
    assert path_loss_db(OUTDOOR, 10.0) == pytest.approx(52.9, abs=1e-12)
    # 15.3 + 37.6 * 2
    assert path_loss_db(OUTDOOR, 100.0) == pytest.approx(90.5, abs=1e-12)
    with pytest.raises(ValueError):
        path_loss_db(OUTDOOR, 0.0)


def test_indoor_gain_five_metres_unshadowed():
    t = hand_topology([[500.0, 0.0]], [[505.0, 0.0]], [])
    g = mean_gain(t, ("fue", 0), ("fap", 0), None)
    assert 10 * math.log10(g.mean_gain) == pytest.approx(-(37.0 + 30.0 * math.log10(5.0)), abs=1e-9)
    assert g.n_walls == 0


def test_mue_to_fue_adds_one_wall():
    t = hand_topology([[500.0, 0.0]], [[505.0, 0.0]], [[545.0, 0.0]])
    g = mean_gain(t, ("mue", 0), ("fue", 0), None)
    assert -10 * math.log10(g.mean_gain) == pytest.approx(path_loss_db(OUTDOOR, 40.0) + 12.0, abs=1e-9)
    assert classify_link("mue", "fue") == (OUTDOOR, 1)


def test_zero_sigma_is_deterministic():
    t = generate_topology(LayoutParams(n_faps=5, n_mues=5), 1)
    p = ChannelParams(shadow_sigma_db=0.0)
    a = sample_gains(t, p, np.random.default_rng(1))
    b = sample_gains(t, p, np.random.default_rng(2))
    for name in ("mue_mbs", "fue_mbs", "fue_own", "mue_fap", "mue_fue", "fue_fap"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))


def test_sample_gains_match_single_link_formula():
    t = generate_topology(LayoutParams(n_faps=3, n_mues=4), 9)
    g = sample_gains(t, ChannelParams(shadow_sigma_db=0.0), np.random.default_rng(0))
    for m in range(4):
        for l in range(3):
            one = mean_gain(t, ("mue", m), ("fue", l), None).mean_gain
            assert g.mue_fue[m, l] == pytest.approx(one, rel=1e-12)
        assert g.mue_mbs[m] == pytest.approx(mean_gain(t, ("mue", m), ("mbs", 0), None).mean_gain, rel=1e-12)
    np.testing.assert_allclose(g.fue_fap[np.arange(3), t.fue_fap], g.fue_own)


def test_sinr_examples():
    assert sinr(1.0, [], 1.0) == 1.0
    assert sinr(4.0, [1.0, 1.0], 2.0) == 1.0


def test_noise_power_integrates_density():
    p = ChannelParams()
    # integrate -174 dBm/Hz over 180 one-kHz bins, in watts
    per_hz = 10.0 ** ((-174.0 - 30.0) / 10.0)
    oracle = math.fsum(per_hz * 1000.0 for _ in range(180))
    assert p.noise_power == pytest.approx(oracle, rel=1e-12)
    assert p.noise_power == pytest.approx(7.165929e-16, rel=1e-6)


def test_success_probability_examples():
    assert success_probability(1.0, [], 1e-12, 1.0) == pytest.approx(1.0, abs=1e-9)
    assert success_probability(3.0, [1.0], 1.0, 2.0) == pytest.approx(math.exp(-1.0), rel=1e-12)


@given(st.floats(1e-3, 10.0), st.floats(0.1, 20.0))
def test_monte_carlo_matches_closed_form_without_interferers(snr, gamma):
    rng = np.random.default_rng(0)
    mc = success_probability(snr, [], gamma, 1.0, mode="monte_carlo", n_draws=20_000, rng=rng)
    assert mc == pytest.approx(math.exp(-gamma / snr), abs=0.03)


def test_params_validation():
    with pytest.raises(ValueError, match="fading_mode"):
        ChannelParams(fading_mode="rayleigh")
    with pytest.raises(ValueError, match="n_fading_draws"):
        ChannelParams(fading_mode="monte_carlo", n_fading_draws=10)
