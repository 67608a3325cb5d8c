import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from femtocoop.traffic import (
    EXPECTED, LITERAL, InfeasibleLease, LeaseTerms, QueueState, UnboundedPayoff, coalition_value, coop_delay,
    delivery_factor, effective_arrival, md1_delay, payoff_or_zero, power_payoff, relay_arrival, relay_rates,
    relayed_arrival, shannon_rate,
)

pos = st.floats(1e-3, 1e7, allow_nan=False)


def test_shannon_examples():
    assert shannon_rate(180e3, 1.0) == pytest.approx(180000.0, rel=1e-15)
    assert shannon_rate(180e3, 0.0) == 0.0
    assert shannon_rate(180e3, 15.0) == pytest.approx(720000.0, rel=1e-15)


def test_effective_arrival_examples():
    assert effective_arrival(150e3, 1.0, 4) == pytest.approx(150e3)
    assert effective_arrival(150e3, 0.0, 4) == 0.0
    # series: sum_{d=1..4} 0.5 * 0.5^(d-1)
    series = math.fsum(0.5 * 0.5 ** (d - 1) for d in range(1, 5))
    assert effective_arrival(150000, 0.5, 4) == pytest.approx(150000 * series, rel=1e-15)
    assert effective_arrival(150000, 0.5, 4) == pytest.approx(140625.0, rel=1e-15)


def test_expected_transmissions_mode():
    # mean attempts of a geometric truncated at D: sum_d d Pt q^(d-1) + D q^D
    pt, D = 0.3, 4
    q = 1 - pt
    oracle = math.fsum(d * pt * q ** (d - 1) for d in range(1, D + 1)) + D * q**D
    assert delivery_factor(pt, D, EXPECTED) == pytest.approx(oracle, rel=1e-12)
    assert delivery_factor(0.0, D, EXPECTED) == D
    assert delivery_factor(1.0, D, EXPECTED) == 1.0
    with pytest.raises(ValueError):
        delivery_factor(0.5, 0)


def test_md1_examples():
    assert md1_delay(0.0, 2.0) == 0.0
    assert md1_delay(2.0, 2.0) == math.inf
    assert md1_delay(3.0, 2.0) == math.inf
    assert md1_delay(1.0, 2.0) == 0.25
    assert QueueState(1.0, 2.0).stable and not QueueState(2.0, 2.0).stable


def test_power_payoff_examples():
    assert power_payoff(4.0, 1.0, 0.5) == 2.0
    assert power_payoff(4.0, math.inf, 0.5) == 0.0
    assert power_payoff(9.0, 4.0, 0.5) == pytest.approx(1.5, rel=1e-15)
    with pytest.raises(UnboundedPayoff):
        power_payoff(1.0, 0.0, 0.5)
    with pytest.raises(ValueError):
        power_payoff(1.0, 1.0, 1.0)
    assert payoff_or_zero(1.0, 0.0, 0.5) == 0.0


def test_relay_rates_examples():
    mue, _ = relay_rates(0.5, 0.5, 8.0, 8.0)
    assert mue == pytest.approx(2.0)
    _, fue = relay_rates([0.5], [1.0], [8.0], [8.0])
    assert fue == 0.0
    with pytest.raises(InfeasibleLease):
        relay_rates(0.0, 0.5, 1.0, 1.0)


def test_relay_arrival_examples():
    assert relay_arrival(150e3, [], 0.9, 4) == pytest.approx(150e3 * (1 - 0.1**4))
    assert relay_arrival(150e3, [140625.0], 1.0, 4) == pytest.approx(290625.0)
    assert relay_arrival(150e3, [140625.0], 0.9, 4) == pytest.approx(290625.0 * (1 - 0.1**4), rel=1e-15)
    assert relayed_arrival([140625.0], 1.0, 4) == pytest.approx(140625.0)


def test_coop_delay_examples():
    assert coop_delay(0.0, 5.0, 1.0, 2.0) == pytest.approx(0.25)
    assert coop_delay(5.0, 5.0, 1.0, 2.0) == math.inf
    assert coop_delay(1.0, 4.0, 1.0, 2.0) == pytest.approx(md1_delay(1.0, 4.0) + md1_delay(1.0, 2.0))


def test_coalition_value_examples():
    assert coalition_value([3.0], 1, []) == 0.0
    assert coalition_value([2.0, 3.0], 2, [0.5]) == 5.0
    assert LeaseTerms(0.5, 0.5, 0.1, 0.05).satisfies_budget(0.1)


# straight-line oracles written out independently of the vectorized code
def _md1_oracle(lam, mu):
    if lam >= mu or mu <= 0:
        return math.inf
    return lam / (2 * mu * (mu - lam))


def _payoff_oracle(rate, delay, delta):
    if math.isinf(delay):
        return 0.0
    return rate**delta / delay ** (1 - delta)


@given(pos, pos)
def test_md1_scalar_and_array_routes_agree(lam, mu):
    a = md1_delay(lam, mu)
    b = md1_delay(np.array([lam]), np.array([mu]))[0]
    o = _md1_oracle(lam, mu)
    assert a == b or (math.isinf(a) and math.isinf(b))
    assert a == pytest.approx(o, rel=1e-12) if math.isfinite(o) else math.isinf(a)


@given(pos, pos, st.floats(0.01, 0.99))
def test_payoff_scalar_and_array_routes_agree(rate, delay, delta):
    a = payoff_or_zero(rate, delay, delta)
    b = payoff_or_zero(np.array([rate]), np.array([delay]), delta)[0]
    assert a == pytest.approx(b, rel=1e-14)
    assert a == pytest.approx(_payoff_oracle(rate, delay, delta), rel=1e-12)


@given(st.floats(0.0, 1.0), st.integers(1, 8), st.sampled_from([LITERAL, EXPECTED]))
def test_delivery_factor_routes_agree(pt, D, mode):
    a = delivery_factor(pt, D, mode)
    b = delivery_factor(np.array([pt]), D, mode)[0]
    assert a == pytest.approx(b, rel=1e-13)
    assert 0.0 <= delivery_factor(pt, D, LITERAL) <= 1.0
    assert 1.0 - 1e-12 <= delivery_factor(pt, D, EXPECTED) <= D + 1e-12
