"""Rates, retransmission-adjusted arrivals, M/D/1 delays and the power payoff.

All functions accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_SCALAR = (float, int, np.floating, np.integer)

LITERAL = "literal"
EXPECTED = "expected_transmissions"


class InfeasibleLease(ValueError):
    """Lease terms violate the relay power budget."""


class UnboundedPayoff(ValueError):
    """Zero delay makes the power metric unbounded."""


@dataclass(frozen=True)
class QueueState:
    arrival: float
    service: float

    @property
    def stable(self) -> bool:
        return self.arrival < self.service


@dataclass(frozen=True)
class LeaseTerms:
    alpha: float
    beta: float
    relay_power: float
    own_power: float

    def satisfies_budget(self, p_max: float) -> bool:
        return self.beta * self.relay_power + (1.0 - self.beta) * self.own_power < p_max


@dataclass(frozen=True)
class Payoff:
    value: float
    rate: float
    delay: float
    delta: float


def _out(x):
    x = np.asarray(x)
    return x.item() if x.ndim == 0 else x


def shannon_rate(bandwidth, sinr):
    return _out(np.asarray(bandwidth, dtype=float) * np.log2(1.0 + np.asarray(sinr, dtype=float)))


def delivery_factor(pt, max_tx: int, mode: str = LITERAL):
    """Per-bit multiplier applied to the offered load under at most ``max_tx`` attempts.

    literal: sum_{d=1..D} Pt (1-Pt)^(d-1) = 1 - (1-Pt)^D.
    expected_transmissions: mean number of attempts, sum_d d Pt (1-Pt)^(d-1) + D (1-Pt)^D.
    """
    if max_tx < 1:
        raise ValueError("max_tx must be >= 1")
    if isinstance(pt, _SCALAR):
        pt = float(pt)
        # 1 - (1-pt)^D without cancellation for tiny pt
        hit = -math.expm1(max_tx * math.log1p(-pt)) if pt < 1.0 else 1.0
        if mode == LITERAL:
            return hit
        if mode == EXPECTED:
            return hit / pt if pt > 0 else float(max_tx)
        raise ValueError(f"unknown arrival mode {mode!r}")
    pt = np.asarray(pt, dtype=float)
    with np.errstate(divide="ignore"):
        hit = np.where(pt < 1.0, -np.expm1(max_tx * np.log1p(-np.minimum(pt, 1.0))), 1.0)
    if mode == LITERAL:
        return _out(hit)
    if mode == EXPECTED:
        return _out(np.where(pt > 0, hit / np.where(pt > 0, pt, 1.0), float(max_tx)))
    raise ValueError(f"unknown arrival mode {mode!r}")


def effective_arrival(lam, pt, max_tx: int, mode: str = LITERAL):
    return _out(np.asarray(lam, dtype=float) * delivery_factor(pt, max_tx, mode))


def md1_delay(arrival, service):
    """arrival / (2 service (service - arrival)); inf when the queue is unstable."""
    if isinstance(arrival, _SCALAR) and isinstance(service, _SCALAR):
        lam, mu = float(arrival), float(service)
        return lam / (2.0 * mu * (mu - lam)) if (lam < mu and mu > 0) else math.inf
    lam = np.asarray(arrival, dtype=float)
    mu = np.asarray(service, dtype=float)
    stable = (lam < mu) & (mu > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where(stable, lam / (2.0 * mu * (mu - lam)), np.inf)
    return _out(d)


def power_payoff(rate, delay, delta):
    """rate^delta / delay^(1-delta); 0 for infinite delay."""
    delta = np.asarray(delta, dtype=float)
    if np.any((delta <= 0.0) | (delta >= 1.0)):
        raise ValueError("delta must lie in (0, 1)")
    mu = np.asarray(rate, dtype=float)
    d = np.asarray(delay, dtype=float)
    if np.any(d == 0):
        raise UnboundedPayoff("zero delay")
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(np.isinf(d), 0.0, mu**delta / d ** (1.0 - delta))
    return _out(x)


def payoff_or_zero(rate, delay, delta):
    """Vectorized payoff used inside the simulator: zero delay (no traffic) maps to 0."""
    if isinstance(rate, _SCALAR) and isinstance(delay, _SCALAR):
        d = float(delay)
        return float(rate) ** delta / d ** (1.0 - delta) if (math.isfinite(d) and d > 0) else 0.0
    mu = np.asarray(rate, dtype=float)
    d = np.asarray(delay, dtype=float)
    ok = np.isfinite(d) & (d > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        x = np.where(ok, mu**delta / np.where(ok, d, 1.0) ** (1.0 - delta), 0.0)
    return _out(x)


def relay_rates(alpha, beta, mu_first_hop, mu_relay_link, mu_own_link=None, native_rate=0.0, native_window=1.0):
    """Cooperative service rates of one coalition.

    Per member m: min((1-a_m) mu_m^R, a_m b_m mu_l^R(m)). The relay FUE's own
    traffic gets sum_m a_m (1-b_m) mu_l^T(m) plus its native-subchannel rate for
    the native window. ``mu_own_link`` defaults to ``mu_relay_link`` (same power
    on both slices).
    """
    a = np.asarray(alpha, dtype=float)
    b = np.asarray(beta, dtype=float)
    if np.any((a <= 0) | (a > 1) | (b <= 0) | (b > 1)):
        raise InfeasibleLease("alpha and beta must lie in (0, 1]")
    mr = np.asarray(mu_first_hop, dtype=float)
    lr = np.asarray(mu_relay_link, dtype=float)
    lt = lr if mu_own_link is None else np.asarray(mu_own_link, dtype=float)
    mue = np.minimum((1.0 - a) * mr, a * b * lr)
    fue = float(np.sum(a * (1.0 - b) * lt)) + native_window * native_rate
    return _out(mue), fue


def relay_arrival(lam_l, member_arrivals, pt_l, max_tx: int, mode: str = LITERAL):
    """FUE effective load carrying its own and every member's traffic."""
    total = float(lam_l) + float(np.sum(member_arrivals))
    return total * float(delivery_factor(pt_l, max_tx, mode))


def relayed_arrival(member_arrivals, pt_l, max_tx: int, mode: str = LITERAL):
    """The relayed share of the FUE load (members' traffic only)."""
    return float(np.sum(member_arrivals)) * float(delivery_factor(pt_l, max_tx, mode))


def coop_delay(lam_m, mu_first_hop, lam_relay, mu_relay):
    """Two-hop delay of a member: D2D hop plus the FUE relay queue."""
    return _out(np.asarray(md1_delay(lam_m, mu_first_hop)) + np.asarray(md1_delay(lam_relay, mu_relay)))


def coalition_value(payoffs, size: int, alphas) -> float:
    alphas = np.asarray(alphas, dtype=float)
    if size > 1 and alphas.size and np.all(alphas > 0):
        return float(np.sum(payoffs))
    return 0.0
