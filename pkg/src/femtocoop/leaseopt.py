"""Lease negotiation for one MUE joining one FUE's coalition.

The FUE already relays for ``members``; the joiner leases alpha of its superframe,
split by beta into relay time and FUE own time. Relay power P^R = t*P/beta and
own power P^T = (1-t)*P/(1-beta) keep beta*P^R + (1-beta)*P^T = P < P_max.

Relayed packets of all members share one FIFO queue at the FUE, served by the
sum of the members' relay slices (or by the FUE's own rate when
``relay_service == "fue_rate"``).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .traffic import LeaseTerms, delivery_factor, md1_delay, payoff_or_zero

# keeps the power budget strict
_BUDGET_SLACK = 1.0 - 1e-9


@dataclass(frozen=True)
class Joiner:
    mu_first_hop: float
    lam_first_hop: float
    relay_gain: float
    relay_interference: float
    ref_payoff: float


@dataclass(frozen=True)
class FueSide:
    native_rate: float
    native_window: float
    own_slices: float
    relay_capacity: float
    relay_load: float
    lam_own: float
    ref_payoff: float
    # joining MUE shares the FUE's native subchannel
    native_lost: bool = False


@dataclass(frozen=True)
class Members:
    rate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    first_hop_delay: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ref_payoff: np.ndarray = field(default_factory=lambda: np.zeros(0))


@dataclass(frozen=True)
class LeaseProblem:
    joiner: Joiner
    fue: FueSide
    members: Members
    delta: float
    p_max: float
    bandwidth: float
    noise: float
    gamma_l: float
    max_tx: int
    arrival_mode: str = "expected_transmissions"
    half_duplex: bool = True
    relay_service: str = "slice"
    objective: str = "nash"
    alpha_step: float = 0.05
    beta_step: float = 0.01
    power_points: int = 64


@dataclass(frozen=True)
class LeaseSolution:
    terms: LeaseTerms
    joiner_payoff: float
    fue_payoff: float
    member_payoffs: np.ndarray
    joiner_rate: float
    relay_rate: float
    own_rate: float
    relay_arrival: float


def grid(step: float) -> np.ndarray:
    """step, 2*step, ..., up to 1 inclusive."""
    n = int(round(1.0 / step))
    return np.arange(1, n + 1) * (1.0 / n)


def power_grid(points: int) -> np.ndarray:
    """Interior points t = i/(points+1); 2*points+1 refines it."""
    return np.arange(1, points + 1) / (points + 1.0)


def _evaluate(pb: LeaseProblem, alpha, beta, t):
    """Payoffs on the broadcast grid of (alpha, beta, t)."""
    j, f, mem = pb.joiner, pb.fue, pb.members
    budget = pb.p_max * _BUDGET_SLACK
    p_relay = t * budget / beta
    with np.errstate(divide="ignore", invalid="ignore"):
        p_own = np.where(beta < 1.0, (1.0 - t) * budget / np.where(beta < 1.0, 1.0 - beta, 1.0), 0.0)
    floor = j.relay_interference + pb.noise
    mu_relay = pb.bandwidth * np.log2(1.0 + j.relay_gain * p_relay / floor)
    mu_own = pb.bandwidth * np.log2(1.0 + j.relay_gain * p_own / floor)
    pt_relay = np.exp(-pb.gamma_l * floor / (j.relay_gain * p_relay))
    lam_relay = j.lam_first_hop * delivery_factor(pt_relay, pb.max_tx, pb.arrival_mode)

    slice_relay = alpha * beta * mu_relay
    joiner_rate = np.minimum((1.0 - alpha) * j.mu_first_hop, slice_relay)
    native = 0.0 if f.native_lost else f.native_rate
    window = np.minimum(f.native_window, alpha) if pb.half_duplex else 1.0
    own_rate = window * native + f.own_slices + alpha * (1.0 - beta) * mu_own
    load = f.relay_load + lam_relay
    if pb.relay_service == "slice":
        pool = md1_delay(load, f.relay_capacity + slice_relay)
    else:
        pool = md1_delay(load, own_rate)
    first = md1_delay(j.lam_first_hop, j.mu_first_hop)
    x_join = payoff_or_zero(joiner_rate, first + pool, pb.delta)
    x_fue = payoff_or_zero(own_rate, md1_delay(f.lam_own, own_rate), pb.delta)
    ok = (x_join > j.ref_payoff) & (x_fue > f.ref_payoff)
    x_mem = []
    for k in range(len(mem.rate)):
        xm = payoff_or_zero(mem.rate[k], mem.first_hop_delay[k] + pool, pb.delta)
        ok = ok & (xm >= mem.ref_payoff[k])
        x_mem.append(xm)
    return dict(
        ok=ok, x_join=x_join, x_fue=x_fue, x_mem=x_mem, p_relay=p_relay, p_own=p_own,
        joiner_rate=joiner_rate, mu_relay=mu_relay, own_rate=own_rate, lam_relay=lam_relay,
    )


def _score(pb: LeaseProblem, ev):
    if pb.objective == "fue":
        s = ev["x_fue"]
    elif pb.objective == "nash":
        s = (ev["x_join"] - pb.joiner.ref_payoff) * (ev["x_fue"] - pb.fue.ref_payoff)
    else:
        raise ValueError(f"unknown lease objective {pb.objective!r}")
    return np.where(ev["ok"], s, -np.inf)


def _at(x, idx) -> float:
    """Element ``idx`` of the broadcast of ``x`` without materializing it."""
    x = np.asarray(x)
    if x.ndim == 0:
        return float(x)
    sub = idx[len(idx) - x.ndim:]
    return float(x[tuple(i if n > 1 else 0 for i, n in zip(sub, x.shape))])


def _pick(ev, idx, alpha, beta, t) -> LeaseSolution:
    return LeaseSolution(
        terms=LeaseTerms(_at(alpha, idx), _at(beta, idx), _at(ev["p_relay"], idx), _at(ev["p_own"], idx)),
        joiner_payoff=_at(ev["x_join"], idx),
        fue_payoff=_at(ev["x_fue"], idx),
        member_payoffs=np.array([_at(x, idx) for x in ev["x_mem"]]),
        joiner_rate=_at(ev["joiner_rate"], idx),
        relay_rate=_at(ev["mu_relay"], idx),
        own_rate=_at(ev["own_rate"], idx),
        relay_arrival=_at(ev["lam_relay"], idx),
    )


def optimize_lease(pb: LeaseProblem, alpha: float, trace: bool = False):
    """Best (beta, t) for a fixed alpha; None when every point is vetoed.

    ``objective="fue"`` maximizes the FUE payoff; ``"nash"`` maximizes the
    product of the joiner's and the FUE's gains over their reference payoffs.
    """
    if pb.p_max <= 0:
        return (None, None) if trace else None
    beta = grid(pb.beta_step)[:, None]
    t = power_grid(pb.power_points)[None, :]
    a = np.float64(alpha)
    ev = _evaluate(pb, a, beta, t)
    score = _score(pb, ev)
    sol = None
    if np.isfinite(score).any():
        idx = np.unravel_index(int(np.argmax(score)), score.shape)
        sol = _pick(ev, idx, a, beta, t)
    if trace:
        return sol, _trace_rows(a, beta, t, ev, score)
    return sol


def _alpha_screen(pb: LeaseProblem, alpha: np.ndarray) -> np.ndarray:
    """Alphas not ruled out by payoff upper bounds of the joiner and the FUE.

    Joiner: rate <= (1-alpha) mu_R and delay >= first-hop delay.
    FUE: the own slice rate alpha (1-beta) mu_T is largest as beta -> 0 with all
    power on it, and the native window is at most min(window, alpha).
    """
    j, f = pb.joiner, pb.fue
    first = md1_delay(j.lam_first_hop, j.mu_first_hop)
    ok = np.ones(alpha.shape, dtype=bool)
    if first > 0:
        ok &= payoff_or_zero((1.0 - alpha) * j.mu_first_hop, first, pb.delta) > j.ref_payoff
    floor = j.relay_interference + pb.noise
    mu_t = pb.bandwidth * np.log2(1.0 + j.relay_gain * pb.p_max / floor)
    native = 0.0 if f.native_lost else f.native_rate
    window = np.minimum(f.native_window, alpha) if pb.half_duplex else 1.0
    best = window * native + f.own_slices + alpha * mu_t
    ok &= payoff_or_zero(best, md1_delay(f.lam_own, best), pb.delta) > f.ref_payoff
    return ok


def negotiate_alpha(pb: LeaseProblem) -> LeaseSolution | None:
    """MUE picks the alpha maximizing its payoff among mutually rational ones."""
    if pb.p_max <= 0:
        return None
    alpha = grid(pb.alpha_step)
    alpha = alpha[_alpha_screen(pb, alpha)]
    if not alpha.size:
        return None
    alpha = alpha[:, None, None]
    beta = grid(pb.beta_step)[None, :, None]
    t = power_grid(pb.power_points)[None, None, :]
    ev = _evaluate(pb, alpha, beta, t)
    score = _score(pb, ev).reshape(len(alpha), -1)
    feasible = np.isfinite(score).any(axis=1)
    if not feasible.any():
        return None
    best = np.argmax(score, axis=1)
    bis, tis = np.unravel_index(best, (beta.shape[1], t.shape[2]))
    chosen = np.array([_at(ev["x_join"], (k, bis[k], tis[k])) if feasible[k] else -np.inf for k in range(len(alpha))])
    ai = int(np.argmax(chosen))
    bi, ti = int(bis[ai]), int(tis[ai])
    return _pick(ev, (ai, bi, ti), alpha, beta, t)


def _trace_rows(alpha, beta, t, ev, score):
    shape = ev["ok"].shape
    cols = {
        "alpha": np.broadcast_to(alpha, shape),
        "beta": np.broadcast_to(beta, shape),
        "t": np.broadcast_to(t, shape),
        "joiner_payoff": np.broadcast_to(ev["x_join"], shape),
        "fue_payoff": np.broadcast_to(ev["x_fue"], shape),
        "feasible": ev["ok"],
        "score": score,
    }
    return {k: np.asarray(v).reshape(-1) for k, v in cols.items()}


def write_trace_csv(path, rows: dict) -> None:
    """Dump an optimizer trace from ``optimize_lease(..., trace=True)``."""
    keys = list(rows)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(keys) + "\n")
        for i in range(len(rows[keys[0]])):
            fh.write(",".join(repr(float(rows[k][i])) for k in keys) + "\n")
