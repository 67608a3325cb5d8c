"""Vectorized payoff evaluation of a partition for one round.

A partition is held as per-MUE arrays: ``owner[m]`` is the relay FUE index or -1,
plus that MUE's lease terms. Every cooperative coalition is one FUE and the MUEs
pointing at it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .channel import LinkGains
from .config import ScenarioConfig
from .leaseopt import FueSide, Joiner, LeaseProblem, Members
from .topology import NetworkTopology
from .traffic import delivery_factor, md1_delay, payoff_or_zero


@dataclass(frozen=True)
class ModelParams:
    delta: float = 0.5
    max_tx: int = 4
    arrival_mode: str = "expected_transmissions"
    lambda_m: float = 150e3
    lambda_l: float = 150e3
    gamma_m: float = 10.0
    gamma_l: float = 10.0**1.5
    p_max: float = 0.1
    bandwidth: float = 180e3
    d2d_snr_target_db: float | None = None
    half_duplex: bool = True
    relay_service: str = "slice"
    lease_objective: str = "nash"
    alpha_step: float = 0.05
    beta_step: float = 0.01
    power_points: int = 64
    d2d_range: float = 100.0
    cochannel_only: bool = False
    max_coalition_size: int = 4
    group_candidates: int = 4
    max_sweeps: int | None = None
    path_loss_compensation: bool = False
    compensation_target_dbm: float = -80.0

    @classmethod
    def from_config(cls, cfg: ScenarioConfig) -> "ModelParams":
        co, g = cfg.cooperation, cfg.lease
        return cls(
            delta=cfg.delta,
            max_tx=cfg.D,
            arrival_mode=cfg.arrival_mode,
            lambda_m=cfg.lambda_m,
            lambda_l=cfg.lambda_l,
            gamma_m=cfg.gamma_m,
            gamma_l=cfg.gamma_l,
            p_max=cfg.p_max,
            bandwidth=cfg.channel.bandwidth_hz,
            d2d_snr_target_db=co.d2d_snr_target_db,
            half_duplex=co.half_duplex,
            relay_service=co.relay_service,
            lease_objective=co.lease_objective,
            alpha_step=g.alpha_step,
            beta_step=g.beta_step,
            power_points=g.power_points,
            d2d_range=co.d2d_range,
            cochannel_only=co.cochannel_only,
            max_coalition_size=co.max_coalition_size,
            group_candidates=co.group_candidates,
            max_sweeps=co.max_sweeps,
            path_loss_compensation=cfg.path_loss_compensation,
            compensation_target_dbm=cfg.compensation_target_dbm,
        )


@dataclass
class PartitionState:
    owner: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    p_relay: np.ndarray
    p_own: np.ndarray

    @classmethod
    def singletons(cls, n_mues: int) -> "PartitionState":
        z = np.zeros(n_mues)
        return cls(np.full(n_mues, -1, dtype=int), z.copy(), z.copy(), z.copy(), z.copy())

    def copy(self) -> "PartitionState":
        return PartitionState(self.owner.copy(), self.alpha.copy(), self.beta.copy(), self.p_relay.copy(), self.p_own.copy())

    def members(self, fue: int) -> np.ndarray:
        return np.flatnonzero(self.owner == fue)

    def size(self, fue: int) -> int:
        return 1 + int(np.count_nonzero(self.owner == fue))

    def key(self) -> tuple:
        return (tuple(self.owner.tolist()), tuple(self.alpha.tolist()), tuple(self.beta.tolist()), tuple(self.p_relay.tolist()))


@dataclass
class Evaluation:
    x_mue: np.ndarray
    x_fue: np.ndarray
    rate_mue: np.ndarray
    delay_mue: np.ndarray
    rate_fue: np.ndarray
    delay_fue: np.ndarray
    # per FUE
    native_rate: np.ndarray
    window: np.ndarray
    own_slices: np.ndarray
    relay_capacity: np.ndarray
    relay_load: np.ndarray
    native_lost: np.ndarray
    lam_own: np.ndarray
    interference_native: np.ndarray
    interference_mbs: np.ndarray
    # per MUE, meaningful for members only
    first_hop_delay: np.ndarray
    relay_rate: np.ndarray
    relay_arrival: np.ndarray


class RoundModel:
    """Constants of one round (topology + frozen gains) and the partition evaluator."""

    def __init__(self, topology: NetworkTopology, gains: LinkGains, params: ModelParams):
        self.topology, self.gains, self.params = topology, gains, params
        p = params
        self.M, self.F = topology.n_mues, topology.n_fues
        self.noise = gains.noise
        self.fap_of = np.asarray(topology.fue_fap, dtype=int)
        if p.path_loss_compensation:
            target = 10.0 ** ((p.compensation_target_dbm - 30.0) / 10.0)
            self.p_mue = np.minimum(p.p_max, target / gains.mue_mbs)
            self.p_fue = np.minimum(p.p_max, target / gains.fue_own)
        else:
            self.p_mue = np.full(self.M, p.p_max)
            self.p_fue = np.full(self.F, p.p_max)
        self.s_mbs = gains.mue_mbs * self.p_mue
        self.s_own = gains.fue_own * self.p_fue

        # MUE subchannels are orthogonal: at most one MUE per subchannel
        on_sub = np.full(topology.n_subchannels, -1, dtype=int)
        on_sub[topology.mue_sub] = np.arange(self.M)
        self.co_mue = on_sub[topology.fue_sub] if self.F else np.zeros(0, dtype=int)
        self.pair_l = np.flatnonzero(self.co_mue >= 0)
        self.pair_m = self.co_mue[self.pair_l]

        g = gains.mue_fue
        if p.d2d_snr_target_db is None:
            self.p_d2d = np.full(g.shape, p.p_max)
        else:
            target = 10.0 ** (p.d2d_snr_target_db / 10.0) * self.noise
            with np.errstate(divide="ignore"):
                self.p_d2d = np.minimum(p.p_max, target / g)
        snr = g * self.p_d2d / self.noise
        self.mu_first = p.bandwidth * np.log2(1.0 + snr)
        with np.errstate(divide="ignore"):
            pt = np.exp(-p.gamma_m / snr)
        self.lam_first = p.lambda_m * delivery_factor(pt, p.max_tx, p.arrival_mode)
        self.first_delay = md1_delay(self.lam_first, self.mu_first)

        dist = _cross(topology.mue_xy, topology.fue_xy)
        self.distance = dist
        near = dist <= p.d2d_range
        if p.cochannel_only:
            near &= topology.mue_sub[:, None] == topology.fue_sub[None, :]
        self.in_range = near
        rssi = g * self.p_mue[:, None]
        self.rssi = rssi
        self.candidates = [_ranked(np.flatnonzero(near[:, l]), -rssi[near[:, l], l]) for l in range(self.F)]
        self.mue_prefs = [_ranked(np.flatnonzero(near[m]), -rssi[m, near[m]]) for m in range(self.M)]
        self._baseline: Evaluation | None = None
        self._upper: np.ndarray | None = None

    # ------------------------------------------------------------------ evaluate
    def evaluate(self, state: PartitionState, vacated: np.ndarray | None = None) -> Evaluation:
        """Payoffs of every player; ``vacated`` MUEs no longer transmit on their subchannel."""
        p, G = self.params, self.gains
        M, F = self.M, self.F
        owner = state.owner
        idx = np.flatnonzero(owner >= 0)
        l = owner[idx]
        a, b = state.alpha[idx], state.beta[idx]
        floor = self.noise  # relay links on orthogonal MUE subchannels see no MUE interference
        g_rel = G.fue_own[l]
        mu_rel = p.bandwidth * np.log2(1.0 + g_rel * state.p_relay[idx] / floor)
        mu_own = p.bandwidth * np.log2(1.0 + g_rel * state.p_own[idx] / floor)
        with np.errstate(divide="ignore"):
            pt_rel = np.exp(-p.gamma_l * floor / (g_rel * state.p_relay[idx]))
        lam_rel = self.lam_first[idx, l] * delivery_factor(pt_rel, p.max_tx, p.arrival_mode)
        slice_rel = a * b * mu_rel
        # bincount of an empty selection comes back as int
        cap = np.bincount(l, slice_rel, F).astype(float)
        load = np.bincount(l, lam_rel, F).astype(float)
        own_slices = np.bincount(l, a * (1.0 - b) * mu_own, F).astype(float)
        window = np.ones(F)
        if p.half_duplex and len(idx):
            np.minimum.at(window, l, a)
        lost = np.zeros(F, dtype=bool)
        lost[l[self.topology.mue_sub[idx] == self.topology.fue_sub[l]]] = True

        # interference at each FAP on its FUE's native subchannel
        i_nat = np.zeros(F)
        pm, pl = self.pair_m, self.pair_l
        if len(pm):
            om = owner[pm]
            fap = self.fap_of[pl]
            nc = om < 0
            contrib = np.where(nc, self.p_mue[pm] * G.mue_fap[pm, fap], 0.0)
            if vacated is not None:
                contrib[vacated[pm]] = 0.0
            co = (om >= 0) & (om != pl)
            if co.any():
                m2, l2, f2 = pm[co], om[co], fap[co]
                am, bm = state.alpha[m2], state.beta[m2]
                d2d = (1.0 - am) * self.p_d2d[m2, l2] * G.mue_fap[m2, f2]
                relay = am * (bm * state.p_relay[m2] + (1.0 - bm) * state.p_own[m2]) * G.fue_fap[l2, f2]
                contrib[co] = d2d + relay
            i_nat[pl] = contrib
        sinr_nat = self.s_own / (i_nat + self.noise)
        native = np.where(lost, 0.0, p.bandwidth * np.log2(1.0 + sinr_nat))
        with np.errstate(divide="ignore"):
            pt_nat = np.exp(-p.gamma_l / sinr_nat)
        lam_own = p.lambda_l * delivery_factor(pt_nat, p.max_tx, p.arrival_mode)
        use = window if p.half_duplex else np.ones(F)
        rate_fue = use * native + own_slices
        delay_fue = md1_delay(lam_own, rate_fue)
        x_fue = payoff_or_zero(rate_fue, delay_fue, p.delta)

        # MUEs at the MBS see co-channel FUEs for their native window
        i_mbs = np.zeros(M)
        if len(pm):
            duty = use[pl]
            i_mbs = np.bincount(pm, G.fue_mbs[pl] * self.p_fue[pl] * duty, M).astype(float)
        sinr_m = self.s_mbs / (i_mbs + self.noise)
        rate_mue = p.bandwidth * np.log2(1.0 + sinr_m)
        with np.errstate(divide="ignore"):
            pt_m = np.exp(-p.gamma_m / sinr_m)
        lam_m = p.lambda_m * delivery_factor(pt_m, p.max_tx, p.arrival_mode)
        delay_mue = md1_delay(lam_m, rate_mue)
        first = np.zeros(M)
        rel_rate = np.zeros(M)
        rel_arr = np.zeros(M)
        if len(idx):
            coop_rate = np.minimum((1.0 - a) * self.mu_first[idx, l], slice_rel)
            if p.relay_service == "slice":
                pool = md1_delay(load[l], cap[l])
            else:
                pool = md1_delay(load[l], rate_fue[l])
            first[idx] = self.first_delay[idx, l]
            rate_mue[idx] = coop_rate
            delay_mue[idx] = first[idx] + pool
            rel_rate[idx] = mu_rel
            rel_arr[idx] = lam_rel
        x_mue = payoff_or_zero(rate_mue, delay_mue, p.delta)
        return Evaluation(
            x_mue=np.atleast_1d(x_mue), x_fue=np.atleast_1d(x_fue),
            rate_mue=rate_mue, delay_mue=np.atleast_1d(delay_mue),
            rate_fue=rate_fue, delay_fue=np.atleast_1d(delay_fue),
            native_rate=native, window=window, own_slices=own_slices,
            relay_capacity=cap, relay_load=load, native_lost=lost, lam_own=np.atleast_1d(lam_own),
            interference_native=i_nat, interference_mbs=i_mbs,
            first_hop_delay=first, relay_rate=rel_rate, relay_arrival=rel_arr,
        )

    def _coalition(self, l: int, idx, a, b, pr, po, i_nat: float, lost: bool) -> dict:
        """Quantities of FUE l relaying for MUEs ``idx`` given its native interference.

        Coalitions hold a handful of members, so this runs on Python floats.
        """
        p = self.params
        bw, noise, g_rel = p.bandwidth, self.noise, float(self.gains.fue_own[l])
        mu_rel, lam_rel, slices, first = [], [], [], []
        own_slices = 0.0
        for k, m in enumerate(idx):
            ak, bk, prk, pok = float(a[k]), float(b[k]), float(pr[k]), float(po[k])
            mu_rel.append(bw * math.log2(1.0 + g_rel * prk / noise))
            own_slices += ak * (1.0 - bk) * bw * math.log2(1.0 + g_rel * pok / noise)
            pt = math.exp(-p.gamma_l * noise / (g_rel * prk)) if prk > 0 else 0.0
            lam_rel.append(float(self.lam_first[m, l]) * delivery_factor(pt, p.max_tx, p.arrival_mode))
            slices.append(ak * bk * mu_rel[-1])
            first.append(float(self.first_delay[m, l]))
        cap, load = math.fsum(slices), math.fsum(lam_rel)
        window = min(float(x) for x in a) if (p.half_duplex and len(idx)) else 1.0
        sinr = float(self.s_own[l]) / (i_nat + noise)
        native = 0.0 if lost else bw * math.log2(1.0 + sinr)
        pt_nat = math.exp(-p.gamma_l / sinr) if sinr > 0 else 0.0
        lam_own = p.lambda_l * delivery_factor(pt_nat, p.max_tx, p.arrival_mode)
        rate_fue = (window if p.half_duplex else 1.0) * native + own_slices
        delay_fue = md1_delay(lam_own, rate_fue)
        pool = md1_delay(load, cap) if p.relay_service == "slice" else md1_delay(load, rate_fue)
        rate = [min((1.0 - float(a[k])) * float(self.mu_first[m, l]), slices[k]) for k, m in enumerate(idx)]
        delay = [f + pool for f in first]
        return dict(
            mu_rel=np.array(mu_rel), lam_rel=np.array(lam_rel), cap=cap, load=load,
            own_slices=own_slices, window=window, native=native, lam_own=lam_own,
            rate_fue=rate_fue, delay_fue=delay_fue, x_fue=payoff_or_zero(rate_fue, delay_fue, p.delta),
            rate=np.array(rate), first=np.array(first), delay=np.array(delay),
            x=np.array([payoff_or_zero(r, d, p.delta) for r, d in zip(rate, delay)]),
        )

    def _native_interference(self, state: PartitionState, l: int) -> tuple[float, bool]:
        """(interference on l's native subchannel, native link handed to a member)."""
        co = int(self.co_mue[l]) if self.F else -1
        if co < 0:
            return 0.0, False
        G = self.gains
        o = int(state.owner[co])
        if o == l:
            return 0.0, True
        f = self.fap_of[l]
        if o < 0:
            return float(self.p_mue[co] * G.mue_fap[co, f]), False
        am, bm = state.alpha[co], state.beta[co]
        d2d = (1.0 - am) * self.p_d2d[co, o] * G.mue_fap[co, f]
        relay = am * (bm * state.p_relay[co] + (1.0 - bm) * state.p_own[co]) * G.fue_fap[o, f]
        return float(d2d + relay), False

    def coalition_payoffs(self, state: PartitionState, l: int) -> tuple[float, np.ndarray, np.ndarray]:
        """(x_fue[l], members of l, their payoffs) under ``state``; exact without a full evaluation."""
        idx = np.flatnonzero(state.owner == l)
        i_nat, lost = self._native_interference(state, l)
        c = self._coalition(l, idx, state.alpha[idx], state.beta[idx], state.p_relay[idx], state.p_own[idx], i_nat, lost)
        return float(c["x_fue"]), idx, np.atleast_1d(c["x"])

    def evaluate_local(self, l: int, mues, alpha, beta, p_relay, p_own) -> Evaluation:
        """All-singleton partition except FUE l serving ``mues`` with the given terms.

        Exact for FUE l, its members and the MUE on l's native subchannel;
        every other entry keeps its baseline value.
        """
        p, G, base = self.params, self.gains, self.baseline
        idx = np.asarray(mues, dtype=int)
        co = int(self.co_mue[l]) if self.F else -1
        lost = co >= 0 and co in set(idx.tolist())
        i_nat = 0.0 if lost else float(base.interference_native[l])
        c = self._coalition(
            l, idx, np.asarray(alpha, float), np.asarray(beta, float),
            np.asarray(p_relay, float), np.asarray(p_own, float), i_nat, lost,
        )
        ev = Evaluation(**{k: np.array(v, copy=True) for k, v in vars(base).items()})
        ev.native_rate[l], ev.window[l], ev.own_slices[l] = c["native"], c["window"], c["own_slices"]
        ev.relay_capacity[l], ev.relay_load[l], ev.native_lost[l] = c["cap"], c["load"], lost
        ev.lam_own[l], ev.interference_native[l] = c["lam_own"], i_nat
        ev.rate_fue[l], ev.delay_fue[l], ev.x_fue[l] = c["rate_fue"], c["delay_fue"], c["x_fue"]
        if len(idx):
            ev.rate_mue[idx], ev.delay_mue[idx], ev.x_mue[idx] = c["rate"], c["delay"], c["x"]
            ev.first_hop_delay[idx], ev.relay_rate[idx], ev.relay_arrival[idx] = c["first"], c["mu_rel"], c["lam_rel"]
        if co >= 0 and not lost and p.half_duplex:
            i_m = base.interference_mbs[co] + G.fue_mbs[l] * self.p_fue[l] * (c["window"] - 1.0)
            sinr_m = self.s_mbs[co] / (i_m + self.noise)
            rate_m = p.bandwidth * np.log2(1.0 + sinr_m)
            lam_m = p.lambda_m * delivery_factor(np.exp(-p.gamma_m / sinr_m), p.max_tx, p.arrival_mode)
            ev.interference_mbs[co], ev.rate_mue[co] = i_m, rate_m
            ev.delay_mue[co] = md1_delay(lam_m, rate_m)
            ev.x_mue[co] = payoff_or_zero(rate_m, ev.delay_mue[co], p.delta)
        return ev

    @property
    def baseline(self) -> Evaluation:
        """All-singleton (non-cooperative) evaluation."""
        if self._baseline is None:
            self._baseline = self.evaluate(PartitionState.singletons(self.M))
        return self._baseline

    def departure_payoffs(self, state: PartitionState, ev: Evaluation, window_after: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Payoff of each FUE after dissolving its coalition, and of each member after leaving alone.

        Only the departing player's own links change, so both are closed-form
        updates of ``ev``. ``window_after[m]`` is the old FUE's native window
        once m has left; by default the smallest alpha among the other members.
        Entries for players with nothing to leave are nan.
        """
        p, G = self.params, self.gains
        F, M = self.F, self.M
        owner = state.owner
        x_fue = np.full(F, np.nan)
        x_mue = np.full(M, np.nan)
        idx = np.flatnonzero(owner >= 0)
        if not len(idx):
            return x_fue, x_mue
        heads = np.unique(owner[idx])
        # dissolving: the native link comes back; a member on it returns to the MBS at full power
        i_nat = ev.interference_native[heads].copy()
        co = self.co_mue[heads]
        back = (co >= 0) & (owner[np.maximum(co, 0)] == heads)
        if back.any():
            cm = co[back]
            i_nat[back] = self.p_mue[cm] * G.mue_fap[cm, self.fap_of[heads[back]]]
        sinr = self.s_own[heads] / (i_nat + self.noise)
        rate = p.bandwidth * np.log2(1.0 + sinr)
        with np.errstate(divide="ignore"):
            lam = p.lambda_l * delivery_factor(np.exp(-p.gamma_l / sinr), p.max_tx, p.arrival_mode)
        x_fue[heads] = payoff_or_zero(rate, md1_delay(lam, rate), p.delta)

        # leaving alone: singleton MBS link; the old FUE's window may widen
        use = ev.window if p.half_duplex else np.ones(F)
        i_mbs = np.zeros(M)
        if len(self.pair_m):
            i_mbs = np.bincount(self.pair_m, G.fue_mbs[self.pair_l] * self.p_fue[self.pair_l] * use[self.pair_l], M)
        l = owner[idx]
        if p.half_duplex and window_after is not None:
            own = self.co_mue[l] == idx
            i_mbs_m = i_mbs[idx] + np.where(own, G.fue_mbs[l] * self.p_fue[l] * (window_after[idx] - use[l]), 0.0)
        elif p.half_duplex:
            # window without m: smallest alpha among the other members
            order = np.lexsort((state.alpha[idx], l))
            ls, al = l[order], state.alpha[idx][order]
            first = np.r_[True, ls[1:] != ls[:-1]]
            start = np.flatnonzero(first)
            counts = np.diff(np.r_[start, len(ls)])
            lo1 = np.repeat(al[start], counts)
            has2 = np.repeat(counts > 1, counts)
            lo2 = np.repeat(np.where(counts > 1, al[np.minimum(start + 1, len(al) - 1)], 1.0), counts)
            is_min = np.zeros(len(ls), dtype=bool)
            is_min[start] = True
            w_after = np.where(is_min, np.where(has2, lo2, 1.0), lo1)
            w_new = np.empty(len(idx))
            w_new[order] = w_after
            own = self.co_mue[l] == idx
            i_mbs_m = i_mbs[idx] + np.where(own, G.fue_mbs[l] * self.p_fue[l] * (w_new - use[l]), 0.0)
        else:
            i_mbs_m = i_mbs[idx]
        sinr_m = self.s_mbs[idx] / (i_mbs_m + self.noise)
        rate_m = p.bandwidth * np.log2(1.0 + sinr_m)
        with np.errstate(divide="ignore"):
            lam_m = p.lambda_m * delivery_factor(np.exp(-p.gamma_m / sinr_m), p.max_tx, p.arrival_mode)
        x_mue[idx] = payoff_or_zero(rate_m, md1_delay(lam_m, rate_m), p.delta)
        return x_fue, x_mue

    # ------------------------------------------------------------- join problem
    def join_problem(self, state: PartitionState, ev: Evaluation, m: int, l: int) -> LeaseProblem:
        """Lease problem for MUE m joining FUE l's coalition under the current partition."""
        p = self.params
        mem = np.flatnonzero(state.owner == l)
        mem = mem[mem != m]
        if len(mem) != int(np.count_nonzero(state.owner == l)):
            raise ValueError(f"MUE {m} already belongs to FUE {l}")
        members = Members(
            rate=ev.rate_mue[mem],
            first_hop_delay=ev.first_hop_delay[mem],
            ref_payoff=ev.x_mue[mem],
        )
        cochannel = self.topology.mue_sub[m] == self.topology.fue_sub[l]
        fue = FueSide(
            native_rate=float(ev.native_rate[l]),
            native_window=float(ev.window[l]),
            own_slices=float(ev.own_slices[l]),
            relay_capacity=float(ev.relay_capacity[l]),
            relay_load=float(ev.relay_load[l]),
            lam_own=float(ev.lam_own[l]),
            ref_payoff=float(ev.x_fue[l]),
            native_lost=bool(ev.native_lost[l] or cochannel),
        )
        if cochannel and not ev.native_lost[l]:
            # the joiner stops interfering with the native link, but that link is handed over
            fue = replace(fue, native_rate=0.0)
        joiner = Joiner(
            mu_first_hop=float(self.mu_first[m, l]),
            lam_first_hop=float(self.lam_first[m, l]),
            relay_gain=float(self.gains.fue_own[l]),
            relay_interference=0.0,
            ref_payoff=float(ev.x_mue[m]),
        )
        return LeaseProblem(
            joiner=joiner, fue=fue, members=members, delta=p.delta, p_max=p.p_max,
            bandwidth=p.bandwidth, noise=self.noise, gamma_l=p.gamma_l, max_tx=p.max_tx,
            arrival_mode=p.arrival_mode, half_duplex=p.half_duplex, relay_service=p.relay_service,
            objective=p.lease_objective, alpha_step=p.alpha_step, beta_step=p.beta_step,
            power_points=p.power_points,
        )

    def join_upper_bound(self, m: int, l: int) -> float:
        """Payoff the joiner could reach with zero relay delay and the best slice split."""
        if self._upper is None:
            p = self.params
            mu_r = self.mu_first
            mu_l = p.bandwidth * np.log2(1.0 + self.gains.fue_own * p.p_max / self.noise)[None, :]
            tot = mu_r + mu_l
            with np.errstate(divide="ignore", invalid="ignore"):
                rate = np.where(tot > 0, mu_r * mu_l / np.where(tot > 0, tot, 1.0), 0.0)
            d = self.first_delay
            self._upper = np.where(d == 0, np.inf, payoff_or_zero(rate, d, p.delta))
        return float(self._upper[m, l])


def _cross(a, b):
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)


def _ranked(ids: np.ndarray, keys: np.ndarray) -> list[int]:
    """ids sorted by key ascending, ties by lower id."""
    order = np.lexsort((ids, keys))
    return [int(i) for i in ids[order]]
