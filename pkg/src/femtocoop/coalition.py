"""Coalition game: partitions, distributed formation, stability and the recursive-core oracle.

Players are the FUEs and the MUEs of one round. A cooperative coalition is one
relay FUE plus the MUEs leasing spectrum to it; every other player is a singleton.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .engine import Evaluation, PartitionState, RoundModel
from .leaseopt import LeaseProblem, LeaseSolution, negotiate_alpha
from .traffic import LeaseTerms, Payoff

# relative tolerance for payoff comparisons between separately evaluated partitions
_TOL = 1e-9


class PartitionError(ValueError):
    """Partition is not a valid coalition structure."""


class OracleRefused(ValueError):
    """Too many players for exhaustive enumeration."""


@dataclass(frozen=True)
class Coalition:
    relay_fue: int | None
    mue_ids: frozenset
    lease: tuple = ()  # ((mue_id, LeaseTerms), ...)

    @property
    def cooperative(self) -> bool:
        return self.relay_fue is not None and len(self.mue_ids) > 0

    @property
    def size(self) -> int:
        return len(self.mue_ids) + (self.relay_fue is not None)

    def terms(self, m: int) -> LeaseTerms:
        return dict(self.lease)[m]


@dataclass(frozen=True)
class Partition:
    coalitions: tuple

    @classmethod
    def from_state(cls, state: PartitionState, n_fues: int) -> "Partition":
        out = []
        for l in range(n_fues):
            mem = np.flatnonzero(state.owner == l)
            lease = tuple(
                (int(m), LeaseTerms(float(state.alpha[m]), float(state.beta[m]), float(state.p_relay[m]), float(state.p_own[m])))
                for m in mem
            )
            out.append(Coalition(l, frozenset(int(m) for m in mem), lease))
        for m in np.flatnonzero(state.owner < 0):
            out.append(Coalition(None, frozenset([int(m)])))
        return cls(tuple(out))

    def to_state(self, n_fues: int, n_mues: int) -> PartitionState:
        self.validate(n_fues, n_mues)
        st = PartitionState.singletons(n_mues)
        for c in self.coalitions:
            if not c.cooperative:
                continue
            for m, t in c.lease:
                st.owner[m] = c.relay_fue
                st.alpha[m], st.beta[m], st.p_relay[m], st.p_own[m] = t.alpha, t.beta, t.relay_power, t.own_power
        return st

    def validate(self, n_fues: int, n_mues: int) -> None:
        fues, mues = [], []
        for c in self.coalitions:
            if c.relay_fue is None:
                if len(c.mue_ids) != 1 or c.lease:
                    raise PartitionError("a coalition without an FUE must be a single MUE")
            else:
                fues.append(c.relay_fue)
                leased = {m for m, _ in c.lease}
                if leased != set(c.mue_ids):
                    raise PartitionError(f"coalition of FUE {c.relay_fue} lacks lease terms for some members")
                if any(t.alpha <= 0 for _, t in c.lease):
                    raise PartitionError(f"coalition of FUE {c.relay_fue} has a zero lease")
            mues.extend(c.mue_ids)
        if sorted(fues) != list(range(n_fues)):
            raise PartitionError("every FUE must appear in exactly one coalition")
        if sorted(mues) != list(range(n_mues)):
            raise PartitionError("every MUE must appear in exactly one coalition")

    def cooperative(self) -> list[Coalition]:
        return [c for c in self.coalitions if c.cooperative]

    def to_csv(self) -> str:
        rows = ["coalition_id,fue_id,mue_ids,alpha,beta"]
        for i, c in enumerate(self.coalitions):
            ms = sorted(c.mue_ids)
            lease = dict(c.lease)
            fue = "" if c.relay_fue is None else str(c.relay_fue)
            alpha = ";".join(repr(lease[m].alpha) for m in ms if m in lease)
            beta = ";".join(repr(lease[m].beta) for m in ms if m in lease)
            rows.append(f"{i},{fue},{';'.join(map(str, ms))},{alpha},{beta}")
        return "\n".join(rows) + "\n"


@dataclass
class Outcome:
    partition: Partition
    x_fue: np.ndarray
    x_mue: np.ndarray
    evaluation: Evaluation | None = field(default=None, repr=False)
    delta: float = 0.5

    @property
    def vector(self) -> np.ndarray:
        """Payoffs ordered FUEs first, then MUEs."""
        return np.concatenate([self.x_fue, self.x_mue])

    @property
    def payoff_vector(self) -> dict:
        ev = self.evaluation
        out = {}
        for l, x in enumerate(self.x_fue):
            out[("fue", l)] = Payoff(float(x), float(ev.rate_fue[l]), float(ev.delay_fue[l]), self.delta) if ev else x
        for m, x in enumerate(self.x_mue):
            out[("mue", m)] = Payoff(float(x), float(ev.rate_mue[m]), float(ev.delay_mue[m]), self.delta) if ev else x
        return out


def prefers(y, x) -> bool:
    """y >_S x: no member worse off, at least one strictly better."""
    y, x = np.asarray(y, dtype=float), np.asarray(x, dtype=float)
    tol = _TOL * np.maximum(np.abs(x), np.abs(y))
    return bool(np.all(y >= x - tol) and np.any(y > x + tol))


def evaluate_partition(model: RoundModel, partition: Partition) -> Outcome:
    state = partition.to_state(model.F, model.M)
    ev = model.evaluate(state)
    return Outcome(partition, ev.x_fue, ev.x_mue, ev, model.params.delta)


def interferer_discovery(model: RoundModel) -> tuple[list[list[int]], list[list[int]]]:
    """Per FUE: in-range MUEs by descending RSSI. Per MUE: in-range FUEs likewise."""
    return model.candidates, model.mue_prefs


# ---------------------------------------------------------------- negotiation
def _signature(pb: LeaseProblem) -> tuple:
    f, j, mem = pb.fue, pb.joiner, pb.members
    return (
        j.ref_payoff, f.native_rate, f.native_window, f.own_slices, f.relay_capacity,
        f.relay_load, f.lam_own, f.ref_payoff, f.native_lost,
        tuple(mem.rate.tolist()), tuple(mem.first_hop_delay.tolist()), tuple(mem.ref_payoff.tolist()),
    )


class Negotiator:
    """Evaluates join offers; caches results keyed on the full problem inputs."""

    def __init__(self, model: RoundModel):
        self.model = model
        self._cache: dict = {}
        self.calls = 0

    def offer(self, state: PartitionState, ev: Evaluation, m: int, l: int) -> LeaseSolution | None:
        model = self.model
        if not model.in_range[m, l] or state.owner[m] == l:
            return None
        if state.size(l) >= model.params.max_coalition_size:
            return None
        if model.join_upper_bound(m, l) <= ev.x_mue[m]:
            return None
        pb = model.join_problem(state, ev, m, l)
        sig = _signature(pb)
        hit = self._cache.get((m, l))
        if hit is not None and hit[0] == sig:
            return hit[1]
        self.calls += 1
        sol = negotiate_alpha(pb)
        self._cache[(m, l)] = (sig, sol)
        return sol


def _terms(state: PartitionState, m: int) -> LeaseTerms:
    return LeaseTerms(float(state.alpha[m]), float(state.beta[m]), float(state.p_relay[m]), float(state.p_own[m]))


def _apply(state: PartitionState, m: int, l: int, terms: LeaseTerms | None) -> PartitionState:
    new = state.copy()
    if terms is None:
        new.owner[m] = -1
        new.alpha[m] = new.beta[m] = new.p_relay[m] = new.p_own[m] = 0.0
    else:
        new.owner[m] = l
        new.alpha[m], new.beta[m], new.p_relay[m], new.p_own[m] = terms.alpha, terms.beta, terms.relay_power, terms.own_power
    return new


def _dissolve(state: PartitionState, l: int) -> PartitionState:
    new = state.copy()
    mem = new.owner == l
    new.owner[mem] = -1
    for arr in (new.alpha, new.beta, new.p_relay, new.p_own):
        arr[mem] = 0.0
    return new


class LeaseBook:
    """Lease terms of a coalition as a function of its FUE and member set.

    Members join one at a time in the FUE's discovery order, each negotiating
    against the standing payoffs of the partial coalition, starting from the
    all-singleton partition. Members refused in one pass are retried after
    later ones joined; members never admitted are returned as left out.
    Because the terms depend only on (FUE, members), every partition has one
    payoff vector, shared by the formation dynamics and the oracle.
    """

    def __init__(self, model: RoundModel):
        self.model = model
        self.negotiator = Negotiator(model)
        self._steps: dict = {}
        self._sets: dict = {}
        # join moves that failed the local screen, keyed by all of its inputs
        self.rejected: set = set()

    def lease(self, l: int, mues) -> tuple[frozenset, tuple]:
        """(admitted members, ((mue, LeaseTerms), ...) in join order)."""
        key = (l, frozenset(int(m) for m in mues))
        if key in self._sets:
            return self._sets[key]
        model = self.model
        pending = [m for m in model.candidates[l] if m in key[1]]
        state, ev = PartitionState.singletons(model.M), model.baseline
        joined: list[int] = []
        progress = True
        while progress and pending:
            progress = False
            for m in list(pending):
                res = self._step(l, tuple(joined), m, state, ev)
                if res is not None:
                    state, ev = res
                    joined.append(m)
                    pending.remove(m)
                    progress = True
        out = (frozenset(joined), tuple((m, _terms(state, m)) for m in joined))
        self._sets[key] = out
        return out

    def _step(self, l, prefix, m, state, ev):
        key = (l, prefix, m)
        if key not in self._steps:
            sol = self.negotiator.offer(state, ev, m, l)
            if sol is None:
                self._steps[key] = None
            else:
                new = _apply(state, m, l, sol.terms)
                mem = new.members(l)
                ev = self.model.evaluate_local(l, mem, new.alpha[mem], new.beta[mem], new.p_relay[mem], new.p_own[mem])
                self._steps[key] = (new, ev)
        return self._steps[key]

    def window(self, l: int, mues) -> float:
        """Native window of FUE l once re-leased to ``mues``."""
        _, terms = self.lease(l, mues)
        return min((t.alpha for _, t in terms), default=1.0)


def _set_coalition(state: PartitionState, l: int, terms) -> PartitionState:
    new = _dissolve(state, l)
    for m, t in terms:
        if new.owner[m] >= 0 and new.owner[m] != l:
            raise PartitionError(f"MUE {m} already belongs to FUE {new.owner[m]}")
        new = _apply(new, m, l, t)
    return new


def _move(book: LeaseBook, state: PartitionState, m: int, l: int) -> PartitionState | None:
    """m leaves its coalition (re-leased without it) and joins l, or stays alone if l < 0."""
    old = int(state.owner[m])
    new = state
    if old >= 0:
        rest = set(int(k) for k in state.members(old)) - {m}
        new = _set_coalition(new, old, book.lease(old, rest)[1])
    if l < 0:
        return new if old >= 0 else _apply(new, m, -1, None)
    target = set(int(k) for k in new.members(l)) | {m}
    admitted, terms = book.lease(l, target)
    if admitted != target:
        return None
    return _set_coalition(new, l, terms)


def _gain(new: float, old: float) -> bool:
    return new > old + _TOL * abs(old)


def _join_holds(model, ev0: Evaluation, ev1: Evaluation, state1: PartitionState, m: int, l: int, members) -> bool:
    """Re-check the Pareto rule on the evaluated partition.

    Also vetoes a join whose interference pushes any cooperating player
    elsewhere down to its non-cooperative payoff.
    """
    if not (_gain(ev1.x_mue[m], ev0.x_mue[m]) and _gain(ev1.x_fue[l], ev0.x_fue[l])):
        return False
    if not all(ev1.x_mue[k] >= ev0.x_mue[k] * (1.0 - _TOL) for k in members):
        return False
    return not _below_baseline(model, state1, ev1)


def _below_baseline(model, state: PartitionState, ev: Evaluation) -> bool:
    base = model.baseline
    mem = state.owner >= 0
    if np.any(ev.x_mue[mem] <= base.x_mue[mem]):
        return True
    heads = np.unique(state.owner[mem])
    return bool(np.any(ev.x_fue[heads] <= base.x_fue[heads]))


@dataclass
class Formation:
    state: PartitionState
    evaluation: Evaluation
    iterations: int
    negotiations: int

    def partition(self, n_fues: int) -> Partition:
        return Partition.from_state(self.state, n_fues)


def _try_join(model, book, state, ev, m, l, switch=True):
    """Evaluated move of m into l's coalition when the Pareto rule accepts it, else None."""
    return _try_group(model, book, state, ev, (m,), l, switch)


def _try_group(model, book, state, ev, movers, l, switch=True):
    """Evaluated move of every MUE in ``movers`` into l's coalition, or None.

    Accepted when each mover and the FUE strictly gain and no current member
    of l loses. ``switch=False`` admits only MUEs outside any coalition.
    """
    if any(state.owner[m] == l or not model.in_range[m, l] for m in movers):
        return None
    if not switch and any(state.owner[m] >= 0 for m in movers):
        return None
    if state.size(l) + len(movers) > model.params.max_coalition_size:
        return None
    if any(model.join_upper_bound(m, l) <= ev.x_mue[m] for m in movers):
        return None
    members = [int(k) for k in state.members(l)]
    # every input of the local screen; a failed screen is remembered
    co = int(model.co_mue[l])
    owners = tuple(int(state.owner[k]) for k in movers + ((co,) if co >= 0 else ()))
    sets = tuple(frozenset(int(k) for k in state.members(o)) if o >= 0 else None for o in owners)
    screen_key = (
        l, tuple(movers), tuple(members), owners, sets, float(ev.x_fue[l]),
        tuple(float(ev.x_mue[k]) for k in movers), tuple(float(ev.x_mue[k]) for k in members),
    )
    if screen_key in book.rejected:
        return None
    new = state
    for m in movers:
        old = int(new.owner[m])
        if old >= 0:
            rest = set(int(k) for k in new.members(old)) - {m}
            new = _set_coalition(new, old, book.lease(old, rest)[1])
    target = set(int(k) for k in new.members(l)) | set(movers)
    admitted, terms = book.lease(l, target)
    if admitted != target:
        book.rejected.add(screen_key)
        return None
    new = _set_coalition(new, l, terms)
    # exact local screen before the full evaluation
    x_l, idx, x_idx = model.coalition_payoffs(new, l)
    local = dict(zip(idx.tolist(), x_idx.tolist()))
    if (
        not _gain(x_l, ev.x_fue[l])
        or not all(_gain(local[m], ev.x_mue[m]) for m in movers)
        or not all(local[k] >= ev.x_mue[k] * (1.0 - _TOL) for k in members)
    ):
        book.rejected.add(screen_key)
        return None
    ev1 = model.evaluate(new)
    if not all(_gain(ev1.x_mue[m], ev.x_mue[m]) for m in movers):
        return None
    if not _join_holds(model, ev, ev1, new, movers[0], l, members):
        return None
    return new, ev1


def _try_groups(model, book, state, ev, l, switch=True):
    """First acceptable multi-MUE move into l among its leading candidates.

    Subsets of the first ``group_candidates`` discovery entries are tried by
    increasing size, then by rank.
    """
    p = model.params
    room = p.max_coalition_size - state.size(l)
    head = [m for m in model.candidates[l][: p.group_candidates] if state.owner[m] != l]
    for k in range(2, min(room, len(head)) + 1):
        for group in itertools.combinations(head, k):
            res = _try_group(model, book, state, ev, group, l, switch)
            if res:
                return res
    return None


def _leave_windows(book: LeaseBook, state: PartitionState) -> np.ndarray:
    w = np.full(len(state.owner), np.nan)
    for m in np.flatnonzero(state.owner >= 0):
        l = int(state.owner[m])
        w[m] = book.window(l, set(int(k) for k in state.members(l)) - {int(m)})
    return w


def _repair(model: RoundModel, book: LeaseBook, state: PartitionState, ev: Evaluation):
    """Apply departures: profitable ones, and withdrawal of anyone at or below the baseline.

    Candidates come from the closed-form departure payoffs; each departure is
    applied with a full re-evaluation before the next one is looked for.
    """
    base = model.baseline
    changed = False
    while True:
        x_dis, x_leave = model.departure_payoffs(state, ev, _leave_windows(book, state))
        move = None
        for l in np.unique(state.owner[state.owner >= 0]):
            l = int(l)
            if ev.x_fue[l] <= base.x_fue[l] or _gain(x_dis[l], ev.x_fue[l]):
                move = _dissolve(state, l)
                break
            for m in state.members(l):
                m = int(m)
                if ev.x_mue[m] <= base.x_mue[m] or _gain(x_leave[m], ev.x_mue[m]):
                    move = _move(book, state, m, -1)
                    break
            if move is not None:
                break
        if move is None:
            return state, ev, changed
        state, ev, changed = move, model.evaluate(move), True


def form_coalitions(model: RoundModel, max_sweeps: int | None = None, book: LeaseBook | None = None) -> Formation:
    """Distributed formation; the returned iteration count is the number of sweeps.

    Mutual-best pairs are tried first, then FUEs in id order each accept at most
    one new member per sweep, walking their candidate list from the strongest
    interferer, then trying groups of leading candidates. Members of another coalition
    may switch when the Pareto rule holds for the receiving coalition. A
    departure pass follows every sweep. If a partition repeats, switching is
    turned off for the remaining sweeps.
    """
    p = model.params
    book = book or LeaseBook(model)
    state = PartitionState.singletons(model.M)
    ev = model.baseline
    for l in range(model.F):
        cand = model.candidates[l]
        if not cand:
            continue
        m = cand[0]
        if state.owner[m] < 0 and model.mue_prefs[m] and model.mue_prefs[m][0] == l:
            res = _try_join(model, book, state, ev, m, l)
            if res:
                state, ev = res
    limit = max_sweeps or p.max_sweeps or (model.F + model.M) * p.max_coalition_size
    limit = max(limit, 1)
    seen = {state.key()}
    sweeps = 0
    switch = True
    while sweeps < limit:
        sweeps += 1
        changed = False
        for l in range(model.F):
            if state.size(l) >= p.max_coalition_size:
                continue
            res = None
            for m in model.candidates[l]:
                res = _try_join(model, book, state, ev, m, l, switch)
                if res:
                    break
            if res is None:
                res = _try_groups(model, book, state, ev, l, switch)
            if res:
                state, ev = res
                changed = True
        state, ev, left = _repair(model, book, state, ev)
        changed |= left
        if not changed:
            break
        key = state.key()
        if key in seen:
            if not switch:
                break
            switch = False
        seen.add(key)
    return Formation(state, ev, sweeps, book.negotiator.calls)


@dataclass(frozen=True)
class Stability:
    stable: bool
    certificate: tuple | None = None

    def __bool__(self) -> bool:
        return self.stable


def is_stable(model: RoundModel, state: PartitionState, book: LeaseBook | None = None) -> Stability:
    """Individual rationality, then every admissible single move.

    Every deviation is re-evaluated on the full partition. Certificates:
    ("fue-leave", l), ("mue-leave", m) or ("join", m, l, LeaseTerms).
    """
    book = book or LeaseBook(model)
    ev = model.evaluate(state)
    for l in np.unique(state.owner[state.owner >= 0]):
        l = int(l)
        if _gain(model.evaluate(_dissolve(state, l)).x_fue[l], ev.x_fue[l]):
            return Stability(False, ("fue-leave", l))
        for m in state.members(l):
            m = int(m)
            if _gain(model.evaluate(_move(book, state, m, -1)).x_mue[m], ev.x_mue[m]):
                return Stability(False, ("mue-leave", m))
    for l in range(model.F):
        for m in model.candidates[l]:
            res = _try_join(model, book, state, ev, m, l)
            if res:
                return Stability(False, ("join", m, l, _terms(res[0], m)))
    return Stability(True)


# ---------------------------------------------------------------------- oracle
class CoreOracle:
    """Exhaustive recursive core over one round's players.

    Players are indexed FUEs first, then MUEs. An arrangement of a player set
    maps each of its MUEs to an FUE of the same set or to -1; a coalition is
    admissible when the lease book admits all its members. ``optimistic=False``
    requires a deviation to pay off against every residual outcome in A(rest);
    ``True`` against at least one.
    """

    def __init__(self, model: RoundModel, max_players: int = 8, optimistic: bool = False, book: LeaseBook | None = None):
        n = model.F + model.M
        if n > max_players:
            raise OracleRefused(f"{n} players exceed the limit of {max_players}")
        self.model, self.n, self.optimistic = model, n, optimistic
        self.F, self.M = model.F, model.M
        self.book = book or LeaseBook(model)
        self._payoffs: dict = {}
        self._arr: dict = {}
        self._A: dict = {}

    # -- building blocks
    def admissible(self, l: int, mues: frozenset) -> bool:
        return self.book.lease(l, mues)[0] == mues

    def state_of(self, assign: tuple) -> PartitionState:
        st = PartitionState.singletons(self.M)
        for l in sorted(set(a for a in assign if a >= 0)):
            mues = frozenset(m for m, a in enumerate(assign) if a == l)
            admitted, terms = self.book.lease(l, mues)
            if admitted != mues:
                raise PartitionError(f"coalition of FUE {l} with {sorted(mues)} is not admissible")
            st = _set_coalition(st, l, terms)
        return st

    def payoffs(self, assign: tuple) -> np.ndarray:
        assign = tuple(int(a) for a in assign)
        if assign not in self._payoffs:
            ev = self.model.evaluate(self.state_of(assign))
            self._payoffs[assign] = np.concatenate([ev.x_fue, ev.x_mue])
        return self._payoffs[assign]

    def arrangements(self, mask: int) -> list[tuple]:
        """Valid arrangements of a player set, as {mue: fue or -1} tuples over its MUEs."""
        if mask in self._arr:
            return self._arr[mask]
        fues = [l for l in range(self.F) if mask >> l & 1]
        mues = [m for m in range(self.M) if mask >> (self.F + m) & 1]
        choices = [[-1] + [l for l in fues if self.model.in_range[m, l]] for m in mues]
        out = []
        for combo in itertools.product(*choices):
            ok = True
            for l in set(c for c in combo if c >= 0):
                group = frozenset(m for m, c in zip(mues, combo) if c == l)
                if not self.admissible(l, group):
                    ok = False
                    break
            if ok:
                out.append(tuple(zip(mues, combo)))
        self._arr[mask] = out
        return out

    def _full(self, *parts) -> tuple:
        assign = [-1] * self.M
        for part in parts:
            for m, a in part:
                assign[m] = a
        return tuple(assign)

    def _members(self, mask: int) -> np.ndarray:
        return np.array([i for i in range(self.n) if mask >> i & 1], dtype=int)

    # -- recursion
    def residual(self, mask: int, outside: tuple) -> list[tuple]:
        """A(R): residual core of ``mask`` given the outside arrangement, else all its outcomes."""
        key = (mask, outside)
        if key in self._A:
            return self._A[key]
        outs = self.arrangements(mask)
        if mask == 0:
            self._A[key] = outs
            return outs
        core = [o for o in outs if self.dominating(mask, outside, self.payoffs(self._full(outside, o))) is None]
        self._A[key] = core if core else outs
        return self._A[key]

    def dominating(self, mask: int, outside: tuple, x: np.ndarray, max_size: int | None = None):
        """A deviation (S mask, S arrangement) dominating payoff vector x inside ``mask``, or None."""
        sub = mask
        while sub:
            s = sub
            sub = (sub - 1) & mask
            idx = self._members(s)
            if max_size is not None and len(idx) > max_size:
                continue
            rest = mask & ~s
            for pi in self.arrangements(s):
                ys = self.residual(rest, tuple(sorted(outside + pi)))
                wins = [prefers(self.payoffs(self._full(outside, pi, y))[idx], x[idx]) for y in ys]
                if (any(wins) if self.optimistic else all(wins)) and wins:
                    return s, pi
        return None

    def core(self) -> list[tuple]:
        """Full assignments of the recursive core of the whole game."""
        full = (1 << self.n) - 1
        core = [o for o in self.arrangements(full) if self.dominating(full, (), self.payoffs(self._full(o))) is None]
        return [self._full(o) for o in core]

    def outcome(self, assign: tuple) -> Outcome:
        st = self.state_of(assign)
        ev = self.model.evaluate(st)
        return Outcome(Partition.from_state(st, self.F), ev.x_fue, ev.x_mue, ev, self.model.params.delta)

    def small_deviation(self, x: np.ndarray, max_size: int = 2):
        """Deviation by at most ``max_size`` players dominating x, or None."""
        full = (1 << self.n) - 1
        return self.dominating(full, (), np.asarray(x, dtype=float), max_size=max_size)


def recursive_core_oracle(model: RoundModel, max_players: int = 8, optimistic: bool = False) -> list[Outcome]:
    oracle = CoreOracle(model, max_players, optimistic)
    return [oracle.outcome(a) for a in oracle.core()]


def oracle_json(outcomes: list[Outcome]) -> str:
    data = []
    for o in outcomes:
        data.append({
            "partition": [
                {"fue_id": c.relay_fue, "mue_ids": sorted(c.mue_ids), "alpha": [t.alpha for _, t in c.lease], "beta": [t.beta for _, t in c.lease]}
                for c in o.partition.coalitions
            ],
            "payoffs": {"fue": [float(v) for v in o.x_fue], "mue": [float(v) for v in o.x_mue]},
        })
    return json.dumps({"outcomes": data}, indent=2, sort_keys=True)
