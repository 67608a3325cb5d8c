"""Monte-Carlo rounds, access-policy baselines, sweeps and report files."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .channel import sample_gains
from .coalition import form_coalitions, is_stable
from .config import ScenarioConfig
from .engine import ModelParams, PartitionState, RoundModel
from .topology import InfeasibleAssignment, NetworkTopology, fap_conflicts, generate_topology
from .traffic import delivery_factor, md1_delay, payoff_or_zero

ALPHA_BINS = np.linspace(0.0, 1.0, 21)
CDF_KNOTS = 21


def round_seeds(master: int, point: int, rnd: int) -> tuple[int, int]:
    """Seeds for (topology, shadowing) of one round.

    Derived from SeedSequence(master, spawn_key=(point, round)), so a round's
    draws never depend on how rounds are scheduled across workers.
    """
    ss = np.random.SeedSequence(entropy=master, spawn_key=(point, rnd))
    a, b = ss.generate_state(2)
    return int(a), int(b)


def build_round(cfg: ScenarioConfig, topo_seed: int, gain_seed: int, mue_x: float | None = None) -> RoundModel:
    topo = generate_topology(cfg.layout(), topo_seed)
    if mue_x is not None:
        topo = place_probe_mue(topo, mue_x)
    gains = sample_gains(topo, cfg.channel, np.random.default_rng(gain_seed))
    return RoundModel(topo, gains, ModelParams.from_config(cfg))


def place_probe_mue(topo: NetworkTopology, offset: float) -> NetworkTopology:
    """Put MUE 0 at ``offset`` metres along +x from FAP 0, on FUE 0's subchannel."""
    if topo.n_faps == 0 or topo.n_mues == 0:
        raise InfeasibleAssignment("position sweep needs at least one FAP and one MUE")
    mue_xy = topo.mue_xy.copy()
    mue_xy[0] = topo.fap_xy[0] + np.array([offset, 0.0])
    mue_sub = topo.mue_sub.copy()
    target = topo.fue_sub[np.flatnonzero(topo.fue_fap == 0)[0]]
    holder = np.flatnonzero(mue_sub == target)
    if len(holder):
        mue_sub[holder[0]] = mue_sub[0]
    mue_sub[0] = target
    return replace(topo, mue_xy=mue_xy, mue_sub=mue_sub)


@dataclass
class RoundMetrics:
    policy: str
    seed: tuple
    skipped: bool = False
    mue_gain: float = 0.0
    fue_gain: float = 0.0
    mue_payoff: float = 0.0
    mue_payoff_nc: float = 0.0
    fue_payoff: float = 0.0
    fue_payoff_nc: float = 0.0
    coalition_size: float = 1.0
    coalition_count: int = 0
    iterations: int = 0
    alphas: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    stable: bool = True
    rational: bool = True
    queues_stable: bool = True
    probe_cooperates: bool = False

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _gain(x, ref) -> float:
    ok = ref > 0
    return float(np.mean(x[ok] / ref[ok] - 1.0)) if ok.any() else 0.0


def _summary(policy, seed, model: RoundModel, x_mue, x_fue) -> RoundMetrics:
    base = model.baseline
    return RoundMetrics(
        policy=policy, seed=seed,
        mue_gain=_gain(x_mue, base.x_mue), fue_gain=_gain(x_fue, base.x_fue),
        mue_payoff=float(np.mean(x_mue)) if len(x_mue) else 0.0,
        mue_payoff_nc=float(np.mean(base.x_mue)) if len(x_mue) else 0.0,
        fue_payoff=float(np.mean(x_fue)) if len(x_fue) else 0.0,
        fue_payoff_nc=float(np.mean(base.x_fue)) if len(x_fue) else 0.0,
    )


def baseline_open_access(model: RoundModel):
    """Admit every non-cooperative MUE lying inside an FAP disc as that FAP's guest.

    The guest moves to a secondary subchannel used by no MUE and by no FUE of
    the FAP or its sensing neighbours (interference-free there); without such a
    subchannel it stays on the macrocell. Returns (guest_fap per MUE or -1,
    evaluation with the guests' old subchannels vacated, guest payoffs).
    """
    topo, p = model.topology, model.params
    d = np.linalg.norm(topo.mue_xy[:, None, :] - topo.fap_xy[None, :, :], axis=2) if topo.n_faps and topo.n_mues else np.zeros((topo.n_mues, topo.n_faps))
    neighbours = fap_conflicts(topo.fap_xy, topo.fap_radius, topo.params.sensing_factor) if topo.n_faps else []
    used_by_mue = set(int(k) for k in topo.mue_sub)
    taken: dict[int, set] = {f: set() for f in range(topo.n_faps)}
    for l, f in enumerate(topo.fue_fap):
        taken[int(f)].add(int(topo.fue_sub[l]))
    guest_fap = np.full(topo.n_mues, -1, dtype=int)
    guest_sub: dict[int, int] = {}
    for m in range(topo.n_mues):
        inside = np.flatnonzero(d[m] <= topo.fap_radius) if topo.n_faps else []
        if len(inside) == 0:
            continue
        f = int(inside[np.argmin(d[m, inside])])
        blocked = set(taken[f]) | used_by_mue
        for nb in neighbours[f]:
            blocked |= taken[nb]
        free = [k for k in range(topo.n_subchannels) if k not in blocked]
        if not free:
            continue
        k = free[0]
        guest_fap[m] = f
        guest_sub[m] = k
        taken[f].add(k)
    vacated = guest_fap >= 0
    ev = model.evaluate(PartitionState.singletons(model.M), vacated=vacated)
    x_mue = ev.x_mue.copy()
    for m in np.flatnonzero(vacated):
        g = model.gains.mue_fap[m, guest_fap[m]]
        snr = g * model.p_mue[m] / model.noise
        rate = p.bandwidth * np.log2(1.0 + snr)
        lam = p.lambda_m * delivery_factor(np.exp(-p.gamma_m / snr), p.max_tx, p.arrival_mode)
        x_mue[m] = payoff_or_zero(rate, md1_delay(lam, rate), p.delta)
    return guest_fap, ev, x_mue


def coalition_stats(model: RoundModel, state: PartitionState) -> tuple[float, int, list, list]:
    """Mean size of FUE-headed coalitions, cooperative count, member alphas, centroid distances."""
    topo = model.topology
    sizes = [state.size(l) for l in range(model.F)]
    mean_size = float(np.mean(sizes)) if sizes else 1.0
    coop = sorted(set(int(l) for l in state.owner[state.owner >= 0]))
    dist = []
    for l in coop:
        pts = np.vstack([topo.fue_xy[l][None, :], topo.mue_xy[state.owner == l]])
        dist.append(float(np.linalg.norm(pts.mean(axis=0))))
    alphas = [float(a) for a in state.alpha[state.owner >= 0]]
    return mean_size, len(coop), alphas, dist


def run_round(cfg: ScenarioConfig, seed, policy: str | None = None, mue_x: float | None = None, check_stability: bool = False) -> RoundMetrics:
    """One topology draw evaluated under an access policy.

    ``seed`` is an int or a (topology seed, shadowing seed) pair.
    """
    policy = policy or cfg.access_policy
    seeds = (int(seed), int(seed) + 1) if np.isscalar(seed) else tuple(int(s) for s in seed)
    try:
        model = build_round(cfg, *seeds, mue_x=mue_x)
    except InfeasibleAssignment:
        return RoundMetrics(policy=policy, seed=seeds, skipped=True)
    base = model.baseline
    if policy in ("noncooperative", "closed"):
        return _summary(policy, seeds, model, base.x_mue, base.x_fue)
    if policy == "open":
        _, ev, x_mue = baseline_open_access(model)
        return _summary(policy, seeds, model, x_mue, ev.x_fue)
    if policy != "cooperative":
        raise ValueError(f"unknown policy {policy!r}")
    form = form_coalitions(model)
    st, ev = form.state, form.evaluation
    out = _summary(policy, seeds, model, ev.x_mue, ev.x_fue)
    out.coalition_size, out.coalition_count, out.alphas, out.distances = coalition_stats(model, st)
    out.iterations = form.iterations
    mem = np.flatnonzero(st.owner >= 0)
    heads = np.unique(st.owner[mem])
    out.rational = bool(np.all(ev.x_mue[mem] > base.x_mue[mem]) and np.all(ev.x_fue[heads] > base.x_fue[heads]))
    first_ok = np.all(model.lam_first[mem, st.owner[mem]] < model.mu_first[mem, st.owner[mem]])
    relay_ok = np.all(ev.relay_load[heads] < ev.relay_capacity[heads])
    out.queues_stable = bool(first_ok and relay_ok)
    out.probe_cooperates = bool(model.M and st.owner[0] >= 0)
    if check_stability:
        out.stable = is_stable(model, st).stable
    return out


# ------------------------------------------------------------------ aggregation
def aggregate_cdf(samples, knots: int = CDF_KNOTS) -> list[tuple[float, float]]:
    """Empirical CDF evaluated at ``knots`` evenly spaced sample quantiles."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        return []
    q = np.linspace(0.0, 1.0, knots)
    pts = np.quantile(x, q, method="inverted_cdf")
    return [(float(v), float(np.searchsorted(x, v, side="right") / x.size)) for v in pts]


def mean_stderr(values) -> tuple[float, float, int]:
    v = [float(x) for x in values]
    n = len(v)
    if n == 0:
        return math.nan, math.nan, 0
    mean = math.fsum(v) / n
    if n == 1:
        return mean, 0.0, 1
    var = math.fsum((x - mean) ** 2 for x in v) / (n - 1)
    return mean, math.sqrt(var / n), n


SCALAR_METRICS = (
    "mue_gain", "fue_gain", "mue_payoff", "mue_payoff_nc", "fue_payoff", "fue_payoff_nc",
    "coalition_size", "coalition_count", "iterations",
)


def point_metrics(rounds: list[RoundMetrics]) -> dict:
    """Mean, standard error and count of every reported metric at one sweep point."""
    kept = [r for r in rounds if not r.skipped]
    out = {k: mean_stderr(getattr(r, k) for r in kept) for k in SCALAR_METRICS}
    mue, mue_nc = out["mue_payoff"][0], out["mue_payoff_nc"][0]
    fue, fue_nc = out["fue_payoff"][0], out["fue_payoff_nc"][0]
    out["mue_gain_of_means"] = ((mue / mue_nc - 1.0) if mue_nc else 0.0, math.nan, len(kept))
    out["fue_gain_of_means"] = ((fue / fue_nc - 1.0) if fue_nc else 0.0, math.nan, len(kept))
    out["alpha"] = mean_stderr(a for r in kept for a in r.alphas)
    out["distance"] = mean_stderr(d for r in kept for d in r.distances)
    out["probe_cooperates"] = mean_stderr(float(r.probe_cooperates) for r in kept)
    for flag in ("stable", "rational", "queues_stable"):
        out[flag] = mean_stderr(float(getattr(r, flag)) for r in kept)
    out["skipped"] = (float(len(rounds) - len(kept)), 0.0, len(rounds))
    return out


@dataclass
class MetricsReport:
    scenario: str
    axes: list
    points: list  # [(axis values tuple, metrics dict, alpha histogram, distance cdf)]

    def csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([*self.axes, "metric", "mean", "stderr", "n"])
        for values, metrics, _, _ in self.points:
            for name in sorted(metrics):
                mean, se, n = metrics[name]
                w.writerow([*(repr(v) for v in values), name, repr(float(mean)), repr(float(se)), n])
        return buf.getvalue()

    def json(self) -> str:
        pts = []
        for values, metrics, hist, cdf in self.points:
            pts.append({
                "axes": dict(zip(self.axes, values)),
                "metrics": {k: {"mean": v[0], "stderr": v[1], "n": v[2]} for k, v in metrics.items()},
                "alpha_histogram": {"edges": ALPHA_BINS.tolist(), "counts": hist},
                "distance_cdf": cdf,
            })
        return json.dumps({"scenario": self.scenario, "axes": self.axes, "points": pts}, indent=2, sort_keys=True, allow_nan=True)

    def metric(self, name: str) -> list[tuple[float, float, int]]:
        return [m[name] for _, m, _, _ in self.points]

    def write(self, out_dir, timestamp: str | None = None) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        stamp = timestamp or report_timestamp()
        base = os.path.join(out_dir, f"{self.scenario}_{'-'.join(self.axes) or 'point'}_{stamp}")
        with open(base + ".csv", "w", encoding="utf-8", newline="") as fh:
            fh.write(self.csv())
        with open(base + ".json", "w", encoding="utf-8") as fh:
            fh.write(self.json())
        return base + ".csv", base + ".json"


def report_timestamp() -> str:
    """UTC stamp for file names; SOURCE_DATE_EPOCH pins it for reproducible names."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = time.gmtime(int(epoch)) if epoch else time.gmtime()
    return time.strftime("%Y%m%dT%H%M%SZ", t)


def _task(args):
    cfg, policy, point, values, axes, rnd, check = args
    mue_x = dict(zip(axes, values)).get("mue_x")
    seeds = round_seeds(cfg.seed, point, rnd)
    return (point, rnd), run_round(cfg, seeds, policy, mue_x=mue_x, check_stability=check)


def _point_config(cfg: ScenarioConfig, axes, values) -> ScenarioConfig:
    over = {k: v for k, v in zip(axes, values) if k != "mue_x"}
    return cfg.with_overrides(**over) if over else cfg


def sweep(cfg: ScenarioConfig, policy: str | None = None, jobs: int = 1, rounds: int | None = None, check_stability: bool = False, progress=None) -> MetricsReport:
    """Cartesian product of the config axes, ``rounds`` rounds per point.

    Results are keyed by (point, round) and aggregated in that order, so the
    report does not depend on ``jobs``.
    """
    axes = list(cfg.axes)
    grid = list(itertools.product(*(cfg.axes[a] for a in axes))) if axes else [()]
    n = rounds or cfg.rounds
    tasks = []
    for i, values in enumerate(grid):
        pc = _point_config(cfg, axes, values)
        tasks.extend((pc, policy, i, values, axes, r, check_stability) for r in range(n))
    results: dict = {}
    if jobs > 1:
        import multiprocessing as mp

        with mp.get_context("spawn").Pool(jobs) as pool:
            for key, res in pool.imap_unordered(_task, tasks, chunksize=max(1, len(tasks) // (8 * jobs))):
                results[key] = res
                if progress:
                    progress(len(results), len(tasks))
    else:
        for t in tasks:
            key, res = _task(t)
            results[key] = res
            if progress:
                progress(len(results), len(tasks))
    points = []
    for i, values in enumerate(grid):
        rs = [results[(i, r)] for r in range(n)]
        alphas = [a for r in rs if not r.skipped for a in r.alphas]
        hist = np.histogram(alphas, bins=ALPHA_BINS)[0].tolist()
        cdf = aggregate_cdf([d for r in rs if not r.skipped for d in r.distances])
        points.append((tuple(values), point_metrics(rs), hist, cdf))
    return MetricsReport(cfg.name, axes, points)


# ------------------------------------------------------------------ oracle check
@dataclass
class OracleInstance:
    index: int
    seeds: tuple
    players: int
    stable: bool
    certificate: tuple | None
    undominated_small: bool
    core_member: bool
    core_size: int
    shortfall: float
    partition_csv: str

    def as_dict(self) -> dict:
        d = asdict(self)
        d["certificate"] = None if self.certificate is None else [str(c) for c in self.certificate]
        return d


def oracle_instance(cfg: ScenarioConfig, index: int, max_players: int = 8, optimistic: bool = False) -> OracleInstance:
    """Formation vs the exhaustive recursive core on one small instance."""
    from .coalition import CoreOracle, Partition

    seeds = round_seeds(cfg.seed, 0, index)
    model = build_round(cfg, *seeds)
    oracle = CoreOracle(model, max_players, optimistic)
    form = form_coalitions(model, book=oracle.book)
    stab = is_stable(model, form.state, oracle.book)
    x = np.concatenate([form.evaluation.x_fue, form.evaluation.x_mue])
    core = oracle.core()
    assign = tuple(int(a) for a in form.state.owner)
    member = any(c == assign or np.allclose(oracle.payoffs(c), x, rtol=1e-6, atol=0.0) for c in core)
    shortfall = math.nan
    if core:
        best = max(float(np.sum(oracle.payoffs(c))) for c in core)
        shortfall = (best - float(np.sum(x))) / best if best > 0 else 0.0
    return OracleInstance(
        index=index, seeds=seeds, players=oracle.n, stable=stab.stable, certificate=stab.certificate,
        undominated_small=oracle.small_deviation(x, 2) is None, core_member=member, core_size=len(core),
        shortfall=shortfall, partition_csv=Partition.from_state(form.state, model.F).to_csv(),
    )


def oracle_check(
    cfg: ScenarioConfig, n_instances: int, max_players: int = 8, optimistic: bool = False, sizes=None,
) -> dict:
    """Stability and core agreement over ``n_instances`` small rounds.

    ``sizes`` is a list of (N, M) pairs cycled over the instance index; by
    default every instance uses the configured N and M.
    """
    if sizes:
        base = cfg
        cfgs = [replace(base, N=int(n), M=int(m)) for n, m in sizes]
        rows = [oracle_instance(cfgs[i % len(cfgs)], i, max_players, optimistic) for i in range(n_instances)]
    else:
        rows = [oracle_instance(cfg, i, max_players, optimistic) for i in range(n_instances)]
    short = [r.shortfall for r in rows if not math.isnan(r.shortfall)]
    return {
        "instances": n_instances,
        "stable": sum(r.stable for r in rows) / max(1, n_instances),
        "undominated_small": sum(r.undominated_small for r in rows) / max(1, n_instances),
        "core_member": sum(r.core_member for r in rows) / max(1, n_instances),
        "empty_core": sum(r.core_size == 0 for r in rows),
        "mean_shortfall": math.fsum(short) / len(short) if short else math.nan,
        "counterexamples": [r.as_dict() for r in rows if not (r.stable and r.undominated_small and r.core_member)],
    }
