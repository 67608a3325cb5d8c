"""Two-tier network layout and subchannel assignment."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
from dataclasses import dataclass, replace

import numpy as np


class InfeasibleAssignment(RuntimeError):
    """The subchannel pool cannot satisfy the disjointness constraints."""


@dataclass(frozen=True)
class Position:
    x: float
    y: float


@dataclass(frozen=True)
class Fap:
    id: int
    position: Position
    radius: float
    subchannels: tuple[int, ...]
    fue_ids: tuple[int, ...]


@dataclass(frozen=True)
class Fue:
    id: int
    fap_id: int
    position: Position
    arrival_rate: float
    max_power: float
    subchannel: int


@dataclass(frozen=True)
class Mue:
    id: int
    position: Position
    arrival_rate: float
    subchannel: int
    tx_power: float


@dataclass(frozen=True)
class LayoutParams:
    n_faps: int = 200
    n_mues: int = 200
    fues_per_fap: int = 1
    femto_radius: float = 20.0
    macro_radius: float = 1000.0
    macro_exclusion: float = 50.0
    femto_exclusion: float = 0.2
    n_subchannels: int = 500
    sensing_factor: float = 2.0
    lambda_m: float = 150e3
    lambda_l: float = 150e3
    p_max: float = 0.1
    # (x, y, radius): draw FAPs and MUEs inside this disc instead of the macrocell
    cluster: tuple | None = None


@dataclass(frozen=True)
class NetworkTopology:
    """Immutable snapshot of one round's layout.

    Positions and subchannels are held as arrays; ``faps``/``fues``/``mues``
    build the record views on demand.
    """

    fap_xy: np.ndarray
    fap_radius: np.ndarray
    fue_xy: np.ndarray
    fue_fap: np.ndarray
    mue_xy: np.ndarray
    fap_subs: tuple[tuple[int, ...], ...]
    fue_sub: np.ndarray
    mue_sub: np.ndarray
    n_subchannels: int
    rng_seed: int
    params: LayoutParams

    @property
    def n_faps(self) -> int:
        return len(self.fap_xy)

    @property
    def n_fues(self) -> int:
        return len(self.fue_xy)

    @property
    def n_mues(self) -> int:
        return len(self.mue_xy)

    @property
    def faps(self) -> list[Fap]:
        members = [[] for _ in range(self.n_faps)]
        for l, n in enumerate(self.fue_fap):
            members[int(n)].append(l)
        return [
            Fap(n, Position(*map(float, self.fap_xy[n])), float(self.fap_radius[n]), self.fap_subs[n], tuple(members[n]))
            for n in range(self.n_faps)
        ]

    @property
    def fues(self) -> list[Fue]:
        p = self.params
        return [
            Fue(l, int(self.fue_fap[l]), Position(*map(float, self.fue_xy[l])), p.lambda_l, p.p_max, int(self.fue_sub[l]))
            for l in range(self.n_fues)
        ]

    @property
    def mues(self) -> list[Mue]:
        p = self.params
        return [
            Mue(m, Position(*map(float, self.mue_xy[m])), p.lambda_m, int(self.mue_sub[m]), p.p_max)
            for m in range(self.n_mues)
        ]

    def structural_hash(self) -> str:
        h = hashlib.sha256()
        for a in (self.fap_xy, self.fap_radius, self.fue_xy, self.fue_fap, self.mue_xy, self.fue_sub, self.mue_sub):
            arr = np.ascontiguousarray(a)
            h.update(str(arr.dtype).encode())
            h.update(str(arr.shape).encode())
            h.update(arr.tobytes())
        h.update(repr(self.fap_subs).encode())
        return h.hexdigest()

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "kind", "x", "y", "subchannel", "fap_id"])
        w.writerow(["mbs", "mbs", "0.000", "0.000", "", ""])
        for n in range(self.n_faps):
            x, y = self.fap_xy[n]
            w.writerow([f"fap{n}", "fap", f"{x:.3f}", f"{y:.3f}", " ".join(map(str, self.fap_subs[n])), n])
        for l in range(self.n_fues):
            x, y = self.fue_xy[l]
            w.writerow([f"fue{l}", "fue", f"{x:.3f}", f"{y:.3f}", int(self.fue_sub[l]), int(self.fue_fap[l])])
        for m in range(self.n_mues):
            x, y = self.mue_xy[m]
            w.writerow([f"mue{m}", "mue", f"{x:.3f}", f"{y:.3f}", int(self.mue_sub[m]), ""])
        return buf.getvalue()


def uniform_annulus(rng, n: int, r_min: float, r_max: float, center=(0.0, 0.0)) -> np.ndarray:
    """n points uniform over the annulus r_min < r <= r_max."""
    u = rng.random(n)
    theta = rng.random(n) * 2.0 * np.pi
    r = np.sqrt(u * (r_max**2 - r_min**2) + r_min**2)
    # u == 0 would sit exactly on the forbidden circle
    r = np.where(r <= r_min, np.nextafter(r_min, np.inf), r)
    return np.column_stack((center[0] + r * np.cos(theta), center[1] + r * np.sin(theta)))


def generate_topology(params: LayoutParams, seed: int) -> NetworkTopology:
    for name in ("n_faps", "n_mues", "fues_per_fap", "n_subchannels"):
        if getattr(params, name) < 0:
            raise ValueError(f"{name}: must be non-negative")
    if params.n_faps > 0 and params.fues_per_fap < 1:
        raise ValueError("fues_per_fap: must be >= 1")
    if params.n_subchannels < params.n_mues:
        raise ValueError("n_subchannels: must be >= number of MUEs")
    if not 0 < params.femto_exclusion < params.femto_radius:
        raise ValueError("femto_radius: must exceed the femto exclusion radius")
    rng = np.random.default_rng(seed)
    N, L = params.n_faps, params.fues_per_fap
    if params.cluster is not None:
        cx, cy, cr = params.cluster
        if np.hypot(cx, cy) - cr < params.macro_exclusion:
            raise ValueError("cluster: must lie outside the macro exclusion radius")
        if np.hypot(cx, cy) + cr > params.macro_radius:
            raise ValueError("cluster: must lie inside the macrocell")
        area = dict(r_min=0.0, r_max=cr, center=(cx, cy))
        mue_area = area
    else:
        area = dict(r_min=0.0, r_max=params.macro_radius)
        mue_area = dict(r_min=params.macro_exclusion, r_max=params.macro_radius)
    fap_xy = uniform_annulus(rng, N, **area)
    fue_fap = np.repeat(np.arange(N), L)
    offsets = uniform_annulus(rng, N * L, params.femto_exclusion, params.femto_radius)
    fue_xy = fap_xy[fue_fap] + offsets if N else np.zeros((0, 2))
    mue_xy = uniform_annulus(rng, params.n_mues, **mue_area)
    topo = NetworkTopology(
        fap_xy=fap_xy,
        fap_radius=np.full(N, float(params.femto_radius)),
        fue_xy=fue_xy,
        fue_fap=fue_fap,
        mue_xy=mue_xy,
        fap_subs=tuple(() for _ in range(N)),
        fue_sub=np.full(N * L, -1),
        mue_sub=np.full(params.n_mues, -1),
        n_subchannels=params.n_subchannels,
        rng_seed=int(seed),
        params=params,
    )
    return assign_subchannels(topo)


def fap_conflicts(fap_xy: np.ndarray, radius: np.ndarray, sensing_factor: float) -> list[set[int]]:
    """Neighbour sets: FAPs whose sensing discs (radius * factor) overlap."""
    n = len(fap_xy)
    if n == 0:
        return []
    d = np.linalg.norm(fap_xy[:, None] - fap_xy[None], axis=2)
    reach = sensing_factor * radius
    hit = d <= reach[:, None] + reach[None, :]
    np.fill_diagonal(hit, False)
    return [set(np.flatnonzero(hit[i]).tolist()) for i in range(n)]


def assign_subchannels(topology: NetworkTopology) -> NetworkTopology:
    """FAPs take disjoint subchannel sets from sensed neighbours; MUEs get orthogonal ones.

    Randomness comes from a substream of the topology seed, so re-running the
    assignment on the same topology is idempotent.
    """
    p = topology.params
    rng = np.random.default_rng([topology.rng_seed, 1])
    K, N, L = topology.n_subchannels, topology.n_faps, p.fues_per_fap
    neighbours = fap_conflicts(topology.fap_xy, topology.fap_radius, p.sensing_factor)
    subs = _greedy_sets(rng, neighbours, K, L)
    if subs is None:
        subs = _exact_sets(neighbours, K, L)
        if subs is None:
            raise InfeasibleAssignment(f"{K} subchannels cannot give {N} FAPs {L} disjoint subchannels each")
    fue_sub = np.array([subs[int(n)][i % L] for i, n in enumerate(topology.fue_fap)], dtype=int)
    fue_sub = fue_sub.reshape(-1)
    if topology.n_mues > K:
        raise InfeasibleAssignment("more MUEs than subchannels")
    mue_sub = rng.permutation(K)[: topology.n_mues] if topology.n_mues else np.zeros(0, dtype=int)
    return replace(
        topology,
        fap_subs=tuple(tuple(sorted(s)) for s in subs),
        fue_sub=fue_sub if len(fue_sub) else np.zeros(0, dtype=int),
        mue_sub=np.asarray(mue_sub, dtype=int),
    )


def _greedy_sets(rng, neighbours, K, L):
    subs: list[list[int]] = []
    for n, nb in enumerate(neighbours):
        taken = set()
        for j in nb:
            if j < n:
                taken.update(subs[j])
        free = np.array(sorted(set(range(K)) - taken), dtype=int)
        if len(free) < L:
            return None
        subs.append(sorted(rng.choice(free, L, replace=False).tolist()))
    return subs


def _exact_sets(neighbours, K, L, node_limit: int = 200_000):
    """Backtracking colouring: each FAP needs L colours distinct from its neighbours'."""
    n = len(neighbours)
    order = sorted(range(n), key=lambda i: -len(neighbours[i]))
    subs: list[list[int] | None] = [None] * n
    budget = [node_limit]

    def place(k):
        if k == n:
            return True
        budget[0] -= 1
        if budget[0] < 0:
            return False
        i = order[k]
        taken = set()
        for j in neighbours[i]:
            if subs[j] is not None:
                taken.update(subs[j])
        free = [c for c in range(K) if c not in taken]
        if len(free) < L:
            return False
        for combo in itertools.combinations(free, L):
            subs[i] = list(combo)
            if place(k + 1):
                return True
        subs[i] = None
        return False

    return [list(s) for s in subs] if place(0) else None


def cochannel_sets(topology: NetworkTopology) -> dict[int, tuple[list[int], list[int]]]:
    """subchannel -> (MUE ids, FUE ids) using it."""
    out: dict[int, tuple[list[int], list[int]]] = {}
    for m, k in enumerate(topology.mue_sub):
        out.setdefault(int(k), ([], []))[0].append(m)
    for l, k in enumerate(topology.fue_sub):
        out.setdefault(int(k), ([], []))[1].append(l)
    return dict(sorted(out.items()))
