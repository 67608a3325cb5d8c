"""Link gains, SINR and success probability for the two-tier uplink."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .topology import NetworkTopology

INDOOR = "indoor"
OUTDOOR = "outdoor"


@dataclass(frozen=True)
class ChannelParams:
    pl_indoor: tuple[float, float] = (37.0, 30.0)
    pl_outdoor: tuple[float, float] = (15.3, 37.6)
    wall_loss_db: float = 12.0
    shadow_sigma_db: float = 10.0
    noise_density_dbm_hz: float = -174.0
    bandwidth_hz: float = 180e3
    fading_mode: str = "closed_form"
    n_fading_draws: int = 1000

    def __post_init__(self):
        if self.fading_mode not in ("closed_form", "monte_carlo"):
            raise ValueError(f"fading_mode: unknown mode {self.fading_mode!r}")
        if self.fading_mode == "monte_carlo" and self.n_fading_draws < 100:
            raise ValueError("n_fading_draws: must be >= 100 in monte_carlo mode")
        for name in ("wall_loss_db", "shadow_sigma_db", "noise_density_dbm_hz"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name}: must be finite")

    @property
    def noise_power(self) -> float:
        """Thermal noise over one subchannel, watts."""
        dbm = self.noise_density_dbm_hz + 10.0 * math.log10(self.bandwidth_hz)
        return 10.0 ** ((dbm - 30.0) / 10.0)


def path_loss_db(link_class, distance, params: ChannelParams | None = None):
    """Distance-dependent path loss in dB (no walls, no shadowing)."""
    params = params or ChannelParams()
    d = np.asarray(distance, dtype=float)
    if np.any(d <= 0):
        raise ValueError("distance must be positive")
    if link_class == INDOOR:
        a, b = params.pl_indoor
    elif link_class == OUTDOOR:
        a, b = params.pl_outdoor
    else:
        raise ValueError(f"unknown link class {link_class!r}")
    out = a + b * np.log10(d)
    return float(out) if out.ndim == 0 else out


# (tx kind, rx kind) -> (class, walls). MUE<->FUE, FUE->MBS, MUE->FAP cross one wall;
# FUE->foreign FAP leaves one building and enters another.
_LINK_CLASSES = {
    ("fue", "fap_own"): (INDOOR, 0),
    ("mue", "mbs"): (OUTDOOR, 0),
    ("mue", "fue"): (OUTDOOR, 1),
    ("fue", "mue"): (OUTDOOR, 1),
    ("fue", "mbs"): (OUTDOOR, 1),
    ("mue", "fap"): (OUTDOOR, 1),
    ("fue", "fap"): (OUTDOOR, 2),
}


def classify_link(tx_kind: str, rx_kind: str) -> tuple[str, int]:
    try:
        return _LINK_CLASSES[(tx_kind, rx_kind)]
    except KeyError:
        raise ValueError(f"no link class for {tx_kind}->{rx_kind}") from None


@dataclass(frozen=True)
class LinkGain:
    tx_id: tuple[str, int]
    rx_id: tuple[str, int]
    mean_gain: float
    n_walls: int


def _endpoint(topology: NetworkTopology, node):
    kind, idx = node
    if kind == "mbs":
        return np.zeros(2)
    if kind == "fap":
        return topology.fap_xy[idx]
    if kind == "fue":
        return topology.fue_xy[idx]
    if kind == "mue":
        return topology.mue_xy[idx]
    raise ValueError(f"unknown node kind {kind!r}")


def mean_gain(topology: NetworkTopology, tx, rx, rng, params: ChannelParams | None = None) -> LinkGain:
    """Shadowed mean gain of one link; nodes are ``(kind, index)`` pairs.

    ``rng`` supplies the single shadowing draw. Pass ``None`` for an unshadowed gain.
    """
    params = params or ChannelParams()
    if tx == rx:
        raise ValueError("tx and rx must differ")
    rx_kind = rx[0]
    if tx[0] == "fue" and rx_kind == "fap":
        rx_kind = "fap_own" if topology.fue_fap[tx[1]] == rx[1] else "fap"
    cls, walls = classify_link(tx[0], rx_kind)
    d = float(np.linalg.norm(_endpoint(topology, tx) - _endpoint(topology, rx)))
    loss = path_loss_db(cls, max(d, _MIN_DISTANCE), params) + walls * params.wall_loss_db
    if rng is not None and params.shadow_sigma_db > 0:
        loss += rng.normal(0.0, params.shadow_sigma_db)
    return LinkGain(tuple(tx), tuple(rx), 10.0 ** (-loss / 10.0), walls)


# Path-loss formulas are not meant for sub-metre separations.
_MIN_DISTANCE = 1.0


@dataclass
class LinkGains:
    """All mean gains needed for one round, frozen for that round.

    Arrays are linear power ratios. Shapes: ``mue_mbs`` (M,), ``fue_mbs`` (F,),
    ``fue_own`` (F,), ``mue_fap`` (M, N), ``mue_fue`` (M, F), ``fue_fap`` (F, N).
    ``fue_fap[l, fap_of(l)]`` equals ``fue_own[l]``.
    """

    mue_mbs: np.ndarray
    fue_mbs: np.ndarray
    fue_own: np.ndarray
    mue_fap: np.ndarray
    mue_fue: np.ndarray
    fue_fap: np.ndarray
    noise: float
    extra: dict = field(default_factory=dict)


def sample_gains(topology: NetworkTopology, params: ChannelParams, rng) -> LinkGains:
    """Draw every link's shadowed mean gain in a fixed order."""
    sig = params.shadow_sigma_db

    def shadow(shape):
        # draw even for sigma 0 so the stream layout does not depend on sigma
        z = rng.standard_normal(shape)
        return sig * z

    def gain(cls, d, walls, shape):
        d = np.maximum(d, _MIN_DISTANCE)
        loss = path_loss_db(cls, d, params) if np.size(d) else np.zeros(shape)
        loss = np.asarray(loss) + walls * params.wall_loss_db + shadow(shape)
        return 10.0 ** (-loss / 10.0)

    M, F, N = topology.n_mues, topology.n_fues, topology.n_faps
    mue, fue, fap = topology.mue_xy, topology.fue_xy, topology.fap_xy
    g_mue_mbs = gain(OUTDOOR, np.linalg.norm(mue, axis=1), 0, (M,))
    g_fue_mbs = gain(OUTDOOR, np.linalg.norm(fue, axis=1), 1, (F,))
    d_own = np.linalg.norm(fue - fap[topology.fue_fap], axis=1) if F else np.zeros(0)
    g_fue_own = gain(INDOOR, d_own, 0, (F,))
    g_mue_fap = gain(OUTDOOR, _cross(mue, fap), 1, (M, N))
    g_mue_fue = gain(OUTDOOR, _cross(mue, fue), 1, (M, F))
    g_fue_fap = gain(OUTDOOR, _cross(fue, fap), 2, (F, N))
    if F:
        g_fue_fap[np.arange(F), topology.fue_fap] = g_fue_own
    return LinkGains(g_mue_mbs, g_fue_mbs, g_fue_own, g_mue_fap, g_mue_fue, g_fue_fap, params.noise_power)


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if len(a) == 0 or len(b) == 0:
        return np.zeros((len(a), len(b)))
    return np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)


def sinr(signal, interferers, noise):
    if noise <= 0:
        raise ValueError("noise must be positive")
    return signal / (float(np.sum(interferers)) + noise)


def success_probability(
    signal,
    interferers,
    gamma,
    noise,
    mode: str = "closed_form",
    n_draws: int = 1000,
    rng=None,
    fade_interference: bool = True,
):
    """Pr{SINR >= gamma} under unit-mean exponential fading.

    ``signal`` and ``interferers`` are mean received powers in watts.
    closed_form fades only the signal; monte_carlo fades the signal and, unless
    ``fade_interference`` is off, every interferer.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    interferers = np.asarray(interferers, dtype=float).reshape(-1)
    if mode == "closed_form":
        return _closed_form(signal, float(interferers.sum()), gamma, noise)
    if mode != "monte_carlo":
        raise ValueError(f"unknown fading mode {mode!r}")
    if rng is None:
        raise ValueError("monte_carlo mode needs an rng")
    s = signal * rng.exponential(1.0, n_draws)
    if interferers.size:
        if fade_interference:
            i = rng.exponential(1.0, (n_draws, interferers.size)) @ interferers
        else:
            i = np.full(n_draws, interferers.sum())
    else:
        i = np.zeros(n_draws)
    return float(np.mean(s >= gamma * (i + noise)))


def _closed_form(signal, interference, gamma, noise):
    signal = np.asarray(signal, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        p = np.where(signal > 0, np.exp(-gamma * (interference + noise) / np.where(signal > 0, signal, 1.0)), 0.0)
    return float(p) if p.ndim == 0 else p


def success_probability_array(signal, interference, gamma, noise):
    """Vectorized closed form over arrays of mean signal and total mean interference."""
    return _closed_form(signal, np.asarray(interference, dtype=float), gamma, noise)
