import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from femtocoop.channel import ChannelParams, sample_gains
from femtocoop.config import from_dict
from femtocoop.engine import ModelParams, RoundModel
from femtocoop.experiments import build_round, round_seeds
from femtocoop.topology import LayoutParams, NetworkTopology, assign_subchannels

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def hand_topology(fap_xy, fue_xy, mue_xy, mue_sub=None, n_subchannels=10, radius=20.0, seed=0):
    """Topology with explicit positions; FUE l belongs to FAP l."""
    fap_xy = np.asarray(fap_xy, dtype=float).reshape(-1, 2)
    fue_xy = np.asarray(fue_xy, dtype=float).reshape(-1, 2)
    mue_xy = np.asarray(mue_xy, dtype=float).reshape(-1, 2)
    n = len(fap_xy)
    params = LayoutParams(n_faps=n, n_mues=len(mue_xy), femto_radius=radius, n_subchannels=n_subchannels)
    topo = NetworkTopology(
        fap_xy=fap_xy, fap_radius=np.full(n, radius), fue_xy=fue_xy, fue_fap=np.arange(n),
        mue_xy=mue_xy, fap_subs=tuple(() for _ in range(n)), fue_sub=np.full(n, -1),
        mue_sub=np.full(len(mue_xy), -1), n_subchannels=n_subchannels, rng_seed=seed, params=params,
    )
    topo = assign_subchannels(topo)
    if mue_sub is not None:
        from dataclasses import replace

        topo = replace(topo, mue_sub=np.asarray(mue_sub, dtype=int))
    return topo


def hand_model(topo, sigma=0.0, **params):
    gains = sample_gains(topo, ChannelParams(shadow_sigma_db=sigma), np.random.default_rng(0))
    return RoundModel(topo, gains, ModelParams(**params))


def small_model(index, n=2, m=3, cluster=(800.0, 0.0, 80.0), seed=1, **over):
    data = {"N": n, "M": m, "cluster": list(cluster), "seed": seed}
    data.update(over)
    cfg = from_dict(data)
    return build_round(cfg, *round_seeds(cfg.seed, 0, index))


@pytest.fixture
def edge_pair():
    """One FAP at the cell edge, one MUE 15 m away on the FUE's subchannel."""
    topo = hand_topology([[900.0, 0.0]], [[905.0, 0.0]], [[915.0, 0.0]], n_subchannels=4)
    from dataclasses import replace

    topo = replace(topo, mue_sub=np.array([int(topo.fue_sub[0])]))
    return hand_model(topo, beta_step=0.02, power_points=8)
