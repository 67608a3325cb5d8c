import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from femtocoop.topology import (
    InfeasibleAssignment, LayoutParams, assign_subchannels, cochannel_sets, fap_conflicts, generate_topology,
    uniform_annulus,
)

from conftest import hand_topology


def test_degenerate_counts():
    t = generate_topology(LayoutParams(n_faps=1, n_mues=0), 3)
    assert (t.n_faps, t.n_fues, t.n_mues) == (1, 1, 0)
    assert t.faps[0].fue_ids == (0,)


def test_same_seed_bit_identical():
    a = generate_topology(LayoutParams(), 11)
    b = generate_topology(LayoutParams(), 11)
    assert a.structural_hash() == b.structural_hash()
    assert a.to_csv() == b.to_csv()
    assert generate_topology(LayoutParams(), 12).structural_hash() != a.structural_hash()


def _mean_radius_annulus(r0, r1):
    # E[r] for a uniform annulus: integral of r * 2r dr / (r1^2 - r0^2)
    return (2.0 / 3.0) * (r1**3 - r0**3) / (r1**2 - r0**2)


def test_mean_mue_distance_matches_uniform_disc():
    d = np.concatenate([
        np.linalg.norm(generate_topology(LayoutParams(n_faps=0, n_mues=200), s).mue_xy, axis=1) for s in range(500)
    ])
    expected = _mean_radius_annulus(50.0, 1000.0)
    assert expected == pytest.approx(668.2540, abs=1e-4)
    # 1e5 samples, sd of r ~ 235 m -> standard error ~ 0.75 m
    assert d.mean() == pytest.approx(expected, abs=4.0)
    assert d.min() > 50.0 and d.max() <= 1000.0


def test_fues_inside_their_femtocell():
    t = generate_topology(LayoutParams(n_faps=50, n_mues=10), 5)
    off = np.linalg.norm(t.fue_xy - t.fap_xy[t.fue_fap], axis=1)
    assert np.all(off > 0.2) and np.all(off <= 20.0)


def test_cluster_layout_stays_in_disc():
    t = generate_topology(LayoutParams(n_faps=5, n_mues=5, cluster=(800.0, 0.0, 80.0)), 2)
    for xy in (t.fap_xy, t.mue_xy):
        assert np.all(np.linalg.norm(xy - np.array([800.0, 0.0]), axis=1) <= 80.0)
    with pytest.raises(ValueError, match="cluster"):
        generate_topology(LayoutParams(n_faps=1, n_mues=1, cluster=(20.0, 0.0, 10.0)), 0)
    with pytest.raises(ValueError, match="cluster"):
        generate_topology(LayoutParams(n_faps=1, n_mues=1, cluster=(990.0, 0.0, 50.0)), 0)


def test_close_faps_get_disjoint_subchannels():
    t = hand_topology([[500.0, 0.0], [505.0, 0.0]], [[501.0, 0.0], [506.0, 0.0]], [], n_subchannels=4)
    assert not set(t.fap_subs[0]) & set(t.fap_subs[1])


def test_distant_faps_may_reuse():
    assert fap_conflicts(np.array([[0.0, 0.0], [2000.0, 0.0]]), np.array([20.0, 20.0]), 2.0) == [set(), set()]
    t = hand_topology([[-900.0, 0.0], [900.0, 0.0]], [[-901.0, 0.0], [901.0, 0.0]], [], n_subchannels=1)
    assert t.fap_subs[0] == t.fap_subs[1] == (0,)


def _colourable(neighbours, k):
    # brute-force colouring oracle
    import itertools

    n = len(neighbours)
    for colours in itertools.product(range(k), repeat=n):
        if all(colours[i] != colours[j] for i in range(n) for j in neighbours[i]):
            return True
    return False


def test_three_mutual_neighbours_two_subchannels_infeasible():
    xy = [[500.0, 0.0], [510.0, 0.0], [505.0, 8.0]]
    nb = fap_conflicts(np.array(xy), np.full(3, 20.0), 2.0)
    assert not _colourable(nb, 2)
    with pytest.raises(InfeasibleAssignment):
        hand_topology(xy, [[501.0, 0.0], [511.0, 0.0], [506.0, 8.0]], [], n_subchannels=2)


@given(st.integers(0, 10_000))
def test_assignment_respects_conflicts(seed):
    t = generate_topology(LayoutParams(n_faps=30, n_mues=20, macro_radius=200.0, n_subchannels=60), seed)
    nb = fap_conflicts(t.fap_xy, t.fap_radius, 2.0)
    for i, s in enumerate(nb):
        for j in s:
            assert not set(t.fap_subs[i]) & set(t.fap_subs[j])
    assert len(set(t.mue_sub.tolist())) == t.n_mues
    assert assign_subchannels(t).structural_hash() == t.structural_hash()


def test_cochannel_sets_examples():
    assert cochannel_sets(generate_topology(LayoutParams(n_faps=0, n_mues=0), 0)) == {}
    t = hand_topology([[500.0, 0.0]], [[501.0, 0.0]], [[530.0, 0.0]], n_subchannels=3)
    from dataclasses import replace

    t = replace(t, mue_sub=np.array([t.fue_sub[0]]))
    assert cochannel_sets(t) == {int(t.fue_sub[0]): ([0], [0])}


@given(st.integers(0, 10_000))
def test_cochannel_sets_partition_players(seed):
    t = generate_topology(LayoutParams(n_faps=20, n_mues=30, n_subchannels=40), seed)
    sets = cochannel_sets(t)
    mues = [m for ms, _ in sets.values() for m in ms]
    fues = [l for _, ls in sets.values() for l in ls]
    assert sorted(mues) == list(range(30)) and sorted(fues) == list(range(20))
    # re-scan: each player listed under its own subchannel
    for k, (ms, ls) in sets.items():
        assert all(t.mue_sub[m] == k for m in ms) and all(t.fue_sub[l] == k for l in ls)


def test_uniform_annulus_bounds():
    pts = uniform_annulus(np.random.default_rng(0), 1000, 5.0, 10.0, center=(1.0, 2.0))
    r = np.linalg.norm(pts - np.array([1.0, 2.0]), axis=1)
    assert np.all(r > 5.0) and np.all(r <= 10.0)
