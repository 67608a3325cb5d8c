import itertools
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from femtocoop.channel import LinkGains
from femtocoop.coalition import (
    CoreOracle, LeaseBook, OracleRefused, _set_coalition, form_coalitions, oracle_json, prefers,
    recursive_core_oracle,
)
from femtocoop.engine import PartitionState, RoundModel
from femtocoop.topology import LayoutParams, generate_topology

from conftest import hand_model, small_model


def test_single_player_core():
    model = hand_model(generate_topology(LayoutParams(n_faps=0, n_mues=1), 0))
    core = recursive_core_oracle(model)
    assert len(core) == 1
    assert core[0].x_mue[0] == model.baseline.x_mue[0]
    assert core[0].partition.cooperative() == []


def test_pair_with_surplus(edge_pair):
    oracle = CoreOracle(edge_pair)
    assert oracle.core() == [(0,)]
    # the singleton split is dominated by the pair
    x = oracle.payoffs((-1,))
    assert oracle.dominating(0b11, (), x) is not None


def test_refuses_large_instances():
    model = small_model(0, n=4, m=5)
    with pytest.raises(OracleRefused):
        CoreOracle(model, max_players=8)


def _externality_free(model):
    g = model.gains
    fue_fap = np.zeros_like(g.fue_fap)
    fue_fap[np.arange(model.F), model.fap_of] = g.fue_own
    gains = LinkGains(g.mue_mbs, np.zeros_like(g.fue_mbs), g.fue_own, np.zeros_like(g.mue_fap), g.mue_fue, fue_fap, g.noise)
    return RoundModel(model.topology, gains, model.params)


def _characteristic_core(model):
    """Classical core enumeration: no externalities, so a coalition's payoffs are its own.

    Outcome x is blocked when some admissible coalition (or a lone player)
    can give all its members at least x and one of them more.
    """
    book = LeaseBook(model)
    F, M = model.F, model.M
    base = model.baseline
    # standalone value of each admissible coalition
    blocks = [((l,), base.x_fue[l:l + 1], ()) for l in range(F)]
    blocks += [((F + m,), base.x_mue[m:m + 1], ()) for m in range(M)]
    for l in range(F):
        near = [m for m in range(M) if model.in_range[m, l]]
        for k in range(1, len(near) + 1):
            for group in itertools.combinations(near, k):
                admitted, terms = book.lease(l, set(group))
                if admitted != set(group):
                    continue
                ev = model.evaluate(_set_coalition(PartitionState.singletons(M), l, terms))
                idx = (l,) + tuple(F + m for m in group)
                blocks.append((idx, np.concatenate([[ev.x_fue[l]], ev.x_mue[list(group)]]), terms))
    core = []
    choices = [[-1] + [l for l in range(F) if model.in_range[m, l]] for m in range(M)]
    for assign in itertools.product(*choices):
        st = PartitionState.singletons(M)
        ok = True
        for l in sorted(set(a for a in assign if a >= 0)):
            mues = {m for m, a in enumerate(assign) if a == l}
            admitted, terms = book.lease(l, mues)
            if admitted != mues:
                ok = False
                break
            st = _set_coalition(st, l, terms)
        if not ok:
            continue
        ev = model.evaluate(st)
        x = np.concatenate([ev.x_fue, ev.x_mue])
        if not any(prefers(y, x[list(idx)]) for idx, y, _ in blocks):
            core.append(tuple(assign))
    return sorted(core)


@pytest.mark.parametrize("index", range(12))
def test_externality_free_core_matches_characteristic_form(index):
    model = _externality_free(small_model(index, n=2, m=3))
    assert sorted(CoreOracle(model).core()) == _characteristic_core(model)


def test_one_fue_two_mues_formation_is_undominated():
    hits = 0
    for i in range(30):
        model = small_model(i, n=1, m=2)
        oracle = CoreOracle(model)
        form = form_coalitions(model, book=oracle.book)
        x = np.concatenate([form.evaluation.x_fue, form.evaluation.x_mue])
        assert oracle.small_deviation(x, 3) is None
        hits += int(np.any(form.state.owner >= 0))
    assert hits > 0


@given(st.integers(0, 60))
def test_optimistic_core_within_pessimistic(index):
    model = small_model(index, n=2, m=2)
    pess = set(CoreOracle(model).core())
    opt = set(CoreOracle(model, optimistic=True).core())
    assert opt <= pess


def test_oracle_json_shape():
    model = small_model(5, n=2, m=2)
    data = json.loads(oracle_json(recursive_core_oracle(model)))
    assert set(data) == {"outcomes"}
    for o in data["outcomes"]:
        assert set(o["payoffs"]) == {"fue", "mue"}
        assert len(o["payoffs"]["fue"]) == 2 and len(o["payoffs"]["mue"]) == 2
