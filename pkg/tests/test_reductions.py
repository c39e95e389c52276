import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aekit.economy import serialize_problem
from aekit.equilibrium import ne_oracle
from aekit.errors import InvalidInputError, ParseError
from aekit.generate import EPSILONS, random_gnep
from aekit.reductions import (RelationSpec, enumerate_eps_equilibria, from_gnep, from_relation,
                              parse_gnep, parse_relation, serialize_gnep)
from aekit.setval import FiniteCloud
from conftest import read

C, D = (0.0,), (1.0,)
ALL = ((C, C), (C, D), (D, C), (D, D))


def test_prisoners_dilemma_strict(pd):
    assert ne_oracle(from_gnep(pd)).equilibria == ((D, D),)
    assert enumerate_eps_equilibria(pd).equilibria == ((D, D),)


def test_prisoners_dilemma_loose(pd):
    spec = pd.with_epsilon(1.0)
    assert ne_oracle(from_gnep(spec)).equilibria == ALL
    assert enumerate_eps_equilibria(spec).equilibria == ALL


def test_preferences_are_strict_improvements(pd):
    g = from_gnep(pd)
    # player 1 at (C, C) gains by defecting; at (D, D) it cannot gain
    assert g.preference_value(0, (0, 0)).points == (D,)
    assert g.preference_value(0, (1, 1)).is_empty()


def _relation_of(spec, gamma):
    dominance = tuple(dict(gamma.preferences[k].table) for k in range(gamma.n_players))
    return RelationSpec(spec.players, dominance, spec.constraints, spec.tolerances)


def test_relation_route_matches_gnep_route(pd):
    g = from_gnep(pd)
    assert serialize_problem(from_relation(_relation_of(pd, g))) == serialize_problem(g)


def test_relation_file_matches_gnep(pd):
    obj = json.loads(read("pd.json"))
    del obj["objectives"], obj["epsilon"]
    obj["dominance"] = {"1": [{"at": [[0], [0]], "value": [[1]]}, {"at": [[0], [1]], "value": [[1]]}],
                        "2": [{"at": [[0], [0]], "value": [[1]]}, {"at": [[1], [0]], "value": [[1]]}]}
    g = from_relation(parse_relation(json.dumps(obj)))
    assert serialize_problem(g) == serialize_problem(from_gnep(pd))


def test_reflexive_relation_rejected(pd):
    g = from_gnep(pd)
    rel = _relation_of(pd, g)
    bad = [dict(t) for t in rel.dominance]
    bad[0][(1, 1)] = FiniteCloud([D])
    with pytest.raises(InvalidInputError, match="reflexive"):
        from_relation(RelationSpec(rel.players, tuple(bad), rel.constraints, rel.tolerances))


def test_negative_epsilon_rejected(pd):
    with pytest.raises(InvalidInputError):
        pd.with_epsilon(-0.1)
    obj = json.loads(read("pd.json"))
    obj["epsilon"] = -1
    with pytest.raises(ParseError, match="epsilon"):
        parse_gnep(json.dumps(obj))


def test_gnep_roundtrip(pd):
    text = serialize_gnep(pd)
    assert serialize_gnep(parse_gnep(text)) == text


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reduction_and_monotonicity(seed):
    spec = random_gnep(np.random.default_rng(seed))
    previous = set()
    for eps in EPSILONS:
        s = spec.with_epsilon(eps)
        via_economy = ne_oracle(from_gnep(s)).equilibria
        assert via_economy == enumerate_eps_equilibria(s).equilibria
        assert previous <= set(via_economy)
        previous = set(via_economy)
