import numpy as np
from hypothesis import given, settings, strategies as st

from aekit._jsonio import dumps
from aekit.equilibrium import certify, ne_oracle, ne_via_gap
from aekit.generate import random_economy
from oracles import brute_equilibria


def test_e1_equilibrium(e1):
    assert ne_oracle(e1).equilibria == (((1.0,),),)
    assert [[1.0]] in ne_via_gap(e1)


def test_certificate_of_non_equilibrium(e1):
    cert = certify(e1, [[0]])
    assert not cert.accepted
    row = cert.players[0]
    assert row.feasible and not row.unimprovable
    assert row.violating_pair == ((1.0,), (1.0,))
    assert row.min_pair_distance == 0.0


def test_certificate_of_equilibrium(e1):
    cert = certify(e1, [[1]])
    assert cert.accepted
    assert cert.to_json()["players"][0]["min_pair_distance"] == float("inf")
    assert '"min_pair_distance":"inf"' in dumps(cert.to_json())


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_oracle_matches_brute_force(seed):
    g = random_economy(np.random.default_rng(seed))
    assert list(ne_oracle(g).equilibria) == brute_equilibria(g)


def test_empty_equilibrium_cloud():
    rng = np.random.default_rng(11)
    for _ in range(50):
        g = random_economy(rng, p_prefer=0.9)
        ne = ne_oracle(g)
        if len(ne) == 0:
            assert ne.cloud().is_empty()
            assert ne.cloud().dim == sum(g.dims)
            return
    raise AssertionError("no instance without equilibria found")
