import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aekit.errors import InvalidInputError
from aekit.setval import (FiniteCloud, displacement, excess, hausdorff, min_pair_distance,
                          neighborhood_filter, pk_limit_check)
from oracles import brute_excess, brute_hausdorff, eta_hausdorff

coord = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@st.composite
def clouds(draw, dim=None, min_size=0, max_size=30):
    dim = dim or draw(st.integers(1, 3))
    pts = draw(st.lists(st.lists(coord, min_size=dim, max_size=dim), min_size=min_size,
                        max_size=max_size))
    return FiniteCloud(pts, dim=dim)


@st.composite
def triples(draw, min_size=1):
    dim = draw(st.integers(1, 3))
    return tuple(draw(clouds(dim=dim, min_size=min_size)) for _ in range(3))


def test_empty_conventions():
    e, s = FiniteCloud.empty(2), FiniteCloud([[0, 0]])
    assert displacement((1, 1), e) == math.inf
    assert excess(e, s) == 0.0
    assert excess(s, e) == math.inf
    assert hausdorff(e, e) == 0.0
    assert hausdorff(s, e) == math.inf


def test_dedup_merges_and_sorts():
    c = FiniteCloud([[1.0], [0.0], [1.0 + 1e-13], [-0.0]])
    assert c.points == ((0.0,), (1.0,))
    assert FiniteCloud([[2, 1], [1, 5]]).points == ((1.0, 5.0), (2.0, 1.0))


def test_displacement_snaps_within_dedup():
    s = FiniteCloud([[0.0]])
    assert displacement((1e-13,), s) == 0.0
    assert displacement((1e-6,), s) == pytest.approx(1e-6)


def test_dimension_mismatch_rejected():
    with pytest.raises(InvalidInputError):
        hausdorff(FiniteCloud([[0]]), FiniteCloud([[0, 0]]))


def test_neighborhood_is_open():
    s = FiniteCloud([[0.0]])
    cand = FiniteCloud([[0.5], [1.0], [2.0]])
    assert neighborhood_filter(s, cand, 1.0).points == ((0.5,),)


def test_min_pair_distance():
    a, b = FiniteCloud([[0, 0], [3, 0]]), FiniteCloud([[0, 4], [3, 1]])
    assert min_pair_distance(a, b) == 1.0
    assert min_pair_distance(a, FiniteCloud.empty(2)) == math.inf


def test_hausdorff_known_value():
    assert hausdorff(FiniteCloud([[0], [1]]), FiniteCloud([[0]])) == 1.0
    assert excess(FiniteCloud([[0]]), FiniteCloud([[0], [1]])) == 0.0


@settings(max_examples=200, deadline=None)
@given(triples(min_size=0))
def test_matches_brute_force(t):
    a, b, _ = t
    assert excess(a, b) == pytest.approx(brute_excess(a.points, b.points), abs=1e-12)
    assert hausdorff(a, b) == pytest.approx(brute_hausdorff(a.points, b.points), abs=1e-12)


@settings(max_examples=150, deadline=None)
@given(triples())
def test_matches_eta_characterization(t):
    a, b, _ = t
    assert abs(hausdorff(a, b) - eta_hausdorff(a.points, b.points)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(triples())
def test_metric_axioms(t):
    a, b, c = t
    assert hausdorff(a, b) == hausdorff(b, a)
    assert hausdorff(a, a) == 0.0
    within_dedup = brute_hausdorff(a.points, b.points) <= 1e-12
    assert (hausdorff(a, b) == 0.0) == within_dedup
    if a == b:
        assert hausdorff(a, b) == 0.0
    assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12


def test_pk_limit_converging_sequence():
    report = pk_limit_check(lambda n: FiniteCloud([[0.0], [2.0 ** -n]]), FiniteCloud([[0.0]]),
                            range(1, 81), 1e-9)
    assert report.converged
    assert report.tail_start == 41


def test_pk_limit_oscillating_sequence():
    fam = lambda n: FiniteCloud([[float(n % 2)]])
    assert not pk_limit_check(fam, FiniteCloud([[0.0]]), range(1, 21), 1e-9).converged


def test_pk_limit_rejects_bad_arguments():
    with pytest.raises(InvalidInputError):
        pk_limit_check(lambda n: FiniteCloud([[0]]), FiniteCloud([[0]]), [], 1e-9)
    with pytest.raises(InvalidInputError):
        pk_limit_check(lambda n: FiniteCloud([[0]]), FiniteCloud([[0]]), [1], 0.0)


def test_cloud_array_is_read_only():
    c = FiniteCloud([[1, 2]])
    with pytest.raises(ValueError):
        c.array[0, 0] = 5
    assert np.array_equal(c.translate([1, 1]).array, [[2, 3]])
