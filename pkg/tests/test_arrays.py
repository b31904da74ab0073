import math
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diosense.arrays import (
    ArrayGeometry,
    coarray_lags,
    coprime_pairs,
    design_coprime_array,
    design_diophantine_array,
    lag_triples,
    plain_statistics,
)
from diosense.errors import NotCoveredError


def coprime_triples(limit):
    return [
        (p1, p2, q)
        for p1, p2, q in product(range(2, limit + 1), repeat=3)
        if math.gcd(p1, p2) == math.gcd(p1, q) == math.gcd(p2, q) == 1
    ]


def brute_lags(g):
    s1, s2, s3 = g.subarrays
    return {sa * (d1 - d2) + sb * d3 for d1, d2, d3 in product(s1, s2, s3) for sa in (1, -1) for sb in (1, -1)}


def test_diophantine_array_435():
    g = design_diophantine_array(4, 3, 5)
    assert [len(s) for s in g.subarrays] == [6, 4, 5]
    assert g.positions == (0, 12, 15, 20, 24, 30, 36, 40, 45, 48, 60, 80, 100)
    assert g.sensor_count == 13 and g.formula_sensor_count == 14
    assert g.subarray_of[0] == (1, 2, 3)
    assert sum(len(v) > 1 for v in g.subarray_of.values()) == 1
    assert g.min_spacing == 3


@pytest.mark.parametrize("params", [(2, 4, 5), (1, 3, 5), (6, 5, 9)])
def test_diophantine_array_invalid(params):
    with pytest.raises(ValueError):
        design_diophantine_array(*params)


def test_coprime_array_examples():
    g = design_coprime_array(3, 5)
    assert set(g.positions) == {5, 10} | set(range(0, 30, 3))
    assert g.sensor_count == 12 == g.formula_sensor_count
    assert design_coprime_array(2, 3).sensor_count == 7
    with pytest.raises(ValueError):
        design_coprime_array(4, 6)


def test_coarray_435_report():
    rep = coarray_lags(design_diophantine_array(4, 3, 5))
    assert set(range(-60, 61)) <= rep.lag_set
    assert rep.guarantee_holds and rep.guaranteed_dof == 121
    # exhaustive enumeration, frozen
    assert rep.span == 74 and rep.dof == 149 and rep.distinct_lags == 223
    assert rep.min_spacing == 3
    assert rep.sensor_count == 13 and rep.formula_sensor_count == 14 and rep.sensor_count_mismatch
    assert rep.lag_set == brute_lags(design_diophantine_array(4, 3, 5))


def test_coarray_coprime_baseline():
    rep = coarray_lags(design_coprime_array(3, 5))
    assert set(range(-15, 16)) <= rep.lag_set
    assert rep.guarantee_holds
    # the co-prime pattern reaches beyond M1*M2 here: span 19, frozen
    assert rep.span == 19 and rep.dof == 39 and rep.distinct_lags == 47


def test_coarray_single_sensor():
    g = ArrayGeometry("coprime", (1, 1), ((0,), (0,)))
    rep = coarray_lags(g)
    assert rep.lag_set == {0} and rep.dof == 1


@pytest.mark.parametrize("p", coprime_triples(8))
def test_coverage_all_small_triples(p):
    g = design_diophantine_array(*p)
    rep = coarray_lags(g)
    n = p[0] * p[1] * p[2]
    assert set(range(-n, n + 1)) <= rep.lag_set
    assert rep.min_spacing == min(p)
    assert rep.sensor_count == sum(map(len, g.subarrays)) - 2


def test_lag_one_triple_is_conjugate_variant():
    g = design_diophantine_array(4, 3, 5)
    hits = [t for t in lag_triples(g, 1) if t.positions == (40, 15, 24)]
    assert hits and all(t.statistic == "conjugate" for t in hits)
    assert hits[0].signs == (1, -1)


def test_lag_zero_and_uncovered():
    g = design_diophantine_array(4, 3, 5)
    assert any(t.positions == (0, 0, 0) for t in lag_triples(g, 0))
    with pytest.raises(NotCoveredError):
        lag_triples(g, 10**6)
    with pytest.raises(NotCoveredError):
        plain_statistics(g, 10**6)


def test_round_trip_every_lag_witnessed():
    g = design_diophantine_array(3, 2, 5)
    rep = coarray_lags(g)
    for lag in rep.lag_set:
        ts = lag_triples(g, lag)
        assert len(ts) == rep.witness_counts[lag]
        assert all(t.lag == lag for t in ts)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(coprime_triples(6)), st.data())
def test_plain_roles_reproduce_lag(p, data):
    g = design_diophantine_array(*p)
    n = p[0] * p[1] * p[2]
    lag = data.draw(st.integers(0, n))
    for a, b, c in plain_statistics(g, lag):
        assert a - b + c == lag
        assert {a, b, c} <= set(g.positions)


def test_coprime_pairs():
    g = design_coprime_array(3, 5)
    for lag in range(16):
        for a, b in coprime_pairs(g, lag):
            assert a - b == lag
    with pytest.raises(NotCoveredError):
        coprime_pairs(g, 500)


def test_csv_report_tail():
    text = coarray_lags(design_diophantine_array(4, 3, 5)).to_csv()
    lines = text.splitlines()
    assert lines[0] == "lag,witness_count"
    assert lines[-2:] == ["span,dof,distinct,min_spacing,sensors", "74,149,223,3,13"]
