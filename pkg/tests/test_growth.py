import json
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthtypes import GrowthFunction, check_bgd, check_tree_hypotheses, growth_type_equivalent, tabulate
from growthtypes._intmath import ceil_div, dominated_by_geometric, iroot
from growthtypes.exceptions import DegenerateRange, IndexOutOfHorizon, NoWitness, NotBgd
from growthtypes.growth import (
    CurvatureParams,
    bgd_constant_from_curvature,
    bgd_holds,
    diff,
    increments_diverge,
)


def G(*vals):
    return GrowthFunction(tuple(vals))


def test_diff_examples():
    assert diff(G(1, 3, 5), 1) == 2
    assert diff(G(1, 1, 1), 2) == 0
    assert diff(G(1, 2, 4, 8), 3) == 4
    with pytest.raises(IndexOutOfHorizon):
        diff(G(1, 2), 2)
    with pytest.raises(IndexOutOfHorizon):
        diff(G(1, 2), 0)


def test_growth_function_validation():
    with pytest.raises(ValueError):
        G(1, 0)
    with pytest.raises(ValueError):
        G(-1, 2)
    with pytest.raises(ValueError):
        GrowthFunction(())
    with pytest.raises(ValueError):
        GrowthFunction.from_dict({"horizon": 3, "values": [1, 2]})


def test_json_round_trip_keeps_big_ints():
    v = G(1, 10**40, 10**41)
    text = v.to_json()
    assert '"10000000000000000000000000000000000000000"' in text
    assert GrowthFunction.from_json(text) == v


def test_tabulate_kinds():
    assert tabulate({"kind": "affine", "a": 2, "b": 1}, 3).values == (1, 3, 5, 7)
    assert tabulate({"kind": "geometric", "base": 2}, 4).values == (1, 2, 4, 8, 16)
    assert tabulate({"kind": "polynomial", "coeffs": [1, 0, 1]}, 3).values == (1, 2, 5, 10)
    v = tabulate({"kind": "power", "num": 3, "den": 2, "offset": 1}, 8)
    assert v.values == tuple(math.isqrt(n**3) + 1 for n in range(9))
    assert GrowthFunction.from_dict({"kind": "affine", "a": 1, "b": 1, "horizon": 2}).values == (1, 2, 3)
    with pytest.raises(ValueError):
        tabulate({"kind": "nope"}, 3)


def test_check_bgd_examples():
    assert check_bgd(tabulate({"kind": "affine", "a": 2, "b": 1}, 100)).L == 1
    assert check_bgd(tabulate({"kind": "geometric", "base": 2}, 30)).L == 2
    with pytest.raises(NotBgd) as e:
        check_bgd(G(1, 1, 1, 1))
    assert e.value.index == 0


def _bgd_oracle(vals):
    d = [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]
    if any(x == 0 for x in d[1:]) or (d[0] == 0 and len(d) > 1):
        return None
    L = 1
    while any(d[k + 1] > L * d[k] for k in range(len(d) - 1)):
        L += 1
    return L


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 40), min_size=2, max_size=30), st.integers(0, 5))
def test_check_bgd_matches_linear_search(incs, v0):
    vals = [v0]
    for x in incs:
        vals.append(vals[-1] + x)
    v = GrowthFunction(tuple(vals))
    L = _bgd_oracle(vals)
    if L is None:
        with pytest.raises(NotBgd):
            check_bgd(v)
    else:
        assert check_bgd(v).L == L
        assert bgd_holds(v, L)
        assert L == 1 or not bgd_holds(v, L - 1)


def test_curvature_constant_against_mpmath():
    with mpmath.workdps(60):
        ref1 = mpmath.e / (1 - mpmath.e**-2)
        ref20 = mpmath.e**20 / (1 - mpmath.e**-40)
    c1 = bgd_constant_from_curvature(CurvatureParams(2, 1))
    c3 = bgd_constant_from_curvature(CurvatureParams(3, 1))
    c20 = bgd_constant_from_curvature(CurvatureParams(2, 20))
    assert abs(float(c1) - 3.14374) < 1e-5
    assert abs(float(c3) - 9.88311) < 1e-5
    assert abs(float(c3) - float(c1) ** 2) < 1e-9
    assert c1 >= Fraction(str(mpmath.nstr(ref1, 50))) - Fraction(1, 10**40)
    assert abs(mpmath.mpf(c1.numerator) / c1.denominator - ref1) / ref1 < 1e-14
    assert abs(mpmath.mpf(c20.numerator) / c20.denominator - mpmath.e**20) / mpmath.e**20 < 1e-6
    assert abs(mpmath.mpf(c20.numerator) / c20.denominator - ref20) / ref20 < 1e-14


def test_curvature_params_validation():
    with pytest.raises(ValueError):
        CurvatureParams(1, 1)
    with pytest.raises(ValueError):
        CurvatureParams(2, 0)


def test_equivalence_examples():
    v = tabulate({"kind": "geometric", "base": 2}, 20)
    assert growth_type_equivalent(v, v).A == 1
    a = tabulate({"kind": "affine", "a": 1, "b": 1}, 1000)
    b = tabulate({"kind": "affine", "a": 2, "b": 2}, 1000)
    assert growth_type_equivalent(a, b, 10).A == 2
    with pytest.raises(NoWitness):
        growth_type_equivalent(
            tabulate({"kind": "geometric", "base": 2}, 60), tabulate({"kind": "affine", "a": 1}, 60), 5
        )
    with pytest.raises(DegenerateRange):
        growth_type_equivalent(G(1), G(1))


def test_equivalence_witness_is_minimal_and_valid():
    v = tabulate({"kind": "polynomial", "coeffs": [1, 0, 1]}, 400)
    w = tabulate({"kind": "polynomial", "coeffs": [3, 1, 5]}, 400)
    wit = growth_type_equivalent(v, w)
    A = wit.A
    for n in range(wit.horizon_checked + 1):
        assert w[n] <= A * v[A * n + A] + A and v[n] <= A * w[A * n + A] + A
    prev = A - 1
    if prev >= 1:
        lim = (400 - prev) // prev
        assert any(
            w[n] > prev * v[prev * n + prev] + prev or v[n] > prev * w[prev * n + prev] + prev
            for n in range(lim + 1)
        )


def test_tree_hypotheses_examples():
    assert check_tree_hypotheses(tabulate({"kind": "affine", "a": 2, "b": 1}, 200), 3, 2, 4).passed
    bad = check_tree_hypotheses(tabulate({"kind": "geometric", "base": 2}, 20), 3, 2, 1)
    assert not bad.passed and bad.first.rule == "growth_bound" and bad.first.index == 1
    inc = check_tree_hypotheses(G(1, 3, 4, 6), 3, 2, 10)
    assert inc.first.rule == "increment>=2" and inc.first.index == 1
    dbl = check_tree_hypotheses(G(1, 3, 8), 3, 2, 10)
    assert dbl.first.rule == "increment<=2*previous"
    assert check_tree_hypotheses(G(2, 4), 3, 2, 10).first.rule == "v(0)=1"
    with pytest.raises(ValueError):
        check_tree_hypotheses(G(1, 3), 2, 1, 1)


def test_intmath_helpers():
    for x in list(range(200)) + [10**30 + 7, 2**200 - 1]:
        for k in (1, 2, 3, 5):
            r = iroot(x, k)
            assert r**k <= x < (r + 1) ** k
    assert ceil_div(7, 2) == 4 and ceil_div(-7, 2) == -3
    vals = [1, 3, 5, 9]
    assert dominated_by_geometric(vals, 4, 3, 2) is None
    assert dominated_by_geometric(vals, 1, 3, 2) == 1


def test_increments_diverge_proxy():
    assert increments_diverge(tabulate({"kind": "polynomial", "coeffs": [1, 0, 1]}, 50))
    assert not increments_diverge(tabulate({"kind": "affine", "a": 1, "b": 1}, 50))


def test_verdict_serialisation_is_json():
    vd = check_tree_hypotheses(G(1, 3, 4), 3, 2, 10)
    doc = json.loads(json.dumps(vd.to_dict()))
    assert doc["passed"] is False and doc["violations"][0]["rule"] == "increment>=2"
