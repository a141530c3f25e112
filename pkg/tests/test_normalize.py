import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from growthtypes import (
    GrowthFunction,
    check_bgd,
    check_tree_hypotheses,
    convex_minorant,
    growth_type_equivalent,
    normalize_bgd,
    suplinear_report,
    suplinear_representative,
    tabulate,
)
from growthtypes._intmath import iroot
from growthtypes.exceptions import InvalidWitness, NotSuperlinear
from growthtypes.normalize import smoothed_value_enclosure, smoothing_period

from helpers import minorant_oracle, random_bgd


def G(*vals):
    return GrowthFunction(tuple(vals))


def oracle_floors(vals, C, L):
    """``floor(C z(n))`` through exact integer roots of ``M^ell L^s``."""
    ell = smoothing_period(L)
    if L == 1:
        return [C * x for x in vals]
    out = []
    for k in range(len(vals) - 1):
        M = C * (vals[k + 1] - vals[k])
        for s in range(ell):
            out.append(C * vals[k] + (iroot(M**ell * L**s, ell) - M) // (L - 1))
    out.append(C * vals[-1])
    return out


def oracle_output(rep):
    raw = oracle_floors(rep.input.values, rep.C, rep.L)
    shift = raw[0] - 1
    w = [x - shift for x in raw]
    if rep.ramp:
        head = [1]
        for inc in rep.ramp:
            head.append(head[-1] + inc)
        w = head[:-1] + [x + head[-1] - w[0] for x in w]
    return w


def test_smoothing_period():
    assert [smoothing_period(L) for L in (1, 2, 3, 4, 5, 7, 8)] == [1, 2, 2, 3, 3, 3, 4]
    for L in range(2, 40):
        ell = smoothing_period(L)
        assert 2**ell > L >= 2 ** (ell - 1)


def test_linear_path():
    rep = normalize_bgd(tabulate({"kind": "affine", "a": 1, "b": 1}, 50), 1)
    assert rep.ell == 1 and rep.C == 2 and rep.shift == 1
    assert rep.output.values == tuple(2 * n + 1 for n in range(51))
    assert rep.ramp == ()


def test_powers_of_two_interpolant():
    v = tabulate({"kind": "geometric", "base": 2}, 30)
    rep = normalize_bgd(v, 2)
    assert rep.ell == 2
    with mpmath.workdps(80):
        for k in range(10):
            lo, hi = smoothed_value_enclosure(v, 2, 2 * k + 1, bits=200)
            exact = mpmath.sqrt(2) * 2**k
            assert mpmath.mpf(lo.numerator) / lo.denominator <= exact <= mpmath.mpf(hi.numerator) / hi.denominator
            assert smoothed_value_enclosure(v, 2, 2 * k)[0] == 2**k
        # the block telescopes: z(2k+1) + (z(2k+1) - z(2k)) (sqrt 2) lands on 2^(k+1)
        assert abs((mpmath.sqrt(2) - 1) * (1 + mpmath.sqrt(2)) - 1) < mpmath.mpf(10) ** -70
    assert oracle_output(rep) == list(rep.output.values)


def test_telescoping_on_block_starts():
    v = tabulate({"kind": "polynomial", "coeffs": [2, 3, 1]}, 40)
    L = check_bgd(v).L
    rep = normalize_bgd(v, L)
    raw = [x + rep.shift for x in rep.output.values[rep.ramp_length:]]
    off = raw[0] - (rep.shift + 1) if rep.ramp else 0
    for k in range(len(v)):
        assert raw[k * rep.ell] - off == rep.C * v[k]


def test_invalid_L_rejected():
    v = tabulate({"kind": "geometric", "base": 3}, 10)
    with pytest.raises(InvalidWitness):
        normalize_bgd(v, 2)
    with pytest.raises(ValueError):
        normalize_bgd(G(1, 2), 1)


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5])
def test_random_bgd_matches_oracle(L):
    rng = random.Random(100 + L)
    for _ in range(3):
        v = random_bgd(rng, L, 300, cap=400)
        assert check_bgd(v).L == L
        rep = normalize_bgd(v, L)
        w = rep.output
        assert list(w.values) == oracle_output(rep)
        assert check_tree_hypotheses(w, rep.lam_num, rep.lam_den, rep.growth_C).passed
        assert Fraction(rep.lam_num, rep.lam_den) < 2
        assert Fraction(rep.lam_num, rep.lam_den) ** rep.ell > L
        assert growth_type_equivalent(v, w, 1000).A == rep.witness.A
        # C is the least admissible scale from the start constant on
        if rep.C > rep.C0:
            smaller = oracle_floors(v.values, rep.C - 1, L)
            d = [smaller[k + 1] - smaller[k] for k in range(len(smaller) - 1)]
            assert d[0] < 1 or any(d[k] < 2 or d[k] > 2 * d[k - 1] for k in range(1, len(d)))


def test_already_tree_ready_input_stays_equivalent():
    v = tabulate({"kind": "affine", "a": 2, "b": 1}, 100)
    rep = normalize_bgd(v, 1)
    assert check_tree_hypotheses(rep.output, rep.lam_num, rep.lam_den, rep.growth_C).passed
    assert rep.output.values == tuple(rep.C * x - rep.shift for x in v.values)


def test_ramp_keeps_root_budget():
    v = G(1, 50, 100, 160, 230)
    L = check_bgd(v).L
    rep = normalize_bgd(v, L)
    w = rep.output
    assert w[0] == 1 and w[1] - w[0] <= 2
    assert rep.ramp and rep.ramp[0] == 2
    assert check_tree_hypotheses(w, rep.lam_num, rep.lam_den, rep.growth_C).passed


def test_minorant_examples():
    m = convex_minorant(G(1, 1, 2, 4))
    assert m.breakpoints == ((0, 1), (1, 1), (2, 2), (3, 4))
    m = convex_minorant(G(1, 3, 4, 9))
    assert m.breakpoints == ((0, 1), (2, 4), (3, 9))
    assert m.evaluated == (1, Fraction(5, 2), 4, 9)
    aff = tabulate({"kind": "affine", "a": 3, "b": 2}, 20)
    m = convex_minorant(aff)
    assert m.evaluated == tuple(Fraction(x) for x in aff.values)
    assert m.breakpoints == ((0, 2), (20, 62))


@settings(max_examples=150, deadline=None)
@given(st.lists(st.integers(0, 30), min_size=1, max_size=60), st.integers(0, 10))
def test_minorant_property(incs, v0):
    vals = [v0]
    for x in incs:
        vals.append(vals[-1] + x)
    m = convex_minorant(GrowthFunction(tuple(vals)))
    assert list(m.evaluated) == minorant_oracle(vals)
    for x, y in m.breakpoints:
        assert vals[x] == y
    assert all(m.evaluated[n] <= vals[n] for n in range(len(vals)))


def test_suplinear_examples():
    v = tabulate({"kind": "polynomial", "coeffs": [1, 0, 1]}, 200)
    rep = suplinear_report(v, check_bgd(v).L)
    w = rep.output
    d = w.diffs()
    assert all(d[k + 1] > d[k] for k in range(len(d) - 1))
    assert all(w[n] == 2 * v[n] for n in range(rep.patched_prefix, len(v)))
    assert check_bgd(w).L <= check_bgd(v).L
    with pytest.raises(NotSuperlinear):
        suplinear_representative(tabulate({"kind": "affine", "a": 1, "b": 1}, 200), 1)


def test_suplinear_convex_input_doubles_past_prefix():
    v = tabulate({"kind": "polynomial", "coeffs": [5, 1, 0, 1]}, 80)
    rep = suplinear_report(v, check_bgd(v).L)
    for n in range(rep.patched_prefix, len(v)):
        assert rep.output[n] == 2 * v[n]


def test_suplinear_non_convex_is_bgd_and_equivalent():
    v = tabulate({"kind": "power", "num": 3, "den": 2, "offset": 1}, 500)
    L = check_bgd(v).L
    rep = suplinear_report(v, L)
    w = rep.output
    assert check_bgd(w).L <= L
    assert rep.final_slope > rep.threshold
    assert growth_type_equivalent(v, w, 1000).A <= 3
    assert all(x >= 2 for x in w.diffs())
