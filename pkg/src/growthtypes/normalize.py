"""Change of representative inside a growth type.

Two transformations: smoothing a bgd-function into one whose increments are
at least 2 and grow by at most a factor 2 per step (so a binary tree can
realise it), and adding the convex minorant to force diverging increments.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import mpmath

from ._intmath import ceil_div, dominated_by_geometric, floor_frac, iroot
from .exceptions import InvalidWitness, NotSuperlinear, PrecisionExhausted
from .growth import (
    EquivalenceWitness,
    GrowthFunction,
    bgd_holds,
    float_log_ratio_max,
    growth_type_equivalent,
    increments_diverge,
)


@dataclass(frozen=True)
class NormalizationReport:
    input: GrowthFunction
    output: GrowthFunction
    L: int
    ell: int
    C: int
    shift: int
    precision_bits: int
    C0: int
    ramp: tuple = ()
    lam_num: int = 1
    lam_den: int = 1
    growth_C: int = 1
    witness: Optional[EquivalenceWitness] = None
    input_diverges: bool = False
    output_diverges: bool = False

    @property
    def ramp_length(self):
        return len(self.ramp)

    def to_dict(self):
        return {
            "L": self.L,
            "ell": self.ell,
            "C": self.C,
            "C0": self.C0,
            "shift": str(self.shift),
            "precision_bits": self.precision_bits,
            "ramp": [str(x) for x in self.ramp],
            "lambda": [self.lam_num, self.lam_den],
            "growth_C": str(self.growth_C),
            "witness": self.witness.to_dict() if self.witness else None,
            "input_diverges": self.input_diverges,
            "output_diverges": self.output_diverges,
            "input": self.input.to_dict(),
            "output": self.output.to_dict(),
        }


def smoothing_period(L):
    """Smallest integer ``ell`` with ``ell > log2(L)``, i.e. ``2**ell > L``."""
    return 1 if L <= 1 else L.bit_length()


def _root_floor(L, ell, s, bits):
    """``floor(L^(s/ell) 2^bits)`` and whether it is exact."""
    x = L**s << (bits * ell)
    r = iroot(x, ell)
    return r, r**ell == x


def _start_constant(L, ell, min_delta):
    if L == 1:
        return max(1, ceil_div(2, min_delta))
    with mpmath.workdps(50):
        rho = mpmath.mpf(L) ** (mpmath.mpf(1) / ell)
        c0 = (rho - 1) / (L - 1)
        c = 2 / ((2 - rho) * c0 * min_delta)
        return max(1, int(mpmath.ceil(c)))


def _scaled_floors(vals, delta, C, L, ell, bits, max_bits):
    """``floor(C z(n))`` for every ``n`` on the refined grid, certified.

    ``z(k ell + s) = v(k) + delta_k (L^(s/ell) - 1) / (L - 1)``, the closed form
    of the smoothing recursion.  With ``M = C delta_k`` the floor of
    ``M (L^(s/ell) - 1)/(L - 1)`` equals ``(floor(M L^(s/ell)) - M) // (L - 1)``,
    and ``floor(M L^(s/ell))`` is pinned by a fixed-point enclosure of the root
    whose width halves with every extra bit; precision doubles until every
    floor is certified.
    """
    N = len(vals) - 1
    if L == 1:
        return [C * x for x in vals], 0
    Lm1 = L - 1
    while True:
        roots = [_root_floor(L, ell, s, bits) for s in range(ell)]
        out = []
        certified = True
        for k in range(N):
            base = C * vals[k]
            M = C * delta[k]
            out.append(base)
            for s in range(1, ell):
                r, exact = roots[s]
                lo = (M * r) >> bits
                if not exact:
                    hi = -((-M * (r + 1)) >> bits) - 1
                    if hi != lo:
                        certified = False
                        break
                out.append(base + (lo - M) // Lm1)
            if not certified:
                break
        if certified:
            out.append(C * vals[N])
            return out, bits
        bits *= 2
        if bits > max_bits:
            raise PrecisionExhausted(f"floors not certified within {max_bits} bits")


def _tree_ready(raw):
    """Increment conditions of the tree lemma, ignoring ``w(0)``."""
    d = [raw[k + 1] - raw[k] for k in range(len(raw) - 1)]
    if not d or d[0] < 1:
        return False
    for k in range(1, len(d)):
        if d[k] < 2 or d[k] > 2 * d[k - 1]:
            return False
    return True


def _root_ramp(first_increment):
    """Increments ``2, ..., ceil(x/2)`` leading into a first increment ``x > 2``."""
    incs = []
    x = first_increment
    while x > 2:
        x = ceil_div(x, 2)
        incs.append(x)
    return tuple(reversed(incs))


def _dominating_lambda(L, ell, bits=8):
    """Dyadic ``p / 2^bits`` strictly between ``L^(1/ell)`` and 2."""
    while True:
        num = iroot(L << (bits * ell), ell) + 1 if L > 1 else (1 << bits) + 1
        if num < 2 << bits:
            return num, 1 << bits
        bits += 4


def growth_constant(values, num, den):
    """Integer ``C`` with ``values[n] <= C (num/den)^n`` on the whole table, checked exactly."""
    est = float_log_ratio_max(values, num / den)
    C = max(1, math.ceil(math.exp(min(est, 700.0))) + 1)
    if est > 700:
        C = max(C, 1 << int(est / math.log(2) + 2))
    while dominated_by_geometric(values, C, num, den) is not None:
        C *= 2
    return C


def normalize_bgd(v, L, *, a_max=1000, start_bits=64, max_precision_bits=1 << 22, max_scan=100000):
    """Representative of ``v``'s growth type that satisfies the tree lemma.

    ``L`` must be a valid bgd constant for ``v``.  The table is refined by a
    factor ``ell`` (smallest integer above ``log2 L``) with geometric
    interpolation of ratio ``L^(1/ell) < 2`` inside each block, scaled by the
    smallest admissible integer ``C >= C0`` and floored, then shifted so the
    first value is 1.  If the first increment still exceeds 2 (a root may have
    at most two children) a doubling ramp is prepended and recorded in
    ``report.ramp``.
    """
    if v.horizon < 2:
        raise ValueError("normalize_bgd needs horizon >= 2")
    if L < 1 or not bgd_holds(v, L):
        raise InvalidWitness(f"L={L} is not a bgd constant for this sequence")
    vals = v.values
    delta = v.diffs()
    ell = smoothing_period(L)
    C0 = _start_constant(L, ell, min(delta))
    bits = start_bits
    C = C0
    for _ in range(max_scan):
        raw, bits = _scaled_floors(vals, delta, C, L, ell, bits, max_precision_bits)
        if _tree_ready(raw):
            break
        C += 1
    else:
        raise InvalidWitness(f"no admissible scaling constant in [{C0}, {C})")

    shift = raw[0] - 1
    w = [x - shift for x in raw]
    for k in range(len(vals)):
        assert w[k * ell] + shift == C * vals[k], "telescoping identity broken"

    ramp = ()
    if w[1] - w[0] > 2:
        ramp = _root_ramp(w[1] - w[0])
        head = [1]
        for inc in ramp:
            head.append(head[-1] + inc)
        offset = head[-1] - w[0]
        w = head[:-1] + [x + offset for x in w]

    lam_num, lam_den = _dominating_lambda(L, ell)
    growth_C = growth_constant(w, lam_num, lam_den)
    out = GrowthFunction(tuple(w))
    witness = growth_type_equivalent(v, out, a_max) if a_max else None
    return NormalizationReport(
        input=v,
        output=out,
        L=L,
        ell=ell,
        C=C,
        shift=shift,
        precision_bits=bits if L > 1 else 0,
        C0=C0,
        ramp=ramp,
        lam_num=lam_num,
        lam_den=lam_den,
        growth_C=growth_C,
        witness=witness,
        input_diverges=increments_diverge(v),
        output_diverges=increments_diverge(out),
    )


def smoothed_value_enclosure(v, L, n, bits=256):
    """Rational enclosure ``(lo, hi)`` of the unscaled interpolant ``z(n)``."""
    ell = smoothing_period(L)
    k, s = divmod(n, ell)
    if s == 0 or L == 1:
        z = Fraction(v[k]) if L > 1 else Fraction(v[n])
        return z, z
    d = v[k + 1] - v[k]
    r, exact = _root_floor(L, ell, s, bits)
    lo = Fraction(v[k]) + d * (Fraction(r, 1 << bits) - 1) / (L - 1)
    hi = lo if exact else Fraction(v[k]) + d * (Fraction(r + 1, 1 << bits) - 1) / (L - 1)
    return lo, hi


@dataclass(frozen=True)
class ConvexMinorant:
    breakpoints: tuple
    evaluated: tuple

    def increments(self):
        u = self.evaluated
        return [u[k + 1] - u[k] for k in range(len(u) - 1)]

    def slope_after(self, n):
        """Slope of the hull segment covering ``[n, n+1]``."""
        return self.evaluated[n + 1] - self.evaluated[n]

    def to_dict(self):
        return {
            "breakpoints": [[n, str(y)] for n, y in self.breakpoints],
            "evaluated": [str(x) for x in self.evaluated],
        }


def convex_minorant(v):
    """Lower convex hull of ``{(n, v(n))}`` by a monotone-chain pass.

    Collinear interior points are dropped, so breakpoints are exactly the
    indices where the slope changes (plus both ends).
    """
    if v.horizon < 1:
        raise ValueError("convex_minorant needs horizon >= 1")
    hull = []
    for p in enumerate(v.values):
        while len(hull) >= 2:
            (x0, y0), (x1, y1) = hull[-2], hull[-1]
            if (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0) > 0:
                break
            hull.pop()
        hull.append(p)
    u = []
    for (x0, y0), (x1, y1) in zip(hull, hull[1:]):
        span = x1 - x0
        for n in range(x0, x1):
            u.append(y0 + Fraction((y1 - y0) * (n - x0), span))
    u.append(Fraction(hull[-1][1]))
    return ConvexMinorant(tuple(hull), tuple(u))


@dataclass(frozen=True)
class SuplinearReport:
    input: GrowthFunction
    output: GrowthFunction
    minorant: ConvexMinorant
    L: int
    threshold: Fraction
    final_slope: Fraction
    patched_prefix: int
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "L": self.L,
            "threshold": str(self.threshold),
            "final_slope": str(self.final_slope),
            "patched_prefix": self.patched_prefix,
            "input": self.input.to_dict(),
            "output": self.output.to_dict(),
            "breakpoints": [[n, str(y)] for n, y in self.minorant.breakpoints],
        }


def suplinear_report(v, L, threshold=None):
    """Build ``w = floor(u) + v`` with ``u`` the convex minorant, then patch the prefix.

    ``threshold`` is the divergence proxy: the last slope of ``u`` must exceed
    it; by default it is twice the first slope (and at least 2).  After
    flooring, increments are raised on the shortest prefix so that every
    increment is at least 2 and ``w'(n+1) <= L w'(n)`` holds throughout.
    """
    if v.horizon < 2:
        raise ValueError("suplinear_representative needs horizon >= 2")
    d = v.diffs()
    for n in range(len(d) - 1):
        if d[n + 1] > L * d[n]:
            raise InvalidWitness(f"v'(n+2) > L v'(n+1) at n={n}")
    u = convex_minorant(v)
    first = u.slope_after(0)
    final = u.slope_after(v.horizon - 1)
    if threshold is None:
        threshold = max(Fraction(2), 2 * first)
    threshold = Fraction(threshold)
    if final <= threshold:
        raise NotSuperlinear(
            f"final minorant slope {final} does not exceed threshold {threshold}"
        )
    raw = [floor_frac(un) + vn for un, vn in zip(u.evaluated, v.values)]
    inc = [raw[k + 1] - raw[k] for k in range(len(raw) - 1)]
    last_bad = -1
    for k in range(len(inc)):
        if inc[k] < 2 or (k + 1 < len(inc) and inc[k + 1] > L * inc[k]):
            last_bad = k
    for k in range(last_bad, -1, -1):
        inc[k] = max(inc[k], 2, ceil_div(inc[k + 1], L))
    w = [raw[0]]
    for x in inc:
        w.append(w[-1] + x)
    out = GrowthFunction(tuple(w))
    return SuplinearReport(v, out, u, L, threshold, final, last_bad + 1)


def suplinear_representative(v, L, threshold=None):
    return suplinear_report(v, L, threshold).output
