"""Growth functions as exact integer tables, and the witnesses around them.

Everything quantified over all ``n`` is checked up to the stored horizon and
every verdict records that horizon.
"""

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from ._intmath import ceil_div, dominated_by_geometric, iroot
from .exceptions import DegenerateRange, IndexOutOfHorizon, NoWitness, NotBgd
from .verdict import _Collector


@dataclass(frozen=True)
class GrowthFunction:
    """Nondecreasing table ``v(0), ..., v(horizon)`` of nonnegative integers."""

    values: tuple

    def __post_init__(self):
        vals = tuple(int(x) for x in self.values)
        if not vals:
            raise ValueError("a growth function needs at least one value")
        if vals[0] < 0:
            raise ValueError("growth values must be nonnegative")
        for n in range(len(vals) - 1):
            if vals[n + 1] < vals[n]:
                raise ValueError(f"not nondecreasing at n={n}: {vals[n]} > {vals[n + 1]}")
        object.__setattr__(self, "values", vals)

    @property
    def horizon(self):
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def diff(self, n):
        return diff(self, n)

    def diffs(self):
        """``[v(1)-v(0), ..., v(N)-v(N-1)]``; entry ``k`` is ``v'(k+1)``."""
        vals = self.values
        return [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]

    def truncate(self, horizon):
        if horizon > self.horizon:
            raise IndexOutOfHorizon(f"cannot extend horizon {self.horizon} to {horizon}")
        return GrowthFunction(self.values[: horizon + 1])

    def to_dict(self):
        return {"horizon": self.horizon, "values": [str(x) for x in self.values]}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, data):
        if "kind" in data:
            return tabulate(data, data["horizon"])
        values = [int(x) for x in data["values"]]
        if "horizon" in data and int(data["horizon"]) != len(values) - 1:
            raise ValueError(
                f"horizon {data['horizon']} does not match {len(values)} values"
            )
        return cls(tuple(values))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class BgdWitness:
    L: int
    horizon: int


@dataclass(frozen=True)
class EquivalenceWitness:
    A: int
    horizon_checked: int

    def to_dict(self):
        return {"A": self.A, "horizon_checked": self.horizon_checked}


@dataclass(frozen=True)
class CurvatureParams:
    m: int
    kappa: Fraction

    def __post_init__(self):
        object.__setattr__(self, "kappa", Fraction(self.kappa))
        if self.m < 2:
            raise ValueError("dimension m must be >= 2")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")


def diff(v, n):
    """First difference ``v(n) - v(n-1)`` for ``1 <= n <= horizon``."""
    if n < 1 or n > v.horizon:
        raise IndexOutOfHorizon(f"diff index {n} outside [1, {v.horizon}]")
    return v.values[n] - v.values[n - 1]


def check_bgd(v):
    """Smallest integer ``L >= 1`` with ``1/L <= v'(n+2) <= L v'(n+1)`` on the horizon.

    For integer tables the lower bound just says every increment from
    ``v(2)-v(1)`` on is positive.  Raises :class:`NotBgd` at the first ``n``
    where ``v(n+2) - v(n+1)`` is zero, or where it is positive after a zero
    increment (no finite ``L`` can cover that ratio).
    """
    if v.horizon < 2:
        raise ValueError("check_bgd needs horizon >= 2")
    d = v.diffs()
    L = 1
    for n in range(v.horizon - 1):
        prev, nxt = d[n], d[n + 1]
        if nxt == 0:
            raise NotBgd(n, "zero increment v(n+2)-v(n+1)")
        if prev == 0:
            raise NotBgd(n, "positive increment after a zero one")
        L = max(L, ceil_div(nxt, prev))
    return BgdWitness(L, v.horizon)


def bgd_holds(v, L):
    """True iff ``L`` is a valid (not necessarily minimal) bgd constant for ``v``."""
    d = v.diffs()
    for n in range(v.horizon - 1):
        if d[n + 1] < 1 or d[n + 1] > L * d[n]:
            return False
    return True


def bgd_constant_from_curvature(p, digits=15):
    """Upper-bound rational for ``(e^k / (1 - e^(-2k)))^(m-1)``.

    Evaluated with 30 guard digits beyond ``digits`` significant ones and
    rounded up at the last kept digit, so the returned value is never below
    the true constant.
    """
    with mpmath.workdps(digits + 30):
        k = mpmath.mpf(p.kappa.numerator) / p.kappa.denominator
        x = (mpmath.e**k / (1 - mpmath.e ** (-2 * k))) ** (p.m - 1)
        exponent = int(mpmath.floor(mpmath.log10(x)))
        scale = digits - 1 - exponent
        if scale >= 0:
            scaled = x * mpmath.mpf(10) ** scale
            num = int(mpmath.ceil(scaled))
            if num == scaled:
                num += 1
            return Fraction(num, 10**scale)
        scaled = x / mpmath.mpf(10) ** (-scale)
        num = int(mpmath.ceil(scaled))
        if num == scaled:
            num += 1
        return Fraction(num * 10 ** (-scale))


def _equivalent_at(v, w, A):
    limit = min(v.horizon, w.horizon)
    nmax = (limit - A) // A
    if nmax < 0:
        return None
    vv, ww = v.values, w.values
    for n in range(nmax + 1):
        m = A * n + A
        if ww[n] > A * vv[m] + A or vv[n] > A * ww[m] + A:
            return False
    return nmax


def growth_type_equivalent(v, w, A_max=1000):
    """Smallest ``A <= A_max`` with ``w(n) <= A v(An+A) + A`` and symmetrically.

    Only indices with ``An + A`` inside both horizons are checked, so the
    certified range shrinks as ``A`` grows; a value of ``A`` whose range is
    empty certifies nothing and ends the search.
    """
    if min(v.horizon, w.horizon) < 1:
        raise DegenerateRange("A=1 leaves no index to check")
    for A in range(1, A_max + 1):
        res = _equivalent_at(v, w, A)
        if res is None:
            break
        if res is not False:
            return EquivalenceWitness(A, res)
    raise NoWitness(f"no A <= {A_max} certifies equivalence")


def check_tree_hypotheses(v, lambda_num, lambda_den, C):
    """Check ``v(0)=1``, ``2 <= v'(n+2) <= 2 v'(n+1)`` and ``v(n) <= C lam^n``.

    Violations report ``index`` as the ``n`` whose increment ``v(n+1)-v(n)``
    (or value ``v(n)`` for the growth bound) breaks the rule.
    """
    if Fraction(lambda_num, lambda_den) >= 2:
        raise ValueError("lambda must be < 2")
    if C < 1:
        raise ValueError("C must be >= 1")
    out = _Collector("tree_hypotheses", limit=1)
    vals = v.values
    if vals[0] != 1:
        out.add("v(0)=1", 0, value=vals[0])
        return out.verdict(v.horizon)
    d = v.diffs()
    for k in range(1, len(d)):
        if d[k] < 2:
            out.add("increment>=2", k, increment=d[k])
            return out.verdict(v.horizon)
        if d[k] > 2 * d[k - 1]:
            out.add("increment<=2*previous", k, increment=d[k], previous=d[k - 1])
            return out.verdict(v.horizon)
    bad = dominated_by_geometric(vals, C, lambda_num, lambda_den)
    if bad is not None:
        out.add("growth_bound", bad, value=vals[bad], lam=f"{lambda_num}/{lambda_den}", C=C)
    return out.verdict(v.horizon)


def increments_diverge(v):
    """Finite-horizon proxy for ``v'(n) -> infinity``.

    The final increment must strictly exceed every increment in the first half
    of the table.
    """
    d = v.diffs()
    if len(d) < 2:
        return False
    head = d[: max(1, len(d) // 2)]
    return d[-1] > max(head)


def tabulate(form, horizon):
    """Tabulate a closed-form generator ``{"kind": ..., params}`` on ``0..horizon``.

    kinds: ``affine`` (a n + b), ``geometric`` (scale * base^n),
    ``polynomial`` (sum coeffs[i] n^i), ``power`` (floor(n^(num/den)) + offset).
    """
    kind = form["kind"]
    ns = range(horizon + 1)
    if kind == "affine":
        a, b = int(form.get("a", 1)), int(form.get("b", 0))
        vals = [a * n + b for n in ns]
    elif kind == "geometric":
        base, scale = int(form["base"]), int(form.get("scale", 1))
        vals = []
        x = scale
        for _ in ns:
            vals.append(x)
            x *= base
    elif kind == "polynomial":
        coeffs = [int(c) for c in form["coeffs"]]
        vals = [sum(c * n**i for i, c in enumerate(coeffs)) for n in ns]
    elif kind == "power":
        num, den = int(form["num"]), int(form.get("den", 1))
        offset = int(form.get("offset", 0))
        vals = [iroot(n**num, den) + offset for n in ns]
    else:
        raise ValueError(f"unknown generator kind {kind!r}")
    return GrowthFunction(tuple(vals))


def from_function(f, horizon):
    return GrowthFunction(tuple(int(f(n)) for n in range(horizon + 1)))


def float_log_ratio_max(values, lam):
    """``max_n log(values[n]) - n log(lam)``; used to seed exact domination checks."""
    ll = math.log(lam)
    best = -math.inf
    for n, x in enumerate(values):
        if x > 0:
            best = max(best, math.log(x) - n * ll)
    return best
