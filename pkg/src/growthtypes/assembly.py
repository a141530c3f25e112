"""Plumbing pieces along an admissible tree and auditing the result.

Levels of the tree are ``ell`` slices thick. A piece at tree level ``n`` owns
slices ``n*ell + s`` for ``s < depth``; the Q piece of schedule entry ``j``
spans trunk levels ``n_j .. n_j + t_j - 1`` and starts at ``n_j*ell``. Only
levels below the tree depth get pieces (the child counts of the last level
are unknown), so the discrete growth is exact on ``r <= depth*ell - 1``.

Vertices are handled in aggregate: within a level, all non-trunk vertices
with the same child count carry the same profile, so every quantity is a sum
over (level, kind) groups weighted by a count.
"""

import bisect
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from ._intmath import ceil_frac, floor_frac
from .catalog import Catalog, CatalogParams, make_catalog, validate_catalog
from .exceptions import (
    GrowthError,
    HorizonExceeded,
    MissingProfile,
    MissingSelection,
    ModeInfeasible,
    PipelineError,
    StretchGap,
    TrunkTooShort,
)
from .growth import (
    GrowthFunction,
    check_bgd,
    check_tree_hypotheses,
    growth_type_equivalent,
)
from .normalize import normalize_bgd, suplinear_report
from .tree import (
    AdmissibleTree,
    SparseSet,
    _count_at,
    _prefix_children,
    build_tree,
    verify_admissible,
)
from .verdict import _Collector

INFINITE = "infinite"
FINITE_TYPE = "finite-type"
MODES = (INFINITE, FINITE_TYPE)
KIND_BY_CHILDREN = {2: "J", 1: "K", 0: "HS"}


class CheckFailed(GrowthError):
    """An audit returned a failing verdict inside the pipeline."""

    def __init__(self, verdict):
        self.verdict = verdict
        first = verdict.first
        super().__init__(f"{verdict.check} failed: {first.rule} at {first.index}")


def _mode(mode):
    m = str(mode).lower().replace("_", "-")
    if m in ("finitetype", "finite"):
        m = FINITE_TYPE
    if m not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    return m


@dataclass(frozen=True)
class ParameterSelection:
    mode: str
    n: tuple
    t: tuple
    r: Optional[tuple] = None
    stretch_Rs: Optional[tuple] = None
    info: dict = field(default_factory=dict)

    @property
    def S(self):
        return SparseSet(tuple(zip(self.n, self.t)))

    @property
    def J(self):
        return len(self.n)

    def to_dict(self):
        return {
            "mode": self.mode,
            "n": list(self.n),
            "t": list(self.t),
            "r": list(self.r) if self.r is not None else None,
            "stretch_Rs": list(self.stretch_Rs) if self.stretch_Rs is not None else None,
            "info": {k: (str(v) if isinstance(v, Fraction) else v) for k, v in self.info.items()},
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            data["mode"],
            tuple(data["n"]),
            tuple(data["t"]),
            tuple(data["r"]) if data.get("r") is not None else None,
            tuple(data["stretch_Rs"]) if data.get("stretch_Rs") is not None else None,
            dict(data.get("info", {})),
        )


@dataclass
class PlumbedComplex:
    """Tree, schedule and catalog, with the lego-rule assignment derived from them."""

    tree: AdmissibleTree
    selection: Optional[ParameterSelection]
    catalog: Catalog

    def __post_init__(self):
        params = self.catalog.params
        D = self.tree.depth
        self.ell = params.ell
        self.assigned_levels = max(D, 1)
        self._q_of = {}
        self._r_from = []
        if self.selection is not None:
            for j, (nj, tj) in enumerate(zip(self.selection.n, self.selection.t)):
                for k in range(nj, nj + tj):
                    self._q_of[k] = j
                self._r_from.append(nj + tj)

    @property
    def horizon(self):
        """Last slice level on which the discrete growth is complete."""
        return self.assigned_levels * self.ell - 1

    def trunk_piece(self, k):
        """``(name, base_level)`` of the piece containing trunk vertex ``k``."""
        if k == 0:
            return "HS", 0
        if k in self._q_of:
            j = self._q_of[k]
            return f"Q({j})", self.selection.n[j]
        i = bisect.bisect_right(self._r_from, k) - 1
        if i >= 0:
            return f"R({i})", k
        return KIND_BY_CHILDREN[_count_at(self.tree.runs[k], 0)], k

    def piece_of(self, n, i):
        """Piece name of vertex ``i`` at level ``n`` (per-vertex view, for oracles)."""
        if i == 0:
            return self.trunk_piece(n)[0]
        return KIND_BY_CHILDREN[self.tree.child_count(n, i)]

    def slice_index(self, n, i):
        if i == 0:
            return self.trunk_piece(n)[1] * self.ell
        return n * self.ell

    def side_counts(self, n):
        """Counts of non-trunk vertices at level ``n`` by piece kind."""
        out = {"J": 0, "K": 0, "HS": 0}
        first = True
        for c, k in self.tree.runs[n]:
            if first:
                k -= 1
                first = False
            if k:
                out[KIND_BY_CHILDREN[c]] += k
        return out

    def level_groups(self, n):
        """``(name, base_level, count)`` for every piece group starting at level ``n``."""
        groups = []
        name, base = self.trunk_piece(n)
        if base == n:
            groups.append((name, base, 1))
        if n:
            for kind, cnt in self.side_counts(n).items():
                if cnt:
                    groups.append((kind, n, cnt))
        return groups

    def piece_count(self):
        total = sum(self.tree.sizes[: self.assigned_levels])
        if self.selection is not None:
            total -= sum(t - 1 for t in self.selection.t)
        return total

    def assignment_summary(self):
        rows = []
        for n in range(self.assigned_levels):
            row = {"level": n, "trunk": self.trunk_piece(n)[0]}
            if n:
                row["counts"] = {k: str(v) if v > 2**53 else v for k, v in self.side_counts(n).items()}
            rows.append(row)
        return rows

    def to_dict(self):
        return {
            "horizon_r": self.horizon,
            "tree": self.tree.to_dict(),
            "selection": self.selection.to_dict() if self.selection else None,
            "catalog": self.catalog.to_dict(),
            "assignment": self.assignment_summary(),
        }

    @classmethod
    def from_dict(cls, data):
        sel = data.get("selection")
        return cls(
            AdmissibleTree.from_dict(data["tree"]),
            ParameterSelection.from_dict(sel) if sel else None,
            Catalog.from_dict(data["catalog"]),
        )


def assign_pieces(tree, sel, catalog):
    """Apply the three lego rules; raises if the schedule or catalog cannot be honoured.

    Root: HS. Trunk: Q(j) on ``[n_j, n_j + t_j)``, R(j) until ``n_{j+1}`` and
    R(J-1) afterwards; trunk levels before ``n_0`` take J or K by child count.
    Everything else: J, K or HS for 2, 1 or 0 children.
    """
    D = tree.depth
    if sel is not None:
        if sel.J != catalog.params.J:
            raise MissingProfile(f"schedule has {sel.J} entries, catalog {catalog.params.J}")
        for j, (nj, tj) in enumerate(zip(sel.n, sel.t)):
            if nj < 1 or nj + tj > D:
                raise TrunkTooShort(f"Q({j}) on levels [{nj}, {nj + tj}) needs depth >= {nj + tj}, got {D}")
    c = PlumbedComplex(tree, sel, catalog)
    needed = set()
    for n in range(c.assigned_levels):
        for name, _, _ in c.level_groups(n):
            needed.add(name)
    for name in sorted(needed):
        catalog.piece(name)
    return c


@dataclass(frozen=True)
class DiscreteGrowth:
    z: GrowthFunction
    per_level_slice_count: tuple

    @property
    def horizon(self):
        return self.z.horizon

    def increments(self):
        z = self.z.values
        return [z[0]] + [z[r] - z[r - 1] for r in range(1, len(z))]

    def slice_growth(self):
        """Cumulative slice count ``V(r) = c(0) + ... + c(r)``."""
        out = []
        total = 0
        for c in self.per_level_slice_count:
            total += c
            out.append(total)
        return GrowthFunction(tuple(out))

    def to_dict(self):
        d = self.z.to_dict()
        d["slice_counts"] = [str(c) for c in self.per_level_slice_count]
        return d

    @classmethod
    def from_dict(cls, data):
        z = GrowthFunction.from_dict(data)
        counts = tuple(int(c) for c in data["slice_counts"])
        if len(counts) != len(z):
            raise ValueError("slice_counts and values differ in length")
        return cls(z, counts)


def discrete_growth(c):
    """``z(n)``: total volume of slices with level ``<= n``, exact."""
    horizon = c.horizon
    dz = [0] * (horizon + 1)
    cnt = [0] * (horizon + 1)
    ell = c.ell
    for n in range(c.assigned_levels):
        for name, base, k in c.level_groups(n):
            vols = c.catalog.piece(name).slice_volumes
            r0 = base * ell
            for s, x in enumerate(vols):
                r = r0 + s
                if r > horizon:
                    break
                dz[r] += k * x
                cnt[r] += k
    z = []
    total = 0
    for x in dz:
        total += x
        z.append(total)
    return DiscreteGrowth(GrowthFunction(tuple(z)), tuple(cnt))


def check_lemma_z(c, d, v_slice=None):
    """``(c(r) - 1) h <= z'(r) <= H c(r) + U_j`` at every slice level.

    ``c(r)`` is the number of slices at level ``r`` (taken from ``v_slice`` if
    given, else recounted from the complex). ``j`` is the schedule window
    containing ``r``; levels before the first Q use ``j = 0``.
    """
    params = c.catalog.params
    out = _Collector("lemma_z")
    dz = d.increments()
    if v_slice is not None:
        vs = v_slice.values
        counts = [vs[0]] + [vs[r] - vs[r - 1] for r in range(1, len(vs))]
    else:
        counts = list(discrete_growth(c).per_level_slice_count)
    if len(counts) != len(dz):
        out.add("horizon", None, z_horizon=len(dz) - 1, count_horizon=len(counts) - 1)
        return out.verdict(d.horizon)
    starts = [nj * c.ell for nj in c.selection.n] if c.selection else []
    for r, (x, k) in enumerate(zip(dz, counts)):
        j = max(0, bisect.bisect_right(starts, r) - 1)
        lo = (k - 1) * params.h
        hi = params.H * k + params.U[j]
        if x < lo:
            out.add("lower", r, side="lower", increment=x, bound=lo, count=k, window=j)
        elif x > hi:
            out.add("upper", r, side="upper", increment=x, bound=hi, count=k, window=j)
    return out.verdict(d.horizon)


def _interp(vals, x):
    N = len(vals) - 1
    if x < 0 or x > N:
        raise HorizonExceeded(f"v evaluated at {x} outside [0, {N}]")
    k = floor_frac(x)
    if k == N:
        return Fraction(vals[N])
    return vals[k] + (vals[k + 1] - vals[k]) * (x - k)


def stretch_middle_gap(a, R, B, C, v):
    """First ``x`` in ``[a, a+R]`` where the short middle-interval step fails, else ``None``.

    The step needs ``C (v(x) - v(a)) <= B (v(Bx) - v(Ba))`` and
    ``(v(x) - v(a)) / C >= (v(x/B) - v(a/B)) / B``. Both sides are piecewise
    linear in ``x``, so checking the breakpoints of ``v(x)``, ``v(Bx)`` and
    ``v(x/B)`` inside the interval is exhaustive.
    """
    a, R, B, C = map(Fraction, (a, R, B, C))
    vals = v.values
    hi = a + R
    pts = {a, hi}
    pts.update(Fraction(k) for k in range(ceil_frac(a), floor_frac(hi) + 1))
    pts.update(Fraction(k) / B for k in range(ceil_frac(a * B), floor_frac(hi * B) + 1))
    pts.update(Fraction(k) * B for k in range(ceil_frac(a / B), floor_frac(hi / B) + 1))
    va, vBa, vaB = _interp(vals, a), _interp(vals, B * a), _interp(vals, a / B)
    for x in sorted(pts):
        dv = _interp(vals, x) - va
        if C * dv > B * (_interp(vals, B * x) - vBa):
            return x
        if dv / C < (_interp(vals, x / B) - vaB) / B:
            return x
    return None


def stretch_R(a, b, A, B, C, v, R_min=0, R_max=None, check_middle=True):
    """Smallest ``R >= R_min`` with ``f(R) <= B v(a+R)`` and ``g(R) >= v(a+R+b)/B``.

    ``f(R) = B v(Ba) + C v(a+R) + A (v(a+R+b) - v(a+R))`` and
    ``g(R) = v(a/B)/B - v(a)/C + v(a+R)/C`` bound any ``z`` obeying the three
    derivative hypotheses beyond ``a+R``. ``v`` is the piecewise-linear
    interpolation of the table, evaluated exactly. With ``check_middle`` the
    interval ``[a, a+R]`` is certified too (see :func:`stretch_middle_gap`) and
    :class:`StretchGap` is raised when it fails, which only happens for
    non-convex ``v``.
    """
    a, b, A, B, C = map(Fraction, (a, b, A, B, C))
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    if not A > B > C > 1:
        raise ValueError("need A > B > C > 1")
    vals = v.values
    N = v.horizon
    last = floor_frac(N - a - b)
    R_max = last if R_max is None else min(R_max, last)
    if B * a > N:
        raise HorizonExceeded(f"v is tabulated to {N}, B*a = {B * a}")
    head = B * _interp(vals, B * a)
    low_head = _interp(vals, a / B) / B - _interp(vals, a) / C
    for R in range(max(0, R_min), R_max + 1):
        v1 = _interp(vals, a + R)
        v2 = _interp(vals, a + R + b)
        if head + C * v1 + A * (v2 - v1) <= B * v1 and low_head + v1 / C >= v2 / B:
            if check_middle:
                x = stretch_middle_gap(a, R, B, C, v)
                if x is not None:
                    raise StretchGap(f"middle interval fails at x={x} for R={R}")
            return R
    raise HorizonExceeded(f"no R in [{R_min}, {R_max}] satisfies both stretch inequalities")


def trunk_with_leaves(S, depth):
    """Trunk ray with one leaf glued at ``x_k`` for every ``k`` outside ``S``."""
    runs = []
    for k in range(depth):
        lvl = [(1 if k in S else 2, 1)]
        if k >= 1 and (k - 1) not in S:
            lvl.append((0, 1))
        runs.append(tuple(lvl))
    last = [(0, 1)]
    if depth >= 1 and (depth - 1) not in S:
        last.append((0, 1))
    runs.append(tuple(last))
    return AdmissibleTree(tuple(runs), S)


def _z0_violation(z0, bound):
    vals = z0.z.values
    for n in range(1, len(vals)):
        if vals[n] > bound * n:
            return n
    return None


def select_parameters(v, params, mode, catalog=None, *, R_max=None):
    """Schedule ``n_j`` for the Q pieces on the trunk of a tree of depth ``v.horizon``.

    Infinite mode: ``n_j = max(d_j, t_j, r_j, j (n_{j-1} + t_{j-1}))`` with
    ``r_j`` the first ``n`` after which ``v'`` stays ``>= max(h, U_j)``.

    Finite type: ``n_j = a + R`` with ``a = n_{j-1} + t_{j-1}`` (1 for the
    first piece) and ``R`` from :func:`stretch_R` with ``B = 2u``, ``C = u``,
    ``A = max(max Q_j volume, B + 1)``, ``b = t_j`` and ``v(x) = x``; ``R`` is
    raised until ``n_j >= d_j``, the density condition, and the direct bound
    ``z_0(n) <= 4 u^2 n`` (``n >= 1``) on the leafed trunk all hold.
    """
    mode = _mode(mode)
    D = v.horizon
    J = params.J
    if mode == INFINITE:
        d = v.diffs()
        need = max(max(params.h, U) for U in params.U)
        if d[-1] < need:
            raise ModeInfeasible(f"v'(horizon) = {d[-1]} < max(h, U_j) = {need}")
        ns, rs = [], []
        for j in range(J):
            theta = max(params.h, params.U[j])
            r = 1
            for m in range(D, 0, -1):
                if d[m - 1] < theta:
                    r = m + 1
                    break
            prev = j * (ns[-1] + params.t[j - 1]) if j else 0
            nj = max(params.d[j], params.t[j], r, prev, 1)
            if nj + params.t[j] > D:
                raise HorizonExceeded(f"Q({j}) needs levels up to {nj + params.t[j]}, depth is {D}")
            ns.append(nj)
            rs.append(r)
        return ParameterSelection(INFINITE, tuple(ns), params.t, tuple(rs))

    if len(set(params.u)) != 1:
        raise ModeInfeasible("finite type needs a constant u")
    u = params.u[0]
    if u < 2:
        raise ModeInfeasible(f"u={u}: need B=2u > C=u > 1")
    if catalog is None:
        raise ModeInfeasible("finite type needs the catalog (A is the largest Q slice)")
    B, C = 2 * u, u
    bound = 4 * u * u
    ident = GrowthFunction(tuple(range(B * (D + 2) + 2)))
    ns, Rs = [], []
    for j in range(J):
        tj = params.t[j]
        a = ns[-1] + params.t[j - 1] if j else 1
        A = max(catalog.piece(f"Q({j})").max_volume, B + 1)
        R_min = max(1, params.d[j] - a, tj - a, (j - 1) * a if j else 0)
        while True:
            if a + R_min + tj > D:
                raise HorizonExceeded(f"Q({j}) does not fit below depth {D}")
            top = D - a - tj if R_max is None else min(R_max, D - a - tj)
            R = stretch_R(a, tj, A, B, C, ident, R_min=R_min, R_max=top)
            nj = a + R
            if nj + tj > D:
                raise HorizonExceeded(f"Q({j}) needs levels up to {nj + tj}, depth is {D}")
            sel = ParameterSelection(FINITE_TYPE, tuple(ns + [nj]), params.t[: j + 1])
            part = Catalog(_truncated_params(params, j + 1), [catalog[k] for k in catalog if not _beyond(k, j)])
            T0 = trunk_with_leaves(sel.S, min(D, nj + tj + 1))
            z0 = discrete_growth(assign_pieces(T0, sel, part))
            bad = _z0_violation(z0, bound)
            if bad is None:
                break
            R_min = R + 1
        ns.append(nj)
        Rs.append(R)
    sel = ParameterSelection(FINITE_TYPE, tuple(ns), params.t, None, tuple(Rs))
    z0 = discrete_growth(assign_pieces(trunk_with_leaves(sel.S, D), sel, catalog))
    bad = _z0_violation(z0, bound)
    if bad is not None:
        raise ModeInfeasible(f"z_0({bad}) > {bound}*{bad} after the last Q piece")
    ratio = max(Fraction(x, n) for n, x in enumerate(z0.z.values) if n) if z0.horizon else 0
    return ParameterSelection(
        FINITE_TYPE, tuple(ns), params.t, None, tuple(Rs),
        {"z0_bound": bound, "z0_checked_up_to": z0.horizon, "z0_max_ratio": ratio},
    )


def _truncated_params(params, J):
    return CatalogParams(
        params.ell, params.h, params.H, params.t[:J], params.u[:J], params.U[:J], params.d[:J],
        params.finite_type,
    )


def _beyond(name, j):
    if "(" not in name:
        return False
    return int(name[name.index("(") + 1 : -1]) > j


def leafed_trunk_growth(c):
    """Discrete growth of the depth-1-branch tree sharing ``c``'s schedule and catalog."""
    T0 = trunk_with_leaves(c.selection.S, c.tree.depth)
    return discrete_growth(assign_pieces(T0, c.selection, c.catalog))


def check_prall_integration(z, z0, v, v0, h, H):
    """``z0(n) + h (v(n) - v0(n)) <= z(n) <= z0(n) + H v(n)`` on the common range."""
    zz = z.z.values if isinstance(z, DiscreteGrowth) else z.values
    zz0 = z0.z.values if isinstance(z0, DiscreteGrowth) else z0.values
    N = min(len(zz), len(zz0), len(v.values), len(v0.values)) - 1
    out = _Collector("prall_integration")
    for n in range(N + 1):
        lo = zz0[n] + h * (v[n] - v0[n])
        hi = zz0[n] + H * v[n]
        if zz[n] < lo:
            out.add("lower", n, side="lower", z=zz[n], bound=lo)
        elif zz[n] > hi:
            out.add("upper", n, side="upper", z=zz[n], bound=hi)
    return out.verdict(N)


def check_prall_derived(c, d):
    """``(h-1) c(r) <= z'(r) <= (H+1) c(r)`` where ``c(r) >= max(h, U_j)`` past the first Q.

    With ``h = 1`` the lower constant is 0 and the bound says nothing, so the
    check is skipped and the verdict says so.
    """
    params = c.catalog.params
    out = _Collector("prall_derived")
    if params.h < 2:
        return out.verdict(d.horizon, skipped="h < 2")
    start = c.selection.n[0] * c.ell if c.selection else 0
    starts = [nj * c.ell for nj in c.selection.n] if c.selection else [0]
    checked = 0
    for r, (x, k) in enumerate(zip(d.increments(), d.per_level_slice_count)):
        if r < start:
            continue
        j = max(0, bisect.bisect_right(starts, r) - 1)
        if k < max(params.h, params.U[j]):
            continue
        checked += 1
        if x < (params.h - 1) * k:
            out.add("lower", r, increment=x, count=k)
        elif x > (params.H + 1) * k:
            out.add("upper", r, increment=x, count=k)
    return out.verdict(d.horizon, levels_checked=checked)


@dataclass(frozen=True)
class DistanceBounds:
    """Bounds on the distance from the basepoint to a piece group's marked point."""

    level: int
    piece: str
    branch: Optional[int]
    count: int
    d_lo: Fraction
    d_hi: Fraction
    diam: Fraction
    case: str


def _range_counts(runs, lo, hi):
    out = {0: 0, 1: 0, 2: 0}
    pos = 0
    for c, k in runs:
        a, b = max(lo, pos), min(hi, pos + k)
        if a < b:
            out[c] += b - a
        pos += k
        if pos >= hi:
            break
    return out


def distance_bounds(c):
    """Yield :class:`DistanceBounds` for every piece group of the complex.

    Upper bounds add the junction caps along the root path: ``ell`` for an
    ordinary junction, ``ell t_j`` when leaving Q(j), ``d_j`` from R(j) to a
    small piece. Lower bounds add ``ell/3`` per crossed level. Side vertices are
    grouped by the trunk vertex they hang from by propagating, level by level,
    the contiguous index block of each live side subtree.
    """
    if c.selection is None:
        raise MissingSelection("the metric audit needs a parameter selection")
    params = c.catalog.params
    ell = c.ell
    third = Fraction(ell, 3)
    runs = c.tree.runs
    blocks = []
    for n in range(c.assigned_levels):
        name, base = c.trunk_piece(n)
        if n == 0:
            yield DistanceBounds(0, "HS", None, 1, Fraction(0), Fraction(0), Fraction(0), "root")
        elif base == n:
            if name[0] in "QR":
                diam = Fraction(params.d[int(name[2:-1])])
            else:
                diam = Fraction(ell)
            yield DistanceBounds(n, name, None, 1, base * third, Fraction(base * ell), diam,
                                 "Q" if name[0] == "Q" else "trunk")
        for k, lo, hi in blocks:
            counts = _range_counts(runs[n], lo, hi)
            tname, tbase = c.trunk_piece(k)
            if k == 0 or tname in ("J", "K", "HS"):
                jump = ell
                case = "side"
            else:
                j = int(tname[2:-1])
                if tname[0] == "Q":
                    jump = ell * params.t[j]
                    case = "side_of_Q"
                else:
                    jump = params.d[j]
                    case = "bad_junction"
            d_hi = Fraction(tbase * ell + jump + (n - k - 1) * ell)
            for ch, cnt in counts.items():
                if cnt:
                    yield DistanceBounds(n, KIND_BY_CHILDREN[ch], k, cnt, n * third, d_hi,
                                         Fraction(ell), case)
        if n + 1 < c.assigned_levels:
            nxt = []
            for k, lo, hi in blocks:
                lo2, hi2 = _prefix_children(runs[n], lo), _prefix_children(runs[n], hi)
                if lo2 < hi2:
                    nxt.append((k, lo2, hi2))
            f = _count_at(runs[n], 0)
            if f > 1:
                nxt.append((n, 1, f))
            blocks = nxt


def metric_audit(c, d=None):
    """Certify ``r/3 <= d_lo`` and ``d_hi <= 3 max(r, 1)`` for every slice, then the ball sandwich.

    A slice at offset ``s`` of a piece whose marked point has bounds
    ``[m_lo, m_hi]`` gets ``d_lo = m_lo + s`` and ``d_hi = m_hi + diam + s + 1``
    (``diam`` bounds the piece's lower boundary; the root uses the basepoint).
    The volume model counts a slice inside ``B(o, n)`` when ``d_hi <= n``
    (inner) or when ``d_lo <= n`` (outer); the audit asserts
    ``z(n//3) <= inner(n) <= outer(n) <= z(3n)`` wherever ``3n`` is in range.
    """
    if d is None:
        d = discrete_growth(c)
    out = _Collector("metric_audit")
    horizon = c.horizon
    hist_hi = {}
    hist_lo = {}
    worst_hi = Fraction(0)
    worst_lo = None
    groups = 0
    for b in distance_bounds(c):
        groups += 1
        vols = c.catalog.piece(b.piece).slice_volumes
        base = b.level
        if b.piece.startswith("Q"):
            base = c.selection.n[int(b.piece[2:-1])]
        for s, x in enumerate(vols):
            r = base * c.ell + s
            if r > horizon:
                break
            if b.case == "root":
                lo, hi = Fraction(s), Fraction(s + 1)
            else:
                lo, hi = b.d_lo + s, b.d_hi + b.diam + s + 1
            rr = max(r, 1)
            if 3 * lo < r:
                out.add("lower", r, case=b.case, piece=b.piece, level=b.level, branch=b.branch,
                        slice=s, d_lo=lo)
            if hi > 3 * rr:
                out.add("upper", r, case=b.case, piece=b.piece, level=b.level, branch=b.branch,
                        slice=s, d_hi=hi)
            worst_hi = max(worst_hi, hi / rr)
            ratio = lo / r if r else None
            if ratio is not None and (worst_lo is None or ratio < worst_lo):
                worst_lo = ratio
            vol = b.count * x
            kh, kl = ceil_frac(hi), ceil_frac(lo)
            hist_hi[kh] = hist_hi.get(kh, 0) + vol
            hist_lo[kl] = hist_lo.get(kl, 0) + vol
    z = d.z.values
    top = horizon // 3
    inner = outer = 0
    for n in range(0, top + 1):
        inner += hist_hi.get(n, 0)
        outer += hist_lo.get(n, 0)
        if n == 0:
            continue
        if z[n // 3] > inner:
            out.add("containment_inner", n, z=z[n // 3], inner=inner)
        if inner > outer:
            out.add("containment_order", n, inner=inner, outer=outer)
        if outer > z[3 * n]:
            out.add("containment_outer", n, outer=outer, z=z[3 * n])
    return out.verdict(
        horizon,
        piece_groups=groups,
        max_dhi_over_r=worst_hi,
        min_dlo_over_r=worst_lo,
        containment_checked_up_to=top,
    )


@dataclass
class SynthesisResult:
    input: GrowthFunction
    mode: str
    L: int
    suplinear: object
    normalization: object
    tree_hypotheses: object
    catalog: Catalog
    selection: ParameterSelection
    tree: AdmissibleTree
    admissibility: object
    complex: PlumbedComplex
    growth: DiscreteGrowth
    lemma_z: object
    audit: object
    prall_derived: object
    z0: Optional[DiscreteGrowth]
    prall: object
    witness: object
    a_max: int

    def audit_report(self):
        checks = {
            "tree_hypotheses": self.tree_hypotheses.to_dict(),
            "admissibility": self.admissibility.to_dict(),
            "lemma_z": self.lemma_z.to_dict(),
            "metric_audit": self.audit.to_dict(),
            "prall_derived": self.prall_derived.to_dict(),
        }
        if self.prall is not None:
            checks["prall_integration"] = self.prall.to_dict()
        return {
            "mode": self.mode,
            "passed": all(v["passed"] for v in checks.values()),
            "checks": checks,
            "normalization": {
                k: v for k, v in self.normalization.to_dict().items() if k not in ("input", "output")
            },
            "slips": list(self.tree.slips),
            "caps": list(self.tree.caps),
        }

    def witness_report(self):
        return {
            "A": self.witness.A,
            "horizon_checked": self.witness.horizon_checked,
            "A_max": self.a_max,
            "z_horizon": self.growth.horizon,
            "input_horizon": self.input.horizon,
        }

    def complex_document(self):
        doc = self.complex.to_dict()
        doc["input"] = self.input.to_dict()
        doc["mode"] = self.mode
        doc["a_max"] = self.a_max
        doc["tree_growth"] = self.normalization.output.to_dict()
        return doc


def _stage(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except PipelineError:
        raise
    except GrowthError as exc:
        raise PipelineError(name, exc) from exc


def _gate(name, verdict):
    if not verdict.passed:
        raise PipelineError(name, CheckFailed(verdict))
    return verdict


def synthesize(v, params, mode, seed=0, *, a_max=1000, doubling=False, catalog=None,
               suplinear_threshold=None):
    """End-to-end pipeline; every failure is a :class:`PipelineError` tagged with its stage.

    check_bgd, then (infinite mode) the superlinear representative, the tree
    normalisation, catalog, schedule, tree, assignment, discrete growth, the
    slice sandwich, the metric audit, the integrated bound (finite type), and
    finally a growth-type witness between ``z`` and the input.
    """
    mode = _mode(mode)
    L = _stage("check_bgd", check_bgd, v).L
    rep = None
    w1 = v
    L1 = L
    if mode == INFINITE:
        rep = _stage("normalize", suplinear_report, v, L, suplinear_threshold)
        w1 = rep.output
        L1 = _stage("normalize", check_bgd, w1).L
    norm = _stage("normalize", normalize_bgd, w1, L1, a_max=a_max)
    w = norm.output
    hyp = _gate("tree_hypotheses", check_tree_hypotheses(w, norm.lam_num, norm.lam_den, norm.growth_C))
    if catalog is None:
        catalog = _stage("catalog", make_catalog, params, seed, doubling)
    _gate("catalog", validate_catalog(catalog, params, doubling))
    sel = _stage("select_parameters", select_parameters, w, params, mode, catalog)
    tree = _stage("build_tree", build_tree, w, sel.S)
    adm = _gate("admissibility", verify_admissible(tree, math.ceil(tree.depth / 4)))
    cx = _stage("assign_pieces", assign_pieces, tree, sel, catalog)
    dg = discrete_growth(cx)
    lz = _gate("lemma_z", check_lemma_z(cx, dg))
    audit = _gate("metric_audit", _stage("metric_audit", metric_audit, cx, dg))
    derived = check_prall_derived(cx, dg)
    z0 = prall = None
    if mode == FINITE_TYPE:
        z0 = leafed_trunk_growth(cx)
        prall = _gate(
            "prall_integration",
            check_prall_integration(dg, z0, dg.slice_growth(), z0.slice_growth(), params.h, params.H),
        )
    witness = _stage("equivalence", growth_type_equivalent, dg.z, v, a_max)
    return SynthesisResult(
        v, mode, L, rep, norm, hyp, catalog, sel, tree, adm, cx, dg, lz, audit, derived, z0,
        prall, witness, a_max,
    )


def dumps(obj):
    """Stable JSON used for every artifact."""
    return json.dumps(obj, sort_keys=True, indent=1) + "\n"
