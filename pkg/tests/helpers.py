"""Corpus generators and independent oracles shared by the test modules."""

import random
from fractions import Fraction

import networkx as nx

from growthtypes import CatalogParams, GrowthFunction, SparseSet

SQ_PARAMS = CatalogParams(ell=3, h=1, H=4, t=(1, 2, 1), u=(2, 3, 3), U=(5, 6, 6), d=(1, 2, 3))


def finite_params(u, J=3):
    return CatalogParams(
        ell=3, h=1, H=2, t=(1,) * J, u=(u,) * J, U=(5,) * J, d=tuple(range(1, J + 1)), finite_type=True
    )


def random_tree_v(rng, horizon):
    """``v(0)=1``, ``v'(1) in {1,2}``, ``2 <= v'(n+1) <= 2 v'(n)``, increments capped."""
    cap = rng.choice([4, 12, 60, 300, 1500])
    d = rng.choice([1, 2])
    vals = [1, 1 + d]
    for _ in range(horizon - 1):
        lo = max(2, d - rng.randint(0, 3))
        hi = max(lo, min(2 * d, cap))
        d = rng.randint(lo, hi)
        vals.append(vals[-1] + d)
    return GrowthFunction(tuple(vals))


def random_sparse(rng, horizon):
    """Intervals ``[n_j, n_j + t_j)`` with ``n_j >= j (n_{j-1} + t_{j-1})``."""
    pairs = []
    n = rng.randint(1, 12)
    j = 0
    while True:
        t = rng.randint(1, 5)
        if n + t > horizon:
            break
        pairs.append((n, t))
        j += 1
        n = max(n + t + 1, j * (n + t)) + rng.randint(0, 10)
    return SparseSet(tuple(pairs))


def random_bgd(rng, L, horizon, cap=1000):
    """Increments ``1 <= d(n+1) <= L d(n)`` with exactly-``L`` ratio at one forced step."""
    forced = rng.randint(2, horizon - 1)
    d = rng.randint(1, 4)
    incs = [d]
    for n in range(1, horizon):
        if n == forced - 1:
            d = rng.randint(1, max(1, min(L * d, cap // L)))
        elif n == forced:
            d = L * d
        else:
            d = rng.randint(max(1, d // 2), max(1, min(L * d, cap)))
        incs.append(d)
    vals = [rng.randint(1, 5)]
    for x in incs:
        vals.append(vals[-1] + x)
    return GrowthFunction(tuple(vals))


def tree_to_nx(t):
    """Materialise an AdmissibleTree as an explicit networkx graph."""
    g = nx.Graph()
    g.add_node((0, 0))
    for n in range(t.depth):
        nxt = 0
        for i, c in enumerate(t.child_counts(n)):
            for _ in range(c):
                g.add_edge((n, i), (n + 1, nxt))
                nxt += 1
    return g


def bfs_growth(g, root=(0, 0)):
    dist = nx.single_source_shortest_path_length(g, root)
    top = max(dist.values())
    counts = [0] * (top + 1)
    for x in dist.values():
        counts[x] += 1
    out, total = [], 0
    for c in counts:
        total += c
        out.append(total)
    return out


def _less(p, q):
    return p[0] * q[1] < q[0] * p[1]


def minorant_oracle(vals):
    """``u(n) = min over i <= n <= j`` of the chord value, O(N^2) exact.

    For fixed ``i < n`` the chord value at ``n`` is ``v(i) + (n-i) slope(i, j)``,
    minimised by the least slope over ``j >= n``; slopes are integer pairs.
    """
    N = len(vals) - 1
    best = [Fraction(x) for x in vals]
    for i in range(N):
        suffix = [None] * (N + 2)
        cur = None
        for j in range(N, i, -1):
            s = (vals[j] - vals[i], j - i)
            if cur is None or _less(s, cur):
                cur = s
            suffix[j] = cur
        for n in range(i + 1, N + 1):
            s = suffix[n]
            val = Fraction(vals[i] * s[1] + (n - i) * s[0], s[1])
            if val < best[n]:
                best[n] = val
    return best


def v_interp(vals, x):
    x = Fraction(x)
    n = x.numerator // x.denominator
    if n >= len(vals) - 1:
        if x == len(vals) - 1:
            return Fraction(vals[-1])
        raise IndexError(x)
    return vals[n] + (vals[n + 1] - vals[n]) * (x - n)


def stretch_bounds(vals, B, points):
    """``x -> (v(x/B)/B, B v(Bx))`` at each check point."""
    return {x: (v_interp(vals, x / B) / B, B * v_interp(vals, B * x)) for x in points}


def sample_stretch_z(rng, vals, a, b, A, B, C, R, bounds=None):
    """Random PL ``z`` satisfying the three stretch hypotheses exactly.

    On ``[0, a]`` the knots sit strictly inside ``[v(x/B)/B, B v(Bx)]`` and
    are monotone; on the two stretches every slope is a random rational in
    the allowed band around the (piecewise constant) slope of ``v``.
    """
    if bounds is None:
        bounds = stretch_bounds(vals, B, stretch_check_points(a, b, R, B))
    grid = sorted(x for x in bounds if x <= a)
    knots = []
    prev = Fraction(0)
    for x in grid:
        lo, hi = bounds[x]
        lo = max(lo, prev)
        y = lo + (hi - lo) * Fraction(rng.randint(0, 64), 64)
        knots.append((x, y))
        prev = y
    end = a + R + b
    cuts = {a + R, end} | {Fraction(k) for k in range(int(a) + 1, int(end) + 1) if a < k < end}
    x0, y = knots[-1]
    for x1 in sorted(cuts):
        mid = (x0 + x1) / 2
        n = mid.numerator // mid.denominator
        sigma = vals[n + 1] - vals[n]
        K = C if x1 <= a + R else A
        lo, hi = sigma / K, sigma * K
        slope = lo + (hi - lo) * Fraction(rng.randint(0, 64), 64)
        y = y + slope * (x1 - x0)
        knots.append((x1, y))
        x0 = x1
    return knots


def stretch_check_points(a, b, R, B):
    end = a + R + b
    pts = {Fraction(0), a, a + R, end}
    k = 0
    while Fraction(k) <= end * B:
        for x in (Fraction(k), Fraction(k) / B, Fraction(k) * B):
            if 0 <= x <= end:
                pts.add(x)
        k += 1
    return sorted(pts)


def stretch_conclusion_holds(knots, vals, a, b, R, B, points, bounds=None):
    if bounds is None:
        bounds = stretch_bounds(vals, B, points)
    i = 0
    for x in points:
        while i + 2 < len(knots) and knots[i + 1][0] <= x:
            i += 1
        (x0, y0), (x1, y1) = knots[i], knots[min(i + 1, len(knots) - 1)]
        if x <= x0 or x1 == x0:
            z = y0
        elif x >= x1:
            z = y1
        else:
            z = y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        lo, hi = bounds[x]
        if z < lo or z > hi:
            return False, x
    return True, None


_TREE_GROWTH = {}


def square_tree_growth(horizon=40):
    """Tree-ready representative of ``n^2 + 1`` (cached)."""
    from growthtypes import check_bgd, normalize_bgd, suplinear_representative, tabulate

    if horizon not in _TREE_GROWTH:
        v = tabulate({"kind": "polynomial", "coeffs": [1, 0, 1]}, horizon)
        w1 = suplinear_representative(v, check_bgd(v).L)
        _TREE_GROWTH[horizon] = normalize_bgd(w1, check_bgd(w1).L, a_max=0).output
    return _TREE_GROWTH[horizon]


def random_params(rng):
    ell = rng.randint(3, 5)
    h = rng.randint(1, 2)
    H = rng.randint(h, h + 3)
    J = rng.randint(1, 3)
    u = [rng.randint(1, 3) for _ in range(J)]
    return CatalogParams(
        ell=ell, h=h, H=H,
        t=[rng.randint(1, 2) for _ in range(J)],
        u=u,
        U=[x + rng.randint(0, 4) for x in u],
        d=[rng.randint(0, 4) for _ in range(J)],
    )


def random_complex(seed, horizon=40):
    """Seeded catalog and schedule on the tree for ``n^2 + 1``."""
    from growthtypes import assign_pieces, build_tree, make_catalog, select_parameters

    rng = random.Random(seed)
    w = square_tree_growth(horizon)
    params = random_params(rng)
    cat = make_catalog(params, seed=seed, doubling=rng.random() < 0.3)
    sel = select_parameters(w, params, "infinite", cat)
    return assign_pieces(build_tree(w, sel.S), sel, cat)


def resum_growth(c):
    """``z`` recomputed vertex by vertex from ``piece_of``/``slice_index``."""
    dz = [0] * (c.horizon + 1)
    for n in range(c.assigned_levels):
        for i in range(c.tree.level_size(n)):
            if i == 0 and c.trunk_piece(n)[1] != n:
                continue
            vols = c.catalog.piece(c.piece_of(n, i)).slice_volumes
            r0 = c.slice_index(n, i)
            for s, x in enumerate(vols):
                if r0 + s <= c.horizon:
                    dz[r0 + s] += x
    out, total = [], 0
    for x in dz:
        total += x
        out.append(total)
    return out
