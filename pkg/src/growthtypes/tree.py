"""Admissible rooted trees with prescribed ball growth.

A tree is stored level by level as run-length encoded child counts. Vertices
of a level are ordered lexicographically (parent order, then creation order),
so the children of any vertex are contiguous in the next level and vertex 0 of
every level is the trunk. Trees with values near ``C lam^n`` stay small in
memory because each level has at most four runs.
"""

import bisect
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .exceptions import (
    BudgetOverflow,
    BudgetUnderflow,
    BudgetUnderflowAtS,
    GuardTooLarge,
    NegativeExponent,
)
from .growth import GrowthFunction
from .verdict import _Collector


@dataclass(frozen=True)
class SparseSet:
    """Union of integer intervals ``[n_j, n_j + t_j - 1]``."""

    intervals: tuple = ()

    def __post_init__(self):
        iv = tuple((int(n), int(t)) for n, t in self.intervals)
        prev_end = None
        for n, t in iv:
            if t < 1 or n < 0:
                raise ValueError(f"bad interval ({n}, {t})")
            if prev_end is not None and n < prev_end:
                raise ValueError("intervals must be sorted and disjoint")
            prev_end = n + t
        object.__setattr__(self, "intervals", iv)
        object.__setattr__(self, "_starts", tuple(n for n, _ in iv))
        cum = [0]
        for _, t in iv:
            cum.append(cum[-1] + t)
        object.__setattr__(self, "_cum", tuple(cum))

    def __contains__(self, n):
        i = bisect.bisect_right(self._starts, n) - 1
        if i < 0:
            return False
        s, t = self.intervals[i]
        return n < s + t

    def __len__(self):
        return self._cum[-1]

    def __iter__(self):
        for n, t in self.intervals:
            yield from range(n, n + t)

    def count_upto(self, n):
        """``|S ∩ {0, ..., n}|``."""
        i = bisect.bisect_right(self._starts, n)
        if i == 0:
            return 0
        s, t = self.intervals[i - 1]
        return self._cum[i - 1] + min(t, n - s + 1)

    def to_dict(self):
        return {"intervals": [[n, t] for n, t in self.intervals]}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(tuple(x) for x in data.get("intervals", ())))

    @classmethod
    def from_members(cls, members):
        out = []
        for n in sorted(set(members)):
            if out and out[-1][0] + out[-1][1] == n:
                out[-1][1] += 1
            else:
                out.append([n, 1])
        return cls(tuple(map(tuple, out)))


def _merge(runs):
    out = []
    for c, k in runs:
        if k <= 0:
            continue
        if out and out[-1][0] == c:
            out[-1] = (c, out[-1][1] + k)
        else:
            out.append((c, k))
    return tuple(out)


def _runs_total(runs):
    return sum(k for _, k in runs)


def _runs_children(runs):
    return sum(c * k for c, k in runs)


def _prefix_children(runs, e):
    """Number of children of the first ``e`` vertices of a level."""
    total = 0
    for c, k in runs:
        if e <= 0:
            break
        take = min(k, e)
        total += c * take
        e -= take
    return total


def _count_at(runs, i):
    for c, k in runs:
        if i < k:
            return c
        i -= k
    raise IndexError("vertex index outside level")


def _parent_index(runs, i):
    """Index in the level above of the parent of child ``i``."""
    pos = 0
    base = 0
    for c, k in runs:
        span = c * k
        if c and i < base + span:
            return pos + (i - base) // c
        base += span
        pos += k
    raise IndexError("child index outside level")


@dataclass(frozen=True)
class AdmissibleTree:
    """Rooted tree as RLE child counts per level.

    ``runs[n]`` lists ``(child_count, multiplicity)`` for level ``n`` in
    lexicographic order; the last level is childless. ``slips`` are levels
    where an S-marked trunk vertex had to take two children, ``caps`` levels
    where an unmarked trunk vertex got one child because the budget was 1.
    """

    runs: tuple
    S: SparseSet = field(default_factory=SparseSet)
    slips: tuple = ()
    caps: tuple = ()

    def __post_init__(self):
        runs = tuple(_merge(tuple((int(c), int(k)) for c, k in lvl)) for lvl in self.runs)
        if not runs or _runs_total(runs[0]) != 1:
            raise ValueError("level 0 must hold exactly the root")
        object.__setattr__(self, "runs", runs)
        sizes = tuple(_runs_total(r) for r in runs)
        object.__setattr__(self, "_sizes", sizes)

    @property
    def depth(self):
        return len(self.runs) - 1

    @property
    def sizes(self):
        return self._sizes

    def level_size(self, n):
        return self._sizes[n]

    def child_counts(self, n):
        out = []
        for c, k in self.runs[n]:
            out.extend([c] * k)
        return out

    def child_count(self, n, i):
        return _count_at(self.runs[n], i)

    def children(self, n, i):
        start = _prefix_children(self.runs[n], i)
        return range(start, start + self.child_count(n, i))

    def parent(self, n, i):
        if n == 0:
            return None
        return _parent_index(self.runs[n - 1], i)

    @property
    def trunk(self):
        return tuple((n, 0) for n in range(self.depth + 1))

    @property
    def vertex_count(self):
        return sum(self._sizes)

    def trunk_child_counts(self):
        return [_count_at(self.runs[n], 0) for n in range(self.depth)]

    def trunk_single_child_positions(self):
        return [n for n, c in enumerate(self.trunk_child_counts()) if c == 1]

    def edges(self):
        """Yield ``((n, i), (n+1, j))`` in lexicographic order."""
        for n in range(self.depth):
            j = 0
            i = 0
            for c, k in self.runs[n]:
                for _ in range(k):
                    for _ in range(c):
                        yield (n, i), (n + 1, j)
                        j += 1
                    i += 1

    def to_dict(self):
        return {
            "depth": self.depth,
            "runs": [[[c, k] for c, k in lvl] for lvl in self.runs],
            "S": self.S.to_dict(),
            "slips": list(self.slips),
            "caps": list(self.caps),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            tuple(tuple(tuple(r) for r in lvl) for lvl in data["runs"]),
            SparseSet.from_dict(data.get("S", {})),
            tuple(data.get("slips", ())),
            tuple(data.get("caps", ())),
        )

    @classmethod
    def from_child_counts(cls, levels, S=None):
        """Handcrafted tree from explicit per-level child-count lists.

        The final level is appended as childless if the last list has children.
        """
        runs = [tuple((c, 1) for c in lvl) for lvl in levels] or [((0, 1),)]
        if _runs_children(runs[-1]):
            runs.append(((0, _runs_children(runs[-1])),))
        for n in range(len(runs) - 1):
            if _runs_children(runs[n]) != _runs_total(runs[n + 1]):
                raise ValueError(f"level {n + 1} size does not match children of level {n}")
        return cls(tuple(runs), S or SparseSet())

    def to_dot(self, max_vertices=None):
        lines = ["digraph tree {", "  node [shape=point];"]
        limit = self._export_depth(max_vertices)
        if limit < self.depth:
            lines.append(f"  // truncated after level {limit} of {self.depth}")
        for n in range(limit + 1):
            for i in range(self._sizes[n]):
                lines.append(f"  L{n}I{i};")
        for (n, i), (m, j) in self.edges():
            if m > limit:
                break
            style = ' [style=bold, color="red"]' if i == 0 and j == 0 else ""
            lines.append(f"  L{n}I{i} -> L{m}I{j}{style};")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_jsonl(self, max_vertices=None):
        limit = self._export_depth(max_vertices)
        out = []
        for n in range(limit + 1):
            i = 0
            parents = self._parent_list(n)
            for c, k in self.runs[n]:
                for _ in range(k):
                    rec = {
                        "level": n,
                        "index": i,
                        "parent": parents[i],
                        "child_count": c,
                        "on_trunk": i == 0,
                        "in_S": i == 0 and n in self.S,
                    }
                    out.append(json.dumps(rec, sort_keys=True))
                    i += 1
        if limit < self.depth:
            out.append(json.dumps({"truncated": True, "levels_written": limit + 1}))
        return "\n".join(out) + "\n"

    def _parent_list(self, n):
        if n == 0:
            return [None]
        out = []
        i = 0
        for c, k in self.runs[n - 1]:
            for _ in range(k):
                out.extend([i] * c)
                i += 1
        return out

    def _export_depth(self, max_vertices):
        if max_vertices is None:
            return self.depth
        total = 0
        for n, s in enumerate(self._sizes):
            total += s
            if total > max_vertices:
                return n - 1
        return self.depth


def _level_runs(m, b, first_wanted, level, strict, slips, caps):
    first = min(b, first_wanted)
    if b < first_wanted:
        caps.append(level)
    rest = b - first
    if rest > 2 * (m - 1):
        if strict:
            raise BudgetUnderflowAtS(
                f"level {level}: single-child rule cannot absorb budget {b} over {m} vertices"
            )
        first = 2
        rest = b - 2
        slips.append(level)
    q, r = divmod(rest, 2)
    return _merge(((first, 1), (2, q), (1, r), (0, m - 1 - q - r)))


def build_tree(v, S=None, *, strict=False):
    """Tree with ``|B(n)| = v(n)`` whose trunk has one child exactly on ``S``.

    Level ``n+1`` receives ``v(n+1) - v(n)`` vertices: the trunk vertex takes 1
    child if ``n`` is in ``S`` and 2 otherwise (capped by the budget), the rest
    is handed out two at a time from the front of the level, and the back of
    the level stays childless. If an S-marked trunk vertex cannot stay single
    because every other vertex is already full, it takes two children and the
    level is recorded in ``slips`` (``strict=True`` raises instead).
    """
    S = S or SparseSet()
    vals = v.values
    if vals[0] != 1:
        raise ValueError("the tree needs v(0) = 1")
    runs = []
    slips, caps = [], []
    m = 1
    for n in range(len(vals) - 1):
        b = vals[n + 1] - vals[n]
        if b < 1:
            raise BudgetUnderflow(n, b)
        if b > 2 * m:
            raise BudgetOverflow(n, b, 2 * m)
        runs.append(_level_runs(m, b, 1 if n in S else 2, n, strict, slips, caps))
        m = b
    runs.append(((0, m),))
    return AdmissibleTree(tuple(runs), S, tuple(slips), tuple(caps))


def root_growth(t):
    """``|B(root, n)|`` for ``n = 0..depth``."""
    out = []
    total = 0
    for s in t.sizes:
        total += s
        out.append(total)
    return GrowthFunction(tuple(out))


def _ancestor_below_trunk(t, n, i):
    """Walk up from ``(n, i)`` to the side vertex hanging directly off the trunk."""
    while n > 0:
        p = t.parent(n, i)
        if p == 0 and i != 0:
            return n, i
        n, i = n - 1, p
    return None


def verify_admissible(t, guard):
    """Check child counts, the trunk ray and finiteness of early side subtrees.

    Side subtrees hung off ``trunk[k]`` for ``k <= depth - guard`` must not
    reach the final level. The union of those subtrees at level ``n`` is the
    block ``[e(n), size(n))`` where ``e`` counts descendants of
    ``trunk[K+1]``; it is propagated down to the last level in O(runs).
    """
    D = t.depth
    if guard > D or guard < 0:
        raise GuardTooLarge(f"guard {guard} outside [0, {D}]")
    out = _Collector("admissible")
    for n, lvl in enumerate(t.runs):
        for c, _ in lvl:
            if c not in (0, 1, 2):
                out.add("child_count", n, count=c)
        if n < D and _runs_children(lvl) != t.level_size(n + 1):
            out.add("level_size", n + 1, expected=_runs_children(lvl), actual=t.level_size(n + 1))
    if D and _runs_children(t.runs[D]):
        out.add("final_level_children", D)
    for n in range(D):
        if _count_at(t.runs[n], 0) == 0:
            out.add("trunk", n, reason="trunk vertex has no child")
            break
    if out.total:
        return out.verdict(D, guard=guard)
    K = min(D - guard, D - 1)
    if K >= 0:
        e = 1
        for n in range(K + 1, D):
            e = _prefix_children(t.runs[n], e)
        if e < t.level_size(D):
            side = _ancestor_below_trunk(t, D, e)
            lvl, idx = side
            out.add(
                "side_subtree_reaches_horizon",
                lvl,
                vertex=f"L{lvl}I{idx}",
                trunk_vertex=lvl - 1,
                reaching=f"L{D}I{e}",
            )
    return out.verdict(D, guard=guard, checked_up_to=K)


def lower_density(S, checkpoints):
    """``s(n)/n`` at each checkpoint, with ``s(n) = |S ∩ {0..n}|``."""
    prev = 0
    out = []
    for n in checkpoints:
        if n <= 0 or n <= prev:
            raise ValueError("checkpoints must be positive and increasing")
        prev = n
        out.append(Fraction(S.count_upto(n), n))
    return out


def binary_blowup_lower_bound(k, n, s_n):
    """``2^(n - s_n - k - 1)``: level-n vertices forced by a rogue side ray at ``k``."""
    e = n - s_n - k - 1
    if e < 0:
        raise NegativeExponent(f"n - s_n - k - 1 = {e} < 0")
    return 1 << e
