"""Abstract pieces: a depth in unit slices and one volume per slice.

The real pieces are compact Riemannian manifolds with boundary. Everything
downstream only reads their numeric contract, so a profile stores just enough
to evaluate it: depth bands, per-slice volume bands, and the finite-type
isometry between consecutive R pieces.
"""

import json
import random
from dataclasses import dataclass, field

from .exceptions import InfeasibleBounds, MissingProfile
from .verdict import _Collector

SMALL_KINDS = ("K", "HS", "J")


def _ceil_third(x):
    return -(-x // 3)


@dataclass(frozen=True)
class CatalogParams:
    ell: int
    h: int
    H: int
    t: tuple
    u: tuple
    U: tuple
    d: tuple
    finite_type: bool = False

    def __post_init__(self):
        for name in ("t", "u", "U", "d"):
            object.__setattr__(self, name, tuple(int(x) for x in getattr(self, name)))
        J = len(self.t)
        if J < 1:
            raise InfeasibleBounds("at least one Q piece is needed")
        if not (len(self.u) == len(self.U) == len(self.d) == J):
            raise InfeasibleBounds("t, u, U and d must have the same length")
        if self.ell < 3:
            raise InfeasibleBounds("ell must be >= 3")
        if self.h < 1:
            raise InfeasibleBounds("h must be positive")
        if self.h > self.H:
            raise InfeasibleBounds(f"h={self.h} > H={self.H}")
        for j in range(J):
            if self.t[j] < 1 or self.u[j] < 1 or self.d[j] < 0:
                raise InfeasibleBounds(f"piece {j}: need t >= 1, u >= 1, d >= 0")
            if self.u[j] > self.U[j]:
                raise InfeasibleBounds(f"piece {j}: u={self.u[j]} > U={self.U[j]}")
        if self.finite_type and len(set(self.u)) > 1:
            raise InfeasibleBounds("finite type needs a constant u")

    @property
    def J(self):
        return len(self.t)

    def to_dict(self):
        return {
            "ell": self.ell,
            "h": self.h,
            "H": self.H,
            "t": list(self.t),
            "u": list(self.u),
            "U": list(self.U),
            "d": list(self.d),
            "finite_type": self.finite_type,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            ell=int(data["ell"]),
            h=int(data["h"]),
            H=int(data["H"]),
            t=tuple(data["t"]),
            u=tuple(data["u"]),
            U=tuple(data["U"]),
            d=tuple(data["d"]),
            finite_type=bool(data.get("finite_type", False)),
        )


@dataclass(frozen=True)
class PieceProfile:
    kind: str
    j: int = None
    slice_volumes: tuple = field(default=())

    def __post_init__(self):
        if self.kind not in SMALL_KINDS + ("Q", "R"):
            raise ValueError(f"unknown piece kind {self.kind!r}")
        if (self.j is None) != (self.kind in SMALL_KINDS):
            raise ValueError("Q and R pieces carry an index j, small pieces do not")
        vols = tuple(int(x) for x in self.slice_volumes)
        if not vols:
            raise ValueError("a piece has at least one slice")
        object.__setattr__(self, "slice_volumes", vols)

    @property
    def depth_slices(self):
        return len(self.slice_volumes)

    @property
    def name(self):
        return self.kind if self.j is None else f"{self.kind}({self.j})"

    @property
    def max_volume(self):
        return max(self.slice_volumes)

    def to_dict(self):
        return {
            "kind": self.kind,
            "j": self.j,
            "depth_slices": self.depth_slices,
            "slice_volumes": list(self.slice_volumes),
        }

    @classmethod
    def from_dict(cls, data):
        vols = tuple(data["slice_volumes"])
        if "depth_slices" in data and int(data["depth_slices"]) != len(vols):
            raise ValueError("depth_slices does not match the number of slice volumes")
        return cls(data["kind"], data.get("j"), vols)


class Catalog(dict):
    """Profiles keyed by name (``"K"``, ``"Q(0)"`` ...), kept with their params."""

    def __init__(self, params, profiles):
        super().__init__((p.name, p) for p in profiles)
        self.params = params

    def piece(self, name):
        try:
            return self[name]
        except KeyError:
            raise MissingProfile(f"catalog has no profile {name}") from None

    def to_dict(self):
        return {
            "params": self.params.to_dict(),
            "profiles": [self[k].to_dict() for k in _ordered_names(self.params) if k in self],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), sort_keys=True, **kw)

    @classmethod
    def from_dict(cls, data):
        return cls(
            CatalogParams.from_dict(data["params"]),
            [PieceProfile.from_dict(p) for p in data["profiles"]],
        )


def _ordered_names(params):
    names = list(SMALL_KINDS)
    names += [f"Q({j})" for j in range(params.J)]
    names += [f"R({j})" for j in range(params.J)]
    return names


def _draw(rng, lo_depth, hi_depth, lo_vol, hi_vol):
    depth = rng.randint(lo_depth, hi_depth)
    return [rng.randint(lo_vol, hi_vol) for _ in range(depth)]


def make_catalog(params, seed=0, doubling=False, hs_minimal=None):
    """Seeded profiles for K, HS, J and every Q(j), R(j).

    Depths are uniform in their band and volumes uniform in theirs; with
    ``doubling`` each Q slice is clamped to twice its predecessor. One slice of
    each R(j) is set to ``u_j`` so that ``u_j`` is the exact maximum. In finite
    type the R profiles coincide. ``hs_minimal`` (default: the finite-type flag)
    makes HS slice-wise dominated by K and J, in depth and in every volume.
    """
    if hs_minimal is None:
        hs_minimal = params.finite_type
    ell = params.ell
    lo = _ceil_third(ell)
    rng = random.Random(seed)
    hs = _draw(rng, lo, ell, params.h, params.H)
    small = {"HS": hs}
    for kind in ("K", "J"):
        if hs_minimal:
            depth = rng.randint(len(hs), ell)
            vols = [
                rng.randint(hs[s] if s < len(hs) else params.h, params.H) for s in range(depth)
            ]
        else:
            vols = _draw(rng, lo, ell, params.h, params.H)
        small[kind] = vols
    profiles = [PieceProfile(k, None, small[k]) for k in SMALL_KINDS]
    for j in range(params.J):
        tj, Uj = params.t[j], params.U[j]
        vols = _draw(rng, _ceil_third(ell * tj), ell * tj, 1, Uj)
        if doubling:
            for k in range(1, len(vols)):
                vols[k] = min(vols[k], 2 * vols[k - 1])
        profiles.append(PieceProfile("Q", j, vols))
    shared = None
    for j in range(params.J):
        if params.finite_type and shared is not None:
            vols = shared
        else:
            vols = _draw(rng, lo, ell, 1, params.u[j])
            vols[rng.randrange(len(vols))] = params.u[j]
            shared = vols
        profiles.append(PieceProfile("R", j, vols))
    return Catalog(params, profiles)


def validate_catalog(profiles, params, doubling=False):
    """Check every profile against the numeric contract of its kind.

    Violations carry ``piece``, ``slice`` and the contract ``item``: 2 for Q
    depth, 3 for other depths, 6 for the small-piece volume band, 7 for Q
    volumes, 8 for R volumes, 9 for finite-type coincidence, ``"BG"`` for the
    doubling clamp.
    """
    out = _Collector("catalog")
    ell = params.ell
    lo = _ceil_third(ell)
    items = profiles.values() if isinstance(profiles, dict) else profiles
    seen = {}
    for p in items:
        seen[p.name] = p
        depth = p.depth_slices
        if p.kind == "Q":
            if p.j >= params.J:
                out.add("unknown_piece", None, piece=p.name)
                continue
            tj = params.t[p.j]
            if not _ceil_third(ell * tj) <= depth <= ell * tj:
                out.add("depth", None, piece=p.name, slice=None, item=2, depth=depth)
        elif not lo <= depth <= ell:
            out.add("depth", None, piece=p.name, slice=None, item=3, depth=depth)
        for s, x in enumerate(p.slice_volumes):
            if x < 1:
                out.add("volume_positive", s, piece=p.name, slice=s, item=None, volume=x)
            if p.kind in SMALL_KINDS and not params.h <= x <= params.H:
                out.add("volume", s, piece=p.name, slice=s, item=6, volume=x)
            elif p.kind == "Q" and x > params.U[p.j]:
                out.add("volume", s, piece=p.name, slice=s, item=7, volume=x)
            elif p.kind == "R" and (p.j >= params.J or x > params.u[p.j]):
                out.add("volume", s, piece=p.name, slice=s, item=8, volume=x)
        if doubling and p.kind == "Q":
            v = p.slice_volumes
            for s in range(1, len(v)):
                if v[s] > 2 * v[s - 1]:
                    out.add("doubling", s, piece=p.name, slice=s, item="BG", volume=v[s])
    if params.finite_type:
        rs = [seen[f"R({j})"] for j in range(params.J) if f"R({j})" in seen]
        for p in rs[1:]:
            if p.slice_volumes != rs[0].slice_volumes:
                out.add("finite_type", None, piece=p.name, slice=None, item=9)
    for name in _ordered_names(params):
        if name not in seen:
            out.add("missing", None, piece=name, slice=None, item=None)
    return out.verdict()


def hs_dominated(catalog):
    """True iff HS is slice-wise below both K and J (depth and every volume)."""
    hs = catalog.piece("HS").slice_volumes
    for kind in ("K", "J"):
        vols = catalog.piece(kind).slice_volumes
        if len(vols) < len(hs) or any(vols[s] < hs[s] for s in range(len(hs))):
            return False
    return True
