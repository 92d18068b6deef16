"""Extended Voronoi regions as unions of auxiliary tiles.

A tile is discarded when every one of its points is strictly closer to some
other orbit point than to any base point of the prototile, for one of two
reasons:

* a translation ``v`` of the group: the tile lies beyond the strip between
  the supporting planes of the prototile orthogonal to ``v``, pushed out by
  ``|v|/2`` on each side;
* a rotation of order ``k`` about a line: the tile lies in the dihedral
  region obtained by turning the two support half-planes of the prototile
  (bounded by the line) away from it by ``pi/k``.

Two arithmetic backends are available.  ``exact`` works on integers (all
coordinates on the 1/16 grid); rotating a half-plane by 90 degrees about
any axis, or by 60 degrees about a body diagonal, keeps its normal rational,
so no rounding is involved.  ``float`` follows the textbook angle
construction and compares against an uncertainty band of width ``eps``.

The ``boundary`` option decides what happens to a tile that touches the
boundary of a forbidden region without entering the allowed side:
``closed`` discards it (the overlap with any Voronoi region then has zero
volume), ``open`` keeps it.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .catalog import QuarterGroup, RotationAxis, transformation_set
from .geometry import ConvexPolytope3, support_wedge
from .tessellation import VSCALE, Population, Tile, initial_population, scaled_vertices

STAGE_ORDER = ("S1", "S2", "S3", "S4", "S5", "S6")


class StageNotApplicable(ValueError):
    pass


@dataclass(frozen=True)
class PruneOptions:
    arithmetic: str = "exact"
    boundary: str = "closed"
    eps: float = 1e-9
    touching_axes: str = "use"

    def __post_init__(self):
        if self.arithmetic not in ("exact", "float"):
            raise ValueError("arithmetic must be 'exact' or 'float'")
        if self.boundary not in ("closed", "open"):
            raise ValueError("boundary must be 'closed' or 'open'")
        if self.touching_axes not in ("use", "skip"):
            raise ValueError("touching_axes must be 'use' or 'skip'")
        if not self.eps >= 0:
            raise ValueError("eps must be non-negative")

    def as_dict(self) -> dict:
        d = asdict(self)
        if self.arithmetic == "exact":
            d["eps"] = None  # irrelevant for integer predicates
        return d


DEFAULT_OPTIONS = PruneOptions()


# -- translations ---------------------------------------------------------------

def _translation_mask(V: np.ndarray, proto: np.ndarray, v, opts: PruneOptions) -> np.ndarray:
    """Boolean mask over tiles (V: (n, m, 3) scaled by 16) forbidden by translation ``v``."""
    closed = opts.boundary == "closed"
    if opts.arithmetic == "exact":
        v2 = np.array([int(2 * c) for c in v], dtype=np.int64)
        if not v2.any():
            raise ValueError("translation vector must be nonzero")
        pv = proto @ v2
        margin = 4 * int(v2 @ v2)  # |v|^2 / 2 on the 32x scale of x . (2v) * 16
        hi, lo = pv.max() + margin, pv.min() - margin
        s = V @ v2
        if closed:
            return (s >= hi).all(axis=1) | (s <= lo).all(axis=1)
        return (s > hi).all(axis=1) | (s < lo).all(axis=1)
    vf = np.array([float(c) for c in v])
    pv = (proto / VSCALE) @ vf
    half = float(vf @ vf) / 2
    hi, lo = pv.max() + half, pv.min() - half
    s = (V / VSCALE) @ vf
    e = opts.eps
    if closed:
        return (s >= hi - e).all(axis=1) | (s <= lo + e).all(axis=1)
    return (s > hi + e).all(axis=1) | (s < lo - e).all(axis=1)


def forbidden_by_translation(tile: Tile, proto_type: str, v, opts: PruneOptions = DEFAULT_OPTIONS) -> bool:
    V = _tile_array(tile)
    return bool(_translation_mask(V, scaled_vertices(proto_type), v, opts)[0])


def _tile_array(tile: Tile) -> np.ndarray:
    return np.array([[[int(c * VSCALE) for c in v] for v in tile.vertices]], dtype=np.int64)


# -- rotations -------------------------------------------------------------------

@dataclass(frozen=True)
class ForbiddenDihedron:
    """Dihedral region forbidden by the rotations about one axis.

    ``n1`` and ``n2`` are normals of the two bounding planes through
    ``origin``; the forbidden half-spaces are ``(q - origin) . n1 < 0`` and
    ``(q - origin) . n2 > 0``.  In the exact backend the three arrays are
    integers on the 1/16 grid, in the float backend plain floats.
    """

    axis: RotationAxis
    origin: np.ndarray = field(repr=False)
    n1: np.ndarray = field(repr=False)
    n2: np.ndarray = field(repr=False)
    convex: bool
    width: float
    exact: bool
    touching: bool = False

    @property
    def alpha(self) -> float:
        return 2 * math.pi / self.axis.order


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]],
                    dtype=a.dtype)


def _extreme(us: np.ndarray, d: np.ndarray, sign: int) -> np.ndarray | None:
    """A vector with every other one within [0, pi) on the ``sign`` side (+1: ccw)."""
    for a in us:
        ok = True
        for b in us:
            c = int(_cross(a, b) @ d) * sign
            if c < 0 or (c == 0 and int(a @ b) <= 0):
                ok = False
                break
        if ok:
            return a
    return None


def _angle_between(a: np.ndarray, b: np.ndarray) -> float:
    a = a / np.linalg.norm(a)
    b = b / np.linalg.norm(b)
    return float(math.atan2(np.linalg.norm(np.cross(a, b)), a @ b))


def build_dihedron(proto_type: str, axis: RotationAxis, opts: PruneOptions = DEFAULT_OPTIONS,
                   vertices: np.ndarray | None = None) -> ForbiddenDihedron | None:
    """The forbidden dihedron of ``axis`` for a prototile, or None when it does not apply.

    ``vertices`` (times 16, integer) replaces the prototile's own vertex list,
    e.g. for a transformed copy of it.
    """
    if axis.order not in (2, 3):
        raise ValueError("only orders 2 and 3 occur")
    P = scaled_vertices(proto_type) if vertices is None else np.asarray(vertices, dtype=np.int64)
    if opts.arithmetic == "float":
        return _build_dihedron_float(P, axis, opts)
    origin = np.array([int(c * VSCALE) for c in axis.point], dtype=np.int64)
    d = np.array(axis.direction, dtype=np.int64)
    dd = int(d @ d)
    w = P - origin
    u = w * dd - np.outer(w @ d, d)
    on = ~u.any(axis=1)
    if on.any() and opts.touching_axes == "skip":
        return None
    us = u[~on]
    if len(us) == 0:
        return None
    u_min = _extreme(us, d, +1)
    u_max = _extreme(us, d, -1)
    if u_min is None or u_max is None:
        return None  # the vertex directions span at least a half-turn
    if axis.order == 2:
        r1 = -_cross(d, u_min)
        r2 = _cross(d, u_max)
        convex = True
    else:
        if dd != 3:
            raise ValueError("triads must be along body diagonals")
        r1 = u_min - _cross(d, u_min)
        r2 = u_max + _cross(d, u_max)
        dot = int(u_min @ u_max)
        convex = dot <= 0 or 4 * dot * dot < int(u_min @ u_min) * int(u_max @ u_max)
    return ForbiddenDihedron(axis, origin, _cross(d, r1), _cross(d, r2), bool(convex),
                             _angle_between(u_min.astype(float), u_max.astype(float)), True, bool(on.any()))


def _build_dihedron_float(P16: np.ndarray, axis: RotationAxis, opts: PruneOptions) -> ForbiddenDihedron | None:
    body = ConvexPolytope3(tuple(tuple(Fraction(int(c), VSCALE) for c in v) for v in P16))
    on_axis = "degenerate" if opts.touching_axes == "skip" else "ignore"
    wedge = support_wedge(body, axis.point, axis.direction, eps=opts.eps, on_axis=on_axis)
    if not hasattr(wedge, "theta_min"):
        return None
    d = np.array(axis.direction, dtype=float)
    d /= np.linalg.norm(d)
    half = math.pi / axis.order
    u1 = wedge.direction(wedge.theta_min - half)
    u2 = wedge.direction(wedge.theta_max + half)
    origin = np.array([float(c) for c in axis.point])
    P = body.as_float() - origin
    touching = bool((np.linalg.norm(P - np.outer(P @ d, d), axis=1) <= opts.eps).any())
    return ForbiddenDihedron(axis, origin, np.cross(d, u1), np.cross(d, u2),
                             wedge.width + 2 * half > math.pi, wedge.width, False, touching)


def _rotation_mask(V: np.ndarray, dih: ForbiddenDihedron, opts: PruneOptions) -> np.ndarray:
    closed = opts.boundary == "closed"
    if dih.exact:
        Q = V - dih.origin
        s1 = Q @ dih.n1
        s2 = Q @ dih.n2
        if closed:
            in1 = (s1 <= 0).all(axis=1)
            in2 = (s2 >= 0).all(axis=1)
        else:
            in1 = (s1 < 0).all(axis=1)
            in2 = (s2 > 0).all(axis=1)
    else:
        Q = V / VSCALE - dih.origin
        s1 = Q @ dih.n1
        s2 = Q @ dih.n2
        e = opts.eps
        if closed:
            in1 = (s1 <= e).all(axis=1)
            in2 = (s2 >= -e).all(axis=1)
        else:
            in1 = (s1 < -e).all(axis=1)
            in2 = (s2 > e).all(axis=1)
    return (in1 & in2) if dih.convex else (in1 | in2)


def forbidden_by_rotation(tile: Tile, dihedron: ForbiddenDihedron,
                          opts: PruneOptions = DEFAULT_OPTIONS) -> bool:
    return bool(_rotation_mask(_tile_array(tile), dihedron, opts)[0])


# -- pipeline ----------------------------------------------------------------------

@dataclass
class Region:
    """Surviving tiles of the population for one (group, prototile) pair."""

    group: QuarterGroup
    prototile: str
    alive: np.ndarray
    stage_log: list = field(default_factory=list)
    options: PruneOptions = DEFAULT_OPTIONS
    population: Population = field(default=None, repr=False)

    def __post_init__(self):
        if self.population is None:
            self.population = initial_population()

    @property
    def survivors(self) -> list[int]:
        return [int(i) for i in np.nonzero(self.alive)[0]]

    def tiles(self) -> list[Tile]:
        return [self.population[i] for i in self.survivors]

    def __len__(self) -> int:
        return int(self.alive.sum())

    def copy(self) -> "Region":
        return Region(self.group, self.prototile, self.alive.copy(), list(self.stage_log),
                      self.options, self.population)

    def to_json(self) -> dict:
        return {
            "group": self.group.slug,
            "prototile": self.prototile,
            "options": self.options.as_dict(),
            "stages": [{"id": s, "remaining": n} for s, n in self.stage_log],
            "survivors": self.survivors,
        }


def check_stages(G: QuarterGroup, stages: Sequence[str]) -> list[str]:
    stages = list(stages)
    for s in stages:
        if s not in G.transformation_sets:
            raise StageNotApplicable(f"{s} is not used for {G.name} (allowed: {', '.join(G.transformation_sets)})")
    return stages


def dihedra(proto_type: str, set_id: str, opts: PruneOptions = DEFAULT_OPTIONS) -> list[ForbiddenDihedron]:
    out = []
    for ax in transformation_set(set_id).axes:
        dih = build_dihedron(proto_type, ax, opts)
        if dih is not None:
            out.append(dih)
    return out


def apply_stage(alive: np.ndarray, pop: Population, proto_type: str, set_id: str,
                opts: PruneOptions = DEFAULT_OPTIONS) -> np.ndarray:
    ts = transformation_set(set_id)
    alive = alive.copy()
    if ts.is_translation:
        P = scaled_vertices(proto_type)
        for v in ts.translations:
            alive &= ~_translation_mask(pop.V, P, v, opts)
    else:
        for dih in dihedra(proto_type, set_id, opts):
            alive &= ~_rotation_mask(pop.V, dih, opts)
    return alive


def run_pipeline(G: QuarterGroup, proto_type: str, stages: Sequence[str] | None = None,
                 opts: PruneOptions = DEFAULT_OPTIONS, population: Population | None = None) -> Region:
    """Prune the initial population for ``G`` and one prototile.

    ``stages`` defaults to all transformation sets of ``G`` in canonical
    order.  Stages run in the order given.
    """
    pop = population if population is not None else initial_population()
    stages = check_stages(G, G.transformation_sets if stages is None else stages)
    alive = np.ones(len(pop), dtype=bool)
    log = []
    for s in stages:
        alive = apply_stage(alive, pop, proto_type, s, opts)
        log.append((s, int(alive.sum())))
    own = pop.own_tile(proto_type)
    if not alive[own]:  # cannot happen for sound rules; guard against regressions
        raise AssertionError(f"prototile {proto_type} discarded by its own region")
    return Region(G, proto_type, alive, log, opts, pop)
