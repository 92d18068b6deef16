"""Independent check: actual Dirichlet stereohedra for sampled base points.

The Voronoi cell of a generic base point ``p`` is built directly as the
intersection of the bisector half-spaces of ``p`` and its orbit points within
a cutoff radius.  The facet count is then compared with the computed bound,
and every facet's generating isometry must belong to the neighbour set that
was counted for the prototile containing ``p``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, HalfspaceIntersection, cKDTree

from .catalog import SCALE, TILE_TYPES, QuarterGroup, representatives
from .influence import IDENTITY_CODE, NeighborSet, decode, encode
from .tessellation import prototile

log = logging.getLogger(__name__)

AREA_MIN = 1e-10
BOX_HALF = 2.0


class StabilizerDetected(ValueError):
    """Two distinct group elements send the base point to the same place."""


class CutoffTooSmall(RuntimeError):
    """The cell reaches beyond half the orbit cutoff radius."""


class BoundViolated(AssertionError):
    pass


@dataclass
class OrbitSample:
    group: QuarterGroup
    p: np.ndarray
    radius: float
    points: np.ndarray
    codes: np.ndarray  # encoded generating isometry of each point


def _rep_arrays(G: QuarterGroup) -> tuple[np.ndarray, np.ndarray]:
    reps = representatives(G)
    L = np.array([r.matrix() for r in reps], dtype=np.int64)
    T = np.array([r.scaled_key(SCALE)[9:] for r in reps], dtype=np.int64)
    return L, T


def sample_orbit(G: QuarterGroup, p, radius: float = 3.0, check_stabilizer: bool = True,
                 tol: float = 1e-9) -> OrbitSample:
    """Orbit points of ``p`` within ``radius``, each tagged with its generating isometry."""
    p = np.asarray(p, dtype=float)
    L, T = _rep_arrays(G)
    pts, codes = [], []
    for Li, Ti in zip(L, T):
        base = Li @ p + Ti / SCALE
        lo = np.ceil(p - base - radius).astype(int)
        hi = np.floor(p - base + radius).astype(int)
        grid = np.stack(np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij"),
                        axis=-1).reshape(-1, 3)
        cand = base + grid
        ok = np.linalg.norm(cand - p, axis=1) <= radius
        pts.append(cand[ok])
        shifts = Ti + SCALE * grid[ok]
        codes.append(encode(np.broadcast_to(Li, (len(shifts), 3, 3)), shifts))
    points = np.concatenate(pts)
    codes = np.concatenate(codes)
    pairs = cKDTree(points).query_pairs(tol, output_type="ndarray")
    if len(pairs):
        if check_stabilizer:
            raise StabilizerDetected(f"{len(pairs)} coincident orbit points for base point {p}")
        # keep one element per coincident point, preferring the identity
        order = np.argsort(codes != IDENTITY_CODE, kind="stable")
        points, codes = points[order], codes[order]
        _, first = np.unique(np.round(points / 1e-12).astype(np.int64), axis=0, return_index=True)
        first = np.sort(first)
        points, codes = points[first], codes[first]
    return OrbitSample(G, p, radius, points, codes)


@dataclass
class VoronoiCell:
    p: np.ndarray
    vertices: np.ndarray
    facets: list = field(default_factory=list)  # (code, area)

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def volume(self) -> float:
        return float(ConvexHull(self.vertices).volume)

    def generators(self) -> list[int]:
        return [c for c, _ in self.facets]


def _polygon_area(pts: np.ndarray, normal: np.ndarray) -> float:
    if len(pts) < 3:
        return 0.0
    n = normal / np.linalg.norm(normal)
    a = np.array([1.0, 0, 0]) if abs(n[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    xy = np.column_stack([pts @ e1, pts @ e2])
    try:
        return float(ConvexHull(xy).volume)
    except Exception:
        return 0.0


def build_cell(sample: OrbitSample) -> VoronoiCell:
    """Clip the box ``[p-2, p+2]^3`` by the bisectors of ``p`` and its orbit points."""
    p = sample.p
    others = sample.codes != IDENTITY_CODE
    Q, codes = sample.points[others], sample.codes[others]
    order = np.argsort(np.linalg.norm(Q - p, axis=1))  # nearest first
    Q, codes = Q[order], codes[order]
    A = Q - p
    b = -(np.einsum("ij,ij->i", Q, Q) - p @ p) / 2
    box_A = np.vstack([np.eye(3), -np.eye(3)])
    box_b = np.concatenate([-(p + BOX_HALF), p - BOX_HALF])
    H = np.column_stack([np.vstack([A, box_A]), np.concatenate([b, box_b])])
    hs = HalfspaceIntersection(H, p)
    V = hs.intersections
    V = V[np.isfinite(V).all(axis=1)]
    scale = np.linalg.norm(H[:, :3], axis=1)
    res = np.abs(V @ H[:, :3].T + H[:, 3]) / scale  # distance of each vertex to each plane
    on = res <= 1e-9
    facets = []
    for j in np.nonzero(on.sum(axis=0) >= 3)[0]:
        area = _polygon_area(V[on[:, j]], H[j, :3])
        if area < AREA_MIN:
            continue
        if j >= len(A):
            raise CutoffTooSmall("cell touches the clipping box")
        facets.append((int(codes[j]), area))
    if np.linalg.norm(V - p, axis=1).max() > sample.radius / 2:
        raise CutoffTooSmall(f"cell radius exceeds {sample.radius / 2}")
    return VoronoiCell(p, V, facets)


def cell_for(G: QuarterGroup, p, radius: float = 1.0, check_stabilizer: bool = True,
             max_radius: float = 8.0) -> VoronoiCell:
    """Build a cell, enlarging the cutoff until the containment check passes."""
    while True:
        try:
            return build_cell(sample_orbit(G, p, radius, check_stabilizer))
        except CutoffTooSmall:
            radius *= 1.5
            if radius > max_radius:
                raise


def _inside(eqs: np.ndarray, x: np.ndarray, margin: float) -> bool:
    return bool((eqs[:, :3] @ x + eqs[:, 3] < -margin).all())


def sample_base_point(tile_type: str, rng: np.random.Generator, jitter: float = 1e-4,
                      margin: float = 1e-6) -> np.ndarray:
    """Uniform point of the open prototile, nudged by a small random jitter."""
    P = prototile(tile_type).body.as_float()
    eqs = ConvexHull(P).equations
    lo, hi = P.min(axis=0), P.max(axis=0)
    while True:
        x = lo + rng.random(3) * (hi - lo)
        if not _inside(eqs, x, margin):
            continue
        y = x + rng.normal(scale=jitter, size=3)
        if _inside(eqs, y, margin):
            return y


@dataclass
class OracleReport:
    group: str
    samples: int
    bound: int
    max_facets_observed: int = 0
    per_prototile: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"group": self.group, "samples": self.samples, "bound": self.bound,
                "max_facets_observed": self.max_facets_observed,
                "per_prototile": self.per_prototile, "violations": self.violations}


def validate(G: QuarterGroup, n_samples: int, seed: int, bound: int,
             neighbor_sets: dict[str, NeighborSet], raise_on_violation: bool = True) -> OracleReport:
    """Sample base points in every prototile and check facet counts and generators."""
    rng = np.random.default_rng(seed)
    rep = OracleReport(G.slug, n_samples, bound)
    for t in TILE_TYPES:
        ns = neighbor_sets[t]
        best = 0
        done = 0
        while done < n_samples:
            p = sample_base_point(t, rng)
            try:
                cell = cell_for(G, p)
            except StabilizerDetected:
                continue
            done += 1
            n = cell.n_facets
            best = max(best, n)
            if n > bound:
                rep.violations.append({"kind": "bound", "prototile": t, "point": p.tolist(), "facets": n})
            gens = np.array(cell.generators(), dtype=np.int64)
            missing = gens[~np.isin(gens, ns.codes)]
            for c in missing:
                rep.violations.append({"kind": "containment", "prototile": t, "point": p.tolist(),
                                       "generator": str(decode(int(c)))})
        rep.per_prototile[t] = best
        rep.max_facets_observed = max(rep.max_facets_observed, best)
        log.info("%s %s: max facets %d over %d samples", G.slug, t, best, n_samples)
    if rep.violations and raise_on_violation:
        raise BoundViolated(f"{G.slug}: {len(rep.violations)} violations, first {rep.violations[0]}")
    return rep
