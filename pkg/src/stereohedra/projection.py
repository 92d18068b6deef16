"""Filtering by coordinate projections.

Elements of the group that fix the ``k``-th coordinate of every point (linear
part fixes ``e_k``, zero ``k``-translation) induce a plane group ``G_k`` on the
orthogonal coordinate plane.  For such ``g`` and any base point ``p``, a point
``x`` of the Voronoi region of ``p`` satisfies ``|pi(x) - pi(g p)| >=
|pi(x) - pi(p)|``, because ``x - p`` and ``x - g p`` have the same ``k``-th
component.

A tile is discarded when, for one single planar element ``g``, every pair
(projected tile vertex ``x``, projected prototile vertex ``p``) satisfies
``|x - g p|^2 <= |x - p|^2`` (``<`` with the open boundary policy).  The
difference of squared distances is affine in ``x`` for fixed ``p`` and
affine in ``p`` for fixed ``x``, so checking vertex pairs decides the
inequality over the whole product of the two polygons.  For translations
and half-turns this is exactly the strip and wedge construction used in
three dimensions; for glide reflections it is the exact forbidden region
of the glide.

``glide_rule="pseudo"`` replaces each glide by two half-turns centred on the
glide axis at distance ``|v|/2`` beyond the ends of the projected prototile.
That heuristic is kept for comparison only: it is not implied by the glide
itself and can discard allowed tiles.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .catalog import QuarterGroup, representatives
from .pruning import DEFAULT_OPTIONS, PruneOptions, Region
from .tessellation import VSCALE, scaled_vertices

AXES = "xyz"


def plane_coords(k: int) -> tuple[int, int]:
    return tuple(i for i in range(3) if i != k)


@dataclass(frozen=True)
class PlanarElement:
    """``x -> M x + s`` on the coordinate plane orthogonal to axis ``k``."""

    kind: str  # translation | half_turn | glide | reflection
    M: tuple[int, int, int, int]
    s: tuple[Fraction, Fraction]

    @property
    def center(self) -> tuple[Fraction, Fraction]:
        if self.kind != "half_turn":
            raise ValueError("only half-turns have a centre")
        return (self.s[0] / 2, self.s[1] / 2)

    def axis(self) -> tuple[tuple[Fraction, Fraction], tuple[int, int], tuple[Fraction, Fraction]]:
        """(point on the mirror line, direction, glide vector)."""
        if self.kind not in ("glide", "reflection"):
            raise ValueError("only glides and reflections have an axis")
        e = _fixed_direction(self.M)
        ee = e[0] * e[0] + e[1] * e[1]
        c = (self.s[0] * e[0] + self.s[1] * e[1]) / ee
        v = (c * e[0], c * e[1])
        a = ((self.s[0] - v[0]) / 2, (self.s[1] - v[1]) / 2)
        return a, e, v

    def apply(self, p) -> tuple[Fraction, Fraction]:
        M = self.M
        return (M[0] * p[0] + M[1] * p[1] + self.s[0], M[2] * p[0] + M[3] * p[1] + self.s[1])


def _fixed_direction(M) -> tuple[int, int]:
    a, b, c, d = M
    # eigenvector for eigenvalue 1 of a 2x2 reflection matrix
    if (a - 1, b) != (0, 0):
        return (b, 1 - a) if (b, 1 - a) != (0, 0) else (1 - d, c)
    return (1, 0) if c == 0 else (1 - d, c)


def _kind(M, s) -> str:
    a, b, c, d = M
    det = a * d - b * c
    if M == (1, 0, 0, 1):
        return "translation"
    if M == (-1, 0, 0, -1):
        return "half_turn"
    if det == -1:
        e = _fixed_direction(M)
        return "glide" if s[0] * e[0] + s[1] * e[1] != 0 else "reflection"
    return "rotation"


def plane_subgroup(G: QuarterGroup, k: int, window: int = 3) -> list[PlanarElement]:
    """Planar elements induced by ``G`` on the plane orthogonal to axis ``k``.

    Group elements are ``r`` composed with integer translations, ``r`` over
    the representatives of ``G`` modulo Z^3 and in-plane shifts in
    ``[-window, window]^2``.
    """
    i, j = plane_coords(k)
    out = []
    seen = set()
    for r in representatives(G):
        L = r.matrix()
        if L[k, k] != 1 or r.t[k].denominator != 1:
            continue
        M = (int(L[i, i]), int(L[i, j]), int(L[j, i]), int(L[j, j]))
        for a, b in itertools.product(range(-window, window + 1), repeat=2):
            s = (r.t[i] + a, r.t[j] + b)
            if M == (1, 0, 0, 1) and s == (0, 0):
                continue
            key = (M, s)
            if key in seen:
                continue
            seen.add(key)
            out.append(PlanarElement(_kind(M, s), M, s))
    return out


def plane_group_type(elements: list[PlanarElement]) -> str:
    kinds = {e.kind for e in elements}
    if kinds & {"reflection", "rotation"}:
        return "other"
    has_turn, has_glide = "half_turn" in kinds, "glide" in kinds
    return {(False, False): "p1", (True, False): "p2", (False, True): "pg", (True, True): "pgg"}[(has_turn, has_glide)]


def _pseudo_centres(el: PlanarElement, P2: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    a, e, v = el.axis()
    if 0 not in e:
        return []  # diagonal glide axes do not occur for these groups
    ee = e[0] * e[0] + e[1] * e[1]
    proj = [((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / ee for p in P2]
    vlen = abs(v[0]) + abs(v[1])  # axis-parallel, so this is |v|
    hi, lo = max(proj) + vlen / 2, min(proj) - vlen / 2
    return [(a[0] + hi * e[0], a[1] + hi * e[1]), (a[0] + lo * e[0], a[1] + lo * e[1])]


def _element_images(el: PlanarElement, P2: np.ndarray, glide_rule: str) -> list[np.ndarray]:
    """Images ``g p`` of the projected prototile vertices (scaled by 16) for the test."""
    if el.kind == "glide" and glide_rule == "pseudo":
        pts = [(Fraction(int(x), VSCALE), Fraction(int(y), VSCALE)) for x, y in P2]
        imgs = []
        for c in _pseudo_centres(el, pts):
            c2 = np.array([int(2 * c[0] * VSCALE), int(2 * c[1] * VSCALE)], dtype=np.int64)
            imgs.append(c2 - P2)
        return imgs
    M = np.array(el.M, dtype=np.int64).reshape(2, 2)
    s = np.array([int(el.s[0] * VSCALE), int(el.s[1] * VSCALE)], dtype=np.int64)
    return [P2 @ M.T + s]


def forbidden_mask(X: np.ndarray, P2: np.ndarray, gP: np.ndarray, closed: bool = True) -> np.ndarray:
    """Tiles (X: (n, m, 2)) lying in the region closer to ``g p`` than to ``p`` for all ``p``."""
    A = gP - P2
    B = (gP * gP).sum(axis=1) - (P2 * P2).sum(axis=1)
    f = -2 * np.einsum("nmc,pc->nmp", X, A) + B
    worst = f.max(axis=(1, 2))
    return worst <= 0 if closed else worst < 0


def project_filter(region: Region, G: QuarterGroup, k: int, glide_rule: str = "exact",
                   opts: PruneOptions | None = None) -> Region:
    """Drop survivors whose projection along axis ``k`` is forbidden by a planar element."""
    opts = opts or region.options or DEFAULT_OPTIONS
    closed = opts.boundary == "closed"
    i, j = plane_coords(k)
    P2 = scaled_vertices(region.prototile)[:, [i, j]]
    out = region.copy()
    idx = np.nonzero(out.alive)[0]
    X = region.population.V[idx][:, :, [i, j]]
    dead = np.zeros(len(idx), dtype=bool)
    for el in plane_subgroup(G, k):
        if el.kind == "rotation":
            continue
        for gP in _element_images(el, P2, glide_rule):
            dead |= forbidden_mask(X, P2, gP, closed)
    out.alive[idx[dead]] = False
    out.stage_log.append((f"P{AXES[k]}", int(out.alive.sum())))
    return out


def project_all(region: Region, G: QuarterGroup, glide_rule: str = "exact") -> Region:
    """Apply the filter for the three coordinate projections in turn."""
    for k in range(3):
        region = project_filter(region, G, k, glide_rule)
    return region


def svg_audit(region_before: Region, region_after: Region, G: QuarterGroup, k: int) -> str:
    """Small SVG: projected prototile, planar element loci, kept and dropped tiles."""
    i, j = plane_coords(k)
    scale, half = 200.0, 1.25
    size = int(2 * half * scale)

    def pt(x, y):
        return (float(x) + half) * scale, (half - float(y)) * scale

    def poly(pts, style):
        from scipy.spatial import ConvexHull
        pts = np.asarray(pts, dtype=float)
        try:
            pts = pts[ConvexHull(pts).vertices]
        except Exception:
            pass
        s = " ".join("%.2f,%.2f" % pt(x, y) for x, y in pts)
        return f'<polygon points="{s}" style="{style}"/>'

    pop = region_before.population
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">']
    for idx in region_before.survivors:
        V = pop.V[idx, : pop.nverts[idx]][:, [i, j]] / VSCALE
        kept = region_after.alive[idx]
        style = "fill:#9ecae1;fill-opacity:0.3;stroke:#3182bd;stroke-width:0.5" if kept else \
            "fill:#fcbba1;fill-opacity:0.15;stroke:#de2d26;stroke-width:0.3"
        parts.append(poly(V, style))
    P2 = scaled_vertices(region_before.prototile)[:, [i, j]] / VSCALE
    parts.append(poly(P2, "fill:#31a354;stroke:black;stroke-width:1"))
    for el in plane_subgroup(G, k, window=1):
        if el.kind == "half_turn":
            x, y = pt(*el.center)
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" style="fill:black"/>')
        elif el.kind in ("glide", "reflection"):
            a, e, _ = el.axis()
            x1, y1 = pt(a[0] - 3 * e[0], a[1] - 3 * e[1])
            x2, y2 = pt(a[0] + 3 * e[0], a[1] + 3 * e[1])
            parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                         'style="stroke:#756bb1;stroke-dasharray:4,3;stroke-width:0.7"/>')
    parts.append("</svg>")
    return "\n".join(parts)
