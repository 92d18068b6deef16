"""OFF and JSON writers for tiles, regions and cells."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial import ConvexHull

from .geometry import fmt_rational
from .tessellation import Tile


class ExportEmpty(ValueError):
    """Nothing to export."""


def hull_faces(V: np.ndarray, decimals: int = 9) -> list[list[int]]:
    """Facets of the convex hull as outward-oriented vertex cycles (coplanar triangles merged)."""
    hull = ConvexHull(V)
    groups: dict[tuple, set] = {}
    normals: dict[tuple, np.ndarray] = {}
    for simplex, eq in zip(hull.simplices, hull.equations):
        key = tuple(np.round(eq, decimals))
        groups.setdefault(key, set()).update(int(i) for i in simplex)
        normals[key] = eq[:3]
    faces = []
    for key, idx in groups.items():
        idx = sorted(idx)
        n = normals[key]
        c = V[idx].mean(axis=0)
        a = V[idx[0]] - c
        a /= np.linalg.norm(a)
        b = np.cross(n, a)
        ang = [np.arctan2((V[i] - c) @ b, (V[i] - c) @ a) for i in idx]
        faces.append([idx[k] for k in np.argsort(ang)])
    return faces


def off_text(polytopes: Sequence[np.ndarray]) -> str:
    """One OFF document holding every polytope (vertex blocks concatenated)."""
    if not len(polytopes):
        raise ExportEmpty("no polytopes to export")
    verts, faces = [], []
    for V in polytopes:
        V = np.asarray(V, dtype=float)
        base = len(verts)
        verts.extend(V.tolist())
        faces.extend([[base + i for i in f] for f in hull_faces(V)])
    lines = ["OFF", f"{len(verts)} {len(faces)} 0"]
    lines += ["%.10g %.10g %.10g" % tuple(v) for v in verts]
    lines += [" ".join([str(len(f))] + [str(i) for i in f]) for f in faces]
    return "\n".join(lines) + "\n"


def write_off(path: str | Path, polytopes: Sequence[np.ndarray], merged: bool = True) -> list[Path]:
    """Write a merged OFF file, or one file per polytope (``stem_000.off`` ...)."""
    path = Path(path)
    if not len(polytopes):
        raise ExportEmpty("no polytopes to export")
    if merged:
        path.write_text(off_text(polytopes))
        return [path]
    out = []
    for k, V in enumerate(polytopes):
        p = path.with_name(f"{path.stem}_{k:03d}.off")
        p.write_text(off_text([V]))
        out.append(p)
    return out


def tile_record(tile: Tile) -> dict:
    return {
        "type": tile.type,
        "matrix": [[fmt_rational(c) for c in row] for row in tile.placement.to_homogeneous()],
        "vertices": [[fmt_rational(c) for c in v] for v in tile.vertices],
    }


def tiles_json(tiles: Sequence[Tile]) -> str:
    if not len(tiles):
        raise ExportEmpty("no tiles to export")
    return json.dumps([tile_record(t) for t in tiles], indent=1)


def tile_polytopes(tiles: Sequence[Tile]) -> list[np.ndarray]:
    return [np.array([[float(c) for c in v] for v in t.vertices]) for t in tiles]
