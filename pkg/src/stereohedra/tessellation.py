"""The auxiliary tessellation by images of four prototiles under N(Q)."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from fractions import Fraction as Fr

import numpy as np

from .catalog import SCALE, TILE_TYPES, horizontal_isometries, triad_powers
from .geometry import ConvexPolytope3, Isometry, compose

VSCALE = 16  # tile vertices live on the 1/16 grid
MAXV = 8

_P = {
    "A": [(0, 0, 0), (Fr(1, 8), Fr(1, 8), Fr(1, 8)), (Fr(1, 4), Fr(1, 16), Fr(1, 16)),
          (Fr(1, 4), Fr(1, 8), 0), (Fr(3, 16), Fr(3, 16), 0), (Fr(1, 4), 0, 0)],
    "B": [(0, 0, 0), (Fr(1, 4), 0, 0), (Fr(1, 4), Fr(1, 8), 0), (Fr(3, 16), Fr(3, 16), 0),
          (Fr(1, 4), 0, Fr(-1, 8)), (Fr(1, 8), 0, Fr(-1, 4)), (Fr(1, 16), Fr(1, 16), Fr(-1, 4)),
          (0, 0, Fr(-1, 4))],
    "C": [(0, 0, 0), (Fr(1, 4), 0, 0), (Fr(1, 4), Fr(-1, 16), Fr(-1, 16)), (Fr(1, 4), 0, Fr(-1, 8)),
          (Fr(1, 8), 0, Fr(-1, 4)), (0, Fr(-3, 16), Fr(-3, 16)), (0, Fr(-1, 8), Fr(-1, 4)),
          (0, 0, Fr(-1, 4))],
    "D": [(0, 0, 0), (0, Fr(-3, 16), Fr(-3, 16)), (Fr(-1, 16), Fr(-1, 16), Fr(-1, 4)),
          (0, Fr(-1, 8), Fr(-1, 4)), (Fr(-1, 8), Fr(-1, 8), Fr(-1, 8)), (0, 0, Fr(-1, 4))],
}

CUBE_SHIFTS = [(0, 0, 0), (-1, 0, 0), (0, -1, 0), (0, 0, -1),
               (-1, -1, 0), (-1, 0, -1), (0, -1, -1), (-1, -1, -1)]


class PopulationInvariantViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class Prototile:
    type: str
    body: ConvexPolytope3

    @property
    def vertices(self):
        return self.body.vertices


@functools.lru_cache(maxsize=None)
def prototile(t: str) -> Prototile:
    if t not in _P:
        raise ValueError(f"unknown tile type {t!r}")
    return Prototile(t, ConvexPolytope3(tuple(_P[t])))


def scaled_vertices(t: str) -> np.ndarray:
    """Prototile vertices times 16, as int64 (n, 3)."""
    return np.array([[int(c * VSCALE) for c in v] for v in prototile(t).vertices], dtype=np.int64)


@dataclass(frozen=True)
class Tile:
    type: str
    placement: Isometry
    vertices: tuple
    index: int = -1

    def recompute_vertices(self) -> tuple:
        return tuple(self.placement.apply(v) for v in prototile(self.type).vertices)

    @property
    def body(self) -> ConvexPolytope3:
        return ConvexPolytope3(self.vertices)


class Population:
    """A list of tiles plus packed integer arrays for vectorised predicates.

    ``V`` holds vertices times 16, padded to 8 per tile by repeating the last
    vertex (harmless for all-vertices tests).  ``T`` holds translations
    times 8.
    """

    def __init__(self, tiles: list[Tile]):
        self.tiles = tiles
        n = len(tiles)
        self.types = np.array([t.type for t in tiles])
        self.L = np.zeros((n, 3, 3), dtype=np.int64)
        self.T = np.zeros((n, 3), dtype=np.int64)
        self.V = np.zeros((n, MAXV, 3), dtype=np.int64)
        self.nverts = np.zeros(n, dtype=np.int64)
        for i, tile in enumerate(tiles):
            k = tile.placement.scaled_key(SCALE)
            self.L[i] = np.array(k[:9]).reshape(3, 3)
            self.T[i] = k[9:]
            vs = np.array([[int(c * VSCALE) for c in v] for v in tile.vertices], dtype=np.int64)
            self.nverts[i] = len(vs)
            self.V[i, :len(vs)] = vs
            self.V[i, len(vs):] = vs[-1]
        self._index = {(t.type, t.placement): i for i, t in enumerate(tiles)}

    def __len__(self) -> int:
        return len(self.tiles)

    def __iter__(self):
        return iter(self.tiles)

    def __getitem__(self, i) -> Tile:
        return self.tiles[i]

    def find(self, tile_type: str, placement: Isometry) -> int | None:
        return self._index.get((tile_type, placement))

    def own_tile(self, tile_type: str) -> int:
        return self._index[(tile_type, Isometry.identity())]

    def float_vertices(self, i: int) -> np.ndarray:
        return self.V[i, : self.nverts[i]] / VSCALE


def make_tile(tile_type: str, placement: Isometry, index: int = -1) -> Tile:
    verts = tuple(placement.apply(v) for v in prototile(tile_type).vertices)
    return Tile(tile_type, placement, verts, index)


@functools.lru_cache(maxsize=1)
def initial_population() -> Population:
    """768 tiles of each type covering the cube [-1, 1]^3.

    Ordering is deterministic: (type, coset, table position, triad power,
    cube shift).
    """
    tiles = []
    powers = triad_powers()
    for t in TILE_TYPES:
        base = scaled_vertices(t)
        table = horizontal_isometries(t)
        for c in sorted(table):
            for h in table[c]:
                for r in powers:
                    g = compose(r, h)
                    for s in CUBE_SHIFTS:
                        placement = compose(Isometry.translation(s), g)
                        k = placement.scaled_key(SCALE)
                        vs = base @ np.array(k[:9]).reshape(3, 3).T + 2 * np.array(k[9:])
                        verts = tuple(tuple(Fr(int(x), VSCALE) for x in row) for row in vs)
                        tiles.append(Tile(t, placement, verts, len(tiles)))
    pop = Population(tiles)
    _check_population(pop)
    return pop


def _check_population(pop: Population) -> None:
    for t in TILE_TYPES:
        sel = [tile.placement for tile in pop.tiles if tile.type == t]
        if len(sel) != 768 or len(set(sel)) != 768:
            raise PopulationInvariantViolation(f"type {t}: {len(set(sel))} distinct placements, expected 768")
    if np.abs(pop.V).max() > VSCALE:
        raise PopulationInvariantViolation("a tile leaves the box [-1, 1]^3")
    for t in TILE_TYPES:
        if (t, Isometry.identity()) not in pop._index:
            raise PopulationInvariantViolation(f"prototile {t} missing from population")


def tiles_in_box(pop: Population, lo, hi) -> list[Tile]:
    """Tiles whose vertices all lie in the closed box ``[lo, hi]`` (per coordinate)."""
    lo = _triple(lo)
    hi = _triple(hi)
    if any(a > b for a, b in zip(lo, hi)):
        return []
    # exact comparison on the 1/16 grid: scale bounds, round inward
    lo_s = np.array([math.ceil(c * VSCALE) for c in lo])
    hi_s = np.array([math.floor(c * VSCALE) for c in hi])
    ok = ((pop.V >= lo_s) & (pop.V <= hi_s)).all(axis=(1, 2))
    return [pop.tiles[i] for i in np.nonzero(ok)[0]]


def _triple(v) -> list[Fr]:
    if isinstance(v, (int, float, Fr)):
        return [Fr(v)] * 3
    return [Fr(c) for c in v]
