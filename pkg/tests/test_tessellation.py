from __future__ import annotations

import random
from fractions import Fraction as Fr

import numpy as np
import pytest

from stereohedra.catalog import TILE_TYPES, group, representatives
from stereohedra.geometry import Isometry, compose, volume
from stereohedra.tessellation import VSCALE, make_tile, prototile, tiles_in_box


def separated(A: np.ndarray, B: np.ndarray) -> bool:
    """Exact separating-axis test for closed convex hulls of integer point sets.

    True iff some plane weakly separates them, i.e. their interiors are
    disjoint.  Candidate normals are all cross products of point
    differences, a superset of facet normals and edge-edge directions.
    """
    def diffs(P):
        i, j = np.triu_indices(len(P), 1)
        return P[i] - P[j]
    E = np.concatenate([diffs(A), diffs(B)])
    N = np.cross(E[:, None, :], E[None, :, :]).reshape(-1, 3)
    N = N[N.any(axis=1)]
    a, b = A @ N.T, B @ N.T
    return bool(((a.max(axis=0) <= b.min(axis=0)) | (b.max(axis=0) <= a.min(axis=0))).any())


def tile_V(pop, i):
    return pop.V[i, : pop.nverts[i]]


def test_population_counts(pop):
    assert len(pop) == 3072
    for t in TILE_TYPES:
        sel = [tile for tile in pop if tile.type == t]
        assert len(sel) == 768
        assert len({tile.placement for tile in sel}) == 768
    ident = [tile for tile in pop if tile.type == "A" and tile.placement == Isometry.identity()]
    assert len(ident) == 1
    assert np.abs(pop.V).max() <= VSCALE


def test_prototile_vertices():
    A = prototile("A").vertices
    assert (Fr(1, 8), Fr(1, 8), Fr(1, 8)) in A
    assert (Fr(3, 16), Fr(3, 16), 0) in A
    assert [len(prototile(t).vertices) for t in TILE_TYPES] == [6, 8, 8, 6]
    assert all(v[2] >= 0 for v in A)
    assert all(v[2] <= 0 for v in prototile("D").vertices)


def test_vertex_round_trip(pop):
    for tile in pop.tiles[::7]:
        assert tile.recompute_vertices() == tile.vertices


def test_tiles_in_box(pop):
    assert len(tiles_in_box(pop, -1, 1)) == 3072
    unit = tiles_in_box(pop, 0, 1)
    assert len(unit) == 384
    assert {t: sum(1 for x in unit if x.type == t) for t in TILE_TYPES} == dict.fromkeys(TILE_TYPES, 96)
    assert tiles_in_box(pop, 1, 0) == []
    assert tiles_in_box(pop, (Fr(1, 3),) * 3, (Fr(1, 3),) * 3) == []


def test_unit_cube_volume(pop):
    vols = {t: volume(prototile(t).body) for t in TILE_TYPES}
    assert sum(vols[t.type] for t in tiles_in_box(pop, 0, 1)) == 1


def test_sat_controls(pop):
    i = pop.own_tile("B")
    V = tile_V(pop, i)
    assert not separated(V, V + np.array([1, 0, 0]))
    assert separated(V, V + np.array([VSCALE, 0, 0]))


def test_interior_disjoint_sample(pop):
    rng = random.Random(3)
    C = pop.V.mean(axis=1)
    pairs = 0
    while pairs < 200:
        i = rng.randrange(len(pop))
        near = np.nonzero(np.linalg.norm(C - C[i], axis=1) < 0.3 * VSCALE)[0]
        j = int(rng.choice(near))
        if i == j:
            continue
        assert separated(tile_V(pop, i), tile_V(pop, j)), (pop[i], pop[j])
        pairs += 1


def test_population_equivariant(pop):
    rng = random.Random(4)
    reps = representatives(group("NQ"))
    for _ in range(20):
        rho = rng.choice(reps)
        # re-centre so that rho sends the prototile into the population box
        c = rho.apply((Fr(1, 8), Fr(1, 16), Fr(1, 16)))
        rho = compose(Isometry.translation([-(x // 1) - rng.randint(0, 1) for x in c]), rho)
        found = 0
        for tile in pop.tiles[::5]:
            img = make_tile(tile.type, compose(rho, tile.placement))
            if all(-1 <= c <= 1 for v in img.vertices for c in v):
                k = pop.find(img.type, img.placement)
                assert k is not None
                assert set(pop[k].vertices) == set(img.vertices)
                found += 1
        assert found > 0
