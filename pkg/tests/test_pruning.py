from __future__ import annotations

import random
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stereohedra.catalog import TILE_TYPES, TRIAD_R, RotationAxis, group, groups, transformation_set
from stereohedra.geometry import Isometry, compose, rotation_about
from stereohedra.influence import neighbor_set
from stereohedra.pruning import (
    DEFAULT_OPTIONS, PruneOptions, StageNotApplicable, _rotation_mask, _translation_mask, apply_stage,
    build_dihedron, dihedra, forbidden_by_rotation, forbidden_by_translation, run_pipeline,
)
from stereohedra.tessellation import VSCALE, make_tile, scaled_vertices

FLOAT = PruneOptions(arithmetic="float")
ALL_SETS = ("S1", "S2", "S3", "S4", "S5", "S6")


# -- independent sampling oracle ------------------------------------------------------

def sample_body(V: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """Vertices plus random convex combinations of them."""
    w = rng.dirichlet(np.full(len(V), 0.5), size=n)
    return np.concatenate([V, w @ V])


def violations(X: np.ndarray, Q: np.ndarray, moves: list) -> int:
    """Number of (x, q) pairs where every move m leaves x strictly closer to q than to m(q).

    Such a pair would mean x can lie in the Voronoi region of q, so a tile
    containing x must not be discarded by these moves.
    """
    d0 = np.linalg.norm(X[:, None, :] - Q[None, :, :], axis=2)
    best = np.full_like(d0, np.inf)
    for m in moves:
        best = np.minimum(best, np.linalg.norm(X[:, None, :] - m(Q)[None, :, :], axis=2))
    return int((best > d0 + 1e-12).sum())


def translation_moves(v):
    v = np.array([float(c) for c in v])
    return [lambda Q: Q + v, lambda Q: Q - v]


def rotation_moves(ax: RotationAxis):
    out = []
    g = ax.isometry()
    h = g
    for _ in range(ax.order - 1):
        M = h.matrix().astype(float)
        t = np.array([float(c) for c in h.t])
        out.append(lambda Q, M=M, t=t: Q @ M.T + t)
        h = compose(g, h)
    return out


# -- examples ----------------------------------------------------------------------

def test_translation_examples(pop):
    own = pop[pop.own_tile("A")]
    assert not forbidden_by_translation(own, "A", (1, 0, 0))
    far = make_tile("A", Isometry.translation((Fr(7, 8), 0, 0)))
    assert min(v[0] for v in far.vertices) >= Fr(7, 8)
    assert forbidden_by_translation(far, "A", (1, 0, 0))
    # just inside the strip -1/2 <= x <= 3/4: kept
    near = make_tile("A", Isometry.translation((Fr(1, 2), 0, 0)))
    assert not forbidden_by_translation(near, "A", (1, 0, 0))
    down = make_tile("A", Isometry.translation((-1, -1, -1)))
    assert forbidden_by_translation(down, "A", (Fr(1, 2),) * 3)


def test_translation_strip_boundary_policy():
    # a tile touching the plane x = 3/4 from outside: discarded when closed, kept when open
    edge = make_tile("A", Isometry.translation((Fr(3, 4), 0, 0)))
    assert forbidden_by_translation(edge, "A", (1, 0, 0))
    assert not forbidden_by_translation(edge, "A", (1, 0, 0), PruneOptions(boundary="open"))


def test_translation_zero_vector_rejected(pop):
    with pytest.raises(ValueError):
        forbidden_by_translation(pop[0], "A", (0, 0, 0))


def test_own_tile_never_discarded(pop):
    for t in TILE_TYPES:
        own = pop[pop.own_tile(t)]
        for sid in ("S3", "S4", "S5", "S6"):
            for dih in dihedra(t, sid):
                assert not forbidden_by_rotation(own, dih)
        for sid in ("S1", "S2"):
            for v in transformation_set(sid).translations:
                assert not forbidden_by_translation(own, t, v)


def test_axis_through_prototile():
    ax = RotationAxis((Fr(0),) * 3, (1, 1, 1), 3)
    assert build_dihedron("A", ax, PruneOptions(touching_axes="skip")) is None
    assert build_dihedron("A", ax, PruneOptions(arithmetic="float", touching_axes="skip")) is None
    dih = build_dihedron("A", ax)
    assert dih is not None and dih.touching


def test_d0_diad_example_against_sector_oracle():
    ax = RotationAxis((Fr(1, 4), Fr(0), Fr(0)), (0, 0, 1), 2)
    tile = make_tile("A", compose(Isometry.translation((-1, -1, 0)), TRIAD_R))
    dih = build_dihedron("D", ax)
    decided = forbidden_by_rotation(tile, dih)
    assert decided == forbidden_by_rotation(tile, build_dihedron("D", ax, FLOAT), FLOAT)
    rng = np.random.default_rng(0)
    X = sample_body(np.array([[float(c) for c in v] for v in tile.vertices]), 10_000, rng)
    Q = sample_body(scaled_vertices("D") / VSCALE, 40, rng)
    bad = violations(X, Q, rotation_moves(ax))
    if decided:
        assert bad == 0
    else:
        # kept tiles need not contain allowed points, but this one does
        assert bad > 0


def test_dihedron_convexity_flags():
    for t in TILE_TYPES:
        for dih in dihedra(t, "S4") + dihedra(t, "S5"):
            assert dih.convex  # half-turns: w + pi >= pi never gives a reflex region
        for dih in dihedra(t, "S3"):
            # the forbidden sector spans 2 pi - (w + alpha): convex iff w + alpha >= pi;
            # at equality it is a half-space and both discard rules coincide
            if abs(dih.width + dih.alpha - np.pi) > 1e-9:
                assert dih.convex == (dih.width + dih.alpha > np.pi)
            else:
                assert not np.cross(dih.n1, dih.n2).any() and dih.n1 @ dih.n2 < 0


# -- soundness ---------------------------------------------------------------------

def test_monte_carlo_soundness_500_pairs(pop):
    rng = np.random.default_rng(11)
    prng = random.Random(11)
    checked = 0
    while checked < 500:
        t = prng.choice(TILE_TYPES)
        sid = prng.choice(ALL_SETS)
        P = scaled_vertices(t)
        ts = transformation_set(sid)
        if ts.is_translation:
            v = prng.choice(ts.translations)
            mask = _translation_mask(pop.V, P, v, DEFAULT_OPTIONS)
            moves = translation_moves(v)
        else:
            dih = build_dihedron(t, prng.choice(ts.axes))
            if dih is None:
                continue
            mask = _rotation_mask(pop.V, dih, DEFAULT_OPTIONS)
            moves = rotation_moves(dih.axis)
        hits = np.nonzero(mask)[0]
        if not len(hits):
            continue
        i = int(prng.choice(list(hits)))
        X = sample_body(pop.float_vertices(i), 10_000, rng)
        Q = sample_body(P / VSCALE, 24, rng)
        assert violations(X, Q, moves) == 0, (t, sid, pop[i])
        checked += 1


# -- pipeline ----------------------------------------------------------------------

def test_empty_stage_list_keeps_everything(pop):
    region = run_pipeline(group("P2_1_3"), "A", [])
    assert len(region) == len(pop)


def test_stage_not_applicable():
    with pytest.raises(StageNotApplicable):
        run_pipeline(group("P2_1_3"), "A", ["S1", "S4"])
    with pytest.raises(StageNotApplicable):
        run_pipeline(group("P4_1_32"), "A", ["S5"])


def test_region_json_shape():
    r = run_pipeline(group("P2_1_3"), "B", ["S1", "S3"])
    js = r.to_json()
    assert js["group"] == "P2_1_3" and js["prototile"] == "B"
    assert [s["id"] for s in js["stages"]] == ["S1", "S3"]
    assert js["survivors"] == r.survivors
    assert js["stages"][-1]["remaining"] == len(r)


@settings(max_examples=25)
@given(st.sampled_from([g.slug for g in groups()]), st.sampled_from(TILE_TYPES), st.data())
def test_monotonicity(slug, t, data):
    G = group(slug)
    sets = list(G.transformation_sets)
    k = data.draw(st.integers(0, len(sets) - 1))
    a = run_pipeline(G, t, sets[:k])
    b = run_pipeline(G, t, sets[: k + 1])
    assert not (b.alive & ~a.alive).any()
    assert len(neighbor_set(G, b)) <= len(neighbor_set(G, a))
    counts = [n for _, n in b.stage_log]
    assert counts == sorted(counts, reverse=True)
    assert b.alive[b.population.own_tile(t)]


def test_order_independence_of_stages():
    G = group("NQ")
    a = run_pipeline(G, "C", ["S1", "S2", "S3", "S4", "S5"])
    b = run_pipeline(G, "C", ["S5", "S3", "S1", "S4", "S2"])
    assert (a.alive == b.alive).all()


@pytest.mark.parametrize("t", TILE_TYPES)
def test_equivariance_under_triad(pop, t):
    R = TRIAD_R.matrix()
    V2 = pop.V @ R.T
    P2 = scaled_vertices(t) @ R.T
    # the image of tile i under R is the tile with placement R o rho_i
    inside = np.array([pop.find(tile.type, compose(TRIAD_R, tile.placement)) is not None for tile in pop])
    for sid in ALL_SETS:
        ts = transformation_set(sid)
        if ts.is_translation:
            for v in ts.translations:
                Rv = TRIAD_R.linear(v)
                m0 = _translation_mask(pop.V, scaled_vertices(t), v, DEFAULT_OPTIONS)
                m1 = _translation_mask(V2, P2, Rv, DEFAULT_OPTIONS)
                assert (m0 == m1).all()
        else:
            for ax in ts.axes:
                Rax = RotationAxis(TRIAD_R.apply(ax.point), tuple(int(c) for c in TRIAD_R.linear(ax.direction)),
                                   ax.order)
                d0 = build_dihedron(t, ax)
                d1 = build_dihedron(t, Rax, vertices=P2)
                assert (d0 is None) == (d1 is None)
                if d0 is None:
                    continue
                assert (_rotation_mask(pop.V, d0, DEFAULT_OPTIONS) == _rotation_mask(V2, d1, DEFAULT_OPTIONS)).all()
    # R maps the population into itself wherever the image stays in the box
    assert inside.sum() > 0.9 * len(pop)


def test_equivariance_of_surviving_set(pop):
    """Pruned region of R T0 against R-transformed sets equals R applied to the region of T0."""
    G = group("NQ")
    t = "B"
    R = TRIAD_R.matrix()
    alive0 = run_pipeline(G, t).alive
    V2, P2 = pop.V @ R.T, scaled_vertices(t) @ R.T
    alive1 = np.ones(len(pop), dtype=bool)
    for sid in G.transformation_sets:
        ts = transformation_set(sid)
        if ts.is_translation:
            for v in ts.translations:
                alive1 &= ~_translation_mask(V2, P2, TRIAD_R.linear(v), DEFAULT_OPTIONS)
        else:
            for ax in ts.axes:
                Rax = RotationAxis(TRIAD_R.apply(ax.point), tuple(int(c) for c in TRIAD_R.linear(ax.direction)),
                                   ax.order)
                d = build_dihedron(t, Rax, vertices=P2)
                if d is not None:
                    alive1 &= ~_rotation_mask(V2, d, DEFAULT_OPTIONS)
    # tile i of the transformed population is R(tile i); compare as sets of placements
    s0 = {compose(TRIAD_R, pop[i].placement) for i in np.nonzero(alive0)[0]}
    s1 = {compose(TRIAD_R, pop[i].placement) for i in np.nonzero(alive1)[0]}
    assert s0 == s1


# -- backends and tolerance ------------------------------------------------------------

@pytest.mark.parametrize("slug", ["NQ", "P4_1_32", "P2_1_3"])
def test_float_backend_agrees_with_exact(slug):
    G = group(slug)
    for t in TILE_TYPES:
        a = run_pipeline(G, t)
        b = run_pipeline(G, t, opts=FLOAT)
        assert (a.alive == b.alive).all()


@settings(max_examples=12)
@given(st.floats(1e-12, 1e-6), st.sampled_from(TILE_TYPES), st.sampled_from(["S1", "S2", "S3", "S4", "S5"]))
def test_eps_conservative(eps, t, sid):
    pop = run_pipeline(group("NQ"), t, []).population
    alive = np.ones(len(pop), dtype=bool)
    big = apply_stage(alive, pop, t, sid, PruneOptions(arithmetic="float", eps=eps))
    small = apply_stage(alive, pop, t, sid, PruneOptions(arithmetic="float", eps=eps / 10))
    assert not (big & ~small).any()  # shrinking eps never shrinks the surviving set
    exact = apply_stage(alive, pop, t, sid)
    assert (small == exact).all() and (big == exact).all()


def test_options_validation():
    with pytest.raises(ValueError):
        PruneOptions(arithmetic="interval")
    with pytest.raises(ValueError):
        PruneOptions(eps=-1)
    assert PruneOptions().as_dict()["eps"] is None
    assert FLOAT.as_dict()["eps"] == 1e-9


def test_rotation_helper_consistency():
    # the moves used by the oracle are the rotations themselves
    ax = transformation_set("S3").axes[0]
    g = rotation_about(ax.point, ax.direction, 3)
    assert g == ax.isometry()
