"""Checked-in group data for the eight quarter cubic groups.

Everything is loaded from the text files in ``stereohedra/data`` and
validated on first use.  Isometries of the normalizer ``N(Q)`` are handled
modulo integer translations through explicit representatives: ``g`` lies in
a group exactly when ``(L(g), t(g) mod 1)`` matches one of its
representatives.
"""
from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Sequence

import numpy as np

from .geometry import Isometry, compose, parse_rational, rotation_about, MalformedRational

SCALE = 8  # every translation in N(Q) lies on the 1/8 grid (in fact 1/4)
TILE_TYPES = ("A", "B", "C", "D")
COSETS = tuple(range(1, 9))
TRIAD_R = Isometry((0, 0, 1, 1, 0, 0, 0, 1, 0), (0, 0, 0))  # (x,y,z) -> (z,x,y)


class CatalogError(RuntimeError):
    """Static data failed validation (corrupted or mistyped table)."""


class NotInNormalizer(ValueError):
    """An isometry expected in N(Q) matched none of its 96 representatives."""


def _data_text(name: str) -> str:
    return resources.files("stereohedra").joinpath("data", name).read_text()


def _records(name: str) -> Iterable[tuple[int, list[str]]]:
    for lineno, raw in enumerate(_data_text(name).splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


# -- isometry tables ---------------------------------------------------------

def _parse_isometry_record(name: str, lineno: int, fields: list[str]) -> tuple[tuple[int, int], Isometry]:
    if len(fields) != 13:
        raise CatalogError(f"{name}:{lineno}: expected tag + 12 rationals, got {len(fields)} fields")
    tag = fields[0]
    try:
        c, pos = tag.split(":")
        coset = int(c.lstrip("C"))
        pos = int(pos)
    except ValueError as exc:
        raise CatalogError(f"{name}:{lineno}: bad tag {tag!r}") from exc
    try:
        vals = [parse_rational(v) for v in fields[1:]]
    except MalformedRational as exc:
        raise CatalogError(f"{name}:{lineno}: {exc}") from exc
    if any(v.denominator != 1 for v in vals[:9]):
        raise CatalogError(f"{name}:{lineno}: linear part must be integral")
    try:
        g = Isometry(tuple(int(v) for v in vals[:9]), tuple(vals[9:]))
    except ValueError as exc:
        raise CatalogError(f"{name}:{lineno}: {exc}") from exc
    return (coset, pos), g


def _load_table(name: str) -> dict[tuple[int, int], Isometry]:
    out = {}
    for lineno, fields in _records(name):
        key, g = _parse_isometry_record(name, lineno, fields)
        if key in out:
            raise CatalogError(f"{name}:{lineno}: duplicate entry {key}")
        out[key] = g
    return out


@functools.lru_cache(maxsize=None)
def _horizontal(tile_type: str) -> dict[tuple[int, int], Isometry]:
    base = _load_table("horizontal_A.txt")
    if sorted(base) != [(c, p) for c in COSETS for p in range(4)]:
        raise CatalogError("horizontal_A.txt must hold 4 isometries for each of C1..C8")
    if tile_type == "A":
        return base
    table = dict(base)
    for key, g in _load_table(f"horizontal_{tile_type}.txt").items():
        if key not in base:
            raise CatalogError(f"override {key} for type {tile_type} has no base entry")
        ref = base[key]
        shift = [a - b for a, b in zip(g.t, ref.t)]
        if g.L != ref.L or any(s.denominator != 1 for s in shift):
            raise CatalogError(f"override {key} for type {tile_type} is not an integer translate of the base entry")
        table[key] = g
    return table


def horizontal_isometries(tile_type: str) -> dict[int, list[Isometry]]:
    """The 32 isometries for a tile type, grouped by coset (4 per coset)."""
    if tile_type not in TILE_TYPES:
        raise ValueError(f"unknown tile type {tile_type!r}")
    table = _horizontal(tile_type)
    return {c: [table[(c, p)] for p in range(4)] for c in COSETS}


def overridden_entries(tile_type: str) -> list[tuple[int, int]]:
    if tile_type == "A":
        return []
    return sorted(_load_table(f"horizontal_{tile_type}.txt"))


# -- representatives modulo Z^3 ----------------------------------------------

def reduced_key(g: Isometry) -> tuple[int, ...]:
    """``(L, SCALE * (t mod 1))`` as an integer tuple."""
    k = g.scaled_key(SCALE)
    return k[:9] + tuple(v % SCALE for v in k[9:])


def triad_powers() -> list[Isometry]:
    return [Isometry.identity(), TRIAD_R, compose(TRIAD_R, TRIAD_R)]


@functools.lru_cache(maxsize=None)
def _normalizer_reps() -> tuple[tuple[Isometry, int], ...]:
    reps = []
    table = _horizontal("A")
    for (c, p) in sorted(table):
        for r in triad_powers():
            reps.append((compose(r, table[(c, p)]), c))
    keys = {reduced_key(g) for g, _ in reps}
    if len(keys) != 96:
        raise CatalogError(f"expected 96 distinct representatives of N(Q) mod Z^3, got {len(keys)}")
    return tuple(reps)


@functools.lru_cache(maxsize=None)
def coset_lookup() -> dict[tuple[int, ...], int]:
    """Reduced key -> coset index, for all 96 representatives of N(Q)."""
    return {reduced_key(g): c for g, c in _normalizer_reps()}


def classify_coset(mu: Isometry) -> int:
    try:
        key = reduced_key(mu)
    except ValueError as exc:
        raise NotInNormalizer(str(mu)) from exc
    c = coset_lookup().get(key)
    if c is None:
        raise NotInNormalizer(str(mu))
    return c


# -- groups ---------------------------------------------------------------------

@dataclass(frozen=True)
class QuarterGroup:
    name: str
    slug: str
    cosets: tuple[int, ...]
    lattice: str
    transformation_sets: tuple[str, ...]
    plane_subgroup_type: str
    expected: dict = field(default_factory=dict, compare=False, hash=False)
    aliases: tuple[str, ...] = ()

    @property
    def aspects(self) -> int:
        return 12 * len(self.cosets) // (2 if self.lattice == "I" else 1)

    @property
    def index_in_normalizer(self) -> int:
        return len(self.cosets)

    def representatives(self) -> list[Isometry]:
        return representatives(self)

    def __str__(self) -> str:
        return self.name


_GROUP_ROWS = [
    # name, slug, cosets, lattice, sets, plane type, aliases
    ("N(Q)", "NQ", (1, 2, 3, 4, 5, 6, 7, 8), "I", ("S1", "S2", "S3", "S4", "S5"), "pgg",
     ("N(Q)", "Ia-3d", "I4_1/g-32/d")),
    ("I4_132", "I4_1_32", (1, 2, 3, 4), "I", ("S1", "S2", "S3", "S4", "S5"), "p2", ("I4_132", "I4132")),
    ("I-43d", "I-43d", (1, 3, 6, 8), "I", ("S1", "S2", "S3", "S4"), "p2", ()),
    ("I2/g-3", "I2_g-3", (1, 3, 5, 7), "I", ("S1", "S2", "S3", "S4"), "pgg", ("I2/g-3", "Ia-3")),
    ("P4_132", "P4_1_32", (1, 2), "P", ("S1", "S3", "S6"), "p1", ("P4_132", "P4132")),
    ("I2'3", "I2p3", (1, 3), "I", ("S1", "S2", "S3", "S4"), "p2", ("I2'3", "I2_13", "I213")),
    ("P2_1/a-3", "P2_1_a-3", (1, 7), "P", ("S1", "S3"), "pg", ("P2_1/a-3", "Pa-3")),
    ("P2_13", "P2_1_3", (1,), "P", ("S1", "S3"), "p1", ("P2_13", "P213", "Q")),
]


@functools.lru_cache(maxsize=None)
def golden_table() -> dict:
    return json.loads(_data_text("table1.json"))


@functools.lru_cache(maxsize=None)
def groups() -> tuple[QuarterGroup, ...]:
    gold = golden_table()["groups"]
    out = []
    for name, slug, cosets, lattice, sets, ptype, aliases in _GROUP_ROWS:
        out.append(QuarterGroup(name, slug, cosets, lattice, sets, ptype, dict(gold[slug]), aliases))
    return tuple(out)


def group(name: str) -> QuarterGroup:
    key = name.strip()
    for g in groups():
        if key == g.slug or key == g.name or key in g.aliases or key.lower() == g.slug.lower():
            return g
    raise KeyError(f"unknown group {name!r}; choose from {[g.slug for g in groups()]}")


NORMALIZER = "NQ"


@functools.lru_cache(maxsize=None)
def _reps_for(cosets: tuple[int, ...]) -> tuple[Isometry, ...]:
    return tuple(g for g, c in _normalizer_reps() if c in cosets)


def representatives(G: QuarterGroup) -> list[Isometry]:
    """``12 |cosets|`` isometries representing G modulo Z^3."""
    return list(_reps_for(G.cosets))


def is_member(G: QuarterGroup, mu: Isometry) -> bool:
    return classify_coset(mu) in G.cosets


# -- transformation sets ------------------------------------------------------------

@dataclass(frozen=True)
class RotationAxis:
    point: tuple[Fraction, Fraction, Fraction]
    direction: tuple[int, int, int]
    order: int

    def isometry(self) -> Isometry:
        return rotation_about(self.point, self.direction, self.order)

    def canonical_line(self) -> tuple:
        """(primitive direction with a fixed sign, point of the line nearest the origin)."""
        d = tuple(int(v) for v in self.direction)
        g = np.gcd.reduce([abs(v) for v in d])
        d = tuple(v // g for v in d)
        d = min(d, tuple(-v for v in d))
        dd = sum(v * v for v in d)
        s = sum(p * v for p, v in zip(self.point, d)) / dd
        foot = tuple(p - s * v for p, v in zip(self.point, d))
        return d, foot


@dataclass(frozen=True)
class TransformationSet:
    id: str
    translations: tuple = ()
    axes: tuple = ()

    @property
    def is_translation(self) -> bool:
        return bool(self.translations)


def _load_axes(name: str) -> tuple[RotationAxis, ...]:
    seen = {}
    for lineno, fields in _records(name):
        if len(fields) != 7:
            raise CatalogError(f"{name}:{lineno}: expected 'px py pz dx dy dz order'")
        try:
            p = tuple(parse_rational(v) for v in fields[:3])
            d = tuple(parse_rational(v) for v in fields[3:6])
            order = int(fields[6])
        except (MalformedRational, ValueError) as exc:
            raise CatalogError(f"{name}:{lineno}: {exc}") from exc
        if any(v.denominator != 1 for v in d) or not any(d):
            raise CatalogError(f"{name}:{lineno}: direction must be a nonzero integer vector")
        ax = RotationAxis(p, tuple(int(v) for v in d), order)
        try:
            ax.isometry()
        except ValueError as exc:
            raise CatalogError(f"{name}:{lineno}: {exc}") from exc
        # rows repeated verbatim in the source tables are kept once
        seen.setdefault((ax.point, ax.direction, ax.order), ax)
    return tuple(seen.values())


@functools.lru_cache(maxsize=None)
def transformation_set(set_id: str) -> TransformationSet:
    if set_id == "S1":
        vs = []
        for i in range(3):
            for s in (1, -1):
                v = [Fraction(0)] * 3
                v[i] = Fraction(s)
                vs.append(tuple(v))
        return TransformationSet("S1", translations=tuple(vs))
    if set_id == "S2":
        h = Fraction(1, 2)
        vs = tuple(tuple(s * h for s in signs) for signs in itertools.product((1, -1), repeat=3))
        return TransformationSet("S2", translations=vs)
    if set_id in ("S3", "S4", "S5", "S6"):
        return TransformationSet(set_id, axes=_load_axes(f"axes_{set_id}.txt"))
    raise KeyError(f"unknown transformation set {set_id!r}")


def parity_direction(point: Sequence[Fraction]) -> tuple[int, int, int]:
    """Direction of the unique triad axis of Q through a point of (Z/2)^3."""
    fr = [Fraction(c) % 1 for c in point]
    if any(f not in (0, Fraction(1, 2)) for f in fr):
        raise ValueError(f"{point} is not in (Z/2)^3")
    x, y, z = fr
    if x == y == z:
        return (1, 1, 1)
    if x == z:
        return (-1, 1, 1)
    if x == y:
        return (1, -1, 1)
    return (1, 1, -1)


def check_triad_parity(axes: Iterable[RotationAxis]) -> list[RotationAxis]:
    """Return the triad axes whose direction disagrees with the parity rule."""
    bad = []
    for ax in axes:
        want = np.array(parity_direction(ax.point))
        d = np.array(ax.direction)
        if ax.order != 3 or not ((d == want).all() or (d == -want).all()):
            bad.append(ax)
    return bad


def lines_subset(small: Iterable[RotationAxis], big: Iterable[RotationAxis]) -> list[RotationAxis]:
    """Axes of ``small`` whose line does not occur in ``big``."""
    have = {ax.canonical_line() for ax in big}
    return [ax for ax in small if ax.canonical_line() not in have]


# -- validation -----------------------------------------------------------------

def validate_catalog() -> dict:
    """Run every structural check on the static data; raise CatalogError on failure."""
    problems = []
    for t in TILE_TYPES:
        table = _horizontal(t)
        for key, g in table.items():
            M = g.matrix()
            if not (M @ M.T == np.eye(3, dtype=np.int64)).all():
                problems.append(f"{t}{key}: not orthogonal")
            classify = coset_lookup().get(reduced_key(g))
            if classify != key[0]:
                problems.append(f"{t}{key}: listed under C{key[0]} but classifies as {classify}")
    counts = {t: len(overridden_entries(t)) for t in TILE_TYPES}
    for G in groups():
        if 1 not in G.cosets or len(G.cosets) not in (1, 2, 4, 8):
            problems.append(f"{G.name}: bad coset list")
        if (G.lattice == "I") != (3 in G.cosets and G.name.startswith(("I", "N"))):
            problems.append(f"{G.name}: lattice flag inconsistent with C3 membership")
        if G.aspects != G.expected.get("aspects"):
            problems.append(f"{G.name}: aspects {G.aspects} != {G.expected.get('aspects')}")
    s3 = transformation_set("S3").axes
    bad = check_triad_parity(s3)
    if bad:
        problems.append(f"S3 parity rule violated by {len(bad)} axes")
    missing = lines_subset(transformation_set("S6").axes, transformation_set("S5").axes)
    if missing:
        problems.append(f"S6 has {len(missing)} lines not in S5")
    # every rotation used for pruning must belong to N(Q)
    for sid in ("S3", "S4", "S5", "S6"):
        for ax in transformation_set(sid).axes:
            try:
                classify_coset(ax.isometry())
            except NotInNormalizer:
                problems.append(f"{sid}: rotation about {ax} is not in N(Q)")
    if problems:
        raise CatalogError("; ".join(problems))
    return {"overrides": counts, "representatives": len(coset_lookup()),
            "axes": {sid: len(transformation_set(sid).axes) for sid in ("S3", "S4", "S5", "S6")}}
