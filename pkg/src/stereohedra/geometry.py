"""Exact affine geometry kernel.

Coordinates are :class:`fractions.Fraction` throughout.  Isometries carry an
integer signed-permutation linear part and a rational translation, which is
all the normalizer of ``P2_13`` ever needs.  A small floating-point layer
(:class:`NumericHalfspace`, :func:`support_wedge`) is provided for the
angle-based tests; the pruning engine itself uses integer arithmetic, see
:mod:`stereohedra.pruning`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import ConvexHull

Rat = Fraction
Vec3 = tuple  # (Fraction, Fraction, Fraction)

_RAT_RE = re.compile(r"^[+-]?\d+(/[1-9]\d*)?$")


class MalformedRational(ValueError):
    pass


class DegenerateBody(ValueError):
    """Raised when a vertex set does not span three dimensions."""


def parse_rational(text: str) -> Fraction:
    """Parse ``"3/16"``, ``"-1/2"`` or ``"7"``; anything else is rejected."""
    s = text.strip()
    if not _RAT_RE.match(s):
        raise MalformedRational(f"not a rational literal: {text!r}")
    return Fraction(s)


def as_point(p: Iterable) -> tuple[Fraction, Fraction, Fraction]:
    x, y, z = (Fraction(c) for c in p)
    return (x, y, z)


def fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Isometry:
    """Affine map ``p -> L p + t``.

    ``L`` is stored row-major as a tuple of 9 ints, ``t`` as 3 Fractions.
    """

    L: tuple[int, ...]
    t: tuple[Fraction, Fraction, Fraction]

    def __post_init__(self):
        if len(self.L) != 9 or len(self.t) != 3:
            raise ValueError("Isometry needs 9 matrix entries and 3 translation entries")
        object.__setattr__(self, "L", tuple(int(v) for v in self.L))
        object.__setattr__(self, "t", as_point(self.t))
        L = self.L
        for i in range(3):
            for j in range(3):
                dot = L[3 * i] * L[3 * j] + L[3 * i + 1] * L[3 * j + 1] + L[3 * i + 2] * L[3 * j + 2]
                if dot != (i == j):
                    raise ValueError(f"linear part is not orthogonal: {self.L}")

    # construction helpers
    @classmethod
    def identity(cls) -> "Isometry":
        return cls((1, 0, 0, 0, 1, 0, 0, 0, 1), (0, 0, 0))

    @classmethod
    def translation(cls, v: Sequence) -> "Isometry":
        return cls((1, 0, 0, 0, 1, 0, 0, 0, 1), as_point(v))

    @classmethod
    def from_matrix(cls, L, t) -> "Isometry":
        return cls(tuple(int(v) for v in np.asarray(L).reshape(9)), as_point(t))

    @classmethod
    def from_homogeneous(cls, H) -> "Isometry":
        """Inverse of :meth:`to_homogeneous` (first row must be ``1 0 0 0``)."""
        rows = [[Fraction(v) for v in row] for row in H]
        if rows[0] != [1, 0, 0, 0]:
            raise ValueError("first row of a homogeneous isometry must be (1,0,0,0)")
        t = [rows[i][0] for i in (1, 2, 3)]
        L = [rows[i][j] for i in (1, 2, 3) for j in (1, 2, 3)]
        if any(v.denominator != 1 for v in L):
            raise ValueError("linear part must be integral")
        return cls(tuple(int(v) for v in L), t)

    def to_homogeneous(self) -> list[list[Fraction]]:
        """4x4 matrix acting on the column ``(1, x, y, z)``."""
        H = [[Fraction(1), Fraction(0), Fraction(0), Fraction(0)]]
        for i in range(3):
            H.append([self.t[i]] + [Fraction(self.L[3 * i + j]) for j in range(3)])
        return H

    def matrix(self) -> np.ndarray:
        return np.array(self.L, dtype=np.int64).reshape(3, 3)

    @property
    def det(self) -> int:
        return int(round(np.linalg.det(self.matrix())))

    def apply(self, p: Sequence) -> tuple[Fraction, Fraction, Fraction]:
        v = self.linear(p)
        return (v[0] + self.t[0], v[1] + self.t[1], v[2] + self.t[2])

    def linear(self, v: Sequence) -> tuple[Fraction, Fraction, Fraction]:
        v = as_point(v)
        L = self.L
        out = []
        for i in range(3):
            acc = Fraction(0)
            for j in range(3):
                c = L[3 * i + j]
                if c == 1:
                    acc += v[j]
                elif c == -1:
                    acc -= v[j]
                elif c:
                    acc += c * v[j]
            out.append(acc)
        return tuple(out)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return compose(self, other)

    def inverse(self) -> "Isometry":
        return inverse(self)

    def is_identity(self) -> bool:
        return self == Isometry.identity()

    def scaled_key(self, scale: int = 8) -> tuple[int, ...]:
        """``L`` entries followed by ``scale * t`` as ints (raises if not integral)."""
        ts = []
        for c in self.t:
            v = c * scale
            if v.denominator != 1:
                raise ValueError(f"translation {self.t} not on the 1/{scale} grid")
            ts.append(int(v))
        return self.L + tuple(ts)

    @classmethod
    def from_scaled_key(cls, key: Sequence[int], scale: int = 8) -> "Isometry":
        return cls(tuple(key[:9]), tuple(Fraction(int(v), scale) for v in key[9:12]))

    def __str__(self) -> str:
        names = "xyz"
        out = []
        for i in range(3):
            terms = ""
            for j in range(3):
                c = self.L[3 * i + j]
                if c:
                    terms += ("+" if c > 0 and terms else "-" if c < 0 else "") + names[j]
            if self.t[i]:
                sign = "+" if self.t[i] > 0 else "-"
                terms += f"{sign}{fmt_rational(abs(self.t[i]))}"
            out.append(terms)
        return "(" + ", ".join(out) + ")"


def compose(a: Isometry, b: Isometry) -> Isometry:
    """``a o b``: apply ``b`` first, then ``a``."""
    A, B = a.L, b.L
    L = tuple(A[3 * i] * B[j] + A[3 * i + 1] * B[3 + j] + A[3 * i + 2] * B[6 + j]
              for i in range(3) for j in range(3))
    return Isometry(L, a.apply(b.t))


def inverse(a: Isometry) -> Isometry:
    L, t = a.L, a.t
    LT = (L[0], L[3], L[6], L[1], L[4], L[7], L[2], L[5], L[8])
    return Isometry(LT, tuple(-(LT[3 * i] * t[0] + LT[3 * i + 1] * t[1] + LT[3 * i + 2] * t[2]) for i in range(3)))


def rotation_about(point: Sequence, direction: Sequence[int], order: int) -> Isometry:
    """Rotation of the given order (2 or 3) about a line.

    Only lines along coordinate axes or face/body diagonals are supported,
    which keeps the linear part a signed permutation.  For order 3 the
    direction must be a body diagonal and the rotation is by +120 degrees
    (right-hand rule).
    """
    d = np.array(direction, dtype=np.int64)
    dd = int(d @ d)
    if order == 2:
        num = 2 * np.outer(d, d)
        if (num % dd).any():
            raise ValueError(f"half-turn about {tuple(d)} is not integral")
        L = num // dd - np.eye(3, dtype=np.int64)
    elif order == 3:
        if dd != 3:
            raise ValueError("triads must be along body diagonals")
        cx = np.array([[0, -d[2], d[1]], [d[2], 0, -d[0]], [-d[1], d[0], 0]])
        L = (-np.eye(3, dtype=np.int64) + cx + np.outer(d, d)) // 2
    else:
        raise ValueError(f"unsupported order {order}")
    p = as_point(point)
    t = tuple(p[i] - sum(int(L[i, j]) * p[j] for j in range(3)) for i in range(3))
    return Isometry(tuple(L.reshape(9)), t)


@dataclass(frozen=True)
class ConvexPolytope3:
    """Convex hull of a finite rational point set."""

    vertices: tuple

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("polytope needs at least one vertex")
        object.__setattr__(self, "vertices", tuple(as_point(v) for v in self.vertices))

    def transform(self, g: Isometry) -> "ConvexPolytope3":
        return ConvexPolytope3(tuple(g.apply(v) for v in self.vertices))

    def as_float(self) -> np.ndarray:
        return np.array([[float(c) for c in v] for v in self.vertices])

    def volume(self) -> Fraction:
        return volume(self)


def _affine_rank(pts: Sequence) -> int:
    base = pts[0]
    rows = [[c - b for c, b in zip(p, base)] for p in pts[1:]]
    # exact Gaussian elimination over Q
    rank, col = 0, 0
    rows = [r[:] for r in rows]
    while rank < len(rows) and col < 3:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def volume(body: ConvexPolytope3) -> Fraction:
    """Exact hull volume.

    The facet structure comes from Qhull on floats; each boundary triangle is
    then coned to an interior point with exact rational determinants, and the
    facet orientation is checked exactly against every vertex.
    """
    pts = list(dict.fromkeys(body.vertices))
    if len(pts) < 4 or _affine_rank(pts) < 3:
        raise DegenerateBody("vertices are coplanar")
    hull = ConvexHull(np.array([[float(c) for c in p] for p in pts]))
    centre = tuple(sum(p[i] for p in pts) / len(pts) for i in range(3))
    total = Fraction(0)
    for simplex in hull.simplices:
        a, b, c = (pts[i] for i in simplex)
        u = [a[i] - centre[i] for i in range(3)]
        v = [b[i] - centre[i] for i in range(3)]
        w = [c[i] - centre[i] for i in range(3)]
        det = (u[0] * (v[1] * w[2] - v[2] * w[1])
               - u[1] * (v[0] * w[2] - v[2] * w[0])
               + u[2] * (v[0] * w[1] - v[1] * w[0]))
        total += abs(det)
    return total / 6


@dataclass(frozen=True)
class NumericHalfspace:
    """``{p : normal . p <= offset}`` evaluated with an uncertainty band of width ``eps``."""

    normal: tuple[float, float, float]
    offset: float
    eps: float = 1e-9

    def value(self, p) -> float:
        n = self.normal
        return n[0] * p[0] + n[1] * p[1] + n[2] * p[2] - self.offset

    def contains(self, p) -> bool:
        return self.value(p) <= self.eps

    def strictly_contains(self, p) -> bool:
        return self.value(p) <= -self.eps

    def uncertain(self, p) -> bool:
        return abs(self.value(p)) < self.eps


@dataclass(frozen=True)
class AngularInterval:
    """Directions covering a body as seen from an axis.

    Angles are measured counter-clockwise (right-hand rule about ``axis_dir``)
    from the in-plane unit vector ``e1``; ``e2 = d x e1``.
    """

    theta_min: float
    theta_max: float
    e1: tuple[float, float, float] = field(repr=False)
    e2: tuple[float, float, float] = field(repr=False)

    @property
    def width(self) -> float:
        return self.theta_max - self.theta_min

    def direction(self, theta: float) -> np.ndarray:
        return math.cos(theta) * np.array(self.e1) + math.sin(theta) * np.array(self.e2)


@dataclass(frozen=True)
class Degenerate:
    reason: str


def _plane_basis(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e1 = np.array([1.0, 0.0, 0.0]) if abs(d[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = e1 - (e1 @ d) * d
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1)


def support_wedge(body: ConvexPolytope3, axis_point, axis_dir, eps: float = 1e-9,
                  on_axis: str = "degenerate") -> AngularInterval | Degenerate:
    """Minimal arc of directions (around the axis) spanned by the body's vertices.

    ``on_axis="degenerate"`` reports any vertex on the axis as
    :class:`Degenerate`; ``on_axis="ignore"`` drops such vertices and measures
    the arc of the remaining ones.
    """
    d = np.array([float(c) for c in axis_dir])
    if not d.any():
        raise ValueError("axis direction must be nonzero")
    d /= np.linalg.norm(d)
    P = body.as_float() - np.array([float(c) for c in axis_point])
    Q = P - np.outer(P @ d, d)
    on = np.linalg.norm(Q, axis=1) <= eps
    if on.any():
        if on_axis == "degenerate":
            return Degenerate("a vertex lies on the axis")
        Q = Q[~on]
        if len(Q) == 0:
            return Degenerate("body lies on the axis")
    e1, e2 = _plane_basis(d)
    ang = np.sort(np.arctan2(Q @ e2, Q @ e1))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    i = int(np.argmax(gaps))
    t_max = ang[i]
    t_min = ang[(i + 1) % len(ang)]
    if t_min > t_max:
        t_min -= 2 * np.pi
    if t_max - t_min >= np.pi - eps:
        return Degenerate("angular width is not below pi")
    return AngularInterval(float(t_min), float(t_max), tuple(e1), tuple(e2))


def truncated_octahedron() -> ConvexPolytope3:
    """Voronoi cell of the origin in the body-centred lattice of cube side 1/2."""
    verts = set()
    q, e = Fraction(1, 4), Fraction(1, 8)
    for perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        for sa in (1, -1):
            for sb in (1, -1):
                base = (sa * q, sb * e, Fraction(0))
                verts.add(tuple(base[perm.index(i)] for i in range(3)))
    return ConvexPolytope3(tuple(sorted(verts)))


def truncated_octahedron_faces() -> list[tuple[tuple[int, ...], Fraction]]:
    """The 14 supporting inequalities ``n . x <= c`` (6 square, 8 hexagonal)."""
    out = []
    for i in range(3):
        for s in (1, -1):
            n = [0, 0, 0]
            n[i] = s
            out.append((tuple(n), Fraction(1, 4)))
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                out.append(((sx, sy, sz), Fraction(3, 8)))
    return out
