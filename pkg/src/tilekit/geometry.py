"""Points, rigid motions and convex polygons with exact predicates.

A point of the plane is an :class:`~tilekit.numberfield.ExtScalar`, read as
a complex number.  Every predicate reduces to the sign of a real field
element and is decided by :func:`~tilekit.numberfield.real_sign`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .numberfield import ExtScalar, FieldContext, real_sign

Point = ExtScalar

__all__ = [
    "Point",
    "Isometry",
    "ConvexPolygon",
    "Location",
    "AreaScalar",
    "GeometryError",
    "cross_sign",
    "orientation",
    "area2",
    "point_in_convex",
    "disjoint_interiors",
    "congruence_map",
    "direction_equal",
]


class GeometryError(ValueError):
    pass


@lru_cache(maxsize=None)
def _imag_factor(ctx: FieldContext) -> ExtScalar:
    # xi - xi^-1 = 2i sin(2 pi / N), a fixed purely imaginary field element
    xi = ctx.ext(ctx.xi)
    return xi - xi.conj()


@lru_cache(maxsize=None)
def _imag_factor_inv(ctx: FieldContext) -> ExtScalar:
    return _imag_factor(ctx).inverse()


def im_scaled(w: ExtScalar) -> ExtScalar:
    """Real element proportional to Im(w) with a positive factor.

    Returns ``(w - conj w) / (xi - conj xi)`` = Im(w) / sin(2 pi / N).  The
    imaginary unit need not lie in the field (n odd), so this is the exact
    stand-in for Im.
    """
    return (w - w.conj()) * _imag_factor_inv(w.ctx)


def _float_cross(a: Point, b: Point) -> int:
    za, ea = a.approx()
    zb, eb = b.approx()
    val = za.real * zb.imag - za.imag * zb.real
    err = (abs(za) + ea) * eb + ea * (abs(zb) + eb) + 4e-16 * abs(za) * abs(zb)
    if val > err:
        return 1
    if val < -err:
        return -1
    return 0  # undecided


def cross_sign(a: Point, b: Point) -> int:
    """Sign of the planar cross product a x b = Im(conj(a) * b)."""
    s = _float_cross(a, b)
    if s:
        return s
    w = a.conj() * b
    # (w - conj w)(xi - conj xi) = -4 sin(2 pi / N) Im(w)
    return -real_sign((w - w.conj()) * _imag_factor(w.ctx))


def dot_sign(a: Point, b: Point) -> int:
    """Sign of the planar dot product Re(conj(a) * b)."""
    return real_sign((a.conj() * b).real_part2())


def orientation(p: Point, q: Point, r: Point) -> int:
    """+1 if p, q, r turn counterclockwise, -1 clockwise, 0 collinear."""
    return cross_sign(q - p, r - p)


def direction_equal(a: Point, b: Point) -> bool:
    """True if nonzero vectors a and b point the same way."""
    return cross_sign(a, b) == 0 and dot_sign(a, b) > 0


@dataclass(frozen=True)
class Isometry:
    """Rigid motion x -> a*x + t (r = 0) or x -> a*conj(x) + t (r = 1)."""

    a: ExtScalar
    r: int
    t: ExtScalar

    def __post_init__(self):
        if self.r not in (0, 1):
            raise GeometryError("reflection flag must be 0 or 1")

    @classmethod
    def identity(cls, ctx: FieldContext) -> Isometry:
        return cls(ctx.ext(1), 0, ctx.ext(0))

    @classmethod
    def checked(cls, a: ExtScalar, r: int, t: ExtScalar) -> Isometry:
        if a.norm2() != 1:
            raise GeometryError("rotation scalar must have modulus 1")
        return cls(a, r, t)

    @property
    def ctx(self) -> FieldContext:
        return self.a.ctx

    def is_unit(self) -> bool:
        return self.a.norm2() == 1

    def __call__(self, x: Point) -> Point:
        return self.a * (x.conj() if self.r else x) + self.t

    def compose(self, other: Isometry) -> Isometry:
        """self o other."""
        if self.r:
            return Isometry(self.a * other.a.conj(), 1 - other.r, self.a * other.t.conj() + self.t)
        return Isometry(self.a * other.a, other.r, self.a * other.t + self.t)

    __matmul__ = compose

    def inverse(self) -> Isometry:
        ainv = self.a.conj()  # |a| = 1
        if self.r:
            # x = a conj(y) + t  =>  y = conj(a^-1 (x - t)) = a conj(x) - a conj(t)
            return Isometry(self.a, 1, -(self.a * self.t.conj()))
        return Isometry(ainv, 0, -(ainv * self.t))

    def apply_polygon(self, poly: ConvexPolygon) -> ConvexPolygon:
        pts = [self(v) for v in poly.vertices]
        if self.r:
            pts = [pts[0]] + pts[:0:-1]
        return ConvexPolygon(tuple(pts), _trusted=True)

    def key(self) -> tuple:
        return (self.r,) + self.a.key() + self.t.key()

    def __repr__(self) -> str:
        from .numberfield import format_scalar

        return f"Isometry(a={format_scalar(self.a)}, r={self.r}, t={format_scalar(self.t)})"


class AreaScalar:
    """Exact (doubled) area.

    Twice the area of a polygon equals ``coeff * sin(2 pi / N)`` with
    ``coeff`` a real field element.  For odd n the factor is not in the
    field, so it is carried symbolically; ratios of areas are ordinary field
    elements.
    """

    __slots__ = ("coeff",)

    def __init__(self, coeff: ExtScalar):
        self.coeff = coeff

    def __add__(self, other: AreaScalar) -> AreaScalar:
        if isinstance(other, int) and other == 0:
            return self
        return AreaScalar(self.coeff + other.coeff)

    __radd__ = __add__

    def __sub__(self, other: AreaScalar) -> AreaScalar:
        return AreaScalar(self.coeff - other.coeff)

    def __neg__(self) -> AreaScalar:
        return AreaScalar(-self.coeff)

    def __mul__(self, k) -> AreaScalar:
        if isinstance(k, AreaScalar):
            return NotImplemented
        return AreaScalar(self.coeff * k)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, AreaScalar):
            return self.coeff / other.coeff
        return AreaScalar(self.coeff / other)

    def __eq__(self, other) -> bool:
        if isinstance(other, AreaScalar):
            return self.coeff == other.coeff
        if isinstance(other, int) and other == 0:
            return self.coeff.is_zero()
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeff)

    def sign(self) -> int:
        return real_sign(self.coeff)

    def to_float(self) -> float:
        import math

        return self.coeff.to_complex().real * math.sin(2 * math.pi / self.coeff.ctx.N)

    def embed(self, precision: int = 128):
        from mpmath import iv

        from .numberfield import _ivprec, embed

        box = embed(self.coeff, precision)
        with _ivprec(precision + 20):
            return box.re * iv.sin(2 * iv.pi / self.coeff.ctx.N)

    def __repr__(self) -> str:
        return f"AreaScalar({self.to_float():.12g})"


class ConvexPolygon:
    """Strictly convex polygon, vertices counterclockwise."""

    __slots__ = ("vertices",)

    def __init__(self, vertices: Sequence[Point], _trusted: bool = False):
        self.vertices = tuple(vertices)
        if not _trusted:
            self._validate()

    def _validate(self) -> None:
        vs = self.vertices
        k = len(vs)
        if k < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        if len(set(vs)) != k:
            raise GeometryError("repeated vertex")
        for i in range(k):
            if orientation(vs[i], vs[(i + 1) % k], vs[(i + 2) % k]) <= 0:
                raise GeometryError(f"not strictly convex/counterclockwise at vertex {(i + 1) % k}")
        # a strictly convex turn sequence can still wind twice
        if area2(self).sign() <= 0:
            raise GeometryError("polygon is not counterclockwise")

    @property
    def ctx(self) -> FieldContext:
        return self.vertices[0].ctx

    def __len__(self) -> int:
        return len(self.vertices)

    def edges(self):
        vs = self.vertices
        for i in range(len(vs)):
            yield vs[i], vs[(i + 1) % len(vs)]

    def centroid_vertices(self) -> Point:
        """Mean of the vertices (an interior point)."""
        s = self.vertices[0]
        for v in self.vertices[1:]:
            s = s + v
        return s / len(self.vertices)

    def same_cycle(self, other: ConvexPolygon) -> bool:
        """Equal as cyclic vertex sequences."""
        a, b = self.vertices, other.vertices
        if len(a) != len(b):
            return False
        try:
            k = b.index(a[0])
        except ValueError:
            return False
        return all(a[i] == b[(i + k) % len(b)] for i in range(len(a)))

    def canonical(self) -> tuple:
        """Rotation of the vertex cycle starting at the smallest key."""
        keys = [v.key() for v in self.vertices]
        k = keys.index(min(keys))
        return self.vertices[k:] + self.vertices[:k]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConvexPolygon):
            return NotImplemented
        return self.same_cycle(other)

    def __hash__(self) -> int:
        return hash(frozenset(self.vertices))

    def __repr__(self) -> str:
        pts = ", ".join(f"{v.to_complex():.4f}" for v in self.vertices)
        return f"ConvexPolygon([{pts}])"


def area2(poly: ConvexPolygon) -> AreaScalar:
    """Twice the signed area (shoelace), exact."""
    vs = poly.vertices
    acc = vs[0].ctx.ext(0)
    for i in range(len(vs)):
        acc = acc + vs[i].conj() * vs[(i + 1) % len(vs)]
    return AreaScalar(im_scaled(acc))


class Location(enum.Enum):
    INSIDE = "inside"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


def point_in_convex(p: Point, poly: ConvexPolygon) -> Location:
    on_edge = False
    for a, b in poly.edges():
        s = orientation(a, b, p)
        if s < 0:
            return Location.OUTSIDE
        if s == 0:
            on_edge = True
    return Location.BOUNDARY if on_edge else Location.INSIDE


def _separates(poly: ConvexPolygon, other: ConvexPolygon) -> bool:
    # some edge line of poly has all of other in its closed outer halfplane
    for a, b in poly.edges():
        if all(orientation(a, b, q) <= 0 for q in other.vertices):
            return True
    return False


def disjoint_interiors(p: ConvexPolygon, q: ConvexPolygon) -> bool:
    return _separates(p, q) or _separates(q, p)


def congruence_map(
    a: ConvexPolygon,
    b: ConvexPolygon,
    anchor_a: int = 0,
    anchor_b: int = 0,
    allow_reflection: bool = True,
    reflection: bool | None = None,
) -> Isometry | None:
    """A motion g with g(a) = b (as vertex cycles) sending the anchor edge of
    ``a`` onto the anchor edge of ``b``, or None.

    ``reflection`` forces the handedness of g (None: either, direct first)."""
    if len(a) != len(b):
        return None
    k, m = len(a), len(b)
    a0, a1 = a.vertices[anchor_a % k], a.vertices[(anchor_a + 1) % k]
    b0, b1 = b.vertices[anchor_b % m], b.vertices[(anchor_b + 1) % m]
    ea = a1 - a0
    # orientation preserving: a0 -> b0, a1 -> b1
    rot = (b1 - b0) / ea
    if reflection is not True and rot.norm2() == 1:
        g = Isometry(rot, 0, b0 - rot * a0)
        if g.apply_polygon(a).same_cycle(b):
            return g
    if allow_reflection and reflection is not False:
        # reversing: a0 -> b1, a1 -> b0
        rot = (b0 - b1) / ea.conj()
        if rot.norm2() == 1:
            g = Isometry(rot, 1, b1 - rot * a0.conj())
            if g.apply_polygon(a).same_cycle(b):
                return g
    return None
