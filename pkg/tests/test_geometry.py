import math
from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tilekit.geometry import (
    ConvexPolygon,
    GeometryError,
    Isometry,
    Location,
    area2,
    congruence_map,
    disjoint_interiors,
    point_in_convex,
)
from tilekit.numberfield import field_init

from strategies import extscalars, fields, motions

F4 = field_init(4)
I4 = F4.ext(F4.xi_pow(2))  # the imaginary unit for n = 4


def pt(x, y, ctx=F4):
    return ctx.ext(Fraction(x)) + ctx.ext(Fraction(y)) * I4


def square(x=0, y=0):
    return ConvexPolygon([pt(x, y), pt(x + 1, y), pt(x + 1, y + 1), pt(x, y + 1)])


def test_area_examples():
    assert area2(square()).to_float() == pytest.approx(2.0)
    t2 = ConvexPolygon([pt(0, 0), pt(2, 0), F4.ext(2) + I4])
    assert area2(t2).to_float() == pytest.approx(2.0)
    f3 = field_init(3)
    # unit equilateral triangle 0, 1, xi_6
    tri = ConvexPolygon([f3.ext(0), f3.ext(1), f3.ext(f3.xi)])
    assert area2(tri).to_float() == pytest.approx(math.sqrt(3) / 2, abs=1e-12)
    lo, hi = area2(tri).embed(128).a, area2(tri).embed(128).b
    assert float(lo) <= math.sqrt(3) / 2 <= float(hi) + 1e-15


def test_polygon_validation():
    with pytest.raises(GeometryError):
        ConvexPolygon([pt(0, 0), pt(1, 0)])
    with pytest.raises(GeometryError):
        ConvexPolygon([pt(0, 0), pt(0, 1), pt(1, 0)])  # clockwise
    with pytest.raises(GeometryError):
        ConvexPolygon([pt(0, 0), pt(1, 0), pt(2, 0), pt(1, 1)])  # collinear triple


def test_motion_examples():
    g = Isometry(F4.ext(F4.xi_pow(2)), 0, F4.ext(0))
    assert g(F4.ext(2) + I4) == pt(-1, 2)
    ident = Isometry.identity(F4)
    h = Isometry(F4.mu, 1, pt(3, -2))
    assert h.compose(h.inverse()) == ident
    assert h.inverse().compose(h) == ident
    assert h.compose(h).r == 0


def test_point_in_convex():
    sq = square()
    assert point_in_convex(pt(Fraction(1, 2), Fraction(1, 3)), sq) is Location.INSIDE
    assert point_in_convex(pt(1, 1), sq) is Location.BOUNDARY
    assert point_in_convex(pt(1, Fraction(1, 2)), sq) is Location.BOUNDARY
    assert point_in_convex(pt(10, 0), sq) is Location.OUTSIDE


def test_disjoint_examples():
    assert disjoint_interiors(square(), square(1, 0))
    assert disjoint_interiors(square(), square(1, 1))
    assert not disjoint_interiors(square(), square(Fraction(1, 2), Fraction(1, 2)))
    assert not disjoint_interiors(square(), square())


def test_congruence_examples():
    sq = square()
    assert congruence_map(sq, sq) == Isometry.identity(F4)
    tri = ConvexPolygon([pt(0, 0), pt(2, 0), pt(2, 1)])
    mirror = Isometry(F4.ext(1), 1, F4.ext(0)).apply_polygon(tri)
    found = [congruence_map(tri, mirror, 0, k, reflection=True) for k in range(3)]
    g = next(x for x in found if x is not None)
    assert g.r == 1
    assert g.apply_polygon(tri).same_cycle(mirror)
    assert all(congruence_map(tri, mirror, 0, k, reflection=False) is None for k in range(3))
    other = ConvexPolygon([pt(0, 0), pt(3, 0), pt(3, 1)])
    assert congruence_map(tri, other) is None
    assert congruence_map(tri, other, 1, 1) is None


@given(fields.flatmap(lambda c: st.tuples(motions(c), motions(c), extscalars(c))))
def test_composition_law(data):
    g, h, x = data
    assert g.compose(h)(x) == g(h(x))
    assert g.inverse()(g(x)) == x


@given(fields.flatmap(motions))
def test_area_invariance(g):
    ctx = g.ctx
    tri = ConvexPolygon([ctx.ext(0), ctx.ext(1), ctx.ext(ctx.xi)])
    moved = g.apply_polygon(tri)
    assert area2(moved) == area2(tri)
    # raw vertex images (no re-orientation) of a reflection negate the area
    raw = [g(v) for v in tri.vertices]
    raw_area = ConvexPolygon.__new__(ConvexPolygon)
    raw_area.vertices = tuple(raw)
    assert area2(raw_area) == (-area2(tri) if g.r else area2(tri))


@given(fields.flatmap(motions))
def test_congruence_map_reproduces(g):
    ctx = g.ctx
    poly = ConvexPolygon([ctx.ext(0), ctx.ext(2), ctx.ext(2) + ctx.ext(ctx.xi), ctx.ext(ctx.xi)])
    image = g.apply_polygon(poly)
    for k in range(len(image)):
        h = congruence_map(poly, image, 0, k)
        if h is not None:
            assert h.apply_polygon(poly).same_cycle(image)
            break
    else:
        pytest.fail("no congruence found")


# -- randomized oracle for disjointness -----------------------------------------------


def _clip(subject, clipper):
    """Sutherland-Hodgman with exact rationals; both lists ccw."""
    out = subject
    n = len(clipper)
    for i in range(n):
        a, b = clipper[i], clipper[(i + 1) % n]

        def side(p):
            return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])

        inp, out = out, []
        for j in range(len(inp)):
            p, q = inp[j], inp[(j + 1) % len(inp)]
            sp, sq = side(p), side(q)
            if sp >= 0:
                out.append(p)
            if (sp > 0 > sq) or (sp < 0 < sq):
                t = sp / (sp - sq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        if not out:
            return []
    return out


def _area(poly):
    return sum(poly[i][0] * poly[(i + 1) % len(poly)][1] - poly[(i + 1) % len(poly)][0] * poly[i][1] for i in range(len(poly)))


coords = st.integers(-4, 4)
triangles = st.lists(st.tuples(coords, coords), min_size=3, max_size=3, unique=True)


@given(triangles, triangles)
def test_disjointness_against_clipping_oracle(p, q):
    def ccw(t):
        t = [(Fraction(x), Fraction(y)) for x, y in t]
        a = _area(t)
        assume(a != 0)
        return t if a > 0 else t[::-1]

    p, q = ccw(p), ccw(q)
    P = ConvexPolygon([pt(x, y) for x, y in p])
    Q = ConvexPolygon([pt(x, y) for x, y in q])
    inter = _clip(p, q)
    overlap = len(inter) >= 3 and _area(inter) > 0
    assert disjoint_interiors(P, Q) == (not overlap)
    assert disjoint_interiors(P, Q) == disjoint_interiors(Q, P)
