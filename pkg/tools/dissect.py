"""Backtracking search for dissections of an inflated prototile.

Development tool used to construct the substitution rules shipped as
rule files: given the target polygon zeta*T_i, the prototile shapes, the
allowed rotation scalars and the required child counts (a matrix column),
find placements that tile the target.  The search runs in floating point;
every placement carries its exact motion, and the caller re-validates the
result exactly with tilekit.ruleset.validate_rule.

The search always fills the most acute uncovered corner first: a tile must
have a corner there with one edge along the corner's first ray.
"""

from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass, field

from tilekit.geometry import Isometry
from tilekit.numberfield import ExtScalar

EPS = 1e-7
TAU = 2 * math.pi


def cplx(z: ExtScalar) -> complex:
    return z.to_complex()


@dataclass
class Shape:
    name: str
    verts: list  # exact ExtScalar, ccw
    fverts: list = field(default_factory=list)

    def __post_init__(self):
        self.fverts = [cplx(v) for v in self.verts]


@dataclass
class Placed:
    shape: str
    motion: Isometry
    fverts: list  # ccw floats
    everts: list  # ccw exact


def _place(shape: Shape, a: ExtScalar, fa: complex, r: int, t: ExtScalar, ft: complex):
    if r:
        fv = [fa * v.conjugate() + ft for v in shape.fverts]
        ev = [a * v.conj() + t for v in shape.verts]
        fv = [fv[0]] + fv[:0:-1]
        ev = [ev[0]] + ev[:0:-1]
    else:
        fv = [fa * v + ft for v in shape.fverts]
        ev = [a * v + t for v in shape.verts]
    return fv, ev


def cross(a: complex, b: complex) -> float:
    return (a.conjugate() * b).imag


def ang(z: complex) -> float:
    return math.atan2(z.imag, z.real) % TAU


def inside_or_on(p: complex, poly: list) -> bool:
    k = len(poly)
    for i in range(k):
        if cross(poly[(i + 1) % k] - poly[i], p - poly[i]) < -EPS:
            return False
    return True


def disjoint(p: list, q: list) -> bool:
    for P, Q in ((p, q), (q, p)):
        k = len(P)
        for i in range(k):
            a, b = P[i], P[(i + 1) % k]
            e = b - a
            le = abs(e)
            if all(cross(e, v - a) / le <= EPS for v in Q):
                return True
    return False


def wedge_at(p: complex, poly: list):
    """Angular wedge (start, extent) of poly's interior at p, 'full', or None."""
    k = len(poly)
    on_edge = None
    for i in range(k):
        a, b = poly[i], poly[(i + 1) % k]
        c = cross(b - a, p - a) / abs(b - a)
        if c < -EPS:
            return None
        if abs(c) <= EPS:
            # on the edge line; within segment?
            s = ((p - a).conjugate() * (b - a)).real / abs(b - a) ** 2
            if -EPS < s < 1 + EPS:
                on_edge = (i, s)
    if on_edge is None:
        return "full"
    i, s = on_edge
    a, b = poly[i], poly[(i + 1) % k]
    L = abs(b - a)
    if abs(s * L) <= EPS:  # vertex i
        nxt, prv = poly[(i + 1) % k], poly[(i - 1) % k]
        st = ang(nxt - p)
        en = ang(prv - p)
        return st, (en - st) % TAU
    if abs((1 - s) * L) <= EPS:  # vertex i+1
        j = (i + 1) % k
        nxt, prv = poly[(j + 1) % k], poly[(j - 1) % k]
        st = ang(nxt - p)
        en = ang(prv - p)
        return st, (en - st) % TAU
    return ang(b - a), math.pi


def gaps(wedges):
    """Uncovered angular gaps (start, extent) given covering wedges."""
    iv = []
    for st, ext in wedges:
        en = st + ext
        if en <= TAU + 1e-12:
            iv.append((st, en))
        else:
            iv.append((st, TAU))
            iv.append((0.0, en - TAU))
    iv.sort()
    merged = []
    for s, e in iv:
        if merged and s <= merged[-1][1] + 1e-9:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])
    if not merged:
        return [(0.0, TAU)]
    out = []
    for idx in range(len(merged)):
        e = merged[idx][1]
        s_next = merged[(idx + 1) % len(merged)][0] + (TAU if idx + 1 == len(merged) else 0)
        g = s_next - e
        if g > 1e-9:
            out.append((e % TAU, g))
    return out


class Search:
    def __init__(self, target: list, shapes: dict, counts: dict, rotations: list,
                 allow_reflection=True, symmetry=None, max_nodes=5_000_000, verbose=False,
                 group=None, seed=None):
        """rotations: list of (exact unit ExtScalar).  symmetry: (center exact, unit exact, order)."""
        self.target_e = target
        self.target = [cplx(v) for v in target]
        self.shapes = shapes
        self.counts = dict(counts)
        self.rot = [(a, cplx(a)) for a in rotations]
        self.refl = (0, 1) if allow_reflection else (0,)
        self.placed: list[Placed] = []
        self.max_nodes = max_nodes
        self.nodes = 0
        self.verbose = verbose
        self.symmetry = symmetry
        self.group = group  # list of exact Isometry, identity first
        self.rng = None
        if seed is not None:
            import random
            self.rng = random.Random(seed)
        if symmetry:
            c, u, order = symmetry
            self.sym = [(u ** j, cplx(u ** j), c) for j in range(order)]
        # minimal corner angle among shapes
        self.min_corner = min(self._corner_angles(s) for s in shapes.values())

    @staticmethod
    def _corner_angles(s: Shape):
        k = len(s.fverts)
        out = []
        for i in range(k):
            v = s.fverts[i]
            out.append((ang(s.fverts[(i - 1) % k] - v) - ang(s.fverts[(i + 1) % k] - v)) % TAU)
        return min(out)

    def points(self):
        pts = {}
        for v in self.target:
            pts[(round(v.real, 6), round(v.imag, 6))] = v
        for pl in self.placed:
            for v in pl.fverts:
                pts[(round(v.real, 6), round(v.imag, 6))] = v
        return list(pts.values())

    def exact_point(self, p: complex):
        for v, e in zip(self.target, self.target_e):
            if abs(v - p) < 1e-6:
                return e
        for pl in self.placed:
            for v, e in zip(pl.fverts, pl.everts):
                if abs(v - p) < 1e-6:
                    return e
        raise KeyError(p)

    def best_gap(self):
        best = None
        for p in self.points():
            tw = wedge_at(p, self.target)
            if tw is None or tw == "full" and False:
                continue
            wedges = []
            if tw != "full":
                st, ext = tw
                # outside of target is covered
                wedges.append(((st + ext) % TAU, TAU - ext))
            covered = False
            for pl in self.placed:
                w = wedge_at(p, pl.fverts)
                if w is None:
                    continue
                if w == "full":
                    covered = True
                    break
                wedges.append(w)
            if covered:
                continue
            if tw == "full" and not wedges:
                continue
            for g in gaps(wedges):
                if g[1] >= TAU - 1e-9:
                    continue
                key = (g[1], round(p.imag, 6), round(p.real, 6))
                if best is None or key < best[0]:
                    best = (key, p, g)
        return best

    def candidates(self, p: complex, gap):
        st, ext = gap
        pe = None
        out = []
        for name, cnt in self.counts.items():
            if cnt <= 0:
                continue
            s = self.shapes[name]
            k = len(s.fverts)
            for r in self.refl:
                for a, fa in self.rot:
                    # placed vertex list (ccw) for this rotation/reflection at t=0
                    fv, _ = _place_float(s, fa, r)
                    for i in range(k):
                        d_out = fv[(i + 1) % k] - fv[i]
                        if abs(((ang(d_out) - st) + math.pi) % TAU - math.pi) > 1e-7:
                            continue
                        cang = (ang(fv[(i - 1) % k] - fv[i]) - ang(d_out)) % TAU
                        if cang > ext + 1e-7:
                            continue
                        shift = p - fv[i]
                        cand = [v + shift for v in fv]
                        out.append((name, r, a, fa, i, shift, cand, cang))
        # prefer corners that fill the gap exactly, then larger tiles
        out.sort(key=lambda c: (abs(c[7] - ext) > 1e-7, -len(c[6])))
        return out

    def fits(self, cand):
        if not all(inside_or_on(v, self.target) for v in cand):
            return False
        for pl in self.placed:
            if not disjoint(cand, pl.fverts):
                return False
        return True

    def make(self, name, r, a, fa, i, p):
        s = self.shapes[name]
        pe = self.exact_point(p)
        # the i-th vertex of the ccw placed list equals the original index:
        # r=0: i ; r=1: (-i) mod k
        k = len(s.verts)
        orig = i if r == 0 else (-i) % k
        v = s.verts[orig]
        t = pe - a * (v.conj() if r else v)
        fv, ev = _place(s, a, fa, r, t, cplx(t))
        return Placed(name, Isometry(a, r, t), fv, ev)

    def orbit(self, pl: Placed):
        if self.group:
            out = [pl]
            for g in self.group[1:]:
                m = g.compose(pl.motion)
                s = self.shapes[pl.shape]
                fv, ev = _place(s, m.a, cplx(m.a), m.r, m.t, cplx(m.t))
                if any(all(min(abs(x - y) for y in q.fverts) < 1e-6 for x in fv) for q in out):
                    continue
                out.append(Placed(pl.shape, m, fv, ev))
            return out
        if not self.symmetry:
            return [pl]
        out = [pl]
        for u, fu, c in self.sym[1:]:
            g = Isometry(u, 0, c - u * c)
            m = g.compose(pl.motion)
            fv = [fu * (v - cplx(c)) + cplx(c) for v in pl.fverts]
            ev = [g(v) for v in pl.everts]
            if any(all(min(abs(x - y) for y in q.fverts) < 1e-6 for x in fv) for q in out):
                continue
            out.append(Placed(pl.shape, m, fv, ev))
        return out

    collect = None

    def _done(self):
        if self.collect is not None:
            self.collect.append(list(self.placed))
            return False
        return True

    def solve(self):
        if sum(self.counts.values()) == 0:
            return self._done()
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise TimeoutError("node budget exhausted")
        bg = self.best_gap()
        if bg is None:
            return False
        _, p, g = bg
        if g[1] < self.min_corner - 1e-7:
            return False
        for name, r, a, fa, i, shift, cand, cang in self.candidates(p, g):
            if not self.fits(cand):
                continue
            pl = self.make(name, r, a, fa, i, p)
            orb = self.orbit(pl)
            if self.counts[name] < len(orb):
                continue
            ok = True
            for j, q in enumerate(orb[1:], 1):
                if not all(inside_or_on(v, self.target) for v in q.fverts):
                    ok = False
                    break
                for other in self.placed + orb[:j]:
                    if not disjoint(q.fverts, other.fverts):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            self.placed.extend(orb)
            self.counts[name] -= len(orb)
            if self.verbose and len(self.placed) <= 6:
                print("  " * len(self.placed), name, r, len(self.placed), self.nodes, file=sys.stderr)
            if self.solve():
                return True
            self.counts[name] += len(orb)
            del self.placed[-len(orb):]
        return False


_float_cache = {}


def _place_float(s: Shape, fa: complex, r: int):
    key = (tuple(s.fverts), round(fa.real, 12), round(fa.imag, 12), r)
    got = _float_cache.get(key)
    if got is None:
        if r:
            fv = [fa * v.conjugate() for v in s.fverts]
            fv = [fv[0]] + fv[:0:-1]
        else:
            fv = [fa * v for v in s.fverts]
        got = (fv, None)
        _float_cache[key] = got
    return got


def _poly_key(name, fv):
    return (name, tuple(sorted((round(v.real, 6), round(v.imag, 6)) for v in fv)))


class MRVSearch(Search):
    """Variant that branches on the gap with the fewest fitting placements."""

    def all_gaps(self):
        out = []
        for p in self.points():
            tw = wedge_at(p, self.target)
            if tw is None:
                continue
            wedges = []
            if tw != "full":
                st, ext = tw
                wedges.append(((st + ext) % TAU, TAU - ext))
            covered = False
            for pl in self.placed:
                w = wedge_at(p, pl.fverts)
                if w is None:
                    continue
                if w == "full":
                    covered = True
                    break
                wedges.append(w)
            if covered or (tw == "full" and not wedges):
                continue
            for g in gaps(wedges):
                if g[1] < math.pi - 1e-9:
                    out.append((p, g))
        return out

    def fitting(self, p, g):
        seen = set()
        res = []
        for c in self.candidates(p, g):
            name, r, a, fa, i, shift, cand, cang = c
            key = _poly_key(name, cand)
            if key in seen:
                continue
            if not self.fits(cand):
                continue
            seen.add(key)
            res.append(c)
        return res

    def solve(self):
        if sum(self.counts.values()) == 0:
            return self._done()
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise TimeoutError("node budget exhausted")
        best = None
        for p, g in self.all_gaps():
            if g[1] < self.min_corner - 1e-7:
                return False
            fl = self.fitting(p, g)
            if not fl:
                return False
            if best is None or len(fl) < len(best[2]):
                best = (p, g, fl)
                if len(fl) == 1:
                    break
        if best is None:
            return False
        p, g, fl = best
        if self.rng is not None:
            fl = list(fl)
            self.rng.shuffle(fl)
        for name, r, a, fa, i, shift, cand, cang in fl:
            pl = self.make(name, r, a, fa, i, p)
            orb = self.orbit(pl)
            if self.counts[name] < len(orb):
                continue
            ok = True
            for j, q in enumerate(orb[1:], 1):
                if not all(inside_or_on(v, self.target) for v in q.fverts):
                    ok = False
                    break
                for other in self.placed + orb[:j]:
                    if not disjoint(q.fverts, other.fverts):
                        ok = False
                        break
                if not ok:
                    break
            if not ok:
                continue
            self.placed.extend(orb)
            self.counts[name] -= len(orb)
            if self.verbose and self.nodes % 1000 == 0:
                print(len(self.placed), self.nodes, dict(self.counts), file=sys.stderr)
            if self.solve():
                return True
            self.counts[name] += len(orb)
            del self.placed[-len(orb):]
        return False
