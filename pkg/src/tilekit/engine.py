"""Patch expansion.

One substitution step sends a tile ``(i, g)`` with ``g = (a, r, t)`` to the
children ``Z o g o Z^-1 o g_c`` of prototile ``i``, where ``Z(x) = zeta x``.
Since ``Z o g o Z^-1 = (a mu^-r, r, zeta t)`` with ``mu = conj(zeta)/zeta``,
a child ``g_c = (a_c, r_c, t_c)`` lands at::

    r = 0:  (a a_c,            r_c,     a t_c + zeta t)
    r = 1:  (a conj(mu a_c),   1 - r_c, a conj(mu t_c) + zeta t)

Tiles keep unit size; the patch grows by zeta per step.  The rotation
carried by zeta means this is the rotated substitution directly.

Patches are columnar: every rotation and translation is stored as a row of
integer power-basis numerators over one patch-wide denominator, so a step
is a handful of small integer matrix products.  Rows are int64 while an
a-priori magnitude bound allows it, Python ints afterwards.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .geometry import ConvexPolygon, Isometry
from .numberfield import CycNum, ExtScalar, FieldContext, _basis_floats
from .parallel import thread_count
from .ruleset import RuleError, SubstitutionRule

if os.environ.get("TILEKIT_PURE"):
    from ._kernel_py import expand_step as _step_compiled

    KERNEL = "python"
else:
    try:
        from ._kernel import expand_step as _step_compiled

        KERNEL = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        from ._kernel_py import expand_step as _step_compiled

        KERNEL = "python"

from ._kernel_py import expand_step as _step_py

__all__ = [
    "PlacedTile",
    "Patch",
    "Disk",
    "Box",
    "seed_patch",
    "expand",
    "symmetric_patch",
    "clip_expand",
    "tile_vertices",
    "KERNEL",
]

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class PlacedTile:
    proto: str
    motion: Isometry
    address: tuple[int, ...]

    @property
    def chirality(self) -> int:
        return self.motion.r


# -- exact <-> integer rows -------------------------------------------------------


def _cyc(x) -> CycNum:
    if isinstance(x, ExtScalar):
        if not x.v.is_zero():
            raise ValueError("patch motions must lie in the cyclotomic field")
        return x.u
    return x


def _rows(values: Sequence[CycNum], den: int) -> list[list[int]]:
    out = []
    for v in values:
        f = den // v.den
        if f * v.den != den:
            raise ValueError("denominator does not divide the common denominator")
        out.append([c * f for c in v.num])
    return out


def _lcm(vals: Iterable[int]) -> int:
    out = 1
    for v in vals:
        out = out * v // math.gcd(out, v)
    return out


def mul_matrix(m: CycNum, scale: int) -> list[list[int]]:
    """Integer matrix M with row(x) @ M = row(x * m * scale)."""
    ctx = m.ctx
    rows = []
    for j in range(ctx.degree):
        p = ctx.xi_pow(j) * m
        f = scale // p.den
        if f * p.den != scale:
            raise ValueError("scale does not clear the denominator")
        rows.append([c * f for c in p.num])
    return rows


class _RuleTables:
    """Precomputed integer step data for a rule."""

    def __init__(self, rule: SubstitutionRule):
        ctx = rule.field
        self.rule = rule
        self.ctx = ctx
        d = ctx.degree
        labels = rule.labels
        L = len(labels)
        zeta = _cyc(rule.zeta)
        mu = _cyc(rule.mu)
        data = []  # (r, lab, c) -> (B, S)
        C = max((len(rule.children[lb]) for lb in labels), default=0)
        if C > 65535:
            raise RuleError("too many children")
        for i, lb in enumerate(labels):
            for c, ch in enumerate(rule.children[lb]):
                a, t = _cyc(ch.motion.a), _cyc(ch.motion.t)
                data.append((0, i, c, a, t))
                data.append((1, i, c, (mu * a).conj(), (mu * t).conj()))
        E = _lcm([zeta.den] + [x.den for *_, a, t in data for x in (a, t)])
        self.E = E
        MB = np.zeros((2, L, max(C, 1), d, d), dtype=object)
        MS = np.zeros((2, L, max(C, 1), d, d), dtype=object)
        for r, i, c, a, t in data:
            MB[r, i, c] = np.array(mul_matrix(a, E), dtype=object)
            MS[r, i, c] = np.array(mul_matrix(t, E), dtype=object)
        MZ = np.array(mul_matrix(zeta, E), dtype=object)
        self.max_b = int(max((abs(x) for x in MB.ravel()), default=0))
        self.max_s = int(max((abs(x) for x in MS.ravel()), default=0))
        self.max_z = int(max(abs(x) for x in MZ.ravel()))
        self.obj = (MB, MS, MZ)
        fits = max(self.max_b, self.max_s, self.max_z) < _INT64_SAFE
        self.i64 = tuple(m.astype(np.int64) for m in self.obj) if fits else None
        self.nchild = np.array([len(rule.children[lb]) for lb in labels], dtype=np.int32)
        self.clabel = np.zeros((L, max(C, 1)), dtype=np.int32)
        self.crefl = np.zeros((L, max(C, 1)), dtype=np.uint8)
        for i, lb in enumerate(labels):
            for c, ch in enumerate(rule.children[lb]):
                self.clabel[i, c] = rule.index(ch.label)
                self.crefl[i, c] = ch.motion.r
        # prototype data for vertices and bounding disks
        self.proto_vertices = [[_cyc(v) for v in p.polygon.vertices] for p in rule.prototiles]
        basis = np.array(_basis_floats(ctx.N, d))
        self.basis = basis
        self.centroid = []
        self.radius = []
        for vs in self.proto_vertices:
            pts = [complex(np.dot(np.array(v.num, dtype=float), basis) / v.den) for v in vs]
            cen = sum(pts) / len(pts)
            self.centroid.append(cen)
            self.radius.append(max(abs(p - cen) for p in pts))


_TABLES: dict[int, _RuleTables] = {}


def tables(rule: SubstitutionRule) -> _RuleTables:
    key = id(rule)
    tab = _TABLES.get(key)
    if tab is None or tab.rule is not rule:
        tab = _RuleTables(rule)
        _TABLES[key] = tab
    return tab


# -- patches -----------------------------------------------------------------------


class Patch:
    """Immutable columnar patch.

    ``labels`` index ``rule.labels``; ``A``/``T`` are integer numerator rows
    over ``den``; ``addresses`` has one row of child indices per tile.  Tiles
    are in canonical (lexicographic address) order when produced by the
    engine.
    """

    def __init__(self, rule, depth, labels, refl, A, T, den, addresses):
        self.rule = rule
        self.depth = depth
        self.labels = labels
        self.refl = refl
        self.A = A
        self.T = T
        self.den = den
        self.addresses = addresses
        for arr in (labels, refl, A, T, addresses):
            arr.flags.writeable = False

    @classmethod
    def from_tiles(cls, rule: SubstitutionRule, tiles: Sequence[PlacedTile], depth: int = 0) -> Patch:
        ctx = rule.field
        d = ctx.degree
        if tiles:
            widths = {len(t.address) for t in tiles}
            if len(widths) != 1:
                raise ValueError("tile addresses must have equal length")
            width = widths.pop()
        else:
            width = depth
        a = [_cyc(t.motion.a) for t in tiles]
        tt = [_cyc(t.motion.t) for t in tiles]
        den = _lcm(x.den for x in a + tt)
        rows_a = _rows(a, den)
        rows_t = _rows(tt, den)
        big = max((abs(v) for row in rows_a + rows_t for v in row), default=0)
        dtype = np.int64 if big < _INT64_SAFE else object
        A = np.array(rows_a, dtype=dtype).reshape(len(tiles), d)
        T = np.array(rows_t, dtype=dtype).reshape(len(tiles), d)
        labels = np.array([rule.index(t.proto) for t in tiles], dtype=np.int32)
        refl = np.array([t.motion.r for t in tiles], dtype=np.uint8)
        addr = np.array([t.address for t in tiles], dtype=np.uint16).reshape(len(tiles), width)
        return cls(rule, depth, labels, refl, A, T, den, addr)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def ctx(self) -> FieldContext:
        return self.rule.field

    def counts(self) -> dict[str, int]:
        bc = np.bincount(self.labels, minlength=len(self.rule.labels))
        return {lb: int(bc[i]) for i, lb in enumerate(self.rule.labels)}

    def count_vector(self) -> list[int]:
        return [int(x) for x in np.bincount(self.labels, minlength=len(self.rule.labels))]

    def _scalar(self, row) -> ExtScalar:
        ctx = self.ctx
        u = CycNum._normalise(ctx, [int(v) for v in row], self.den)
        return ExtScalar(ctx, u, ctx.zero_cyc)

    def motion(self, i: int) -> Isometry:
        return Isometry(self._scalar(self.A[i]), int(self.refl[i]), self._scalar(self.T[i]))

    def tile(self, i: int) -> PlacedTile:
        return PlacedTile(
            self.rule.labels[int(self.labels[i])], self.motion(i), tuple(int(x) for x in self.addresses[i])
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self.tile(i)

    @cached_property
    def tiles(self) -> list[PlacedTile]:
        return list(self)

    def take(self, mask) -> Patch:
        idx = np.nonzero(mask)[0] if np.asarray(mask).dtype == bool else np.asarray(mask)
        return Patch(
            self.rule,
            self.depth,
            self.labels[idx],
            self.refl[idx],
            self.A[idx],
            self.T[idx],
            self.den,
            self.addresses[idx],
        )

    def same_as(self, other: Patch) -> bool:
        """Exact equality of tile sequences (labels, motions, addresses)."""
        if len(self) != len(other) or self.rule.name != other.rule.name:
            return False
        if not (np.array_equal(self.labels, other.labels) and np.array_equal(self.refl, other.refl)):
            return False
        if not np.array_equal(self.addresses, other.addresses):
            return False
        # cross-multiply to compare numerators over different denominators
        for X, Y in ((self.A, other.A), (self.T, other.T)):
            lhs = X.astype(object) * other.den
            rhs = Y.astype(object) * self.den
            if not np.array_equal(lhs, rhs):
                return False
        return True

    # -- float views ----------------------------------------------------------------

    def _float(self, M) -> np.ndarray:
        tab = tables(self.rule)
        if M.dtype == object:
            F = np.array([[float(v) for v in row] for row in M], dtype=float).reshape(M.shape)
        else:
            F = M.astype(float)
        return (F @ tab.basis) / float(self.den)

    def float_motions(self) -> tuple[np.ndarray, np.ndarray]:
        """Complex approximations of (a, t) per tile."""
        return self._float(self.A), self._float(self.T)

    def vertex_rows(self, label: int):
        """Exact vertex numerators for tiles of one prototile.

        Returns (indices, V, den) where ``V[m, k]`` is the numerator row of
        vertex k of tile ``indices[m]`` over the common denominator ``den``.
        """
        tab = tables(self.rule)
        idx = np.nonzero(self.labels == label)[0]
        verts = tab.proto_vertices[label]
        ev = _lcm(v.den for v in verts)
        obj = self.A.dtype == object
        mats = []
        for v in verts:
            m0 = np.array(mul_matrix(v, ev), dtype=object)
            m1 = np.array(mul_matrix(v.conj(), ev), dtype=object)
            mats.append((m0, m1))
        big = max(abs(int(x)) for m in mats for mm in m for x in mm.ravel())
        A = self.A[idx]
        T = self.T[idx]
        r = self.refl[idx]
        d = self.ctx.degree
        if not obj and len(idx):
            bound = int(np.abs(A).max()) * big * d + int(np.abs(T).max()) * ev
            obj = bound >= _INT64_SAFE
        dtype = object if obj else np.int64
        A = A.astype(dtype)
        T = T.astype(dtype)
        V = np.empty((len(idx), len(verts), d), dtype=dtype)
        for k, (m0, m1) in enumerate(mats):
            m0 = m0.astype(dtype)
            m1 = m1.astype(dtype)
            V[:, k] = np.where(r[:, None] == 1, A @ m1, A @ m0) + T * ev
        return idx, V, self.den * ev

    def float_vertices(self) -> list[np.ndarray]:
        """Per-tile complex vertex arrays (ccw), canonical order."""
        out: list = [None] * len(self)
        tab = tables(self.rule)
        for lab in range(len(self.rule.labels)):
            idx, V, den = self.vertex_rows(lab)
            if not len(idx):
                continue
            if V.dtype == object:
                F = np.array([[[float(x) for x in row] for row in tile] for tile in V], dtype=float)
            else:
                F = V.astype(float)
            Z = (F @ tab.basis) / float(den)
            rev = self.refl[idx] == 1
            for m, i in enumerate(idx):
                z = Z[m]
                if rev[m]:
                    z = np.concatenate([z[:1], z[:0:-1]])
                out[i] = z
        return out


def tile_vertices(tile: PlacedTile, rule: SubstitutionRule) -> ConvexPolygon:
    """Exact placed polygon (counterclockwise; reflections re-orient)."""
    return tile.motion.apply_polygon(rule.proto(tile.proto).polygon)


# -- expansion ----------------------------------------------------------------------


def seed_patch(rule: SubstitutionRule, label: str, motion: Isometry | None = None) -> Patch:
    if motion is None:
        motion = Isometry.identity(rule.field)
    rule.proto(label)  # KeyError on unknown label
    return Patch.from_tiles(rule, [PlacedTile(label, motion, ())])


def _bound_ok(tab: _RuleTables, A, T) -> bool:
    if A.dtype == object or tab.i64 is None:
        return False
    if not len(A):
        return True
    d = tab.ctx.degree
    ma = int(np.abs(A).max())
    mt = int(np.abs(T).max())
    return d * ma * max(tab.max_b, tab.max_s) + d * mt * tab.max_z < _INT64_SAFE


def _reduce(A, T, den):
    if A.dtype != np.int64 or den == 1:
        return A, T, den
    g = math.gcd(den, int(np.gcd.reduce(A, axis=None)), int(np.gcd.reduce(T, axis=None)))
    if g > 1:
        return A // g, T // g, den // g
    return A, T, den


def _step(patch: Patch, threads: int | None = None) -> Patch:
    tab = tables(patch.rule)
    A, T = patch.A, patch.T
    if _bound_ok(tab, A, T):
        MB, MS, MZ = tab.i64
        fn = _step_compiled
    else:
        A = A.astype(object)
        T = T.astype(object)
        MB, MS, MZ = tab.obj
        fn = _step_py
    n = len(A)
    nt = thread_count(threads)
    if nt > 1 and n >= 4096:
        from concurrent.futures import ThreadPoolExecutor

        cuts = np.linspace(0, n, nt + 1).astype(int)
        parts = [(cuts[k], cuts[k + 1]) for k in range(nt) if cuts[k] < cuts[k + 1]]
        with ThreadPoolExecutor(max_workers=nt) as ex:
            res = list(
                ex.map(
                    lambda ab: fn(
                        patch.labels[ab[0] : ab[1]],
                        patch.refl[ab[0] : ab[1]],
                        A[ab[0] : ab[1]],
                        T[ab[0] : ab[1]],
                        tab.nchild,
                        tab.clabel,
                        tab.crefl,
                        MB,
                        MS,
                        MZ,
                    ),
                    parts,
                )
            )
        labels = np.concatenate([r[0] for r in res])
        refl = np.concatenate([r[1] for r in res])
        A2 = np.concatenate([r[2] for r in res])
        T2 = np.concatenate([r[3] for r in res])
        parent = np.concatenate([r[4] + a for r, (a, _) in zip(res, parts)])
        cidx = np.concatenate([r[5] for r in res])
    else:
        labels, refl, A2, T2, parent, cidx = fn(
            patch.labels, patch.refl, A, T, tab.nchild, tab.clabel, tab.crefl, MB, MS, MZ
        )
    den = patch.den * tab.E
    A2, T2, den = _reduce(A2, T2, den)
    addr = np.concatenate([patch.addresses[parent], cidx[:, None].astype(np.uint16)], axis=1)
    return Patch(patch.rule, patch.depth + 1, labels, refl, A2, T2, den, addr)


def expand(patch: Patch, steps: int, threads: int | None = None) -> Patch:
    """Apply ``steps`` substitution steps."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    for _ in range(steps):
        patch = _step(patch, threads)
    return patch


def t1_center_seed(rule: SubstitutionRule) -> Patch:
    """The T1 prototile translated so that its centre is the origin."""
    if "T1" not in rule.labels:
        raise RuleError(f"rule {rule.name} has no prototile T1")
    vs = rule.proto("T1").polygon.vertices
    cen = sum(vs[1:], vs[0]) / len(vs)
    one = rule.field.ext(1)
    return seed_patch(rule, "T1", Isometry(one, 0, -cen))


def symmetric_patch(rule: SubstitutionRule, k: int, threads: int | None = None) -> Patch:
    """k steps from the centred T1; invariant under rotation by 2 pi/n."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return expand(t1_center_seed(rule), k, threads)


def tile_key_set(patch: Patch, rotation: CycNum | None = None) -> set:
    """Exact keys of the placed tiles (as point sets), optionally after
    rotating the whole patch about the origin."""
    rule = patch.rule
    out = set()
    for t in patch:
        g = t.motion
        if rotation is not None:
            w = rule.field.ext(rotation)
            g = Isometry(w * g.a, g.r, w * g.t)
        out.add(rule.tile_key(t.proto, g))
    return out


def is_rotation_invariant(patch: Patch, steps: int = 1) -> bool:
    """Exact test that rotating by ``steps * 2 pi / n`` maps the patch onto itself."""
    rot = patch.ctx.xi_pow(2 * steps)
    return tile_key_set(patch) == tile_key_set(patch, rot)


# -- clipping -------------------------------------------------------------------------

_EPS = 1e-9


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float

    def bbox(self):
        return self.cx - self.r, self.cx + self.r, self.cy - self.r, self.cy + self.r


@dataclass(frozen=True)
class Box:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def bbox(self):
        return self.xmin, self.xmax, self.ymin, self.ymax


def _disks_meet(region, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    if isinstance(region, Disk):
        dist = np.abs(centers - complex(region.cx, region.cy))
        return dist <= radii + region.r + _EPS
    dx = np.maximum(np.maximum(region.xmin - centers.real, 0), centers.real - region.xmax)
    dy = np.maximum(np.maximum(region.ymin - centers.imag, 0), centers.imag - region.ymax)
    return np.hypot(dx, dy) <= radii + _EPS


def _point_segment_dist(p: complex, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    ab = b - a
    L2 = np.abs(ab) ** 2
    t = np.clip(((p - a) * np.conj(ab)).real / np.where(L2 > 0, L2, 1), 0, 1)
    return np.abs(p - (a + t * ab))


def tiles_meeting(patch: Patch, region) -> np.ndarray:
    """Mask of tiles whose (closed) polygon meets the closed region, decided
    in floating point with an absolute tolerance of 1e-9."""
    mask = np.zeros(len(patch), dtype=bool)
    if not len(patch):
        return mask
    verts = patch.float_vertices()
    for lab in range(len(patch.rule.labels)):
        idx = np.nonzero(patch.labels == lab)[0]
        if not len(idx):
            continue
        V = np.array([verts[i] for i in idx])  # (m, k)
        W = np.roll(V, -1, axis=1)
        if isinstance(region, Disk):
            p = complex(region.cx, region.cy)
            # inside test: all cross products non-negative (ccw polygons)
            cross = ((W - V).conj() * (p - V)).imag
            inside = np.all(cross >= -_EPS, axis=1)
            dist = np.min(_point_segment_dist(p, V, W), axis=1)
            mask[idx] = inside | (dist <= region.r + _EPS)
        else:
            # separating axis test between convex polygon and box
            ok = ~(
                (V.real.max(axis=1) < region.xmin - _EPS)
                | (V.real.min(axis=1) > region.xmax + _EPS)
                | (V.imag.max(axis=1) < region.ymin - _EPS)
                | (V.imag.min(axis=1) > region.ymax + _EPS)
            )
            corners = np.array(
                [
                    complex(region.xmin, region.ymin),
                    complex(region.xmax, region.ymin),
                    complex(region.xmax, region.ymax),
                    complex(region.xmin, region.ymax),
                ]
            )
            E = W - V  # (m, k)
            # box entirely outside some polygon edge?
            cr = ((E[:, :, None].conj()) * (corners[None, None, :] - V[:, :, None])).imag
            sep = np.any(np.all(cr < -_EPS * np.abs(E[:, :, None]), axis=2), axis=1)
            mask[idx] = ok & ~sep
    return mask


def clip_expand(
    rule: SubstitutionRule, seed: Patch | str, steps: int, region, threads: int | None = None
) -> Patch:
    """Tiles of ``expand(seed, steps)`` meeting the region, without
    expanding supertiles whose bounding disk misses it."""
    patch = seed_patch(rule, seed) if isinstance(seed, str) else seed
    tab = tables(rule)
    zabs = abs(complex(rule.zeta.to_complex()))
    zc = complex(rule.zeta.to_complex())
    cen = np.array(tab.centroid)
    rad = np.array(tab.radius)

    def prune(p: Patch, remaining: int) -> Patch:
        if not len(p):
            return p
        a, t = p.float_motions()
        c = cen[p.labels]
        c = np.where(p.refl == 1, np.conj(c), c)
        centers = (a * c + t) * zc**remaining
        radii = rad[p.labels] * zabs**remaining * (1 + 1e-12) + 1e-9
        return p.take(_disks_meet(region, centers, radii))

    patch = prune(patch, steps)
    for j in range(steps):
        patch = prune(_step(patch, threads), steps - j - 1)
    return patch.take(tiles_meeting(patch, region))
