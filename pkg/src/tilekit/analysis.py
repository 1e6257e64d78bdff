"""Substitution matrices, spectra, orientations, irrational angles, vertex stars."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .engine import Patch, expand, seed_patch, tables
from .geometry import area2
from .numberfield import CycNum, ExtScalar, embed, euler_phi
from .ruleset import SubstitutionRule

__all__ = [
    "CountMatrix",
    "SpectralData",
    "OrientationClass",
    "VertexStar",
    "StarReport",
    "DTOWitness",
    "count_matrix",
    "matrix_power",
    "primitivity_index",
    "pf_data",
    "orientation_census",
    "dto_witness",
    "has_infinite_order",
    "rational_angle_test",
    "vertex_stars",
]


# -- matrices -----------------------------------------------------------------------


@dataclass(frozen=True)
class CountMatrix:
    """Column j counts the children of each label in sigma(T_j)."""

    labels: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __eq__(self, other) -> bool:
        if isinstance(other, CountMatrix):
            return self.labels == other.labels and self.rows == other.rows
        return self.tolist() == [list(r) for r in other]

    def __hash__(self) -> int:
        return hash(self.rows)

    def column(self, j: int) -> list[int]:
        return [r[j] for r in self.rows]

    def __str__(self) -> str:
        w = max(len(str(v)) for r in self.rows for v in r)
        return "\n".join(" ".join(str(v).rjust(w) for v in r) for r in self.rows)


def count_matrix(rule: SubstitutionRule) -> CountMatrix:
    m = len(rule.labels)
    rows = [[0] * m for _ in range(m)]
    for j, lb in enumerate(rule.labels):
        for ch in rule.children[lb]:
            rows[rule.index(ch.label)][j] += 1
    return CountMatrix(tuple(rule.labels), tuple(tuple(r) for r in rows))


def _as_rows(M) -> list[list[int]]:
    return M.tolist() if isinstance(M, CountMatrix) else [list(r) for r in M]


def matrix_power(M, k: int) -> list[list[int]]:
    A = _as_rows(M)
    m = len(A)
    out = [[int(i == j) for j in range(m)] for i in range(m)]
    for _ in range(k):
        out = [[sum(out[i][l] * A[l][j] for l in range(m)) for j in range(m)] for i in range(m)]
    return out


def primitivity_index(M) -> int | None:
    """Smallest k with M^k > 0 entrywise, searched up to the Wielandt bound
    (m-1)^2 + 1; None if there is none."""
    A = np.array(_as_rows(M), dtype=np.int64) > 0
    m = len(A)
    if m == 0:
        return None
    P = A.copy()
    for k in range(1, (m - 1) ** 2 + 2):
        if P.all():
            return k
        P = (P.astype(np.int64) @ A.astype(np.int64)) > 0
    return None


# -- Perron-Frobenius ------------------------------------------------------------------


@dataclass
class SpectralData:
    pf_value: mpmath.mpf
    left: list  # normalised to sum 1
    right: list  # normalised to sum 1
    residuals: dict = field(default_factory=dict)
    margin: float = 0.0
    area_residual: float | None = None

    def summary(self) -> str:
        lines = [f"pf value {mpmath.nstr(self.pf_value, 20)}  (dominance margin {self.margin:.6g})"]
        lines.append("left  " + " ".join(mpmath.nstr(x, 12) for x in self.left))
        lines.append("right " + " ".join(mpmath.nstr(x, 12) for x in self.right))
        for k, v in self.residuals.items():
            lines.append(f"{k} residual {v:.3g}")
        if self.area_residual is not None:
            lines.append(f"left vs areas residual {self.area_residual:.3g}")
        return "\n".join(lines)


def _power_iteration(A, tol, max_iter: int = 100000):
    m = A.rows
    v = mpmath.matrix([mpmath.mpf(1)] * m)
    for _ in range(max_iter):
        w = A * v
        s = sum(w)
        w = w / s
        diff = max(abs(w[i] - v[i]) for i in range(m))
        v = w
        if diff < tol:
            break
    else:
        raise ArithmeticError("power iteration did not converge")
    return v


def pf_data(M, rule: SubstitutionRule | None = None, precision: int = 160) -> SpectralData:
    """PF eigenvalue and eigenvectors by power iteration at ``precision`` bits.

    Left vector normalised to sum 1 (area semantics); right vector to sum 1
    (frequency semantics).  With a rule, the left vector is compared with the
    exact prototile areas.
    """
    rows = _as_rows(M)
    if primitivity_index(rows) is None:
        raise ValueError("matrix is not primitive")
    m = len(rows)
    with mpmath.workprec(precision):
        A = mpmath.matrix(rows)
        # M + I has the same eigenvectors and a strictly dominant PF value
        S = A + mpmath.eye(m)
        tol = mpmath.mpf(2) ** (-(precision - 16))
        right = _power_iteration(S, tol)
        left = _power_iteration(S.T, tol)
        Av = A * right
        lam = sum(Av) / sum(right)
        res_r = max(abs(Av[i] - lam * right[i]) for i in range(m))
        wA = A.T * left
        res_l = max(abs(wA[i] - lam * left[i]) for i in range(m))
        right = [right[i] / sum(right) for i in range(m)]
        left = [left[i] / sum(left) for i in range(m)]
        data = SpectralData(lam, left, right, {"right": float(res_r), "left": float(res_l)})
        ev = np.linalg.eigvals(np.array(rows, dtype=float))
        mags = sorted(abs(ev), reverse=True)
        data.margin = float(mags[0] - mags[1]) if m > 1 else float(mags[0])
        if rule is not None:
            areas = [area2(p.polygon).to_float() for p in rule.prototiles]
            tot = sum(areas)
            data.area_residual = max(abs(float(left[i]) - areas[i] / tot) for i in range(m))
            lo, hi = embed(rule.inflation, precision).re._mpi_
            c = (mpmath.mpf(lo) + mpmath.mpf(hi)) / 2
            data.residuals["pf_vs_c"] = float(abs(lam - c))
    return data


# -- orientations ---------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class OrientationClass:
    proto: str
    chirality: int
    key: tuple  # canonical coefficient key of the rotation
    rotation: ExtScalar = field(compare=False, hash=False, repr=False, default=None)

    def angle(self) -> float:
        """Canonical rotation angle in [0, 1) turns."""
        z = self.rotation.to_complex()
        return (math.atan2(z.imag, z.real) / (2 * math.pi)) % 1.0


def _rotation_generator(rule: SubstitutionRule, label: str) -> CycNum | None:
    p = rule.proto(label)
    if p.rotsym == 1:
        return None
    rots = [s for s in p.symmetries if s.r == 0]
    # generator: the rotation by 2 pi / rotsym (smallest positive angle)
    best = None
    for s in rots[1:]:
        z = s.a.to_complex()
        ang = math.atan2(z.imag, z.real) % (2 * math.pi)
        if best is None or ang < best[0]:
            best = (ang, s.a.u)
    return best[1]


def canonical_rotation(rule: SubstitutionRule, label: str, a: CycNum) -> CycNum:
    """Representative of a modulo the prototile's rotation symmetries: the
    candidate with the smallest (normalised) coefficient key."""
    w = _rotation_generator(rule, label)
    if w is None:
        return a
    best = a
    cur = a
    for _ in range(rule.proto(label).rotsym - 1):
        cur = cur * w
        if cur.key() < best.key():
            best = cur
    return best


def orientation_census(patch: Patch) -> dict[OrientationClass, int]:
    """Tile counts per orientation class, in canonical class order."""
    rule = patch.rule
    ctx = rule.field
    if not len(patch):
        return {}
    A = patch.A
    rows = [tuple(int(x) for x in r) for r in A] if A.dtype == object else [tuple(r) for r in A.tolist()]
    raw = Counter(zip(patch.labels.tolist(), patch.refl.tolist(), rows))
    out: Counter = Counter()
    reps = {}
    for (lab, r, row), cnt in raw.items():
        label = rule.labels[lab]
        a = CycNum._normalise(ctx, list(row), patch.den)
        can = canonical_rotation(rule, label, a)
        cls = OrientationClass(label, r, can.key())
        reps[cls] = can
        out[cls] += cnt
    result = {}
    for cls in sorted(out):
        full = OrientationClass(cls.proto, cls.chirality, cls.key, ExtScalar(ctx, reps[cls], ctx.zero_cyc))
        result[full] = out[cls]
    return result


# -- infinite order / rational angles -------------------------------------------------------


def _is_one(z) -> bool:
    return z == 1


def has_infinite_order(rho: ExtScalar) -> bool:
    """Exact test whether a unit-modulus field element is not a root of unity.

    A root of unity is an algebraic integer, and integers of the cyclotomic
    field have denominator 1 in the power basis, so a denominator > 1 settles
    it.  Otherwise rho^q = 1 is tested for every q with phi(q) <= 2 phi(N)
    (all possible orders of torsion elements of the degree-2phi(N) field).
    """
    if rho.is_zero():
        raise ValueError("zero has no multiplicative order")
    if rho.v.is_zero() and rho.u.den != 1:
        return True
    bound = 2 * rho.ctx.degree
    # phi(q) >= sqrt(q/2), so q <= 2 bound^2 covers every q with phi(q) <= bound
    for q in range(1, 2 * bound * bound + 1):
        if euler_phi(q) <= bound and rho**q == 1:
            return False
    return True


def rational_angle_test(w: ExtScalar, B: int) -> int | None:
    """Smallest q <= B with (w/conj(w))^q = 1, else None.

    None certifies that arg(w) is not p pi/q for any q <= B.  Everything is
    exact: if w/conj(w) is not an algebraic integer no power equals 1 (a
    denominator certificate), otherwise the powers are compared with 1.
    """
    if w.is_zero():
        raise ValueError("rational_angle_test needs a nonzero element")
    z = w / w.conj()
    if z.v.is_zero() and z.u.den != 1:
        return None
    cur = z
    for q in range(1, B + 1):
        if cur == 1:
            return q
        cur = cur * z
    return None


# -- DTO witness -------------------------------------------------------------------------------


@dataclass
class DTOWitness:
    depth: int
    seed: str
    label: str
    chirality: int
    tiles: tuple  # (PlacedTile, PlacedTile)
    rotation: ExtScalar

    def summary(self) -> str:
        from .numberfield import format_scalar

        a, b = self.tiles
        z = self.rotation.to_complex()
        deg = math.degrees(math.atan2(z.imag, z.real))
        return (
            f"sigma^{self.depth}({self.seed}): two {self.label} tiles (chirality {self.chirality}) at "
            f"addresses {list(a.address)} and {list(b.address)} differ by the rotation "
            f"{format_scalar(self.rotation)} ({deg:.9f} deg), which has infinite order"
        )


def dto_witness(rule: SubstitutionRule, kmax: int) -> DTOWitness | None:
    """Two same-label, same-chirality tiles in a supertile sigma^k(T_i),
    k <= kmax, whose relative rotation has infinite order.

    Among candidates, the first depth wins; within a depth, a pair whose
    relative rotation is mu^-1 = zeta/conj(zeta) is preferred, then the
    first pair in canonical order.
    """
    ctx = rule.field
    target = rule.mu.inverse()
    for k in range(1, kmax + 1):
        found = None
        for seed in rule.labels:
            patch = expand(seed_patch(rule, seed), k)
            census = orientation_census(patch)
            groups = defaultdict(list)
            for cls in census:
                groups[(cls.proto, cls.chirality)].append(cls)
            for (label, r), classes in sorted(groups.items()):
                if len(classes) < 2:
                    continue
                base = classes[0].rotation
                for other in classes[1:]:
                    rho = other.rotation * base.conj()
                    if not has_infinite_order(rho):
                        continue
                    preferred = rho == target or rho.conj() == target
                    cand = (not preferred, seed, label, r, base, other.rotation, rho)
                    if found is None or cand[0] < found[0]:
                        found = cand
                    if preferred:
                        break
            if found is not None and not found[0]:
                break
        if found is not None:
            _, seed, label, r, a0, a1, rho = found
            if rho.conj() == target:
                a0, a1, rho = a1, a0, rho.conj()
            patch = expand(seed_patch(rule, seed), k)
            t0 = _find_tile(patch, rule, label, r, a0)
            t1 = _find_tile(patch, rule, label, r, a1)
            return DTOWitness(k, seed, label, r, (t0, t1), rho)
    return None


def _find_tile(patch: Patch, rule, label, r, rot):
    lab = rule.index(label)
    for i in range(len(patch)):
        if patch.labels[i] != lab or patch.refl[i] != r:
            continue
        t = patch.tile(i)
        if canonical_rotation(rule, label, t.motion.a.u) == rot.u:
            return t
    raise LookupError("tile not found")


# -- vertex stars ----------------------------------------------------------------------------------


@dataclass(frozen=True, order=True)
class VertexStar:
    """Cyclic arrangement of corners around a vertex, up to congruence.

    Items are (label, kind, index, chirality) with kind "c" for a corner at
    prototype vertex ``index`` and "e" for a straight angle on the interior
    of prototype edge ``index`` (or a pseudo-vertex).
    """

    items: tuple


@dataclass
class StarReport:
    stars: set
    counts: Counter
    interior_vertices: int
    non_vertex_to_vertex: bool
    witness: tuple | None = None
    angle_sums_ok: bool = True
    boundary: Counter = field(default_factory=Counter)  # partial stars at non-interior vertices

    def summary(self) -> str:
        lines = [
            f"{len(self.stars)} vertex star classes over {self.interior_vertices} interior vertices",
            f"vertex-to-vertex: {'no' if self.non_vertex_to_vertex else 'yes'}",
        ]
        if self.witness:
            z, addr = self.witness
            lines.append(f"  witness: vertex ({z.real:.6f}, {z.imag:.6f}) inside an edge of tile {addr}")
        for st in sorted(self.stars):
            lines.append(f"  {self.counts[st]:6d}  " + " ".join(f"{l}:{k}{i}{'m' if r else ''}" for l, k, i, r in st.items))
        return "\n".join(lines)


def _canonical_cycle(items: list) -> tuple:
    n = len(items)
    best = None
    mirrored = [(l, k, i, 1 - r) for l, k, i, r in reversed(items)]
    for seq in (items, mirrored):
        for s in range(n):
            cand = tuple(seq[s:] + seq[:s])
            if best is None or cand < best:
                best = cand
    return best


def _corner_data(rule: SubstitutionRule, pseudo: bool):
    """Per prototile: list of (kind, index, exact e^{2i theta}, float theta) for
    the vertices used (pseudo-vertices inserted on T2's long edge)."""
    out = []
    for p in rule.prototiles:
        vs = p.polygon.vertices
        k = len(vs)
        items = []
        for j in range(k):
            u = vs[j - 1] - vs[j]
            w = vs[(j + 1) % k] - vs[j]
            e2 = (u * w.conj()) ** 2 / (u.norm2() * w.norm2())
            zu, zw = u.to_complex(), w.to_complex()
            theta = (math.atan2(zu.imag, zu.real) - math.atan2(zw.imag, zw.real)) % (2 * math.pi)
            items.append(("c", j, e2, theta))
        out.append(items)
    return out


def _pseudo_edges(rule: SubstitutionRule) -> dict[int, int]:
    """Prototile index -> edge index carrying a pseudo-vertex (T2's edge of
    length 2)."""
    res = {}
    if "T2" in rule.labels:
        i = rule.index("T2")
        vs = rule.proto("T2").polygon.vertices
        for j in range(len(vs)):
            e = vs[(j + 1) % len(vs)] - vs[j]
            if e.norm2() == 4:
                res[i] = j
                break
    return res


def vertex_stars(patch: Patch, use_pseudo: bool = False) -> StarReport:
    """Vertex-star classes of the interior vertices of a patch.

    A vertex is interior when the corners (and straight angles of edges
    passing through it) add up to 2 pi; this is decided exactly from the
    product of the corners' e^{2 i theta} plus a coarse float check.  A
    vertex in the relative interior of another tile's edge raises the
    non-vertex-to-vertex flag.
    """
    rule = patch.rule
    ctx = rule.field
    d = ctx.degree
    corners = _corner_data(rule, use_pseudo)
    pseudo = _pseudo_edges(rule) if use_pseudo else {}
    n = len(patch)
    # exact vertex keys over a common denominator
    per_label = {}
    dens = []
    for lab in range(len(rule.labels)):
        idx, V, den = patch.vertex_rows(lab)
        per_label[lab] = (idx, V, den)
        dens.append(den)
    D = 1
    for x in dens:
        D = D * x // math.gcd(D, x)
    D *= 2  # midpoints of vertices stay integral
    basis = tables(rule).basis
    tile_verts: list = [None] * n  # per tile: list of (key, complex) in prototype order
    for lab, (idx, V, den) in per_label.items():
        f = D // den
        for m, i in enumerate(idx):
            vs = []
            for row in V[m]:
                key = tuple(int(x) * f for x in row)
                z = complex(np.dot(np.array([float(x) for x in row]), basis) / float(den))
                vs.append((key, z))
            tile_verts[i] = vs
    incid = defaultdict(list)  # key -> [(start direction, item, e^{2i theta}, theta)]
    where = {}
    pseudo_at = set()  # (tile, key) pairs already counted as pseudo-vertices
    edges = []  # (tile, edge j, key_a, key_b, za, zb)
    for i in range(n):
        lab = int(patch.labels[i])
        r = int(patch.refl[i])
        label = rule.labels[lab]
        vs = tile_verts[i]
        k = len(vs)
        for j in range(k):
            key, z = vs[j]
            nxt = vs[(j + 1) % k][1]
            prv = vs[j - 1][1]
            # placed ccw order: for reflected tiles the ccw successor is the prototype predecessor
            out_dir = (prv - z) if r else (nxt - z)
            _, _, e2, theta = corners[lab][j]
            incid[key].append((math.atan2(out_dir.imag, out_dir.real), (label, "c", j, r), e2, theta))
            where[key] = z
            edges.append((i, j, key, vs[(j + 1) % k][0], z, nxt))
        if lab in pseudo:
            j = pseudo[lab]
            (ka, za), (kb, zb) = vs[j], vs[(j + 1) % k]
            key = tuple((a + b) // 2 for a, b in zip(ka, kb))
            zm = (za + zb) / 2
            dirn = (za - zm) if r else (zb - zm)
            incid[key].append((math.atan2(dirn.imag, dirn.real), (label, "e", j, r), None, math.pi))
            where[key] = zm
            pseudo_at.add((i, key))
    # edge interiors through vertices (float grid, exact confirmation)
    cell = 1.0
    grid = defaultdict(list)
    for e in edges:
        za, zb = e[4], e[5]
        x0, x1 = sorted((za.real, zb.real))
        y0, y1 = sorted((za.imag, zb.imag))
        for gx in range(math.floor(x0 / cell), math.floor(x1 / cell) + 1):
            for gy in range(math.floor(y0 / cell), math.floor(y1 / cell) + 1):
                grid[(gx, gy)].append(e)
    witness = None
    nv2v = False
    for key, items in list(incid.items()):
        z = where.get(key)
        if z is None:
            continue
        for e in grid.get((math.floor(z.real / cell), math.floor(z.imag / cell)), ()):
            i, j, ka, kb, za, zb = e
            if key == ka or key == kb or (i, key) in pseudo_at:
                continue
            ab = zb - za
            t = ((z - za) * ab.conjugate()).real / abs(ab) ** 2
            if t <= 1e-9 or t >= 1 - 1e-9:
                continue
            if abs(((z - za) * ab.conjugate()).imag) / abs(ab) > 1e-7:
                continue
            if not _exact_on_segment(key, ka, kb, D, ctx):
                continue
            lab = int(patch.labels[i])
            r = int(patch.refl[i])
            # straight angle; orientation: the edge direction seen from the tile interior
            dirn = (za - z) if r else (zb - z)
            items.append((math.atan2(dirn.imag, dirn.real), (rule.labels[lab], "e", j, r), None, math.pi))
            nv2v = True
            if witness is None:
                witness = (z, list(patch.tile(i).address))
    stars = set()
    counts: Counter = Counter()
    boundary: Counter = Counter()
    interior = 0
    ok = True
    for key, items in incid.items():
        total = sum(it[3] for it in items)
        if abs(total - 2 * math.pi) > 1e-6:
            part = sorted(items, key=lambda it: it[0])
            boundary[VertexStar(tuple(it[1] for it in part))] += 1
            continue
        prod = None
        for it in items:
            if it[2] is None:
                continue
            prod = it[2] if prod is None else prod * it[2]
        if prod is not None and prod != 1:
            ok = False
            continue
        interior += 1
        items = sorted(items, key=lambda it: it[0])
        st = VertexStar(_canonical_cycle([it[1] for it in items]))
        stars.add(st)
        counts[st] += 1
    return StarReport(stars, counts, interior, nv2v, witness, ok, boundary)


def _exact_on_segment(key, ka, kb, D, ctx) -> bool:
    """Exact collinearity test for integer rows over the common denominator."""
    from .geometry import cross_sign

    def el(row):
        return ExtScalar(ctx, CycNum._normalise(ctx, list(row), D), ctx.zero_cyc)

    p, a, b = el(key), el(ka), el(kb)
    return cross_sign(b - a, p - a) == 0
