"""Regenerate src/tilekit/rules/*.tile from dissection searches.

Small dissections are re-solved on the fly with the backtracking search in
dissect.py (deterministic, a few seconds).  The large sigma5/sigma8
dissections took minutes of randomised lattice search (latsearch.cpp via
latdrive.py); their motions are stored in tools/solutions/ in the *frame*
coordinates, i.e. for the target c*T (c = |zeta|^2) instead of zeta*(zeta*T).
The real motion is mu^-1 composed with the frame motion, since zeta^2 = c/mu.

Every rule is validated exactly and its count matrix compared with the
published matrix before it is written.

    python3 tools/build_rules.py [name ...]
"""

from __future__ import annotations

import itertools
import re
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tools"))

from dissect import MRVSearch, Shape  # noqa: E402
from tilekit.geometry import ConvexPolygon, Isometry, congruence_map  # noqa: E402
from tilekit.numberfield import field_init, parse_scalar  # noqa: E402
from tilekit.ruleset import (  # noqa: E402
    Child,
    Prototile,
    RuleError,
    SubstitutionRule,
    _check_prototile,
    parse_rule_file,
    rules_equal,
    serialize_rule,
    validate_rule,
)

SOL = ROOT / "tools" / "solutions"
OUT = ROOT / "src" / "tilekit" / "rules"

MATRICES = {
    "sigma3": [[1, 4], [3, 5]],
    "sigma4": [[1, 2], [4, 3]],
    "sigma6": [[1, 0, 0, 6], [6, 5, 0, 0], [24, 4, 0, 13], [0, 0, 1, 0]],
    "sigma8": [
        [1, 0, 0, 0, 2, 4],
        [8, 5, 0, 0, 0, 0],
        [32, 4, 0, 0, 25, 24],
        [16, 0, 0, 0, 12, 17],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
    ],
    "sigma5": [
        [1, 0, 0, 0, 0, 0, 0, 2, 6, 4, 3, 1],
        [5, 3, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 18, 9, 10, 5, 11],
        [5, 0, 0, 0, 0, 0, 0, 21, 8, 6, 1, 2],
        [15, 4, 0, 0, 0, 0, 0, 8, 18, 25, 9, 8],
        [0, 2, 0, 0, 0, 0, 0, 12, 6, 7, 9, 11],
        [0, 2, 0, 0, 0, 0, 0, 10, 12, 13, 17, 17],
        [0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0],
    ],
    "pinwheel": [[5]],
}


# -- shapes ---------------------------------------------------------------------


def regular(F, n):
    w = F.ext(F.xi ** (F.N // n))
    v = [F.ext(0)]
    e = F.ext(1)
    for _ in range(n - 1):
        v.append(v[-1] + e)
        e = e * w
    return v


def triangle2(F):
    rot = F.xi if F.n % 2 else F.xi ** 2
    return [F.ext(0), F.ext(2), F.ext(2 + rot)]


def units(F):
    return [F.ext(F.xi_pow(k)) for k in range(F.N)]


def twisted(F):
    U = units(F)
    return U + [F.mu.inverse() * u for u in U] + [F.mu * u for u in U]


def center(vs):
    return sum(vs[1:], vs[0]) / len(vs)


# -- searches -------------------------------------------------------------------


def solve(shapes, target, counts, rotations, sym=None):
    S = MRVSearch(target, {k: Shape(k, v) for k, v in shapes.items()}, dict(counts), rotations, symmetry=sym)
    if not S.solve():
        raise RuntimeError(f"no dissection found for counts {counts}")
    return [(p.shape, p.motion) for p in S.placed]


def solve_t1(F, shapes, counts):
    T1 = shapes["T1"]
    z = F.zeta
    return solve(shapes, [z * v for v in T1], counts, units(F), sym=(z * center(T1), F.ext(F.xi ** 2), F.n))


_ISO = re.compile(r"^(\S+) Isometry\(a=(.*), r=([01]), t=(.*)\)$")


def load_frame(F, name):
    """Stored frame solution -> real motions."""
    minv = F.mu.inverse()
    out = []
    for line in (SOL / f"{name}.txt").read_text().splitlines():
        m = _ISO.match(line.strip())
        if not m:
            continue
        a, r, t = parse_scalar(F, m.group(2)), int(m.group(3)), parse_scalar(F, m.group(4))
        out.append((m.group(1), Isometry(minv * a, r, minv * t)))
    return out


# -- labelling --------------------------------------------------------------------


def orbits(items, group):
    """Partition indices of (shape, motion) items into orbits of the group
    (a list of isometries acting on placed polygons)."""
    keys = {}
    for i, (nm, g) in enumerate(items):
        keys[placed_key(nm, g)] = i
    seen, out = set(), []
    for i, (nm, g) in enumerate(items):
        if i in seen:
            continue
        orb = []
        for s in group:
            j = keys.get(placed_key(nm, s.compose(g)))
            if j is None:
                raise RuntimeError("solution is not invariant under the search symmetry")
            if j not in orb:
                orb.append(j)
        seen.update(orb)
        out.append(sorted(orb))
    return out


_SHAPES: dict = {}


def placed_key(nm, g):
    vs = _SHAPES[nm]
    return nm, frozenset(g(v).key() for v in vs)


def assign(items, group, mapping):
    """Relabel children: mapping is shape -> [(label, count), ...].  Labels
    are constant on orbits of ``group`` when the counts allow it."""
    orbs = orbits(items, group)
    labels = [None] * len(items)
    for shape, want in mapping.items():
        mine = [o for o in orbs if items[o[0]][0] == shape]
        sizes = [len(o) for o in mine]
        plan = _split(sizes, [c for _, c in want])
        if plan is None:
            # no orbit-respecting split: fill greedily, breaking symmetry
            flat = [i for o in mine for i in o]
            pos = 0
            for lb, c in want:
                for i in flat[pos : pos + c]:
                    labels[i] = lb
                pos += c
            print(f"  warning: labels for {shape} break the dissection symmetry", file=sys.stderr)
            continue
        for o, k in zip(mine, plan):
            for i in o:
                labels[i] = want[k][0]
    return [Child(lb, g) for lb, (_, g) in zip(labels, items)]


def _split(sizes, counts):
    """Assign each orbit to a bin so that bin totals equal counts; prefers
    earlier bins for earlier orbits (deterministic DP)."""
    n, k = len(sizes), len(counts)
    memo = {}

    def go(i, rem):
        if i == n:
            return [] if not any(rem) else None
        key = (i, rem)
        if key in memo:
            return memo[key]
        res = None
        for b in range(k):
            if rem[b] >= sizes[i]:
                r2 = list(rem)
                r2[b] -= sizes[i]
                tail = go(i + 1, tuple(r2))
                if tail is not None:
                    res = [b] + tail
                    break
        memo[key] = res
        return res

    return go(0, tuple(counts))


# -- symmetry claims ------------------------------------------------------------------


def geometric_claims(poly: ConvexPolygon):
    k = len(poly)
    rot = 1
    for d in range(k, 0, -1):
        if k % d == 0:
            g = congruence_map(poly, poly, 0, k // d, allow_reflection=False)
            if g is not None:
                rot = d
                break
    mirror = any(
        (g := congruence_map(poly, poly, 0, j)) is not None and g.r == 1 for j in range(k)
    )
    return rot, mirror


def candidate_claims(rot, mirror):
    out = [(d, m) for d in range(rot, 0, -1) if rot % d == 0 for m in ((True, False) if mirror else (False,))]
    return sorted(out, key=lambda dm: -(dm[0] * (2 if dm[1] else 1)))


def make_rule(name, F, protos, children, zeta=None):
    """protos: list of (label, vertices); children: label -> [Child].
    Symmetry claims are the largest ones the dissection respects."""
    claims = {lb: geometric_claims(ConvexPolygon(vs)) for lb, vs in protos}
    while True:
        rule = SubstitutionRule(
            name,
            F,
            tuple(
                Prototile(lb, ConvexPolygon(vs), claims[lb][0], "self" if claims[lb][1] else "chiral")
                for lb, vs in protos
            ),
            {lb: tuple(children[lb]) for lb, _ in protos},
            zeta,
        )
        changed = False
        for lb, vs in protos:
            rep = _check_prototile(rule, rule.proto(lb))
            if rep.symmetric:
                continue
            for d, m in candidate_claims(*geometric_claims(ConvexPolygon(vs))):
                if d * (2 if m else 1) >= claims[lb][0] * (2 if claims[lb][1] else 1):
                    continue
                trial = SubstitutionRule(
                    name,
                    F,
                    tuple(
                        p if p.label != lb else Prototile(lb, p.polygon, d, "self" if m else "chiral")
                        for p in rule.prototiles
                    ),
                    rule.children,
                    zeta,
                )
                if _check_prototile(trial, trial.proto(lb)).symmetric:
                    claims[lb] = (d, m)
                    break
            else:
                claims[lb] = (1, False)
            changed = True
            break
        if not changed:
            return rule


# -- rules -------------------------------------------------------------------------------


def rule_small(n):
    F = field_init(n)
    T1, T2 = regular(F, n), triangle2(F)
    shapes = {"T1": T1, "T2": T2}
    _SHAPES.update(shapes)
    cols = {3: ({"T1": 1, "T2": 3}, {"T1": 4, "T2": 5}), 4: ({"T1": 1, "T2": 4}, {"T1": 2, "T2": 3})}[n]
    kids = {
        "T1": [Child(*c) for c in solve_t1(F, shapes, cols[0])],
        "T2": [Child(*c) for c in solve(shapes, [F.zeta * v for v in T2], cols[1], twisted(F))],
    }
    return make_rule(f"sigma{n}", F, list(shapes.items()), kids)


def rule_sigma6():
    F = field_init(6)
    z = F.zeta
    T1, T2, T3 = regular(F, 6), triangle2(F), regular(F, 3)
    T4 = [z * v for v in T3]
    shapes = {"T1": T1, "T2": T2, "T3": T3}
    _SHAPES.update(shapes)
    kids = {
        "T1": [Child(*c) for c in solve_t1(F, shapes, {"T1": 1, "T2": 6, "T3": 24})],
        "T2": [Child(*c) for c in solve(shapes, [z * v for v in T2], {"T2": 5, "T3": 4}, twisted(F))],
        "T3": [Child("T4", Isometry.identity(F))],
        "T4": [
            Child(*c)
            for c in solve(shapes, [z * v for v in T4], {"T1": 6, "T3": 13}, [F.mu.inverse() * u for u in units(F)])
        ],
    }
    return make_rule("sigma6", F, list(shapes.items()) + [("T4", T4)], kids)


def rule_sigma8():
    F = field_init(8)
    z = F.zeta
    w = F.ext(F.xi ** 2)
    T1, T2 = regular(F, 8), triangle2(F)
    T3 = [F.ext(0), F.ext(1), w * w]
    T4 = [F.ext(0), F.ext(1), 1 + w, w]
    shapes = {"T1": T1, "T2": T2, "T3": T3, "T4": T4}
    _SHAPES.update(shapes)
    kids = {
        "T1": [Child(*c) for c in solve_t1(F, shapes, {"T1": 1, "T2": 8, "T3": 32, "T4": 16})],
        "T2": [Child(*c) for c in solve(shapes, [z * v for v in T2], {"T2": 5, "T3": 4}, twisted(F))],
        "T3": [Child("T5", Isometry.identity(F))],
        "T4": [Child("T6", Isometry.identity(F))],
        "T5": [Child(*c) for c in load_frame(F, "s8_T5")],
        "T6": [Child(*c) for c in load_frame(F, "s8_T6")],
    }
    protos = list(shapes.items()) + [("T5", [z * v for v in T3]), ("T6", [z * v for v in T4])]
    return make_rule("sigma8", F, protos, kids)


def rule_sigma5():
    F = field_init(5)
    z = F.zeta
    x = F.ext(F.xi)
    T1, T2 = regular(F, 5), triangle2(F)
    B = [F.ext(0), F.ext(1), x ** 3]  # isosceles, apex 108 degrees
    S = [F.ext(0), F.ext(1), x]  # isosceles, apex 36 degrees
    _SHAPES.update({"T1": T1, "T2": T2, "B": B, "S": S})
    shapes = {"T1": T1, "T2": T2, "B": B, "S": S}
    U = units(F)
    ident = Isometry.identity(F)

    # sigma5(T1): 5-fold symmetric
    items = solve_t1(F, shapes, {"T1": 1, "T2": 5, "B": 20})
    c5 = z * center(T1)
    rot = Isometry(x ** 2, 0, c5 - x ** 2 * c5)
    group = [ident]
    for _ in range(4):
        group.append(rot.compose(group[-1]))
    kids = {"T1": assign(items, group, {"T1": [("T1", 1)], "T2": [("T2", 5)], "B": [("T4", 5), ("T5", 15)]})}

    # sigma5(T2), solved in the frame {0, 2 conj(zeta), c}
    c = F.ext(F.c)
    minv = F.mu.inverse()
    items = solve({"T2": T2, "B": B, "S": S}, [F.ext(0), 2 * z.conj(), c], {"T2": 3, "B": 4, "S": 4}, U)
    items = [(nm, Isometry(minv * g.a, g.r, minv * g.t)) for nm, g in items]
    kids["T2"] = assign(items, [ident], {"T2": [("T2", 3)], "B": [("T5", 4)], "S": [("T6", 2), ("T7", 2)]})

    for src, dst in zip(("T3", "T4", "T5", "T6", "T7"), ("T8", "T9", "T10", "T11", "T12")):
        kids[src] = [Child(dst, ident)]
    M = MATRICES["sigma5"]
    labels = [f"T{i}" for i in range(1, 13)]
    for j, lb in enumerate(labels[7:], start=7):
        items = load_frame(F, f"s5_{lb}")
        col = {labels[i]: M[i][j] for i in range(12)}
        mapping = {
            "T1": [("T1", col["T1"])],
            "B": [(l, col[l]) for l in ("T3", "T4", "T5")],
            "S": [(l, col[l]) for l in ("T6", "T7")],
        }
        # the frame mirror, conjugated into real coordinates
        tv = B if lb in ("T8", "T9", "T10") else S
        m_frame = Isometry(tv[2], 1, F.ext(0))
        Mi = Isometry(minv, 0, F.ext(0))
        mreal = Mi.compose(m_frame).compose(Mi.inverse())
        try:
            kids[lb] = assign(items, [ident, mreal], mapping)
        except RuntimeError:  # strip-built dissections have no mirror symmetry
            kids[lb] = assign(items, [ident], mapping)

    protos = [("T1", T1), ("T2", T2)] + [(f"T{i}", B) for i in (3, 4, 5)] + [(f"T{i}", S) for i in (6, 7)]
    protos += [(f"T{i}", [z * v for v in vs]) for i, (_, vs) in zip(range(8, 13), protos[2:7])]
    return make_rule("sigma5", F, protos, kids)


def rule_pinwheel():
    F = field_init(4)
    z = F.zeta
    P = [F.ext(0), F.ext(2), 2 + F.ext(F.xi ** 2)]
    _SHAPES["T1"] = P
    # two dissections exist; only the one mixing both chiralities generates
    # dense orientations (with all children reflected they stay in a finite set)
    S = MRVSearch([z * v for v in P], {"T1": Shape("T1", P)}, {"T1": 5}, twisted(F))
    S.collect = []
    S.solve()
    sol = next(s for s in S.collect if len({p.motion.r for p in s}) == 2)
    kids = {"T1": [Child(p.shape, p.motion) for p in sol]}
    return make_rule("pinwheel", F, [("T1", P)], kids)


BUILDERS = {
    "sigma3": lambda: rule_small(3),
    "sigma4": lambda: rule_small(4),
    "sigma5": rule_sigma5,
    "sigma6": rule_sigma6,
    "sigma8": rule_sigma8,
    "pinwheel": rule_pinwheel,
}


def main(names):
    ok = True
    for name in names or list(BUILDERS):
        _SHAPES.clear()
        rule = BUILDERS[name]()
        rep = validate_rule(rule, threads=1)
        print(rep.summary())
        if not rep.valid:
            ok = False
        if rep.matrix != MATRICES[name]:
            print(f"{name}: matrix differs from the published one", file=sys.stderr)
            ok = False
        text = serialize_rule(rule)
        assert rules_equal(parse_rule_file(text), rule)
        if rep.valid:
            (OUT / f"{name}.tile").write_text(f"# generated by tools/build_rules.py\n{text}")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
