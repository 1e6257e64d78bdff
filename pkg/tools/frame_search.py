"""Searches that produced the stored frame dissections in tools/solutions/.

The large prototiles of sigma5 (T8..T12) and sigma8 (T5, T6) are dissected in
the frame where the target is c*T for a small prototile T; build_rules.py maps
the motions back.  Output lines are ``SHAPE Isometry(...)`` and can be saved
directly as tools/solutions/<rule>_<label>.txt.

    python3 tools/frame_search.py s8 T5 [budget]
    python3 tools/frame_search.py s5 T8 [budget] [seeds]     # whole-target search
    python3 tools/frame_search.py s5-strips T11 [budget] [seeds] [max tiles per strip]

The strip mode cuts the acute target into trapezoids parallel to its base.
Lengths are p + q*phi; a cut at L leaves a base of length (q-p) + p*phi, so
cuts need p, q >= 0.  Areas in units of the small triangle: pentagon 1+3phi,
obtuse triangle phi, acute triangle 1, so each strip fixes its tile counts
up to one free parameter.
"""

from __future__ import annotations

import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))
sys.path.insert(0, str(ROOT / "tools"))

import latdrive  # noqa: E402
from build_rules import regular, units  # noqa: E402
from dissect import MRVSearch, Shape  # noqa: E402
from tilekit.geometry import Isometry  # noqa: E402
from tilekit.numberfield import field_init  # noqa: E402

S5_COUNTS = {"T8": (2, 47, 22), "T9": (6, 35, 18), "T10": (4, 41, 20), "T11": (3, 15, 26), "T12": (1, 21, 28)}


def sigma8(label, budget=200000):
    F = field_init(8)
    w = F.ext(F.xi ** 2)
    i_ = w * w
    T1 = regular(F, 8)
    T3 = [F.ext(0), F.ext(1), i_]
    T4 = [F.ext(0), F.ext(1), 1 + w, w]
    shapes = {"T1": Shape("T1", T1), "T3": Shape("T3", T3), "T4": Shape("T4", T4)}
    c = F.ext(F.c)
    ident = Isometry.identity(F)
    if label == "T5":
        tgt, cnt = [c * v for v in T3], {"T1": 2, "T3": 25, "T4": 12}
        group = [ident, Isometry(i_, 1, F.ext(0))]  # mirror in y = x
    else:
        tgt, cnt = [c * v for v in T4], {"T1": 4, "T3": 24, "T4": 17}
        group = [ident, Isometry(F.ext(-1), 0, c * (1 + w))]  # half turn about the centre
    for seed in range(10000):
        S = MRVSearch(tgt, shapes, dict(cnt), [w ** k for k in range(8)], group=group,
                      seed=None if seed == 0 else seed, max_nodes=budget)
        try:
            if S.solve():
                return [(p.shape, p.motion) for p in S.placed]
        except TimeoutError:
            pass
    return None


def _s5_setup():
    F = field_init(5)
    x = F.ext(F.xi)
    shapes = {"T1": regular(F, 5), "B": [F.ext(0), F.ext(1), x ** 3], "S": [F.ext(0), F.ext(1), x]}
    return F, x, shapes


def sigma5_whole(label, budget=20000, seeds=400):
    F, x, shapes = _s5_setup()
    tv = shapes["B"] if label in ("T8", "T9", "T10") else shapes["S"]
    t, b, s = S5_COUNTS[label]
    mirror = Isometry(tv[2], 1, F.ext(0))  # apex bisector
    for seed in range(1, seeds + 1):
        sols, _ = latdrive.run(F, shapes, {"T1": t, "B": b, "S": s}, [F.ext(F.c) * v for v in tv], units(F),
                               mirror=mirror, max_nodes=budget, seed=seed, shuffle=True)
        if sols:
            return sols[0]
    return None


def sigma5_strips(label, budget=50000, seeds=2, max_tiles=16):
    F, x, shapes = _s5_setup()
    phi = x - x ** 4
    total = S5_COUNTS[label]
    end = (5, 2)  # c = 5 + 2 phi
    size = lambda pq: pq[0] + pq[1] * 1.618034  # noqa: E731
    cuts = sorted(((p, q) for q in range(3) for p in range(8) if 0 < p + q <= 7 and size((p, q)) < size(end)), key=size)
    cuts.append(end)
    length = lambda pq: pq[0] * F.ext(1) + pq[1] * phi  # noqa: E731
    cache = {}

    def sq(pq):  # L^2 = (p^2 + q^2) + (2pq + q^2) phi
        p, q = pq
        return p * p + q * q, 2 * p * q + q * q

    def tile(a, b, cnt):
        if (a, b, cnt) not in cache:
            lo = length(b)
            poly = [F.ext(0), lo, lo * x] if a is None else [length(a), lo, lo * x, length(a) * x]
            found = None
            for seed in range(1, seeds + 1):
                sols, _ = latdrive.run(F, shapes, dict(zip(("T1", "B", "S"), cnt)), poly, units(F),
                                       max_nodes=budget, seed=seed, shuffle=seed > 1)
                if sols:
                    found = sols[0]
                    break
            cache[a, b, cnt] = found
        return cache[a, b, cnt]

    def options(a, b, rem):
        a0, a1 = sq(a) if a else (0, 0), sq(b)
        al, be = a1[0] - a0[0], a1[1] - a0[1]
        for t in range(min(al, be // 3, rem[0]) + 1):
            s, bb = al - t, be - 3 * t
            if s <= rem[2] and bb <= rem[1] and t + s + bb <= max_tiles:
                yield t, bb, s

    def dfs(a, rem):
        for b in cuts[cuts.index(a) + 1 if a else 0 :]:
            if a and not (b[1] >= a[1] and b[0] - a[0] + b[1] - a[1] >= 0):
                continue  # strip legs must be sums of tile edges
            for cnt in options(a, b, rem):
                if b == end and cnt != rem:
                    continue
                sol = tile(a, b, cnt)
                if not sol:
                    continue
                if b == end:
                    return sol
                rest = dfs(b, tuple(r - v for r, v in zip(rem, cnt)))
                if rest:
                    return sol + rest
        return None

    return dfs(None, total)


def main(argv):
    mode, label, *rest = argv
    t0 = time.time()
    args = [int(v) for v in rest]
    sol = {"s8": sigma8, "s5": sigma5_whole, "s5-strips": sigma5_strips}[mode](label, *args)
    if sol is None:
        print(f"no solution ({time.time() - t0:.1f} s)", file=sys.stderr)
        return 1
    for nm, g in sol:
        print(nm, g)
    print(f"found in {time.time() - t0:.1f} s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
