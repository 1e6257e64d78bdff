"""Driver for latsearch: exact shapes in, exact motions out."""
import subprocess, sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parent / 'src'))
from tilekit.numberfield import ExtScalar
from tilekit.geometry import Isometry, ConvexPolygon, congruence_map

BIN = HERE / 'latsearch'


def _binary():
    src = HERE / 'latsearch.cpp'
    if not BIN.exists() or BIN.stat().st_mtime < src.stat().st_mtime:
        subprocess.run(['g++', '-O2', '-w', '-std=c++17', '-o', str(BIN), str(src)], check=True)
    return str(BIN)


def coords(p: ExtScalar):
    assert p.v.is_zero() and p.u.den == 1, p
    return list(p.u.num)


def variants(F, verts, rotations, allow_reflection=True):
    out, seen = [], set()
    for r in ((0, 1) if allow_reflection else (0,)):
        for a in rotations:
            g = Isometry(a, r, F.ext(0))
            vs = [g(v) for v in verts]
            if r:
                vs = [vs[0]] + vs[:0:-1]
            key = frozenset(v.key() for v in vs)
            if key in seen:
                continue
            seen.add(key)
            out.append(vs)
    return out


def run(F, shapes, counts, target, rotations, mirror=None, prescribed=None, seed=1, max_nodes=10**6,
        max_sols=1, shuffle=False, timeout=None, preplaced=()):
    """shapes: dict name -> exact vertex list.  Returns list of solutions, each a list of
    (name, Isometry)."""
    names = list(shapes)
    d = F.degree
    lines = [f"{F.N} {d} " + " ".join(map(str, F.modulus))]
    allv = []
    for si, nm in enumerate(names):
        for vs in variants(F, shapes[nm], rotations):
            allv.append((si, vs))
    lines.append(str(len(allv)))
    for si, vs in allv:
        lines.append(f"{si} {len(vs)} " + " ".join(str(c) for v in vs for c in coords(v)))
    lines.append(f"{len(names)} " + " ".join(str(counts.get(nm, 0)) for nm in names))
    lines.append(f"{len(target)} " + " ".join(str(c) for v in target for c in coords(v)))
    if mirror is None:
        lines.append("0")
    else:
        cols = []
        for j in range(d):
            e = F.ext(F.xi_pow(j))
            cols.append(coords(mirror(e) - mirror.t))
        mat = [[cols[cc][rr] for cc in range(d)] for rr in range(d)]
        lines.append("1 " + " ".join(str(v) for row in mat for v in row) + " " + " ".join(map(str, coords(mirror.t))))
    if prescribed is None:
        lines.append("-1")
    else:
        lines.append(f"{len(prescribed)} " + " ".join(str(c) for v in prescribed for c in coords(v)))
    lines.append(str(len(preplaced)))
    for nm, vs in preplaced:
        lines.append(f"{names.index(nm)} {len(vs)} " + " ".join(str(c) for v in vs for c in coords(v)))
    lines.append(f"{seed} {max_nodes} {max_sols} {1 if shuffle else 0}")
    res = subprocess.run([_binary()], input="\n".join(lines) + "\n", capture_output=True, text=True, timeout=timeout)
    sols, cur = [], None
    for ln in res.stdout.splitlines():
        if ln == 'SOL':
            cur = []
        elif ln == 'END':
            sols.append(cur)
        else:
            ints = list(map(int, ln.split()))
            si, rest = ints[0], ints[1:]
            pts = [F.ext(F.from_coeffs(rest[i:i + d])) for i in range(0, len(rest), d)]
            nm = names[si]
            proto = ConvexPolygon(shapes[nm])
            placed = ConvexPolygon(pts)
            g = None
            for j in range(len(pts)):
                g = congruence_map(proto, placed, 0, j)
                if g is not None:
                    break
            assert g is not None
            cur.append((nm, g))
    return sols, res.stderr.strip()
