"""Acceptance suite: one PASS/FAIL line per criterion (run with ``-s`` or read
the captured output; the lines are also written straight to the terminal).

Reference values are copied from the published matrices and eigenvectors;
everything else is checked against independent computations.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import textwrap
import time

import mpmath
import pytest

from tilekit.analysis import (
    count_matrix,
    dto_witness,
    matrix_power,
    pf_data,
    primitivity_index,
    rational_angle_test,
    vertex_stars,
)
from tilekit.engine import expand, is_rotation_invariant, seed_patch, symmetric_patch, tile_key_set, tile_vertices
from tilekit.geometry import area2
from tilekit.numberfield import field_init
from tilekit.ruleset import BUILTIN_RULES, RuleError, builtin_rule, validate_rule

SIGMA = ("sigma3", "sigma4", "sigma5", "sigma6", "sigma8")

PUBLISHED = {
    "sigma3": [[1, 4], [3, 5]],
    "sigma4": [[1, 2], [4, 3]],
    "sigma6": [
        [1, 0, 0, 6],
        [6, 5, 0, 0],
        [24, 4, 0, 13],
        [0, 0, 1, 0],
    ],
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
}

LAMBDA2 = {
    "sigma3": lambda: mpmath.mpf(7),
    "sigma4": lambda: mpmath.mpf(5),
    "sigma5": lambda: 6 + mpmath.sqrt(5),
    "sigma6": lambda: mpmath.mpf(7),
    "sigma8": lambda: 5 + 2 * mpmath.sqrt(2),
}


def _w5():
    s = mpmath.sqrt(5)
    a = (mpmath.mpf(1) + 5 * s) / 62
    phi = (1 + s) / 2
    inv = 1 / (6 + s)
    return [(15 + 13 * s) / 62, (12 - 2 * s) / 31, a, a, a, inv, inv, phi, phi, phi, 1, 1]


PRIMITIVITY = {"sigma6": 3, "sigma8": 4, "sigma5": 5}

RESULTS: dict[int, tuple[bool, str]] = {}


def _load(name):
    try:
        return builtin_rule(name)
    except (RuleError, FileNotFoundError) as exc:
        return exc


def _report(capsys, num: int, ok: bool, detail: str, elapsed: float) -> None:
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  ({elapsed:.2f} s) {detail}"
    RESULTS[num] = (ok, line)
    with capsys.disabled():
        print("\n" + line)


@pytest.fixture(scope="module")
def rules():
    return {name: _load(name) for name in BUILTIN_RULES}


def _finish(capsys, num, problems, t0, extra=""):
    elapsed = time.perf_counter() - t0
    detail = "; ".join(problems) if problems else extra
    _report(capsys, num, not problems, detail, elapsed)
    return elapsed


def test_criterion_01_matrix_fidelity(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    for name in SIGMA:
        rule = rules[name]
        if isinstance(rule, Exception):
            problems.append(f"{name}: rule unavailable")
            continue
        if count_matrix(rule).tolist() != PUBLISHED[name]:
            problems.append(f"{name}: matrix differs")
    elapsed = _finish(capsys, 1, problems, t0, "all five matrices match exactly")
    assert elapsed < 10
    _assert_or_xfail(problems)


def _assert_or_xfail(problems):
    # a criterion that fails only because a rule could not be constructed is an
    # expected failure (see README); anything else is a real failure
    if not problems:
        return
    if all("unavailable" in p for p in problems):
        pytest.xfail("; ".join(problems))
    pytest.fail("; ".join(problems))


def test_criterion_02_dissection_certificates(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    for name, rule in rules.items():
        if isinstance(rule, Exception):
            problems.append(f"{name}: rule unavailable")
            continue
        rep = validate_rule(rule)
        if not rep.valid:
            problems.append(f"{name}: invalid")
        for p in rep.prototiles:
            if not (p.congruent and p.contained and p.disjoint and p.area):
                problems.append(f"{name}/{p.label}: check failed")
    elapsed = _finish(capsys, 2, problems, t0, f"checks (i)-(iv) hold for {len(rules)} rules")
    assert elapsed < 60
    _assert_or_xfail(problems)


def test_criterion_03_spectra(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    tol = mpmath.mpf("1e-9")
    with mpmath.workdps(40):
        for name in SIGMA:
            rule = rules[name]
            if isinstance(rule, Exception):
                problems.append(f"{name}: rule unavailable")
                continue
            data = pf_data(count_matrix(rule).tolist(), precision=160)
            if abs(data.pf_value - LAMBDA2[name]()) >= tol:
                problems.append(f"{name}: pf value {mpmath.nstr(data.pf_value, 15)}")
            if name == "sigma6":
                left = [mpmath.mpf(x) / 16 for x in (6, 2, 1, 7)]
                right = [mpmath.mpf(x) / 12 for x in (1, 3, 7, 1)]
                if max(abs(a - b) for a, b in zip(data.left, left)) >= tol:
                    problems.append("sigma6: left eigenvector")
                if max(abs(a - b) for a, b in zip(data.right, right)) >= tol:
                    problems.append("sigma6: right eigenvector")
            if name == "sigma5":
                w = _w5()
                tot = sum(w)
                if max(abs(a - b / tot) for a, b in zip(data.left, w)) >= tol:
                    problems.append("sigma5: left eigenvector differs from w")
    elapsed = _finish(capsys, 3, problems, t0, "PF values and eigenvectors within 1e-9")
    assert elapsed < 10
    _assert_or_xfail(problems)


def test_criterion_04_primitivity(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    found = {}
    for name in SIGMA:
        rule = rules[name]
        if isinstance(rule, Exception):
            problems.append(f"{name}: rule unavailable")
            continue
        idx = primitivity_index(count_matrix(rule).tolist())
        found[name] = idx
        want = PRIMITIVITY.get(name)
        if want is not None and idx != want:
            problems.append(f"{name}: index {idx}, expected {want}")
        if want is None and (idx is None or idx > 2):
            problems.append(f"{name}: index {idx}, expected <= 2")
    detail = " ".join(f"{k}={v}" for k, v in found.items())
    elapsed = _finish(capsys, 4, problems, t0, detail)
    assert elapsed < 1
    _assert_or_xfail(problems)


def test_criterion_05_irrational_angles(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    # the inflation scalar depends only on n, so this does not need the rule files
    for n in (3, 4, 5, 6, 8):
        if rational_angle_test(field_init(n).zeta, 10**4) is not None:
            problems.append(f"n={n}: rational angle")
    pin = rules["pinwheel"]
    ctx = field_init(4)
    two_plus_i = ctx.ext(2) + ctx.ext(ctx.xi_pow(2))
    if isinstance(pin, Exception) or pin.zeta != two_plus_i:
        problems.append("pinwheel: inflation scalar is not 2+i")
    elif rational_angle_test(pin.zeta, 10**4) is not None:
        problems.append("pinwheel: rational angle")
    elapsed = _finish(capsys, 5, problems, t0, "no q <= 10^4 for n=3,4,5,6,8 and 2+i")
    assert elapsed < 30
    _assert_or_xfail(problems)


def test_criterion_06_dto_witnesses(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    s3 = rules["sigma3"]
    wit = dto_witness(s3, 3)
    if wit is None or wit.rotation != s3.zeta / s3.zeta.conj():
        problems.append("sigma3: no witness with rotation zeta/conj(zeta) at depth <= 3")
    depths = {}
    for name, rule in rules.items():
        if isinstance(rule, Exception):
            problems.append(f"{name}: rule unavailable")
            continue
        w = dto_witness(rule, 4)
        if w is None:
            problems.append(f"{name}: no witness at depth <= 4")
        else:
            depths[name] = w.depth
    detail = "witness depths " + " ".join(f"{k}={v}" for k, v in depths.items())
    elapsed = _finish(capsys, 6, problems, t0, detail)
    assert elapsed < 300
    _assert_or_xfail(problems)


def test_criterion_07_symmetry(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    for name in SIGMA:
        rule = rules[name]
        if isinstance(rule, Exception):
            problems.append(f"{name}: rule unavailable")
            continue
        prev = None
        for k in range(4):
            patch = symmetric_patch(rule, k)
            if not is_rotation_invariant(patch):
                problems.append(f"{name}: k={k} not invariant")
            keys = tile_key_set(patch)
            if prev is not None and not prev <= keys:
                problems.append(f"{name}: k={k} does not contain k={k - 1}")
            prev = keys
    _finish(capsys, 7, problems, t0, "exact n-fold invariance and nesting for k <= 3")
    _assert_or_xfail(problems)


def test_criterion_08_engine_matrix_consistency(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    for name, rule in rules.items():
        if isinstance(rule, Exception):
            problems.append(f"{name}: rule unavailable")
            continue
        M = count_matrix(rule).tolist()
        c = rule.inflation
        for i, label in enumerate(rule.labels):
            seed = seed_patch(rule, label)
            base = area2(rule.proto(label).polygon)
            patch = seed
            scale = 1
            for k in range(1, 5):
                patch = expand(patch, 1)
                scale = c * scale
                Mk = matrix_power(M, k)
                counts = patch.counts()
                if [counts[lab] for lab in rule.labels] != [Mk[j][i] for j in range(len(M))]:
                    problems.append(f"{name}: counts of sigma^{k}({label})")
                if sum((area2(tile_vertices(t, rule)) for t in patch), 0) != base * scale:
                    problems.append(f"{name}: area of sigma^{k}({label})")
    _finish(capsys, 8, problems, t0, "counts = columns of M^k and exact area for k <= 4")
    _assert_or_xfail(problems)


def _stabilisation_depth(rule, kmax=6):
    prev = None
    for k in range(1, kmax + 1):
        rep = vertex_stars(expand(seed_patch(rule, "T1"), k), use_pseudo=True)
        if prev is not None and rep.stars == prev:
            return k - 1, len(prev)
        prev = rep.stars
    return None, len(prev)


def test_criterion_09_vertex_stars(rules, capsys):
    t0 = time.perf_counter()
    problems = []
    found = []
    for name in ("sigma3", "sigma4"):
        depth, classes = _stabilisation_depth(rules[name])
        if depth is None or depth > 5:
            problems.append(f"{name}: star classes not stable by depth 5")
        found.append(f"{name} stable from depth {depth} ({classes} classes)")
    rep = vertex_stars(expand(seed_patch(rules["sigma8"], "T1"), 3), use_pseudo=True)
    if not rep.non_vertex_to_vertex:
        problems.append("sigma8: depth 3 is vertex-to-vertex")
    found.append("sigma8 depth 3 not vertex-to-vertex")
    _finish(capsys, 9, problems, t0, "; ".join(found))
    _assert_or_xfail(problems)


PERF_SCRIPT = textwrap.dedent(
    """
    import json, resource, sys, time
    import numpy as np
    from tilekit.ruleset import builtin_rule
    from tilekit.engine import Disk, clip_expand, expand, seed_patch
    from tilekit.render import RenderOptions, to_svg

    out = {}
    s4 = builtin_rule("sigma4")
    t = time.perf_counter()
    big = expand(seed_patch(s4, "T1"), 9)
    out["expand_time"] = time.perf_counter() - t
    out["expand_tiles"] = len(big)
    del big
    out["clip"] = {}
    for name in ("sigma3", "sigma4", "sigma5", "sigma6", "sigma8", "pinwheel"):
        try:
            rule = builtin_rule(name)
        except Exception:
            continue
        t = time.perf_counter()
        clip_expand(rule, "T1", 12, Disk(0.0, 0.0, 1.0))
        out["clip"][name] = time.perf_counter() - t
    patch = expand(seed_patch(s4, "T1"), 8)
    patch = patch.take(np.arange(len(patch)) < 100000)
    out["render_tiles"] = len(patch)
    t = time.perf_counter()
    to_svg(patch, RenderOptions())
    out["render_time"] = time.perf_counter() - t
    out["max_rss_bytes"] = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024
    print(json.dumps(out))
    """
)


def test_criterion_10_performance(capsys):
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-c", PERF_SCRIPT], capture_output=True, text=True, check=True)
    res = json.loads(proc.stdout.strip().splitlines()[-1])
    problems = []
    if res["expand_tiles"] < 10**6 or res["expand_time"] > 60:
        problems.append(f"expand {res['expand_tiles']} tiles in {res['expand_time']:.1f} s")
    if res["max_rss_bytes"] > 4 * 2**30:
        problems.append(f"peak memory {res['max_rss_bytes'] / 2**30:.2f} GiB")
    slow = {k: v for k, v in res["clip"].items() if v > 5}
    if slow:
        problems.append(f"clip_expand over 5 s: {slow}")
    if res["render_tiles"] < 10**5 or res["render_time"] > 10:
        problems.append(f"render {res['render_tiles']} tiles in {res['render_time']:.1f} s")
    detail = (
        f"expand {res['expand_tiles']} tiles {res['expand_time']:.1f} s, "
        f"peak {res['max_rss_bytes'] / 2**20:.0f} MiB; clip depth 12 max "
        f"{max(res['clip'].values()):.2f} s; SVG of {res['render_tiles']} tiles {res['render_time']:.1f} s"
    )
    _finish(capsys, 10, problems, t0, detail)
    assert not problems


def _cli(args, threads, tmp_path):
    env = dict(os.environ, TILEKIT_THREADS=str(threads))
    subprocess.run([sys.executable, "-m", "tilekit.cli", *args], env=env, check=True, capture_output=True, cwd=tmp_path)


def test_criterion_11_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    outputs = []
    for run, threads in enumerate((1, 4, 4, 2)):
        d = tmp_path / f"run{run}"
        d.mkdir()
        _cli(["expand", "--rule", "builtin:sigma8", "--steps", "3", "--out", "patch.json"], threads, d)
        _cli(["render", "--rule", "builtin:sigma3", "--steps", "4", "--color", "by-orientation-hue", "--out", "a.svg"], threads, d)
        _cli(["render", "patch.json", "--out", "b.svg"], threads, d)
        _cli(["symmetric", "--rule", "builtin:sigma6", "--steps", "3", "--out", "sym.json"], threads, d)
        outputs.append({f: (d / f).read_bytes() for f in ("patch.json", "a.svg", "b.svg", "sym.json")})
    problems = [f"{f} differs" for f in outputs[0] if any(o[f] != outputs[0][f] for o in outputs[1:])]
    _finish(capsys, 11, problems, t0, "JSON and SVG byte-identical over 4 runs with 1, 2 and 4 threads")
    assert not problems


def test_zz_summary(capsys):
    # printed last so the per-criterion lines are also available in one block
    with capsys.disabled():
        print("\nacceptance summary:")
        for num in sorted(RESULTS):
            print("  " + RESULTS[num][1])
