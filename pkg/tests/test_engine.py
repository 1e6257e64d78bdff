import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tilekit import engine
from tilekit._kernel_py import expand_step as py_step
from tilekit.analysis import count_matrix, matrix_power
from tilekit.engine import (
    Box,
    Disk,
    Patch,
    PlacedTile,
    clip_expand,
    expand,
    is_rotation_invariant,
    seed_patch,
    symmetric_patch,
    tile_key_set,
    tile_vertices,
    tiles_meeting,
)
from tilekit.geometry import Isometry, area2, disjoint_interiors
from tilekit.ruleset import RuleError, builtin_rule, parse_rule_file

from test_ruleset import GRID, shipped

RULES = shipped()
IDS = [r.name for r in RULES]


def test_counts_examples():
    s4 = builtin_rule("sigma4")
    assert expand(seed_patch(s4, "T1"), 1).counts() == {"T1": 1, "T2": 4}
    assert expand(seed_patch(s4, "T1"), 2).counts() == {"T1": 9, "T2": 16}
    s6 = builtin_rule("sigma6")
    p = expand(seed_patch(s6, "T3"), 1)
    assert p.counts() == {"T1": 0, "T2": 0, "T3": 0, "T4": 1}


def test_zero_steps_and_errors():
    s3 = builtin_rule("sigma3")
    p = seed_patch(s3, "T2")
    assert expand(p, 0) is p
    with pytest.raises(ValueError):
        expand(p, -1)
    with pytest.raises(KeyError):
        seed_patch(s3, "T7")
    grid = parse_rule_file(GRID)
    with pytest.raises(RuleError):
        symmetric_patch(grid, 1)


@pytest.mark.parametrize("rule", RULES, ids=IDS)
def test_counts_follow_matrix(rule):
    M = count_matrix(rule).tolist()
    for i, lab in enumerate(rule.labels):
        p = seed_patch(rule, lab)
        for k in range(1, 4):
            p = expand(p, 1)
            Mk = matrix_power(M, k)
            assert p.count_vector() == [row[i] for row in Mk]


@pytest.mark.parametrize("rule", RULES, ids=IDS)
def test_area_conservation(rule):
    c = rule.inflation
    for lab in rule.labels:
        base = area2(rule.proto(lab).polygon)
        p = expand(seed_patch(rule, lab), 2)
        total = sum((area2(tile_vertices(t, rule)) for t in p), 0)
        assert total == base * (c * c)


@pytest.mark.parametrize("rule", RULES, ids=IDS)
def test_disjointness_spot_check(rule):
    p = expand(seed_patch(rule, "T1"), 2)
    polys = [tile_vertices(t, rule) for t in p]
    boxes = [tuple(f(v.to_complex().real for v in q.vertices) for f in (min, max)) + tuple(f(v.to_complex().imag for v in q.vertices) for f in (min, max)) for q in polys]
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            a, b = boxes[i], boxes[j]
            if a[1] < b[0] - 1e-9 or b[1] < a[0] - 1e-9 or a[3] < b[2] - 1e-9 or b[3] < a[2] - 1e-9:
                continue
            assert disjoint_interiors(polys[i], polys[j]), (i, j)


@pytest.mark.parametrize("rule", RULES, ids=IDS)
def test_addresses_are_canonical(rule):
    p = expand(seed_patch(rule, "T1"), 3)
    rows = [tuple(r) for r in p.addresses]
    assert rows == sorted(rows)
    assert len(set(rows)) == len(rows)
    assert all(len(t.address) == 3 for t in p.tiles[:5])


@pytest.mark.parametrize("rule", [r for r in RULES if r.name != "pinwheel"], ids=lambda r: r.name)
def test_symmetric_patch_invariance_and_nesting(rule):
    prev = None
    for k in range(0, 4):
        p = symmetric_patch(rule, k)
        assert is_rotation_invariant(p)
        if prev is not None:
            # the previous patch region lies inside the new one: every old vertex
            # is covered by some tile of the new patch
            region = Disk(0.0, 0.0, 0.0)
            assert tiles_meeting(p, region).any()
            verts = np.concatenate([v for v in prev.float_vertices()])
            new_polys = p.float_vertices()
            for z in verts[:: max(1, len(verts) // 50)]:
                assert any(_inside(z, poly) for poly in new_polys)
        prev = p


def _inside(z, poly, eps=1e-9):
    w = np.roll(poly, -1)
    return bool(np.all(((w - poly).conj() * (z - poly)).imag >= -eps))


def test_sigma3_symmetric_small():
    s3 = builtin_rule("sigma3")
    p = symmetric_patch(s3, 1)
    assert p.counts() == {"T1": 1, "T2": 3}
    p3 = symmetric_patch(s3, 3)
    M3 = matrix_power(count_matrix(s3).tolist(), 3)
    assert p3.count_vector() == [row[0] for row in M3]


def test_rotation_invariance_detects_asymmetry():
    s4 = builtin_rule("sigma4")
    assert not is_rotation_invariant(expand(seed_patch(s4, "T2"), 2))


@pytest.mark.parametrize("rule", RULES, ids=IDS)
def test_mirror_coherence(rule):
    """Expanding a reflected seed equals reflecting the expansion."""
    ctx = rule.field
    R = Isometry(ctx.ext(1), 1, ctx.ext(0))
    for lab in rule.labels:
        left = expand(seed_patch(rule, lab, R), 2)
        # Z^2 R Z^-2 = (mu^-2, 1, 0)
        R2 = Isometry(rule.mu.inverse() ** 2, 1, ctx.ext(0))
        right = {rule.tile_key(t.proto, R2.compose(t.motion)) for t in expand(seed_patch(rule, lab), 2)}
        assert tile_key_set(left) == right


@pytest.mark.parametrize("rule", RULES[:2], ids=IDS[:2])
def test_dissect_then_transform(rule):
    ctx = rule.field
    g = Isometry(ctx.ext(ctx.xi) * rule.mu, 1, ctx.zeta + 3)
    for lab in rule.labels:
        kids = expand(seed_patch(rule, lab, g), 1)
        G = rule.conjugated(g)
        expected = {
            G.apply_polygon(c.motion.apply_polygon(rule.proto(c.label).polygon)).canonical() for c in rule.children[lab]
        }
        got = {tile_vertices(t, rule).canonical() for t in kids}
        assert got == expected


def test_tile_vertices_simple():
    s4 = builtin_rule("sigma4")
    ctx = s4.field
    ident = PlacedTile("T2", Isometry.identity(ctx), ())
    assert tile_vertices(ident, s4).same_cycle(s4.proto("T2").polygon)
    shifted = PlacedTile("T2", Isometry(ctx.ext(1), 0, ctx.zeta), ())
    assert tile_vertices(shifted, s4).vertices == tuple(v + ctx.zeta for v in s4.proto("T2").polygon.vertices)


def test_clip_expand_matches_filter():
    s4 = builtin_rule("sigma4")
    region = Disk(0.0, 0.0, 1.0)
    full = expand(seed_patch(s4, "T1"), 6)
    brute = full.take(tiles_meeting(full, region))
    lazy = clip_expand(s4, "T1", 6, region)
    assert lazy.same_as(brute)
    box = Box(-3.0, 1.0, 4.0, 6.5)
    assert clip_expand(s4, "T1", 6, box).same_as(full.take(tiles_meeting(full, box)))


def test_clip_expand_extremes():
    s3 = builtin_rule("sigma3")
    assert len(clip_expand(s3, "T1", 4, Disk(1e6, 1e6, 1.0))) == 0
    full = expand(seed_patch(s3, "T1"), 4)
    assert clip_expand(s3, "T1", 4, Disk(0.0, 0.0, 1e6)).same_as(full)


def test_from_tiles_roundtrip():
    s6 = builtin_rule("sigma6")
    p = expand(seed_patch(s6, "T1"), 2)
    q = Patch.from_tiles(s6, p.tiles, p.depth)
    assert q.same_as(p)
    empty = Patch.from_tiles(s6, [], 2)
    assert len(empty) == 0 and empty.addresses.shape == (0, 2)


@pytest.mark.skipif(engine.KERNEL == "python", reason="compiled kernel not built")
@pytest.mark.parametrize("rule", RULES, ids=IDS)
def test_compiled_kernel_matches_python(rule, monkeypatch):
    p = expand(seed_patch(rule, "T1"), 3)
    monkeypatch.setattr(engine, "_step_compiled", py_step)
    q = expand(seed_patch(rule, "T1"), 3)
    assert p.same_as(q)


@pytest.mark.parametrize("threads", [1, 2, 4])
def test_thread_count_does_not_change_output(threads):
    s4 = builtin_rule("sigma4")
    base = expand(seed_patch(s4, "T1"), 7, threads=1)
    assert expand(seed_patch(s4, "T1"), 7, threads=threads).same_as(base)


def test_object_fallback_for_large_numbers():
    # pinwheel denominators grow (powers of 5); deep expansion must stay exact
    pin = builtin_rule("pinwheel")
    p = expand(seed_patch(pin, "T1"), 9)
    assert len(p) == 5**9
    t = p.tile(len(p) - 1)
    assert t.motion.a.norm2() == 1


@settings(max_examples=15)
@given(st.integers(0, 3), st.integers(1, 3))
def test_expand_is_composable(k1, k2):
    s3 = builtin_rule("sigma3")
    a = expand(expand(seed_patch(s3, "T2"), k1), k2)
    b = expand(seed_patch(s3, "T2"), k1 + k2)
    assert a.same_as(b)
