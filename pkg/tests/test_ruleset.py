from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from tilekit.analysis import count_matrix
from tilekit.geometry import area2
from tilekit.ruleset import (
    BUILTIN_RULES,
    RuleError,
    RuleParseError,
    builtin_rule,
    check_edge_orientations,
    load_rule,
    parse_rule_file,
    rules_equal,
    serialize_rule,
    validate_rule,
)

DATA = Path(__file__).parent / "data"
GRID = (DATA / "grid.tile").read_text()
SHIPPED = list(BUILTIN_RULES)


def shipped():
    out = []
    for name in BUILTIN_RULES:
        try:
            out.append(builtin_rule(name))
        except (RuleError, FileNotFoundError):
            pass
    return out


def test_grid_rule_parses():
    rule = parse_rule_file(GRID)
    assert rule.name == "grid" and rule.labels == ["S"]
    assert rule.zeta == 2
    rep = validate_rule(rule)
    assert rep.valid
    assert rep.matrix == [[4]]


def test_zeta_defaults_to_two_plus_x():
    rule = parse_rule_file(
        "tiling t n=5\nprototile T1 { vertices=[0, 1, x] rotsym=1 mirror=chiral anchor=0 }\n"
        "substitution T1 { child T1 rot=1 translate=0; }\n"
    )
    assert rule.zeta == rule.field.zeta
    assert rule.field.zeta == rule.field.ext(2) + rule.field.ext(rule.field.xi)


def test_unknown_label_is_located():
    text = GRID.replace("child S rot=1 translate=1;", "child T9 rot=1 translate=1;")
    with pytest.raises(RuleParseError) as err:
        parse_rule_file(text)
    (issue,) = err.value.issues
    assert "unknown label" in issue.message
    assert (issue.line, issue.column) == (6, 9) or issue.line == 6


@pytest.mark.parametrize(
    "bad, message",
    [
        ("rot=1 translate=0;", "rot=2 translate=0;"),
        ("rot=1 translate=0;", "rot=0 translate=0;"),
        ("rot=1 translate=0;", "rot=1/0 translate=0;"),
        ("tiling grid n=4", "tiling grid n=four"),
        ("vertices=[0, 1, 1+x^2, x^2]", "vertices=[0, 1, 1+x^2, x^2"),
    ],
)
def test_parse_errors(bad, message):
    with pytest.raises(RuleParseError) as err:
        parse_rule_file(GRID.replace(bad, message, 1))
    assert err.value.issues
    assert all(i.line >= 1 and i.column >= 1 for i in err.value.issues)


def test_bad_symmetry_claim_rejected():
    with pytest.raises(RuleParseError):
        parse_rule_file(GRID.replace("rotsym=1", "rotsym=4"))  # marks are not 4-fold symmetric


def test_validator_reports_failures():
    # overlapping children: move one square onto another
    text = GRID.replace("translate=x^2;", "translate=3/2+x^2;")
    rep = validate_rule(parse_rule_file(text))
    assert not rep.valid
    p = rep.prototiles[0]
    assert not p.disjoint and not p.contained
    assert "INVALID" in rep.summary()
    # missing child: area identity fails
    text = GRID.replace("  child S rot=1 translate=1+x^2;\n", "")
    rep = validate_rule(parse_rule_file(text))
    assert not rep.prototiles[0].area and rep.matrix == [[3]]


def test_edge_orientations():
    grid = parse_rule_file(GRID)
    rep = check_edge_orientations(grid)
    assert rep.applicable and rep.ok and rep.coincidences_checked == 4
    flipped = parse_rule_file(GRID.replace("edges=[+, +, -, -]", "edges=[+, +, +, -]").replace("mirror=self", "mirror=chiral"))
    rep = check_edge_orientations(flipped)
    assert not rep.ok
    assert any("children 0 (S) and 2 (S)" in c for c in rep.conflicts)
    unmarked = builtin_rule("sigma4")
    rep = check_edge_orientations(unmarked)
    assert not rep.applicable and rep.ok
    assert "not applicable" in rep.summary()


def test_builtin_examples():
    assert builtin_rule("sigma3") is builtin_rule("sigma3")
    s3 = builtin_rule("sigma3")
    assert validate_rule(s3).matrix == [[1, 4], [3, 5]]
    s6 = builtin_rule("sigma6")
    m6 = count_matrix(s6)
    assert m6.column(0) == [1, 6, 24, 0]
    assert [c.label for c in s6.children["T3"]] == ["T4"]
    s8 = builtin_rule("sigma8")
    assert len(s8.prototiles) == 6
    assert [c.label for c in s8.children["T3"]] == ["T5"]
    assert [c.label for c in s8.children["T4"]] == ["T6"]
    with pytest.raises(RuleError):
        builtin_rule("sigma7")


def test_sigma8_central_octagon_keeps_orientation():
    s8 = builtin_rule("sigma8")
    (central,) = [c for c in s8.children["T1"] if c.label == "T1"]
    assert central.motion.a == 1 and central.motion.r == 0


def test_prototile_conventions():
    for rule in shipped():
        if rule.name == "pinwheel":
            continue
        ctx = rule.field
        t2 = rule.proto("T2").polygon.vertices
        rot = ctx.xi if ctx.n % 2 else ctx.xi**2
        assert t2 == (ctx.ext(0), ctx.ext(2), ctx.ext(2 + rot))
        t1 = rule.proto("T1").polygon
        assert len(t1) == ctx.n
        vs = t1.vertices
        assert all((vs[(i + 1) % ctx.n] - vs[i]).norm2() == 1 for i in range(ctx.n))


def test_area_identity_sigma3():
    s3 = builtin_rule("sigma3")
    a1 = area2(s3.proto("T1").polygon)
    a2 = area2(s3.proto("T2").polygon)
    assert a1 * 7 == a1 * 1 + a2 * 3
    assert a2 / a1 == 2


def test_sigma6_areas_match_eigenvector():
    s6 = builtin_rule("sigma6")
    areas = [area2(p.polygon) for p in s6.prototiles]
    ratios = [a / areas[2] for a in areas]
    assert ratios == [6, 2, 1, 7]


@pytest.mark.parametrize("name", SHIPPED)
def test_builtin_valid_and_roundtrip(name):
    rule = builtin_rule(name)
    assert validate_rule(rule).valid
    text = serialize_rule(rule)
    again = parse_rule_file(text)
    assert rules_equal(rule, again)
    assert serialize_rule(again) == text


def test_load_rule_sources(tmp_path):
    path = tmp_path / "g.tile"
    path.write_text(GRID)
    assert rules_equal(load_rule(str(path)), parse_rule_file(GRID))
    assert load_rule("builtin:sigma4").name == "sigma4"


@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=5), min_size=2, max_size=2))
def test_translate_roundtrip(xy):
    x, y = xy
    text = GRID.replace("translate=1+x^2;", f"translate={x}+({y})*x^2;")
    rule = parse_rule_file(text)
    assert rules_equal(parse_rule_file(serialize_rule(rule)), rule)
