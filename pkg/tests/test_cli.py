import json
import subprocess
import sys
from pathlib import Path

import pytest

from tilekit.cli import run
from tilekit.render import patch_from_json

GRID = str(Path(__file__).parent / "data" / "grid.tile")


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_sigma6(capsys):
    code, out, _ = call(capsys, "validate", "--rule", "builtin:sigma6")
    assert code == 0
    assert "rule sigma6: valid" in out
    assert "    1   0   0   6\n    6   5   0   0\n   24   4   0  13\n    0   0   1   0" in out


def test_validate_report_file(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, _, _ = call(capsys, "validate", "--rule", GRID, "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["valid"] and doc["matrix"] == [[4]]


def test_validate_failure_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.tile"
    bad.write_text(Path(GRID).read_text().replace("translate=x^2;", "translate=3/2+x^2;"))
    code, out, _ = call(capsys, "validate", "--rule", str(bad))
    assert code == 1 and "INVALID" in out


def test_validate_edge_conflict_exit_1(capsys, tmp_path):
    bad = tmp_path / "arrows.tile"
    bad.write_text(Path(GRID).read_text().replace("edges=[+, +, -, -]", "edges=[+, +, +, -]").replace("mirror=self", "mirror=chiral"))
    code, out, _ = call(capsys, "validate", "--rule", str(bad))
    assert code == 1 and "opposite arrows" in out


def test_parse_error_exit_2(capsys, tmp_path):
    bad = tmp_path / "broken.tile"
    bad.write_text("tiling x n=4\nprototile A { vertices=[0, 1 }\n")
    code, _, err = call(capsys, "validate", "--rule", str(bad))
    assert code == 2 and "2:" in err


def test_expand_counts(capsys):
    code, out, _ = call(capsys, "expand", "--rule", "builtin:sigma4", "--seed", "T1", "--steps", "2", "--counts")
    assert code == 0 and out == "T1:9 T2:16\n"


def test_expand_json_and_region(capsys, tmp_path):
    path = tmp_path / "p.json"
    code, _, _ = call(capsys, "expand", "--rule", "builtin:sigma3", "--steps", "3", "--out", str(path))
    assert code == 0
    p = patch_from_json(path.read_text())
    assert p.counts() == {"T1": 85, "T2": 129} and p.depth == 3  # column 1 of M^3
    code, out, _ = call(capsys, "expand", "--rule", "builtin:sigma3", "--steps", "5", "--region", "disk:0,0,1", "--counts")
    assert code == 0 and out.startswith("T1:")
    code, out, _ = call(capsys, "expand", "--steps", "4", "--region", "box:0,0,1,1")
    assert code == 0 and "tiles" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["expand", "--steps", "-1"],
        ["expand", "--seed", "T9"],
        ["expand", "--region", "disk:1,2"],
        ["expand", "--region", "ring:0,0,1"],
        ["expand", "--rule", "builtin:nope"],
        ["expand", "--rule", "/no/such/file.tile"],
        ["render", "--precision", "20"],
        ["angle", "--bound", "0"],
        ["frobnicate"],
        [],
    ],
)
def test_usage_errors(capsys, argv):
    code, _, _ = call(capsys, *argv)
    assert code == 2


def test_help_exit_0(capsys):
    assert run(["--help"]) == 0


def test_symmetric(capsys, tmp_path):
    code, out, _ = call(capsys, "symmetric", "--rule", "builtin:sigma3", "--steps", "1", "--counts")
    assert code == 0
    assert out.splitlines() == ["T1:1 T2:3", "invariant under rotation by 2pi/3: yes"]
    path = tmp_path / "s.json"
    code, _, _ = call(capsys, "symmetric", "--rule", "builtin:sigma6", "--steps", "2", "--out", str(path))
    assert code == 0 and json.loads(path.read_text())["depth"] == 2


def test_analyze(capsys, tmp_path):
    path = tmp_path / "a.json"
    code, out, _ = call(capsys, "analyze", "--rule", "builtin:sigma6", "--out", str(path))
    assert code == 0
    assert "primitive: M^3 > 0" in out
    assert "left  0.375 0.125 0.0625 0.4375" in out
    doc = json.loads(path.read_text())
    assert doc["primitivity_index"] == 3 and doc["pf_value"].startswith("7.0")


def test_analyze_non_primitive(capsys, tmp_path):
    rule = tmp_path / "two.tile"
    rule.write_text(
        Path(GRID).read_text()
        .replace("edges=[+, +, -, -] ", "")
        + "prototile R { vertices=[0, 1, 1+x^2, x^2] rotsym=4 mirror=self anchor=0 }\n"
        "substitution R {\n  child R rot=1 translate=0;\n  child R rot=1 translate=1;\n"
        "  child R rot=1 translate=x^2;\n  child R rot=1 translate=1+x^2;\n}\n"
    )
    code, out, _ = call(capsys, "analyze", "--rule", str(rule))
    assert code == 1 and "not primitive" in out


def test_orientations(capsys):
    code, out, _ = call(capsys, "orientations", "--rule", "builtin:pinwheel", "--steps", "2")
    assert code == 0
    assert out.splitlines()[0] == "13 orientation classes among 25 tiles"


def test_stars(capsys, tmp_path):
    code, out, _ = call(capsys, "stars", "--rule", "builtin:sigma4", "--steps", "3", "--pseudo")
    assert code == 0 and "vertex-to-vertex: yes" in out
    code, out, _ = call(capsys, "stars", "--rule", "builtin:sigma8", "--steps", "2")
    assert code == 0 and "vertex-to-vertex: no" in out


def test_angle(capsys):
    code, out, _ = call(capsys, "angle", "--rule", "builtin:sigma8", "--bound", "10000")
    assert code == 0 and "no rational angle q <= 10000" in out
    code, out, _ = call(capsys, "angle", "--rule", "builtin:sigma3", "--bound", "100", "--steps", "3")
    assert code == 0 and "has infinite order" in out


def test_angle_rational_exit_1(capsys):
    code, out, _ = call(capsys, "angle", "--rule", GRID, "--bound", "10", "--steps", "1")
    assert code == 1
    assert "rational angle: (zeta/conj(zeta))^1 = 1" in out


def test_render(capsys, tmp_path):
    svg = tmp_path / "p.svg"
    code, _, _ = call(capsys, "render", "--rule", "builtin:sigma4", "--steps", "2", "--color", "by-orientation-hue", "--out", str(svg))
    assert code == 0
    text = svg.read_text()
    assert text.count("<polygon") == 25
    code, out, _ = call(capsys, "render", "--rule", "builtin:sigma4", "--steps", "2", "--color", "by-orientation-hue", "--precision", "128")
    assert out == text
    code, out, _ = call(capsys, "render", "--rule", "builtin:sigma3", "--symmetric", "--steps", "2")
    assert code == 0 and out.count("<polygon") == 31  # 13 + 18 from M^2


def test_render_from_json(capsys, tmp_path):
    js = tmp_path / "p.json"
    call(capsys, "expand", "--rule", "builtin:sigma6", "--steps", "2", "--out", str(js))
    code, out, _ = call(capsys, "render", str(js))
    assert code == 0 and out.count("<polygon") == 109  # 1 + 36 + 48 + 24 from M^2
    js.write_text(js.read_text()[:200])
    code, _, err = call(capsys, "render", str(js))
    assert code == 2 and "invalid JSON" in err


def test_module_entry_point(tmp_path):
    res = subprocess.run(
        [sys.executable, "-m", "tilekit.cli", "expand", "--steps", "1", "--counts"], capture_output=True, text=True
    )
    assert res.returncode == 0 and res.stdout == "T1:1 T2:4\n"
