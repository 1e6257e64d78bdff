"""Command-line interface: one subcommand per operation.

Exit status: 0 success, 1 validation/analysis failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import mpmath

from . import analysis, engine, render
from .numberfield import format_scalar
from .ruleset import RuleError, RuleParseError, load_rule, validate_rule

VERBS = ("validate", "expand", "symmetric", "analyze", "orientations", "stars", "angle", "render")


class UsageError(Exception):
    pass


def _parse_region(text: str | None):
    if text is None:
        return None
    kind, _, rest = text.partition(":")
    try:
        vals = [float(x) for x in rest.split(",")]
    except ValueError:
        raise UsageError(f"bad region {text!r}") from None
    if kind == "disk" and len(vals) == 3 and vals[2] >= 0:
        return engine.Disk(*vals)
    if kind == "box" and len(vals) == 4 and vals[0] <= vals[2] and vals[1] <= vals[3]:
        return engine.Box(*vals)
    raise UsageError(f"bad region {text!r}; expected disk:CX,CY,R or box:X0,Y0,X1,Y1")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tilekit", description="Exact substitution tilings with dense tile orientations.")
    sub = p.add_subparsers(dest="verb", metavar="VERB")
    sub.required = True

    def add(name, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--rule", default="builtin:sigma4", help="builtin:NAME or path to a rule file")
        sp.add_argument("--out", help="write the main output to this file")
        return sp

    add("validate", "check the dissection certificates of a rule")
    for name, help_text in (
        ("expand", "expand a prototile"),
        ("orientations", "orientation census of an expanded prototile"),
        ("stars", "vertex stars of an expanded prototile"),
        ("render", "render a patch to SVG"),
    ):
        sp = add(name, help_text)
        sp.add_argument("--seed", default="T1", help="prototile label to expand")
        sp.add_argument("--steps", type=int, default=1, help="number of substitution steps")
        sp.add_argument("--region", help="disk:CX,CY,R or box:X0,Y0,X1,Y1; keep only tiles meeting it")
        if name == "expand":
            sp.add_argument("--counts", action="store_true", help="print per-label tile counts")
        if name == "stars":
            sp.add_argument("--pseudo", action="store_true", help="insert pseudo-vertices")
        if name == "render":
            sp.add_argument("patch", nargs="?", help="patch JSON file to render instead of expanding")
            sp.add_argument("--color", default="by-prototile", choices=render.COLOR_MODES)
            sp.add_argument("--precision", type=int, default=64, help="starting precision in bits (>= 53)")
            sp.add_argument("--symmetric", action="store_true", help="expand the centred T1 instead of --seed")
    sp = add("symmetric", "n-fold symmetric patch around the centred T1")
    sp.add_argument("--steps", type=int, default=1)
    sp.add_argument("--counts", action="store_true")
    sp = add("analyze", "substitution matrix, primitivity and Perron-Frobenius data")
    sp.add_argument("--precision", type=int, default=160, help="working precision in bits")
    sp = add("angle", "rational-angle test for the inflation scalar and a DTO witness")
    sp.add_argument("--bound", type=int, default=10000, help="largest denominator q to exclude")
    sp.add_argument("--steps", type=int, default=0, help="search a DTO witness up to this depth (0: skip)")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _counts_line(patch) -> str:
    counts = patch.counts()
    return " ".join(f"{lab}:{counts[lab]}" for lab in patch.rule.labels)


def _patch(args, rule):
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    if args.seed not in rule.labels:
        raise UsageError(f"unknown seed {args.seed!r}; labels are {' '.join(rule.labels)}")
    region = _parse_region(args.region)
    if region is not None:
        return engine.clip_expand(rule, args.seed, args.steps, region)
    return engine.expand(engine.seed_patch(rule, args.seed), args.steps)


def _cmd_validate(args, rule) -> int:
    rep = validate_rule(rule)
    edges = None
    if rep.valid:
        from .ruleset import check_edge_orientations

        if any(p.edge_orientations for p in rule.prototiles):
            edges = check_edge_orientations(rule)
    text = rep.summary() + "\n"
    if edges is not None:
        text += edges.summary() + "\n"
    print(text, end="")
    if args.out:
        doc = {
            "rule": rep.rule,
            "valid": rep.valid,
            "labels": rep.labels,
            "matrix": rep.matrix,
            "prototiles": [
                {k: getattr(p, k) for k in ("label", "congruent", "contained", "disjoint", "area", "symmetric", "messages")}
                for p in rep.prototiles
            ],
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0 if rep.valid and (edges is None or edges.ok) else 1


def _cmd_expand(args, rule) -> int:
    patch = _patch(args, rule)
    if args.counts:
        print(_counts_line(patch))
    if args.out:
        _emit(render.patch_to_json(patch), args.out)
    elif not args.counts:
        print(f"{len(patch)} tiles: {_counts_line(patch)}")
    return 0


def _cmd_symmetric(args, rule) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be >= 0")
    patch = engine.symmetric_patch(rule, args.steps)
    invariant = engine.is_rotation_invariant(patch)
    if args.counts:
        print(_counts_line(patch))
    else:
        print(f"{len(patch)} tiles: {_counts_line(patch)}")
    print(f"invariant under rotation by 2pi/{rule.field.n}: {'yes' if invariant else 'no'}")
    if args.out:
        _emit(render.patch_to_json(patch), args.out)
    return 0 if invariant else 1


def _cmd_analyze(args, rule) -> int:
    M = analysis.count_matrix(rule)
    idx = analysis.primitivity_index(M.tolist())
    lines = [f"rule {rule.name}: labels {' '.join(M.labels)}", "matrix:", str(M)]
    if idx is None:
        lines.append("not primitive")
        print("\n".join(lines))
        return 1
    lines.append(f"primitive: M^{idx} > 0")
    data = analysis.pf_data(M.tolist(), rule, precision=args.precision)
    lines.append(data.summary())
    text = "\n".join(lines) + "\n"
    print(text, end="")
    if args.out:
        doc = {
            "rule": rule.name,
            "labels": list(M.labels),
            "matrix": M.tolist(),
            "primitivity_index": idx,
            "pf_value": mpmath.nstr(data.pf_value, 30),
            "left": [mpmath.nstr(x, 30) for x in data.left],
            "right": [mpmath.nstr(x, 30) for x in data.right],
            "residuals": data.residuals,
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return 0


def _cmd_orientations(args, rule) -> int:
    patch = _patch(args, rule)
    census = analysis.orientation_census(patch)
    lines = [f"{len(census)} orientation classes among {len(patch)} tiles"]
    for oc in sorted(census):
        lines.append(f"  {census[oc]:8d}  {oc.proto} {'m' if oc.chirality else '+'} {oc.angle() * 360:.9f} deg")
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _cmd_stars(args, rule) -> int:
    patch = _patch(args, rule)
    rep = analysis.vertex_stars(patch, use_pseudo=args.pseudo)
    _emit(rep.summary() + "\n", args.out)
    return 0 if rep.angle_sums_ok else 1


def _cmd_angle(args, rule) -> int:
    if args.bound < 1:
        raise UsageError("--bound must be positive")
    zeta = rule.zeta
    q = analysis.rational_angle_test(zeta, args.bound)
    print(f"inflation scalar {format_scalar(zeta)}")
    ok = q is None
    if ok:
        print(f"no rational angle q <= {args.bound}")
        if analysis.has_infinite_order(zeta / zeta.conj()):
            print("certificate: zeta/conj(zeta) is not a root of unity")
    else:
        print(f"rational angle: (zeta/conj(zeta))^{q} = 1")
    if args.steps > 0:
        wit = analysis.dto_witness(rule, args.steps)
        if wit is None:
            print(f"no DTO witness up to depth {args.steps}")
            ok = False
        else:
            print(wit.summary())
    return 0 if ok else 1


def _cmd_render(args, rule) -> int:
    if args.patch:
        with open(args.patch, encoding="utf-8") as fh:
            patch = render.patch_from_json(fh.read(), rule if args.rule_given else None)
    elif args.symmetric:
        patch = engine.symmetric_patch(rule, args.steps)
    else:
        patch = _patch(args, rule)
    try:
        opts = render.RenderOptions(color_mode=args.color, precision=args.precision)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(render.to_svg(patch, opts), args.out)
    return 0


COMMANDS = {
    "validate": _cmd_validate,
    "expand": _cmd_expand,
    "symmetric": _cmd_symmetric,
    "analyze": _cmd_analyze,
    "orientations": _cmd_orientations,
    "stars": _cmd_stars,
    "angle": _cmd_angle,
    "render": _cmd_render,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    args.rule_given = any(a == "--rule" or a.startswith("--rule=") for a in argv)
    try:
        rule = load_rule(args.rule)
        return COMMANDS[args.verb](args, rule)
    except RuleParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (UsageError, RuleError, render.PatchFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
