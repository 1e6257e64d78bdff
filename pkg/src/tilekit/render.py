"""SVG rendering and JSON patch files.

SVG coordinates are the exact vertex coordinates rounded half-even to nine
decimals.  Rounding is decided from a float evaluation with an error bound;
values too close to a rounding tie are redone exactly (rational parts) or
with mpmath at increasing precision, so the output does not depend on
floating-point luck or on the starting precision.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .analysis import canonical_rotation
from .engine import Patch, PlacedTile
from .geometry import Isometry
from .numberfield import CycNum, ExtScalar, _basis_floats, embed
from .ruleset import SubstitutionRule, builtin_rule, BUILTIN_RULES

__all__ = [
    "RenderOptions",
    "to_svg",
    "patch_to_json",
    "patch_from_json",
    "PatchFormatError",
    "round_coordinate",
    "COLOR_MODES",
]

COLOR_MODES = ("by-prototile", "by-chirality", "by-orientation-hue")
HUE_STEPS = 720
_SCALE = 10**9

PALETTE = (
    "#e6b85c",
    "#5c9ee6",
    "#7cc46a",
    "#d9695f",
    "#a57ad1",
    "#5fc9c0",
    "#e08fc0",
    "#9c8c6c",
    "#c9d35a",
    "#6c7ea8",
    "#f0a070",
    "#70b0a0",
)


@dataclass(frozen=True)
class RenderOptions:
    color_mode: str = "by-prototile"
    stroke_width: float = 0.02
    precision: int = 64
    viewport: tuple[float, float, float, float] | None = None  # xmin, ymin, xmax, ymax
    margin: float = 0.5

    def __post_init__(self):
        if self.color_mode not in COLOR_MODES:
            raise ValueError(f"unknown color mode {self.color_mode!r}")
        if self.precision < 53:
            raise ValueError("precision must be at least 53 bits")


# -- correctly rounded coordinates ------------------------------------------------------


def _round_half_even(q: Fraction) -> int:
    fl = q.numerator // q.denominator
    rem = q - fl
    if rem > Fraction(1, 2) or (rem == Fraction(1, 2) and fl % 2):
        return fl + 1
    return fl


def _exact_part(z: CycNum, imag: bool) -> Fraction | None:
    """The real (or imaginary) part of z if it is rational."""
    if not imag:
        re2 = z + z.conj()
        return re2.coeffs[0] / 2 if re2.is_rational() else None
    d = z - z.conj()  # 2 i Im z
    if d.is_zero():
        return Fraction(0)
    sq = d * d  # -4 Im^2
    if not sq.is_rational():
        return None
    q = -sq.coeffs[0] / 4
    p, r = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if p * p != q.numerator or r * r != q.denominator:
        return None
    val = Fraction(p, r)
    sign = 1 if z.to_complex().imag > 0 else -1
    return sign * val


def round_coordinate(z: CycNum, imag: bool, precision: int = 64) -> int:
    """round_half_even(part(z) * 10^9) exactly."""
    q = _exact_part(z, imag)
    if q is not None:
        return _round_half_even(q * _SCALE)
    prec = precision
    while True:
        box = embed(z, prec)
        iv_part = box.im if imag else box.re
        lo, hi = (mpmath.mpf(x) for x in iv_part._mpi_)
        with mpmath.workprec(prec + 40):
            a = lo * _SCALE
            b = hi * _SCALE
            na = int(mpmath.floor(a + mpmath.mpf(0.5)))
            nb = int(mpmath.floor(b + mpmath.mpf(0.5)))
            # both ends round to the same integer and no tie point inside
            if na == nb and not (a <= na - mpmath.mpf(0.5) <= b) and not (a <= na + mpmath.mpf(0.5) <= b):
                return na
        prec *= 2
        if prec > 1 << 16:
            raise ArithmeticError("coordinate rounding did not terminate")


def _format(n: int) -> str:
    if n == 0:
        return "0"
    sign = "-" if n < 0 else ""
    a = abs(n)
    ip, fp = divmod(a, _SCALE)
    if fp == 0:
        return f"{sign}{ip}"
    return f"{sign}{ip}.{fp:09d}".rstrip("0")


def _round_rows(rows, den: int, ctx, imag: bool, precision: int) -> list[int]:
    """Rounded scaled coordinates for integer numerator rows over ``den``."""
    basis = np.array(_basis_floats(ctx.N, ctx.degree))
    b = basis.imag if imag else basis.real
    if rows.dtype == object:
        F = np.array([[float(x) for x in r] for r in rows], dtype=float).reshape(rows.shape)
    else:
        F = rows.astype(float)
    val = (F @ b) / float(den) * _SCALE
    mag = (np.abs(F) @ np.abs(b)) / float(den) * _SCALE
    err = mag * (16 * ctx.degree * 2.0**-53) + np.abs(val) * 2.0**-50 + 1e-300
    n = np.floor(val + 0.5)
    frac = val - n  # in [-0.5, 0.5)
    safe = (np.abs(frac - 0.5) > err) & (np.abs(frac + 0.5) > err) & (np.abs(val) < 2.0**52)
    out = [int(x) for x in n]
    for i in np.nonzero(~safe)[0]:
        row = rows[i]
        z = CycNum._normalise(ctx, [int(x) for x in row], den)
        out[i] = round_coordinate(z, imag, precision)
    return out


def _vertex_strings(patch: Patch, precision: int):
    """Per tile, list of (x, y) rounded integers (y flipped for SVG), ccw."""
    ctx = patch.ctx
    out: list = [None] * len(patch)
    for lab in range(len(patch.rule.labels)):
        idx, V, den = patch.vertex_rows(lab)
        if not len(idx):
            continue
        m, k, d = V.shape
        flat = V.reshape(m * k, d)
        xs = _round_rows(flat, den, ctx, False, precision)
        ys = _round_rows(flat, den, ctx, True, precision)
        for t, i in enumerate(idx):
            pts = [(xs[t * k + j], -ys[t * k + j]) for j in range(k)]
            if patch.refl[i]:
                pts = [pts[0]] + pts[:0:-1]
            out[i] = pts
    return out


# -- colours -------------------------------------------------------------------------------


def _hues(patch: Patch) -> list[int]:
    """Quantised hue index (0..719) per tile from its orientation class."""
    rule = patch.rule
    ctx = rule.field
    A = patch.A
    cache: dict = {}
    out = []
    for i in range(len(patch)):
        key = (int(patch.labels[i]), tuple(int(x) for x in A[i]))
        h = cache.get(key)
        if h is None:
            label = rule.labels[key[0]]
            a = CycNum._normalise(ctx, list(key[1]), patch.den)
            can = canonical_rotation(rule, label, a)
            z = can.to_complex()
            turn = (math.atan2(z.imag, z.real) / (2 * math.pi)) % 1.0
            h = int(round(turn * HUE_STEPS)) % HUE_STEPS
            cache[key] = h
        out.append(h)
    return out


def _fills(patch: Patch, mode: str) -> list[str]:
    if mode == "by-prototile":
        return [PALETTE[int(l) % len(PALETTE)] for l in patch.labels]
    if mode == "by-chirality":
        return ["#d9695f" if r else "#5c9ee6" for r in patch.refl]
    fills = []
    for h, r in zip(_hues(patch), patch.refl):
        deg = _format(h * _SCALE // 2)  # half-degree steps
        light = 45 if r else 62
        fills.append(f"hsl({deg},70%,{light}%)")
    return fills


# -- SVG -----------------------------------------------------------------------------------------


def to_svg(patch: Patch, options: RenderOptions | None = None) -> str:
    """Static SVG 1.1 document, one polygon per tile in patch order."""
    opts = options or RenderOptions()
    verts = _vertex_strings(patch, opts.precision)
    fills = _fills(patch, opts.color_mode)
    if opts.viewport is not None:
        x0, y0, x1, y1 = opts.viewport
        vb = (x0, -y1, x1 - x0, y1 - y0)
    elif len(patch):
        xs = [p[0] for pts in verts for p in pts]
        ys = [p[1] for pts in verts for p in pts]
        m = opts.margin
        vb = (
            min(xs) / _SCALE - m,
            min(ys) / _SCALE - m,
            (max(xs) - min(xs)) / _SCALE + 2 * m,
            (max(ys) - min(ys)) / _SCALE + 2 * m,
        )
    else:
        vb = (-1.0, -1.0, 2.0, 2.0)
    vbs = " ".join(_format(round(v * _SCALE)) for v in vb)
    sw = _format(round(opts.stroke_width * _SCALE))
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{vbs}">',
        f'<g stroke="#222222" stroke-width="{sw}" stroke-linejoin="round">',
    ]
    labels = patch.rule.labels
    for i, pts in enumerate(verts):
        ps = " ".join(f"{_format(x)},{_format(y)}" for x, y in pts)
        lines.append(f'<polygon class="{labels[int(patch.labels[i])]}" fill="{fills[i]}" points="{ps}"/>')
    lines.append("</g>")
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- JSON ------------------------------------------------------------------------------------------


class PatchFormatError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _scalar_json(z: ExtScalar) -> list:
    return [[_q(c) for c in z.u.coeffs], [_q(c) for c in z.v.coeffs]]


def patch_to_json(patch: Patch) -> str:
    """Exact, deterministic JSON; rationals as "p/q" strings."""
    rule = patch.rule
    head = {"format": "tilekit-patch", "version": 1, "rule": rule.name, "n": rule.field.n, "depth": patch.depth}
    lines = ["{", ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in head.items()) + ",", '  "tiles": [']
    body = []
    for t in patch:
        g = t.motion
        rec = {
            "label": t.proto,
            "address": list(t.address),
            "a": _scalar_json(g.a),
            "r": g.r,
            "t": _scalar_json(g.t),
        }
        body.append("    " + json.dumps(rec, separators=(",", ":")))
    lines.append(",\n".join(body))
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _field(obj, key, path):
    if not isinstance(obj, dict):
        raise PatchFormatError(path, "expected an object")
    if key not in obj:
        raise PatchFormatError(f"{path}.{key}" if path else key, "missing field")
    return obj[key]


def _parse_q(s, path) -> Fraction:
    if not isinstance(s, str):
        raise PatchFormatError(path, "expected a rational string")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise PatchFormatError(path, f"bad rational {s!r}") from None


def _parse_scalar_json(val, ctx, path) -> ExtScalar:
    if not isinstance(val, list) or len(val) != 2:
        raise PatchFormatError(path, "expected [u-coefficients, v-coefficients]")
    parts = []
    for j, part in enumerate(val):
        if not isinstance(part, list) or len(part) != ctx.degree:
            raise PatchFormatError(f"{path}[{j}]", f"expected {ctx.degree} coefficients")
        parts.append(ctx.from_coeffs([_parse_q(c, f"{path}[{j}][{k}]") for k, c in enumerate(part)]))
    return ExtScalar(ctx, parts[0], parts[1])


def patch_from_json(text: str, rule: SubstitutionRule | None = None) -> Patch:
    """Inverse of :func:`patch_to_json`.  Without ``rule`` the named builtin is used."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PatchFormatError("$", f"invalid JSON ({exc.msg} at line {exc.lineno})") from None
    name = _field(doc, "rule", "")
    n = _field(doc, "n", "")
    depth = _field(doc, "depth", "")
    tiles = _field(doc, "tiles", "")
    if rule is None:
        if name not in BUILTIN_RULES:
            raise PatchFormatError("rule", f"{name!r} is not a builtin; pass the rule explicitly")
        rule = builtin_rule(name)
    if rule.name != name or rule.field.n != n:
        raise PatchFormatError("rule", "patch does not belong to the given rule")
    if not isinstance(depth, int) or depth < 0:
        raise PatchFormatError("depth", "expected a non-negative integer")
    if not isinstance(tiles, list):
        raise PatchFormatError("tiles", "expected a list")
    ctx = rule.field
    out = []
    for i, rec in enumerate(tiles):
        path = f"tiles[{i}]"
        label = _field(rec, "label", path)
        if label not in rule.labels:
            raise PatchFormatError(f"{path}.label", f"unknown label {label!r}")
        addr = _field(rec, "address", path)
        if not isinstance(addr, list) or not all(isinstance(x, int) and 0 <= x < 65536 for x in addr):
            raise PatchFormatError(f"{path}.address", "expected a list of child indices")
        a = _parse_scalar_json(_field(rec, "a", path), ctx, f"{path}.a")
        r = _field(rec, "r", path)
        if r not in (0, 1):
            raise PatchFormatError(f"{path}.r", "expected 0 or 1")
        t = _parse_scalar_json(_field(rec, "t", path), ctx, f"{path}.t")
        if a.norm2() != 1:
            raise PatchFormatError(f"{path}.a", "rotation must have modulus 1")
        out.append(PlacedTile(label, Isometry(a, r, t), tuple(addr)))
    if out and len({len(t.address) for t in out}) != 1:
        raise PatchFormatError("tiles", "addresses must have equal length")
    return Patch.from_tiles(rule, out, depth)
