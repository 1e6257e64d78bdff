"""Substitution rules: data model, rule-file format, exact dissection checks.

A rule dissects the inflated prototile ``zeta * T_i`` into placed copies of
prototiles.  Rule files are plain text::

    # comment
    tiling sigma3 n=3
    prototile T1 { vertices=[0, 1, 1+x] rotsym=3 mirror=chiral anchor=0 }
    substitution T1 {
      child T2 rot=1-x translate=-1+3*x;
      child T2 rot=x refl translate=0;
    }

An optional ``zeta=<expr>`` after ``n=`` replaces the default inflation
scalar (used by degenerate test rules).
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import NamedTuple, Sequence

from .geometry import (
    AreaScalar,
    ConvexPolygon,
    GeometryError,
    Isometry,
    Location,
    area2,
    congruence_map,
    cross_sign,
    dot_sign,
    disjoint_interiors,
    point_in_convex,
)
from .numberfield import (
    ExtScalar,
    FieldContext,
    ScalarSyntaxError,
    field_init,
    format_scalar,
    parse_scalar,
    real_sign,
)

__all__ = [
    "Prototile",
    "Child",
    "SubstitutionRule",
    "ValidationReport",
    "PrototileReport",
    "EdgeReport",
    "RuleError",
    "RuleParseError",
    "parse_rule_file",
    "serialize_rule",
    "validate_rule",
    "builtin_rule",
    "load_rule",
    "BUILTIN_RULES",
    "check_edge_orientations",
]

BUILTIN_RULES = ("sigma3", "sigma4", "sigma5", "sigma6", "sigma8", "pinwheel")


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class ParseIssue:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.message}"


class RuleParseError(RuleError):
    def __init__(self, issues: Sequence[ParseIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


# -- data model ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Prototile:
    """A labelled convex prototile with its symmetry claims.

    ``edge_orientations[i]`` is +1 if the arrow on edge ``v_i -> v_{i+1}``
    points along the counterclockwise boundary, -1 if against it.
    """

    label: str
    polygon: ConvexPolygon
    rotsym: int = 1
    mirror: str = "chiral"
    edge_orientations: tuple[int, ...] | None = None
    anchor_edge: int = 0

    def __post_init__(self):
        k = len(self.polygon)
        if self.mirror not in ("self", "chiral"):
            raise RuleError(f"{self.label}: mirror must be 'self' or 'chiral'")
        if self.rotsym < 1 or k % self.rotsym:
            raise RuleError(f"{self.label}: rotsym {self.rotsym} incompatible with {k} vertices")
        if not 0 <= self.anchor_edge < k:
            raise RuleError(f"{self.label}: anchor edge out of range")
        if self.edge_orientations is not None:
            if len(self.edge_orientations) != k or any(s not in (1, -1) for s in self.edge_orientations):
                raise RuleError(f"{self.label}: need one +/- mark per edge")
        self.symmetries  # validates the claims

    @property
    def ctx(self) -> FieldContext:
        return self.polygon.ctx

    @cached_property
    def symmetries(self) -> tuple[Isometry, ...]:
        """The claimed symmetry group, identity first.  Raises RuleError if a
        claimed symmetry does not map the (decorated) polygon to itself."""
        poly = self.polygon
        k = len(poly)
        marks = self.edge_orientations
        rots = []
        for j in range(self.rotsym):
            shift = j * k // self.rotsym
            g = congruence_map(poly, poly, 0, shift, allow_reflection=False)
            if g is None or g.r:
                raise RuleError(f"{self.label}: claimed {self.rotsym}-fold rotation is not a symmetry")
            if marks and any(marks[i] != marks[(i + shift) % k] for i in range(k)):
                raise RuleError(f"{self.label}: rotation does not preserve edge orientations")
            rots.append(g)
        group = list(rots)
        if self.mirror == "self":
            refl = None
            for j in range(k):
                g = congruence_map(poly, poly, 0, j, reflection=True)
                if g is not None and g.r == 1 and self._mirror_keeps_marks(g):
                    refl = g
                    break
            if refl is None:
                raise RuleError(f"{self.label}: claimed mirror symmetry does not exist")
            group += [g.compose(refl) for g in rots]
        return tuple(group)

    def _mirror_keeps_marks(self, g: Isometry) -> bool:
        marks = self.edge_orientations
        if not marks:
            return True
        vs = self.polygon.vertices
        k = len(vs)
        pos = {v: i for i, v in enumerate(vs)}
        for i in range(k):
            a, b = pos[g(vs[i])], pos[g(vs[(i + 1) % k])]
            # image edge runs b -> a in ccw order (reflection)
            if (a - 1) % k != b:
                return False
            if marks[b] != -marks[i]:
                return False
        return True

    def canonical_motion(self, g: Isometry) -> Isometry:
        """Representative of g modulo the symmetry group (smallest key)."""
        best = None
        for s in self.symmetries:
            h = g.compose(s)
            if best is None or h.key() < best.key():
                best = h
        return best

    def placed(self, g: Isometry) -> ConvexPolygon:
        return g.apply_polygon(self.polygon)


class Child(NamedTuple):
    label: str
    motion: Isometry


@dataclass(eq=False)
class SubstitutionRule:
    name: str
    field: FieldContext
    prototiles: tuple[Prototile, ...]
    children: dict[str, tuple[Child, ...]]
    zeta: ExtScalar = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.zeta is None:
            self.zeta = self.field.zeta
        self._index = {p.label: i for i, p in enumerate(self.prototiles)}

    @property
    def labels(self) -> list[str]:
        return [p.label for p in self.prototiles]

    def index(self, label: str) -> int:
        return self._index[label]

    def proto(self, label: str) -> Prototile:
        return self.prototiles[self._index[label]]

    @cached_property
    def inflation(self) -> ExtScalar:
        """|zeta|^2, the area factor of one substitution step."""
        return self.zeta * self.zeta.conj()

    @cached_property
    def mu(self) -> ExtScalar:
        return self.zeta.conj() / self.zeta

    def conjugated(self, g: Isometry) -> Isometry:
        """Z o g o Z^-1 for Z(x) = zeta x."""
        if g.r:
            return Isometry(g.a / self.mu, 1, self.zeta * g.t)
        return Isometry(g.a, 0, self.zeta * g.t)

    def tile_key(self, label: str, g: Isometry) -> tuple:
        return (label,) + self.proto(label).canonical_motion(g).key()


# -- rule files ----------------------------------------------------------------

_EXPR_CHARS = set("0123456789xL+-*/^() \t")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.issues: list[ParseIssue] = []

    def loc(self, pos: int | None = None) -> tuple[int, int]:
        p = self.pos if pos is None else pos
        line = self.text.count("\n", 0, p) + 1
        col = p - (self.text.rfind("\n", 0, p) + 1) + 1
        return line, col

    def error(self, message: str, pos: int | None = None) -> None:
        self.issues.append(ParseIssue(*self.loc(pos), message))

    def skip(self) -> None:
        t = self.text
        while self.pos < len(t):
            ch = t[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "#":
                while self.pos < len(t) and t[self.pos] != "\n":
                    self.pos += 1
            else:
                break

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def ident(self) -> str | None:
        self.skip()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group()

    def expect(self, s: str) -> bool:
        self.skip()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        got = self.text[self.pos : self.pos + 1] or "end of file"
        self.error(f"expected {s!r}, found {got!r}")
        return False

    def integer(self) -> int | None:
        self.skip()
        m = re.compile(r"-?\d+").match(self.text, self.pos)
        if not m:
            self.error("expected integer")
            return None
        self.pos = m.end()
        return int(m.group())

    def expr_text(self) -> tuple[str, int]:
        self.skip()
        start = self.pos
        t = self.text
        while self.pos < len(t) and t[self.pos] in _EXPR_CHARS:
            self.pos += 1
        raw = t[start : self.pos]
        stripped = raw.rstrip()
        self.pos = start + len(stripped)
        return stripped, start

    def recover(self, stops: str) -> None:
        while self.pos < len(self.text) and self.text[self.pos] not in stops:
            self.pos += 1


class _Parser:
    def __init__(self, text: str):
        self.s = _Scanner(text)
        self.ctx: FieldContext | None = None

    def scalar(self) -> tuple[ExtScalar | None, int]:
        text, start = self.s.expr_text()
        if not text:
            self.s.error("expected expression", start)
            return None, start
        try:
            return parse_scalar(self.ctx, text), start
        except ScalarSyntaxError as exc:
            self.s.error(exc.message, start + exc.pos)
        except ZeroDivisionError:
            self.s.error("division by zero", start)
        return None, start

    def parse(self) -> SubstitutionRule:
        s = self.s
        s.skip()
        head = s.pos
        if s.ident() != "tiling":
            s.error("expected 'tiling <name> n=<int>' header", head)
            raise RuleParseError(s.issues)
        name = s.ident()
        if name is None:
            s.error("expected tiling name")
            raise RuleParseError(s.issues)
        if s.ident() != "n" or not s.expect("="):
            s.error("expected n=<int>")
            raise RuleParseError(s.issues)
        npos = s.pos
        n = s.integer()
        if n is None or n < 3:
            s.error("tiling order must be an integer >= 3", npos)
            raise RuleParseError(s.issues)
        self.ctx = field_init(n)
        zeta = None
        save = s.pos
        if s.ident() == "zeta" and s.expect("="):
            zeta, zpos = self.scalar()
            if zeta is not None and zeta.is_zero():
                s.error("zeta must be nonzero", zpos)
        else:
            s.pos = save

        protos: dict[str, Prototile] = {}
        proto_pos: dict[str, int] = {}
        subs: dict[str, list[tuple[str, int, Isometry | None]]] = {}
        while not s.at_end():
            kpos = s.pos
            kw = s.ident()
            if kw == "prototile":
                self.prototile(protos, proto_pos)
            elif kw == "substitution":
                lpos = s.pos
                label = s.ident()
                if label is None:
                    s.error("expected label")
                    s.recover("}")
                    s.pos += 1
                    continue
                if label in subs:
                    s.error(f"duplicate substitution for {label!r}", lpos)
                subs[label] = self.substitution()
                subs[label].insert(0, ("", lpos, None))
            else:
                s.error(f"unexpected {kw or s.peek()!r}; expected 'prototile' or 'substitution'", kpos)
                s.recover("}")
                s.pos += 1
        # label resolution
        children: dict[str, tuple[Child, ...]] = {}
        for label, items in subs.items():
            lpos = items[0][1]
            if label not in protos:
                s.error(f"unknown label {label!r}", lpos)
                continue
            kids = []
            for clabel, cpos, g in items[1:]:
                if clabel not in protos:
                    s.error(f"unknown label {clabel!r}", cpos)
                elif g is not None:
                    kids.append(Child(clabel, g))
            children[label] = tuple(kids)
        for label, pos in proto_pos.items():
            if label not in subs:
                s.error(f"prototile {label!r} has no substitution", pos)
        if s.issues:
            raise RuleParseError(s.issues)
        order = sorted(protos, key=lambda lb: proto_pos[lb])
        return SubstitutionRule(
            name, self.ctx, tuple(protos[lb] for lb in order), {lb: children[lb] for lb in order}, zeta
        )

    def prototile(self, protos, proto_pos) -> None:
        s = self.s
        lpos = s.pos
        label = s.ident()
        if label is None:
            s.error("expected label")
            s.recover("}")
            s.pos += 1
            return
        if label in protos:
            s.error(f"duplicate prototile {label!r}", lpos)
        if not s.expect("{"):
            s.recover("}")
            s.pos += 1
            return
        attrs: dict = {}
        vpos = s.pos
        while s.peek() not in ("}", ""):
            apos = s.pos
            key = s.ident()
            if key is None or not s.expect("="):
                if key is None:
                    s.error(f"unexpected {s.peek()!r} in prototile", apos)
                s.recover("}")
                break
            if key == "vertices":
                vpos = apos
                attrs[key] = self.scalar_list()
            elif key in ("rotsym", "anchor"):
                attrs[key] = s.integer()
            elif key == "mirror":
                mpos = s.pos
                val = s.ident()
                if val not in ("self", "chiral"):
                    s.error("mirror must be 'self' or 'chiral'", mpos)
                attrs[key] = val
            elif key == "edges":
                attrs[key] = self.sign_list()
            else:
                s.error(f"unknown prototile attribute {key!r}", apos)
                s.recover("}")
                break
        s.expect("}")
        verts = attrs.get("vertices")
        if verts is None:
            s.error(f"prototile {label!r} needs vertices", lpos)
            return
        if any(v is None for v in verts):
            return
        try:
            poly = ConvexPolygon(verts)
            proto = Prototile(
                label,
                poly,
                rotsym=attrs.get("rotsym") or 1,
                mirror=attrs.get("mirror") or "chiral",
                edge_orientations=attrs.get("edges"),
                anchor_edge=attrs.get("anchor") or 0,
            )
        except (GeometryError, RuleError) as exc:
            s.error(str(exc), vpos)
            return
        protos[label] = proto
        proto_pos.setdefault(label, lpos)

    def scalar_list(self) -> list:
        s = self.s
        out = []
        if not s.expect("["):
            return [None]
        while True:
            val, _ = self.scalar()
            out.append(val)
            if s.peek() == ",":
                s.pos += 1
                continue
            s.expect("]")
            return out

    def sign_list(self) -> tuple[int, ...] | None:
        s = self.s
        out = []
        if not s.expect("["):
            return None
        while True:
            ch = s.peek()
            if ch in "+-" and ch:
                out.append(1 if ch == "+" else -1)
                s.pos += 1
            else:
                s.error("expected '+' or '-'")
                s.recover("]}")
                if s.peek() == "]":
                    s.pos += 1
                return None
            if s.peek() == ",":
                s.pos += 1
                continue
            s.expect("]")
            return tuple(out)

    def substitution(self) -> list:
        s = self.s
        items: list = []
        if not s.expect("{"):
            s.recover("}")
            s.pos += 1
            return items
        while s.peek() not in ("}", ""):
            kpos = s.pos
            if s.ident() != "child":
                s.error("expected 'child'", kpos)
                s.recover(";}")
                if s.peek() == ";":
                    s.pos += 1
                continue
            cpos = s.pos
            clabel = s.ident()
            if clabel is None:
                s.error("expected child label")
                s.recover(";}")
                if s.peek() == ";":
                    s.pos += 1
                continue
            rot = trans = None
            refl = 0
            ok = True
            while s.peek() not in (";", "}", ""):
                apos = s.pos
                key = s.ident()
                if key == "refl":
                    refl = 1
                elif key in ("rot", "translate") and s.expect("="):
                    val, vpos = self.scalar()
                    if val is None:
                        ok = False
                    elif key == "rot":
                        if val.is_zero():
                            s.error("rotation scalar is not invertible", vpos)
                            ok = False
                        elif val.norm2() != 1:
                            s.error("rotation scalar must have modulus 1", vpos)
                            ok = False
                        rot = val
                    else:
                        trans = val
                else:
                    s.error(f"unexpected {key or s.peek()!r} in child", apos)
                    s.recover(";}")
                    ok = False
                    break
            if rot is None and ok:
                s.error("child needs rot=<expr>", cpos)
                ok = False
            if trans is None and ok:
                s.error("child needs translate=<expr>", cpos)
                ok = False
            s.expect(";")
            items.append((clabel, cpos, Isometry(rot, refl, trans) if ok else None))
        s.expect("}")
        return items


def parse_rule_file(text: str) -> SubstitutionRule:
    """Parse rule-file text.  Raises :class:`RuleParseError` carrying every
    problem found, each with line and column."""
    return _Parser(text).parse()


def serialize_rule(rule: SubstitutionRule) -> str:
    """Bit-exact text form; ``parse_rule_file(serialize_rule(r))`` equals r."""
    out = [f"tiling {rule.name} n={rule.field.n}"]
    if rule.zeta != rule.field.zeta:
        out[0] += f" zeta={format_scalar(rule.zeta)}"
    for p in rule.prototiles:
        vs = ", ".join(format_scalar(v) for v in p.polygon.vertices)
        line = f"prototile {p.label} {{ vertices=[{vs}] rotsym={p.rotsym} mirror={p.mirror} anchor={p.anchor_edge}"
        if p.edge_orientations:
            line += " edges=[" + ",".join("+" if m > 0 else "-" for m in p.edge_orientations) + "]"
        out.append(line + " }")
    for p in rule.prototiles:
        out.append(f"substitution {p.label} {{")
        for ch in rule.children[p.label]:
            g = ch.motion
            refl = " refl" if g.r else ""
            out.append(f"  child {ch.label} rot={format_scalar(g.a)}{refl} translate={format_scalar(g.t)};")
        out.append("}")
    return "\n".join(out) + "\n"


def rules_equal(a: SubstitutionRule, b: SubstitutionRule) -> bool:
    if (a.name, a.field.n, a.labels) != (b.name, b.field.n, b.labels) or a.zeta != b.zeta:
        return False
    for p, q in zip(a.prototiles, b.prototiles):
        if p.polygon.vertices != q.polygon.vertices:
            return False
        if (p.rotsym, p.mirror, p.edge_orientations, p.anchor_edge) != (
            q.rotsym,
            q.mirror,
            q.edge_orientations,
            q.anchor_edge,
        ):
            return False
    for lb in a.labels:
        ka = [(c.label, c.motion.key()) for c in a.children[lb]]
        kb = [(c.label, c.motion.key()) for c in b.children[lb]]
        if ka != kb:
            return False
    return True


# -- validation ------------------------------------------------------------------


@dataclass
class PrototileReport:
    label: str
    congruent: bool = True
    contained: bool = True
    disjoint: bool = True
    area: bool = True
    symmetric: bool = True
    counts: tuple[int, ...] = ()
    messages: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.congruent and self.contained and self.disjoint and self.area and self.symmetric


@dataclass
class ValidationReport:
    rule: str
    labels: list[str]
    prototiles: list[PrototileReport]
    matrix: list[list[int]]

    @property
    def valid(self) -> bool:
        return all(p.ok for p in self.prototiles)

    def summary(self) -> str:
        lines = [f"rule {self.rule}: {'valid' if self.valid else 'INVALID'}"]
        for p in self.prototiles:
            flags = " ".join(
                f"{k}={'ok' if getattr(p, k) else 'FAIL'}"
                for k in ("congruent", "contained", "disjoint", "area", "symmetric")
            )
            lines.append(f"  {p.label}: {flags}")
            lines.extend(f"    {m}" for m in p.messages)
        lines.append("matrix:")
        lines.extend("  " + " ".join(f"{v:3d}" for v in row) for row in self.matrix)
        return "\n".join(lines)


def _float_box(poly: ConvexPolygon):
    zs = [v.approx() for v in poly.vertices]
    err = max(e for _, e in zs) + 1e-9
    xs = [z.real for z, _ in zs]
    ys = [z.imag for z, _ in zs]
    return min(xs) - err, max(xs) + err, min(ys) - err, max(ys) + err


def _boxes_apart(a, b) -> bool:
    return a[1] < b[0] or b[1] < a[0] or a[3] < b[2] or b[3] < a[2]


def _check_prototile(rule: SubstitutionRule, proto: Prototile) -> PrototileReport:
    rep = PrototileReport(proto.label)
    kids = rule.children[proto.label]
    big = ConvexPolygon([rule.zeta * v for v in proto.polygon.vertices], _trusted=True)
    placed = []
    # (i) each child is its prototype moved by the recorded (unit) motion
    for idx, ch in enumerate(kids):
        g = ch.motion
        cp = rule.proto(ch.label)
        if not g.is_unit():
            rep.congruent = False
            rep.messages.append(f"child {idx} ({ch.label}): motion is not an isometry")
            placed.append(None)
            continue
        poly = cp.placed(g)
        k = len(poly)
        anchor_img = g(cp.polygon.vertices[cp.anchor_edge])
        j = poly.vertices.index(anchor_img)
        # under a reflection the anchor edge runs backwards in ccw order
        j = (j - 1) % k if g.r else j
        back = congruence_map(cp.polygon, poly, cp.anchor_edge, j, reflection=bool(g.r))
        if back is None or cp.canonical_motion(back).key() != cp.canonical_motion(g).key():
            rep.congruent = False
            rep.messages.append(f"child {idx} ({ch.label}): congruence map disagrees with recorded motion")
        placed.append(poly)
    # (ii) containment
    for idx, poly in enumerate(placed):
        if poly is None:
            continue
        for v in poly.vertices:
            if point_in_convex(v, big) is Location.OUTSIDE:
                rep.contained = False
                rep.messages.append(f"child {idx} ({kids[idx].label}): vertex outside the inflated tile")
                break
    # (iii) pairwise disjoint interiors
    boxes = [_float_box(p) if p is not None else None for p in placed]
    for i in range(len(placed)):
        if placed[i] is None:
            continue
        for j in range(i + 1, len(placed)):
            if placed[j] is None or _boxes_apart(boxes[i], boxes[j]):
                continue
            if not disjoint_interiors(placed[i], placed[j]):
                rep.disjoint = False
                rep.messages.append(f"children {i} ({kids[i].label}) and {j} ({kids[j].label}) overlap")
    # (iv) area identity
    total = AreaScalar(rule.field.ext(0))
    for p in placed:
        if p is not None:
            total = total + area2(p)
    want = area2(proto.polygon) * rule.inflation
    if total != want:
        rep.area = False
        ratio = (total / area2(proto.polygon)).to_complex().real
        rep.messages.append(f"child areas sum to {ratio:.12g} x area, expected |zeta|^2")
    # claimed symmetries must carry the dissection to itself
    if len(proto.symmetries) > 1:
        keys = sorted(rule.tile_key(ch.label, ch.motion) for ch in kids)
        for s in proto.symmetries[1:]:
            S = rule.conjugated(s)
            img = sorted(rule.tile_key(ch.label, S.compose(ch.motion)) for ch in kids)
            if img != keys:
                rep.symmetric = False
                rep.messages.append("dissection is not invariant under the claimed symmetry")
                break
    cnt = [0] * len(rule.prototiles)
    for ch in kids:
        cnt[rule.index(ch.label)] += 1
    rep.counts = tuple(cnt)
    return rep


def validate_rule(rule: SubstitutionRule, threads: int | None = None) -> ValidationReport:
    """Exact dissection certificate for every prototile.

    For each prototile: (i) children are congruent to their prototypes via
    the recorded motions, (ii) all child vertices lie in zeta*T_i, (iii)
    children have pairwise disjoint interiors, (iv) child areas add up to
    |zeta|^2 area(T_i).  Together these certify an exact tiling.
    """
    from .parallel import pmap

    reports = pmap(_check_one, [(rule, p.label) for p in rule.prototiles], threads)
    m = len(rule.prototiles)
    matrix = [[reports[j].counts[i] for j in range(m)] for i in range(m)]
    return ValidationReport(rule.name, rule.labels, reports, matrix)


def _check_one(args) -> PrototileReport:
    rule, label = args
    return _check_prototile(rule, rule.proto(label))


# -- edge orientations ----------------------------------------------------------


@dataclass
class EdgeReport:
    applicable: bool
    coincidences_checked: int = 0
    conflicts: list[str] = field(default_factory=list)
    edge_classes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.applicable or not self.conflicts

    def summary(self) -> str:
        if not self.applicable:
            return "edge orientations: not applicable (no marks)"
        head = f"edge orientations: {self.coincidences_checked} coincidences checked, {len(self.conflicts)} conflicts"
        return "\n".join([head] + ["  " + c for c in self.conflicts])


def _directed_edges(proto: Prototile, g: Isometry):
    """Placed edges as (tail, head) following the arrows."""
    vs = proto.polygon.vertices
    k = len(vs)
    out = []
    for i in range(k):
        a, b = g(vs[i]), g(vs[(i + 1) % k])
        if proto.edge_orientations[i] < 0:
            a, b = b, a
        out.append((a, b, i))
    return out


def _param_on(seg_a, seg_b, p) -> ExtScalar | None:
    """t with p = a + t (b - a) if p is on the line through a, b."""
    d = seg_b - seg_a
    w = p - seg_a
    if cross_sign(d, w) != 0:
        return None
    return (w * d.conj()) / (d * d.conj())


def check_edge_orientations(rule: SubstitutionRule) -> EdgeReport:
    """Arrow consistency of a decorated rule.

    Within each dissection, collinear child edges that overlap in a segment
    must point the same way.  Across the rule, every prototile edge of a
    given length must be dissected identically: the child edges lying on
    the inflated edge, read in the arrow direction, give the same sequence
    of (start, end, direction) fractions.
    """
    if any(p.edge_orientations is None for p in rule.prototiles):
        return EdgeReport(False)
    rep = EdgeReport(True)
    classes: dict[tuple, tuple] = {}
    for proto in rule.prototiles:
        kids = rule.children[proto.label]
        edges = []
        for idx, ch in enumerate(kids):
            for a, b, i in _directed_edges(rule.proto(ch.label), ch.motion):
                edges.append((a, b, idx, i))
        # coincidences between children
        for x in range(len(edges)):
            a1, b1, c1, _ = edges[x]
            for y in range(x + 1, len(edges)):
                a2, b2, c2, _ = edges[y]
                if c1 == c2:
                    continue
                s = _param_on(a1, b1, a2)
                if s is None:
                    continue
                t = _param_on(a1, b1, b2)
                if t is None:
                    continue
                lo, hi = (s, t) if real_sign(t - s) > 0 else (t, s)
                # overlap of [0, 1] and [lo, hi] with positive length
                if real_sign(hi) <= 0 or real_sign(lo - 1) >= 0:
                    continue
                rep.coincidences_checked += 1
                if real_sign(t - s) < 0:
                    rep.conflicts.append(
                        f"{proto.label}: children {c1} ({kids[c1].label}) and {c2} ({kids[c2].label}) "
                        "meet along an edge with opposite arrows"
                    )
        # dissection of each inflated boundary edge
        big = Prototile(proto.label, proto.polygon, 1, "chiral", proto.edge_orientations)
        for A, B, i in _directed_edges(big, Isometry(rule.zeta, 0, rule.field.ext(0))):
            seq = []
            for a, b, idx, _ in edges:
                s = _param_on(A, B, a)
                t = _param_on(A, B, b)
                if s is None or t is None:
                    continue
                if real_sign(s) < 0 or real_sign(s - 1) > 0 or real_sign(t) < 0 or real_sign(t - 1) > 0:
                    continue
                seq.append((s, t))
            seq.sort(key=lambda st: min(st[0].to_complex().real, st[1].to_complex().real))
            sig = tuple(
                (min(s, t, key=lambda z: z.to_complex().real).key(), 1 if real_sign(t - s) > 0 else -1)
                for s, t in seq
            )
            length = (B - A) * (B - A).conj()
            key = length.key()
            where = f"{proto.label} edge {i}"
            if key in classes:
                ref, ref_where = classes[key]
                if ref != sig:
                    rep.conflicts.append(f"{where} is dissected differently from {ref_where} (same length)")
            else:
                classes[key] = (sig, where)
    rep.edge_classes = {k: v[1] for k, v in classes.items()}
    return rep


# -- builtins ---------------------------------------------------------------------


def load_rule(source: str) -> SubstitutionRule:
    """``builtin:NAME`` or a path to a rule file."""
    if source.startswith("builtin:"):
        return builtin_rule(source.split(":", 1)[1])
    with open(source, encoding="utf-8") as fh:
        return parse_rule_file(fh.read())


@lru_cache(maxsize=None)
def builtin_rule(name: str) -> SubstitutionRule:
    """One of the shipped rules (sigma3, sigma4, sigma5, sigma6, sigma8, pinwheel)."""
    if name not in BUILTIN_RULES:
        raise RuleError(f"unknown builtin rule {name!r}; choose from {', '.join(BUILTIN_RULES)}")
    try:
        text = resources.files("tilekit").joinpath("rules", f"{name}.tile").read_text(encoding="utf-8")
    except FileNotFoundError:
        raise RuleError(f"builtin rule {name!r} is not installed") from None
    return parse_rule_file(text)
