"""Exact arithmetic in Q(xi_N), N = 2n, and its quadratic extension by lambda_n.

Elements of the cyclotomic field are stored over the power basis
1, xi, ..., xi^(d-1) (d = phi(N)) as integer numerators with one positive
common denominator, always reduced modulo the cyclotomic polynomial and to
lowest terms.  Equal elements therefore have equal representations.

``ExtScalar`` adds the real square root ``lambda`` of ``c = lambda_n^2``.
Plane points are complex numbers, so every coordinate, rotation and
translation used by the tiling code is an ``ExtScalar`` (in practice with a
zero lambda part, because the inflation is carried by ``zeta = 2 + xi``).
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath
from mpmath import iv

__all__ = [
    "FieldContext",
    "CycNum",
    "ExtScalar",
    "ComplexInterval",
    "NonRealError",
    "field_init",
    "real_sign",
    "embed",
    "parse_scalar",
    "ScalarSyntaxError",
    "cyclotomic_polynomial",
    "euler_phi",
]

DEFAULT_PRECISION = 128


@contextmanager
def _ivprec(prec: int):
    old = iv.prec
    iv.prec = prec
    try:
        yield
    finally:
        iv.prec = old


class NonRealError(ValueError):
    """Raised when a real-only operation receives a non-real element."""


def euler_phi(n: int) -> int:
    result = n
    p = 2
    m = n
    while p * p <= m:
        if m % p == 0:
            while m % p == 0:
                m //= p
            result -= result // p
        p += 1
    if m > 1:
        result -= result // m
    return result


def _poly_divexact(num: list[int], den: list[int]) -> list[int]:
    # coefficient lists, lowest degree first; den monic
    num = list(num)
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        q = num[i + len(den) - 1]
        out[i] = q
        if q:
            for j, dc in enumerate(den):
                num[i + j] -= q * dc
    if any(num[: len(den) - 1]):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Coefficients of Phi_n, lowest degree first."""
    poly = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            poly = _poly_divexact(poly, list(cyclotomic_polynomial(d)))
    return tuple(poly)


class FieldContext:
    """The working field for tiling order ``n``.

    Use :func:`field_init`; contexts are cached, so two calls with the same
    ``n`` return the same object and elements can be compared by identity of
    their context.
    """

    def __init__(self, n: int):
        if n < 3:
            raise ValueError(f"tiling order must be >= 3, got {n}")
        self.n = n
        self.N = 2 * n
        self.modulus = cyclotomic_polynomial(self.N)
        self.degree = len(self.modulus) - 1
        d = self.degree
        # reduced power table: xi^k for 0 <= k < max(N, 2d - 1)
        table: list[tuple[int, ...]] = []
        vec = [0] * d
        vec[0] = 1
        for _ in range(max(self.N, 2 * d - 1)):
            table.append(tuple(vec))
            top = vec[-1]
            vec = [0] + vec[:-1]
            if top:
                for j in range(d):
                    vec[j] -= top * self.modulus[j]
        self._pow = table
        self._conj_rows = [table[(self.N - k) % self.N] for k in range(d)]
        self.xi = CycNum(self, table[1], 1)
        step = 1 if n % 2 else 2
        rot = self.xi ** step
        self.c = 5 + 2 * (rot + rot.conj())
        self.zeta = ExtScalar(self, 2 + rot, self.zero_cyc)
        self._check_c()

    def __repr__(self) -> str:
        return f"FieldContext(n={self.n})"

    def __reduce__(self):
        return (field_init, (self.n,))

    # -- element constructors --------------------------------------------

    @property
    def zero_cyc(self) -> CycNum:
        return CycNum(self, (0,) * self.degree, 1)

    @property
    def one_cyc(self) -> CycNum:
        return CycNum(self, (1,) + (0,) * (self.degree - 1), 1)

    def cyc(self, value) -> CycNum:
        """Coerce an int, Fraction or CycNum into this field."""
        if isinstance(value, CycNum):
            if value.ctx is not self:
                raise ValueError("element belongs to another field")
            return value
        if isinstance(value, ExtScalar):
            if value.ctx is not self or not value.v.is_zero():
                raise ValueError("cannot coerce extension element to CycNum")
            return value.u
        q = Fraction(value)
        return CycNum(self, (q.numerator,) + (0,) * (self.degree - 1), q.denominator)

    def ext(self, value) -> ExtScalar:
        if isinstance(value, ExtScalar):
            if value.ctx is not self:
                raise ValueError("element belongs to another field")
            return value
        return ExtScalar(self, self.cyc(value), self.zero_cyc)

    def from_coeffs(self, coeffs: Sequence) -> CycNum:
        """Build a CycNum from power-basis coefficients (any length)."""
        fr = [Fraction(c) for c in coeffs]
        den = 1
        for f in fr:
            den = den * f.denominator // math.gcd(den, f.denominator)
        nums = [f.numerator * (den // f.denominator) for f in fr]
        return CycNum.from_poly(self, nums, den)

    @property
    def lam(self) -> ExtScalar:
        return ExtScalar(self, self.zero_cyc, self.one_cyc)

    @property
    def root_of_unity(self) -> CycNum:
        """Primitive n-th root of unity xi_N^2, the symmetry rotation."""
        return self.xi ** 2

    @property
    def mu(self) -> ExtScalar:
        """conj(zeta)/zeta, the rotation twist for reflected tiles."""
        return self.zeta.conj() / self.zeta

    def xi_pow(self, k: int) -> CycNum:
        return CycNum(self, self._pow[k % self.N], 1)

    # -- guards ------------------------------------------------------------

    def _check_c(self) -> None:
        if self.c.conj() != self.c:
            raise ArithmeticError("lambda^2 is not real")
        if self.zeta.u * self.zeta.u.conj() != self.c:
            raise ArithmeticError("zeta * conj(zeta) != lambda^2")
        if _cyc_real_sign(self.c) <= 0:
            raise ArithmeticError("lambda^2 is not positive")
        if _square_root_in_field(self.c) is not None:
            raise ArithmeticError(
                f"lambda is an element of Q(xi_{self.N}); componentwise equality would be unsound"
            )


@lru_cache(maxsize=None)
def field_init(n: int) -> FieldContext:
    """Return the (cached) field context for tiling order ``n``."""
    return FieldContext(n)


class CycNum:
    """Element of Q(xi_N) as reduced integer numerators over a common denominator."""

    __slots__ = ("ctx", "num", "den", "_hash")

    def __init__(self, ctx: FieldContext, num: tuple[int, ...], den: int):
        # callers must pass a reduced, normalised representation
        self.ctx = ctx
        self.num = num
        self.den = den
        self._hash = None

    @classmethod
    def from_poly(cls, ctx: FieldContext, poly: Sequence[int], den: int = 1) -> CycNum:
        d = ctx.degree
        acc = [0] * d
        table = ctx._pow
        for k, coef in enumerate(poly):
            if not coef:
                continue
            if k < d:
                acc[k] += coef
            else:
                row = table[k] if k < len(table) else table[k % ctx.N]
                for j in range(d):
                    if row[j]:
                        acc[j] += coef * row[j]
        return cls._normalise(ctx, acc, den)

    @classmethod
    def _normalise(cls, ctx: FieldContext, acc: list[int], den: int) -> CycNum:
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            acc = [-a for a in acc]
            den = -den
        g = den
        for a in acc:
            if g == 1:
                break
            g = math.gcd(g, a)
        if g != 1:
            acc = [a // g for a in acc]
            den //= g
        return cls(ctx, tuple(acc), den)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(a, self.den) for a in self.num)

    def is_zero(self) -> bool:
        return not any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def _coerce(self, other) -> CycNum | None:
        if isinstance(other, CycNum):
            if other.ctx is not self.ctx:
                raise ValueError("operands belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.ctx.cyc(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return CycNum._normalise(self.ctx, [a + b for a, b in zip(self.num, o.num)], self.den)
        return CycNum._normalise(
            self.ctx, [a * o.den + b * self.den for a, b in zip(self.num, o.num)], self.den * o.den
        )

    __radd__ = __add__

    def __neg__(self) -> CycNum:
        return CycNum(self.ctx, tuple(-a for a in self.num), self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self.num, o.num
        if o.is_rational():
            s = b[0]
            return CycNum._normalise(self.ctx, [x * s for x in a], self.den * o.den)
        if self.is_rational():
            s = a[0]
            return CycNum._normalise(self.ctx, [x * s for x in b], self.den * o.den)
        prod = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        return CycNum.from_poly(self.ctx, prod, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int) -> CycNum:
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ctx.one_cyc
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> CycNum:
        """Complex conjugation, the automorphism xi -> xi^-1."""
        d = self.ctx.degree
        acc = [0] * d
        for k, coef in enumerate(self.num):
            if coef:
                row = self.ctx._conj_rows[k]
                for j in range(d):
                    if row[j]:
                        acc[j] += coef * row[j]
        return CycNum(self.ctx, tuple(acc), self.den)

    def galois(self, k: int) -> CycNum:
        """The automorphism xi -> xi^k (k coprime to N)."""
        if math.gcd(k, self.ctx.N) != 1:
            raise ValueError("exponent must be a unit modulo N")
        poly = [0] * self.ctx.N
        for j, coef in enumerate(self.num):
            poly[(j * k) % self.ctx.N] += coef
        return CycNum.from_poly(self.ctx, poly, self.den)

    def inverse(self) -> CycNum:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(xi)")
        if self.is_rational():
            q = Fraction(self.den, self.num[0])
            return self.ctx.cyc(q)
        # product of the nontrivial Galois conjugates is norm/self
        ctx = self.ctx
        acc = ctx.one_cyc
        for k in range(2, ctx.N):
            if math.gcd(k, ctx.N) == 1:
                acc = acc * self.galois(k)
        norm = self * acc
        if not norm.is_rational():
            raise ArithmeticError("norm is not rational")
        return acc * Fraction(norm.den, norm.num[0])

    def __eq__(self, other) -> bool:
        if isinstance(other, CycNum):
            return self.ctx is other.ctx and self.den == other.den and self.num == other.num
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self.num[0], self.den) == other
        if isinstance(other, ExtScalar):
            return other == self
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ctx.n, self.num, self.den))
        return self._hash

    def key(self) -> tuple:
        """Deterministic sort key (lexicographic on coefficients)."""
        return tuple(Fraction(a, self.den) for a in self.num)

    def __repr__(self) -> str:
        return f"CycNum({format_cyc(self)})"

    def to_complex(self) -> complex:
        return complex(_cyc_embed_float(self))


class ExtScalar:
    """Element u + v*lambda of Q(xi_N)(lambda), lambda^2 = c, lambda > 0."""

    __slots__ = ("ctx", "u", "v", "_hash", "_fe")

    def __init__(self, ctx: FieldContext, u: CycNum, v: CycNum):
        self.ctx = ctx
        self.u = u
        self.v = v
        self._hash = None
        self._fe = None

    def approx(self) -> tuple[complex, float]:
        """Floating value and a bound on its absolute error (cached)."""
        if self._fe is None:
            z, mag = _cyc_float_mag(self.u)
            if not self.v.is_zero():
                lam = math.sqrt(_cyc_embed_float(self.ctx.c).real)
                zv, magv = _cyc_float_mag(self.v)
                z += zv * lam
                mag += magv * lam
            self._fe = (z, mag * 1e-14 + 1e-300)
        return self._fe

    def _coerce(self, other) -> ExtScalar | None:
        if isinstance(other, ExtScalar):
            if other.ctx is not self.ctx:
                raise ValueError("operands belong to different fields")
            return other
        if isinstance(other, (int, Fraction, CycNum)):
            return self.ctx.ext(other)
        return None

    def is_zero(self) -> bool:
        return self.u.is_zero() and self.v.is_zero()

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtScalar(self.ctx, self.u + o.u, self.v + o.v)

    __radd__ = __add__

    def __neg__(self) -> ExtScalar:
        return ExtScalar(self.ctx, -self.u, -self.v)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return ExtScalar(self.ctx, self.u - o.u, self.v - o.v)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.v.is_zero() and o.v.is_zero():
            return ExtScalar(self.ctx, self.u * o.u, self.ctx.zero_cyc)
        u = self.u * o.u + self.v * o.v * self.ctx.c
        v = self.u * o.v + self.v * o.u
        return ExtScalar(self.ctx, u, v)

    __rmul__ = __mul__

    def inverse(self) -> ExtScalar:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in Q(xi)(lambda)")
        if self.v.is_zero():
            return ExtScalar(self.ctx, self.u.inverse(), self.ctx.zero_cyc)
        # (u + v L)(u - v L) = u^2 - v^2 c, nonzero because L is not in Q(xi)
        norm = self.u * self.u - self.v * self.v * self.ctx.c
        inv = norm.inverse()
        return ExtScalar(self.ctx, self.u * inv, -self.v * inv)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, k: int) -> ExtScalar:
        if k < 0:
            return self.inverse() ** (-k)
        result = self.ctx.ext(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self) -> ExtScalar:
        return ExtScalar(self.ctx, self.u.conj(), self.v.conj())

    def norm2(self) -> ExtScalar:
        """|a|^2 = a * conj(a)."""
        return self * self.conj()

    def real_part2(self) -> ExtScalar:
        """2 * Re(a), exact."""
        return self + self.conj()

    def is_real(self) -> bool:
        return self.u.conj() == self.u and self.v.conj() == self.v

    def __eq__(self, other) -> bool:
        if isinstance(other, ExtScalar):
            return self.ctx is other.ctx and self.u == other.u and self.v == other.v
        if isinstance(other, (int, Fraction, CycNum)):
            return self.v.is_zero() and self.u == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.u, self.v))
        return self._hash

    def key(self) -> tuple:
        return self.u.key() + self.v.key()

    def __repr__(self) -> str:
        return f"ExtScalar({format_scalar(self)})"

    def to_complex(self) -> complex:
        z = _cyc_embed_float(self.u)
        if not self.v.is_zero():
            z += _cyc_embed_float(self.v) * math.sqrt(_cyc_embed_float(self.ctx.c).real)
        return complex(z)


# -- embeddings and signs ----------------------------------------------------


class ComplexInterval:
    """Rectangular complex interval built from two mpmath real intervals."""

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = re
        self.im = im

    def contains(self, z: complex) -> bool:
        return z.real in self.re and z.imag in self.im

    @property
    def width(self) -> float:
        return float(max(self.re.delta, self.im.delta))

    def mid(self) -> complex:
        return complex(float(self.re.mid), float(self.im.mid))

    def __repr__(self) -> str:
        return f"ComplexInterval({self.re}, {self.im})"


@lru_cache(maxsize=None)
def _basis_intervals(N: int, degree: int, prec: int):
    with _ivprec(prec + 20):
        out = []
        for k in range(degree):
            ang = iv.mpf(2 * k) / N * iv.pi
            out.append((iv.cos(ang), iv.sin(ang)))
        return tuple(out)


def _cyc_embed_interval(a: CycNum, prec: int):
    basis = _basis_intervals(a.ctx.N, a.ctx.degree, prec)
    with _ivprec(prec + 20):
        re = iv.mpf(0)
        im = iv.mpf(0)
        for coef, (cr, ci) in zip(a.num, basis):
            if coef:
                re += coef * cr
                im += coef * ci
        return re / a.den, im / a.den


@lru_cache(maxsize=None)
def _lambda_interval(n: int, prec: int):
    ctx = field_init(n)
    re, _ = _cyc_embed_interval(ctx.c, prec)
    with _ivprec(prec + 20):
        return iv.sqrt(re)


def embed(a, precision: int = DEFAULT_PRECISION) -> ComplexInterval:
    """Certified complex interval containing the value of ``a``."""
    if precision < 53:
        raise ValueError("precision must be at least 53 bits")
    if isinstance(a, CycNum):
        re, im = _cyc_embed_interval(a, precision)
        return ComplexInterval(re, im)
    if not isinstance(a, ExtScalar):
        raise TypeError(f"cannot embed {type(a).__name__}")
    re, im = _cyc_embed_interval(a.u, precision)
    if not a.v.is_zero():
        lam = _lambda_interval(a.ctx.n, precision)
        vre, vim = _cyc_embed_interval(a.v, precision)
        with _ivprec(precision + 20):
            re = re + vre * lam
            im = im + vim * lam
    return ComplexInterval(re, im)


@lru_cache(maxsize=None)
def _basis_floats(N: int, degree: int) -> tuple[complex, ...]:
    with mpmath.workprec(120):
        return tuple(complex(mpmath.expjpi(mpmath.mpf(2 * k) / N)) for k in range(degree))


def _cyc_embed_float(a: CycNum) -> complex:
    basis = _basis_floats(a.ctx.N, a.ctx.degree)
    s = 0j
    for coef, b in zip(a.num, basis):
        if coef:
            s += coef * b
    return s / a.den


def _cyc_float_mag(a: CycNum) -> tuple[complex, float]:
    basis = _basis_floats(a.ctx.N, a.ctx.degree)
    s = 0j
    mag = 0.0
    den = a.den
    for coef, b in zip(a.num, basis):
        if coef:
            term = (coef / den) * b
            s += term
            mag += abs(term)
    return s, mag


def _real_float_with_bound(a: ExtScalar) -> tuple[float, float]:
    # value and a generous bound on its floating-point error
    basis = _basis_floats(a.ctx.N, a.ctx.degree)
    lam = math.sqrt(_cyc_embed_float(a.ctx.c).real)
    total = 0.0
    mag = 0.0
    for part, scale in ((a.u, 1.0), (a.v, lam)):
        if part.is_zero():
            continue
        den = float(part.den)
        for coef, b in zip(part.num, basis):
            if coef:
                term = (float(coef) / den) * b.real * scale
                total += term
                mag += abs(term)
    return total, mag * 1e-12 + 1e-300


def _cyc_real_sign(a: CycNum) -> int:
    return real_sign(ExtScalar(a.ctx, a, a.ctx.zero_cyc))


def real_sign(a) -> int:
    """Sign of a real field element, decided exactly.

    Zero is detected from the canonical form; a nonzero value is isolated
    from zero by interval evaluation at increasing precision, which must
    terminate.
    """
    if isinstance(a, CycNum):
        a = ExtScalar(a.ctx, a, a.ctx.zero_cyc)
    if not a.is_real():
        raise NonRealError("real_sign called on a non-real element")
    if a.is_zero():
        return 0
    value, err = _real_float_with_bound(a)
    if abs(value) > err:
        return 1 if value > 0 else -1
    prec = 128
    while True:
        box = embed(a, prec)
        lo, hi = box.re.a, box.re.b
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        prec *= 2
        if prec > 1 << 16:
            raise ArithmeticError("sign refinement did not terminate")


def _square_root_in_field(c: CycNum) -> CycNum | None:
    """Return x in Q(xi_N) with x^2 = c, or None.

    c is an algebraic integer here, so any root lies in Z[xi].  Each sign
    pattern on the real embeddings fixes a candidate whose power-basis
    coordinates are recovered numerically; a candidate survives only if
    they are all integers, and survivors are checked exactly.
    """
    ctx = c.ctx
    if c.den != 1:
        raise ValueError("expected an algebraic integer")
    units = [k for k in range(1, ctx.N) if math.gcd(k, ctx.N) == 1]
    reps = [k for k in units if k < ctx.N - k] or units
    with mpmath.workprec(200):
        def emb(k):
            return sum(coef * mpmath.expjpi(mpmath.mpf(2 * j * k) / ctx.N) for j, coef in enumerate(c.num))

        roots = {}
        for k in reps:
            val = emb(k)
            if abs(mpmath.im(val)) > mpmath.mpf(10) ** -40:
                # non-real image: any square root in Q(xi) would still be a
                # root in C; fall back to the exact generic path below
                return _square_root_generic(c)
            roots[k] = mpmath.sqrt(mpmath.re(val)) if mpmath.re(val) >= 0 else mpmath.sqrt(val)
        mat = mpmath.matrix(len(units), ctx.degree)
        for r, k in enumerate(units):
            for j in range(ctx.degree):
                mat[r, j] = mpmath.expjpi(mpmath.mpf(2 * j * k) / ctx.N)
        for mask in range(1 << len(reps)):
            vals = []
            for k in units:
                kk = k if k in roots else ctx.N - k
                idx = reps.index(kk)
                sgn = -1 if (mask >> idx) & 1 else 1
                vals.append(sgn * roots[kk])
            sol = mpmath.lu_solve(mat, mpmath.matrix(vals))
            coords = []
            ok = True
            for j in range(ctx.degree):
                x = sol[j]
                if abs(mpmath.im(x)) > 1e-30:
                    ok = False
                    break
                r = mpmath.nint(mpmath.re(x))
                if abs(mpmath.re(x) - r) > 1e-30:
                    ok = False
                    break
                coords.append(int(r))
            if ok:
                cand = CycNum._normalise(ctx, coords, 1)
                if cand * cand == c:
                    return cand
    return None


def _square_root_generic(c: CycNum) -> CycNum | None:  # pragma: no cover - not reached for n >= 3
    raise ArithmeticError("lambda^2 has a non-real conjugate; unsupported field")


# -- formatting and parsing ---------------------------------------------------


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_cyc(a: CycNum, symbol: str = "x") -> str:
    terms = []
    for k, q in enumerate(a.coeffs):
        if not q:
            continue
        mono = "" if k == 0 else (symbol if k == 1 else f"{symbol}^{k}")
        if not mono:
            terms.append(_fmt_q(q))
        elif q == 1:
            terms.append(mono)
        elif q == -1:
            terms.append(f"-{mono}")
        else:
            terms.append(f"{_fmt_q(q)}*{mono}")
    if not terms:
        return "0"
    out = terms[0]
    for t in terms[1:]:
        out += t if t.startswith("-") else "+" + t
    return out


def format_scalar(a: ExtScalar) -> str:
    """Bit-exact text form, re-readable by :func:`parse_scalar`."""
    if a.v.is_zero():
        return format_cyc(a.u)
    u = format_cyc(a.u)
    v = format_cyc(a.v)
    vpart = f"({v})*L"
    if a.u.is_zero():
        return vpart
    return f"{u}+{vpart}"


class ScalarSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at offset {pos}")
        self.message = message
        self.pos = pos


class _ExprParser:
    # expr := term (('+'|'-') term)* ; term := unary (('*'|'/') unary)*
    # unary := '-' unary | power ; power := atom ('^' ['-'] int)?
    def __init__(self, ctx: FieldContext, text: str):
        self.ctx = ctx
        self.text = text
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse(self) -> ExtScalar:
        val = self._expr()
        if self._peek():
            raise ScalarSyntaxError(f"unexpected {self._peek()!r}", self.pos)
        return val

    def _expr(self):
        val = self._term()
        while self._peek() in ("+", "-"):
            op = self.text[self.pos]
            self.pos += 1
            rhs = self._term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def _term(self):
        val = self._unary()
        while self._peek() in ("*", "/"):
            op = self.text[self.pos]
            self.pos += 1
            at = self.pos
            rhs = self._unary()
            if op == "*":
                val = val * rhs
            else:
                if rhs.is_zero():
                    raise ScalarSyntaxError("division by zero", at)
                val = val / rhs
        return val

    def _unary(self):
        if self._peek() == "-":
            self.pos += 1
            return -self._unary()
        if self._peek() == "+":
            self.pos += 1
            return self._unary()
        return self._power()

    def _power(self):
        base = self._atom()
        if self._peek() == "^":
            self.pos += 1
            neg = False
            if self._peek() == "-":
                neg = True
                self.pos += 1
            self._skip()
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            if start == self.pos:
                raise ScalarSyntaxError("expected integer exponent", start)
            k = int(self.text[start : self.pos])
            if neg:
                if base.is_zero():
                    raise ScalarSyntaxError("division by zero", start)
                k = -k
            base = base ** k
        return base

    def _atom(self):
        ch = self._peek()
        if ch == "(":
            self.pos += 1
            val = self._expr()
            if self._peek() != ")":
                raise ScalarSyntaxError("expected ')'", self.pos)
            self.pos += 1
            return val
        if ch == "x":
            self.pos += 1
            return self.ctx.ext(self.ctx.xi)
        if ch == "L":
            self.pos += 1
            return self.ctx.lam
        if ch.isdigit():
            start = self.pos
            while self.pos < len(self.text) and self.text[self.pos].isdigit():
                self.pos += 1
            return self.ctx.ext(int(self.text[start : self.pos]))
        if not ch:
            raise ScalarSyntaxError("unexpected end of expression", self.pos)
        raise ScalarSyntaxError(f"unexpected {ch!r}", self.pos)


def parse_scalar(ctx: FieldContext, text: str) -> ExtScalar:
    """Evaluate a scalar literal: rationals, ``x`` (= xi_N), ``L`` (= lambda),
    ``+ - * / ^`` and parentheses."""
    return _ExprParser(ctx, text).parse()


def cyc_from_ints(ctx: FieldContext, nums: Iterable[int], den: int = 1) -> CycNum:
    return CycNum._normalise(ctx, list(nums), den)
