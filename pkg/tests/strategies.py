"""Hypothesis strategies for field elements and motions."""

from fractions import Fraction

from hypothesis import strategies as st

from tilekit.geometry import Isometry
from tilekit.numberfield import ExtScalar, field_init

ORDERS = (3, 4, 5, 6, 8)

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=6)


def cycnums(ctx, coeffs=small_q):
    return st.lists(coeffs, min_size=ctx.degree, max_size=ctx.degree).map(ctx.from_coeffs)


def extscalars(ctx, real_only=False):
    v = cycnums(ctx) if not real_only else st.just(ctx.zero_cyc)
    return st.builds(lambda u, w: ExtScalar(ctx, u, w), cycnums(ctx), v)


def real_extscalars(ctx):
    """Elements fixed by conjugation: a + conj(a) with a general."""
    return st.builds(lambda a: a + a.conj(), extscalars(ctx))


def units(ctx):
    """Unit-modulus field elements: +-xi^k times (zeta/conj zeta)^j."""
    mu = ctx.mu
    return st.builds(
        lambda k, j, s: ctx.ext(ctx.xi_pow(k)) * (mu**j) * s,
        st.integers(0, ctx.N - 1),
        st.integers(-2, 2),
        st.sampled_from([1, -1]),
    )


def motions(ctx):
    return st.builds(lambda a, r, t: Isometry(a, r, t), units(ctx), st.integers(0, 1), extscalars(ctx))


fields = st.sampled_from(ORDERS).map(field_init)
