from fractions import Fraction

import sympy
from hypothesis import strategies as st

from cartanfree.polyring import MultiPoly, PolyShiftOp

SYMS = sympy.symbols("h1:5")

small_q = st.fractions(min_value=-5, max_value=5, max_denominator=4)
nonzero_q = small_q.filter(lambda x: x != 0)


@st.composite
def polys(draw, n, max_deg=3, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exp = tuple(draw(st.integers(0, max_deg)) for _ in range(n))
        terms[exp] = draw(small_q)
    return MultiPoly(n, terms)


@st.composite
def shifts(draw, n, bound=3):
    return tuple(draw(st.integers(-bound, bound)) for _ in range(n))


@st.composite
def points(draw, n):
    return tuple(draw(small_q) for _ in range(n))


@st.composite
def ops(draw, n, d):
    mat = [[draw(polys(n, max_deg=2, max_terms=2)) for _ in range(d)] for _ in range(d)]
    return PolyShiftOp(mat, draw(shifts(n)), n)


def to_sympy(p: MultiPoly):
    expr = sympy.Integer(0)
    for exp, c in p.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for k, e in enumerate(exp):
            term *= SYMS[k] ** e
        expr += term
    return sympy.expand(expr)


def q(x) -> Fraction:
    return Fraction(x)
