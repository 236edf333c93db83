"""Hypothesis strategies shared across the property tests."""

from hypothesis import strategies as st

from polycoeff.algebra import GF, Polynomial

FIELDS = (2, 3, 5, 101)
YZ = ("y1", "y2", "y3", "z1", "z2", "z3")


def fields(ps=FIELDS):
    return st.sampled_from(ps).map(GF)


@st.composite
def polys(draw, fld, names=YZ, max_terms=5, max_exp=3):
    n_terms = draw(st.integers(0, max_terms))
    pairs = []
    for _ in range(n_terms):
        vs = draw(st.lists(st.sampled_from(names), max_size=3, unique=True))
        exps = {v: draw(st.integers(1, max_exp)) for v in vs}
        pairs.append((exps, draw(st.integers(0, fld.p - 1))))
    return Polynomial.from_terms(fld, pairs, names)


@st.composite
def assignments(draw, fld, names=YZ):
    vs = draw(st.lists(st.sampled_from(names), unique=True))
    return {v: draw(st.integers(0, fld.p - 1)) for v in vs}
