import math
import random

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from polycoeff.algebra import GF, parse_poly
from polycoeff.circuits import AffineForm, SigmaPiSigma, expand_sps
from polycoeff.errors import CharacteristicError
from polycoeff.generators import gen_random_sps
from polycoeff.transforms import (PowerSumForm, fischer_decompose, gate_degree_slice,
                                  linear_basis, power_count_bound, sum_of_powers_rewrite,
                                  sum_of_powers_rewrite_many)

F5, F101 = GF(5), GF(101)


def sym_form(f: AffineForm):
    expr = sympy.Integer(f.const)
    for v, c in f.lin:
        expr += c * sympy.Symbol(v)
    return expr


def sym_equal(psf: PowerSumForm, target_expr, p):
    """Compare sum c * L^d against a sympy expression modulo p, both expanded by sympy."""
    total = sum((t.coeff * sym_form(t.form) ** t.degree for t in psf.terms), sympy.Integer(0))
    diff = sympy.expand(total - target_expr)
    if diff == 0:
        return True
    gens = sorted(diff.free_symbols, key=str)
    return sympy.Poly(diff, *gens, modulus=p).is_zero


def random_forms(rng, d, names, p, const=False):
    out = []
    for _ in range(d):
        lin = {v: rng.randrange(p) for v in names if rng.random() < 0.7}
        if not any(lin.values()):
            lin = {names[0]: 1}
        out.append(AffineForm.make(lin, rng.randrange(p) if const else 0))
    return out


class TestFischer:
    def test_binomial_identity(self):
        x1, x2 = AffineForm.variable("x1"), AffineForm.variable("x2")
        ps = fischer_decompose([x1, x2], F5)
        assert ps.expand() == parse_poly("x1*x2", F5)
        got = {str(t.form): t.coeff for t in ps.terms}
        inv2 = pow(2, -1, 5)
        assert got == {"x1": (-inv2) % 5, "x2": (-inv2) % 5, "x1 + x2": inv2}

    def test_degree_one(self):
        f = AffineForm.make({"x1": 3, "x2": 1}, 2)
        ps = fischer_decompose([f], F5)
        assert len(ps) == 1 and ps.terms[0].coeff == 1 and ps.terms[0].form == f

    def test_degree_four_symbolic(self):
        xs = [AffineForm.variable(f"x{i}") for i in range(1, 5)]
        ps = fischer_decompose(xs, F101)
        assert len(ps) <= 15
        s = sympy.symbols("x1:5")
        assert sym_equal(ps, s[0] * s[1] * s[2] * s[3], 101)
        # times 4! the identity reads 24 * x1x2x3x4 = sum of signed subset-sum powers
        scaled = sum(((t.coeff * 24) % 101 * sym_form(t.form) ** 4 for t in ps.terms), 0)
        assert sympy.Poly(sympy.expand(scaled - 24 * s[0] * s[1] * s[2] * s[3]), *s, modulus=101).is_zero

    @pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 6])
    def test_random_against_sympy(self, d):
        rng = random.Random(d)
        for _ in range(5):
            forms = random_forms(rng, d, ["x1", "x2", "x3"], 101, const=True)
            ps = fischer_decompose(forms, F101)
            assert len(ps) <= 2**d - 1
            assert sym_equal(ps, math.prod(sym_form(f) for f in forms), 101)

    def test_characteristic_error(self):
        with pytest.raises(CharacteristicError, match="p > 5"):
            fischer_decompose([AffineForm.variable("x1")] * 5, F5)

    def test_json(self):
        ps = fischer_decompose([AffineForm.variable("x1"), AffineForm.variable("x2")], F5)
        assert ps.to_json()[0] == {"c": ps.terms[0].coeff, "form": {"c": 0, "lin": {"x1": 1}}, "d": 2}


class TestSlice:
    def test_affine_gate(self):
        gate = [AffineForm.make({"y1": 1}, 1), AffineForm.make({"z1": 1}, 1)]
        assert gate_degree_slice(gate, 2, F5) == parse_poly("y1*z1", F5)

    def test_homogeneous_gate(self):
        gate = [AffineForm.make({"y1": 1, "z1": 2}), AffineForm.variable("z2")]
        assert gate_degree_slice(gate, 2, F5) == parse_poly("y1*z2 + 2*z1*z2", F5)

    def test_slices_sum_to_homogeneous_circuit(self):
        c = gen_random_sps(3, 3, 4, homogeneous=True, seed=3, fld=F101)
        total = sum((gate_degree_slice(g, 3, F101) for g in c.gates[1:]),
                    gate_degree_slice(c.gates[0], 3, F101))
        assert total == expand_sps(c, F101)


class TestBasis:
    def test_repeated(self):
        y1 = AffineForm.variable("y1")
        assert linear_basis([y1, y1], F5) == ([0], [[1], [1]])

    def test_dependent_sum(self):
        y1, z1 = AffineForm.variable("y1"), AffineForm.variable("z1")
        basis, coords = linear_basis([y1, z1, AffineForm.make({"y1": 1, "z1": 1})], F5)
        assert basis == [0, 1] and coords[2] == [1, 1]

    def test_empty(self):
        assert linear_basis([], F5) == ([], [])


class TestRewrite:
    def test_single_power(self):
        lf = AffineForm.make({"y1": 2, "z1": 1})
        ps = sum_of_powers_rewrite([lf] * 3, 3, F101)
        assert len(ps) == 1 <= power_count_bound(3, 1)

    def test_d2_r2(self):
        gate = [AffineForm.variable("y1"), AffineForm.variable("z1")]
        ps = sum_of_powers_rewrite(gate, 2, F101)
        assert len(ps) <= 6 == power_count_bound(2, 2)

    def test_random_d3_r2_matches_slice(self):
        rng = random.Random(11)
        basis = random_forms(rng, 2, ["y1", "y2", "z1"], 101)
        gate = []
        for _ in range(3):
            a, b = rng.randrange(101), rng.randrange(1, 101)
            gate.append(AffineForm.make({v: (a * dict(basis[0].lin).get(v, 0) + b * dict(basis[1].lin).get(v, 0)) % 101
                                         for v in ["y1", "y2", "z1"]}, rng.randrange(101)))
        ps, r = sum_of_powers_rewrite_many([gate], 3, F101)
        assert r <= 2 and len(ps) <= power_count_bound(3, r)
        target = sympy.expand(math.prod(sym_form(f) for f in gate))
        deg3 = sum((t for t in sympy.Add.make_args(target)
                    if sympy.Poly(t, *sympy.symbols("y1 y2 z1")).total_degree() == 3), 0)
        assert sym_equal(ps, deg3, 101)

    def test_degree_zero(self):
        gate = [AffineForm.make({"y1": 1}, 2), AffineForm.make({"z1": 1}, 3)]
        ps = sum_of_powers_rewrite(gate, 0, F101)
        assert ps.expand() == parse_poly("6", F101)

    def test_characteristic(self):
        with pytest.raises(CharacteristicError):
            sum_of_powers_rewrite([AffineForm.variable("y1")] * 3, 3, GF(3))


# -- properties --------------------------------------------------------------------------------

@st.composite
def linear_tuples(draw, max_d=6):
    d = draw(st.integers(1, max_d))
    names = ["x1", "x2", "x3", "x4"]
    forms = []
    for _ in range(d):
        lin = {v: draw(st.integers(0, 100)) for v in names}
        const = draw(st.integers(0, 100))
        forms.append(AffineForm.make(lin, const))
    return forms


@settings(max_examples=80, deadline=None)
@given(linear_tuples())
def test_fischer_expansion_property(forms):
    ps = fischer_decompose(forms, F101, verify=False)
    assert len(ps) <= 2 ** len(forms) - 1
    prod = parse_poly("1", F101)
    for f in forms:
        prod = prod * f.to_poly(F101)
    assert ps.expand() == prod


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 10**6), st.booleans())
def test_power_rewrite_property(d, r, seed, homogeneous):
    c = gen_random_sps(1, d, 4, homogeneous=homogeneous, r=r, seed=seed, fld=F101)
    gate = c.gates[0]
    ps, rh = sum_of_powers_rewrite_many([gate], d, F101, verify=False)
    assert rh <= r
    assert len(ps) <= power_count_bound(d, rh)
    assert ps.expand() == gate_degree_slice(gate, d, F101)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(1, 3), st.integers(0, 10**6))
def test_shared_basis_rewrite_of_whole_circuit(k, d, r, seed):
    c = gen_random_sps(k, d, 4, homogeneous=False, r=r, seed=seed, fld=F101, scope="total")
    ps, rh = sum_of_powers_rewrite_many(c.gates, d, F101, verify=False)
    assert len(ps) <= power_count_bound(d, rh)
    target = sum((gate_degree_slice(g, d, F101) for g in c.gates[1:]),
                 gate_degree_slice(c.gates[0], d, F101))
    assert ps.expand() == target


def test_sps_zero_sum_has_no_terms():
    y1 = AffineForm.variable("y1")
    neg = AffineForm.make({"y1": 100})
    ps, _ = sum_of_powers_rewrite_many([[y1, y1], [neg, y1]], 2, F101)
    assert len(ps) == 0 and not ps.expand()
    assert not expand_sps(SigmaPiSigma(((y1, y1), (neg, y1))), F101)
