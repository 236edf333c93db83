import math

import pytest
from hypothesis import given, settings, strategies as st

from polycoeff.algebra import GF, analyze
from polycoeff.circuits import expand, sps_properties
from polycoeff.circuits import formula as fm
from polycoeff.circuits.serialize import circuit_to_json
from polycoeff.coeffmatrix import coeff_matrix_under
from polycoeff.errors import BudgetExceeded, StructureError
from polycoeff.generators import (colex_subsets, gen_imm, gen_ordered_abp, gen_q,
                                  gen_random_product_sparse, gen_random_sps,
                                  gen_sum_of_products_abp, imm_abp)

from oracles import imm_by_paths, imm_entry_by_loops

F2, F3 = GF(2), GF(3)


def monomial_sets(f):
    assert all(c == 1 for c in f.terms.values())
    return {frozenset(v for v, _ in m) for m in f.terms}


class TestImm:
    def test_two_by_two(self):
        f = gen_imm(2, 2).f
        assert monomial_sets(f) == {frozenset({"x1_1_1", "x2_1_1"}), frozenset({"x1_1_2", "x2_2_1"})}

    @pytest.mark.parametrize("n,d", [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)])
    def test_monomial_count(self, n, d):
        stats = analyze(gen_imm(n, d).f)
        assert stats.num_monomials == n ** (d - 1)
        assert stats.is_multilinear and stats.is_homogeneous and stats.degree == d

    @pytest.mark.parametrize("d", [1, 2, 5])
    def test_one_by_one(self, d):
        assert monomial_sets(gen_imm(1, d).f) == {frozenset(f"x{i}_1_1" for i in range(1, d + 1))}

    @pytest.mark.parametrize("n,d", [(2, 3), (3, 3), (2, 5), (4, 2)])
    def test_matches_path_oracle(self, n, d):
        assert monomial_sets(gen_imm(n, d).f) == imm_by_paths(n, d)

    def test_grid_matches_triple_loop_oracle(self):
        inst = gen_imm(3, 3, full_grid=True)
        for (j, k), f in inst.grid.items():
            assert monomial_sets(f) == imm_entry_by_loops(3, 3, j, k)
        assert inst.grid[(1, 1)] == inst.f

    def test_abp_computes_imm(self):
        assert expand(imm_abp(2, 4), F2) == gen_imm(2, 4).f

    def test_budget(self):
        with pytest.raises(BudgetExceeded):
            gen_imm(4, 6, budget=100)


class TestQ:
    def test_n4(self):
        q = gen_q(4)
        assert q.w == 2 and all(sum(e for _, e in m) == 2 for m in q.f.terms)

    def test_n8(self):
        q = gen_q(8)
        assert q.w == math.comb(4, 2) == 6
        assert analyze(q.f).num_monomials == 6 and analyze(q.f).degree == 4

    @pytest.mark.parametrize("n", [4, 8, 12])
    def test_each_monomial_splits_evenly(self, n):
        q = gen_q(n)
        ys = set(q.partition.y)
        for m in q.f.terms:
            names = [v for v, _ in m]
            assert sum(v in ys for v in names) == n // 4
            assert len(names) - sum(v in ys for v in names) == n // 4

    def test_permutation_like_matrix(self):
        q = gen_q(8)
        M = coeff_matrix_under(q.f, q.partition)
        rows = [r for r, _ in M.entries]
        cols = [c for _, c in M.entries]
        assert len(set(rows)) == len(rows) == 6 and len(set(cols)) == len(cols) == 6

    def test_colex(self):
        assert colex_subsets(["a", "b", "c"], 2) == [("a", "b"), ("a", "c"), ("b", "c")]
        assert colex_subsets(["a", "b", "c", "d"], 2)[3] == ("a", "d")

    def test_bad_n(self):
        with pytest.raises(StructureError):
            gen_q(6)


class TestRandomSPS:
    def test_diagonal_when_r_is_one(self):
        c = gen_random_sps(3, 4, 5, r=1, seed=9)
        for g in c.gates:
            assert len(set(g)) == 1
        assert sps_properties(c, F3).product_dimension == 1

    def test_homogeneous_flag(self):
        c = gen_random_sps(3, 3, 4, homogeneous=True, seed=1)
        assert all(f.const == 0 for f in c.forms())
        assert sps_properties(c, F3).is_homogeneous

    def test_inhomogeneous_has_constants(self):
        c = gen_random_sps(4, 4, 4, homogeneous=False, seed=2)
        assert any(f.const for f in c.forms())

    def test_deterministic(self):
        assert gen_random_sps(2, 3, 4, seed=5) == gen_random_sps(2, 3, 4, seed=5)
        assert gen_random_sps(2, 3, 4, seed=5) != gen_random_sps(2, 3, 4, seed=6)

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_dimension_caps(self, r):
        for seed in range(10):
            g = gen_random_sps(3, 4, 6, r=r, seed=seed, scope="gate")
            assert sps_properties(g, F3).product_dimension <= r
            t = gen_random_sps(3, 4, 6, r=r, seed=seed, scope="total", fld=GF(101))
            assert sps_properties(t, GF(101)).total_dimension <= r


class TestRandomPSF:
    def test_s0_disjoint_only_is_multilinear(self):
        for seed in range(20):
            f = gen_random_product_sparse(0, 0, 8, seed=seed)
            assert fm.is_syntactic_multilinear(f)

    @pytest.mark.parametrize("s,d", [(0, 2), (1, 1), (2, 3)])
    def test_respects_parameters(self, s, d):
        for seed in range(20):
            f = gen_random_product_sparse(s, d, 12, seed=seed)
            ok, depth = fm.is_product_sparse(f, s, F2)
            assert ok and depth <= d

    def test_deterministic(self):
        a = gen_random_product_sparse(1, 2, 10, seed=4)
        assert a == gen_random_product_sparse(1, 2, 10, seed=4)


class TestABPGenerators:
    def test_ordered_deterministic(self):
        assert circuit_to_json(gen_ordered_abp(3, seed=1)) == circuit_to_json(gen_ordered_abp(3, seed=1))

    def test_edges_read_pi_in_order(self):
        pi = ["x4", "x2", "x1", "x3"]
        b = gen_ordered_abp(2, pi=pi, seed=0, width=2, fld=F3)
        for e in b.edges:
            assert e.weight.support() == {pi[b.level_of(e.dst) - 1]}

    def test_sum_of_products(self):
        assert analyze(expand(gen_sum_of_products_abp(3), F2)).num_monomials == 3

    def test_bad_pi(self):
        with pytest.raises(StructureError):
            gen_ordered_abp(2, pi=["x1", "x1", "x2", "x3"])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4))
def test_imm_property_against_oracle(n, d):
    assert monomial_sets(gen_imm(n, d).f) == imm_by_paths(n, d)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_generators_are_seed_functions(seed):
    assert gen_random_sps(2, 2, 3, seed=seed) == gen_random_sps(2, 2, 3, seed=seed)
    assert gen_random_product_sparse(1, 2, 6, seed=seed) == gen_random_product_sparse(1, 2, 6, seed=seed)
    assert gen_ordered_abp(2, seed=seed) == gen_ordered_abp(2, seed=seed)
