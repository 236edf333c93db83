import random

import pytest
from hypothesis import given, settings, strategies as st

from polycoeff.algebra import GF, Polynomial, parse_poly
from polycoeff.coeffmatrix import (ScalarMatrix, build_coeff_matrix,
                                   build_partial_derivatives_matrix, coeff_matrix_under,
                                   enumerate_substitutions, matrix_rank, maxrank, poly_maxrank,
                                   rank_mod_p, substitute_matrix)
from polycoeff.errors import (BudgetExceeded, IncompleteSubstitution, RankLimitExceeded,
                              StructureError)
from polycoeff.generators import gen_q

from oracles import brute_maxrank, echelon_rank, minor_rank, naive_coeff_matrix, to_plain
from strategies import polys

F2, F3, F5 = GF(2), GF(3), GF(5)
EXAMPLE = "y1*z1 + y1^2*z1 + y1*z1*z2 + z1"


def cell(M, ymono, zmono):
    """Entry addressed by support names, e.g. cell(M, ["y1"], ["z1", "z2"])."""
    r = sum(1 << M.ys.index(v) for v in ymono)
    c = sum(1 << M.zs.index(v) for v in zmono)
    return M.entries.get((r, c), Polynomial.zero(M.field))


class TestBuild:
    def test_example_entries(self):
        M = build_coeff_matrix(parse_poly(EXAMPLE, F3))
        assert cell(M, ["y1"], ["z1"]) == parse_poly("1 + y1", F3)
        assert cell(M, [], ["z1"]) == parse_poly("1", F3)
        assert cell(M, ["y1"], ["z1", "z2"]) == parse_poly("1", F3)
        assert len(M.entries) == 3

    def test_multilinear_all_constant(self):
        M = build_partial_derivatives_matrix(parse_poly("y1*z1 + y2*z2", F2))
        assert M.is_constant()
        assert {rc: e.constant_value() for rc, e in M.entries.items()} == {(1, 1): 1, (2, 2): 1}

    def test_partial_derivatives_requires_multilinear(self):
        with pytest.raises(StructureError):
            build_partial_derivatives_matrix(parse_poly("y1^2", F2))

    def test_single_entry(self):
        M = build_partial_derivatives_matrix(parse_poly("y1*z1", F2))
        assert list(M.entries) == [(1, 1)]

    def test_zero(self):
        M = build_coeff_matrix(Polynomial.zero(F2), ["y1"], ["z1"])
        assert not M.entries
        assert maxrank(M).value == 0

    def test_q8_six_entries_on_distinct_lines(self):
        q = gen_q(8)
        M = coeff_matrix_under(q.f, q.partition)
        assert len(M.entries) == 6
        assert len(M.nonzero_rows()) == 6 and len(M.nonzero_cols()) == 6
        assert all(e.constant_value() == 1 for e in M.entries.values())

    def test_csv_dump(self):
        M = build_coeff_matrix(parse_poly(EXAMPLE, F3))
        assert M.to_csv().splitlines() == [
            "y_support,z_support,entry", "1,z1,1", "y1,z1,y1 + 1", "y1,z1*z2,1"]

    def test_overlapping_sides_rejected(self):
        with pytest.raises(StructureError):
            build_coeff_matrix(parse_poly("y1", F2), ["y1"], ["y1"])


class TestSubstituteMatrix:
    def test_example_entry_evaluates(self):
        M = build_coeff_matrix(parse_poly(EXAMPLE, F3))
        S = substitute_matrix(M, {"y1": 1})
        assert S.data[S.rows.index(1)][S.cols.index(1)] == 2

    def test_constant_matrix_unchanged(self):
        M = build_coeff_matrix(parse_poly("y1*z1 + 2*y2*z2", F3))
        S = substitute_matrix(M, {})
        assert S.data == ((1, 0), (0, 2))

    def test_compaction(self):
        M = build_coeff_matrix(parse_poly("y1*z1 + y1^2*z1", F5))
        S = substitute_matrix(M, {"y1": 4})
        assert S.shape == (0, 0)

    def test_missing_assignment(self):
        M = build_coeff_matrix(parse_poly(EXAMPLE, F3))
        with pytest.raises(IncompleteSubstitution):
            substitute_matrix(M, {})


class TestRank:
    def test_identity(self):
        assert matrix_rank(ScalarMatrix.from_rows(F5, [[int(i == j) for j in range(4)] for i in range(4)])) == 4

    def test_all_ones(self):
        assert matrix_rank(ScalarMatrix.from_rows(F5, [[1] * 3] * 3)) == 1

    def test_gf2(self):
        assert matrix_rank(ScalarMatrix.from_rows(F2, [[1, 1], [1, 1]])) == 1

    def test_limit(self):
        with pytest.raises(RankLimitExceeded):
            matrix_rank(ScalarMatrix.from_rows(F2, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]), limit=2)

    @pytest.mark.parametrize("p", [2, 3, 5, 101])
    def test_against_minor_expansion(self, p):
        rng = random.Random(p)
        for _ in range(150):
            m, n = rng.randint(1, 5), rng.randint(1, 5)
            density = rng.random()
            rows = [[rng.randrange(p) if rng.random() < density else 0 for _ in range(n)]
                    for _ in range(m)]
            expected = minor_rank(rows, p)
            assert rank_mod_p(rows, p) == expected
            assert matrix_rank(ScalarMatrix.from_rows(GF(p), rows)) == expected
            assert echelon_rank(rows, p) == expected


class TestMaxrank:
    def test_constant_matrix_needs_no_substitution(self):
        res = maxrank(build_coeff_matrix(parse_poly("y1*z1 + y2*z2", F2)))
        assert (res.value, res.exact, res.entry_variables) == (2, True, [])

    def test_example_gf2(self):
        res = maxrank(build_coeff_matrix(parse_poly(EXAMPLE, F2)), mode="exhaustive")
        assert (res.value, res.exact) == (2, True)
        assert res.witness == {"y1": 0}

    def test_square_of_linear_form_gf3(self):
        f = parse_poly("y1 + z1", F3) ** 2
        res = maxrank(build_coeff_matrix(f))
        assert res.value == 2
        assert res.value <= 2 + 1
        assert brute_maxrank(to_plain(f), ["y1"], ["z1"], 3) == 2

    def test_witness_reproduces_value(self):
        f = parse_poly("y1*z1*z2 + y1^2*z2 + y2*z1 + y2^2*z1*z2", F3)
        M = build_coeff_matrix(f)
        res = maxrank(M)
        assert matrix_rank(substitute_matrix(M, res.witness)) == res.value

    def test_witness_is_first_maximiser(self):
        M = build_coeff_matrix(parse_poly("y1*z1 + y1^2*z1 + y2*z2 + y2^2*z2", F3))
        res = maxrank(M)
        for s in enumerate_substitutions(M.entry_variables(), F3):
            if matrix_rank(substitute_matrix(M, s)) == res.value:
                assert s == res.witness
                break

    def test_budget(self):
        M = build_coeff_matrix(parse_poly("y1^2*z1 + y2^2*z2 + y3^2*z3", F5))
        with pytest.raises(BudgetExceeded, match="sampled"):
            maxrank(M, budget=100)

    def test_sampled_is_lower_bound_and_not_exact(self):
        f = parse_poly("y1^2*z1 + y2^2*z1 + y1*y2*z2 + y3*z1*z2", F3)
        M = build_coeff_matrix(f)
        exact = maxrank(M).value
        for seed in range(5):
            res = maxrank(M, mode="sampled", seed=seed, trials=8)
            assert res.exact is False and res.value <= exact
        assert maxrank(M, mode="sampled", seed=3, trials=8) == maxrank(M, mode="sampled", seed=3, trials=8)

    def test_bad_mode(self):
        with pytest.raises(ValueError):
            maxrank(build_coeff_matrix(parse_poly("y1*z1", F2)), mode="guess")

    def test_poly_maxrank_with_partition(self):
        q = gen_q(4)
        assert poly_maxrank(q.f, q.partition).value == 2


# -- properties ------------------------------------------------------------------------------

YZ = ("y1", "y2", "y3", "z1", "z2", "z3")


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_reconstruction_identity(data):
    fld = data.draw(st.sampled_from([F2, F3]))
    f = data.draw(polys(fld, names=YZ))
    M = build_coeff_matrix(f, YZ[:3], YZ[3:])
    assert M.reconstruct() == f
    for (r, c), e in M.entries.items():
        allowed = {M.ys[i] for i in range(3) if r >> i & 1} | {M.zs[j] for j in range(3) if c >> j & 1}
        assert e.variables() <= allowed


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_matrix_matches_definition_oracle(data):
    fld = data.draw(st.sampled_from([F2, F3]))
    f = data.draw(polys(fld, names=YZ))
    M = build_coeff_matrix(f, YZ[:3], YZ[3:])
    ours = {}
    for (r, c), e in M.entries.items():
        key = (frozenset(M.ys[i] for i in range(3) if r >> i & 1),
               frozenset(M.zs[j] for j in range(3) if c >> j & 1))
        ours[key] = to_plain(e)
    assert ours == naive_coeff_matrix(to_plain(f), YZ[:3], YZ[3:], fld.p)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_maxrank_matches_brute_force(data):
    fld = data.draw(st.sampled_from([F2, F3]))
    f = data.draw(polys(fld, names=("y1", "y2", "z1", "z2"), max_terms=4, max_exp=2))
    M = build_coeff_matrix(f, ["y1", "y2"], ["z1", "z2"])
    assert maxrank(M).value == brute_maxrank(to_plain(f), ["y1", "y2"], ["z1", "z2"], fld.p)
