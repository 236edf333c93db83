"""Single-instance claim checkers.  Each returns a :class:`VerdictReport`."""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from ..algebra import DEFAULT_BUDGET, FieldSpec, Polynomial, homogeneous_slice, poly_mul, sort_vars
from ..circuits import formula as fm
from ..circuits.abp import (ABP, abp_partition_check, abp_segment_poly, expand_abp,
                            recheck_partition_verdict)
from ..circuits.sps import AffineForm, SigmaPiSigma, affine_rank, expand_sps
from ..coeffmatrix import (DEFAULT_EXHAUSTIVE_BUDGET, DEFAULT_RANK_LIMIT, DEFAULT_TRIALS,
                           MaxrankResult, PolyCoeffMatrix, build_coeff_matrix, coeff_matrix_under,
                           matrix_rank, maxrank, substitute_matrix)
from ..errors import RankLimitExceeded, SelfCheckFailed, StructureError
from ..generators import gen_imm, gen_q
from ..partition import Partition, halves_partition, random_partition, split_yz
from ..transforms import fischer_decompose, power_count_bound, sum_of_powers_rewrite_many
from .report import VerdictReport, stopwatch


@dataclass(frozen=True)
class RunOptions:
    seed: int = 0
    samples: int = DEFAULT_TRIALS  # substitutions per sampled maxrank
    term_budget: int = DEFAULT_BUDGET
    maxrank_budget: int = DEFAULT_EXHAUSTIVE_BUDGET
    rank_limit: int = DEFAULT_RANK_LIMIT
    jobs: int = 1


DEFAULTS = RunOptions()


# -- shared helpers -------------------------------------------------------------

def le_scaled_sqrt2(value: int, mult: int, e2: int) -> bool:
    """Exact test of ``value <= mult * 2**(e2 / 2)`` for integers (``e2`` may be odd or negative)."""
    lhs, rhs = value * value, mult * mult
    if e2 >= 0:
        rhs <<= e2
    else:
        lhs <<= -e2
    return lhs <= rhs


def scaled_sqrt2(mult: int, e2: int) -> float:
    return mult * 2.0 ** (e2 / 2)


def measure(M: PolyCoeffMatrix, opts: RunOptions = DEFAULTS, exhaustive: bool = False,
            seed=None) -> MaxrankResult:
    """maxrank of ``M``, exhaustive when affordable (or mandatory), with the witness re-checked."""
    k = len(M.entry_variables())
    if exhaustive or M.field.p ** k <= opts.maxrank_budget:
        res = maxrank(M, "exhaustive", budget=opts.maxrank_budget, rank_limit=opts.rank_limit)
    else:
        res = maxrank(M, "sampled", seed=opts.seed if seed is None else seed,
                      trials=opts.samples, budget=opts.maxrank_budget, rank_limit=opts.rank_limit)
    again = matrix_rank(substitute_matrix(M, res.witness), opts.rank_limit)
    if again != res.value:
        raise SelfCheckFailed(f"witness substitution gives rank {again}, reported {res.value}")
    return res


def _matrix(f: Polynomial, part: Partition | None) -> PolyCoeffMatrix:
    if part is not None:
        return coeff_matrix_under(f, part)
    return build_coeff_matrix(f)


def _evidence(res: MaxrankResult) -> str:
    return "exact" if res.exact else "lower-bound-only"


def _mr_witness(res: MaxrankResult) -> dict:
    return {"substitution": dict(res.witness), "mode": res.mode, "exact": res.exact}


# -- depth-3 circuits -------------------------------------------------------------

def check_depth3_bound(c: SigmaPiSigma, part: Partition | None = None,
                       fld: FieldSpec = FieldSpec(3), opts: RunOptions = DEFAULTS) -> VerdictReport:
    """maxrank of a homogeneous depth-3 circuit against ``k * 2^d``."""
    clock = stopwatch()
    for gi, g in enumerate(c.gates):
        for fi, form in enumerate(g):
            if not form.is_homogeneous(fld):
                raise StructureError(f"gate #{gi}, factor {fi} has nonzero constant {form.const}")
    f = expand_sps(c, fld, opts.term_budget)
    res = measure(_matrix(f, part), opts)
    d = max(len(g) for g in c.gates)
    bound = c.k * 2**d
    return VerdictReport(
        claim="depth3", params={"k": c.k, "d": d, "variables": c.variables()},
        measured=res.value, bound=bound, holds=res.value <= bound, field=fld.p, seed=opts.seed,
        witness={**_mr_witness(res), "partition": part.to_json() if part else None},
        details={"evidence": _evidence(res)}, runtime_ms=clock())


# -- iterated matrix multiplication -----------------------------------------------------

def check_imm_rank(n: int, d: int, fld: FieldSpec = FieldSpec(2),
                   opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    inst = gen_imm(n, d, fld=fld, budget=opts.term_budget)
    M = coeff_matrix_under(inst.f, inst.partition)
    if not M.is_constant():
        raise SelfCheckFailed("IMM coefficient matrix has non-constant entries")
    rank = matrix_rank(substitute_matrix(M, {}), opts.rank_limit)
    expected = n ** (d - 1)
    return VerdictReport(
        claim="imm-rank", params={"n": n, "d": d}, measured=rank, bound=expected,
        holds=rank == expected, field=fld.p,
        witness={"partition": inst.partition.to_json()},
        details={"monomials": len(inst.f), "nonzero_rows": len(M.nonzero_rows()),
                 "nonzero_cols": len(M.nonzero_cols()), "relation": "equal"},
        runtime_ms=clock())


def check_imm_grid(n: int, d: int, fld: FieldSpec = FieldSpec(2),
                   opts: RunOptions = DEFAULTS) -> VerdictReport:
    """Every entry of the product has full rank; columns of entries in one row are disjoint."""
    clock = stopwatch()
    if d % 2:
        raise StructureError(f"grid check needs an even number of matrices, got d={d}")
    inst = gen_imm(n, d, full_grid=True, fld=fld, budget=opts.term_budget)
    expected = n ** (d - 1)
    ranks, cols = {}, {}
    for (i, j), f in sorted(inst.grid.items()):
        M = coeff_matrix_under(f, inst.partition)
        if not M.is_constant():
            raise SelfCheckFailed(f"entry ({i},{j}) has non-constant coefficients")
        ranks[(i, j)] = matrix_rank(substitute_matrix(M, {}), opts.rank_limit)
        cols[(i, j)] = set(M.nonzero_cols())
    overlaps = []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            for j2 in range(j + 1, n + 1):
                if cols[(i, j)] & cols[(i, j2)]:
                    overlaps.append([i, j, j2])
    bad_rank = [[i, j, r] for (i, j), r in ranks.items() if r != expected]
    return VerdictReport(
        claim="imm-grid", params={"n": n, "d": d}, measured=sorted(set(ranks.values())),
        bound=expected, holds=not bad_rank and not overlaps, field=fld.p,
        witness={"rank_mismatches": bad_rank, "column_overlaps": overlaps},
        details={"ranks": {f"{i},{j}": r for (i, j), r in ranks.items()},
                 "columns_disjoint": not overlaps},
        runtime_ms=clock())


# -- the diagonal polynomial ------------------------------------------------------------

def check_q_rank(n: int, fld: FieldSpec = FieldSpec(2), opts: RunOptions = DEFAULTS) -> VerdictReport:
    """Rank of Q under its partition is ``w`` and ``w >= 2^(n/2) / sqrt(n)``."""
    clock = stopwatch()
    inst = gen_q(n, fld)
    w = math.comb(n // 2, n // 4)
    if w > opts.rank_limit:
        raise RankLimitExceeded(f"w = {w} exceeds the rank limit {opts.rank_limit}")
    M = coeff_matrix_under(inst.f, inst.partition)
    rank = matrix_rank(substitute_matrix(M, {}), opts.rank_limit)
    # w >= 2^(n/2)/sqrt(n)  <=>  w^2 * n >= 2^n
    growth = w * w * n >= 2**n
    return VerdictReport(
        claim="q-rank", params={"n": n}, measured=rank, bound=w,
        holds=rank == w and growth, field=fld.p,
        witness={"partition": inst.partition.to_json(),
                 "pairs": [[list(s), list(t)] for s, t in inst.pairs]},
        details={"w": w, "lower_estimate": 2 ** (n / 2) / math.sqrt(n),
                 "w_meets_estimate": growth, "relation": "equal"},
        runtime_ms=clock())


# -- product-sparse formulas ------------------------------------------------------------

def _proof_case(node, prof, k, labels, idx) -> str:
    if fm.is_unbalanced(prof, k):
        return "unbalanced"
    if isinstance(node, fm.Plus):
        return "plus"
    if isinstance(node, fm.Times):
        return labels[idx]
    return "leaf"


def check_product_sparse_bound(f, part: Partition | None, s: int, k: int,
                               fld: FieldSpec = FieldSpec(2),
                               opts: RunOptions = DEFAULTS) -> VerdictReport:
    """Bound ``2^(s d(v)) |Phi_v| 2^(b(v) - k/2)`` at every k-weak node.

    Each weak node is tagged with the proof case it falls under:
    ``unbalanced``, ``disjoint`` product, ``sparse`` product or ``plus``.
    """
    clock = stopwatch()
    g = fm.apply_partition(f, part) if part is not None else f
    labels = fm.classify_product_gates(g, s, fld, opts.term_budget)
    bad = sorted(i for i, lab in labels.items() if lab == "neither")
    if bad:
        raise StructureError(f"product gate #{bad[0]} is neither disjoint nor {s}-sparse")
    flat = fm.flatten(g)
    prof = fm.node_profiles(g)
    kw = fm.k_weak_nodes(g, k, prof)
    polys = fm.expand_nodes(g, fld, opts.term_budget)
    if part is not None:
        ys, zs = part.y_names, part.z_names
    else:
        ys, zs = split_yz(fm.variables(g))
    records, cases, violations = [], Counter(), []
    for v in sorted(kw.weak):
        res = measure(build_coeff_matrix(polys[v], ys, zs), opts)
        pv = prof[v]
        e2 = 2 * s * pv.depth + pv.b2 - k
        ok = le_scaled_sqrt2(res.value, pv.size, e2)
        case = _proof_case(flat.nodes[v], pv, k, labels, v)
        cases[case] += 1
        rec = {"node": v, "case": case, "maxrank": res.value, "exact": res.exact,
               "bound": scaled_sqrt2(pv.size, e2), "size": pv.size, "depth": pv.depth,
               "a2": pv.a2, "b2": pv.b2, "holds": ok}
        records.append(rec)
        if not ok:
            violations.append(rec)
    return VerdictReport(
        claim="product-sparse", params={"s": s, "k": k, "nodes": len(flat),
                                        "depth": prof[flat.root].depth},
        measured=len(violations), bound=0, holds=not violations, field=fld.p, seed=opts.seed,
        witness={"first_violation": violations[0] if violations else None,
                 "partition": part.to_json() if part else None},
        details={"weak_nodes": len(kw.weak), "cases": dict(sorted(cases.items())),
                 "nodes": records, "relation": "violations == 0"},
        runtime_ms=clock())


def check_preprocess_invariance(f, replacements, k: int, fld: FieldSpec = FieldSpec(2),
                                part: Partition | None = None) -> VerdictReport:
    """Y_v, Z_v, a, b and the k-weak set are unchanged by preprocessing."""
    clock = stopwatch()
    g = fm.preprocess(f, replacements, fld)
    if part is not None:
        f, g = fm.apply_partition(f, part), fm.apply_partition(g, part)
    pf, pg = fm.node_profiles(f), fm.node_profiles(g)
    same_profiles = [(a.ys, a.zs, a.a2, a.b2) for a in pf] == [(b.ys, b.zs, b.a2, b.b2) for b in pg]
    wf, wg = fm.k_weak_nodes(f, k, pf).weak, fm.k_weak_nodes(g, k, pg).weak
    return VerdictReport(
        claim="preprocess", params={"k": k, "nodes": len(pf)},
        measured=sorted(wg), bound=sorted(wf), holds=same_profiles and wf == wg, field=fld.p,
        details={"profiles_equal": same_profiles}, runtime_ms=clock())


def partition_experiment(f, k: int, trials: int, seed=0,
                         names: Sequence[str] | None = None) -> VerdictReport:
    """Frequency over random balanced partitions that the root (or every node) is k-weak.

    Observational: the report asserts nothing (``holds`` is ``None``).
    """
    clock = stopwatch()
    names = sort_vars(names if names is not None else fm.variables(f))
    flat = fm.flatten(f)
    root_hits = all_hits = 0
    for i in range(trials):
        part = random_partition(names, rng=random.Random(f"{seed}:partition:{i}"))
        weak = fm.k_weak_nodes(fm.apply_partition(f, part), k).weak
        root_hits += flat.root in weak
        all_hits += len(weak) == len(flat)
    freq = root_hits / trials if trials else 0.0
    return VerdictReport(
        claim="partition-experiment", params={"k": k, "trials": trials, "variables": len(names)},
        measured={"root_weak": freq, "all_weak": all_hits / trials if trials else 0.0},
        bound=None, holds=None, seed=seed,
        details={"root_weak_count": root_hits, "all_weak_count": all_hits,
                 "note": "observational, no assertion"},
        runtime_ms=clock())


# -- branching programs ----------------------------------------------------------------

def check_abp_bound(b: ABP, part: Partition | None = None, fld: FieldSpec = FieldSpec(2),
                    opts: RunOptions = DEFAULTS) -> VerdictReport:
    """maxrank of a partitioned ABP against ``|L_i| * 2^(n(1-alpha))``."""
    clock = stopwatch()
    if part is not None:
        verdict = abp_partition_check(b, pi=list(part.y) + list(part.z))
    else:
        verdict = abp_partition_check(b)
    if not verdict.partitioned:
        lvl, node = next(iter(verdict.failures.items()), (None, None))
        raise StructureError(f"ABP is not partitioned (level {lvl} fails at node {node!r})")
    if not recheck_partition_verdict(b, verdict):
        raise SelfCheckFailed("partition verdict did not re-verify")
    if part is None:
        part = halves_partition(verdict.pi)
    n, i = verdict.n, verdict.level
    level = b.levels[i]
    f = expand_abp(b, fld, opts.term_budget)
    res = measure(coeff_matrix_under(f, part), opts)
    holds = res.value * res.value <= verdict.bound_squared(len(level))
    # per-node terms f_{s,v} * f_{v,t}
    first, second = set(verdict.pi[:n]), set(verdict.pi[n:])
    total = Polynomial.zero(fld)
    nodes = []
    for v in level:
        fsv = abp_segment_poly(b, b.source, v, fld, opts.term_budget)
        fvt = abp_segment_poly(b, v, b.sink, fld, opts.term_budget)
        case = verdict.cases[v]
        sep = fsv.variables() <= first if case == 1 else fvt.variables() <= second
        term = poly_mul(fsv, fvt, opts.term_budget, label=f"node {v!r}")
        total = total + term
        r = measure(coeff_matrix_under(term, part), opts)
        ok = sep and le_scaled_sqrt2(r.value, 1, 2 * n - i)
        holds = holds and ok
        nodes.append({"node": str(v), "case": case, "separated": sep, "maxrank": r.value,
                      "holds": ok})
    recombines = total == f
    return VerdictReport(
        claim="abp", params={"n": n, "depth": b.depth, "size": b.size},
        measured=res.value, bound=scaled_sqrt2(len(level), 2 * n - i),
        holds=holds and recombines, field=fld.p, seed=opts.seed,
        witness={**_mr_witness(res), "level": i, "alpha": str(verdict.alpha),
                 "pi": list(verdict.pi), "partition": part.to_json()},
        details={"width": len(level), "nodes": nodes, "recombines": recombines,
                 "qualifying_levels": list(verdict.qualifying_levels),
                 "evidence": _evidence(res)},
        runtime_ms=clock())


# -- total dimension ---------------------------------------------------------------------

def total_dimension_bound(d: int, r: int) -> int:
    return math.comb(d + r, r) * (d + 1)


def min_total_dimension(rank: int, d: int) -> int:
    """Smallest total dimension whose bound could accommodate ``rank``."""
    r = 0
    while total_dimension_bound(d, r) < rank:
        r += 1
    return r


def check_total_dimension_bound(c: SigmaPiSigma, part: Partition | None = None,
                                fld: FieldSpec = FieldSpec(3),
                                construct_field: FieldSpec | None = FieldSpec(101),
                                opts: RunOptions = DEFAULTS) -> VerdictReport:
    """maxrank of the degree-d output against ``C(d+r, r) (d+1)``, r the total dimension.

    The maxrank is measured over ``fld`` with ``r`` taken over ``fld`` too.
    When ``construct_field`` has characteristic above ``d`` the explicit
    power-sum rewrite is also built there and its term count checked.
    """
    clock = stopwatch()
    d = max(len(g) for g in c.gates)
    full = expand_sps(c, fld, opts.term_budget)
    f = homogeneous_slice(full, d)
    r = affine_rank(c.forms(), fld)
    bound = total_dimension_bound(d, r)
    res = measure(_matrix(f, part), opts)
    holds = res.value <= bound
    details = {"total_dimension": r, "sliced": f != full, "evidence": _evidence(res)}
    if construct_field is not None and construct_field.p > d:
        ps, rh = sum_of_powers_rewrite_many(c.gates, d, construct_field, budget=opts.term_budget)
        limit = power_count_bound(d, rh)
        details["power_sum"] = {"field": construct_field.p, "terms": len(ps),
                                "homogeneous_rank": rh, "limit": limit}
        holds = holds and len(ps) <= limit
    return VerdictReport(
        claim="total-dimension", params={"k": c.k, "d": d, "variables": c.variables()},
        measured=res.value, bound=bound, holds=holds, field=fld.p, seed=opts.seed,
        witness={**_mr_witness(res), "partition": part.to_json() if part else None},
        details=details, runtime_ms=clock())


# -- power sums --------------------------------------------------------------------------

def check_fischer(forms: Sequence[AffineForm], fld: FieldSpec = FieldSpec(101)) -> VerdictReport:
    clock = stopwatch()
    d = len(forms)
    ps = fischer_decompose(forms, fld)  # raises if the expansion differs
    limit = 2**d - 1
    return VerdictReport(claim="fischer", params={"d": d}, measured=len(ps), bound=limit,
                         holds=len(ps) <= limit, field=fld.p,
                         details={"expansion_equal": True}, runtime_ms=clock())


def check_power_rewrite(gate: Sequence[AffineForm], d: int,
                 fld: FieldSpec = FieldSpec(101)) -> VerdictReport:
    clock = stopwatch()
    ps, r = sum_of_powers_rewrite_many([gate], d, fld)
    limit = power_count_bound(d, r)
    return VerdictReport(claim="power-rewrite", params={"d": d, "r": r, "forms": len(gate)},
                         measured=len(ps), bound=limit, holds=len(ps) <= limit, field=fld.p,
                         details={"expansion_equal": True}, runtime_ms=clock())
