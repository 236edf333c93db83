"""Randomized batteries over many seeded instances.

Trial ``i`` of claim ``c`` under master seed ``s`` draws from
``random.Random(f"{s}:{c}:{i}")``, so results do not depend on ``jobs``.
"""

from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

from ..algebra import FieldSpec, Polynomial
from ..circuits import formula as fm
from ..circuits.sps import AffineForm, SigmaPiSigma
from ..coeffmatrix import build_coeff_matrix
from ..generators import (gen_ordered_abp, gen_random_product_sparse, gen_random_sps,
                          gen_sum_of_products_abp, x_names)
from ..partition import apply_partition, halves_partition, random_partition
from .claims import (DEFAULTS, RunOptions, check_abp_bound, check_depth3_bound, check_fischer,
                     check_preprocess_invariance, check_product_sparse_bound, check_power_rewrite,
                     check_total_dimension_bound, measure)
from .report import VerdictReport, stopwatch

YS = ("y1", "y2", "y3")
ZS = ("z1", "z2", "z3")
PROPOSITION_CLAIMS = ("support-size", "sum", "disjoint-product", "one-sided-factor", "linear-factor", "low-rank-factor", "monomial-factor", "affine-power")


def trial_rng(seed, claim: str, i: int) -> random.Random:
    return random.Random(f"{seed}:{claim}:{i}")


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def _tally(claim: str, outcomes: list, seed, fld_p, params: dict, clock, extra=None) -> VerdictReport:
    """``outcomes`` is a list of (ok, info) pairs, one per trial."""
    bad = [dict(info, trial=i) for i, (ok, info) in enumerate(outcomes) if not ok]
    details = {"trials": len(outcomes), "violations": len(bad)}
    if extra:
        details.update(extra)
    return VerdictReport(claim=claim, params=params, measured=len(bad), bound=0,
                         holds=not bad, field=fld_p, seed=seed,
                         witness={"first_violation": bad[0] if bad else None},
                         details=details, runtime_ms=clock())


# -- propositions and corollaries -----------------------------------------------------

def random_small_poly(rng: random.Random, fld: FieldSpec, names: Sequence[str],
                      max_terms: int = 4, max_exp: int = 2, max_support: int = 3) -> Polynomial:
    terms = []
    for _ in range(rng.randint(1, max_terms)):
        support = rng.sample(list(names), rng.randint(0, min(max_support, len(names))))
        terms.append(({v: rng.randint(1, max_exp) for v in support}, rng.randrange(1, fld.p)))
    return Polynomial.from_terms(fld, terms, names)


def _random_affine(rng: random.Random, fld: FieldSpec, names: Sequence[str]) -> Polynomial:
    while True:
        lin = {v: rng.randrange(fld.p) for v in names}
        form = AffineForm.make(lin, rng.randrange(fld.p))
        if form.lin:
            return form.to_poly(fld)


def _mr(f: Polynomial) -> int:
    return measure(build_coeff_matrix(f, YS, ZS), exhaustive=True).value


def _proposition_trial(args) -> tuple[bool, dict]:
    claim, seed, i, p = args
    fld = FieldSpec(p)
    rng = trial_rng(seed, f"{claim}:{p}", i)
    names = YS + ZS
    f = random_small_poly(rng, fld, names)
    if claim == "support-size":
        used = f.variables()
        a = min(len(used & set(YS)), len(used & set(ZS)))
        m = _mr(f)
        return m <= 2**a, {"maxrank": m, "a": a}
    if claim == "sum":
        g = f if i == 0 else random_small_poly(rng, fld, names)
        m, mf, mg = _mr(f + g), _mr(f), _mr(g)
        return m <= mf + mg, {"sum": m, "f": mf, "g": mg}
    if claim == "disjoint-product":
        ys, zs = list(YS), list(ZS)
        rng.shuffle(ys)
        rng.shuffle(zs)
        ky, kz = rng.randint(0, 3), rng.randint(0, 3)
        fn, gn = ys[:ky] + zs[:kz], ys[ky:] + zs[kz:]
        f = random_small_poly(rng, fld, fn)
        g = random_small_poly(rng, fld, gn)
        m, mf, mg = _mr(f * g), _mr(f), _mr(g)
        return m == mf * mg, {"product": m, "f": mf, "g": mg}
    if claim == "one-sided-factor":
        side = YS if rng.random() < 0.5 else ZS
        g = random_small_poly(rng, fld, side)
        m, mf = _mr(f * g), _mr(f)
        return m <= mf, {"product": m, "f": mf}
    if claim == "linear-factor":
        g = _random_affine(rng, fld, names)
        m, mf = _mr(f * g), _mr(f)
        return m <= 2 * mf, {"product": m, "f": mf}
    if claim == "low-rank-factor":
        r = rng.randint(1, 3)
        g = Polynomial.zero(fld)
        for _ in range(r):
            g = g + random_small_poly(rng, fld, YS, 2) * random_small_poly(rng, fld, ZS, 2)
        m, mf = _mr(f * g), _mr(f)
        return m <= r * mf, {"product": m, "f": mf, "r": r}
    if claim == "monomial-factor":
        g = random_small_poly(rng, fld, names, max_terms=3)
        m, mf = _mr(f * g), _mr(f)
        return m <= len(g) * mf, {"product": m, "f": mf, "monomials": len(g)}
    if claim == "affine-power":
        xs = x_names(6)
        t = rng.randint(1, 4)
        ell = _random_affine(rng, fld, xs)
        part = random_partition(xs, rng=rng)
        m = _mr(apply_partition(ell**t, part))
        return m <= t + 1, {"maxrank": m, "t": t}
    raise ValueError(f"unknown claim {claim!r}")


def check_propositions(seed=0, trials: int = 500, fields: Sequence[int] = (2, 3),
                       claims: Sequence[str] = PROPOSITION_CLAIMS,
                       opts: RunOptions = DEFAULTS) -> VerdictReport:
    """Random instances of every proposition/corollary with exhaustive maxrank."""
    clock = stopwatch()
    per_claim = {}
    first = None
    total_bad = 0
    for claim in claims:
        for p in fields:
            args = [(claim, seed, i, p) for i in range(trials)]
            outcomes = _map(_proposition_trial, args, opts.jobs)
            bad = [i for i, (ok, _) in enumerate(outcomes) if not ok]
            per_claim[f"{claim}@{p}"] = {"trials": trials, "violations": len(bad)}
            total_bad += len(bad)
            if bad and first is None:
                first = {"claim": claim, "field": p, "trial": bad[0], **outcomes[bad[0]][1]}
    return VerdictReport(
        claim="propositions", params={"trials": trials, "fields": list(fields),
                                      "claims": list(claims)},
        measured=total_bad, bound=0, holds=total_bad == 0, field=None, seed=seed,
        witness={"first_violation": first}, details={"per_claim": per_claim},
        runtime_ms=clock())


# -- depth-3 circuits -------------------------------------------------------------------

def _depth3_trial(args):
    seed, i, p = args
    rng = trial_rng(seed, "depth3", i)
    k, d, nv = rng.randint(1, 4), rng.randint(1, 4), rng.choice((2, 4, 6))
    fld = FieldSpec(p)
    c = gen_random_sps(k, d, nv, homogeneous=True, seed=f"{seed}:depth3:{i}:circuit", fld=fld)
    part = random_partition(x_names(nv), rng=rng)
    rep = check_depth3_bound(c, part, fld)
    exact = rep.details["evidence"] == "exact"
    return rep.holds and exact, {"k": k, "d": d, "maxrank": rep.measured, "bound": rep.bound,
                                 "exact": exact}


def tight_depth3_instance() -> SigmaPiSigma:
    return SigmaPiSigma(((AffineForm.make({"y1": 1, "z1": 1}), AffineForm.make({"y2": 1, "z2": 1})),))


def suite_depth3(seed=0, trials: int = 200, fld: FieldSpec = FieldSpec(3),
                 opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    outcomes = _map(_depth3_trial, [(seed, i, fld.p) for i in range(trials)], opts.jobs)
    tight = check_depth3_bound(tight_depth3_instance(), None, fld)
    rep = _tally("depth3-suite", outcomes, seed, fld.p, {"trials": trials}, clock,
                 {"tight": {"measured": tight.measured, "bound": tight.bound}})
    rep.holds = rep.holds and tight.measured == tight.bound
    return rep


# -- product-sparse formulas --------------------------------------------------------------

def _psf_trial(args):
    seed, i, ks = args
    rng = trial_rng(seed, "product-sparse", i)
    s, d, leaves = rng.randint(0, 2), rng.randint(0, 3), rng.randint(2, 20)
    f = gen_random_product_sparse(s, d, leaves, seed=f"{seed}:product-sparse:{i}:formula",
                                  nvars=6)
    part = random_partition(x_names(6), rng=rng)
    ok, cases, weak = True, {}, 0
    for k in ks:
        rep = check_product_sparse_bound(f, part, s, k)
        ok = ok and rep.holds and all(n["exact"] for n in rep.details["nodes"])
        weak += rep.details["weak_nodes"]
        for c, n in rep.details["cases"].items():
            cases[c] = cases.get(c, 0) + n
    return ok, {"s": s, "d": d, "leaves": leaves, "cases": cases, "weak": weak}


def suite_product_sparse(seed=0, trials: int = 100, ks: Sequence[int] = (1, 2),
                         opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    outcomes = _map(_psf_trial, [(seed, i, tuple(ks)) for i in range(trials)], opts.jobs)
    cases: dict = {}
    for _, info in outcomes:
        for c, n in info["cases"].items():
            cases[c] = cases.get(c, 0) + n
    return _tally("product-sparse-suite", outcomes, seed, 2, {"trials": trials, "ks": list(ks)},
                  clock, {"cases": dict(sorted(cases.items())),
                          "weak_nodes": sum(info["weak"] for _, info in outcomes)})


def _preprocess_trial(args):
    seed, i = args
    rng = trial_rng(seed, "preprocess", i)
    fld = FieldSpec(3)
    s, d, leaves = rng.randint(0, 2), rng.randint(0, 3), rng.randint(1, 20)
    f = gen_random_product_sparse(s, d, leaves, seed=f"{seed}:preprocess:{i}:formula", nvars=6)
    n_leaves = sum(isinstance(n, fm.VarLeaf) for n in fm.flatten(f).nodes)
    reps = []
    for _ in range(n_leaves):
        deg = rng.randint(1, 3)
        reps.append([rng.randrange(3) for _ in range(deg)] + [rng.randrange(1, 3)])
    part = random_partition(x_names(6), rng=rng)
    k = rng.randint(1, 2)
    rep = check_preprocess_invariance(f, reps, k, fld, part)
    return rep.holds, {"k": k, "leaves": leaves}


def suite_preprocess(seed=0, trials: int = 100, opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    outcomes = _map(_preprocess_trial, [(seed, i) for i in range(trials)], opts.jobs)
    return _tally("preprocess-suite", outcomes, seed, 3, {"trials": trials}, clock)


# -- power sums ----------------------------------------------------------------------------

def _random_linear_forms(rng, fld, count, names):
    out = []
    while len(out) < count:
        form = AffineForm.make({v: rng.randrange(fld.p) for v in names})
        if form.lin:
            out.append(form)
    return out


def _fischer_trial(args):
    seed, d, i, p = args
    fld = FieldSpec(p)
    rng = trial_rng(seed, f"fischer:{d}", i)
    rep = check_fischer(_random_linear_forms(rng, fld, d, x_names(3)), fld)
    return rep.holds, {"d": d, "terms": rep.measured}


def suite_fischer(seed=0, trials: int = 100, max_d: int = 6, fld: FieldSpec = FieldSpec(101),
                  opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    args = [(seed, d, i, fld.p) for d in range(1, max_d + 1) for i in range(trials)]
    outcomes = _map(_fischer_trial, args, opts.jobs)
    return _tally("fischer-suite", outcomes, seed, fld.p,
                  {"trials_per_degree": trials, "max_d": max_d}, clock)


def _power_rewrite_trial(args):
    seed, i, p = args
    fld = FieldSpec(p)
    rng = trial_rng(seed, "power-rewrite", i)
    d, r = rng.randint(1, 4), rng.randint(1, 3)
    homogeneous = rng.random() < 0.5
    length = d if homogeneous else rng.randint(d, d + 1)
    c = gen_random_sps(1, length, 4, homogeneous=homogeneous, r=r,
                       seed=f"{seed}:power-rewrite:{i}:gate", fld=fld)
    rep = check_power_rewrite(c.gates[0], d, fld)
    ok = rep.holds and rep.params["r"] <= r
    return ok, {"d": d, "r": rep.params["r"], "terms": rep.measured, "limit": rep.bound}


def suite_power_rewrite(seed=0, trials: int = 100, fld: FieldSpec = FieldSpec(101),
                 opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    outcomes = _map(_power_rewrite_trial, [(seed, i, fld.p) for i in range(trials)], opts.jobs)
    return _tally("power-rewrite-suite", outcomes, seed, fld.p, {"trials": trials}, clock)


# -- branching programs ----------------------------------------------------------------------

def suite_abp(seed=0, max_n: int = 6, per_n: int = 3, fld: FieldSpec = FieldSpec(2),
              opts: RunOptions = DEFAULTS) -> VerdictReport:
    """Random ordered ABPs for n = 1..max_n plus the sum-of-products instance."""
    clock = stopwatch()
    outcomes, exact_sum = [], {}
    for n in range(1, max_n + 1):
        for i in range(per_n):
            rng = trial_rng(seed, f"abp:{n}", i)
            pi = x_names(2 * n)
            rng.shuffle(pi)
            b = gen_ordered_abp(n, pi, seed=f"{seed}:abp:{n}:{i}", width=3, fld=fld)
            rep = check_abp_bound(b, halves_partition(pi), fld, opts)
            outcomes.append((rep.holds, {"n": n, "maxrank": rep.measured, "bound": rep.bound,
                                         "level": rep.witness["level"]}))
        rep = check_abp_bound(gen_sum_of_products_abp(n), None, fld, opts)
        exact_sum[n] = rep.measured
        outcomes.append((rep.holds and rep.measured == n,
                         {"n": n, "instance": "sum-of-products", "maxrank": rep.measured}))
    return _tally("abp-suite", outcomes, seed, fld.p, {"max_n": max_n, "per_n": per_n}, clock,
                  {"sum_of_products_rank": {str(n): r for n, r in exact_sum.items()}})


# -- total dimension --------------------------------------------------------------------------

def _total_dim_trial(args):
    seed, i, p_construct, p_measure = args
    rng = trial_rng(seed, "total-dimension", i)
    r, d, k = rng.randint(1, 3), rng.randint(1, 4), rng.randint(1, 4)
    nv = rng.choice((2, 4, 6))
    homogeneous = rng.random() < 0.5
    c = gen_random_sps(k, d, nv, homogeneous=homogeneous, r=r, scope="total",
                       seed=f"{seed}:total-dimension:{i}:circuit", fld=FieldSpec(p_construct))
    part = random_partition(x_names(nv), rng=rng)
    rep = check_total_dimension_bound(c, part, FieldSpec(p_measure), FieldSpec(p_construct))
    exact = rep.details["evidence"] == "exact"
    return rep.holds and exact, {"r": rep.details["total_dimension"], "d": d, "k": k,
                                 "maxrank": rep.measured, "bound": rep.bound}


def suite_total_dimension(seed=0, trials: int = 100, construct_field: FieldSpec = FieldSpec(101),
                          measure_field: FieldSpec = FieldSpec(3),
                          opts: RunOptions = DEFAULTS) -> VerdictReport:
    clock = stopwatch()
    args = [(seed, i, construct_field.p, measure_field.p) for i in range(trials)]
    outcomes = _map(_total_dim_trial, args, opts.jobs)
    return _tally("total-dimension-suite", outcomes, seed, measure_field.p,
                  {"trials": trials, "construct_field": construct_field.p}, clock)
