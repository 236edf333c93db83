"""Command-line front end.

Exit codes: 0 success (and every asserted claim holds), 1 a claim check
failed (its report is still written), 2 usage or input error, 3 a resource
budget was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from importlib import metadata

from . import generators as gen
from .algebra import DEFAULT_BUDGET, FieldSpec, analyze, parse_poly
from .circuits import (ABP, SigmaPiSigma, circuit_from_json, circuit_to_json, expand,
                       is_product_sparse, sps_properties)
from .circuits import formula as fm
from .circuits.abp import abp_partition_check
from .circuits.sps import AffineForm
from .coeffmatrix import (DEFAULT_EXHAUSTIVE_BUDGET, DEFAULT_RANK_LIMIT, DEFAULT_TRIALS,
                          auto_maxrank, build_coeff_matrix, coeff_matrix_under, maxrank)
from .errors import ParseError, PolycoeffError, ResourceError, SelfCheckFailed
from .partition import Partition
from .transforms import fischer_decompose, sum_of_powers_rewrite
from . import verify as vf

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3
FORMAT_VERSION = 1

CLAIMS = ("imm-rank", "imm-grid", "q-rank", "propositions", "depth3", "product-sparse",
          "preprocess", "abp", "total-dimension", "fischer", "power-rewrite")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    field: int | None
    seed: int
    trials: int | None
    budget: int
    maxrank_budget: int
    rank_limit: int
    jobs: int
    out: str | None
    fmt: str

    def field_or(self, default: int) -> FieldSpec:
        return FieldSpec(self.field if self.field is not None else default)

    def options(self) -> vf.RunOptions:
        return vf.RunOptions(seed=self.seed, samples=self.trials or DEFAULT_TRIALS,
                             term_budget=self.budget, maxrank_budget=self.maxrank_budget,
                             rank_limit=self.rank_limit, jobs=self.jobs)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0"


def _provenance(cfg: RunConfig, fld: FieldSpec | None) -> dict:
    return {"tool": "polycoeff", "version": _version(), "format": FORMAT_VERSION,
            "seed": cfg.seed, "field": None if fld is None else fld.p}


# -- input helpers --------------------------------------------------------------------

def _read_text(spec: str) -> str:
    if spec == "-":
        return sys.stdin.read()
    with open(spec) as fh:
        return fh.read()


def _load_json(spec: str):
    text = spec if spec.lstrip().startswith(("{", "[")) else _read_text(spec)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON in {spec!r}: {exc}") from None


def _load_poly(args, fld: FieldSpec):
    if args.poly is not None:
        return parse_poly(args.poly, fld)
    if args.poly_file is not None:
        return parse_poly(_read_text(args.poly_file), fld)
    raise UsageError("give a polynomial with --poly or --poly-file")


def _load_partition(spec):
    return None if spec is None else Partition.from_json(_load_json(spec))


def _load_circuit(spec):
    if spec is None:
        return None
    return circuit_from_json(_load_json(spec))


def _emit(cfg: RunConfig, text: str):
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _json_only(cfg: RunConfig, what: str):
    if cfg.fmt != "json":
        raise UsageError(f"{what} output is JSON only")


# -- subcommands ----------------------------------------------------------------------

def cmd_gen(args, cfg: RunConfig) -> int:
    _json_only(cfg, "gen")
    kind = args.kind
    if kind in ("imm", "q"):
        fld = cfg.field_or(2)
        if kind == "imm":
            inst = gen.gen_imm(_need(args.n, "--n"), _need(args.d, "--d"),
                               full_grid=args.grid, fld=fld, budget=cfg.budget)
            body = {"kind": "polynomial", "poly": str(inst.f), "n": inst.n, "d": inst.d,
                    "partition": inst.partition.to_json()}
            if inst.grid is not None:
                body["grid"] = {f"{i},{j}": str(p) for (i, j), p in sorted(inst.grid.items())}
        else:
            inst = gen.gen_q(_need(args.n, "--n"), fld)
            body = {"kind": "polynomial", "poly": str(inst.f), "n": inst.n, "w": inst.w,
                    "partition": inst.partition.to_json(),
                    "pairs": [[list(s), list(t)] for s, t in inst.pairs]}
    elif kind == "random-sps":
        fld = cfg.field_or(3)
        c = gen.gen_random_sps(_need(args.k, "--k"), _need(args.d, "--d"), args.vars,
                               homogeneous=not args.affine, r=args.r, seed=cfg.seed, fld=fld,
                               scope=args.scope)
        body = circuit_to_json(c)
    elif kind == "random-psf":
        fld = cfg.field_or(2)
        f = gen.gen_random_product_sparse(_need(args.s, "--s"), _need(args.d, "--d"),
                                          args.leaves, seed=cfg.seed, nvars=args.vars, fld=fld,
                                          budget=cfg.budget)
        body = circuit_to_json(f)
    elif kind == "ordered-abp":
        fld = cfg.field_or(2)
        n = _need(args.n, "--n")
        pi = args.pi.split(",") if args.pi else None
        b = gen.gen_ordered_abp(n, pi, seed=cfg.seed, width=args.width, fld=fld)
        body = circuit_to_json(b)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown generator {kind!r}")
    body["provenance"] = _provenance(cfg, fld)
    _emit(cfg, _dump(body))
    return EXIT_OK


def cmd_analyze(args, cfg: RunConfig) -> int:
    _json_only(cfg, "analyze")
    fld = cfg.field_or(2)
    if args.circuit is None:
        f = _load_poly(args, fld)
        body = {"kind": "polynomial", **analyze(f).to_dict()}
    else:
        c = _load_circuit(args.circuit)
        part = _load_partition(args.partition)
        if isinstance(c, SigmaPiSigma):
            body = {"kind": "sps", **sps_properties(c, fld).to_dict()}
        elif isinstance(c, ABP):
            verdict = abp_partition_check(c)
            body = {"kind": "abp", "depth": c.depth, "size": c.size,
                    "homogeneous": c.is_homogeneous(fld), "partition_check": verdict.to_dict()}
        else:
            g = fm.apply_partition(c, part) if part is not None else c
            ok, depth = is_product_sparse(g, args.s, fld, cfg.budget)
            body = {"kind": "formula", "size": fm.size(g), "height": fm.height(g),
                    "syntactic_multilinear": fm.is_syntactic_multilinear(g),
                    "skew": fm.is_skew(g), "product_sparse": ok, "s": args.s,
                    "product_sparse_depth": depth}
            if args.k is not None:
                if any(v[:1] not in ("y", "z") for v in fm.variables(g)):
                    raise UsageError("k-weakness needs Y/Z variables: pass --partition")
                kw = fm.k_weak_nodes(g, args.k)
                body["k"] = args.k
                body["weak_nodes"] = sorted(kw.weak)
        body["stats"] = analyze(expand(c, fld, cfg.budget)).to_dict()
    body["provenance"] = _provenance(cfg, fld)
    _emit(cfg, _dump(body))
    return EXIT_OK


def _matrix_for(args, cfg: RunConfig):
    fld = cfg.field_or(2)
    f = _load_poly(args, fld)
    part = _load_partition(args.partition)
    return fld, (coeff_matrix_under(f, part) if part is not None else build_coeff_matrix(f))


def cmd_matrix(args, cfg: RunConfig) -> int:
    fld, M = _matrix_for(args, cfg)
    if cfg.fmt == "csv":
        _emit(cfg, M.to_csv())
    else:
        rows = [{"y": M.support_monomial(r, "Y"), "z": M.support_monomial(c, "Z"),
                 "entry": str(e)} for (r, c), e in sorted(M.entries.items())]
        _emit(cfg, _dump({"entries": rows, "Y": list(M.ys), "Z": list(M.zs),
                          "provenance": _provenance(cfg, fld)}))
    return EXIT_OK


def cmd_maxrank(args, cfg: RunConfig) -> int:
    fld, M = _matrix_for(args, cfg)
    kw = dict(budget=cfg.maxrank_budget, rank_limit=cfg.rank_limit)
    if args.mode == "auto":
        res = auto_maxrank(M, seed=cfg.seed, trials=cfg.trials or DEFAULT_TRIALS, **kw)
    else:
        res = maxrank(M, args.mode, seed=cfg.seed, trials=cfg.trials or DEFAULT_TRIALS, **kw)
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "exact", "mode", "field", "seed", "witness"])
        w.writerow([res.value, str(res.exact).lower(), res.mode, res.field, cfg.seed,
                    json.dumps(res.witness, sort_keys=True, separators=(",", ":"))])
        _emit(cfg, buf.getvalue())
    else:
        _emit(cfg, _dump({**res.to_dict(), "provenance": _provenance(cfg, fld)}))
    return EXIT_OK


def cmd_decompose(args, cfg: RunConfig) -> int:
    _json_only(cfg, "decompose")
    fld = cfg.field_or(101)
    obj = _load_json(args.gate)
    forms = obj.get("gate") if isinstance(obj, dict) else obj
    if not isinstance(forms, list) or not forms:
        raise ParseError('gate JSON must be a nonempty list of affine forms (or {"gate": [...]})')
    gate = [AffineForm.from_json(f) if isinstance(f, dict) else AffineForm.variable(str(f))
            for f in forms]
    if args.method == "fischer":
        ps = fischer_decompose(gate, fld, budget=cfg.budget)
    else:
        d = args.degree if args.degree is not None else len(gate)
        ps = sum_of_powers_rewrite(gate, d, fld, budget=cfg.budget)
    _emit(cfg, _dump(ps.to_json()))
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise UsageError(f"missing required option {flag}")
    return value


def _verify_reports(args, cfg: RunConfig) -> list:
    opts = cfg.options()
    claim = args.claim
    circuit = _load_circuit(args.circuit)
    part = _load_partition(args.partition)
    trials = cfg.trials
    if claim == "imm-rank":
        return [vf.check_imm_rank(_need(args.n, "--n"), _need(args.d, "--d"), cfg.field_or(2), opts)]
    if claim == "imm-grid":
        return [vf.check_imm_grid(_need(args.n, "--n"), _need(args.d, "--d"), cfg.field_or(2), opts)]
    if claim == "q-rank":
        return [vf.check_q_rank(_need(args.n, "--n"), cfg.field_or(2), opts)]
    if claim == "propositions":
        fields = (cfg.field,) if cfg.field is not None else (2, 3)
        for p in fields:
            if p > 3:
                raise UsageError("the proposition suite enumerates exhaustively: use --field 2 or 3")
        return [vf.check_propositions(cfg.seed, trials or 500, fields, opts=opts)]
    if claim == "depth3":
        if circuit is None:
            return [vf.suite_depth3(cfg.seed, trials or 200, cfg.field_or(3), opts)]
        return [vf.check_depth3_bound(_expect(circuit, SigmaPiSigma), part, cfg.field_or(3), opts)]
    if claim == "product-sparse":
        if circuit is None:
            ks = (args.k,) if args.k is not None else (1, 2)
            return [vf.suite_product_sparse(cfg.seed, trials or 100, ks, opts)]
        return [vf.check_product_sparse_bound(circuit, part, _need(args.s, "--s"),
                                              _need(args.k, "--k"), cfg.field_or(2), opts)]
    if claim == "preprocess":
        return [vf.suite_preprocess(cfg.seed, trials or 100, opts)]
    if claim == "abp":
        if circuit is None:
            return [vf.suite_abp(cfg.seed, args.n or 6, trials or 3, cfg.field_or(2), opts)]
        return [vf.check_abp_bound(_expect(circuit, ABP), part, cfg.field_or(2), opts)]
    if claim == "total-dimension":
        if circuit is None:
            return [vf.suite_total_dimension(cfg.seed, trials or 100, FieldSpec(101),
                                             cfg.field_or(3), opts)]
        return [vf.check_total_dimension_bound(_expect(circuit, SigmaPiSigma), part,
                                               cfg.field_or(3), FieldSpec(101), opts)]
    if claim == "fischer":
        return [vf.suite_fischer(cfg.seed, trials or 100, 6, cfg.field_or(101), opts)]
    if claim == "power-rewrite":
        return [vf.suite_power_rewrite(cfg.seed, trials or 100, cfg.field_or(101), opts)]
    raise UsageError(f"unknown claim {claim!r}")  # pragma: no cover


def _expect(c, kind):
    if not isinstance(c, kind):
        raise UsageError(f"this claim needs a {kind.__name__} circuit")
    return c


def _write_reports(cfg: RunConfig, reports: list) -> int:
    if cfg.fmt == "csv":
        _emit(cfg, vf.reports_to_csv(reports))
    else:
        body = [r.to_dict() for r in reports]
        _emit(cfg, _dump(body[0] if len(body) == 1 else body))
    return EXIT_FAIL if any(r.failed for r in reports) else EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    reports = _verify_reports(args, cfg)
    for r in reports:
        if r.seed is None:
            r.seed = cfg.seed
    return _write_reports(cfg, reports)


def cmd_experiment(args, cfg: RunConfig) -> int:
    f = _load_circuit(_need(args.circuit, "--circuit"))
    if isinstance(f, (SigmaPiSigma, ABP)):
        raise UsageError("partition experiments run on formulas")
    names = gen.x_names(args.vars) if args.vars else None
    if names is not None and not fm.variables(f) <= set(names):
        raise UsageError(f"formula uses variables outside x1..x{args.vars}")
    rep = vf.partition_experiment(f, _need(args.k, "--k"), cfg.trials or 100, cfg.seed, names)
    return _write_reports(cfg, [rep])


# -- argument parsing ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--field", type=int, default=None, help="prime modulus of the field")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=None,
                        help="random instances (suites) or substitutions (sampled maxrank)")
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="term budget for polynomial expansion")
    common.add_argument("--maxrank-budget", type=int, default=DEFAULT_EXHAUSTIVE_BUDGET,
                        help="substitution budget for exhaustive maxrank")
    common.add_argument("--rank-limit", type=int, default=DEFAULT_RANK_LIMIT)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")

    poly = argparse.ArgumentParser(add_help=False)
    poly.add_argument("--poly", default=None, help="polynomial text, e.g. 'y1*z1 + y1^2*z1'")
    poly.add_argument("--poly-file", default=None)
    poly.add_argument("--partition", default=None, help="partition JSON (file or inline)")

    p = argparse.ArgumentParser(prog="polycoeff",
                                description="Coefficient-matrix rank experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate instances")
    g.add_argument("kind", choices=("imm", "q", "random-sps", "random-psf", "ordered-abp"))
    for flag in ("--n", "--d", "--k", "--s", "--r"):
        g.add_argument(flag, type=int, default=None)
    g.add_argument("--vars", type=int, default=6)
    g.add_argument("--leaves", type=int, default=10)
    g.add_argument("--width", type=int, default=2)
    g.add_argument("--pi", default=None, help="comma-separated variable order")
    g.add_argument("--scope", choices=("gate", "total"), default="gate")
    g.add_argument("--affine", action="store_true", help="allow nonzero constants")
    g.add_argument("--grid", action="store_true", help="also emit every product entry")
    g.set_defaults(func=cmd_gen)

    a = sub.add_parser("analyze", parents=[common, poly], help="structural report")
    a.add_argument("circuit", nargs="?", default=None, help="circuit JSON file")
    a.add_argument("--s", type=int, default=0)
    a.add_argument("--k", type=int, default=None)
    a.set_defaults(func=cmd_analyze)

    m = sub.add_parser("matrix", parents=[common, poly], help="coefficient matrix dump")
    m.set_defaults(func=cmd_matrix)

    r = sub.add_parser("maxrank", parents=[common, poly], help="maxrank of a polynomial")
    r.add_argument("--mode", choices=("exhaustive", "sampled", "auto"), default="auto")
    r.set_defaults(func=cmd_maxrank)

    dcp = sub.add_parser("decompose", parents=[common], help="power-sum decomposition of a gate")
    dcp.add_argument("gate", help="gate JSON: list of affine forms")
    dcp.add_argument("--degree", type=int, default=None)
    dcp.add_argument("--method", choices=("power-rewrite", "fischer"), default="power-rewrite")
    dcp.set_defaults(func=cmd_decompose)

    v = sub.add_parser("verify", parents=[common], help="check a claim")
    v.add_argument("claim", choices=CLAIMS)
    for flag in ("--n", "--d", "--k", "--s"):
        v.add_argument(flag, type=int, default=None)
    v.add_argument("--circuit", default=None)
    v.add_argument("--partition", default=None)
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("experiment", parents=[common], help="random-partition weakness frequency")
    e.add_argument("--circuit", default=None)
    e.add_argument("--k", type=int, default=None)
    e.add_argument("--vars", type=int, default=None,
                   help="partition x1..xN instead of the formula's own variables")
    e.set_defaults(func=cmd_experiment)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cfg = RunConfig(field=args.field, seed=args.seed, trials=args.trials, budget=args.budget,
                    maxrank_budget=args.maxrank_budget, rank_limit=args.rank_limit,
                    jobs=args.jobs, out=args.out, fmt=args.fmt)
    try:
        for name, val in (("--budget", cfg.budget), ("--maxrank-budget", cfg.maxrank_budget),
                          ("--rank-limit", cfg.rank_limit), ("--jobs", cfg.jobs)):
            if val < 1:
                raise UsageError(f"{name} must be positive")
        if cfg.field is not None:
            FieldSpec(cfg.field)
        return args.func(args, cfg)
    except ResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SelfCheckFailed as exc:
        print(f"self-check failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (UsageError, PolycoeffError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":  # pragma: no cover
    main()
