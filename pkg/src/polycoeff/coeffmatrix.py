"""Polynomial coefficient matrices, their substitutions, rank and maxrank.

For ``f`` over ``Y ∪ Z`` every monomial ``m`` splits as ``p * q * (m / pq)``
where ``p`` and ``q`` are the square-free Y- and Z-supports of ``m``.  The
coefficient matrix collects ``m / pq`` into the entry indexed by ``(p, q)``.
Rows and columns are keyed by bitmasks over the ordered ``ys`` / ``zs``
lists; only nonzero entries are stored.

maxrank is computed relative to the field of the polynomial.  Exhaustive mode
enumerates every assignment of the variables that occur in non-constant
entries; sampled mode takes the best of seeded random assignments and is
only a lower bound.
"""

from __future__ import annotations

import csv
import io
import itertools
import random
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import FieldSpec, Polynomial, format_monomial, sort_vars
from .errors import (BudgetExceeded, IncompleteSubstitution, RankLimitExceeded, StructureError,
                     UnknownVariable)
from .partition import Partition, apply_partition, split_yz

DEFAULT_RANK_LIMIT = 4096
DEFAULT_EXHAUSTIVE_BUDGET = 2**20
DEFAULT_TRIALS = 64


@dataclass(frozen=True)
class PolyCoeffMatrix:
    field: FieldSpec
    ys: tuple[str, ...]
    zs: tuple[str, ...]
    entries: Mapping[tuple[int, int], Polynomial]

    def support_monomial(self, mask: int, side: str) -> str:
        names = self.ys if side == "Y" else self.zs
        mono = tuple((names[i], 1) for i in range(len(names)) if mask >> i & 1)
        return format_monomial(mono) or "1"

    def nonzero_rows(self) -> list[int]:
        return sorted({r for r, _ in self.entries})

    def nonzero_cols(self) -> list[int]:
        return sorted({c for _, c in self.entries})

    def entry_variables(self) -> list[str]:
        """Variables that occur in some entry, in natural order."""
        return sort_vars({v for e in self.entries.values() for v in e.variables()})

    def is_constant(self) -> bool:
        return all(e.is_constant() for e in self.entries.values())

    def reconstruct(self) -> Polynomial:
        """Sum of ``entry * p * q`` over all entries; equals the source polynomial."""
        out = Polynomial.zero(self.field)
        for (r, c), e in self.entries.items():
            pq = {self.ys[i]: 1 for i in range(len(self.ys)) if r >> i & 1}
            pq.update({self.zs[j]: 1 for j in range(len(self.zs)) if c >> j & 1})
            out = out + e * Polynomial.from_terms(self.field, [(pq, 1)])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["y_support", "z_support", "entry"])
        for (r, c) in sorted(self.entries, key=lambda rc: (bin(rc[0]).count("1"), rc[0],
                                                           bin(rc[1]).count("1"), rc[1])):
            w.writerow([self.support_monomial(r, "Y"), self.support_monomial(c, "Z"),
                        str(self.entries[(r, c)])])
        return buf.getvalue()


def build_coeff_matrix(f: Polynomial, ys: Sequence[str] | None = None,
                       zs: Sequence[str] | None = None) -> PolyCoeffMatrix:
    """Coefficient matrix of ``f``; by default Y/Z are read off the ``y``/``z`` name prefixes."""
    if ys is None or zs is None:
        dy, dz = split_yz(f.universe)
        ys = dy if ys is None else ys
        zs = dz if zs is None else zs
    ybit = {v: 1 << i for i, v in enumerate(ys)}
    zbit = {v: 1 << j for j, v in enumerate(zs)}
    if set(ybit) & set(zbit):
        raise StructureError("Y and Z variable sets overlap")
    acc: dict[tuple[int, int], dict] = {}
    for m, c in f.terms.items():
        r = col = 0
        rest = []
        for v, e in m:
            if v in ybit:
                r |= ybit[v]
            elif v in zbit:
                col |= zbit[v]
            else:
                raise UnknownVariable(f"variable {v!r} is in neither Y nor Z")
            if e > 1:
                rest.append((v, e - 1))
        cell = acc.setdefault((r, col), {})
        key = tuple(rest)
        cell[key] = cell.get(key, 0) + c
    entries = {}
    for rc, terms in acc.items():
        poly = Polynomial(f.field, terms)
        if poly:
            entries[rc] = poly
    return PolyCoeffMatrix(f.field, tuple(ys), tuple(zs), entries)


def build_partial_derivatives_matrix(f: Polynomial, ys=None, zs=None) -> PolyCoeffMatrix:
    if not f.is_multilinear():
        raise StructureError("partial derivatives matrix needs a multilinear polynomial")
    return build_coeff_matrix(f, ys, zs)


def coeff_matrix_under(f: Polynomial, part: Partition) -> PolyCoeffMatrix:
    """Coefficient matrix of ``f`` after renaming X-variables through ``part``."""
    g = apply_partition(f, part)
    return build_coeff_matrix(g, part.y_names, part.z_names)


@dataclass(frozen=True)
class ScalarMatrix:
    """Dense block over the nonzero rows/columns of a substituted matrix."""

    field: FieldSpec
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    data: tuple[tuple[int, ...], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.cols)

    @classmethod
    def from_cells(cls, fld: FieldSpec, cells: Mapping[tuple[int, int], int]) -> "ScalarMatrix":
        nz = {rc: v % fld.p for rc, v in cells.items() if v % fld.p}
        rows = tuple(sorted({r for r, _ in nz}))
        cols = tuple(sorted({c for _, c in nz}))
        cidx = {c: j for j, c in enumerate(cols)}
        data = [[0] * len(cols) for _ in rows]
        ridx = {r: i for i, r in enumerate(rows)}
        for (r, c), v in nz.items():
            data[ridx[r]][cidx[c]] = v
        return cls(fld, rows, cols, tuple(tuple(row) for row in data))

    @classmethod
    def from_rows(cls, fld: FieldSpec, rows: Sequence[Sequence[int]]) -> "ScalarMatrix":
        return cls.from_cells(fld, {(i, j): v for i, row in enumerate(rows)
                                    for j, v in enumerate(row)})

    def rank(self, limit: int = DEFAULT_RANK_LIMIT) -> int:
        return matrix_rank(self, limit)


def substitute_matrix(M: PolyCoeffMatrix, s: Mapping[str, int]) -> ScalarMatrix:
    missing = [v for v in M.entry_variables() if v not in s]
    if missing:
        raise IncompleteSubstitution(f"substitution leaves entry variables unassigned: {missing}")
    cells = {rc: e.evaluate(s) for rc, e in M.entries.items()}
    return ScalarMatrix.from_cells(M.field, cells)


def _rank_gf2(rows: Iterable[Sequence[int]]) -> int:
    basis: dict[int, int] = {}
    for row in rows:
        r = 0
        for j, v in enumerate(row):
            if v & 1:
                r |= 1 << j
        while r:
            h = r.bit_length() - 1
            if h in basis:
                r ^= basis[h]
            else:
                basis[h] = r
                break
    return len(basis)


def rank_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Rank over GF(p) of a list of integer rows, by Gaussian elimination."""
    if p == 2:
        return _rank_gf2(rows)
    pivots: dict[int, list[int]] = {}
    for row in rows:
        r = [v % p for v in row]
        for col in range(len(r)):
            if not r[col]:
                continue
            piv = pivots.get(col)
            if piv is None:
                inv = pow(r[col], -1, p)
                pivots[col] = [v * inv % p for v in r]
                break
            f = r[col]
            r = [(a - f * b) % p for a, b in zip(r, piv)]
    return len(pivots)


def matrix_rank(m: ScalarMatrix, limit: int = DEFAULT_RANK_LIMIT) -> int:
    nr, nc = m.shape
    if nr > limit or nc > limit:
        raise RankLimitExceeded(f"matrix of compacted shape {nr}x{nc} exceeds rank limit {limit}")
    if nr == 0 or nc == 0:
        return 0
    return rank_mod_p(m.data, m.field.p)


def term_rank(cells: Iterable[tuple[int, int]]) -> int:
    """Size of a maximum matching between rows and columns of the nonzero pattern.

    Every substitution's rank is at most this number.
    """
    adj: dict[int, list[int]] = {}
    for r, c in cells:
        adj.setdefault(r, []).append(c)
    match_col: dict[int, int] = {}

    def augment(r, seen):
        for c in adj[r]:
            if c in seen:
                continue
            seen.add(c)
            if c not in match_col or augment(match_col[c], seen):
                match_col[c] = r
                return True
        return False

    return sum(1 for r in adj if augment(r, set()))


# -- batched evaluation --------------------------------------------------

def _inv_vec(a: np.ndarray, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    e = p - 2
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


def batched_rank(A: np.ndarray, p: int) -> np.ndarray:
    """Ranks over GF(p) of a stack of matrices with shape (N, R, C)."""
    if A.shape[2] > A.shape[1]:
        A = A.transpose(0, 2, 1)
    A = np.array(A, dtype=np.int64) % p
    N, R, C = A.shape
    rank = np.zeros(N, dtype=np.int64)
    used = np.zeros((N, R), dtype=bool)
    for c in range(C):
        cand = (A[:, :, c] != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        idx = np.nonzero(has)[0]
        pr = cand[idx].argmax(axis=1)
        pivrow = A[idx, pr, :]
        pivrow = pivrow * _inv_vec(pivrow[:, c], p)[:, None] % p
        factors = A[idx, :, c].copy()
        factors[np.arange(len(idx)), pr] = 0
        sub = (A[idx] - factors[:, :, None] * pivrow[:, None, :]) % p
        sub[np.arange(len(idx)), pr, :] = pivrow
        A[idx] = sub
        used[idx, pr] = True
        rank[idx] += 1
    return rank


class _CompiledMatrix:
    """Entries of a coefficient matrix as evaluators over a fixed variable order."""

    def __init__(self, M: PolyCoeffMatrix):
        self.p = M.field.p
        self.vars = M.entry_variables()
        pos = {v: i for i, v in enumerate(self.vars)}
        self.rows = M.nonzero_rows()
        self.cols = M.nonzero_cols()
        ridx = {r: i for i, r in enumerate(self.rows)}
        cidx = {c: j for j, c in enumerate(self.cols)}
        self.const = np.zeros((len(self.rows), len(self.cols)), dtype=np.int64)
        self.varying = []
        for (r, c), e in M.entries.items():
            if e.is_constant():
                self.const[ridx[r], cidx[c]] = e.constant_value()
            else:
                terms = [(coef, tuple((pos[v], k) for v, k in m)) for m, coef in e.terms.items()]
                self.varying.append((ridx[r], cidx[c], terms))
        self.upper = term_rank((ridx[r], cidx[c]) for (r, c) in M.entries)

    def evaluate(self, V: np.ndarray) -> np.ndarray:
        p = self.p
        B = V.shape[0]
        out = np.broadcast_to(self.const, (B,) + self.const.shape).copy()
        powers: dict[tuple[int, int], np.ndarray] = {}

        def pw(i, k):
            key = (i, k)
            if key not in powers:
                x = V[:, i] % p
                acc = x
                for _ in range(k - 1):
                    acc = acc * x % p
                powers[key] = acc
            return powers[key]

        for ri, ci, terms in self.varying:
            val = np.zeros(B, dtype=np.int64)
            for coef, factors in terms:
                t = np.full(B, coef, dtype=np.int64)
                for i, k in factors:
                    t = t * pw(i, k) % p
                val = (val + t) % p
            out[:, ri, ci] = val
        return out


def _digits(start: int, stop: int, k: int, p: int) -> np.ndarray:
    idx = np.arange(start, stop, dtype=np.int64)
    V = np.empty((stop - start, k), dtype=np.int64)
    for j in range(k - 1, -1, -1):
        V[:, j] = idx % p
        idx //= p
    return V


@dataclass
class MaxrankResult:
    value: int
    exact: bool
    witness: dict[str, int]
    mode: str
    field: int
    entry_variables: list[str]
    evaluated: int
    upper_bound: int
    trials: int | None = None
    seed: int | None = None
    budget: int | None = None

    def to_dict(self) -> dict:
        return {"value": self.value, "exact": self.exact, "witness": dict(self.witness),
                "mode": self.mode, "field": self.field, "entry_variables": list(self.entry_variables),
                "evaluated": self.evaluated, "upper_bound": self.upper_bound,
                "trials": self.trials, "seed": self.seed, "budget": self.budget}


def maxrank(M: PolyCoeffMatrix, mode: str = "exhaustive", seed: int = 0,
            trials: int = DEFAULT_TRIALS, budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
            rank_limit: int = DEFAULT_RANK_LIMIT) -> MaxrankResult:
    """Maximum rank of ``M`` over all (exhaustive) or sampled substitutions.

    Enumeration order is ``itertools.product`` order over the entry variables
    in natural order; the witness is the first substitution reaching the
    maximum.  Enumeration stops early once the term-rank bound is reached.
    """
    if mode not in ("exhaustive", "sampled"):
        raise ValueError(f"unknown maxrank mode {mode!r}")
    cm = _CompiledMatrix(M)
    p, k = cm.p, len(cm.vars)
    nr, nc = len(cm.rows), len(cm.cols)
    if nr > rank_limit or nc > rank_limit:
        raise RankLimitExceeded(f"matrix with {nr} nonzero rows and {nc} nonzero columns "
                                f"exceeds rank limit {rank_limit}")
    meta = dict(mode=mode, field=p, entry_variables=list(cm.vars), upper_bound=cm.upper)
    if nr == 0:
        return MaxrankResult(0, mode == "exhaustive", {}, evaluated=0, budget=budget,
                             trials=trials if mode == "sampled" else None,
                             seed=seed if mode == "sampled" else None, **meta)

    if mode == "exhaustive":
        total = p**k
        if total > budget:
            raise BudgetExceeded(f"exhaustive maxrank needs {p}^{k} = {total} substitutions "
                                 f"over entry variables {cm.vars}; budget is {budget} "
                                 f"(use sampled mode)")

        def chunks():
            step = max(1, min(total, 2**21 // max(1, nr * nc)))
            for start in range(0, total, step):
                yield _digits(start, min(total, start + step), k, p)
    else:
        rng = random.Random(seed)
        n_eval = 1 if k == 0 else trials
        points = [[rng.randrange(p) for _ in range(k)] for _ in range(n_eval)]
        total = n_eval

        def chunks():
            step = max(1, 2**21 // max(1, nr * nc))
            for start in range(0, total, step):
                yield np.array(points[start:start + step], dtype=np.int64).reshape(-1, k)

    best, best_at, seen = -1, None, 0
    for V in chunks():
        ranks = batched_rank(cm.evaluate(V), p)
        i = int(ranks.argmax())
        if ranks[i] > best:
            best, best_at = int(ranks[i]), V[i].tolist()
        seen += V.shape[0]
        if best >= cm.upper:
            break
    witness = dict(zip(cm.vars, best_at))
    return MaxrankResult(best, mode == "exhaustive", witness, evaluated=seen, budget=budget,
                         trials=trials if mode == "sampled" else None,
                         seed=seed if mode == "sampled" else None, **meta)


def poly_maxrank(f: Polynomial, part: Partition | None = None, **kwargs) -> MaxrankResult:
    """maxrank of ``f`` (after applying ``part`` if given)."""
    M = coeff_matrix_under(f, part) if part is not None else build_coeff_matrix(f)
    return maxrank(M, **kwargs)


def auto_maxrank(M: PolyCoeffMatrix, seed: int = 0, trials: int = DEFAULT_TRIALS,
                 budget: int = DEFAULT_EXHAUSTIVE_BUDGET,
                 rank_limit: int = DEFAULT_RANK_LIMIT) -> MaxrankResult:
    """Exhaustive when the budget allows it, sampled otherwise."""
    if M.field.p ** len(M.entry_variables()) <= budget:
        return maxrank(M, "exhaustive", budget=budget, rank_limit=rank_limit)
    return maxrank(M, "sampled", seed=seed, trials=trials, budget=budget, rank_limit=rank_limit)


def enumerate_substitutions(variables: Sequence[str], fld: FieldSpec):
    """All assignments of ``variables`` in the order used by exhaustive maxrank."""
    for vals in itertools.product(range(fld.p), repeat=len(variables)):
        yield dict(zip(variables, vals))
