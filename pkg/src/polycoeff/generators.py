"""Explicit hard polynomials and seeded random instance generators.

Every generator returns objects over X-variables; partitions that rename
them to Y/Z are attached where the construction dictates one.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .algebra import DEFAULT_BUDGET, FieldSpec, Polynomial, poly_mul
from .circuits.abp import ABP, Edge
from .circuits.formula import ConstLeaf, Formula, Plus, Times, VarLeaf
from .circuits.sps import AffineForm, SigmaPiSigma
from .errors import BudgetExceeded, StructureError
from .partition import Partition, imm_partition, imm_var

GF2 = FieldSpec(2)


def x_names(n: int) -> list[str]:
    return [f"x{i}" for i in range(1, n + 1)]


# -- iterated matrix multiplication ------------------------------------------

@dataclass(frozen=True)
class ImmInstance:
    n: int
    d: int
    f: Polynomial
    partition: Partition
    grid: dict | None = None  # (j, k) -> entry (j, k) of the full product, 1-based

    def f_yz(self) -> Polynomial:
        from .partition import apply_partition
        return apply_partition(self.f, self.partition)


def _symbolic_matrix(i: int, n: int, fld: FieldSpec) -> list[list[Polynomial]]:
    return [[Polynomial.var(fld, imm_var(i, j, k)) for k in range(1, n + 1)]
            for j in range(1, n + 1)]


def _matmul(rows, mat, fld, budget):
    n = len(mat)
    out = []
    for row in rows:
        new = []
        for k in range(n):
            acc = Polynomial.zero(fld)
            for j in range(n):
                if row[j]:
                    acc = acc + poly_mul(row[j], mat[j][k], budget, label="matrix product")
            if len(acc) > budget:
                raise BudgetExceeded(f"matrix product entry has {len(acc)} terms, budget {budget}")
            new.append(acc)
        out.append(new)
    return out


def gen_imm(n: int, d: int, full_grid: bool = False, fld: FieldSpec = GF2,
            budget: int = DEFAULT_BUDGET) -> ImmInstance:
    """Entry (1,1) of ``A^1 A^2 ... A^d`` for symbolic n x n matrices."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    per_entry = n ** (d - 1)
    if per_entry > budget or (full_grid and per_entry * n * n > budget):
        raise BudgetExceeded(f"IMM with n={n}, d={d} needs {per_entry} terms per entry, "
                             f"budget {budget}")
    first = _symbolic_matrix(1, n, fld)
    rows = first if full_grid else [first[0]]
    for i in range(2, d + 1):
        rows = _matmul(rows, _symbolic_matrix(i, n, fld), fld, budget)
    grid = None
    if full_grid:
        grid = {(j + 1, k + 1): rows[j][k] for j in range(n) for k in range(n)}
    return ImmInstance(n, d, rows[0][0], imm_partition(n, d), grid)


# -- the diagonal polynomial Q ---------------------------------------------

@dataclass(frozen=True)
class QInstance:
    n: int
    f: Polynomial
    partition: Partition
    pairs: tuple  # ((S_i, T_i), ...) as tuples of X-names

    @property
    def w(self) -> int:
        return len(self.pairs)


def colex_subsets(items: Sequence[str], size: int) -> list[tuple[str, ...]]:
    pos = {v: i for i, v in enumerate(items)}
    combos = itertools.combinations(items, size)
    return sorted(combos, key=lambda s: tuple(reversed([pos[v] for v in s])))


def gen_q(n: int, fld: FieldSpec = GF2) -> QInstance:
    """Sum over paired size-n/4 subsets (S_i, T_i) of prod(S_i) * prod(T_i)."""
    if n < 4 or n % 4:
        raise StructureError(f"Q needs n divisible by 4, got {n}")
    xs = x_names(n)
    ys, zs = xs[: n // 2], xs[n // 2:]
    ss, ts = colex_subsets(ys, n // 4), colex_subsets(zs, n // 4)
    pairs = tuple(zip(ss, ts))
    terms = [({v: 1 for v in s + t}, 1) for s, t in pairs]
    f = Polynomial.from_terms(fld, terms, xs)
    return QInstance(n, f, Partition(tuple(ys), tuple(zs)), pairs)


# -- random depth-3 circuits --------------------------------------------------

def _random_form(rng: random.Random, names: Sequence[str], fld: FieldSpec,
                 homogeneous: bool) -> AffineForm:
    while True:
        lin = {v: rng.randrange(fld.p) for v in names}
        const = 0 if homogeneous else rng.randrange(fld.p)
        form = AffineForm.make(lin, const)
        if form.lin:
            return form


def _combination(rng: random.Random, basis: Sequence[AffineForm], fld: FieldSpec) -> AffineForm:
    while True:
        lam = [rng.randrange(fld.p) for _ in basis]
        const = sum(l * b.const for l, b in zip(lam, basis)) % fld.p
        lin: dict[str, int] = {}
        for l, b in zip(lam, basis):
            for v, c in b.lin:
                lin[v] = (lin.get(v, 0) + l * c) % fld.p
        form = AffineForm.make(lin, const)
        if form.lin:
            return form


def gen_random_sps(k: int, d: int, nvars: int, homogeneous: bool = True, r: int | None = None,
                   seed=0, fld: FieldSpec = FieldSpec(3), scope: str = "gate",
                   names: Sequence[str] | None = None) -> SigmaPiSigma:
    """``k`` product gates of ``d`` forms each over ``x1..x_nvars``.

    With ``r`` set, forms are drawn from a random span of ``r`` forms: one
    span per gate (``scope="gate"``, caps product dimension) or one shared
    span (``scope="total"``, caps total dimension).  ``r == 1`` with gate
    scope makes every gate a d-th power of a single form.
    """
    if min(k, d, nvars) < 1 or (r is not None and r < 1):
        raise ValueError("parameters must be positive")
    if scope not in ("gate", "total"):
        raise ValueError(f"unknown scope {scope!r}")
    rng = random.Random(seed)
    names = list(names) if names is not None else x_names(nvars)

    def span():
        return [_random_form(rng, names, fld, homogeneous) for _ in range(r)]

    shared = span() if r is not None and scope == "total" else None
    gates = []
    for _ in range(k):
        if r is None:
            gates.append(tuple(_random_form(rng, names, fld, homogeneous) for _ in range(d)))
            continue
        basis = shared if shared is not None else span()
        if r == 1 and scope == "gate":
            gates.append((basis[0],) * d)
        else:
            gates.append(tuple(_combination(rng, basis, fld) for _ in range(d)))
    return SigmaPiSigma(tuple(gates))


# -- random product-sparse formulas --------------------------------------------

def gen_random_product_sparse(s: int, d: int, leaves: int, seed=0, nvars: int = 6,
                              fld: FieldSpec = GF2, const_prob: float = 0.1,
                              times_prob: float = 0.5, names: Sequence[str] | None = None,
                              budget: int = DEFAULT_BUDGET) -> Formula:
    """Random formula with every product gate disjoint or s-sparse, depth at most ``d``.

    Subtrees are merged pairwise at random.  A product merge that would be
    neither disjoint nor s-sparse, or would push the depth past ``d``,
    becomes a sum instead.
    """
    if leaves < 1 or nvars < 1 or s < 0 or d < 0:
        raise ValueError("parameters must be positive")
    rng = random.Random(seed)
    names = list(names) if names is not None else x_names(nvars)
    pool = []  # (formula, variables, polynomial, depth)
    for _ in range(leaves):
        if rng.random() < const_prob:
            val = rng.randrange(1, fld.p) if fld.p > 2 else 1
            pool.append((ConstLeaf(val), frozenset(), Polynomial.constant(fld, val), 0))
        else:
            v = rng.choice(names)
            pool.append((VarLeaf(v), frozenset([v]), Polynomial.var(fld, v), 0))
    while len(pool) > 1:
        i = rng.randrange(len(pool) - 1)
        (fl, xl, pl, dl), (fr, xr, pr, dr) = pool[i], pool[i + 1]
        node = None
        if rng.random() < times_prob:
            if not xl & xr:
                node = (Times(fl, fr), xl | xr, poly_mul(pl, pr, budget), max(dl, dr))
            elif min(len(pl), len(pr)) <= 2**s and max(dl, dr) + 1 <= d:
                node = (Times(fl, fr), xl | xr, poly_mul(pl, pr, budget), max(dl, dr) + 1)
        if node is None:
            node = (Plus(fl, fr), xl | xr, pl + pr, max(dl, dr))
        pool[i:i + 2] = [node]
    return pool[0][0]


# -- branching programs --------------------------------------------------------

def gen_ordered_abp(n: int, pi: Sequence[str] | None = None, seed=0, width: int = 2,
                    fld: FieldSpec = GF2) -> ABP:
    """Homogeneous ABP of depth 2n whose edges into level i read ``pi[i-1]`` only.

    Interior level widths are drawn from ``1..width``; every node has at
    least one incoming and one outgoing edge.  Edge coefficients are nonzero
    field elements.
    """
    if n < 1 or width < 1:
        raise ValueError("parameters must be positive")
    order = list(pi) if pi is not None else x_names(2 * n)
    if len(order) != 2 * n or len(set(order)) != 2 * n:
        raise StructureError(f"pi must list {2 * n} distinct variables")
    rng = random.Random(seed)
    levels = [("s",)]
    for i in range(1, 2 * n):
        levels.append(tuple(f"v{i}_{j}" for j in range(1, rng.randint(1, width) + 1)))
    levels.append(("t",))
    edges = []
    for i in range(1, 2 * n + 1):
        prev, cur = levels[i - 1], levels[i]
        pairs = set()
        for v in cur:
            pairs.add((rng.choice(prev), v))
        for u in prev:
            if not any(a == u for a, _ in pairs):
                pairs.add((u, rng.choice(cur)))
        for u in prev:
            for v in cur:
                if (u, v) not in pairs and rng.random() < 0.3:
                    pairs.add((u, v))
        for u, v in sorted(pairs):
            coeff = rng.randrange(1, fld.p)
            edges.append(Edge(u, v, AffineForm.variable(order[i - 1], coeff)))
    return ABP(tuple(levels), tuple(edges))


def gen_sum_of_products_abp(n: int) -> ABP:
    """Depth-2 ABP for ``sum_i x_i * x_{n+i}``: one middle level of n nodes, one path each."""
    if n < 1:
        raise ValueError("need n >= 1")
    xs = x_names(2 * n)
    mid = tuple(f"u{i}" for i in range(1, n + 1))
    edges = [Edge("s", u, AffineForm.variable(xs[i])) for i, u in enumerate(mid)]
    edges += [Edge(u, "t", AffineForm.variable(xs[n + i])) for i, u in enumerate(mid)]
    return ABP((("s",), mid, ("t",)), tuple(edges))


def imm_abp(n: int, d: int) -> ABP:
    """The natural width-n ABP for entry (1,1) of the iterated matrix product."""
    levels = [("s",)] + [tuple(f"m{i}_{j}" for j in range(1, n + 1)) for i in range(1, d)] + [("t",)]
    edges = []
    for i in range(1, d + 1):
        prev = [1] if i == 1 else range(1, n + 1)
        cur = [1] if i == d else range(1, n + 1)
        for j in prev:
            for k in cur:
                u = "s" if i == 1 else f"m{i - 1}_{j}"
                v = "t" if i == d else f"m{i}_{k}"
                edges.append(Edge(u, v, AffineForm.variable(imm_var(i, j, k))))
    return ABP(tuple(levels), tuple(edges))


__all__ = [
    "ImmInstance", "QInstance", "colex_subsets", "gen_imm", "gen_q", "gen_random_sps",
    "gen_random_product_sparse", "gen_ordered_abp", "gen_sum_of_products_abp", "imm_abp",
    "x_names",
]
