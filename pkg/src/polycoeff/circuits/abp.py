"""Layered arithmetic branching programs.

Edge weights are affine forms: a variable, a scalar, or a linear form.  A
program is homogeneous when every weight has zero constant term.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from ..algebra import DEFAULT_BUDGET, FieldSpec, Polynomial, poly_mul, sort_vars
from ..errors import BudgetExceeded, StructureError
from .sps import AffineForm

MAX_SEARCH_NODES = 16


@dataclass(frozen=True)
class Edge:
    src: Hashable
    dst: Hashable
    weight: AffineForm


@dataclass(frozen=True)
class ABP:
    levels: tuple[tuple[Hashable, ...], ...]
    edges: tuple[Edge, ...]
    _level_of: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        levels = tuple(tuple(l) for l in self.levels)
        object.__setattr__(self, "levels", levels)
        object.__setattr__(self, "edges", tuple(self.edges))
        if len(levels) < 2:
            raise StructureError("an ABP needs at least a source level and a sink level")
        if len(levels[0]) != 1 or len(levels[-1]) != 1:
            raise StructureError("first and last levels must each hold exactly one node")
        where = {}
        for i, lvl in enumerate(levels):
            for v in lvl:
                if v in where:
                    raise StructureError(f"node {v!r} appears in levels {where[v]} and {i}")
                where[v] = i
        for e in self.edges:
            for end in (e.src, e.dst):
                if end not in where:
                    raise StructureError(f"edge endpoint {end!r} is not in any level")
            if where[e.dst] != where[e.src] + 1:
                raise StructureError(f"edge {e.src!r}->{e.dst!r} skips from level "
                                     f"{where[e.src]} to {where[e.dst]}")
        object.__setattr__(self, "_level_of", where)

    @property
    def source(self):
        return self.levels[0][0]

    @property
    def sink(self):
        return self.levels[-1][0]

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def size(self) -> int:
        return sum(len(l) for l in self.levels)

    def level_of(self, v) -> int:
        return self._level_of[v]

    def is_homogeneous(self, fld: FieldSpec | None = None) -> bool:
        return all(e.weight.is_homogeneous(fld) for e in self.edges)

    def variables(self) -> list[str]:
        return sort_vars({v for e in self.edges for v in e.weight.support()})

    def out_edges(self) -> dict:
        out: dict = {}
        for e in self.edges:
            out.setdefault(e.src, []).append(e)
        return out

    def in_edges(self) -> dict:
        inc: dict = {}
        for e in self.edges:
            inc.setdefault(e.dst, []).append(e)
        return inc


def abp_node_polys(b: ABP, start, fld: FieldSpec, budget: int = DEFAULT_BUDGET) -> dict:
    """Sum over paths from ``start`` to every later node of the edge-weight products."""
    lvl0 = b.level_of(start)
    polys = {start: Polynomial.constant(fld, 1)}
    inc = b.in_edges()
    for i in range(lvl0 + 1, len(b.levels)):
        for v in b.levels[i]:
            acc = Polynomial.zero(fld)
            for e in inc.get(v, ()):
                if e.src in polys and polys[e.src]:
                    acc = acc + poly_mul(polys[e.src], e.weight.to_poly(fld), budget,
                                         label=f"edge {e.src!r}->{e.dst!r}")
            polys[v] = acc
    return polys


def abp_segment_poly(b: ABP, u, v, fld: FieldSpec, budget: int = DEFAULT_BUDGET) -> Polynomial:
    if b.level_of(u) > b.level_of(v):
        raise StructureError(f"node {u!r} lies after node {v!r}")
    if u == v:
        return Polynomial.constant(fld, 1)
    return abp_node_polys(b, u, fld, budget).get(v, Polynomial.zero(fld))


def expand_abp(b: ABP, fld: FieldSpec, budget: int = DEFAULT_BUDGET) -> Polynomial:
    return abp_segment_poly(b, b.source, b.sink, fld, budget)


def path_variables(b: ABP) -> tuple[dict, dict]:
    """X_{s,v} and X_{v,t} for every node, from edge-weight supports."""
    inc, out = b.in_edges(), b.out_edges()
    xs: dict = {b.source: frozenset()}
    for lvl in b.levels[1:]:
        for v in lvl:
            acc = None
            for e in inc.get(v, ()):
                if e.src in xs:
                    acc = (acc or frozenset()) | xs[e.src] | e.weight.support()
            if acc is not None:
                xs[v] = acc
    xt: dict = {b.sink: frozenset()}
    for lvl in reversed(b.levels[:-1]):
        for v in lvl:
            acc = None
            for e in out.get(v, ()):
                if e.dst in xt:
                    acc = (acc or frozenset()) | xt[e.dst] | e.weight.support()
            if acc is not None:
                xt[v] = acc
    # nodes with no path keep an empty set: P_{s,v} is empty
    every = [v for lvl in b.levels for v in lvl]
    return ({v: xs.get(v, frozenset()) for v in every},
            {v: xt.get(v, frozenset()) for v in every})


@dataclass(frozen=True)
class ABPPartitionVerdict:
    partitioned: bool
    n: int
    level: int | None
    alpha: Fraction | None
    pi: tuple[str, ...] | None
    cases: Mapping  # node -> 1 | 2
    qualifying_levels: tuple[int, ...]
    failures: Mapping  # level -> first offending node (checker witness)

    def bound_squared(self, width: int) -> int:
        """Square of ``|L_i| * 2^(n(1-alpha))``, which is ``|L_i|^2 * 2^(2n - i)``."""
        return width * width * 2 ** (2 * self.n - self.level)

    def to_dict(self) -> dict:
        return {"partitioned": self.partitioned, "n": self.n, "level": self.level,
                "alpha": None if self.alpha is None else str(self.alpha),
                "pi": None if self.pi is None else list(self.pi),
                "cases": {str(k): v for k, v in self.cases.items()},
                "qualifying_levels": list(self.qualifying_levels),
                "failures": {str(k): str(v) for k, v in self.failures.items()}}


def _level_cases_fixed(nodes, xs, xt, first, second, cap):
    cases = {}
    for v in nodes:
        if xs[v] <= first and len(xt[v]) <= cap:
            cases[v] = 1
        elif xt[v] <= second and len(xs[v]) <= cap:
            cases[v] = 2
        else:
            return None, v
    return cases, None


def _level_cases_search(nodes, xs, xt, universe, n, cap, level):
    options = []
    for v in nodes:
        opts = [c for c, ok in ((1, len(xt[v]) <= cap), (2, len(xs[v]) <= cap)) if ok]
        if not opts:
            return None, None, v
        options.append(opts)
    free = sum(1 for o in options if len(o) > 1)
    if free > MAX_SEARCH_NODES:
        raise BudgetExceeded(f"level {level} has {free} nodes with two admissible cases; "
                             f"the partition search is capped at {MAX_SEARCH_NODES}")
    for choice in itertools.product(*options):
        u1 = frozenset().union(*(xs[v] for v, c in zip(nodes, choice) if c == 1))
        u2 = frozenset().union(*(xt[v] for v, c in zip(nodes, choice) if c == 2))
        if u1 & u2 or len(u1) > n or len(u2) > n or not (u1 | u2) <= universe:
            continue
        filler = [x for x in sort_vars(universe - u1 - u2)]
        first = sort_vars(u1) + filler[:n - len(u1)]
        second = sort_vars(universe - set(first))
        return dict(zip(nodes, choice)), tuple(first + second), None
    return None, None, nodes[0]


def abp_partition_check(b: ABP, variables: Sequence[str] | None = None,
                        pi: Sequence[str] | None = None) -> ABPPartitionVerdict:
    """Find an interior level witnessing that ``b`` is partitioned.

    ``pi`` lists the 2n variables in permuted order (first n form the first
    half).  Without ``pi`` every admissible split is searched per level.
    Among qualifying levels the one with the smallest bound
    ``|L_i| * 2^(n(1 - i/2n))`` is reported (earliest on ties).
    """
    if not b.is_homogeneous():
        raise StructureError("partition check needs a homogeneous ABP")
    names = list(pi) if pi is not None else (list(variables) if variables is not None
                                               else b.variables())
    if len(set(names)) != len(names):
        raise StructureError("variable list has duplicates")
    if len(names) % 2:
        raise StructureError(f"variable universe must have even size, got {len(names)}")
    universe = frozenset(names)
    stray = set(b.variables()) - universe
    if stray:
        raise StructureError(f"ABP uses variables outside the universe: {sort_vars(stray)}")
    n = len(names) // 2
    xs, xt = path_variables(b)
    found = []
    failures = {}
    for i in range(1, b.depth):
        cap = 2 * n - i
        nodes = list(b.levels[i])
        if pi is not None:
            cases, bad = _level_cases_fixed(nodes, xs, xt, frozenset(names[:n]),
                                            frozenset(names[n:]), cap)
            order = tuple(names)
        else:
            cases, order, bad = _level_cases_search(nodes, xs, xt, universe, n, cap, i)
        if cases is None:
            failures[i] = bad
        else:
            found.append((i, cases, order))
    if not found:
        return ABPPartitionVerdict(False, n, None, None, None, {}, (), failures)
    best = min(found, key=lambda t: (len(b.levels[t[0]]) ** 2 * 2 ** (2 * n - t[0]), t[0]))
    i, cases, order = best
    return ABPPartitionVerdict(True, n, i, Fraction(i, 2 * n), order, cases,
                               tuple(t[0] for t in found), failures)


def recheck_partition_verdict(b: ABP, verdict: ABPPartitionVerdict) -> bool:
    """Re-verify the reported level and per-node cases from scratch."""
    if not verdict.partitioned:
        return False
    n, i = verdict.n, verdict.level
    first, second = frozenset(verdict.pi[:n]), frozenset(verdict.pi[n:])
    xs, xt = path_variables(b)
    cap = 2 * n - i
    for v in b.levels[i]:
        case = verdict.cases.get(v)
        if case == 1:
            ok = xs[v] <= first and len(xt[v]) <= cap
        elif case == 2:
            ok = xt[v] <= second and len(xs[v]) <= cap
        else:
            ok = False
        if not ok:
            return False
    return True
