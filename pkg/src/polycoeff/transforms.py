"""Degree slices, power-sum decompositions and bases of linear forms.

A product of ``d`` forms is rewritten with the inclusion-exclusion identity

    l_1 * ... * l_d = (1/d!) * sum over nonempty S of (-1)^(d-|S|) * (sum_{u in S} l_u)^d

which needs ``d!`` to be invertible, i.e. characteristic ``p > d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra import DEFAULT_BUDGET, FieldSpec, Polynomial, homogeneous_slice, poly_mul, sort_vars
from .circuits.sps import AffineForm, expand_gate
from .errors import CharacteristicError, SelfCheckFailed


@dataclass(frozen=True)
class PowerTerm:
    coeff: int
    form: AffineForm
    degree: int

    def to_json(self) -> dict:
        return {"c": self.coeff, "form": self.form.to_json(), "d": self.degree}


@dataclass(frozen=True)
class PowerSumForm:
    field: FieldSpec
    terms: tuple[PowerTerm, ...]

    def __len__(self):
        return len(self.terms)

    def expand(self, budget: int = DEFAULT_BUDGET) -> Polynomial:
        out = Polynomial.zero(self.field)
        for t in self.terms:
            power = Polynomial.constant(self.field, t.coeff)
            base = t.form.to_poly(self.field)
            for _ in range(t.degree):
                power = poly_mul(power, base, budget, label="power-sum term")
            out = out + power
        return out

    def to_json(self) -> list:
        return [t.to_json() for t in self.terms]


def _combine(forms: Sequence[AffineForm], weights: Sequence[int], fld: FieldSpec) -> AffineForm:
    const = 0
    lin: dict[str, int] = {}
    for f, w in zip(forms, weights):
        if not w:
            continue
        const += w * f.const
        for v, c in f.lin:
            lin[v] = lin.get(v, 0) + w * c
    return AffineForm.make({v: c % fld.p for v, c in lin.items()}, const % fld.p)


def _need_char(fld: FieldSpec, d: int):
    if fld.p <= d:
        raise CharacteristicError(f"degree {d} power-sum decomposition needs characteristic "
                                  f"p > {d}, got p = {fld.p}")


def fischer_decompose(forms: Sequence[AffineForm], fld: FieldSpec, verify: bool = True,
                      budget: int = DEFAULT_BUDGET) -> PowerSumForm:
    """Write ``prod(forms)`` as a combination of d-th powers of subset sums."""
    d = len(forms)
    if d == 0:
        raise ValueError("need at least one form")
    _need_char(fld, d)
    scale = fld.inv(math.factorial(d))
    acc: dict[AffineForm, int] = {}
    order: list[AffineForm] = []
    for mask in range(1, 2**d):
        bits = [mask >> u & 1 for u in range(d)]
        form = _combine(forms, bits, fld)
        sign = -1 if (d - sum(bits)) % 2 else 1
        if form not in acc:
            acc[form] = 0
            order.append(form)
        acc[form] = (acc[form] + sign * scale) % fld.p
    out = PowerSumForm(fld, tuple(PowerTerm(acc[f], f, d) for f in order if acc[f]))
    if verify:
        target = expand_gate(forms, fld, budget)
        if out.expand(budget) != target:
            raise SelfCheckFailed("power-sum expansion differs from the product")
    return out


def linear_basis(forms: Sequence[AffineForm], fld: FieldSpec,
                 with_const: bool = True) -> tuple[list[int], list[list[int]]]:
    """Greedy basis of ``forms`` with exact coordinates.

    Returns ``(basis, coords)``: ``basis`` lists indices into ``forms`` of the
    chosen basis elements, and ``coords[j][i]`` is the coefficient of basis
    element ``i`` in ``forms[j]``.
    """
    p = fld.p
    names = sort_vars({v for f in forms for v in f.support()})
    vecs = [[x % p for x in f.vector(names, with_const)] for f in forms]
    basis: list[int] = []
    # echelon rows: (pivot column, row vector, representation over basis)
    echelon: list[tuple[int, list[int], list[int]]] = []
    raw_coords: list[list[int]] = []
    for j, v in enumerate(vecs):
        rest = list(v)
        combo: list[int] = [0] * len(basis)
        for col, row, rep in echelon:
            f = rest[col]
            if f:
                rest = [(a - f * b) % p for a, b in zip(rest, row)]
                for i, r in enumerate(rep):
                    combo[i] = (combo[i] + f * r) % p
        lead = next((i for i, a in enumerate(rest) if a), None)
        if lead is None:
            raw_coords.append(combo)
            continue
        basis.append(j)
        inv = pow(rest[lead], -1, p)
        rep = [(-c) % p for c in combo] + [1]
        echelon = [(c, r, e + [0]) for c, r, e in echelon]
        echelon.append((lead, [a * inv % p for a in rest], [e * inv % p for e in rep]))
        unit = [0] * len(basis)
        unit[-1] = 1
        raw_coords.append(unit)
    coords = [c + [0] * (len(basis) - len(c)) for c in raw_coords]
    return basis, coords


def gate_degree_slice(gate: Sequence[AffineForm], d: int, fld: FieldSpec,
                      budget: int = DEFAULT_BUDGET) -> Polynomial:
    return homogeneous_slice(expand_gate(gate, fld, budget), d)


def _atom(i: int) -> str:
    return f"t{i + 1}"


def sum_of_powers_rewrite_many(gates: Sequence[Sequence[AffineForm]], d: int, fld: FieldSpec,
                               verify: bool = True, budget: int = DEFAULT_BUDGET):
    """Degree-d slice of ``sum(gates)`` as ``sum c_q L_q^d`` over one shared basis.

    Returns ``(PowerSumForm, r)`` where ``r`` is the rank of the homogeneous
    parts of all forms.  Every ``L_q`` is ``sum gamma_i * l_i`` for basis
    forms ``l_i`` and nonnegative integers with ``sum gamma_i <= d``.
    """
    _need_char(fld, d)
    p = fld.p
    forms = [f for g in gates for f in g]
    homog = [f.homogeneous_part() for f in forms]
    basis_idx, coords = linear_basis(homog, fld, with_const=False)
    r = len(basis_idx)
    basis = [homog[i] for i in basis_idx]
    # each gate as a polynomial in atoms t_i standing for the basis forms
    sliced = Polynomial.zero(fld)
    pos = 0
    for g in gates:
        prod = Polynomial.constant(fld, 1)
        for f in g:
            lin = {_atom(i): c for i, c in enumerate(coords[pos]) if c}
            prod = poly_mul(prod, AffineForm.make(lin, f.const).to_poly(fld), budget,
                            label="gate in basis coordinates")
            pos += 1
        sliced = sliced + homogeneous_slice(prod, d)
    if d == 0:
        c0 = sliced.constant_value()
        terms = (PowerTerm(c0, AffineForm(), 0),) if c0 else ()
        return PowerSumForm(fld, terms), r
    scale = fld.inv(math.factorial(d))
    acc: dict[tuple[int, ...], int] = {}
    for mono, a in sliced.terms.items():
        e = [0] * r
        for v, k in mono:
            e[int(v[1:]) - 1] = k
        for gamma in _sub_multisets(e):
            g_sum = sum(gamma)
            if not g_sum:
                continue
            mult = 1
            for ei, gi in zip(e, gamma):
                mult *= math.comb(ei, gi)
            sign = -1 if (d - g_sum) % 2 else 1
            # (lam * L)^d = lam^d * L^d: merge proportional gammas under a monic key
            lead = next(g for g in gamma if g)
            key = tuple(g * fld.inv(lead) % p for g in gamma)
            weight = pow(lead, d, p)
            acc[key] = (acc.get(key, 0) + a * sign * mult * scale * weight) % p
    terms = []
    for gamma in sorted(acc):
        if acc[gamma]:
            terms.append(PowerTerm(acc[gamma], _combine(basis, gamma, fld), d))
    out = PowerSumForm(fld, tuple(terms))
    if verify:
        target = Polynomial.zero(fld)
        for g in gates:
            target = target + gate_degree_slice(g, d, fld, budget)
        if out.expand(budget) != target:
            raise SelfCheckFailed("power-sum expansion differs from the degree slice")
    return out, r


def sum_of_powers_rewrite(gate: Sequence[AffineForm], d: int, fld: FieldSpec,
                          verify: bool = True, budget: int = DEFAULT_BUDGET) -> PowerSumForm:
    """Degree-d slice of one product gate as a sum of at most C(d+r, r) d-th powers."""
    return sum_of_powers_rewrite_many([gate], d, fld, verify, budget)[0]


def _sub_multisets(e: Sequence[int]) -> Iterable[tuple[int, ...]]:
    if not e:
        yield ()
        return
    for head in range(e[0] + 1):
        for tail in _sub_multisets(e[1:]):
            yield (head,) + tail


def power_count_bound(d: int, r: int) -> int:
    return math.comb(d + r, r)
