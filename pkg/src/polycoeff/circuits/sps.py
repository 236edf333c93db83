"""Depth-3 (sum of products of affine forms) circuits."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..algebra import DEFAULT_BUDGET, FieldSpec, Polynomial, check_var_name, natural_key, poly_mul, sort_vars
from ..coeffmatrix import rank_mod_p
from ..errors import StructureError


@dataclass(frozen=True)
class AffineForm:
    """``const + sum coeff * var``; integer coefficients, reduced only when a field is applied."""

    const: int = 0
    lin: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        items = dict(self.lin)
        for v in items:
            check_var_name(v)
        clean = tuple(sorted(((v, c) for v, c in items.items() if c), key=lambda vc: natural_key(vc[0])))
        object.__setattr__(self, "lin", clean)

    @classmethod
    def make(cls, lin: Mapping[str, int] | None = None, const: int = 0) -> "AffineForm":
        return cls(const, tuple((lin or {}).items()))

    @classmethod
    def variable(cls, name: str, coeff: int = 1) -> "AffineForm":
        return cls(0, ((name, coeff),))

    def support(self) -> frozenset:
        return frozenset(v for v, _ in self.lin)

    def is_homogeneous(self, fld: FieldSpec | None = None) -> bool:
        return (self.const % fld.p if fld else self.const) == 0

    def homogeneous_part(self) -> "AffineForm":
        return AffineForm(0, self.lin)

    def reduce(self, fld: FieldSpec) -> "AffineForm":
        return AffineForm(self.const % fld.p, tuple((v, c % fld.p) for v, c in self.lin))

    def vector(self, names: Sequence[str], with_const: bool = True) -> list[int]:
        d = dict(self.lin)
        vec = [d.get(v, 0) for v in names]
        return [self.const] + vec if with_const else vec

    def to_poly(self, fld: FieldSpec) -> Polynomial:
        terms = [({v: 1}, c) for v, c in self.lin]
        terms.append(({}, self.const))
        return Polynomial.from_terms(fld, terms, self.support())

    def __str__(self):
        parts = [f"{c}*{v}" if c != 1 else v for v, c in self.lin]
        if self.const or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {"c": self.const, "lin": {v: c for v, c in self.lin}}

    @classmethod
    def from_json(cls, obj) -> "AffineForm":
        if not isinstance(obj, dict):
            raise StructureError(f"affine form must be an object, got {obj!r}")
        lin = obj.get("lin", {})
        if not isinstance(lin, dict):
            raise StructureError("affine form 'lin' must be an object")
        return cls.make({str(k): int(v) for k, v in lin.items()}, int(obj.get("c", 0)))


Gate = tuple  # tuple[AffineForm, ...]


@dataclass(frozen=True)
class SigmaPiSigma:
    gates: tuple[Gate, ...]

    def __post_init__(self):
        gates = tuple(tuple(g) for g in self.gates)
        if not gates:
            raise StructureError("a depth-3 circuit needs at least one product gate")
        for i, g in enumerate(gates):
            if not g:
                raise StructureError(f"product gate #{i} is empty")
        object.__setattr__(self, "gates", gates)

    @property
    def k(self) -> int:
        return len(self.gates)

    def forms(self) -> list[AffineForm]:
        return [f for g in self.gates for f in g]

    def variables(self) -> list[str]:
        return sort_vars({v for f in self.forms() for v in f.support()})

    def rename(self, mapping: Mapping[str, str]) -> "SigmaPiSigma":
        return SigmaPiSigma(tuple(
            tuple(AffineForm.make({mapping.get(v, v): c for v, c in f.lin}, f.const) for f in g)
            for g in self.gates))


def expand_gate(gate: Iterable[AffineForm], fld: FieldSpec, budget: int = DEFAULT_BUDGET,
                label: str = "product gate") -> Polynomial:
    out = Polynomial.constant(fld, 1)
    for j, form in enumerate(gate):
        out = poly_mul(out, form.to_poly(fld), budget, label=f"{label}, factor {j}")
    return out


def expand_sps(c: SigmaPiSigma, fld: FieldSpec, budget: int = DEFAULT_BUDGET) -> Polynomial:
    out = Polynomial.zero(fld)
    for i, g in enumerate(c.gates):
        out = out + expand_gate(g, fld, budget, label=f"product gate #{i}")
    return out


def affine_rank(forms: Sequence[AffineForm], fld: FieldSpec, with_const: bool = True) -> int:
    names = sort_vars({v for f in forms for v in f.support()})
    return rank_mod_p([f.vector(names, with_const) for f in forms], fld.p)


@dataclass(frozen=True)
class SPSProperties:
    is_homogeneous: bool
    k: int
    gate_degrees: tuple[int, ...]
    product_dimension: int
    total_dimension: int

    def to_dict(self) -> dict:
        return {"is_homogeneous": self.is_homogeneous, "k": self.k,
                "gate_degrees": list(self.gate_degrees),
                "product_dimension": self.product_dimension,
                "total_dimension": self.total_dimension}


def sps_properties(c: SigmaPiSigma, fld: FieldSpec) -> SPSProperties:
    """Dimensions are ranks over ``fld`` of forms viewed as (const, coefficients) vectors."""
    return SPSProperties(
        is_homogeneous=all(f.is_homogeneous(fld) for f in c.forms()),
        k=c.k,
        gate_degrees=tuple(len(g) for g in c.gates),
        product_dimension=max(affine_rank(g, fld) for g in c.gates),
        total_dimension=affine_rank(c.forms(), fld),
    )
