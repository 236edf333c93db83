"""Prime fields and sparse multivariate polynomials over them.

A polynomial is a map from monomials to nonzero residues mod p.  Monomials
are tuples of ``(variable_name, exponent)`` pairs sorted by name, so they are
hashable and canonical:

    y1^2*z1 + 3  ->  {(("y1", 2), ("z1", 1)): 1, (): 3}

Printing uses graded-lexicographic order with variables compared by their
natural index (``y2 < y10``).  Zero coefficients are never stored; the zero
polynomial has no terms.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .errors import BudgetExceeded, FieldMismatch, ParseError, UnknownVariable

DEFAULT_BUDGET = 10**6
NEG_INF = float("-inf")

Monomial = tuple  # tuple[tuple[str, int], ...]

VAR_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """The prime field GF(p)."""

    p: int

    def __post_init__(self):
        if not isinstance(self.p, int) or not 2 <= self.p < 2**31:
            raise ValueError(f"field modulus must be an integer in [2, 2^31), got {self.p!r}")
        if not _is_prime(self.p):
            raise ValueError(f"field modulus {self.p} is not prime")

    def __repr__(self):
        return f"GF({self.p})"

    def reduce(self, a: int) -> int:
        return a % self.p

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse in {self!r}")
        return pow(a, -1, self.p)

    def signed(self, a: int) -> int:
        """Symmetric representative of ``a`` in (-p/2, p/2]."""
        a %= self.p
        return a - self.p if a > self.p // 2 else a


GF = FieldSpec


def check_var_name(name: str) -> str:
    if not isinstance(name, str) or not VAR_RE.match(name):
        raise ParseError(f"invalid variable name {name!r}")
    return name


@lru_cache(maxsize=None)
def natural_key(name: str) -> tuple:
    """Sort key that orders ``x2`` before ``x10``."""
    parts = re.split(r"(\d+)", name)
    return tuple(int(s) if i % 2 else s for i, s in enumerate(parts))


def sort_vars(names: Iterable[str]) -> list[str]:
    return sorted(names, key=natural_key)


def mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        d[v] = d.get(v, 0) + e
    return tuple(sorted(d.items()))


def make_monomial(exponents: Mapping[str, int]) -> Monomial:
    for v, e in exponents.items():
        check_var_name(v)
        if not isinstance(e, int) or e < 0:
            raise ValueError(f"bad exponent {e!r} for {v}")
    return tuple(sorted((v, e) for v, e in exponents.items() if e))


def _grlex_key(m: Monomial) -> tuple:
    # ascending sort on this key gives graded-lex descending order
    ordered = sorted(m, key=lambda ve: natural_key(ve[0]))
    lex = tuple((0, natural_key(v), -e) for v, e in ordered) + ((1,),)
    return (-mono_degree(m), lex)


def format_monomial(m: Monomial) -> str:
    ordered = sorted(m, key=lambda ve: natural_key(ve[0]))
    return "*".join(v if e == 1 else f"{v}^{e}" for v, e in ordered)


class Polynomial:
    """Sparse polynomial over GF(p).

    ``universe`` is the declared variable set; it always contains every
    variable that occurs in a term.  Equality ignores the universe.
    Instances are treated as immutable.
    """

    __slots__ = ("field", "terms", "universe")

    def __init__(self, field: FieldSpec, terms: Mapping[Monomial, int] | None = None,
                 universe: Iterable[str] | None = None):
        p = field.p
        clean = {}
        for m, c in (terms or {}).items():
            c %= p
            if c:
                clean[m] = c
        occurring = {v for m in clean for v, _ in m}
        uni = frozenset(universe) if universe is not None else frozenset()
        self.field = field
        self.terms = clean
        self.universe = uni | occurring

    # -- constructors -------------------------------------------------
    @classmethod
    def zero(cls, field: FieldSpec, universe=None) -> "Polynomial":
        return cls(field, {}, universe)

    @classmethod
    def constant(cls, field: FieldSpec, c: int, universe=None) -> "Polynomial":
        return cls(field, {(): c}, universe)

    @classmethod
    def var(cls, field: FieldSpec, name: str, coeff: int = 1) -> "Polynomial":
        return cls(field, {((check_var_name(name), 1),): coeff}, {name})

    @classmethod
    def from_terms(cls, field: FieldSpec, pairs: Iterable[tuple[Mapping[str, int], int]],
                   universe=None) -> "Polynomial":
        acc: dict = {}
        for exps, c in pairs:
            m = make_monomial(exps)
            acc[m] = acc.get(m, 0) + c
        return cls(field, acc, universe)

    @classmethod
    def parse(cls, text: str, field: FieldSpec, universe=None) -> "Polynomial":
        return parse_poly(text, field, universe)

    # -- basic properties --------------------------------------------
    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def variables(self) -> frozenset:
        return frozenset(v for m in self.terms for v, _ in m)

    @property
    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(mono_degree(m) for m in self.terms)

    def is_multilinear(self) -> bool:
        return all(e <= 1 for m in self.terms for _, e in m)

    def is_homogeneous(self) -> bool:
        return len({mono_degree(m) for m in self.terms}) <= 1

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def constant_value(self) -> int:
        return self.terms.get((), 0)

    def sorted_terms(self) -> list[tuple[Monomial, int]]:
        return sorted(self.terms.items(), key=lambda mc: _grlex_key(mc[0]))

    # -- arithmetic --------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.field != self.field:
                raise FieldMismatch(f"cannot combine {self.field!r} with {other.field!r}")
            return other
        if isinstance(other, int):
            return Polynomial.constant(self.field, other)
        return NotImplemented

    def __add__(self, other):
        g = self._coerce(other)
        if g is NotImplemented:
            return g
        return poly_add(self, g)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.field, {m: -c for m, c in self.terms.items()}, self.universe)

    def __sub__(self, other):
        g = self._coerce(other)
        if g is NotImplemented:
            return g
        return poly_add(self, -g)

    def __rsub__(self, other):
        g = self._coerce(other)
        if g is NotImplemented:
            return g
        return poly_add(g, -self)

    def __mul__(self, other):
        g = self._coerce(other)
        if g is NotImplemented:
            return g
        return poly_mul(self, g)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Polynomial.constant(self.field, 1, self.universe)
        base = self
        while k:
            if k & 1:
                out = poly_mul(out, base)
            k >>= 1
            if k:
                base = poly_mul(base, base)
        return out

    def scale(self, c: int) -> "Polynomial":
        return Polynomial(self.field, {m: v * c for m, v in self.terms.items()}, self.universe)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Polynomial.constant(self.field, other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.field == other.field and self.terms == other.terms

    def __hash__(self):
        return hash((self.field.p, frozenset(self.terms.items())))

    # -- transformations ---------------------------------------------
    def substitute(self, assignment: Mapping[str, int]) -> "Polynomial":
        return substitute(self, assignment)

    def homogeneous_slice(self, d: int) -> "Polynomial":
        return homogeneous_slice(self, d)

    def rename(self, mapping: Mapping[str, str]) -> "Polynomial":
        """Rename variables; names missing from ``mapping`` are kept.

        The mapping must be injective on the variables that occur.
        """
        terms = {}
        for m, c in self.terms.items():
            nm = tuple(sorted((mapping.get(v, v), e) for v, e in m))
            terms[nm] = c
        uni = {mapping.get(v, v) for v in self.universe}
        return Polynomial(self.field, terms, uni)

    def evaluate(self, point: Mapping[str, int]) -> int:
        p = self.field.p
        total = 0
        for m, c in self.terms.items():
            t = c
            for v, e in m:
                t = t * pow(point[v], e, p) % p
            total += t
        return total % p

    def with_universe(self, universe: Iterable[str]) -> "Polynomial":
        return Polynomial(self.field, self.terms, universe)

    # -- printing ----------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Polynomial({self.field!r}, {format_poly(self)!r})"


def _check_fields(f: Polynomial, g: Polynomial):
    if f.field != g.field:
        raise FieldMismatch(f"cannot combine {f.field!r} with {g.field!r}")


def poly_add(f: Polynomial, g: Polynomial) -> Polynomial:
    _check_fields(f, g)
    p = f.field.p
    out = dict(f.terms)
    for m, c in g.terms.items():
        v = (out.get(m, 0) + c) % p
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return Polynomial(f.field, out, f.universe | g.universe)


def poly_mul(f: Polynomial, g: Polynomial, budget: int = DEFAULT_BUDGET,
             label: str | None = None) -> Polynomial:
    """Product of two polynomials; raises BudgetExceeded past ``budget`` terms."""
    _check_fields(f, g)
    p = f.field.p
    out: dict = {}
    for ma, ca in f.terms.items():
        for mb, cb in g.terms.items():
            m = mono_mul(ma, mb)
            out[m] = (out.get(m, 0) + ca * cb) % p
        if len(out) > budget:
            where = f" at {label}" if label else ""
            raise BudgetExceeded(f"product{where} exceeds term budget {budget}")
    return Polynomial(f.field, out, f.universe | g.universe)


def substitute(f: Polynomial, assignment: Mapping[str, int]) -> Polynomial:
    """Replace the assigned variables by field constants."""
    for v in assignment:
        if v not in f.universe:
            raise UnknownVariable(f"variable {v!r} is not in the polynomial's universe")
    if not assignment:
        return f
    p = f.field.p
    out: dict = {}
    for m, c in f.terms.items():
        rest = []
        for v, e in m:
            if v in assignment:
                c = c * pow(assignment[v], e, p) % p
            else:
                rest.append((v, e))
        if c:
            key = tuple(rest)
            out[key] = (out.get(key, 0) + c) % p
    return Polynomial(f.field, out, f.universe - set(assignment))


def homogeneous_slice(f: Polynomial, d: int) -> Polynomial:
    if d < 0:
        raise ValueError("degree must be non-negative")
    return Polynomial(f.field, {m: c for m, c in f.terms.items() if mono_degree(m) == d},
                      f.universe)


@dataclass(frozen=True)
class PolyStats:
    degree: float | int  # NEG_INF for the zero polynomial
    num_monomials: int
    is_multilinear: bool
    is_homogeneous: bool

    def to_dict(self) -> dict:
        deg = "-inf" if self.degree == NEG_INF else self.degree
        return {"degree": deg, "num_monomials": self.num_monomials,
                "is_multilinear": self.is_multilinear, "is_homogeneous": self.is_homogeneous}


def analyze(f: Polynomial) -> PolyStats:
    return PolyStats(f.degree, len(f.terms), f.is_multilinear(), f.is_homogeneous())


# -- text format -------------------------------------------------------

def format_poly(f: Polynomial) -> str:
    if not f.terms:
        return "0"
    pieces = []
    for m, c in f.sorted_terms():
        s = f.field.signed(c)
        neg = s < 0
        mag = -s if neg else s
        body = format_monomial(m)
        if not body:
            text = str(mag)
        elif mag == 1:
            text = body
        else:
            text = f"{mag}*{body}"
        if not pieces:
            pieces.append(("-" if neg else "") + text)
        else:
            pieces.append(("- " if neg else "+ ") + text)
    return " ".join(pieces)


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>[A-Za-z][A-Za-z0-9_]*)|(?P<op>[-+*^]))")


def _tokenize(text: str):
    pos = 0
    toks = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos:pos + 1]!r} at offset {pos}")
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return toks


def parse_poly(text: str, field: FieldSpec, universe=None) -> Polynomial:
    """Parse ``term (('+'|'-') term)*`` with ``term := coeff? ('*'? var ('^' exp)?)*``.

    A leading sign is accepted.  Coefficients are reduced mod p.
    """
    toks = _tokenize(text)
    if not toks:
        raise ParseError("empty polynomial text")
    i = 0
    acc: dict = {}
    p = field.p
    sign = 1
    if toks[0] == ("op", "-", toks[0][2]) or toks[0][:2] == ("op", "+"):
        sign = -1 if toks[0][1] == "-" else 1
        i = 1
    while True:
        coeff = None
        exps: dict[str, int] = {}
        if i < len(toks) and toks[i][0] == "num":
            coeff = int(toks[i][1])
            i += 1
        seen_factor = coeff is not None
        while i < len(toks):
            kind, val, off = toks[i]
            if kind == "op" and val == "*":
                i += 1
                if i >= len(toks) or toks[i][0] != "var":
                    raise ParseError(f"expected variable after '*' at offset {off}")
                continue
            if kind != "var":
                break
            name = val
            i += 1
            e = 1
            if i < len(toks) and toks[i][:2] == ("op", "^"):
                i += 1
                if i >= len(toks) or toks[i][0] != "num":
                    raise ParseError(f"expected exponent after '^' at offset {toks[i - 1][2]}")
                e = int(toks[i][1])
                i += 1
            exps[name] = exps.get(name, 0) + e
            seen_factor = True
        if not seen_factor:
            off = toks[i][2] if i < len(toks) else len(text)
            raise ParseError(f"expected a term at offset {off}")
        m = make_monomial(exps)
        c = sign * (1 if coeff is None else coeff)
        acc[m] = (acc.get(m, 0) + c) % p
        if i >= len(toks):
            break
        kind, val, off = toks[i]
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            i += 1
            if i >= len(toks):
                raise ParseError("dangling operator at end of input")
            continue
        raise ParseError(f"unexpected token {val!r} at offset {off}")
    mentioned = {v for m in acc for v, _ in m}
    uni = set(universe) if universe is not None else set()
    return Polynomial(field, acc, uni | mentioned)
