"""Arithmetic formulas (fan-out one, fan-in two) and their structural analyses.

Nodes are addressed by their position in post-order, so per-node results
(profiles, gate labels, weak-node sets) are plain lists/dicts keyed by
index and line up across formulas of the same shape.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, Union

from ..algebra import DEFAULT_BUDGET, FieldSpec, Polynomial, check_var_name, poly_mul
from ..errors import StructureError
from ..partition import Partition, yz_side


@dataclass(frozen=True)
class VarLeaf:
    name: str

    def __post_init__(self):
        check_var_name(self.name)


@dataclass(frozen=True)
class ConstLeaf:
    value: int


@dataclass(frozen=True)
class UPolyLeaf:
    """Leaf labelled by a univariate polynomial ``sum coeffs[i] * var^i``."""

    var: str
    coeffs: tuple[int, ...]

    def __post_init__(self):
        check_var_name(self.var)
        object.__setattr__(self, "coeffs", tuple(self.coeffs))

    def is_constant(self, fld: FieldSpec) -> bool:
        return all(c % fld.p == 0 for c in self.coeffs[1:])


@dataclass(frozen=True)
class Plus:
    l: "Formula"
    r: "Formula"


@dataclass(frozen=True)
class Times:
    l: "Formula"
    r: "Formula"


Formula = Union[VarLeaf, ConstLeaf, UPolyLeaf, Plus, Times]
LEAVES = (VarLeaf, ConstLeaf, UPolyLeaf)


def add(l: Formula, r: Formula) -> Plus:
    return Plus(l, r)


def mul(l: Formula, r: Formula) -> Times:
    return Times(l, r)


def x(name: str) -> VarLeaf:
    return VarLeaf(name)


def c(value: int) -> ConstLeaf:
    return ConstLeaf(value)


@dataclass(frozen=True)
class Flat:
    """Post-order view of a formula: ``children[i]`` are indices into ``nodes``."""

    nodes: tuple
    children: tuple[tuple[int, ...], ...]

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    def __len__(self):
        return len(self.nodes)


def flatten(f: Formula) -> Flat:
    nodes, children = [], []
    stack = [(f, False)]
    pending: list[int] = []
    # iterative post-order so deep skew formulas do not hit the recursion limit
    while stack:
        node, done = stack.pop()
        if isinstance(node, LEAVES):
            nodes.append(node)
            children.append(())
            pending.append(len(nodes) - 1)
        elif done:
            r = pending.pop()
            l = pending.pop()
            nodes.append(node)
            children.append((l, r))
            pending.append(len(nodes) - 1)
        elif isinstance(node, (Plus, Times)):
            stack.append((node, True))
            stack.append((node.r, False))
            stack.append((node.l, False))
        else:
            raise StructureError(f"not a formula node: {node!r}")
    return Flat(tuple(nodes), tuple(children))


def leaf_vars(node) -> frozenset:
    if isinstance(node, VarLeaf):
        return frozenset({node.name})
    if isinstance(node, UPolyLeaf):
        return frozenset({node.var})
    return frozenset()


def node_variables(flat: Flat) -> list[frozenset]:
    """X_v for every node."""
    out: list[frozenset] = []
    for node, ch in zip(flat.nodes, flat.children):
        out.append(leaf_vars(node) if not ch else out[ch[0]] | out[ch[1]])
    return out


def subtree_sizes(flat: Flat) -> list[int]:
    out: list[int] = []
    for ch in flat.children:
        out.append(1 + sum(out[i] for i in ch))
    return out


def variables(f: Formula) -> frozenset:
    flat = flatten(f)
    return node_variables(flat)[flat.root]


def size(f: Formula) -> int:
    return len(flatten(f))


def height(f: Formula) -> int:
    flat = flatten(f)
    h: list[int] = []
    for ch in flat.children:
        h.append(0 if not ch else 1 + max(h[i] for i in ch))
    return h[flat.root]


def _leaf_poly(node, fld: FieldSpec) -> Polynomial:
    if isinstance(node, VarLeaf):
        return Polynomial.var(fld, node.name)
    if isinstance(node, ConstLeaf):
        return Polynomial.constant(fld, node.value)
    return Polynomial.from_terms(fld, [({node.var: i}, c) for i, c in enumerate(node.coeffs)],
                                 {node.var})


def expand_nodes(f: Formula, fld: FieldSpec, budget: int = DEFAULT_BUDGET) -> list[Polynomial]:
    """Polynomial computed at every node, in post-order."""
    flat = flatten(f)
    out: list[Polynomial] = []
    for i, (node, ch) in enumerate(zip(flat.nodes, flat.children)):
        if not ch:
            out.append(_leaf_poly(node, fld))
        elif isinstance(node, Plus):
            out.append(out[ch[0]] + out[ch[1]])
        else:
            out.append(poly_mul(out[ch[0]], out[ch[1]], budget, label=f"product gate #{i}"))
    return out


def expand(f: Formula, fld: FieldSpec, budget: int = DEFAULT_BUDGET) -> Polynomial:
    return expand_nodes(f, fld, budget)[-1]


def rebuild(flat: Flat, leaf_fn: Callable[[int, object], Formula]) -> Formula:
    """Same shape as ``flat`` with every leaf replaced by ``leaf_fn(index, leaf)``."""
    built: list = []
    for i, (node, ch) in enumerate(zip(flat.nodes, flat.children)):
        if not ch:
            built.append(leaf_fn(i, node))
        else:
            built.append(type(node)(built[ch[0]], built[ch[1]]))
    return built[-1]


def rename(f: Formula, mapping: Mapping[str, str]) -> Formula:
    def leaf(_, node):
        if isinstance(node, VarLeaf):
            return VarLeaf(mapping.get(node.name, node.name))
        if isinstance(node, UPolyLeaf):
            return UPolyLeaf(mapping.get(node.var, node.var), node.coeffs)
        return node
    return rebuild(flatten(f), leaf)


def apply_partition(f: Formula, part: Partition) -> Formula:
    missing = sorted(variables(f) - part.domain)
    if missing:
        raise StructureError(f"formula variable {missing[0]!r} is outside the partition's domain")
    return rename(f, part.mapping())


# -- product-sparse structure --------------------------------------------

@dataclass(frozen=True)
class NodeProfile:
    ys: frozenset
    zs: frozenset
    a2: int  # 2 * min(|Y_v|, |Z_v|)
    b2: int  # |Y_v| + |Z_v|, i.e. 2 * b(v)
    depth: int  # product-sparse depth
    size: int

    @property
    def a(self) -> int:
        return self.a2 // 2

    @property
    def b(self) -> float:
        return self.b2 / 2


def product_sparse_depths(flat: Flat, xs: Sequence[frozenset] | None = None) -> list[int]:
    """Max number of non-disjoint product gates on any leaf-to-node path."""
    xs = xs if xs is not None else node_variables(flat)
    d: list[int] = []
    for i, (node, ch) in enumerate(zip(flat.nodes, flat.children)):
        if not ch:
            d.append(0)
            continue
        base = max(d[ch[0]], d[ch[1]])
        overlap = isinstance(node, Times) and bool(xs[ch[0]] & xs[ch[1]])
        d.append(base + 1 if overlap else base)
    return d


def node_profiles(f: Formula, side: Callable[[str], str] = yz_side) -> list[NodeProfile]:
    """Bottom-up Y_v, Z_v, a(v), b(v), product-sparse depth and subtree size."""
    flat = flatten(f)
    xs = node_variables(flat)
    depths = product_sparse_depths(flat, xs)
    sizes = subtree_sizes(flat)
    out = []
    for i, xv in enumerate(xs):
        ys = frozenset(v for v in xv if side(v) == "Y")
        zs = xv - ys
        out.append(NodeProfile(ys, zs, 2 * min(len(ys), len(zs)), len(ys) + len(zs),
                               depths[i], sizes[i]))
    return out


def classify_product_gates(f: Formula, s: int, fld: FieldSpec,
                           budget: int = DEFAULT_BUDGET) -> dict[int, str]:
    """Label every product gate ``disjoint``, ``sparse`` or ``neither``.

    Disjointness is syntactic on X_v; sparseness counts monomials of the
    expanded child polynomials (at most ``2**s`` for at least one child).
    """
    flat = flatten(f)
    xs = node_variables(flat)
    polys = None
    labels = {}
    for i, (node, ch) in enumerate(zip(flat.nodes, flat.children)):
        if not isinstance(node, Times):
            continue
        if not xs[ch[0]] & xs[ch[1]]:
            labels[i] = "disjoint"
            continue
        if polys is None:
            polys = expand_nodes(f, fld, budget)
        small = min(len(polys[ch[0]]), len(polys[ch[1]]))
        labels[i] = "sparse" if small <= 2**s else "neither"
    return labels


def is_product_sparse(f: Formula, s: int, fld: FieldSpec,
                      budget: int = DEFAULT_BUDGET) -> tuple[bool, int | None]:
    labels = classify_product_gates(f, s, fld, budget)
    if any(v == "neither" for v in labels.values()):
        return False, None
    flat = flatten(f)
    return True, product_sparse_depths(flat)[flat.root]


def is_syntactic_multilinear(f: Formula) -> bool:
    flat = flatten(f)
    xs = node_variables(flat)
    return all(not (xs[ch[0]] & xs[ch[1]])
               for node, ch in zip(flat.nodes, flat.children) if isinstance(node, Times))


def is_skew(f: Formula) -> bool:
    flat = flatten(f)
    return all(any(isinstance(flat.nodes[j], LEAVES) for j in ch)
               for node, ch in zip(flat.nodes, flat.children) if isinstance(node, Times))


# -- k-weakness -------------------------------------------------------------

@dataclass(frozen=True)
class KWeakResult:
    k: int
    weak: frozenset
    # for every node that is not k-weak: a central leaf-to-node path (post-order
    # indices, leaf first) that contains no k-unbalanced node
    witnesses: Mapping[int, tuple[int, ...]]


def is_unbalanced(prof: NodeProfile, k: int) -> bool:
    # b - a >= k, in doubled units
    return prof.b2 - prof.a2 >= 2 * k


def k_weak_nodes(f: Formula, k: int, profiles: Sequence[NodeProfile] | None = None) -> KWeakResult:
    """Nodes every central path into which meets a k-unbalanced node.

    One pass: a node is *reachable* (not weak) when it is balanced and either
    is a leaf or has a reachable child ``u1`` with ``b(v) <= 2 b(u1)``.
    """
    flat = flatten(f)
    prof = profiles if profiles is not None else node_profiles(f)
    via: dict[int, int | None] = {}
    for i, ch in enumerate(flat.children):
        if is_unbalanced(prof[i], k):
            continue
        if not ch:
            via[i] = None
            continue
        for j in ch:
            if j in via and prof[i].b2 <= 2 * prof[j].b2:
                via[i] = j
                break
    witnesses = {}
    for i in via:
        path = [i]
        while via[path[-1]] is not None:
            path.append(via[path[-1]])
        witnesses[i] = tuple(reversed(path))
    weak = frozenset(range(len(flat))) - frozenset(via)
    return KWeakResult(k, weak, witnesses)


def check_central_path(f: Formula, path: Sequence[int], k: int,
                       profiles: Sequence[NodeProfile] | None = None) -> bool:
    """True iff ``path`` is a central leaf-to-node path with no k-unbalanced node."""
    flat = flatten(f)
    prof = profiles if profiles is not None else node_profiles(f)
    if not path or flat.children[path[0]]:
        return False
    for u1, u in zip(path, path[1:]):
        if u1 not in flat.children[u] or prof[u].b2 > 2 * prof[u1].b2:
            return False
    return not any(is_unbalanced(prof[i], k) for i in path)


# -- preprocessing ------------------------------------------------------------

def preprocess(f: Formula, replacements: Mapping[int, object] | Sequence[object],
               fld: FieldSpec) -> Formula:
    """Replace variable-leaf occurrences by non-constant univariate polynomials.

    ``replacements`` is either a sequence with one entry per variable leaf in
    left-to-right order, or a mapping from post-order leaf index to entry.
    An entry is a coefficient list ``[c0, c1, ...]`` or a univariate
    :class:`Polynomial` in the leaf's variable.  Missing mapping entries leave
    the leaf unchanged.
    """
    flat = flatten(f)
    var_leaves = [i for i, n in enumerate(flat.nodes) if isinstance(n, VarLeaf)]
    if isinstance(replacements, Mapping):
        table = dict(replacements)
    else:
        if len(replacements) != len(var_leaves):
            raise StructureError(f"expected {len(var_leaves)} replacements, got {len(replacements)}")
        table = dict(zip(var_leaves, replacements))

    def leaf(i, node):
        if i not in table:
            return node
        if not isinstance(node, VarLeaf):
            raise StructureError(f"node #{i} is not a variable leaf")
        rep = table[i]
        if isinstance(rep, Polynomial):
            other = rep.variables() - {node.name}
            if other:
                raise StructureError(f"replacement for leaf #{i} ({node.name}) mentions {sorted(other)}")
            deg = 0 if not rep else int(rep.degree)
            coeffs = [0] * (deg + 1)
            for m, cf in rep.terms.items():
                coeffs[m[0][1] if m else 0] = cf
        else:
            coeffs = [int(v) for v in rep]
        out = UPolyLeaf(node.name, tuple(coeffs))
        if out.is_constant(fld):
            raise StructureError(f"replacement for leaf #{i} ({node.name}) is constant")
        return out

    return rebuild(flat, leaf)
