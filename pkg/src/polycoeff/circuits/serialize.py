"""Circuit JSON: ``{"kind": "formula" | "sps" | "abp", ...}``.

formula  ``{"kind": "formula", "root": node}`` with nodes ``{"op": "+"|"*", "l": .., "r": ..}``,
         ``{"var": "y1"}``, ``{"const": 3}``, ``{"upoly": {"var": "y1", "coeffs": [0, 1, 2]}}``
sps      ``{"kind": "sps", "gates": [[form, ...], ...]}``, form ``{"c": 0, "lin": {"y1": 1}}``
abp      ``{"kind": "abp", "levels": [[id, ...], ...], "edges": [{"from": id, "to": id, "w": ..}]}``
         where ``w`` is an integer, a variable name, or an affine form object
"""

from __future__ import annotations

import json

from ..errors import ParseError
from .abp import ABP, Edge
from .formula import ConstLeaf, Plus, Times, UPolyLeaf, VarLeaf, flatten
from .sps import AffineForm, SigmaPiSigma


def formula_to_json(f) -> dict:
    flat = flatten(f)
    built: list = []
    for node, ch in zip(flat.nodes, flat.children):
        if isinstance(node, VarLeaf):
            built.append({"var": node.name})
        elif isinstance(node, ConstLeaf):
            built.append({"const": node.value})
        elif isinstance(node, UPolyLeaf):
            built.append({"upoly": {"var": node.var, "coeffs": list(node.coeffs)}})
        else:
            built.append({"op": "+" if isinstance(node, Plus) else "*",
                          "l": built[ch[0]], "r": built[ch[1]]})
    return built[-1]


def formula_from_json(obj):
    # explicit stack: nested JSON for skew formulas can be deep
    if not isinstance(obj, dict):
        raise ParseError(f"formula node must be an object, got {obj!r}")
    out: list = []
    stack = [(obj, False)]
    while stack:
        node, done = stack.pop()
        if not isinstance(node, dict):
            raise ParseError(f"formula node must be an object, got {node!r}")
        if "var" in node:
            out.append(VarLeaf(node["var"]))
        elif "const" in node:
            out.append(ConstLeaf(int(node["const"])))
        elif "upoly" in node:
            up = node["upoly"]
            out.append(UPolyLeaf(up["var"], tuple(int(v) for v in up["coeffs"])))
        elif node.get("op") in ("+", "*"):
            if done:
                r, l = out.pop(), out.pop()
                out.append((Plus if node["op"] == "+" else Times)(l, r))
            else:
                if "l" not in node or "r" not in node:
                    raise ParseError("operator node needs both 'l' and 'r'")
                stack.append((node, True))
                stack.append((node["r"], False))
                stack.append((node["l"], False))
        else:
            raise ParseError(f"unrecognised formula node {node!r}")
    return out[0]


def weight_to_json(w: AffineForm):
    if w.const == 0 and len(w.lin) == 1 and w.lin[0][1] == 1:
        return w.lin[0][0]
    if not w.lin:
        return w.const
    return w.to_json()


def weight_from_json(obj) -> AffineForm:
    if isinstance(obj, bool):
        raise ParseError(f"bad edge weight {obj!r}")
    if isinstance(obj, int):
        return AffineForm(obj)
    if isinstance(obj, str):
        return AffineForm.variable(obj)
    return AffineForm.from_json(obj)


def circuit_to_json(c) -> dict:
    if isinstance(c, SigmaPiSigma):
        return {"kind": "sps", "gates": [[f.to_json() for f in g] for g in c.gates]}
    if isinstance(c, ABP):
        return {"kind": "abp", "levels": [list(l) for l in c.levels],
                "edges": [{"from": e.src, "to": e.dst, "w": weight_to_json(e.weight)}
                          for e in c.edges]}
    return {"kind": "formula", "root": formula_to_json(c)}


def circuit_from_json(obj):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParseError('circuit JSON must be an object with a "kind" field')
    kind = obj["kind"]
    try:
        if kind == "formula":
            return formula_from_json(obj["root"])
        if kind == "sps":
            return SigmaPiSigma(tuple(tuple(AffineForm.from_json(f) for f in g)
                                      for g in obj["gates"]))
        if kind == "abp":
            levels = tuple(tuple(l) for l in obj["levels"])
            edges = tuple(Edge(e["from"], e["to"], weight_from_json(e["w"])) for e in obj["edges"])
            return ABP(levels, edges)
    except KeyError as exc:
        raise ParseError(f"{kind} circuit JSON is missing field {exc.args[0]!r}") from None
    raise ParseError(f"unknown circuit kind {kind!r}")


def load_circuit(path: str):
    with open(path) as fh:
        return circuit_from_json(json.load(fh))
