"""Bijective partitions of a variable set X into two named sides Y and Z.

A partition lists the X-variables that go to each side, in slot order.  The
variable in Y-slot ``i`` (1-based) is renamed ``y{i}``; Z-slot ``j`` becomes
``z{j}``.  JSON form: ``{"Y": [xname, ...], "Z": [xname, ...]}``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from .algebra import Polynomial, check_var_name, sort_vars
from .errors import ParseError, StructureError, UnknownVariable


def yz_side(name: str) -> str:
    """Side of an already-partitioned variable, judged by its ``y``/``z`` prefix."""
    if name[:1] == "y":
        return "Y"
    if name[:1] == "z":
        return "Z"
    raise UnknownVariable(f"variable {name!r} is in neither Y nor Z")


def split_yz(names: Iterable[str]) -> tuple[list[str], list[str]]:
    ys, zs = [], []
    for v in sort_vars(names):
        (ys if yz_side(v) == "Y" else zs).append(v)
    return ys, zs


@dataclass(frozen=True)
class Partition:
    y: tuple[str, ...]
    z: tuple[str, ...]

    def __post_init__(self):
        both = list(self.y) + list(self.z)
        for v in both:
            check_var_name(v)
        if len(set(both)) != len(both):
            dup = sorted({v for v in both if both.count(v) > 1})
            raise StructureError(f"partition assigns {dup} more than once")

    @property
    def domain(self) -> frozenset:
        return frozenset(self.y) | frozenset(self.z)

    @property
    def y_names(self) -> list[str]:
        return [f"y{i}" for i in range(1, len(self.y) + 1)]

    @property
    def z_names(self) -> list[str]:
        return [f"z{j}" for j in range(1, len(self.z) + 1)]

    def mapping(self) -> dict[str, str]:
        out = {x: f"y{i}" for i, x in enumerate(self.y, 1)}
        out.update({x: f"z{j}" for j, x in enumerate(self.z, 1)})
        return out

    def inverse_mapping(self) -> dict[str, str]:
        return {t: x for x, t in self.mapping().items()}

    def image(self, x: str) -> str:
        try:
            return self.mapping()[x]
        except KeyError:
            raise UnknownVariable(f"variable {x!r} is outside the partition's domain") from None

    def to_json(self) -> dict:
        return {"Y": list(self.y), "Z": list(self.z)}

    @classmethod
    def from_json(cls, obj) -> "Partition":
        if not isinstance(obj, dict) or "Y" not in obj or "Z" not in obj:
            raise ParseError('partition JSON must be an object with "Y" and "Z" arrays')
        return cls(tuple(obj["Y"]), tuple(obj["Z"]))


def apply_partition(f: Polynomial, part: Partition, inverse: bool = False) -> Polynomial:
    """Rename X-variables to their Y/Z images (or back, with ``inverse``)."""
    mapping = part.inverse_mapping() if inverse else part.mapping()
    missing = sort_vars(v for v in f.universe if v not in mapping)
    if missing:
        raise UnknownVariable(f"variable {missing[0]!r} is outside the partition's domain")
    return f.rename(mapping)


def random_partition(names: Iterable[str], seed=None, rng: random.Random | None = None) -> Partition:
    """Uniform balanced partition via a seeded shuffle and a half/half split."""
    xs = sort_vars(set(names))
    if len(xs) % 2:
        raise StructureError(f"random partition needs an even number of variables, got {len(xs)}")
    rng = rng if rng is not None else random.Random(seed)
    rng.shuffle(xs)
    m = len(xs) // 2
    return Partition(tuple(xs[:m]), tuple(xs[m:]))


def imm_var(i: int, j: int, k: int) -> str:
    """Name of entry (j, k) of matrix i in the iterated product."""
    return f"x{i}_{j}_{k}"


def imm_partition(n: int, d: int) -> Partition:
    """Odd-numbered matrices to Y, even-numbered to Z, slots ordered by (i, j, k)."""
    if n < 1 or d < 1:
        raise ValueError("need n >= 1 and d >= 1")
    ys, zs = [], []
    for i in range(1, d + 1):
        side = ys if i % 2 else zs
        side.extend(imm_var(i, j, k) for j in range(1, n + 1) for k in range(1, n + 1))
    return Partition(tuple(ys), tuple(zs))


def halves_partition(order: Sequence[str]) -> Partition:
    """First half of ``order`` to Y, second half to Z (used for pi-ordered ABPs)."""
    if len(order) % 2:
        raise StructureError("need an even number of variables")
    m = len(order) // 2
    return Partition(tuple(order[:m]), tuple(order[m:]))
