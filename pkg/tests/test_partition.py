import itertools
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from polycoeff.algebra import GF, analyze, parse_poly
from polycoeff.errors import PolycoeffError
from polycoeff.generators import gen_imm
from polycoeff.partition import (Partition, apply_partition, halves_partition, imm_partition,
                                 random_partition)

from strategies import polys

F2 = GF(2)
XS = ("x1", "x2", "x3", "x4", "x5", "x6")


def test_apply_simple():
    f = parse_poly("x1*x2", F2)
    part = Partition(("x1",), ("x2",))
    assert apply_partition(f, part) == parse_poly("y1*z1", F2)


def test_round_trip():
    f = parse_poly("x1*x2^2 + x3 + 1", GF(5))
    part = Partition(("x3", "x1"), ("x2",))
    g = apply_partition(f, part)
    assert g == parse_poly("y2*z1^2 + y1 + 1", GF(5))
    assert apply_partition(g, part, inverse=True) == f


def test_imm_two_by_two_sides():
    inst = gen_imm(2, 2)
    g = inst.f_yz()
    part = inst.partition
    odd = {v for v in part.y}
    assert all(v.startswith("x1_") for v in odd)
    assert all(v.startswith("x2_") for v in part.z)
    assert all(len([v for v, _ in m if v.startswith("y")]) == 1 for m in g.terms)


@pytest.mark.parametrize("n,d,ny,nz", [(2, 2, 4, 4), (2, 3, 8, 4), (3, 4, 18, 18), (1, 5, 3, 2)])
def test_imm_partition_sizes(n, d, ny, nz):
    part = imm_partition(n, d)
    assert (len(part.y), len(part.z)) == (ny, nz)


def test_imm_partition_slot_order():
    part = imm_partition(2, 3)
    assert part.y[:4] == ("x1_1_1", "x1_1_2", "x1_2_1", "x1_2_2")
    assert part.y[4] == "x3_1_1"
    assert part.mapping()["x2_2_2"] == "z4"


def test_two_variables_any_seed():
    seen = set()
    for seed in range(20):
        p = random_partition(["x1", "x2"], seed=seed)
        seen.add((p.y, p.z))
    assert seen <= {(("x1",), ("x2",)), (("x2",), ("x1",))}


def test_same_seed_same_partition():
    assert random_partition(XS, seed=42) == random_partition(XS, seed=42)


def test_odd_universe_rejected():
    with pytest.raises((PolycoeffError, ValueError)):
        random_partition(["x1", "x2", "x3"], seed=0)


def test_frequencies_uniform_over_six_balanced_splits():
    names = ["x1", "x2", "x3", "x4"]
    samples = 10_000
    counts = Counter(frozenset(random_partition(names, seed=s).y) for s in range(samples))
    expected = {frozenset(c) for c in itertools.combinations(names, 2)}
    assert set(counts) == expected
    for y in expected:
        assert abs(counts[y] / samples - 1 / 6) <= 0.02
    # chi-square with 5 degrees of freedom; 20.52 is the 0.999 quantile
    chi2 = sum((counts[y] - samples / 6) ** 2 / (samples / 6) for y in expected)
    assert chi2 < 20.52


def test_partition_must_be_bijective():
    with pytest.raises((PolycoeffError, ValueError)):
        Partition(("x1", "x2"), ("x2",))


def test_json_round_trip():
    part = Partition(("x3", "x1"), ("x2", "x4"))
    obj = part.to_json()
    assert obj == {"Y": ["x3", "x1"], "Z": ["x2", "x4"]}
    assert Partition.from_json(obj) == part


def test_halves():
    part = halves_partition(["x4", "x1", "x3", "x2"])
    assert part.y == ("x4", "x1") and part.z == ("x3", "x2")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 4))
def test_random_partition_balanced_and_bijective(seed, m):
    names = [f"x{i}" for i in range(1, 2 * m + 1)]
    part = random_partition(names, seed=seed)
    assert len(part.y) == len(part.z) == m
    assert sorted(part.y + part.z) == sorted(names)
    assert sorted(part.mapping().values()) == sorted(part.y_names + part.z_names)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_apply_partition_preserves_stats(data):
    fld = data.draw(st.sampled_from([GF(2), GF(3)]))
    f = data.draw(polys(fld, names=XS))
    part = random_partition(XS, seed=data.draw(st.integers(0, 1000)))
    assert analyze(apply_partition(f, part)) == analyze(f)
