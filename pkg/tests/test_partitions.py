import itertools
import math

import pytest
from hypothesis import given, strategies as st

from specmix.partitions import (
    K_MAX, InducedPartition, Partition, PartitionError, bell_number, catalan_number,
    connected_components, cyclic_canonical, enumerate_pairings, enumerate_partitions,
    is_connected, is_noncrossing, kappa, nc_closure, parse_partition, thin,
)


def bell_triangle(n):
    """Independent Bell numbers via the Aitken triangle."""
    row, out = [1], [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
        out.append(row[0])
    return out


def brute_partitions(k):
    """All set partitions of 1..k as frozensets of frozensets, by recursive insertion."""
    if k == 0:
        return [frozenset()]
    out = []
    for p in brute_partitions(k - 1):
        blocks = list(p)
        for i in range(len(blocks)):
            out.append(frozenset(blocks[:i] + [blocks[i] | {k}] + blocks[i + 1:]))
        out.append(p | {frozenset({k})})
    return out


def brute_noncrossing(blocks):
    where = {x: i for i, b in enumerate(blocks) for x in b}
    n = len(where)
    for x, y, z, t in itertools.combinations(range(1, n + 1), 4):
        if where[x] == where[z] and where[y] == where[t] and where[x] != where[y]:
            return False
    return True


rgs = st.integers(1, 8).flatmap(
    lambda k: st.lists(st.integers(0, k), min_size=k, max_size=k)).map(
    lambda raw: Partition(tuple(_to_rgs(raw))))


def _to_rgs(raw):
    seen, out = {}, []
    for v in raw:
        seen.setdefault(v, len(seen) + 1)
        out.append(seen[v])
    return out


@pytest.mark.parametrize("k,count", [(1, 1), (3, 5), (4, 15), (6, 203)])
def test_partition_counts(k, count):
    assert sum(1 for _ in enumerate_partitions(k)) == count


@pytest.mark.parametrize("k", range(1, 9))
def test_enumeration_matches_bell_triangle_and_is_lexicographic(k):
    parts = [p.labels for p in enumerate_partitions(k)]
    assert len(parts) == bell_triangle(k)[k] == bell_number(k)
    assert parts == sorted(parts) and len(set(parts)) == len(parts)


@pytest.mark.parametrize("k", range(1, 7))
def test_enumeration_matches_insertion_oracle(k):
    ours = {frozenset(frozenset(b) for b in p.blocks) for p in enumerate_partitions(k)}
    assert ours == set(brute_partitions(k))


def test_enumeration_bounds():
    with pytest.raises(PartitionError, match="K_MAX"):
        list(enumerate_partitions(K_MAX + 1))
    with pytest.raises(PartitionError):
        list(enumerate_partitions(0))


@pytest.mark.parametrize("text,expected", [
    ("{1,2}{3,4}", True), ("{1,3}{2,4}", False), ("{1,8,10}{2,4}{3,5}{6,7,9}", False),
    ("{1,4}{2,3}", True), ("{1}{2}{3}", True),
])
def test_is_noncrossing_examples(text, expected):
    assert is_noncrossing(parse_partition(text)) is expected


@pytest.mark.parametrize("k", range(1, 8))
def test_noncrossing_count_is_catalan(k):
    assert sum(is_noncrossing(p) for p in enumerate_partitions(k)) == catalan_number(k)


@pytest.mark.parametrize("k", range(1, 7))
def test_noncrossing_matches_quadruple_search(k):
    for p in enumerate_partitions(k):
        assert is_noncrossing(p) == brute_noncrossing(p.blocks)


def test_parse_normalizes_block_order():
    a = parse_partition("{6,7,9}{2,4}{3,5}{1,8,10}")
    b = parse_partition("{1,8,10}{2,4}{3,5}{6,7,9}")
    assert a == b and a.labels == (1, 2, 3, 2, 3, 4, 4, 1, 4, 1)


@pytest.mark.parametrize("text,pos", [("{1,2}x{3}", 5), ("{1,2}{3", 5), ("{1,a}", 0), ("{}", 0)])
def test_parse_errors_are_positional(text, pos):
    with pytest.raises(PartitionError, match=f"position {pos}"):
        parse_partition(text)


@pytest.mark.parametrize("text", ["{1,2}{2,3}", "{1,3}", "{0,1}"])
def test_parse_rejects_non_partitions(text):
    with pytest.raises(PartitionError):
        parse_partition(text)


def test_invalid_rgs_rejected():
    with pytest.raises(PartitionError):
        Partition((2, 1))
    with pytest.raises(PartitionError):
        Partition((1, 3))


def test_nc_closure_examples(ten_point):
    assert str(nc_closure(ten_point)) == "{1,6,7,8,9,10}{2,3,4,5}"
    assert str(nc_closure(parse_partition("{1,3}{2,4}"))) == "{1,2,3,4}"
    p = parse_partition("{1,4}{2,3}{5}")
    assert nc_closure(p) == p


def test_components_of_ten_point(ten_point):
    comps = connected_components(ten_point)
    assert sorted(c.support for c in comps) == [(1, 6, 7, 8, 9, 10), (2, 3, 4, 5)]
    assert not is_connected(ten_point)


def test_components_simple():
    assert len(connected_components(parse_partition("{1,2}{3,4}"))) == 2
    single = parse_partition("{1,2,3}")
    (c,) = connected_components(single)
    assert c.relabeled() == single


def test_thin_examples(ten_point):
    t = thin(parse_partition("{1,2}{3,4}"))
    assert t.support == (2, 4) and t.relabeled() == Partition((1, 2))
    p = parse_partition("{1,3}{2,4}")
    assert thin(p).relabeled() == p
    tt = thin(ten_point)
    assert len(tt.support) == 8
    assert sorted(len(c.support) for c in connected_components(tt.relabeled())) == [4, 4]


def test_kappa_examples(ten_point):
    assert kappa(parse_partition("{1,2}{3,4}")) == 0
    assert kappa(parse_partition("{1,3}{2,4}")) == 4
    # block-change count on the induced cyclic order; see kappa identity tests
    assert kappa(ten_point) == 8
    assert sorted(kappa(c) for c in connected_components(ten_point)) == [4, 4]


@pytest.mark.parametrize("k,count", [(2, 1), (4, 3), (6, 15), (8, 105)])
def test_pairings(k, count):
    ps = list(enumerate_pairings(k))
    assert len(ps) == count == math.prod(range(1, k, 2))
    assert all(set(p.block_sizes()) == {2} for p in ps)
    assert {p for p in enumerate_partitions(k) if set(p.block_sizes()) == {2}} == set(ps)


def test_pairings_odd_rejected():
    with pytest.raises(PartitionError):
        list(enumerate_pairings(3))


@pytest.mark.parametrize("k", range(1, 8))
def test_exhaustive_invariants(k):
    for p in enumerate_partitions(k):
        c = nc_closure(p)
        assert p.refines(c) and is_noncrossing(c) and nc_closure(c) == c
        comps = connected_components(p)
        assert sorted(x for comp in comps for x in comp.support) == list(range(1, k + 1))
        assert kappa(p) == sum(kappa(comp) for comp in comps)
        assert kappa(p) == kappa(thin(p))
        assert (kappa(p) == 0) == is_noncrossing(p)
        tp = thin(p).relabeled()
        if thin(tp).relabeled() == tp and is_connected(tp) and tp.k > 1:
            assert kappa(tp) == tp.k


@given(rgs)
def test_thin_idempotent(p):
    once = thin(p).relabeled()
    assert thin(once).relabeled() == once


@given(rgs, st.integers(0, 7))
def test_kappa_rotation_invariant(p, shift):
    shift %= p.k
    rotated = Partition.from_blocks([[((x - 1 - shift) % p.k) + 1 for x in b] for b in p.blocks])
    assert kappa(rotated) == kappa(p)
    assert is_noncrossing(rotated) == is_noncrossing(p)


@given(rgs)
def test_cyclic_canonical_is_rotation_class_key(p):
    k = p.k
    keys = {cyclic_canonical(Partition.from_blocks([[((x - 1 - s) % k) + 1 for x in b] for b in p.blocks]).labels)
            for s in range(k)}
    assert len(keys) == 1


@given(rgs)
def test_str_parse_round_trip(p):
    assert parse_partition(str(p)) == p


def test_induced_partition_restrict():
    p = parse_partition("{1,3}{2,4}")
    ip = InducedPartition.restrict(p, (1, 3, 4))
    assert ip.support == (1, 3, 4) and ip.relabeled() == Partition((1, 1, 2))
