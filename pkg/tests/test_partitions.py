from __future__ import annotations

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from gmekit import (
    Coarsen,
    InvalidArgumentError,
    Partition,
    PartitionRelationError,
    PartitionSizeError,
    all_bipartitions,
    all_partitions,
    coarsenings,
    is_coarser,
    xi_set,
)
from gmekit.partitions import partitions_into

MODES = {"any": Coarsen.ANY, "discard": Coarsen.DISCARD, "combine": Coarsen.COMBINE}
BELL = [1, 1, 2, 5, 15, 52, 203]


def to_oracle(p: Partition) -> frozenset:
    return oracles.canon(p.blocks)


def from_oracle(p: frozenset) -> Partition:
    return Partition(p)


def every_partition_of_subsets(m: int) -> list[Partition]:
    out = []
    for r in range(1, m + 1):
        for sub in itertools.combinations(range(m), r):
            out.extend(all_partitions(sub))
    return out


def test_parse_format_roundtrip():
    p = Partition.parse("CD|A|B")
    assert p.blocks == ((0,), (1,), (2, 3))
    assert p.format() == "A|B|CD"
    assert Partition.parse(p.format()) == p
    assert p.k == 3 and p.support == frozenset(range(4))
    assert p.covers(4) and not p.covers(5)


def test_parse_with_custom_labels():
    p = Partition.parse("xy|z", ["x", "y", "z"])
    assert p.blocks == ((0, 1), (2,))


@pytest.mark.parametrize("blocks", [[[0], [0, 1]], [[]], [], [[-1]]])
def test_invalid_partitions(blocks):
    with pytest.raises(InvalidArgumentError):
        Partition(blocks)


def test_bipartition_order_four_parties():
    got = [p.format() for p in all_bipartitions(4)]
    assert got == ["ACD|B", "ABD|C", "ABC|D", "AD|BC", "AC|BD", "AB|CD", "A|BCD"]


@pytest.mark.parametrize("m", range(2, 8))
def test_bipartition_count(m):
    cuts = all_bipartitions(m)
    assert len(cuts) == 2 ** (m - 1) - 1
    assert len(set(cuts)) == len(cuts)
    assert all(c.k == 2 and c.covers(m) for c in cuts)


def test_bipartitions_need_two_parties():
    with pytest.raises(InvalidArgumentError):
        all_bipartitions(1)


@pytest.mark.parametrize("n", range(1, 7))
def test_all_partitions_match_bell_oracle(n):
    got = {to_oracle(p) for p in all_partitions(range(n))}
    assert len(got) == BELL[n]
    assert got == set(oracles.bell_partitions(list(range(n))))


def test_partition_enumeration_guard():
    with pytest.raises(PartitionSizeError):
        all_partitions(range(7))


def test_partitions_into_counts_stirling():
    assert len(partitions_into(range(4), 2)) == 7
    assert len(partitions_into(range(4), 3)) == 6
    assert len(partitions_into(range(5), 3)) == 25


@pytest.mark.parametrize("inner_discard", [True, False])
@pytest.mark.parametrize("mode", sorted(MODES))
def test_is_coarser_matches_move_closure(mode, inner_discard):
    universe = every_partition_of_subsets(4)
    for x in universe:
        reach = oracles.reachable(to_oracle(x), mode, inner_discard)
        for y in universe:
            expected = to_oracle(y) in reach
            assert is_coarser(x, y, MODES[mode], inner_discard) == expected, (x, y)


@pytest.mark.parametrize("inner_discard", [True, False])
@pytest.mark.parametrize("mode", sorted(MODES))
def test_coarsenings_match_move_closure(mode, inner_discard):
    for x in all_partitions(range(5)):
        got = {to_oracle(z) for z in coarsenings(x, MODES[mode], inner_discard)}
        assert got == oracles.reachable(to_oracle(x), mode, inner_discard)


def test_coarsenings_min_blocks():
    x = Partition.parse("A|B|C")
    got = [p.format() for p in coarsenings(x, Coarsen.DISCARD, min_blocks=2)]
    assert got == ["A|B", "A|C", "B|C"]


def test_is_coarser_is_strict():
    p = Partition.parse("A|B")
    assert not is_coarser(p, p)


def test_inner_discard_flag():
    x, y = Partition.parse("AB|C"), Partition.parse("A|C")
    assert is_coarser(x, y, Coarsen.DISCARD, inner_discard=True)
    assert not is_coarser(x, y, Coarsen.DISCARD, inner_discard=False)


def test_five_party_chain():
    chain = [
        ("A|B|C|D|E", "A|B|C|DE", Coarsen.COMBINE),
        ("A|B|C|DE", "A|B|C|D", Coarsen.DISCARD),
        ("A|B|C|D", "AB|C|D", Coarsen.COMBINE),
        ("AB|C|D", "AB|CD", Coarsen.COMBINE),
    ]
    for x, y, mode in chain:
        assert is_coarser(Partition.parse(x), Partition.parse(y), mode)
    assert is_coarser(Partition.parse("A|B|C|D|E"), Partition.parse("AB|CD"))


def test_xi_set_reference_example():
    x, y = Partition.parse("A|B|CD|E"), Partition.parse("A|B")
    got = {p.format() for p in xi_set(x, y)}
    listed = {"CD|E", "A|CD|E", "B|CD|E", "A|CD", "A|E", "B|E", "A|C", "A|D", "B|C", "B|D"}
    assert listed <= got
    assert len(got) == 35
    assert {"C|E", "D|E", "B|CD"} <= got - listed
    assert got == {oracles.fmt(z) for z in oracles.xi_oracle(to_oracle(x), to_oracle(y))}


def test_xi_set_requires_coarser_pair():
    with pytest.raises(PartitionRelationError):
        xi_set(Partition.parse("A|B"), Partition.parse("A|B|C"))


partition_pairs = st.integers(min_value=2, max_value=5).flatmap(
    lambda m: st.tuples(
        st.sampled_from(all_partitions(range(m))),
        st.permutations(list(range(m))),
        st.integers(min_value=0, max_value=10 ** 6),
    )
)


@given(partition_pairs)
def test_xi_set_matches_oracle(data):
    x, _, pick = data
    above = coarsenings(x)
    if not above:
        return
    y = above[pick % len(above)]
    got = {to_oracle(z) for z in xi_set(x, y)}
    assert got == oracles.xi_oracle(to_oracle(x), to_oracle(y))


@given(partition_pairs)
def test_xi_set_relabeling_invariance(data):
    x, perm, pick = data
    above = coarsenings(x)
    if not above:
        return
    y = above[pick % len(above)]

    def relabel(p: Partition) -> Partition:
        return Partition([[perm[i] for i in b] for b in p.blocks])

    direct = {relabel(z) for z in xi_set(x, y)}
    assert direct == set(xi_set(relabel(x), relabel(y)))


@given(partition_pairs)
def test_coarsening_is_transitive(data):
    x, _, pick = data
    above = coarsenings(x)
    if not above:
        return
    y = above[pick % len(above)]
    for z in coarsenings(y):
        assert is_coarser(x, z)
