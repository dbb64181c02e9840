"""Partitions of multipartite systems and their coarsening relations.

A partition is a set of disjoint, nonempty blocks of subsystem indices.
It does not need to cover every subsystem: a partition of ``ABCDE`` such
as ``A|CD`` describes the marginal on ``ACD`` split into two parties.

Two elementary moves make a partition coarser:

* discarding subsystems (whole blocks, or single parties from inside a
  block when ``inner_discard`` is enabled);
* combining blocks into one.

``is_coarser`` decides reachability by a nonempty sequence of moves and
``xi_set`` collects the coarser partitions that keep only part of a
reference partition's subsystems.
"""
from __future__ import annotations

import enum
import itertools
import string
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import InvalidArgumentError, PartitionRelationError, PartitionSizeError

MAX_ENUM_SIZE = 6
DEFAULT_LABELS = string.ascii_uppercase


class Coarsen(enum.Enum):
    DISCARD = "discard"
    COMBINE = "combine"
    ANY = "any"


@dataclass(frozen=True, order=True)
class Partition:
    """Canonical partition: sorted blocks, blocks ordered by first index."""

    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, blocks: Iterable[Iterable[int]]):
        canon = []
        seen: set[int] = set()
        for block in blocks:
            b = tuple(sorted(int(i) for i in block))
            if not b:
                raise InvalidArgumentError("partition blocks must be nonempty")
            if b[0] < 0:
                raise InvalidArgumentError(f"negative subsystem index in block {b}")
            if len(set(b)) != len(b) or seen.intersection(b):
                raise InvalidArgumentError("partition blocks must be disjoint")
            seen.update(b)
            canon.append(b)
        if not canon:
            raise InvalidArgumentError("a partition needs at least one block")
        object.__setattr__(self, "blocks", tuple(sorted(canon)))

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for b in self.blocks for i in b)

    def covers(self, m: int) -> bool:
        return self.support == frozenset(range(m))

    def format(self, labels: Sequence[str] = DEFAULT_LABELS) -> str:
        sep = "" if all(len(labels[i]) == 1 for i in self.support) else ","
        return "|".join(sep.join(labels[i] for i in b) for b in self.blocks)

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"Partition({self.format()!r})"

    @classmethod
    def parse(cls, text: str, labels: Sequence[str] = DEFAULT_LABELS) -> "Partition":
        """Parse ``"AB|C|D"`` (or ``"A1,A2|B"`` for multi-character labels)."""
        lookup = {lab: i for i, lab in enumerate(labels)}
        blocks = []
        for raw in text.strip().split("|"):
            raw = raw.strip()
            if not raw:
                raise InvalidArgumentError(f"empty block in partition {text!r}")
            names = [s.strip() for s in raw.split(",")] if "," in raw else list(raw)
            try:
                blocks.append([lookup[n] for n in names])
            except KeyError as exc:
                raise InvalidArgumentError(
                    f"unknown subsystem label {exc.args[0]!r} in {text!r}"
                ) from None
        return cls(blocks)

    @classmethod
    def finest(cls, indices: Iterable[int]) -> "Partition":
        return cls([i] for i in indices)


def _as_m(shape_or_m) -> int:
    if isinstance(shape_or_m, int):
        return shape_or_m
    return len(shape_or_m.dims)


def all_bipartitions(shape_or_m) -> list[Partition]:
    """Every two-block partition of the full system, each listed once.

    The block containing subsystem 0 comes first; bipartitions are ordered
    by the size of the other block, then lexicographically.
    """
    m = _as_m(shape_or_m)
    if m < 2:
        raise InvalidArgumentError(f"bipartitions need at least 2 subsystems, got {m}")
    out = []
    rest = range(1, m)
    for size in range(1, m):
        for other in itertools.combinations(rest, size):
            first = [i for i in range(m) if i not in other]
            out.append(Partition([first, other]))
    return out


def _set_partitions(items: list[int]) -> Iterator[list[list[int]]]:
    if not items:
        yield []
        return
    head, tail = items[0], items[1:]
    for sub in _set_partitions(tail):
        yield [[head]] + sub
        for i in range(len(sub)):
            yield sub[:i] + [[head] + sub[i]] + sub[i + 1:]


def all_partitions(subset: Iterable[int]) -> list[Partition]:
    """All set partitions of ``subset`` (Bell-number many)."""
    items = sorted(set(int(i) for i in subset))
    if not items:
        raise InvalidArgumentError("subset must be nonempty")
    if len(items) > MAX_ENUM_SIZE:
        raise PartitionSizeError(
            f"refusing to enumerate partitions of {len(items)} > {MAX_ENUM_SIZE} items"
        )
    return sorted({Partition(p) for p in _set_partitions(items)})


def partitions_into(subset: Iterable[int], k: int) -> list[Partition]:
    return [p for p in all_partitions(subset) if p.k == k]


def is_coarser(
    x: Partition,
    y: Partition,
    mode: Coarsen = Coarsen.ANY,
    inner_discard: bool = True,
) -> bool:
    """True iff ``y`` is reachable from ``x`` by at least one permitted move."""
    if x == y:
        return False
    sx, sy = x.support, y.support
    if not sy <= sx:
        return False
    restricted = []
    for block in x.blocks:
        kept = tuple(i for i in block if i in sy)
        if not kept:
            continue
        if len(kept) < len(block) and not inner_discard:
            return False
        restricted.append(kept)
    owner = {i: n for n, block in enumerate(y.blocks) for i in block}
    for kept in restricted:
        if len({owner[i] for i in kept}) != 1:
            return False  # a block would have to be split
    if mode is Coarsen.DISCARD:
        return Partition(restricted) == y
    if mode is Coarsen.COMBINE:
        return sx == sy
    return True


def coarsenings(
    x: Partition,
    mode: Coarsen = Coarsen.ANY,
    inner_discard: bool = True,
    min_blocks: int = 1,
) -> list[Partition]:
    """Every partition strictly coarser than ``x`` under ``mode``."""
    support = sorted(x.support)
    if mode is Coarsen.COMBINE:
        subsets = [tuple(support)]
    else:
        subsets = [
            s for r in range(1, len(support) + 1)
            for s in itertools.combinations(support, r)
        ]
    found = set()
    for keep in subsets:
        keep_set = set(keep)
        restricted = []
        ok = True
        for block in x.blocks:
            kept = [i for i in block if i in keep_set]
            if kept and len(kept) < len(block) and not inner_discard:
                ok = False
                break
            if kept:
                restricted.append(kept)
        if not ok:
            continue
        if mode is Coarsen.DISCARD:
            groupings = [[[n] for n in range(len(restricted))]]
        else:
            if len(restricted) > MAX_ENUM_SIZE:
                raise PartitionSizeError("too many blocks to enumerate combinations")
            groupings = _set_partitions(list(range(len(restricted))))
        for grouping in groupings:
            z = Partition(
                [i for n in group for i in restricted[n]] for group in grouping
            )
            if z != x and z.k >= min_blocks:
                found.add(z)
    return sorted(found)


def xi_set(
    x: Partition,
    y: Partition,
    mode: Coarsen = Coarsen.ANY,
    inner_discard: bool = True,
    min_blocks: int = 2,
) -> list[Partition]:
    """Coarser partitions of ``x`` holding none, or only part, of ``y``'s subsystems.

    ``min_blocks`` drops single-block results, on which no entanglement
    measure is defined.
    """
    if not is_coarser(x, y, Coarsen.ANY, inner_discard):
        raise PartitionRelationError(f"{y} is not coarser than {x}")
    sy = y.support
    return [
        z for z in coarsenings(x, mode, inner_discard, min_blocks)
        if len(z.support & sy) < len(sy)
    ]
