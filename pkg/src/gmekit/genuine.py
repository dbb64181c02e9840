"""Biseparability gate, genuinely multipartite concurrence and gated measures."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .measures import (
    DELTA_TOL,
    Family,
    MeasureSpec,
    bipartition_offproduct,
    evaluate_pure,
)
from .partitions import Partition, all_bipartitions
from .states import PureState, regroup


@dataclass(frozen=True)
class DeltaVerdict:
    """Outcome of the pure-state biseparability test.

    ``max_offproduct`` is the smallest ``1 - purity`` over all cuts: how far
    the state is from the nearest product cut.
    """

    value: int
    witness: Partition | None
    max_offproduct: float

    def to_dict(self, labels=None) -> dict:
        w = None
        if self.witness is not None:
            w = self.witness.format(labels) if labels else str(self.witness)
        return {"value": self.value, "witness": w, "max_offproduct": self.max_offproduct}


def _view(psi: PureState, partition: Partition | None) -> PureState:
    if partition is None:
        return psi
    psi.shape.check_partition(partition)
    if not partition.covers(psi.shape.m):
        raise InvalidArgumentError("pure-state gate needs a partition covering all subsystems")
    return regroup(psi, partition)


def delta_pure(psi: PureState, tol: float = DELTA_TOL, partition: Partition | None = None) -> DeltaVerdict:
    view = _view(psi, partition)
    m = view.shape.m
    if m < 2:
        raise InvalidArgumentError("the biseparability gate needs at least two parties")
    off = bipartition_offproduct(view.amplitudes.reshape((1,) + view.shape.dims))[0]
    cuts = all_bipartitions(m)
    offproduct = float(off.min())
    hits = np.flatnonzero(off <= tol)
    if hits.size:
        witness = cuts[hits[0]]
        if partition is not None:
            # express the witness in original subsystem indices
            witness = Partition(
                [i for n in blk for i in partition.blocks[n]] for blk in witness.blocks
            )
        return DeltaVerdict(0, witness, offproduct)
    return DeltaVerdict(1, None, offproduct)


def gmc_pure(psi: PureState, partition: Partition | None = None) -> float:
    """Minimum over all cuts of ``sqrt(2(1 - tr rho_X^2))``."""
    return gmc_with_cut(psi, partition)[0]


def gmc_with_cut(psi: PureState, partition: Partition | None = None) -> tuple[float, Partition]:
    """GMC together with the first cut attaining the minimum."""
    view = _view(psi, partition)
    off = bipartition_offproduct(view.amplitudes.reshape((1,) + view.shape.dims))[0]
    conc = np.sqrt(2.0 * off)
    best = int(np.argmin(conc))
    cut = all_bipartitions(view.shape.m)[best]
    if partition is not None:
        cut = Partition([i for n in blk for i in partition.blocks[n]] for blk in cut.blocks)
    return float(conc[best]), cut


def evaluate_genuine_pure(spec: MeasureSpec, psi: PureState, partition: Partition | None = None) -> float:
    """Gate times plain value, both on the partition's k-partite view."""
    return evaluate_pure(spec.as_genuine(), psi, partition)


def _require_four(psi: PureState) -> None:
    if psi.shape.m != 4:
        raise InvalidArgumentError(f"four-partite measure applied to {psi.shape.m} parties")


def sum_1234_2(inner: Family, psi: PureState, **params) -> float:
    """Gate times the sum of an inner bipartite measure over the seven cuts."""
    _require_four(psi)
    return evaluate_pure(MeasureSpec(Family.SUM_1234_2, inner=inner, **params), psi)


def sum_1234_3(inner: Family, psi: PureState, **params) -> float:
    """Gate times the sum of an inner tripartite measure over the six 3-block splits."""
    _require_four(psi)
    return evaluate_pure(MeasureSpec(Family.SUM_1234_3, inner=inner, **params), psi)


def sum_over_splits(spec: MeasureSpec, psi: PureState) -> float:
    """Generalized sum measure for any number of parties (``spec.family`` a sum family)."""
    if spec.family not in (Family.SUM_1234_2, Family.SUM_1234_3):
        raise InvalidArgumentError("sum_over_splits needs a sum family")
    return evaluate_pure(replace(spec, genuine=True), psi)
