"""Unified multipartite entanglement measures on pure states.

The core routine, :func:`pure_values`, works on a *batch* of amplitude
vectors viewed as k-partite states with block dimensions ``dims``; the
convex-roof optimizer relies on this to score many candidate ensemble
members per numpy call. The scalar API (:func:`evaluate_pure` and
friends) is a thin layer on top.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import asdict, dataclass, replace
from typing import Sequence

import numpy as np

from .entropies import (
    check_alpha,
    check_q,
    renyi_from_spectrum,
    trace_norm,
    tsallis_from_spectrum,
    vn_from_spectrum,
)
from .errors import InvalidArgumentError
from .partitions import Partition, all_bipartitions, partitions_into
from .states import PureState, State, partial_transpose, product, regroup

DELTA_TOL = 1e-8


class Family(str, enum.Enum):
    EF = "ef"
    TAU = "tau"
    CONCURRENCE = "concurrence"
    NEGATIVITY = "negativity"
    TSALLIS = "tsallis"
    RENYI = "renyi"
    FID = "fid"
    FID_SQRT = "fid_sqrt"
    FID_AFFINITY = "fid_affinity"
    GMC = "gmc"
    SUM_1234_2 = "sum_1234_2"
    SUM_1234_3 = "sum_1234_3"


COMPLETE = frozenset({Family.EF, Family.TAU, Family.CONCURRENCE, Family.TSALLIS, Family.SUM_1234_2})
ADDITIVE = frozenset({Family.EF, Family.TAU, Family.TSALLIS, Family.RENYI, Family.NEGATIVITY})
INTRINSICALLY_GENUINE = frozenset({Family.GMC, Family.SUM_1234_2, Family.SUM_1234_3})
_INNER_OK = frozenset(Family) - INTRINSICALLY_GENUINE

_ALIASES = {
    "e_f": Family.EF, "eof": Family.EF,
    "c": Family.CONCURRENCE, "conc": Family.CONCURRENCE,
    "n": Family.NEGATIVITY, "neg": Family.NEGATIVITY,
    "t": Family.TSALLIS, "t_q": Family.TSALLIS,
    "r": Family.RENYI, "r_alpha": Family.RENYI,
    "c_gme": Family.GMC,
    "sum2": Family.SUM_1234_2, "sum3": Family.SUM_1234_3,
}
# genuine variants whose usual names put the "g" before the family letter
_GENUINE_ALIASES = {
    "e_g_f": Family.EF, "t_g_q": Family.TSALLIS, "r_g_alpha": Family.RENYI,
    "n_g_f": Family.NEGATIVITY,
}


def parse_family(name: str) -> tuple[Family, bool]:
    """Map a CLI-style name to ``(family, genuine)``; a ``_g`` suffix selects genuine.

    >>> parse_family("c_g")
    (<Family.CONCURRENCE: 'concurrence'>, True)
    """
    key = name.strip().lower().replace("-", "_")
    if key in _GENUINE_ALIASES:
        return _GENUINE_ALIASES[key], True
    genuine = key.endswith("_g")
    if genuine:
        key = key[:-2]
    if key in _ALIASES:
        return _ALIASES[key], genuine
    try:
        return Family(key), genuine
    except ValueError:
        raise InvalidArgumentError(f"unknown measure family {name!r}") from None


@dataclass(frozen=True)
class MeasureSpec:
    """Measure family selector plus parameters.

    ``inner`` picks the bipartite (``SUM_1234_2``) or tripartite
    (``SUM_1234_3``) measure summed over splits. ``mixed_strategy="direct"``
    is only meaningful for the negativity family, which has a closed form
    on mixed states.
    """

    family: Family
    genuine: bool = False
    q: float = 2.0
    alpha: float = 0.5
    log_base: int | str = 2
    mixed_strategy: str = "convex_roof"
    inner: Family | None = None
    delta_tol: float = DELTA_TOL

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        check_q(self.q)
        check_alpha(self.alpha)
        if self.log_base not in (2, "e"):
            raise InvalidArgumentError(f"log_base must be 2 or 'e', got {self.log_base!r}")
        if self.mixed_strategy not in ("convex_roof", "direct"):
            raise InvalidArgumentError(f"unknown mixed strategy {self.mixed_strategy!r}")
        if self.mixed_strategy == "direct" and self.family is not Family.NEGATIVITY:
            raise InvalidArgumentError("the direct mixed strategy exists only for negativity")
        if self.family is Family.SUM_1234_2 and self.inner is None:
            object.__setattr__(self, "inner", Family.CONCURRENCE)
        if self.family is Family.SUM_1234_3 and self.inner is None:
            raise InvalidArgumentError("sum_1234_3 needs an inner tripartite family")
        if self.inner is not None:
            object.__setattr__(self, "inner", Family(self.inner))
            if self.inner not in _INNER_OK:
                raise InvalidArgumentError(f"{self.inner.value} cannot be an inner family")
        if not 0 < self.delta_tol < 1:
            raise InvalidArgumentError("delta_tol must lie in (0, 1)")

    @property
    def is_complete(self) -> bool:
        return self.family in COMPLETE

    @property
    def gated(self) -> bool:
        """Whether values carry the biseparability gate."""
        return self.genuine or self.family in INTRINSICALLY_GENUINE

    def plain(self) -> "MeasureSpec":
        return replace(self, genuine=False)

    def as_genuine(self) -> "MeasureSpec":
        return replace(self, genuine=True)

    def inner_spec(self) -> "MeasureSpec":
        return replace(self, family=self.inner, inner=None, genuine=False,
                       mixed_strategy="convex_roof")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        d["inner"] = self.inner.value if self.inner is not None else None
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "MeasureSpec":
        return cls(**d)


# --------------------------------------------------------------------------- #
# batched kernels

def _grouped_matrix(psi_t: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reshape a (B, d0, ..., dk-1) batch into (B, d_keep, d_rest)."""
    k = psi_t.ndim - 1
    rest = [a for a in range(k) if a not in keep]
    dims = psi_t.shape[1:]
    dk = math.prod(dims[a] for a in keep)
    t = psi_t.transpose([0] + [a + 1 for a in keep] + [a + 1 for a in rest])
    return t.reshape(psi_t.shape[0], dk, -1)


def _schmidt(psi_t: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Schmidt coefficients across ``keep | rest``, shape (B, min(d_keep, d_rest)).

    Singular values carry absolute accuracy near machine epsilon, so
    square roots of small marginal eigenvalues stay accurate; eigenvalues
    of the marginal itself would only be accurate to about 1e-16, which
    becomes 1e-8 after a square root.
    """
    return np.linalg.svd(_grouped_matrix(psi_t, keep), compute_uv=False)


def _pair_sum(x: np.ndarray) -> np.ndarray:
    """``sum_{i<j} x_i x_j`` along the last axis, free of cancellation for x >= 0."""
    tail = np.cumsum(x[..., ::-1], axis=-1)[..., ::-1]
    return (x[..., :-1] * tail[..., 1:]).sum(axis=-1)


_MINOR_LIMIT = 4096


@functools.lru_cache(maxsize=None)
def pair_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(d, 1)


def _offproduct(psi_t: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """``1 - tr rho_keep^2`` for unit-norm rows, without cancellation.

    Uses ``1 - tr rho^2 = 2 sum |2x2 minors|^2`` of the grouped amplitude
    matrix while that tensor is small, and Schmidt coefficients otherwise.
    """
    m = _grouped_matrix(psi_t, keep)
    if m.shape[1] > m.shape[2]:
        m = m.swapaxes(-1, -2)
    dk, dr = m.shape[1:]
    if dk * (dk - 1) // 2 * dr * dr > _MINOR_LIMIT:
        return 2.0 * _pair_sum(np.linalg.svd(m, compute_uv=False) ** 2)
    ii, jj = pair_indices(dk)
    outer = m[:, ii, :, None] * m[:, jj, None, :]
    minors = outer - outer.swapaxes(-1, -2)
    return np.einsum("bpkl,bpkl->b", minors, minors.conj()).real


def _gram(psi_t: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Smaller-side Gram matrix; shares its nonzero spectrum with the marginal."""
    m = _grouped_matrix(psi_t, keep)
    if m.shape[1] <= m.shape[2]:
        return m @ m.conj().swapaxes(-1, -2)
    return m.conj().swapaxes(-1, -2) @ m


def _marginal(psi_t: np.ndarray, axis: int) -> np.ndarray:
    m = _grouped_matrix(psi_t, [axis])
    return m @ m.conj().swapaxes(-1, -2)


def _bipartition_groups(k: int) -> list[tuple[int, ...]]:
    return [p.blocks[0] for p in all_bipartitions(k)]


def bipartition_offproduct(psi_t: np.ndarray) -> np.ndarray:
    """(B, 2^(k-1)-1) values of ``1 - purity``, ordered as ``all_bipartitions(k)``."""
    k = psi_t.ndim - 1
    return np.stack([_offproduct(psi_t, g) for g in _bipartition_groups(k)], axis=1)


def bipartition_purities(psi_t: np.ndarray) -> np.ndarray:
    """(B, 2^(k-1)-1) marginal purities, ordered as ``all_bipartitions(k)``."""
    return 1.0 - bipartition_offproduct(psi_t)


def delta_values(psi_t: np.ndarray, tol: float = DELTA_TOL) -> np.ndarray:
    """1.0 where no bipartition is product (purity >= 1 - tol), else 0.0."""
    off = bipartition_offproduct(psi_t)
    return (off.min(axis=1) > tol).astype(float)


def gmc_values(psi_t: np.ndarray) -> np.ndarray:
    return np.sqrt(2.0 * bipartition_offproduct(psi_t)).min(axis=1)


def _apply_blockwise(psi_t: np.ndarray, ops: Sequence[np.ndarray]) -> np.ndarray:
    """Apply ``op[b]`` (shape (B, d_b, d_b)) on tensor axis ``b`` of every batch row."""
    phi = psi_t
    batch = psi_t.shape[0]
    for axis, op in enumerate(ops):
        moved = np.moveaxis(phi, axis + 1, -1)
        inner_shape = moved.shape
        flat = moved.reshape(batch, -1, inner_shape[-1])
        flat = flat @ op.swapaxes(-1, -2)
        phi = np.moveaxis(flat.reshape(inner_shape), -1, axis + 1)
    return phi


def _batched_sqrtm(rho: np.ndarray) -> np.ndarray:
    lam, vec = np.linalg.eigh(rho)
    return (vec * np.sqrt(np.clip(lam, 0.0, None))[:, None, :]) @ vec.conj().swapaxes(-1, -2)


def regroup_batch(psi: np.ndarray, dims: Sequence[int], part: Partition) -> tuple[np.ndarray, tuple[int, ...]]:
    """Regroup a batch of full-cover states over blocks of ``part``."""
    order = [i for b in part.blocks for i in b]
    t = psi.reshape((psi.shape[0],) + tuple(dims)).transpose([0] + [i + 1 for i in order])
    new_dims = tuple(math.prod(dims[i] for i in b) for b in part.blocks)
    return t.reshape(psi.shape[0], -1), new_dims


def _plain_values(spec: MeasureSpec, psi_t: np.ndarray) -> np.ndarray:
    fam = spec.family
    k = psi_t.ndim - 1
    if fam in (Family.TAU, Family.CONCURRENCE):
        tau = sum(_offproduct(psi_t, [a]) for a in range(k))
        return np.sqrt(tau) if fam is Family.CONCURRENCE else tau
    if fam in (Family.EF, Family.NEGATIVITY, Family.TSALLIS, Family.RENYI):
        if fam in (Family.EF, Family.TSALLIS):
            spectra = [np.clip(np.linalg.eigvalsh(_gram(psi_t, [a])), 0.0, None) for a in range(k)]
        else:
            # fractional powers need small eigenvalues to full absolute accuracy
            svs = [_schmidt(psi_t, [a]) for a in range(k)]
            spectra = [sv ** 2 for sv in svs]
        if fam is Family.EF:
            val = 0.5 * sum(vn_from_spectrum(s, spec.log_base) for s in spectra)
        elif fam is Family.NEGATIVITY:
            # (tr sqrt(rho))^2 - 1 = 2 sum_{i<j} s_i s_j for unit-norm rows
            val = sum(2.0 * _pair_sum(sv) for sv in svs)
        elif fam is Family.TSALLIS:
            val = 0.5 * sum(tsallis_from_spectrum(s, spec.q) for s in spectra)
        else:
            val = 0.5 * sum(renyi_from_spectrum(s, spec.alpha) for s in spectra)
        return np.clip(val, 0.0, None)
    if fam in (Family.FID, Family.FID_SQRT, Family.FID_AFFINITY):
        marg = [_marginal(psi_t, a) for a in range(k)]
        if fam is Family.FID_AFFINITY:
            marg = [_batched_sqrtm(r) for r in marg]
        phi = _apply_blockwise(psi_t, marg)
        overlap = np.clip(
            (psi_t.conj() * phi).reshape(psi_t.shape[0], -1).sum(axis=1).real, 0.0, 1.0
        )
        if fam is Family.FID:
            return 1.0 - overlap
        if fam is Family.FID_SQRT:
            return 1.0 - np.sqrt(overlap)
        return 1.0 - overlap ** 2
    if fam is Family.GMC:
        return gmc_values(psi_t)
    batch = psi_t.shape[0]
    flat = psi_t.reshape(batch, -1)
    dims = psi_t.shape[1:]
    inner = spec.inner_spec()
    if fam is Family.SUM_1234_2:
        splits = all_bipartitions(k)
    else:
        if k < 3:
            raise InvalidArgumentError("sum over tripartitions needs at least 3 parties")
        splits = partitions_into(range(k), k - 1)
    total = np.zeros(batch)
    for part in splits:
        sub, sub_dims = regroup_batch(flat, dims, part)
        total += pure_values(inner, sub, sub_dims)
    return total


def pure_values(spec: MeasureSpec, psi: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Measure values for a batch ``psi`` of shape (B, prod(dims)).

    Rows must be normalized; ``dims`` are the block dimensions of the
    k-partite view (k >= 2).
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) < 2:
        raise InvalidArgumentError("entanglement measures need at least two parties")
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim == 1:
        psi = psi[None, :]
    psi_t = psi.reshape((psi.shape[0],) + dims)
    val = _plain_values(spec, psi_t)
    if spec.gated and spec.family is not Family.GMC:
        val = val * delta_values(psi_t, spec.delta_tol)
    return val


class PureFunctional:
    """Batched pure-state functional bound to a fixed k-partite block structure."""

    def __init__(self, spec: MeasureSpec, dims: Sequence[int]):
        self.spec = spec
        self.dims = tuple(int(d) for d in dims)

    def __call__(self, psi: np.ndarray) -> np.ndarray:
        return pure_values(self.spec, psi, self.dims)

    def __repr__(self) -> str:
        return f"PureFunctional({self.spec.family.value}, dims={self.dims})"


# --------------------------------------------------------------------------- #
# scalar API

def _full_view(psi: PureState, partition: Partition | None) -> PureState:
    if partition is None:
        return psi
    psi.shape.check_partition(partition)
    if not partition.covers(psi.shape.m):
        raise InvalidArgumentError(
            f"partition {psi.shape.format(partition)} does not cover all subsystems; "
            "evaluate the marginal with convex_roof.evaluate"
        )
    return regroup(psi, partition)


def evaluate_pure(spec: MeasureSpec, psi: PureState, partition: Partition | None = None) -> float:
    """Value of ``spec`` on ``psi`` viewed through a full-cover ``partition``."""
    view = _full_view(psi, partition)
    return float(pure_values(spec, view.amplitudes, view.shape.dims)[0])


def bipartite_value(family: Family | MeasureSpec, psi: PureState, bipartition: Partition) -> float:
    """Bipartite value across a two-block cut; ``sqrt(2(1 - tr rho_X^2))`` for concurrence."""
    spec = family if isinstance(family, MeasureSpec) else MeasureSpec(Family(family))
    if bipartition.k != 2:
        raise InvalidArgumentError(f"{bipartition} is not a bipartition")
    return evaluate_pure(spec.plain(), psi, bipartition)


def negativity_mixed(rho: State, partition: Partition | None = None) -> float:
    """Sum of single-block partial-transpose trace norms minus the block count."""
    rho = rho.density()
    if partition is not None:
        rho = regroup(rho, partition)
    k = rho.shape.m
    total = sum(trace_norm(partial_transpose(rho, [b])) for b in range(k))
    return max(total - k, 0.0)


def unification_residual(spec: MeasureSpec, left: PureState, right: PureState) -> float:
    """|E(left (x) right) - E(left) - E(right)| over the finest partitions.

    Single-party factors contribute zero entanglement.
    """
    whole = product(left, right)

    def value(s: PureState) -> float:
        return 0.0 if s.shape.m < 2 else evaluate_pure(spec, s)

    return abs(value(whole) - value(left) - value(right))


def unification_check(spec: MeasureSpec, left: PureState, right: PureState) -> float:
    return unification_residual(spec, left, right)
