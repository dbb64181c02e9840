"""Dense pure and mixed states over labeled qudit systems.

Index convention: subsystem 0 is the slowest-varying tensor index, so the
amplitude of ``|i_0 i_1 ... i_{m-1}>`` sits at the row-major flat index of
``(i_0, ..., i_{m-1})`` in an array of shape ``dims``.
"""
from __future__ import annotations

import math
import string
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidArgumentError, StateInvariantError
from .partitions import Partition

MAX_DIM = 4096
ATOL = 1e-10
RECONSTRUCT_ATOL = 1e-8


@dataclass(frozen=True)
class SystemShape:
    labels: tuple[str, ...]
    dims: tuple[int, ...]

    def __init__(self, dims: Iterable[int], labels: Iterable[str] | None = None):
        dims = tuple(int(d) for d in dims)
        if not dims:
            raise InvalidArgumentError("a system needs at least one subsystem")
        if labels is None:
            if len(dims) > 26:
                raise InvalidArgumentError("give explicit labels for more than 26 subsystems")
            labels = string.ascii_uppercase[: len(dims)]
        labels = tuple(str(s) for s in labels)
        if len(labels) != len(dims):
            raise InvalidArgumentError(f"{len(labels)} labels for {len(dims)} dims")
        if len(set(labels)) != len(labels) or any(not s or "|" in s for s in labels):
            raise InvalidArgumentError(f"labels must be distinct and nonempty: {labels}")
        if any(d < 2 for d in dims):
            raise InvalidArgumentError(f"local dimensions must be >= 2, got {dims}")
        if math.prod(dims) > MAX_DIM:
            raise InvalidArgumentError(
                f"total dimension {math.prod(dims)} exceeds the {MAX_DIM} limit"
            )
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def qubits(cls, n: int) -> "SystemShape":
        return cls([2] * n)

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    def sub(self, indices: Sequence[int]) -> "SystemShape":
        return SystemShape([self.dims[i] for i in indices], [self.labels[i] for i in indices])

    def partition(self, text: str) -> Partition:
        p = Partition.parse(text, self.labels)
        self.check_partition(p)
        return p

    def format(self, p: Partition) -> str:
        return p.format(self.labels)

    def check_partition(self, p: Partition) -> None:
        if max(p.support) >= self.m:
            raise InvalidArgumentError(f"partition {p} refers to subsystems beyond {self.m}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


class PureState:
    """Normalized amplitude vector over a ``SystemShape``."""

    __slots__ = ("shape", "amplitudes")

    def __init__(self, shape: SystemShape, amplitudes, normalize: bool = False):
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        if amps.size != shape.dim:
            raise InvalidArgumentError(
                f"{amps.size} amplitudes for total dimension {shape.dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise StateInvariantError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if normalize:
            if norm == 0:
                raise StateInvariantError("cannot normalize the zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > ATOL:
            raise StateInvariantError(f"state norm {norm:.12g} differs from 1")
        self.shape = shape
        self.amplitudes = _frozen(amps)

    def __repr__(self) -> str:
        return f"PureState(labels={self.shape.labels}, dims={self.shape.dims})"

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.shape.dims)

    def density(self) -> "DensityOperator":
        v = self.amplitudes
        return DensityOperator(self.shape, np.outer(v, v.conj()), check=False)


class DensityOperator:
    """Positive, unit-trace Hermitian matrix over a ``SystemShape``."""

    __slots__ = ("shape", "matrix")

    def __init__(self, shape: SystemShape, matrix, check: bool = True):
        mat = np.asarray(matrix, dtype=complex)
        if mat.shape != (shape.dim, shape.dim):
            raise InvalidArgumentError(
                f"matrix shape {mat.shape} does not match dimension {shape.dim}"
            )
        if check:
            if not np.all(np.isfinite(mat)):
                raise StateInvariantError("matrix entries must be finite")
            if np.max(np.abs(mat - mat.conj().T)) > ATOL:
                raise StateInvariantError("density matrix is not Hermitian")
            tr = np.trace(mat).real
            if abs(tr - 1.0) > ATOL:
                raise StateInvariantError(f"trace {tr:.12g} differs from 1")
            lo = np.linalg.eigvalsh(mat).min()
            if lo < -ATOL:
                raise StateInvariantError(f"density matrix has eigenvalue {lo:.3g} < 0")
        self.shape = shape
        self.matrix = _frozen(mat)

    def __repr__(self) -> str:
        return f"DensityOperator(labels={self.shape.labels}, dims={self.shape.dims})"

    def density(self) -> "DensityOperator":
        return self

    def rank(self, tol: float = 1e-12) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return abs(np.vdot(self.matrix, self.matrix).real - 1.0) < tol


State = Union[PureState, DensityOperator]


@dataclass(frozen=True)
class Ensemble:
    """Pure-state decomposition ``{p_i, |psi_i>}`` over a common shape."""

    probabilities: tuple[float, ...]
    members: tuple[PureState, ...]

    def __post_init__(self):
        if len(self.probabilities) != len(self.members) or not self.members:
            raise InvalidArgumentError("ensemble needs matching nonempty members")
        if any(p <= 0 for p in self.probabilities):
            raise InvalidArgumentError("ensemble probabilities must be positive")
        if abs(sum(self.probabilities) - 1.0) > ATOL:
            raise InvalidArgumentError("ensemble probabilities must sum to 1")
        if len({m.shape for m in self.members}) != 1:
            raise InvalidArgumentError("ensemble members must share one shape")

    @property
    def shape(self) -> SystemShape:
        return self.members[0].shape

    def __len__(self) -> int:
        return len(self.members)

    def matrix(self) -> np.ndarray:
        amps = np.array([m.amplitudes for m in self.members])
        p = np.asarray(self.probabilities)
        return (amps.T * p) @ amps.conj()

    def reconstructs(self, rho: DensityOperator, atol: float = RECONSTRUCT_ATOL) -> bool:
        return float(np.max(np.abs(self.matrix() - rho.matrix))) <= atol


def _check_indices(shape: SystemShape, indices: Iterable[int], what: str) -> tuple[int, ...]:
    idx = tuple(sorted(set(int(i) for i in indices)))
    if not idx:
        raise InvalidArgumentError(f"{what} must be nonempty")
    if idx[0] < 0 or idx[-1] >= shape.m:
        raise InvalidArgumentError(f"{what} {idx} out of range for {shape.m} subsystems")
    return idx


def partial_trace(state: State, keep: Iterable[int]) -> DensityOperator:
    """Reduced state on ``keep`` (in ascending index order)."""
    shape = state.shape
    keep = _check_indices(shape, keep, "keep")
    drop = [i for i in range(shape.m) if i not in keep]
    sub = shape.sub(keep)
    if isinstance(state, PureState):
        t = state.tensor().transpose(list(keep) + drop).reshape(sub.dim, -1)
        return DensityOperator(sub, t @ t.conj().T, check=False)
    m = shape.m
    t = state.matrix.reshape(shape.dims * 2)
    letters = string.ascii_letters
    row = [letters[i] for i in range(m)]
    col = [letters[m + i] if i in keep else letters[i] for i in range(m)]
    out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
    red = np.einsum("".join(row) + "".join(col) + "->" + out, t)
    return DensityOperator(sub, red.reshape(sub.dim, sub.dim), check=False)


def partial_transpose(rho: State, subset: Iterable[int]) -> np.ndarray:
    """Transpose the tensor factors in ``subset``; result may be non-PSD."""
    rho = rho.density()
    shape = rho.shape
    subset = _check_indices(shape, subset, "subset")
    m = shape.m
    axes = list(range(2 * m))
    for i in subset:
        axes[i], axes[m + i] = axes[m + i], axes[i]
    t = rho.matrix.reshape(shape.dims * 2).transpose(axes)
    return np.ascontiguousarray(t.reshape(shape.dim, shape.dim))


def grouped_shape(shape: SystemShape, partition: Partition) -> SystemShape:
    shape.check_partition(partition)
    sep = "" if all(len(s) == 1 for s in shape.labels) else "+"
    return SystemShape(
        [math.prod(shape.dims[i] for i in b) for b in partition.blocks],
        [sep.join(shape.labels[i] for i in b) for b in partition.blocks],
    )


def regroup(state: State, partition: Partition) -> State:
    """View ``state`` as a k-partite state over the partition's blocks.

    Subsystems outside the partition are traced out first, so a pure input
    with discarded parties becomes a ``DensityOperator``.
    """
    shape = state.shape
    new_shape = grouped_shape(shape, partition)
    order = [i for b in partition.blocks for i in b]
    if not partition.covers(shape.m):
        state = partial_trace(state, partition.support)
        pos = {i: n for n, i in enumerate(sorted(partition.support))}
        order = [pos[i] for i in order]
        shape = state.shape
    if isinstance(state, PureState):
        amps = state.tensor().transpose(order).reshape(-1)
        return PureState(new_shape, amps, normalize=False)
    m = shape.m
    t = state.matrix.reshape(shape.dims * 2).transpose(order + [m + i for i in order])
    return DensityOperator(new_shape, t.reshape(new_shape.dim, new_shape.dim), check=False)


def ungroup(state: State, partition: Partition, shape: SystemShape) -> State:
    """Inverse of ``regroup`` for a partition covering every subsystem of ``shape``."""
    if not partition.covers(shape.m):
        raise InvalidArgumentError("ungroup needs a partition covering all subsystems")
    order = [i for b in partition.blocks for i in b]
    inv = list(np.argsort(order))
    dims = [shape.dims[i] for i in order]
    if isinstance(state, PureState):
        amps = state.amplitudes.reshape(dims).transpose(inv).reshape(-1)
        return PureState(shape, amps)
    m = shape.m
    t = state.matrix.reshape(dims * 2).transpose(inv + [m + i for i in inv])
    return DensityOperator(shape, t.reshape(shape.dim, shape.dim), check=False)


# --------------------------------------------------------------------------- #
# constructors

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random d x d unitary (QR of a Ginibre matrix with phase fix)."""
    rng = _rng(seed)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * ph


def random_pure(shape: SystemShape, seed=None) -> PureState:
    rng = _rng(seed)
    z = rng.standard_normal(shape.dim) + 1j * rng.standard_normal(shape.dim)
    return PureState(shape, z, normalize=True)


def random_density(shape: SystemShape, rank: int | None = None, seed=None) -> DensityOperator:
    """Marginal of a Haar pure state on ``shape`` x ancilla(rank)."""
    rank = shape.dim if rank is None else int(rank)
    if rank < 1 or rank > shape.dim:
        raise InvalidArgumentError(f"rank must be in [1, {shape.dim}], got {rank}")
    rng = _rng(seed)
    g = rng.standard_normal((shape.dim, rank)) + 1j * rng.standard_normal((shape.dim, rank))
    g /= np.linalg.norm(g)
    rho = g @ g.conj().T
    return DensityOperator(shape, (rho + rho.conj().T) / 2, check=False)


def product(*states: State) -> State:
    """Tensor product, concatenating shapes in argument order."""
    labels = [s for st in states for s in st.shape.labels]
    dims = [d for st in states for d in st.shape.dims]
    if len(set(labels)) != len(labels):
        labels = None
    shape = SystemShape(dims, labels)
    if all(isinstance(s, PureState) for s in states):
        v = np.ones(1, dtype=complex)
        for s in states:
            v = np.kron(v, s.amplitudes)
        return PureState(shape, v, normalize=True)
    mat = np.ones((1, 1), dtype=complex)
    for s in states:
        mat = np.kron(mat, s.density().matrix)
    return DensityOperator(shape, mat, check=False)


def apply_local(state: State, unitaries: Sequence[np.ndarray | None]) -> State:
    """Apply one operator per subsystem (``None`` leaves a factor untouched)."""
    shape = state.shape
    if len(unitaries) != shape.m:
        raise InvalidArgumentError("need one operator (or None) per subsystem")
    full = np.ones((1, 1), dtype=complex)
    for d, u in zip(shape.dims, unitaries):
        full = np.kron(full, np.eye(d) if u is None else u)
    if isinstance(state, PureState):
        return PureState(shape, full @ state.amplitudes, normalize=True)
    return DensityOperator(shape, full @ state.matrix @ full.conj().T, check=False)


def basis(shape: SystemShape, digits: Sequence[int]) -> PureState:
    v = np.zeros(shape.dim, dtype=complex)
    v[np.ravel_multi_index(tuple(digits), shape.dims)] = 1
    return PureState(shape, v)


def from_terms(shape: SystemShape, terms: dict[str, complex], normalize: bool = False) -> PureState:
    """Build ``sum c |digits>`` from a ``{"0101": c}`` mapping."""
    v = np.zeros(shape.dim, dtype=complex)
    for key, c in terms.items():
        v[np.ravel_multi_index(tuple(int(ch) for ch in key), shape.dims)] += c
    return PureState(shape, v, normalize=normalize)


def ghz(n: int, d: int = 2) -> PureState:
    shape = SystemShape([d] * n)
    return from_terms(shape, {str(k) * n: 1.0 for k in range(d)}, normalize=True)


def w_state(n: int) -> PureState:
    shape = SystemShape.qubits(n)
    terms = {"".join("1" if j == i else "0" for j in range(n)): 1.0 for i in range(n)}
    return from_terms(shape, terms, normalize=True)


def mixture(weights: Sequence[float], states: Sequence[State]) -> DensityOperator:
    if len(weights) != len(states) or not states:
        raise InvalidArgumentError("mixture needs matching weights and states")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1) > ATOL:
        raise InvalidArgumentError("mixture weights must be a probability vector")
    mat = sum(p * s.density().matrix for p, s in zip(w, states))
    return DensityOperator(states[0].shape, mat)
