"""Spectral functionals of density operators: entropies, norms, fidelities.

Every function accepts a ``DensityOperator`` or a plain square array.
Eigenvalues in ``[-1e-10, 0)`` are clamped to zero before logarithms and
fractional powers; anything more negative is rejected.
"""
from __future__ import annotations

import numpy as np

from .errors import InvalidArgumentError, StateInvariantError
from .states import ATOL

LOG_BASES = {2: np.log(2.0), "e": 1.0}


def _matrix(rho) -> np.ndarray:
    mat = getattr(rho, "matrix", rho)
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {mat.shape}")
    return mat


def _hermitian(rho) -> np.ndarray:
    mat = _matrix(rho)
    if np.max(np.abs(mat - mat.conj().T), initial=0.0) > 1e-9:
        raise InvalidArgumentError("matrix is not Hermitian")
    return (mat + mat.conj().T) / 2


def spectrum(rho) -> np.ndarray:
    """Clamped eigenvalues of a PSD operator."""
    lam = np.linalg.eigvalsh(_hermitian(rho))
    if lam.min() < -ATOL:
        raise StateInvariantError(f"eigenvalue {lam.min():.3g} below clamping threshold")
    return np.clip(lam, 0.0, None)


def _log_scale(log_base) -> float:
    if log_base in (2, 2.0):
        return LOG_BASES[2]
    if log_base in ("e", np.e):
        return 1.0
    raise InvalidArgumentError(f"log_base must be 2 or 'e', got {log_base!r}")


def check_q(q: float) -> float:
    if not q > 1:
        raise InvalidArgumentError(f"Tsallis q must exceed 1, got {q}")
    return float(q)


def check_alpha(alpha: float) -> float:
    if not 0 < alpha < 1:
        raise InvalidArgumentError(f"Renyi alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


# spectrum kernels, vectorized over leading axes ---------------------------- #

def vn_from_spectrum(lam: np.ndarray, log_base=2) -> np.ndarray:
    lam = np.clip(lam, 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > 0, lam * np.log(np.where(lam > 0, lam, 1.0)), 0.0)
    return -terms.sum(axis=-1) / _log_scale(log_base)


def power_sum(lam: np.ndarray, a: float) -> np.ndarray:
    lam = np.clip(lam, 0.0, None)
    return np.where(lam > 0, np.where(lam > 0, lam, 1.0) ** a, 0.0).sum(axis=-1)


def tsallis_from_spectrum(lam: np.ndarray, q: float) -> np.ndarray:
    return (power_sum(lam, q) - 1.0) / (1.0 - q)


def renyi_from_spectrum(lam: np.ndarray, alpha: float) -> np.ndarray:
    return np.log(power_sum(lam, alpha)) / (1.0 - alpha)


# public scalar API --------------------------------------------------------- #

def von_neumann(rho, log_base=2) -> float:
    """-sum lambda log lambda, base 2 by default."""
    return max(float(vn_from_spectrum(spectrum(rho), log_base)), 0.0)


def tsallis(rho, q: float) -> float:
    return max(float(tsallis_from_spectrum(spectrum(rho), check_q(q))), 0.0)


def renyi(rho, alpha: float) -> float:
    """Renyi entropy with natural logarithm."""
    return max(float(renyi_from_spectrum(spectrum(rho), check_alpha(alpha))), 0.0)


def purity(rho) -> float:
    mat = _hermitian(rho)
    return float(np.vdot(mat, mat).real)


def trace_norm(mat) -> float:
    return float(np.abs(np.linalg.eigvalsh(_hermitian(mat))).sum())


def matrix_sqrt(rho) -> np.ndarray:
    """PSD square root; eigenvalues at the rounding floor are taken as exact zeros.

    Without the cut an eigenvalue of 1e-17 left over from rounding would
    contribute about 3e-9 after the square root.
    """
    lam, vec = np.linalg.eigh(_hermitian(rho))
    if lam.min() < -ATOL:
        raise StateInvariantError(f"eigenvalue {lam.min():.3g} below clamping threshold")
    floor = lam.size * np.finfo(float).eps * max(lam.max(), 0.0)
    lam = np.where(lam > floor, lam, 0.0)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    a, b = _hermitian(rho), _hermitian(sigma)
    if a.shape != b.shape:
        raise InvalidArgumentError(f"dimension mismatch {a.shape} vs {b.shape}")
    return a, b


def fidelity_uhlmann(rho, sigma) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, computed as the squared trace norm of sqrt(rho) sqrt(sigma).

    The two factors enter symmetrically, so swapping the arguments changes
    the value only at rounding level.
    """
    a, b = _pair(rho, sigma)
    sv = np.linalg.svd(matrix_sqrt(a) @ matrix_sqrt(b), compute_uv=False)
    return float(min(sv.sum() ** 2, 1.0))


def fidelity_sqrt(rho, sigma) -> float:
    return float(np.sqrt(fidelity_uhlmann(rho, sigma)))


def fidelity_affinity(rho, sigma) -> float:
    """A-fidelity [tr(sqrt(rho) sqrt(sigma))]^2."""
    a, b = _pair(rho, sigma)
    val = np.trace(matrix_sqrt(a) @ matrix_sqrt(b)).real
    return float(min(val ** 2, 1.0))
