"""Thin SVD and rank-truncated pseudoinverse least squares."""

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DegenerateInputError, NumericalError

# singular values below this fraction of the largest are never inverted
SIGMA_FLOOR = 1e-12


@dataclass(frozen=True)
class SvdFactors:
    """Thin factorisation ``A = U diag(s) Vt``."""

    left: np.ndarray
    singular_values: np.ndarray
    right_t: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singular_values) @ self.right_t

    def effective_rank(self, floor: float = SIGMA_FLOOR) -> int:
        s = self.singular_values
        if s.size == 0 or s[0] == 0.0:
            return 0
        return int(np.count_nonzero(s > floor * s[0]))


def as_real_matrix(a, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ContractError(f"{name} must be a non-empty 2-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} contains non-finite entries")
    return a


def svd(a) -> SvdFactors:
    a = as_real_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc
    return SvdFactors(u, s, vt)


def _check_pair(past: np.ndarray, future: np.ndarray):
    if past.shape[1] != future.shape[1]:
        raise ContractError(
            f"past and future must share column count, got {past.shape[1]} and {future.shape[1]}"
        )


def pinv_from_factors(future: np.ndarray, factors: SvdFactors, rank: int) -> np.ndarray:
    """``future @ V_r diag(1/s_r) U_r^T`` for the leading ``rank`` triplets.

    ``rank`` is clipped to the effective rank of the factorisation.
    """
    r = min(rank, factors.effective_rank())
    fv = future @ factors.right_t[:r].T
    return (fv / factors.singular_values[:r]) @ factors.left[:, :r].T


def truncated_pinv_solve(past, future, rank: int) -> np.ndarray:
    """Least-squares operator ``K`` with ``future ~ K @ past`` via a rank-``rank`` pseudoinverse.

    Singular values at or below ``1e-12 * sigma_max`` are discarded, so the
    rank actually used may be smaller than requested.
    """
    return truncated_pinv_fit(past, future, rank)[0]


def truncated_pinv_fit(past, future, rank: int) -> tuple[np.ndarray, int]:
    """Like :func:`truncated_pinv_solve` but also returns the rank actually used."""
    past = as_real_matrix(past, "past")
    future = as_real_matrix(future, "future")
    _check_pair(past, future)
    q, m = past.shape
    if not 1 <= rank <= min(q, m):
        raise ContractError(f"rank must lie in [1, {min(q, m)}], got {rank}")
    if not np.any(past):
        raise DegenerateInputError("past snapshot matrix is identically zero")
    factors = svd(past)
    return pinv_from_factors(future, factors, rank), min(rank, factors.effective_rank())


def effective_rank(a) -> int:
    return svd(a).effective_rank()
