"""Dense LU solve for the small MNA systems of this package."""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack

from .errors import SingularMatrix

#: Pivots at or below this fraction of ||A||_inf are treated as zero.
PIVOT_RTOL = 1e-14

_getrf = lapack.dgetrf
_getrs = lapack.dgetrs


class LUFactors:
    """LU factors of ``A`` with partial pivoting, checked for singularity."""

    __slots__ = ("A", "lu", "piv", "norm")

    def __init__(self, A: np.ndarray):
        self.A = A
        self.norm = float(np.abs(A).sum(axis=1).max()) if A.size else 0.0
        lu, piv, info = _getrf(A)
        if info < 0:
            raise ValueError(f"dgetrf: illegal argument {-info}")
        if self.norm == 0.0 or min(map(abs, lu.diagonal().tolist())) <= PIVOT_RTOL * self.norm:
            raise SingularMatrix(f"pivot below {PIVOT_RTOL:g} * ||A||_inf ({self.norm:.3g})")
        self.lu, self.piv = lu, piv

    def solve(self, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(x, A x - b)``.

        One step of iterative refinement is applied if the residual exceeds
        ``1e-10 (||A|| ||x|| + ||b||)``.
        """
        x, _ = _getrs(self.lu, self.piv, b)
        if not np.isfinite(x).all():
            raise SingularMatrix("solution overflowed; matrix is numerically singular")
        r = self.A @ x - b
        rmax = max(map(abs, r.tolist()))
        if rmax > 1e-10 * (self.norm * max(map(abs, x.tolist())) + max(map(abs, b.tolist()))):
            dx, _ = _getrs(self.lu, self.piv, r)
            x = x - dx
            r = self.A @ x - b
        return x, r


def lu_solve_residual(A: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``A x = b`` and return ``(x, A x - b)``."""
    return LUFactors(A).solve(b)


def linear_solve(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` by LU factorization with partial pivoting.

    Raises :class:`SingularMatrix` when a pivot is at or below
    ``PIVOT_RTOL * ||A||_inf``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or b.shape != (A.shape[0],):
        raise ValueError(f"shape mismatch: A{A.shape}, b{b.shape}")
    if A.size == 0:
        return np.zeros(0)
    return lu_solve_residual(A, b)[0]
