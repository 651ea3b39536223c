"""Dense symmetric linear algebra: packed storage, Cholesky, matvec.

Factorizations are delegated to LAPACK (via scipy); this module owns the
packed upper-triangle representation used for persistence and the error
taxonomy expected by the solvers.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import DomainError, IndefiniteOperatorError


@dataclass(frozen=True)
class SymMatrix:
    """Symmetric matrix stored as the row-major packed upper triangle."""

    order: int
    packed: np.ndarray

    def __post_init__(self):
        packed = np.asarray(self.packed, dtype=float)
        expected = self.order * (self.order + 1) // 2
        if packed.shape != (expected,):
            raise DomainError(
                f"packed storage for order {self.order} needs {expected} values"
            )
        if not np.all(np.isfinite(packed)):
            raise DomainError("symmetric matrix entries must be finite")
        object.__setattr__(self, "packed", packed)

    @classmethod
    def from_dense(cls, a):
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        iu = np.triu_indices(n)
        return cls(n, a[iu])

    def to_dense(self):
        n = self.order
        out = np.zeros((n, n))
        iu = np.triu_indices(n)
        out[iu] = self.packed
        out.T[iu] = self.packed
        return out


def cholesky(a):
    """Lower Cholesky factor of a symmetric positive definite matrix."""
    dense = a.to_dense() if isinstance(a, SymMatrix) else np.asarray(a, dtype=float)
    try:
        return sla.cholesky(dense, lower=True)
    except sla.LinAlgError as exc:
        pivot = _failed_pivot(exc)
        raise IndefiniteOperatorError(
            f"matrix is not positive definite: {exc}", pivot=pivot
        ) from exc


def _failed_pivot(exc):
    import re

    m = re.search(r"(\d+)-th leading minor", str(exc))
    return int(m.group(1)) - 1 if m else None


def solve(factor, b):
    """Solve L L^T x = b given the lower factor L."""
    y = sla.solve_triangular(factor, b, lower=True)
    return sla.solve_triangular(factor, y, trans="T", lower=True)


def matvec(a, x):
    dense = a.to_dense() if isinstance(a, SymMatrix) else np.asarray(a, dtype=float)
    return dense @ np.asarray(x, dtype=float)
