"""Smallest eigenpairs of the generalized problem S x = lambda M x."""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import ConvergenceError, DomainError, IndefiniteOperatorError
from .mesh import FemFunction


@dataclass(frozen=True)
class EigenPair:
    """Eigenvalue with its M-normalized eigenfunction and residual
    max|S phi - lambda M phi|."""

    value: float
    phi: FemFunction
    residual: float


def smallest_eigenpairs(gram, k, tol=1e-10):
    """The k smallest eigenpairs, ascending, with M-orthonormal eigenfunctions."""
    n = gram.n
    if not 1 <= k <= n:
        raise DomainError(f"requested {k} eigenpairs of an order-{n} problem")
    try:
        vals, vecs = sla.eigh(gram.S, gram.M, subset_by_index=[0, k - 1])
    except sla.LinAlgError as exc:
        raise IndefiniteOperatorError(f"generalized eigensolve failed: {exc}") from exc
    pairs = []
    for j in range(k):
        phi = vecs[:, j]
        res = float(np.max(np.abs(gram.S @ phi - vals[j] * (gram.M @ phi))))
        scale = float(np.max(np.abs(gram.S @ phi)))
        if res > max(tol, 1e3 * np.finfo(float).eps) * max(scale, 1.0):
            raise ConvergenceError(
                f"eigenpair {j} residual {res:.3e} exceeds tolerance", residual=res
            )
        pairs.append(EigenPair(float(vals[j]), FemFunction(gram.mesh, phi), res))
    return pairs


def sign_normalize(pair):
    """Flip the eigenfunction sign so its largest-magnitude coefficient is positive."""
    coef = pair.phi.coefficients
    lead = coef[np.argmax(np.abs(coef))]
    if lead < 0.0:
        return EigenPair(pair.value, pair.phi.with_coefficients(-coef), pair.residual)
    return pair


def eigenspace_basis(pairs, index, cluster_rtol=1e-6):
    """M-orthonormal basis of the eigenspace containing eigenvalue number
    ``index`` (1-based), grouping eigenvalues closer than ``cluster_rtol``
    in relative gap.  Returns (basis functions, is_degenerate)."""
    values = np.array([p.value for p in pairs])
    distinct = [0]
    for j in range(1, len(values)):
        if values[j] - values[distinct[-1]] > cluster_rtol * max(abs(values[j]), 1.0):
            distinct.append(j)
    if index > len(distinct):
        raise DomainError(
            f"eigenvalue number {index} not resolved by {len(pairs)} computed pairs"
        )
    start = distinct[index - 1]
    end = distinct[index] if index < len(distinct) else len(values)
    members = [pairs[j].phi for j in range(start, end)]
    return members, len(members) > 1
