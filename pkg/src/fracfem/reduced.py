"""The p -> 2 limit machinery: reduced energy on eigenspaces, its Nehari
scaling, and the convergence study of eigenvalue-scaled solutions toward
eigenfunctions."""

import math
from dataclasses import dataclass

import numpy as np

from . import assembly, solver, spectral, variational
from .errors import DomainError

_LOG_FLOOR = 1e-14  # quadrature values below this contribute 0 to u^2 ln|u|


def _safe_log_abs(vals):
    out = np.zeros_like(vals)
    mask = np.abs(vals) > _LOG_FLOOR
    out[mask] = np.log(np.abs(vals[mask]))
    return out


def reduced_energy(gram, u, degree=6):
    """E*(u) = (1/2) integral of u^2 - u^2 ln(u^2), with 0 ln 0 = 0."""
    eq = gram.element_quad(degree)
    vals = eq.values(u)
    integrand = vals**2 - vals**2 * 2.0 * _safe_log_abs(vals)
    return 0.5 * eq.integrate(integrand)


def log_weighted_integral(gram, u, v, degree=6):
    """Integral of u ln|u| v."""
    eq = gram.element_quad(degree)
    uv = eq.values(u)
    return eq.integrate(uv * _safe_log_abs(uv) * eq.values(v))


def reduced_nehari_scale(gram, v, degree=6):
    """t_v = exp(-integral(v^2 ln|v|) / |v|_2^2); t_v * v has vanishing
    reduced-energy derivative along itself."""
    eq = gram.element_quad(degree)
    vals = eq.values(v)
    denom = eq.integrate(vals**2)
    if denom <= 0.0:
        raise DomainError("reduced Nehari scaling needs a nonzero function")
    num = eq.integrate(vals**2 * _safe_log_abs(vals))
    return math.exp(-num / denom)


@dataclass(frozen=True)
class LimitReport:
    """Per-exponent record of the eigenvalue-scaled solves: principal angle
    to the target eigenspace (radians), scaled-problem energy and, for the
    second eigenspace, the residual max over basis v of |integral u ln|u| v|."""

    eigen_index: int
    eigenvalue: float
    p_sequence: tuple
    angles: tuple
    energies: tuple
    limit_residuals: tuple
    norms: tuple
    degenerate: bool
    solutions: tuple = ()
    basis: tuple = ()

    @property
    def limit_residual(self):
        return self.limit_residuals[-1] if self.limit_residuals else None


def principal_angle(gram, u, basis):
    """M-metric angle between u and the span of the (M-orthonormal) basis."""
    mu = gram.M @ u.coefficients
    norm2 = float(u.coefficients @ mu)
    proj2 = sum(float(b.coefficients @ mu) ** 2 for b in basis)
    cosang = math.sqrt(min(max(proj2 / norm2, 0.0), 1.0))
    return math.acos(min(1.0, cosang))


def limit_study(gram, eigen_index, p_sequence, tol=1e-2, max_iter=2000):
    """Solve the eigenvalue-scaled problem along ``p_sequence`` (descending
    toward 2) and record convergence toward the target eigenspace."""
    if eigen_index not in (1, 2):
        raise DomainError("the study targets the first or second eigenvalue")
    ps = tuple(float(p) for p in p_sequence)
    if any(p <= 2.0 for p in ps) or any(b <= a for a, b in zip(ps[1:], ps)):
        raise DomainError("exponent sequence must decrease strictly toward 2, all > 2")

    pairs = [
        spectral.sign_normalize(pr) if k == 0 else pr
        for k, pr in enumerate(
            spectral.smallest_eigenpairs(gram, min(eigen_index + 2, gram.n))
        )
    ]
    basis, degenerate = spectral.eigenspace_basis(pairs, eigen_index)
    lam = next(p.value for p in pairs if any(b is p.phi for b in basis))

    angles, energies, residuals, norms, solutions = [], [], [], [], []
    seed = basis[0]
    for p in ps:
        spec = variational.ProblemSpec(gram, p, lam)
        try:
            if eigen_index == 1:
                report = solver.mountain_pass(spec, seed, tol, max_iter)
            else:
                report = solver.modified_mountain_pass(spec, seed, tol, max_iter)
        except Exception as exc:
            exc.args = (f"solve at p={p} failed: {exc}",)
            raise
        u = report.solution
        solutions.append(u)
        angles.append(principal_angle(gram, u, basis))
        energies.append(report.energy)
        norms.append(math.sqrt(assembly.h_inner(gram, u, u)))
        if eigen_index == 2:
            residuals.append(
                max(abs(log_weighted_integral(gram, u, b)) for b in basis)
            )
        else:
            residuals.append(float("nan"))
    return LimitReport(
        eigen_index,
        float(lam),
        ps,
        tuple(angles),
        tuple(energies),
        tuple(residuals),
        tuple(norms),
        degenerate,
        tuple(solutions),
        tuple(basis),
    )


def limit_report_csv(report):
    lines = ["p,energy,angle_degrees,limit_residual"]
    for p, e, a, r in zip(
        report.p_sequence, report.energies, report.angles, report.limit_residuals
    ):
        rtxt = "" if math.isnan(r) else f"{r:.17g}"
        lines.append(f"{p:.17g},{e:.17g},{math.degrees(a):.17g},{rtxt}")
    return "\n".join(lines) + "\n"
