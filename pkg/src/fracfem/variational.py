"""Energy functional, metric gradient and (nodal) Nehari projections.

The functional is E(u) = (1/2) <u, u> - (lam/p) |u|_p^p with <.,.> the
assembled stiffness-plus-potential inner product; its gradient in that
metric is u - A(u) where A(u) solves S a = lam * load(|u|^(p-2) u).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import assembly, linalg
from .errors import ConvergenceError, DomainError


def critical_exponent(dim, s):
    """Upper admissible exponent 2N/(N - 2s), infinite when N <= 2s."""
    if dim <= 2.0 * s:
        return math.inf
    return 2.0 * dim / (dim - 2.0 * s)


@dataclass(frozen=True)
class ProblemSpec:
    """Problem data: Gram pair, superquadratic exponent p and the scaling
    ``lam`` multiplying the nonlinearity."""

    gram: object
    p: float
    lam: float = 1.0

    def __post_init__(self):
        kern = self.gram.kernel
        p_max = critical_exponent(kern.dim, kern.s)
        if not 2.0 < self.p < p_max:
            raise DomainError(
                f"exponent must lie in (2, {p_max:.4g}) for N={kern.dim}, "
                f"s={kern.s}, got {self.p}"
            )
        if self.lam <= 0.0:
            raise DomainError(f"nonlinearity scale must be positive, got {self.lam}")


def _chol(gram):
    factor = getattr(gram, "_chol_factor", None)
    if factor is None:
        factor = linalg.cholesky(gram.S)
        gram._chol_factor = factor
    return factor


def energy(spec, u):
    g = spec.gram
    return 0.5 * assembly.h_inner(g, u, u) - (
        spec.lam / spec.p
    ) * assembly.lp_power(g, u, spec.p)


def gradient(spec, u):
    """Metric gradient u - A(u); <gradient, v> equals the derivative of the
    energy at u in the direction v."""
    g = spec.gram
    b = spec.lam * assembly.nonlinear_load(g, u, spec.p)
    a = linalg.solve(_chol(g), b)
    return u.with_coefficients(u.coefficients - a)


def gradient_norm(spec, grad):
    return math.sqrt(max(assembly.h_inner(spec.gram, grad, grad), 0.0))


def nehari_scale(spec, u):
    """The t > 0 with E'(t u)[t u] = 0: (<u,u> / (lam |u|_p^p))^(1/(p-2))."""
    g = spec.gram
    uu = assembly.h_inner(g, u, u)
    upp = assembly.lp_power(g, u, spec.p)
    if uu <= 0.0 or upp <= 0.0:
        raise DomainError("Nehari projection needs a nonzero function")
    return (uu / (spec.lam * upp)) ** (1.0 / (spec.p - 2.0))


def nehari_project(spec, u):
    """Scale u onto the Nehari manifold; returns (t, t * u)."""
    t = nehari_scale(spec, u)
    return t, u.with_coefficients(t * u.coefficients)


def nodal_nehari_project(spec, u, tol=1e-10, max_iter=100, start=(1.0, 1.0)):
    """Find t+ > 0, t- > 0 with w = t+ u+ + t- u- satisfying
    E'(w)[u+] = E'(w)[u-] = 0, by damped Newton from ``start``.

    Returns (t+, t-, w).  The input must have both clamped nodal parts
    nonzero; both residuals are driven below tol * <w, w>.
    """
    g = spec.gram
    up = assembly.positive_part(u)
    un = assembly.negative_part(u)
    if not np.any(up.coefficients > 0.0) or not np.any(un.coefficients < 0.0):
        raise DomainError("nodal Nehari projection needs a sign-changing function")

    s_pp = assembly.h_inner(g, up, up)
    s_nn = assembly.h_inner(g, un, un)
    s_pn = assembly.h_inner(g, up, un)
    eq = g.element_quad(6)
    vp = eq.values(up)
    vn = eq.values(un)
    p = spec.p
    lam = spec.lam

    def residual_jacobian(t):
        w = t[0] * vp + t[1] * vn
        absw = np.abs(w)
        f_w = absw ** (p - 2.0) * w
        fp_w = (p - 1.0) * absw ** (p - 2.0)
        f1 = t[0] * s_pp + t[1] * s_pn - lam * eq.integrate(f_w * vp)
        f2 = t[0] * s_pn + t[1] * s_nn - lam * eq.integrate(f_w * vn)
        j11 = s_pp - lam * eq.integrate(fp_w * vp * vp)
        j12 = s_pn - lam * eq.integrate(fp_w * vp * vn)
        j22 = s_nn - lam * eq.integrate(fp_w * vn * vn)
        return np.array([f1, f2]), np.array([[j11, j12], [j12, j22]])

    def wnorm2(t):
        return t[0] ** 2 * s_pp + 2.0 * t[0] * t[1] * s_pn + t[1] ** 2 * s_nn

    def cone_energy(t):
        w = t[0] * vp + t[1] * vn
        return 0.5 * wnorm2(t) - (lam / p) * eq.integrate(np.abs(w) ** p)

    # The residuals are the gradient of the cone energy t -> E(t+ u+ + t- u-),
    # whose unique critical point with positive components is its maximum
    # (the origin is also a root of the system, so raw Newton with only a
    # residual-decrease safeguard can fall into the trivial root).  Damped
    # ascent with Newton steps where the Hessian is negative definite is
    # immune to that and keeps the quadratic local rate.
    t = np.asarray(start, dtype=float)
    if t.shape != (2,) or t[0] <= 0.0 or t[1] <= 0.0:
        raise DomainError("Newton start must be a positive pair")
    f, jac = residual_jacobian(t)
    phi = cone_energy(t)
    for _ in range(max_iter):
        scale = max(wnorm2(t), 1e-300)
        if np.max(np.abs(f)) <= tol * scale:
            w = u.with_coefficients(t[0] * up.coefficients + t[1] * un.coefficients)
            return float(t[0]), float(t[1]), w
        newton = None
        if jac[0, 0] < 0.0 and np.linalg.det(jac) > 0.0:  # negative definite
            newton = np.linalg.solve(jac, -f)
            if newton @ f <= 0.0:
                newton = None
        step = newton if newton is not None else f * (max(t) / max(np.abs(f).max(), 1e-300))
        damp = 1.0
        for _ in range(60):
            cand = t + damp * step
            if cand[0] > 0.0 and cand[1] > 0.0:
                phi_c = cone_energy(cand)
                if phi_c >= phi - 1e-15 * max(abs(phi), 1.0):
                    f_c, jac_c = residual_jacobian(cand)
                    t, f, jac, phi = cand, f_c, jac_c, phi_c
                    break
            damp *= 0.5
        else:
            raise ConvergenceError("Newton damping failed to make progress")
    raise ConvergenceError(
        f"nodal projection did not converge in {max_iter} iterations",
        residual=float(np.max(np.abs(f))),
    )


def rescale_solution(u, lam, p):
    """Map a solution of the lam-scaled problem to the unscaled one:
    coefficients times lam^(1/(p-2))."""
    if p <= 2.0 or lam <= 0.0:
        raise DomainError("rescaling requires p > 2 and lam > 0")
    return u.with_coefficients(lam ** (1.0 / (p - 2.0)) * u.coefficients)
