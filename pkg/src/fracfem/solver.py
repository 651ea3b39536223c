"""Linear Dirichlet solves and the (modified) mountain-pass iterations.

Ground states are found by metric-gradient descent with each iterate pulled
back onto the Nehari manifold; least-energy nodal solutions use the nodal
Nehari projection instead and keep every iterate sign-changing.  The descent
is accepted by an Armijo test on the projected energy, so the energy is
non-increasing along the produced iterates.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import linalg, variational
from .errors import ConvergenceError, DegenerationError, DomainError
from .mesh import FemFunction

ARMIJO_C = 1e-4
MAX_HALVINGS = 40


@dataclass(frozen=True)
class SolveReport:
    solution: FemFunction
    iterations: int
    final_gradient_norm: float
    energy: float
    wall_time: float
    energy_trace: tuple = ()


def solve_linear(gram, f):
    """Solve the assembled system S u = b with b_i the load of ``f``."""
    source = f if callable(f) else (lambda _x, c=float(f): c)
    eq = gram.element_quad(6)
    if hasattr(gram.mesh, "nodes"):
        vals = np.vectorize(source)(eq.points)
    else:
        vals = np.apply_along_axis(source, 2, eq.points)
    b = eq.load_vector(vals, gram.mesh.interior)
    u = linalg.solve(variational._chol(gram), b)
    return FemFunction(gram.mesh, u)


def _descend(spec, u0, tol, max_iter, project, keep_sign_change):
    start = time.perf_counter()
    if np.max(np.abs(u0.coefficients)) == 0.0:
        raise DomainError("initial iterate must be nonzero")
    u = project(u0)
    e_u = variational.energy(spec, u)
    trace = [e_u]
    for it in range(max_iter):
        grad = variational.gradient(spec, u)
        gnorm = variational.gradient_norm(spec, grad)
        if gnorm <= tol:
            return SolveReport(
                u, it, gnorm, e_u, time.perf_counter() - start, tuple(trace)
            )
        gg = gnorm * gnorm
        alpha = 1.0
        accepted = None
        for _ in range(MAX_HALVINGS):
            cand_coef = u.coefficients - alpha * grad.coefficients
            cand = u.with_coefficients(cand_coef)
            if keep_sign_change and not _changes_sign(cand):
                alpha *= 0.5
                continue
            if np.max(np.abs(cand_coef)) == 0.0:
                alpha *= 0.5
                continue
            cand = project(cand)
            e_c = variational.energy(spec, cand)
            if e_c <= e_u - ARMIJO_C * alpha * gg:
                accepted = (cand, e_c)
                break
            alpha *= 0.5
        if accepted is None:
            if keep_sign_change and not _changes_sign(
                u.with_coefficients(u.coefficients - alpha * grad.coefficients)
            ):
                raise DegenerationError(
                    "iterate lost its sign change at the smallest step", best=u
                )
            raise ConvergenceError(
                f"line search stalled at gradient norm {gnorm:.3e}",
                best=u,
                residual=gnorm,
            )
        u, e_u = accepted
        trace.append(e_u)
    grad = variational.gradient(spec, u)
    gnorm = variational.gradient_norm(spec, grad)
    if gnorm <= tol:
        return SolveReport(
            u, max_iter, gnorm, e_u, time.perf_counter() - start, tuple(trace)
        )
    raise ConvergenceError(
        f"no convergence in {max_iter} iterations (gradient norm {gnorm:.3e})",
        best=u,
        residual=gnorm,
    )


def _changes_sign(u):
    c = u.coefficients
    return bool(np.any(c > 0.0) and np.any(c < 0.0))


def mountain_pass(spec, u0, tol=1e-2, max_iter=2000):
    """Ground-state iteration: Nehari-projected gradient descent from u0."""

    def project(u):
        return variational.nehari_project(spec, u)[1]

    return _descend(spec, u0, tol, max_iter, project, keep_sign_change=False)


def modified_mountain_pass(spec, u0, tol=1e-2, max_iter=2000):
    """Least-energy-nodal iteration: descent projected onto the nodal Nehari
    set; iterates are kept sign-changing."""
    if not _changes_sign(u0):
        raise DomainError("nodal iteration needs a sign-changing start")

    def project(u):
        _, _, w = variational.nodal_nehari_project(spec, u)
        return w

    return _descend(spec, u0, tol, max_iter, project, keep_sign_change=True)


# ---------------------------------------------------------------------------
# solution persistence
# ---------------------------------------------------------------------------

def solution_to_dict(u, s, p=None, energy=None, grad_norm=None):
    from .mesh import mesh_to_dict

    return {
        "mesh": mesh_to_dict(u.mesh),
        "coefficients": [float(v) for v in u.coefficients],
        "p": None if p is None else float(p),
        "s": float(s),
        "energy": None if energy is None else float(energy),
        "grad_norm": None if grad_norm is None else float(grad_norm),
    }


def solution_from_dict(data):
    from .mesh import mesh_from_dict

    mesh = mesh_from_dict(data["mesh"])
    return FemFunction(mesh, np.asarray(data["coefficients"], dtype=float)), data


def solution_dat_lines(u):
    """Two-column x, u(x) plot data over all mesh nodes (1D only)."""
    if not hasattr(u.mesh, "nodes"):
        raise DomainError("plot data emission is for interval meshes")
    vals = u.node_values()
    return [f"{x:.17g} {v:.17g}" for x, v in zip(u.mesh.nodes, vals)]
