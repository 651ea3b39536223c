"""High-level, serialization-friendly entry points for every front-end
operation (meshing, assembly, eigen reports, solves, studies).

Each function takes plain data and returns plain data so the HTTP service
and the command-line client share one implementation.
"""

import math

import numpy as np

from . import assembly, reduced, solver, spectral, symmetry, variational
from .errors import DomainError
from .kernel import Kernel
from .mesh import (
    Mesh1D,
    interpolate,
    make_disk_mesh,
    make_interval_mesh,
    mesh_from_dict,
    mesh_to_dict,
    prolong,
    refine,
)


def build_mesh(dim, a=-1.0, b=1.0, nodes=64, radius=1.0, level=2):
    if dim == 1:
        return make_interval_mesh(a, b, nodes)
    if dim == 2:
        return make_disk_mesh(radius, level)
    raise DomainError(f"unsupported dimension {dim}")


def resolve_mesh(mesh_data=None, **domain):
    if mesh_data is not None:
        return mesh_from_dict(mesh_data)
    return build_mesh(**domain)


def build_gram(mesh, s, v_const=0.0):
    kern = Kernel(mesh.dim, s)
    return assembly.assemble(mesh, kern, v_const if v_const else None)


def default_ground_start(mesh):
    if isinstance(mesh, Mesh1D):
        a, b = mesh.nodes[0], mesh.nodes[-1]
        return interpolate(
            mesh, lambda x: math.cos(math.pi * (2 * x - a - b) / (2 * (b - a)))
        )
    radius = mesh.diameter() / 2.0
    return interpolate(mesh, lambda p: math.cos(math.pi * math.hypot(*p) / (2 * radius)))


def default_nodal_start(mesh):
    if isinstance(mesh, Mesh1D):
        a, b = mesh.nodes[0], mesh.nodes[-1]
        return interpolate(mesh, lambda x: math.sin(math.pi * (2 * x - a - b) / (b - a)))
    radius = mesh.diameter() / 2.0
    return interpolate(
        mesh,
        lambda p: math.sin(math.pi * p[0] / radius)
        * math.cos(math.pi * math.hypot(*p) / (2 * radius)),
    )


def run_assemble(mesh, s, v_const=0.0):
    return build_gram(mesh, s, v_const).to_dict()


def run_eigen(mesh, s, k=2, v_const=0.0, tol=1e-10):
    gram = build_gram(mesh, s, v_const)
    pairs = spectral.smallest_eigenpairs(gram, k, tol)
    pairs[0] = spectral.sign_normalize(pairs[0])
    flag = False
    if k >= 2 and k < gram.n:
        probe = spectral.smallest_eigenpairs(gram, min(k + 1, gram.n), tol)
        vals = [p.value for p in probe]
        if len(vals) >= 3 and (vals[2] - vals[1]) < 1e-6 * abs(vals[1]):
            flag = True
    return {
        "lambdas": [p.value for p in pairs],
        "residuals": [p.residual for p in pairs],
        "phis": [[float(c) for c in p.phi.coefficients] for p in pairs],
        "second_eigenvalue_multiple": flag,
        "mesh": mesh_to_dict(mesh),
    }


def run_solve_linear(mesh, s, f_const=1.0, v_const=0.0):
    gram = build_gram(mesh, s, v_const)
    u = solver.solve_linear(gram, f_const)
    return solver.solution_to_dict(u, s)


def run_ground_state(mesh, s, p, v_const=0.0, lam=1.0, tol=1e-2, max_iter=2000):
    gram = build_gram(mesh, s, v_const)
    spec = variational.ProblemSpec(gram, p, lam)
    report = solver.mountain_pass(spec, default_ground_start(mesh), tol, max_iter)
    return _solve_payload(report, s, p)


def run_nodal(mesh, s, p, v_const=0.0, lam=1.0, tol=1e-2, max_iter=2000):
    gram = build_gram(mesh, s, v_const)
    spec = variational.ProblemSpec(gram, p, lam)
    report = solver.modified_mountain_pass(spec, default_nodal_start(mesh), tol, max_iter)
    return _solve_payload(report, s, p)


def _solve_payload(report, s, p):
    u = report.solution
    out = solver.solution_to_dict(
        u, s, p=p, energy=report.energy, grad_norm=report.final_gradient_norm
    )
    out["iterations"] = report.iterations
    out["wall_time"] = report.wall_time
    out["max"] = float(np.max(u.coefficients))
    out["min"] = float(np.min(u.coefficients))
    return out


def explicit_linear_solution(s, radius=1.0):
    """Closed-form solution of the unit-source problem on a centered ball."""
    coef = (
        2.0 ** (-2.0 * s)
        * math.gamma(0.5)
        / (math.gamma(0.5 + s) * math.gamma(1.0 + s))
    )
    return lambda x: coef * max(radius * radius - x * x, 0.0) ** s


def run_converge(s, sizes, a=-1.0, b=1.0):
    """Errors of the unit-source solve against the closed-form solution.

    The energy-norm error is measured on a once-refined mesh through the
    prolonged difference with the interpolated closed form; the L2 error uses
    the same-mesh interpolant difference in the mass norm.
    """
    if a != -1.0 or b != 1.0:
        raise DomainError("the closed-form reference lives on (-1, 1)")
    kern = Kernel(1, s)
    ustar = explicit_linear_solution(s)
    rows = []
    for m in sizes:
        mesh = make_interval_mesh(a, b, int(m))
        gram = assembly.assemble_1d(mesh, kern)
        u = solver.solve_linear(gram, 1.0)
        fine = refine(mesh)
        gram_f = assembly.assemble_1d(fine, kern)
        diff_f = prolong(u, fine).coefficients - interpolate(fine, ustar).coefficients
        err_h = math.sqrt(max(float(diff_f @ gram_f.S @ diff_f), 0.0))
        diff = u.coefficients - interpolate(mesh, ustar).coefficients
        err_l2 = math.sqrt(max(float(diff @ gram.M @ diff), 0.0))
        rows.append({"m": int(m), "err_h": err_h, "err_l2": err_l2})
    logm = np.log([r["m"] for r in rows])
    slope_h = float(np.polyfit(logm, np.log([r["err_h"] for r in rows]), 1)[0])
    slope_l2 = float(np.polyfit(logm, np.log([r["err_l2"] for r in rows]), 1)[0])
    return {"s": s, "rows": rows, "slope_h": slope_h, "slope_l2": slope_l2}


def run_limit(mesh, s, which, p_sequence, v_const=0.0, tol=1e-2, max_iter=2000):
    gram = build_gram(mesh, s, v_const)
    report = reduced.limit_study(gram, which, p_sequence, tol, max_iter)
    rows = []
    for p, ang, en, res, nrm, u in zip(
        report.p_sequence,
        report.angles,
        report.energies,
        report.limit_residuals,
        report.norms,
        report.solutions,
    ):
        row = {
            "p": p,
            "energy": en,
            "angle_degrees": math.degrees(ang),
            "limit_residual": None if math.isnan(res) else res,
            "norm": nrm,
        }
        if which == 1 and isinstance(mesh, Mesh1D):
            # pointwise ratio against the limiting eigenfunction, for plotting
            phi = report.basis[0].coefficients
            row["ratio"] = [float(c / f) for c, f in zip(u.coefficients, phi)]
        rows.append(row)
    return {
        "eigen_index": report.eigen_index,
        "eigenvalue": report.eigenvalue,
        "degenerate": report.degenerate,
        "mesh": mesh_to_dict(mesh),
        "rows": rows,
        "csv": reduced.limit_report_csv(report),
    }


def run_symmetry(solution_data, axis):
    u, meta = solver.solution_from_dict(solution_data)
    gram_m = _mass_only(u.mesh)
    if axis.startswith("rot"):
        deg = float(axis[3:] or 90.0)
        res = symmetry.rotation_residual(gram_m, u, deg)
        return {"axis": axis, "residual": res, "classification": "rotation"}
    return {"axis": axis, **symmetry.symmetry_report(gram_m, u, axis)}


def _mass_only(mesh):
    """Gram-pair stand-in carrying only the mass matrix and quadrature."""
    if isinstance(mesh, Mesh1D):
        m = assembly._mass_1d(mesh)
    else:
        areas = mesh.areas()
        interior_of = np.full(len(mesh.vertices), -1, dtype=int)
        interior_of[mesh.interior_vertices] = np.arange(mesh.n_interior)
        m = assembly._mass_2d(mesh, interior_of, areas)
    return assembly.GramPair(m * 0.0, m, mesh, Kernel(mesh.dim, 0.5))


def run_table(s_values, p=4.0, nodes=512, tol=1e-2, a=-1.0, b=1.0, max_iter=2000):
    """Ground-state and nodal characteristics per fractional order."""
    rows = []
    for s in s_values:
        mesh = make_interval_mesh(a, b, nodes)
        gram = build_gram(mesh, s)
        spec = variational.ProblemSpec(gram, p, 1.0)
        g_rep = solver.mountain_pass(spec, default_ground_start(mesh), tol, max_iter)
        n_rep = solver.modified_mountain_pass(
            spec, default_nodal_start(mesh), tol, max_iter
        )
        rows.append(
            {
                "s": float(s),
                "energy_ground": g_rep.energy,
                "max_ground": float(np.max(g_rep.solution.coefficients)),
                "energy_nodal": n_rep.energy,
                "max_nodal": float(np.max(n_rep.solution.coefficients)),
                "min_nodal": float(np.min(n_rep.solution.coefficients)),
            }
        )
    return {"p": p, "nodes": nodes, "rows": rows}
