"""Reflection and rotation diagnostics for computed solutions.

Reflections are exact node permutations of a mirror-invariant mesh; the
90-degree rotation check (whose rotation is generally not a symmetry of the
triangulation) compares point values through P1 interpolation instead.
"""

import math

import numpy as np

from .errors import DomainError
from .mesh import Mesh1D

_REFLECTIONS_2D = {
    "x": lambda pts: np.column_stack((-pts[:, 0], pts[:, 1])),
    "y": lambda pts: np.column_stack((pts[:, 0], -pts[:, 1])),
}


def reflection_permutation(mesh, axis, tol=1e-12):
    """Permutation p with node i mapping to node p[i] under the reflection.

    For interval meshes the only reflection is about the midpoint (axis
    "x"); planar meshes support mirrors across the coordinate axes.  Raises
    when the mesh is not invariant within ``tol``.
    """
    if isinstance(mesh, Mesh1D):
        if axis != "x":
            raise DomainError(f"interval meshes only reflect about 'x', got {axis!r}")
        pts = mesh.nodes[:, None]
        reflected = (mesh.nodes[0] + mesh.nodes[-1]) - pts
        scale = mesh.diameter()
    else:
        if axis not in _REFLECTIONS_2D:
            raise DomainError(f"unknown reflection axis {axis!r}")
        pts = mesh.vertices
        reflected = _REFLECTIONS_2D[axis](pts)
        scale = mesh.diameter()
    perm = np.full(len(pts), -1, dtype=int)
    # match reflected nodes against original ones
    order = np.lexsort(pts.T)
    sorted_pts = pts[order]
    for i, q in enumerate(reflected):
        lo = np.searchsorted(sorted_pts[:, -1], q[-1] - tol * scale)
        hi = np.searchsorted(sorted_pts[:, -1], q[-1] + tol * scale, side="right")
        block = order[lo:hi]
        if len(block) == 0:
            raise DomainError("mesh is not invariant under the requested reflection")
        d = np.abs(pts[block] - q[None, :]).max(axis=1)
        j = int(np.argmin(d))
        if d[j] > tol * scale:
            raise DomainError("mesh is not invariant under the requested reflection")
        perm[i] = block[j]
    return perm


def reflect(u, axis, tol=1e-12):
    """The composition u o R as a P1 function on the same mesh."""
    perm = reflection_permutation(u.mesh, axis, tol)
    vals = u.node_values()
    return u.with_coefficients(vals[perm][u.mesh.interior])


def symmetry_report(gram, u, axis):
    """Residuals rho+- = |u o R -+ u|_M / |u|_M and the classification with
    the smaller residual."""
    ur = reflect(u, axis)
    m = gram.M
    norm = math.sqrt(float(u.coefficients @ m @ u.coefficients))
    if norm == 0.0:
        raise DomainError("symmetry classification needs a nonzero function")
    dplus = ur.coefficients - u.coefficients
    dminus = ur.coefficients + u.coefficients
    rho_plus = math.sqrt(max(float(dplus @ m @ dplus), 0.0)) / norm
    rho_minus = math.sqrt(max(float(dminus @ m @ dminus), 0.0)) / norm
    label = "symmetric" if rho_plus <= rho_minus else "antisymmetric"
    return {
        "rho_plus": rho_plus,
        "rho_minus": rho_minus,
        "classification": label,
        "residual": min(rho_plus, rho_minus),
    }


def rotation_residual(gram, u, degrees, quad_degree=4):
    """Relative L2 mismatch between u and u o rotation, by interpolation.

    Points whose rotate falls outside the meshed polygon read the zero
    extension; adequate for rotations that are not mesh symmetries.
    """
    if isinstance(u.mesh, Mesh1D):
        raise DomainError("rotation diagnostics need a planar mesh")
    ang = math.radians(degrees)
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    eq = gram.element_quad(quad_degree)
    pts = eq.points.reshape(-1, 2)
    vals = eq.values(u).reshape(-1)
    rotated_vals = u(pts @ rot.T)
    w = eq.weights.reshape(-1)
    num = float(np.sum(w * (rotated_vals - vals) ** 2))
    den = float(np.sum(w * vals**2))
    if den == 0.0:
        raise DomainError("rotation classification needs a nonzero function")
    return math.sqrt(num / den)
