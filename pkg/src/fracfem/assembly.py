"""Assembly of the nonlocal Gram pair (stiffness + potential, mass).

The stiffness matrix collects the interaction inner products of the interior
hat functions.  In 1D every piece reduces to closed-form integrals of
bivariate polynomials against (y - x)^(-gamma); on uniform meshes the matrix
is Toeplitz and only the first row is computed.  In 2D the outer integral
uses the edge-midpoint rule and the inner one the Duffy substitution for
singular triangle pairs, plus an exterior-tail term per outer point.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .errors import DomainError
from .kernel import Kernel
from .mesh import FemFunction, Mesh1D, mesh_from_dict, mesh_to_dict
from .linalg import SymMatrix
from . import quadrature as quad
from .quadrature import BivariatePoly, elem_integral_1d, wedge_power_integral

_INF = math.inf


# ---------------------------------------------------------------------------
# Gram pair
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class GramPair:
    """Dense symmetric matrices of the nonlocal-plus-potential inner product
    (S) and the L2 inner product (M) over the interior P1 basis."""

    S: np.ndarray
    M: np.ndarray
    mesh: object
    kernel: Kernel
    _equad: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.S.shape[0]

    def element_quad(self, degree=6):
        if degree not in self._equad:
            self._equad[degree] = _ElementQuad(self.mesh, degree)
        return self._equad[degree]

    def to_dict(self):
        return {
            "mesh": mesh_to_dict(self.mesh),
            "s": self.kernel.s,
            "S": [float(v) for v in SymMatrix.from_dense(self.S).packed],
            "M": [float(v) for v in SymMatrix.from_dense(self.M).packed],
        }

    @classmethod
    def from_dict(cls, data):
        mesh = mesh_from_dict(data["mesh"])
        kern = Kernel(mesh.dim, float(data["s"]))
        n = mesh.n_interior
        s_mat = SymMatrix(n, np.asarray(data["S"], dtype=float)).to_dense()
        m_mat = SymMatrix(n, np.asarray(data["M"], dtype=float)).to_dense()
        return cls(s_mat, m_mat, mesh, kern)


def _as_potential(v):
    if v is None:
        return None
    if callable(v):
        return v
    const = float(v)
    if const == 0.0:
        return None
    return lambda x: const


# ---------------------------------------------------------------------------
# element quadrature (shared by mass/potential/nonlinear terms)
# ---------------------------------------------------------------------------

class _ElementQuad:
    """Per-element Gauss data on a mesh: effective weights, P1 basis values
    at the quadrature points and the element -> node incidence."""

    def __init__(self, mesh, degree):
        if isinstance(mesh, Mesh1D):
            xi, w = quad.gauss_legendre_01(degree)
            h = mesh.widths
            self.elems = np.column_stack(
                (np.arange(len(h)), np.arange(1, len(h) + 1))
            )
            self.basis = np.column_stack((1.0 - xi, xi))  # (nq, 2)
            self.weights = h[:, None] * w[None, :]  # (nE, nq)
            self.points = mesh.nodes[:-1, None] + h[:, None] * xi[None, :]
        else:
            rule = quad._TRI_RULES[degree if degree in quad._TRI_RULES else 6]
            lams = np.array([lam for _, lam in rule])
            w = np.array([wt for wt, _ in rule])
            self.elems = mesh.triangles
            self.basis = lams  # (nq, 3)
            areas = mesh.areas()
            self.weights = areas[:, None] * w[None, :]
            v = mesh.vertices
            self.points = np.einsum("ql,elc->eqc", lams, v[mesh.triangles])
        self.mesh = mesh
        n_nodes = len(mesh.nodes) if isinstance(mesh, Mesh1D) else len(mesh.vertices)
        self.n_nodes = n_nodes

    def values(self, u):
        """u at all quadrature points, shape (nE, nq)."""
        nv = u.node_values() if isinstance(u, FemFunction) else np.asarray(u)
        return nv[self.elems] @ self.basis.T

    def integrate(self, vals):
        return float(np.sum(self.weights * vals))

    def load_vector(self, vals, interior):
        """Vector of integrals of ``vals`` against each interior hat."""
        out = np.zeros(self.n_nodes)
        wv = self.weights * vals
        for a in range(self.elems.shape[1]):
            np.add.at(out, self.elems[:, a], wv @ self.basis[:, a])
        return out[interior]


# ---------------------------------------------------------------------------
# 1D stiffness
# ---------------------------------------------------------------------------

def _hat_affine(nodes, i, k):
    """Affine (a0, a1) of hat i restricted to cell [nodes[k], nodes[k+1]],
    or None when the hat vanishes there."""
    if k == i - 1:
        h = nodes[i] - nodes[i - 1]
        return (-nodes[i - 1] / h, 1.0 / h)
    if k == i:
        h = nodes[i + 1] - nodes[i]
        return (nodes[i + 1] / h, -1.0 / h)
    return None


def _hat_slope(nodes, i, k):
    aff = _hat_affine(nodes, i, k)
    return aff[1] if aff else 0.0


_ZERO = (0.0, 0.0)


def _h_entry_1d(nodes, i, j, gamma):
    """Interaction inner product of hats i <= j divided by the kernel constant."""
    total = 0.0
    if j > i + 1:
        # disjoint supports: four product rectangles with q = -phi_i(x) phi_j(y)
        for k in (i - 1, i):
            fx = _hat_affine(nodes, i, k)
            for l in (j - 1, j):
                fy = _hat_affine(nodes, j, l)
                p = BivariatePoly.product(
                    (-fx[0], -fx[1], 0.0), (fy[0], fy[1], 0.0)
                )
                total += elem_integral_1d(
                    nodes[k], nodes[k + 1], nodes[l], nodes[l + 1], gamma, p
                )
        return total

    lo, hi = i - 1, j + 1
    cells = range(lo, hi)
    for k in cells:
        h = nodes[k + 1] - nodes[k]
        total += (
            _hat_slope(nodes, i, k) * _hat_slope(nodes, j, k)
            * wedge_power_integral(h, gamma)
        )
    for k in cells:
        fi_x = _hat_affine(nodes, i, k) or _ZERO
        fj_x = _hat_affine(nodes, j, k) or _ZERO
        for l in cells:
            if l <= k:
                continue
            fi_y = _hat_affine(nodes, i, l) or _ZERO
            fj_y = _hat_affine(nodes, j, l) or _ZERO
            p = BivariatePoly.from_affine_factors(fi_x, fi_y, fj_x, fj_y)
            if np.all(p.coef == 0.0):
                continue
            total += elem_integral_1d(
                nodes[k], nodes[k + 1], nodes[l], nodes[l + 1], gamma, p
            )
    for k in cells:
        fi = _hat_affine(nodes, i, k)
        fj = _hat_affine(nodes, j, k)
        if fi is None or fj is None:
            continue
        prod_x = _affine_product(fi, fj)
        # pairs with the far right strip, and mirrored with the far left one
        total += elem_integral_1d(
            nodes[k], nodes[k + 1], nodes[hi], _INF, gamma,
            BivariatePoly.product(prod_x, (1.0, 0.0, 0.0)),
        )
        total += elem_integral_1d(
            -_INF, nodes[lo], nodes[k], nodes[k + 1], gamma,
            BivariatePoly.product((1.0, 0.0, 0.0), prod_x),
        )
    return total


def _affine_product(f, g):
    return (f[0] * g[0], f[0] * g[1] + f[1] * g[0], f[1] * g[1])


def _mass_1d(mesh):
    h = mesh.widths
    n = mesh.n_interior
    diag = (h[:-1] + h[1:]) / 3.0
    off = h[1:-1] / 6.0
    m = np.diag(diag)
    m += np.diag(off, 1) + np.diag(off, -1)
    return m


def assemble_1d(mesh, kern, potential=None):
    """Gram pair on an interval mesh."""
    if kern.dim != 1:
        raise DomainError("assemble_1d requires a 1-dimensional kernel")
    nodes = mesh.nodes
    n = mesh.n_interior
    gamma = kern.gamma
    if mesh.is_uniform():
        row = np.array([_h_entry_1d(nodes, 1, 1 + d, gamma) for d in range(n)])
        s_mat = kern.c * toeplitz(row)
    else:
        s_mat = np.zeros((n, n))
        for a in range(n):
            for b in range(a, n):
                s_mat[a, b] = s_mat[b, a] = kern.c * _h_entry_1d(
                    nodes, a + 1, b + 1, gamma
                )
    m_mat = _mass_1d(mesh)
    gram = GramPair(s_mat, m_mat, mesh, kern)
    _add_potential(gram, potential)
    return gram


def _add_potential(gram, potential):
    pot = _as_potential(potential)
    if pot is None:
        return
    eq = gram.element_quad(6)
    vvals = np.array([[pot(x) for x in row] for row in eq.points])
    interior_of = {node: k for k, node in enumerate(gram.mesh.interior)}
    wv = eq.weights * vvals
    nloc = eq.elems.shape[1]
    for a in range(nloc):
        for b in range(nloc):
            contrib = (wv * eq.basis[None, :, a] * eq.basis[None, :, b]).sum(axis=1)
            for e, val in enumerate(contrib):
                ia = interior_of.get(int(eq.elems[e, a]))
                ib = interior_of.get(int(eq.elems[e, b]))
                if ia is not None and ib is not None:
                    gram.S[ia, ib] += val


# ---------------------------------------------------------------------------
# 2D stiffness
# ---------------------------------------------------------------------------

def _tri_geometry(mesh):
    v = mesh.vertices
    t = mesh.triangles
    p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
    twice_area = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (
        p1[:, 1] - p0[:, 1]
    ) * (p2[:, 0] - p0[:, 0])
    grads = np.empty((len(t), 3, 2))
    for a, (q1, q2) in enumerate(((p1, p2), (p2, p0), (p0, p1))):
        grads[:, a, 0] = (q1[:, 1] - q2[:, 1]) / twice_area
        grads[:, a, 1] = (q2[:, 0] - q1[:, 0]) / twice_area
    return twice_area / 2.0, grads


def assemble_2d(
    mesh,
    kern,
    potential=None,
    duffy_order=12,
    inner_degree=4,
    exterior_radius=None,
    annulus_refinement=2,
):
    """Gram pair on a triangulation."""
    if kern.dim != 2:
        raise DomainError("assemble_2d requires a 2-dimensional kernel")
    n = mesh.n_interior
    verts = mesh.vertices
    tris = mesh.triangles
    nt = len(tris)
    areas, grads = _tri_geometry(mesh)
    interior_of = np.full(len(verts), -1, dtype=int)
    interior_of[mesh.interior_vertices] = np.arange(n)
    s = kern.s
    half_c = 0.5 * kern.c

    rule = quad._TRI_RULES[inner_degree]
    in_lams = np.array([lam for _, lam in rule])
    in_w = np.array([wt for wt, _ in rule])

    s_mat = np.zeros((n, n))
    s_flat = s_mat.ravel()
    glob_idx = interior_of[tris]  # (nt, 3)

    def scatter(nodes_glob, local):
        idx = interior_of[nodes_glob]
        keep = idx >= 0
        ii = idx[keep]
        s_mat[np.ix_(ii, ii)] += local[np.ix_(keep, keep)]

    tri_pts = verts[tris]  # (nt, 3, 2)
    mids = 0.5 * (tri_pts + np.roll(tri_pts, -1, axis=1))  # (nt, 3, 2)
    inner_pts = np.einsum("ql,tlc->tqc", in_lams, tri_pts)  # (nt, nq, 2)

    # a midpoint of edge em of T_a lies in the closure of exactly two
    # triangles: T_a itself and the neighbor across that edge
    neighbor = _edge_neighbors(tris)

    def singular_inner(y, b):
        """Local 3x3 matrix of the reduced inner integral over triangle b."""
        local = np.zeros((3, 3))
        gb = grads[b]
        for sign, foot, far in quad.split_right_triangles(tri_pts[b], y):
            dirs, w = quad.duffy_direction_rule(y, foot, far, s, duffy_order)
            proj = gb @ dirs.T  # (3, m)
            local += sign * (proj * w[None, :]) @ proj.T
        return half_c * local

    lam_mids = np.zeros((3, 3))
    for em in range(3):
        lam_mids[em, em] = 0.5
        lam_mids[em, (em + 1) % 3] = 0.5

    # interaction over all unordered pairs of mesh triangles, outer integral
    # by edge midpoints of the lower-index triangle
    for a in range(nt):
        wa = areas[a] / 3.0
        ia = glob_idx[a]
        for em in range(3):
            y = mids[a, em]
            lam_y = lam_mids[em]
            # singular inner integrals (outer point on the inner triangle)
            _scatter_local(s_flat, n, ia, ia, wa * singular_inner(y, a))
            nb = neighbor[a, em]
            if nb > a:
                _scatter_local(
                    s_flat, n, glob_idx[nb], glob_idx[nb],
                    2.0 * wa * singular_inner(y, nb),
                )
            # smooth inner integrals, batched over the remaining pairs
            bs = np.arange(a + 1, nt)
            if nb > a:
                bs = bs[bs != nb]
            if len(bs) == 0:
                continue
            diff = inner_pts[bs] - y[None, None, :]
            r2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
            wk = (
                (2.0 * wa * half_c)
                * in_w[None, :]
                * areas[bs, None]
                * r2 ** (-0.5 * kern.gamma)
            )
            # expand (phi_i(x) - phi_i(y))(phi_j(x) - phi_j(y)) into blocks
            # over the inner-triangle and outer-triangle nodes
            rows_b = glob_idx[bs]
            f_bb = np.einsum("bq,qi,qj->bij", wk, in_lams, in_lams)
            wlam = wk @ in_lams
            f_ba = -wlam[:, :, None] * lam_y[None, None, :]
            _scatter_batch(s_flat, n, rows_b, rows_b, f_bb)
            rows_a = np.broadcast_to(ia, rows_b.shape)
            _scatter_batch(s_flat, n, rows_b, rows_a, f_ba)
            _scatter_batch(s_flat, n, rows_a, rows_b, np.transpose(f_ba, (0, 2, 1)))
            _scatter_local(
                s_flat, n, ia, ia,
                float(wk.sum()) * np.outer(lam_y, lam_y),
            )

    # exterior interactions: 2 * integral over Omega of phi_i phi_j ext(x)
    ext_cache = {}
    for a in range(nt):
        wa = areas[a] / 3.0
        glob = tris[a]
        if np.all(interior_of[glob] < 0):
            continue
        for em in range(3):
            i1, i2 = glob[em], glob[(em + 1) % 3]
            if interior_of[i1] < 0 and interior_of[i2] < 0:
                continue  # both hats vanish at this midpoint
            y = mids[a, em]
            key = (round(float(y[0]), 13), round(float(y[1]), 13))
            if key not in ext_cache:
                ext_cache[key] = quad.exterior_integral(
                    y, mesh, kern, exterior_radius, annulus_refinement
                )
            ext = ext_cache[key]
            local = np.zeros((3, 3))
            lam_y = np.zeros(3)
            lam_y[em] = 0.5
            lam_y[(em + 1) % 3] = 0.5
            local += np.outer(lam_y, lam_y) * (2.0 * wa * ext)
            scatter(glob, local)

    # exact symmetry: keep the upper triangle, mirror it down
    s_mat = np.triu(s_mat) + np.triu(s_mat, 1).T
    m_mat = _mass_2d(mesh, interior_of, areas)
    gram = GramPair(s_mat, m_mat, mesh, kern)
    _add_potential(gram, potential)
    return gram


def _edge_neighbors(tris):
    """neighbor[t, em] = triangle across edge em of t, or -1 on the boundary."""
    owners = {}
    for t, tri in enumerate(tris):
        for em in range(3):
            key = tuple(sorted((int(tri[em]), int(tri[(em + 1) % 3]))))
            owners.setdefault(key, []).append(t)
    neighbor = np.full((len(tris), 3), -1, dtype=int)
    for t, tri in enumerate(tris):
        for em in range(3):
            key = tuple(sorted((int(tri[em]), int(tri[(em + 1) % 3]))))
            for other in owners[key]:
                if other != t:
                    neighbor[t, em] = other
    return neighbor


def _scatter_local(s_flat, n, rows, cols, local):
    mask = (rows[:, None] >= 0) & (cols[None, :] >= 0)
    flat = rows[:, None] * n + cols[None, :]
    np.add.at(s_flat, flat[mask], local[mask])


def _scatter_batch(s_flat, n, rows, cols, vals):
    """Accumulate (B, 3, 3) blocks at rows (B, 3) x cols (B, 3)."""
    mask = (rows[:, :, None] >= 0) & (cols[:, None, :] >= 0)
    flat = rows[:, :, None] * n + cols[:, None, :]
    np.add.at(s_flat, flat[mask], vals[mask])


def _mass_2d(mesh, interior_of, areas):
    n = mesh.n_interior
    m_mat = np.zeros((n, n))
    local = np.full((3, 3), 1.0 / 12.0)
    np.fill_diagonal(local, 1.0 / 6.0)
    for t, tri in enumerate(mesh.triangles):
        idx = interior_of[tri]
        keep = idx >= 0
        ii = idx[keep]
        m_mat[np.ix_(ii, ii)] += areas[t] * local[np.ix_(keep, keep)]
    return m_mat


def assemble(mesh, kern, potential=None, **kwargs):
    if isinstance(mesh, Mesh1D):
        return assemble_1d(mesh, kern, potential)
    return assemble_2d(mesh, kern, potential, **kwargs)


# ---------------------------------------------------------------------------
# inner products, norms, nodal parts
# ---------------------------------------------------------------------------

def _check_same_mesh(gram, *fns):
    for u in fns:
        if u.mesh is not gram.mesh:
            raise DomainError("function and Gram pair live on different meshes")


def h_inner(gram, u, v):
    """Inner product induced by the assembled operator (stiffness + potential)."""
    _check_same_mesh(gram, u, v)
    return float(u.coefficients @ gram.S @ v.coefficients)


def l2_inner(gram, u, v):
    _check_same_mesh(gram, u, v)
    return float(u.coefficients @ gram.M @ v.coefficients)


def lp_power(gram, u, p, degree=6):
    """Integral of |u|^p by per-element Gauss quadrature."""
    _check_same_mesh(gram, u)
    eq = gram.element_quad(degree)
    vals = eq.values(u)
    return eq.integrate(np.abs(vals) ** p)


def lp_norm(gram, u, p, degree=6):
    return lp_power(gram, u, p, degree) ** (1.0 / p)


def nonlinear_load(gram, u, p, degree=6):
    """Vector of integrals of |u|^(p-2) u against each interior hat."""
    _check_same_mesh(gram, u)
    eq = gram.element_quad(degree)
    vals = eq.values(u)
    g = np.abs(vals) ** (p - 2.0) * vals
    return eq.load_vector(g, gram.mesh.interior)


def positive_part(u):
    """Nodal clamp max(coefficients, 0); stays in the P1 space."""
    return u.with_coefficients(np.maximum(u.coefficients, 0.0))


def negative_part(u):
    """Nodal clamp min(coefficients, 0); positive_part + negative_part = u."""
    return u.with_coefficients(np.minimum(u.coefficients, 0.0))
