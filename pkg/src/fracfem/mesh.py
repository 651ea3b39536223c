"""Interval partitions, disk triangulations, refinement and P1 functions."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Mesh1D:
    """Partition x_0 < ... < x_{M-1} of an interval; P1 functions vanish at
    the end nodes and outside the interval."""

    nodes: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim != 1 or len(nodes) < 3:
            raise DomainError("a 1D mesh needs at least 3 nodes")
        if not np.all(np.diff(nodes) > 0.0):
            raise DomainError("1D mesh nodes must be strictly increasing")
        object.__setattr__(self, "nodes", nodes)

    @property
    def dim(self):
        return 1

    @property
    def interior(self):
        return np.arange(1, len(self.nodes) - 1)

    @property
    def n_interior(self):
        return len(self.nodes) - 2

    @property
    def widths(self):
        return np.diff(self.nodes)

    def diameter(self):
        return float(self.nodes[-1] - self.nodes[0])

    def is_uniform(self, rtol=1e-12):
        h = self.widths
        return bool(np.all(np.abs(h - h[0]) <= rtol * h[0]))


@dataclass(frozen=True)
class TriMesh:
    """Conforming triangulation with positively oriented triangles."""

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_vertices: np.ndarray = field(default=None)
    interior_vertices: np.ndarray = field(default=None)

    def __post_init__(self):
        verts = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        tris = np.asarray(self.triangles, dtype=int).reshape(-1, 3)
        # enforce positive orientation
        e1 = verts[tris[:, 1]] - verts[tris[:, 0]]
        e2 = verts[tris[:, 2]] - verts[tris[:, 0]]
        signed = 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        flip = signed < 0.0
        if np.any(flip):
            tris = tris.copy()
            tris[flip, 1], tris[flip, 2] = tris[flip, 2], tris[flip, 1].copy()
            signed = np.abs(signed)
        if np.any(signed <= 0.0):
            raise DomainError("triangulation contains a degenerate triangle")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "triangles", tris)
        boundary = _boundary_vertex_set(tris)
        object.__setattr__(self, "boundary_vertices", boundary)
        interior = np.setdiff1d(np.arange(len(verts)), boundary)
        object.__setattr__(self, "interior_vertices", interior)

    @property
    def dim(self):
        return 2

    @property
    def interior(self):
        return self.interior_vertices

    @property
    def n_interior(self):
        return len(self.interior_vertices)

    def areas(self):
        v = self.vertices
        t = self.triangles
        e1 = v[t[:, 1]] - v[t[:, 0]]
        e2 = v[t[:, 2]] - v[t[:, 0]]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def diameter(self):
        b = self.vertices[self.boundary_vertices]
        d2 = ((b[:, None, :] - b[None, :, :]) ** 2).sum(axis=2)
        return float(np.sqrt(d2.max()))


def _boundary_vertex_set(tris):
    from collections import defaultdict

    count = defaultdict(int)
    for tri in tris:
        for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            count[tuple(sorted(map(int, e)))] += 1
    onb = set()
    for (i, j), n in count.items():
        if n == 1:
            onb.add(i)
            onb.add(j)
        elif n > 2:
            raise DomainError("non-conforming triangulation (edge shared by >2 triangles)")
    return np.array(sorted(onb), dtype=int)


def make_interval_mesh(a, b, m):
    """Uniform partition of (a, b) with m nodes."""
    if not a < b:
        raise DomainError(f"interval endpoints must satisfy a < b, got ({a}, {b})")
    if m < 3:
        raise DomainError(f"need at least 3 nodes, got {m}")
    return Mesh1D(np.linspace(a, b, m))


def make_disk_mesh(radius, level=0):
    """Triangulation of the regular polygon inscribed in the disk of the
    given radius: a 6-triangle fan, refined ``level`` times with new boundary
    midpoints pushed onto the circle (so the polygon has 6 * 2^level sides)."""
    if radius <= 0.0:
        raise DomainError(f"disk radius must be positive, got {radius}")
    ang = np.arange(6) * (math.pi / 3.0)
    verts = np.vstack([[0.0, 0.0], np.column_stack((np.cos(ang), np.sin(ang))) * radius])
    tris = np.array([[0, k + 1, (k + 1) % 6 + 1] for k in range(6)])
    mesh = TriMesh(verts, tris)
    for _ in range(level):
        mesh = refine(mesh, boundary_map=lambda p: p * (radius / math.hypot(*p)))
    return mesh


def refine(mesh, boundary_map=None):
    """Uniform refinement: midpoint insertion in 1D, regular 1-to-4 split in 2D.

    ``boundary_map`` optionally repositions newly created boundary-edge
    midpoints (used to track a curved boundary).
    """
    if isinstance(mesh, Mesh1D):
        nodes = mesh.nodes
        mids = 0.5 * (nodes[:-1] + nodes[1:])
        out = np.empty(2 * len(nodes) - 1)
        out[0::2] = nodes
        out[1::2] = mids
        return Mesh1D(out)

    verts = list(map(tuple, mesh.vertices))
    from collections import defaultdict

    count = defaultdict(int)
    for tri in mesh.triangles:
        for e in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            count[tuple(sorted(map(int, e)))] += 1

    midpoint_index = {}

    def midpoint(i, j):
        key = tuple(sorted((int(i), int(j))))
        if key not in midpoint_index:
            p = 0.5 * (mesh.vertices[i] + mesh.vertices[j])
            if boundary_map is not None and count[key] == 1:
                p = np.asarray(boundary_map(p), dtype=float)
            midpoint_index[key] = len(verts)
            verts.append((float(p[0]), float(p[1])))
        return midpoint_index[key]

    tris = []
    for a, b, c in mesh.triangles:
        mab, mbc, mca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        tris.extend([(a, mab, mca), (b, mbc, mab), (c, mca, mbc), (mab, mbc, mca)])
    return TriMesh(np.array(verts), np.array(tris))


@dataclass(frozen=True)
class FemFunction:
    """P1 function given by one coefficient per interior node; implicitly
    zero at boundary nodes and outside the domain."""

    mesh: object
    coefficients: np.ndarray

    def __post_init__(self):
        coef = np.asarray(self.coefficients, dtype=float)
        if len(coef) != self.mesh.n_interior:
            raise DomainError(
                f"expected {self.mesh.n_interior} coefficients, got {len(coef)}"
            )
        object.__setattr__(self, "coefficients", coef)

    def node_values(self):
        """Values at every mesh node (zeros on the boundary)."""
        if isinstance(self.mesh, Mesh1D):
            out = np.zeros(len(self.mesh.nodes))
        else:
            out = np.zeros(len(self.mesh.vertices))
        out[self.mesh.interior] = self.coefficients
        return out

    def __call__(self, points):
        vals = self.node_values()
        if isinstance(self.mesh, Mesh1D):
            pts = np.atleast_1d(np.asarray(points, dtype=float))
            return np.interp(pts, self.mesh.nodes, vals, left=0.0, right=0.0)
        return _eval_p1_triangulation(self.mesh, vals, np.atleast_2d(points))

    def with_coefficients(self, coef):
        return FemFunction(self.mesh, coef)


def _eval_p1_triangulation(mesh, node_values, points):
    verts = mesh.vertices
    tris = mesh.triangles
    out = np.zeros(len(points))
    a = verts[tris[:, 0]]
    m1 = verts[tris[:, 1]] - a
    m2 = verts[tris[:, 2]] - a
    det = m1[:, 0] * m2[:, 1] - m1[:, 1] * m2[:, 0]
    tol = 1e-12
    for ip, p in enumerate(points):
        r = p - a
        l1 = (r[:, 0] * m2[:, 1] - r[:, 1] * m2[:, 0]) / det
        l2 = (m1[:, 0] * r[:, 1] - m1[:, 1] * r[:, 0]) / det
        l0 = 1.0 - l1 - l2
        inside = (l0 >= -tol) & (l1 >= -tol) & (l2 >= -tol)
        idx = np.flatnonzero(inside)
        if len(idx) == 0:
            continue  # outside the domain: extended by zero
        k = idx[0]
        lams = np.array([l0[k], l1[k], l2[k]])
        out[ip] = lams @ node_values[tris[k]]
    return out


def interpolate(mesh, fn):
    """FemFunction interpolating ``fn`` at the interior nodes."""
    if isinstance(mesh, Mesh1D):
        coef = np.array([fn(x) for x in mesh.nodes[mesh.interior]], dtype=float)
    else:
        coef = np.array([fn(p) for p in mesh.vertices[mesh.interior]], dtype=float)
    return FemFunction(mesh, coef)


def prolong(u, fine_mesh):
    """Re-express a P1 function on a once-refined mesh (exact embedding)."""
    if isinstance(u.mesh, Mesh1D):
        vals = u(fine_mesh.nodes[fine_mesh.interior])
    else:
        vals = u(fine_mesh.vertices[fine_mesh.interior])
    return FemFunction(fine_mesh, vals)


# ---------------------------------------------------------------------------
# mesh file format
# ---------------------------------------------------------------------------

def mesh_to_dict(mesh):
    if isinstance(mesh, Mesh1D):
        return {
            "dim": 1,
            "nodes": [[float(x)] for x in mesh.nodes],
            "elements": [[i, i + 1] for i in range(len(mesh.nodes) - 1)],
            "boundary": [0, len(mesh.nodes) - 1],
        }
    return {
        "dim": 2,
        "nodes": [[float(x), float(y)] for x, y in mesh.vertices],
        "elements": [[int(a), int(b), int(c)] for a, b, c in mesh.triangles],
        "boundary": [int(i) for i in mesh.boundary_vertices],
    }


def mesh_from_dict(data):
    dim = data.get("dim")
    nodes = np.asarray(data["nodes"], dtype=float)
    if dim == 1:
        return Mesh1D(nodes.reshape(-1))
    if dim == 2:
        return TriMesh(nodes, np.asarray(data["elements"], dtype=int))
    raise DomainError(f"unsupported mesh dimension {dim!r}")
