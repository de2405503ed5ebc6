"""Structured P1 triangulations of the unit square."""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Mesh", "build_structured_mesh", "element_geometry", "boundary_nodes",
           "write_mesh_csv"]

MAX_LEVEL = 12


@dataclass(frozen=True, eq=False)
class Mesh:
    """Uniform triangulation of [0,1]^2 with h = 2**-level.

    Vertices are numbered row-major, ``index = j*(n+1) + i`` for the vertex
    at ``(i*h, j*h)``. Every cell is split along its lower-left to
    upper-right diagonal; both triangles are counter-clockwise.
    """

    level: int
    h: float
    vertices: np.ndarray      # (nno, 2)
    triangles: np.ndarray     # (nel, 3) int
    areas: np.ndarray         # (nel,)
    grads: np.ndarray         # (nel, 3, 2), constant hat-function gradients
    boundary: np.ndarray      # sorted vertex indices on the boundary
    is_boundary: np.ndarray = field(repr=False)

    @property
    def nno(self):
        return self.vertices.shape[0]

    @property
    def nel(self):
        return self.triangles.shape[0]

    @property
    def ndof(self):
        return 2 * self.nno

    @property
    def free_nodes(self):
        return np.flatnonzero(~self.is_boundary)

    def boundary_dofs(self):
        """Dof indices (node-major layout) of all boundary nodes."""
        b = self.boundary
        return np.sort(np.concatenate([2 * b, 2 * b + 1]))

    def centroids(self):
        return self.vertices[self.triangles].mean(axis=1)


def _geometry(vertices, triangles):
    p = vertices[triangles]                   # (nel, 3, 2)
    e1 = p[:, 1] - p[:, 0]
    e2 = p[:, 2] - p[:, 0]
    det = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0]
    areas = 0.5 * det
    # grad(lambda_i) = rot90(opposite edge) / (2 |K|)
    grads = np.empty(p.shape)
    for i in range(3):
        a = p[:, (i + 1) % 3]
        b = p[:, (i + 2) % 3]
        grads[:, i, 0] = (a[:, 1] - b[:, 1]) / det
        grads[:, i, 1] = (b[:, 0] - a[:, 0]) / det
    return areas, grads


def build_structured_mesh(level):
    """Build the level-``level`` mesh: (2**level)**2 cells, two triangles each.

    Raises
    ------
    ValueError
        If ``level`` is outside ``1..12``.
    """
    if int(level) != level or not 1 <= level <= MAX_LEVEL:
        raise ValueError(f"mesh level must be an integer in [1, {MAX_LEVEL}], got {level!r}")
    level = int(level)
    n = 2 ** level
    h = 1.0 / n
    # exact dyadic coordinates
    xs = np.arange(n + 1) / n
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    i, j = np.meshgrid(np.arange(n), np.arange(n))
    i = i.ravel()
    j = j.ravel()
    p00 = j * (n + 1) + i
    p10 = p00 + 1
    p01 = p00 + (n + 1)
    p11 = p01 + 1
    lower = np.column_stack([p00, p10, p11])
    upper = np.column_stack([p00, p11, p01])
    triangles = np.empty((2 * n * n, 3), dtype=np.int64)
    triangles[0::2] = lower
    triangles[1::2] = upper

    areas, grads = _geometry(vertices, triangles)

    on_bd = ((vertices[:, 0] == 0.0) | (vertices[:, 0] == 1.0)
             | (vertices[:, 1] == 0.0) | (vertices[:, 1] == 1.0))
    for arr in (vertices, triangles, areas, grads, on_bd):
        arr.setflags(write=False)
    bnd = np.flatnonzero(on_bd)
    bnd.setflags(write=False)
    return Mesh(level=level, h=h, vertices=vertices, triangles=triangles,
                areas=areas, grads=grads, boundary=bnd, is_boundary=on_bd)


def element_geometry(mesh, elem):
    """Return ``(area, grads)`` of triangle ``elem``; grads has shape (3, 2)."""
    if not 0 <= elem < mesh.nel:
        raise IndexError(f"element index {elem} out of range [0, {mesh.nel})")
    return float(mesh.areas[elem]), mesh.grads[elem].copy()


def boundary_nodes(mesh):
    """Set of vertex indices lying on the boundary of the unit square."""
    return frozenset(int(i) for i in mesh.boundary)


def write_mesh_csv(mesh, path):
    """Dump vertices and triangles as a two-section CSV file."""
    with open(path, "w", newline="") as fh:
        fh.write("# vertices\nid,x,y\n")
        for k, (x, y) in enumerate(mesh.vertices.tolist()):
            fh.write(f"{k},{x!r},{y!r}\n")
        fh.write("# triangles\nid,v0,v1,v2\n")
        for k, (a, b, c) in enumerate(mesh.triangles.tolist()):
            fh.write(f"{k},{a},{b},{c}\n")
