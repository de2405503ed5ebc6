"""Discrete operators of the stabilized bilinear form.

Vector fields are flat arrays of length ``2 * nno`` in node-major layout:
dof ``2*i + a`` holds component ``a`` of the field at vertex ``i``.
Sparse operators are ``scipy.sparse.csr_matrix`` with sorted, duplicate-free
rows.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .quadrature import centroid_rule, edge_midpoint_rule

__all__ = ["AssemblyError", "DiagonalOperator", "lumped_mass", "stiffness", "divdiv_stab",
           "apply_dirichlet", "quad_form_a", "element_gradients", "element_divergence",
           "vector_dofs", "write_operator_coo"]


class AssemblyError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiagonalOperator:
    """Diagonal (lumped) operator over all ``2 * nno`` dofs."""

    values: np.ndarray

    @property
    def shape(self):
        return (self.values.size, self.values.size)

    def __matmul__(self, x):
        return self.values * x

    def solve(self, rhs):
        return rhs / self.values

    def toarray(self):
        return np.diag(self.values)


def vector_dofs(nodes):
    nodes = np.asarray(nodes)
    return np.sort(np.concatenate([2 * nodes, 2 * nodes + 1]))


def _node_shares(mesh):
    """Row-sum lumped unweighted mass: sum of |K|/3 over incident triangles."""
    share = np.zeros(mesh.nno)
    np.add.at(share, mesh.triangles.ravel(), np.repeat(mesh.areas / 3.0, 3))
    return share


def lumped_mass(mesh, weight=None, require_positive=True):
    """Lumped mass ``w_i * sum_{K ∋ i} |K|/3`` repeated for both components.

    ``weight`` is a nodal array (``None`` means ``w = 1``). With
    ``require_positive`` a nonpositive entry on a free dof raises
    :class:`AssemblyError`; conductivity-weighted masses turn it off.
    """
    share = _node_shares(mesh)
    if weight is not None:
        weight = np.asarray(weight, dtype=float)
        if weight.shape != (mesh.nno,):
            raise AssemblyError(f"weight has shape {weight.shape}, expected ({mesh.nno},)")
        share = weight * share
    if require_positive and np.any(share[mesh.free_nodes] <= 0.0):
        raise AssemblyError("lumped mass is not positive on every free node")
    return DiagonalOperator(np.repeat(share, 2))


def _local_to_global(mesh, local):
    """Scatter element blocks ``(nel, 3, 2, 3, 2)`` into a CSR matrix."""
    tri = mesh.triangles
    dof = 2 * tri[:, :, None] + np.arange(2)[None, None, :]       # (nel, 3, 2)
    rows = np.broadcast_to(dof[:, :, :, None, None], local.shape)
    cols = np.broadcast_to(dof[:, None, None, :, :], local.shape)
    A = sp.coo_matrix((local.ravel(), (rows.ravel(), cols.ravel())),
                      shape=(mesh.ndof, mesh.ndof)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return A


def stiffness(mesh):
    """Vector Laplacian ``(grad u, grad v)``, block diagonal over components."""
    g = mesh.grads
    scalar = mesh.areas[:, None, None] * np.einsum("eid,ejd->eij", g, g)
    local = np.einsum("eij,ab->eiajb", scalar, np.eye(2))
    return _local_to_global(mesh, local)


def divdiv_stab(mesh, eps_h, rule="centroid"):
    """Stabilization operator ``(div((eps_h - 1) u), div v)``.

    The integrand is linear on each element, so the centroid rule and the
    edge-midpoint rule (``rule="midpoint"``) are both exact.
    """
    bary, w = {"centroid": centroid_rule, "midpoint": edge_midpoint_rule}[rule]()
    em1 = np.asarray(eps_h, dtype=float)[mesh.triangles] - 1.0     # (nel, 3)
    g = mesh.grads                                                 # (nel, 3, 2)
    geps = np.einsum("ek,ekd->ed", em1, g)                         # grad eps_h per element
    em1_q = em1 @ bary.T                                           # (nel, nq)
    # T[e, j, b] = sum_q w_q d_b((eps_h - 1) phi_j)(x_q)
    T = (geps[:, None, :] * (w @ bary)[None, :, None]
         + (em1_q @ w)[:, None, None] * g)
    local = mesh.areas[:, None, None, None, None] * np.einsum("eia,ejb->eiajb", g, T)
    D = _local_to_global(mesh, local)
    D.eliminate_zeros()
    return D


def apply_dirichlet(obj, mesh):
    """Impose homogeneous Dirichlet conditions on boundary dofs.

    Sparse operators get boundary rows and columns zeroed with a unit
    diagonal, diagonal operators get a unit entry, and fields (plain arrays)
    get zeros. Free dofs are untouched and the operation is idempotent.
    """
    bd = mesh.boundary_dofs()
    if sp.issparse(obj):
        keep = np.ones(mesh.ndof)
        keep[bd] = 0.0
        P = sp.diags(keep)
        unit = np.zeros(mesh.ndof)
        unit[bd] = 1.0
        out = (P @ obj @ P + sp.diags(unit)).tocsr()
        out.eliminate_zeros()
        out.sort_indices()
        return out
    if isinstance(obj, DiagonalOperator):
        vals = obj.values.copy()
        vals[bd] = 1.0
        return DiagonalOperator(vals)
    out = np.array(obj, dtype=float, copy=True)
    if out.shape != (mesh.ndof,):
        raise ValueError(f"field has shape {out.shape}, expected ({mesh.ndof},)")
    out[bd] = 0.0
    return out


def quad_form_a(u, v, mesh, eps_h, K=None, D=None):
    """``a(u, v) = v^T (K + D) u``; pass prebuilt ``K``/``D`` to skip assembly."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (mesh.ndof,) or v.shape != (mesh.ndof,):
        raise ValueError(f"fields must have length {mesh.ndof}, got {u.shape} and {v.shape}")
    if K is None:
        K = stiffness(mesh)
    if D is None:
        D = divdiv_stab(mesh, eps_h)
    return float(v @ (K @ u) + v @ (D @ u))


def element_gradients(mesh, E):
    """Constant gradient of each component per element, shape ``(nel, 2, 2)``.

    ``G[e, a, d]`` is the derivative of component ``a`` along direction ``d``.
    """
    vals = np.asarray(E).reshape(-1, 2)[mesh.triangles]           # (nel, 3, 2)
    return np.einsum("eka,ekd->ead", vals, mesh.grads)


def element_divergence(mesh, E):
    G = element_gradients(mesh, E)
    return G[:, 0, 0] + G[:, 1, 1]


def write_operator_coo(op, path):
    """Text dump ``row col value`` of a sparse or diagonal operator."""
    if isinstance(op, DiagonalOperator):
        idx = np.arange(op.values.size)
        rows, cols, vals = idx, idx, op.values
    else:
        coo = sp.coo_matrix(op)
        rows, cols, vals = coo.row, coo.col, coo.data
    with open(path, "w") as fh:
        for r, c, x in zip(rows.tolist(), cols.tolist(), vals.tolist()):
            fh.write(f"{r} {c} {x!r}\n")
