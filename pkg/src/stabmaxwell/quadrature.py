"""Quadrature rules on triangles.

Every rule is returned as ``(bary, weights)``: barycentric coordinates of
shape ``(npts, 3)`` and weights summing to one, so that
``integral over K of g ~= |K| * sum(w * g(points))``.
"""

import numpy as np

__all__ = ["centroid_rule", "edge_midpoint_rule", "dunavant4", "collapsed_rule",
           "rule_for_degree", "physical_points"]


def centroid_rule():
    return np.full((1, 3), 1.0 / 3.0), np.ones(1)


def edge_midpoint_rule():
    """Exact for quadratics."""
    bary = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])
    return bary, np.full(3, 1.0 / 3.0)


def dunavant4():
    """Symmetric 6-point rule, exact through degree 4 (Dunavant 1985)."""
    a = 0.445948490915965
    b = 0.091576213509771
    wa = 0.223381589678011
    wb = 0.109951743655322
    bary = np.array([
        [a, a, 1 - 2 * a], [a, 1 - 2 * a, a], [1 - 2 * a, a, a],
        [b, b, 1 - 2 * b], [b, 1 - 2 * b, b], [1 - 2 * b, b, b],
    ])
    w = np.array([wa, wa, wa, wb, wb, wb])
    return bary, w / w.sum()


def collapsed_rule(degree):
    """Gauss-Legendre product rule on the collapsed square, exact to ``degree``.

    Maps ``(u, v)`` in the unit square to ``x = u, y = (1 - u) v`` and folds
    the Jacobian ``1 - u`` into the weights.
    """
    n = (degree + 3) // 2          # the Jacobian adds one degree in u
    t, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    U, V = np.meshgrid(t, t, indexing="ij")
    WU, WV = np.meshgrid(w, w, indexing="ij")
    x = U.ravel()
    y = ((1.0 - U) * V).ravel()
    weights = (WU * WV * (1.0 - U)).ravel() * 2.0   # reference area is 1/2
    bary = np.column_stack([1.0 - x - y, x, y])
    return bary, weights


def rule_for_degree(degree):
    if degree <= 1:
        return centroid_rule()
    if degree == 2:
        return edge_midpoint_rule()
    if degree <= 4:
        return dunavant4()
    return collapsed_rule(degree)


def physical_points(mesh, bary):
    """Quadrature points of every element, shape ``(nel, npts, 2)``."""
    p = mesh.vertices[mesh.triangles]              # (nel, 3, 2)
    return np.einsum("qi,eid->eqd", bary, p)
