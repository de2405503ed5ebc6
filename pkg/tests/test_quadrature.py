from math import factorial

import numpy as np
import pytest

from stabmaxwell.quadrature import (centroid_rule, collapsed_rule, dunavant4, edge_midpoint_rule,
                                    physical_points, rule_for_degree)

from conftest import mesh_at


def monomial_integral(p, q):
    """Integral of x^p y^q over the reference triangle divided by its area."""
    return 2.0 * factorial(p) * factorial(q) / factorial(p + q + 2)


RULES = [(centroid_rule, 1), (edge_midpoint_rule, 2), (dunavant4, 4),
         (lambda: collapsed_rule(6), 6), (lambda: collapsed_rule(9), 9)]


@pytest.mark.parametrize("rule, degree", RULES)
def test_exact_through_degree(rule, degree):
    bary, w = rule()
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(bary.sum(axis=1), 1.0, atol=1e-15)
    x, y = bary[:, 1], bary[:, 2]
    for p in range(degree + 1):
        for q in range(degree + 1 - p):
            assert w @ (x ** p * y ** q) == pytest.approx(monomial_integral(p, q), abs=1e-13)


def test_centroid_not_exact_for_quadratics():
    bary, w = centroid_rule()
    assert abs(w @ bary[:, 1] ** 2 - monomial_integral(2, 0)) > 1e-3


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4, 5, 8])
def test_rule_for_degree(degree):
    bary, w = rule_for_degree(degree)
    x, y = bary[:, 1], bary[:, 2]
    assert w @ (x ** degree) == pytest.approx(monomial_integral(degree, 0), abs=1e-13)


def test_physical_points_inside_elements():
    mesh = mesh_at(2)
    bary, w = dunavant4()
    pts = physical_points(mesh, bary)
    assert pts.shape == (mesh.nel, 6, 2)
    # integrate x*y over the unit square
    val = np.sum(mesh.areas[:, None] * w * pts[..., 0] * pts[..., 1])
    assert val == pytest.approx(0.25, abs=1e-14)
