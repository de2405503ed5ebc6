import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabmaxwell.checks import (check_derivative_oracle, check_divergence_identity, fd_derivatives,
                                interior_sample_points)
from stabmaxwell.coefficients import CoefficientField
from stabmaxwell.manufactured import (ExactSolution, InterfaceError, exact_derivatives, exact_E,
                                      interpolate, source_f)

from conftest import mesh_at

E1_REF = 0.0625 * np.pi * np.cos(np.pi / 8) * np.sin(np.pi / 8)   # 0.069420...


def g_field(x, y):
    return np.stack([np.pi * np.sin(np.pi * x) ** 2 * np.cos(np.pi * y) * np.sin(np.pi * y),
                     -np.pi * np.sin(np.pi * y) ** 2 * np.cos(np.pi * x) * np.sin(np.pi * x)])


def test_reference_value(field6):
    E = exact_E((0.5, 0.125), 0.25, field6)
    assert E[0] == pytest.approx(E1_REF, abs=1e-15)
    assert round(E1_REF, 6) == 0.06942
    assert abs(E[1]) < 1e-16


@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([6, 8, 10, 12]))
@settings(max_examples=50)
def test_zero_initial_field(x, y, m):
    assert not np.any(exact_E((x, y), 0.0, CoefficientField(m=m)))


@given(st.floats(0, 1), st.sampled_from([0, 1]), st.booleans(), st.floats(0, 1))
@settings(max_examples=50)
def test_vanishes_on_boundary(s, side, vertical, t):
    x, y = (side, s) if vertical else (s, side)
    assert np.abs(ExactSolution().E(x, y, t)).max() < 1e-15


def test_second_time_derivative(field6):
    x, y = interior_sample_points(50, 1, field6)
    for t in (0.1, 0.25):
        _, dtt, _, _ = ExactSolution(field6).derivatives(x, y, t)
        np.testing.assert_allclose(dtt, 2 / t ** 2 * ExactSolution(field6).E(x, y, t), rtol=1e-14)


def test_divergence_free_where_eps_is_one(field6):
    rng = np.random.default_rng(2)
    x, y = rng.uniform(0, 0.24, 100), rng.uniform(0, 1, 100)
    _, _, G, _ = ExactSolution(field6).derivatives(x, y, 0.25)
    assert np.abs(G[0, 0] + G[1, 1]).max() < 1e-14


@pytest.mark.parametrize("m", [6, 8, 10, 12])
def test_divergence_identity(m):
    res = check_divergence_identity(m=m)
    assert res.passed, res.detail


def test_derivative_oracle():
    res = check_derivative_oracle()
    assert res.passed, res.detail


def test_source_at_initial_time(field6):
    x, y = interior_sample_points(50, 3, field6)
    np.testing.assert_allclose(ExactSolution(field6).source(x, y, 0.0), 2 * g_field(x, y),
                               rtol=1e-14, atol=1e-14)


def test_source_outside_box_reduces(field6):
    rng = np.random.default_rng(4)
    x, y = rng.uniform(0.76, 1, 100), rng.uniform(0, 1, 100)
    t = 0.25
    inside = ExactSolution(field6).source(x, y, t)
    plain = ExactSolution(CoefficientField.vacuum())
    _, _, _, cc = plain.derivatives(x, y, t)
    np.testing.assert_allclose(inside, 2 * g_field(x, y) + cc, rtol=1e-14)
    np.testing.assert_allclose(source_f((x, y), t, field6), inside, rtol=0)


@pytest.mark.parametrize("m", [6, 12])
def test_finite_difference_residual(m):
    exact = ExactSolution(CoefficientField(m=m))
    x, y = interior_sample_points(100, 0, exact.field)
    _, _, _, f_fd = fd_derivatives(exact, x, y, 0.25, step=1e-4, order=4)
    assert np.abs(f_fd - exact.source(x, y, 0.25)).max() <= 1e-8


def test_interface_policy(field6):
    exact = ExactSolution(field6)
    with pytest.raises(InterfaceError):
        exact.derivatives(0.25, 0.5, 0.1)
    with pytest.raises(InterfaceError):
        exact_derivatives((0.5, 0.75), 0.1, field6)
    dtE, _, _, _ = exact.derivatives(0.25, 0.5, 0.1, interface="exterior")
    assert np.all(np.isfinite(dtE))
    with pytest.raises(ValueError):
        exact.derivatives(0.5, 0.5, 0.1, interface="inside")
    ExactSolution(CoefficientField.vacuum()).derivatives(0.25, 0.5, 0.1)


def test_interpolate(field6):
    mesh = mesh_at(3)
    assert not interpolate(ExactSolution(field6).E, mesh, 0.0).any()

    def linear(x, y, t):
        return np.stack([1 + 2 * x - y, 3 * y - 0.5])

    u = interpolate(linear, mesh, 0.0, dirichlet=False).reshape(-1, 2)
    np.testing.assert_allclose(u, linear(*mesh.vertices.T, 0).T, rtol=1e-15)
    assert not interpolate(linear, mesh, 0.0).reshape(-1, 2)[mesh.boundary].any()

    def src(x, y, t):
        return ExactSolution(field6).source(x, y, t, interface="exterior")

    direct = np.array([src(x, y, 0.1) for x, y in mesh.vertices])
    np.testing.assert_array_equal(interpolate(src, mesh, 0.1, dirichlet=False).reshape(-1, 2),
                                  direct)
