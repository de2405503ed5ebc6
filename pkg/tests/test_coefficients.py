import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stabmaxwell.coefficients import (CoefficientField, check_admissibility, epsilon_at,
                                      sample_nodal, sigma_at, sup_eps_minus_one)

from conftest import mesh_at

# grid maximum of eps - 1 for m=6, identical at steps 2**-10 and 2**-12
SUP_M6 = 1.01738


@pytest.mark.parametrize("m", [6, 8, 10, 12])
def test_exterior_values(m):
    field = CoefficientField(m=m)
    assert epsilon_at(field, (0.1, 0.9)) == 1.0
    assert sigma_at(field, (0.1, 0.9)) == 0.0


def test_peak_values(field6):
    assert epsilon_at(field6, (0.4375, 0.4375)) == pytest.approx(2.015625, abs=1e-14)
    assert sigma_at(field6, (0.4375, 0.4375)) == pytest.approx(0.002015625, abs=1e-16)


def test_box_boundary_takes_exterior_branch(field6):
    assert epsilon_at(field6, (0.25, 0.5)) == 1.0
    inside = epsilon_at(field6, (0.25 + 1e-12, 0.5))
    # both bumps reach the box edge, each damped by sin(pi/8)**m
    assert inside == pytest.approx(1.0 + 2 * (np.sin(np.pi / 8) * np.sin(5 * np.pi / 8)) ** 6)
    assert inside < 1.0 + 2 * np.sin(np.pi / 8) ** 6


@given(st.floats(0, 1), st.floats(0, 1), st.sampled_from([6, 8, 10, 12]))
def test_sigma_shares_profile(x, y, m):
    field = CoefficientField(m=m)
    eps, sig = epsilon_at(field, (x, y)), sigma_at(field, (x, y))
    assert 1.0 <= eps <= field.d1
    if field.inside(x, y):
        assert sig == pytest.approx(0.001 * eps, rel=1e-14)
    else:
        assert (eps, sig) == (1.0, 0.0)


def test_invalid_parameters():
    with pytest.raises(ValueError):
        CoefficientField(m=5)
    with pytest.raises(ValueError):
        CoefficientField(d1=0.001, d2=0.003)


def test_sample_nodal(field6):
    mesh = mesh_at(4)
    eps = sample_nodal(field6, mesh, "eps")
    sig = sample_nodal(field6, mesh, "sigma")
    assert np.all(eps[mesh.boundary] == 1.0)
    assert eps.min() >= 1.0
    inside = field6.inside(mesh.vertices[:, 0], mesh.vertices[:, 1])
    np.testing.assert_allclose(sig[inside], 0.001 * eps[inside], rtol=1e-14)
    assert np.all(sig[~inside] == 0.0)
    with pytest.raises(ValueError):
        sample_nodal(field6, mesh, "mu")


def test_sup(field6):
    assert sup_eps_minus_one(CoefficientField.vacuum()).value == 0.0
    coarse = sup_eps_minus_one(field6).value
    assert coarse == pytest.approx(SUP_M6, abs=1e-5)
    assert sup_eps_minus_one(field6, 2.0 ** -12).value == pytest.approx(SUP_M6, abs=1e-5)
    # above the value at the bump peak
    assert coarse > 1.015625
    assert sup_eps_minus_one(CoefficientField(m=12)).value <= coarse


def test_closed_form_gradient_matches_differences(field6):
    rng = np.random.default_rng(3)
    x, y = rng.uniform(0.26, 0.74, (2, 50))
    _, grad, hess = field6.epsilon_derivatives(x, y)
    s = 1e-6
    gx = (field6.epsilon(x + s, y) - field6.epsilon(x - s, y)) / (2 * s)
    gy = (field6.epsilon(x, y + s) - field6.epsilon(x, y - s)) / (2 * s)
    np.testing.assert_allclose(grad, [gx, gy], atol=1e-6)
    _, gp, _ = field6.epsilon_derivatives(x + s, y)
    _, gm, _ = field6.epsilon_derivatives(x - s, y)
    np.testing.assert_allclose(hess[:2], (gp - gm) / (2 * s), atol=1e-5)


def test_admissibility():
    rep = check_admissibility(CoefficientField.vacuum())
    assert rep.violation_fraction == 0.0 and rep.max_grad_eps == 0.0 and rep.bounds_ok
    rep = check_admissibility(CoefficientField(m=6), mesh=mesh_at(3))
    assert rep.violation_fraction > 0.0
    assert rep.bounds_ok
    assert rep.eps_max == pytest.approx(2.0174, abs=1e-3)
