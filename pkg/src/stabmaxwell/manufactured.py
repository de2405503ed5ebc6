"""Manufactured solution and its source term.

The exact field is ``E = t**2 * g / eps`` with

    g1 =  pi sin^2(pi x) cos(pi y) sin(pi y)
    g2 = -pi sin^2(pi y) cos(pi x) sin(pi x)

so ``div(g) = 0`` and hence ``div(eps E) = 0``. The source is
``f = eps E_tt + curl curl E + sigma E_t``; the time stepper is driven with
``j = -f``.
"""

import numpy as np

from .coefficients import CoefficientField

__all__ = ["ExactSolution", "InterfaceError", "exact_E", "exact_derivatives", "source_f",
           "interpolate"]

PI = np.pi


class InterfaceError(ValueError):
    """Derivatives were requested on the inner-box boundary, where eps jumps."""


def _g_and_derivs(x, y):
    """``g``, its gradient ``(2 comps, 2 dirs)`` and Hessians ``(2 comps, 3)``."""
    a_x, a_y = np.sin(PI * x) ** 2, np.sin(PI * y) ** 2
    da_x, da_y = PI * np.sin(2 * PI * x), PI * np.sin(2 * PI * y)
    dda_x, dda_y = 2 * PI ** 2 * np.cos(2 * PI * x), 2 * PI ** 2 * np.cos(2 * PI * y)
    b_x, b_y = 0.5 * np.sin(2 * PI * x), 0.5 * np.sin(2 * PI * y)
    db_x, db_y = PI * np.cos(2 * PI * x), PI * np.cos(2 * PI * y)
    ddb_x, ddb_y = -2 * PI ** 2 * np.sin(2 * PI * x), -2 * PI ** 2 * np.sin(2 * PI * y)

    g = np.stack([PI * a_x * b_y, -PI * a_y * b_x])
    dg = np.stack([
        np.stack([PI * da_x * b_y, PI * a_x * db_y]),
        np.stack([-PI * a_y * db_x, -PI * da_y * b_x]),
    ])
    ddg = np.stack([
        np.stack([PI * dda_x * b_y, PI * da_x * db_y, PI * a_x * ddb_y]),
        np.stack([-PI * a_y * ddb_x, -PI * da_y * db_x, -PI * dda_y * b_x]),
    ])
    return g, dg, ddg


class ExactSolution:
    """Closed-form exact field for a given coefficient profile.

    ``interface`` selects what happens at points on the inner-box boundary:
    ``"raise"`` refuses derivative evaluation there, ``"exterior"`` uses the
    outside branch (eps = 1, sigma = 0).
    """

    def __init__(self, field=None):
        self.field = field if field is not None else CoefficientField()

    def _check(self, x, y, interface):
        if (interface == "raise" and not self.field.homogeneous
                and np.any(self.field.on_interface(x, y))):
            raise InterfaceError("derivatives are undefined on the inner-box boundary")
        if interface not in ("raise", "exterior"):
            raise ValueError(f"unknown interface policy {interface!r}")

    def E(self, x, y, t):
        """Field values, shape ``(2, ...)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g, _, _ = _g_and_derivs(x, y)
        return t ** 2 * g / self.field.epsilon(x, y)

    def spatial(self, x, y):
        """``q = g/eps`` with its gradient ``(2, 2, ...)`` and Hessians ``(2, 3, ...)``."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        g, dg, ddg = _g_and_derivs(x, y)
        eps, de, dde = self.field.epsilon_derivatives(x, y)
        q = g / eps
        dq = dg / eps - g[:, None] * de[None, :] / eps ** 2
        pairs = ((0, 0), (0, 1), (1, 1))
        ddq = np.empty(ddg.shape)
        for k, (i, j) in enumerate(pairs):
            ddq[:, k] = (ddg[:, k] / eps
                         - (dg[:, i] * de[j] + dg[:, j] * de[i]) / eps ** 2
                         - g * dde[k] / eps ** 2
                         + 2 * g * de[i] * de[j] / eps ** 3)
        return q, dq, ddq

    def derivatives(self, x, y, t, interface="raise"):
        """Return ``(dtE, dttE, gradE, curlcurlE)``.

        ``gradE[a, d]`` is the derivative of component ``a`` along ``d``.
        """
        self._check(x, y, interface)
        q, dq, ddq = self.spatial(x, y)
        dtE = 2 * t * q
        dttE = 2 * q
        gradE = t ** 2 * dq
        # w = d_x E2 - d_y E1; curl curl E = (d_y w, -d_x w)
        dyw = ddq[1, 1] - ddq[0, 2]
        dxw = ddq[1, 0] - ddq[0, 1]
        curlcurl = t ** 2 * np.stack([dyw, -dxw])
        return dtE, dttE, gradE, curlcurl

    def source(self, x, y, t, interface="raise"):
        """``f = eps E_tt + curl curl E + sigma E_t``, shape ``(2, ...)``."""
        dtE, dttE, _, curlcurl = self.derivatives(x, y, t, interface)
        eps = self.field.epsilon(x, y)
        sig = self.field.sigma(x, y)
        return eps * dttE + curlcurl + sig * dtE

    def div_eps_E(self, x, y, t, interface="raise"):
        """``div(eps E) = eps div E + grad(eps) . E`` from closed forms."""
        self._check(x, y, interface)
        q, dq, _ = self.spatial(x, y)
        eps, de, _ = self.field.epsilon_derivatives(x, y)
        return t ** 2 * (eps * (dq[0, 0] + dq[1, 1]) + de[0] * q[0] + de[1] * q[1])


def exact_E(point, t, field):
    x, y = point
    return ExactSolution(field).E(x, y, t)


def exact_derivatives(point, t, field):
    x, y = point
    return ExactSolution(field).derivatives(x, y, t)


def source_f(point, t, field):
    x, y = point
    return ExactSolution(field).source(x, y, t)


def interpolate(fn, mesh, t, dirichlet=True):
    """Nodal interpolant of ``fn(x, y, t) -> (2, nno)``; boundary dofs zeroed if ``dirichlet``."""
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    vals = np.asarray(fn(x, y, t), dtype=float)
    out = np.ascontiguousarray(vals.T).ravel()
    if dirichlet:
        out[mesh.boundary_dofs()] = 0.0
    return out
