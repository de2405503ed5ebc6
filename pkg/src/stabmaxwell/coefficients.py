"""Permittivity and conductivity profiles on the unit square.

Inside the open box ``(0.25, 0.75)**2`` both coefficients share the profile

    p(x, y) = 1 + s(2x - 0.375)^m s(2y - 0.375)^m + s(2x - 0.625)^m s(2y - 0.625)^m,
    s(u) = sin(pi u),

with ``eps = p`` and ``sigma = sigma_scale * p``. Outside the box
``eps = 1`` and ``sigma = 0``. Points on the box boundary take the outside
value; the profile jumps there by less than ``2 sin(pi/8)**m``.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = ["CoefficientField", "epsilon_at", "sigma_at", "sample_nodal",
           "sup_eps_minus_one", "check_admissibility", "AdmissibilityReport",
           "GridMax"]

_SHIFTS = (0.375, 0.625)


@dataclass(frozen=True)
class CoefficientField:
    """Profile family parameters.

    ``homogeneous=True`` switches the bumps off entirely (eps = 1, sigma = 0).
    """

    m: int = 6
    sigma_scale: float = 0.001
    box: tuple = (0.25, 0.75, 0.25, 0.75)
    d1: float = 2.1
    d2: float = 0.003
    homogeneous: bool = False

    def __post_init__(self):
        if not self.homogeneous and (self.m < 2 or self.m % 2):
            raise ValueError(f"profile exponent m must be an even integer >= 2, got {self.m}")
        if not (self.d1 > 1 and self.d2 > 0 and self.d1 > self.d2):
            raise ValueError("coefficient bounds need d1 > 1, d2 > 0, d1 > d2")

    @classmethod
    def vacuum(cls):
        return cls(homogeneous=True)

    def inside(self, x, y):
        """Mask of points in the open inner box."""
        x0, x1, y0, y1 = self.box
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (x > x0) & (x < x1) & (y > y0) & (y < y1)

    def on_interface(self, x, y, tol=0.0):
        """Mask of points on the boundary of the inner box (closed box minus interior)."""
        x0, x1, y0, y1 = self.box
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        closed = (x >= x0 - tol) & (x <= x1 + tol) & (y >= y0 - tol) & (y <= y1 + tol)
        interior = (x > x0 + tol) & (x < x1 - tol) & (y > y0 + tol) & (y < y1 - tol)
        return closed & ~interior

    def bump_profile(self, x, y):
        """``p - 1`` evaluated everywhere, ignoring the box cut-off."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        out = np.zeros(np.broadcast(x, y).shape)
        if self.homogeneous:
            return out
        for c in _SHIFTS:
            out = out + np.sin(np.pi * (2 * x - c)) ** self.m * np.sin(np.pi * (2 * y - c)) ** self.m
        return out

    def epsilon(self, x, y):
        return 1.0 + np.where(self.inside(x, y), self.bump_profile(x, y), 0.0)

    def sigma(self, x, y):
        if self.homogeneous:
            return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
        return np.where(self.inside(x, y), self.sigma_scale * (1.0 + self.bump_profile(x, y)), 0.0)

    def epsilon_derivatives(self, x, y):
        """Closed-form ``(eps, grad, hess)`` of the inside branch.

        ``grad`` has shape ``(2, ...)`` and ``hess`` ``(3, ...)`` holding
        ``(eps_xx, eps_xy, eps_yy)``. Outside the box the derivatives are zero.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast(x, y).shape
        p = np.zeros(shape)
        gx = np.zeros(shape)
        gy = np.zeros(shape)
        hxx = np.zeros(shape)
        hxy = np.zeros(shape)
        hyy = np.zeros(shape)
        if not self.homogeneous:
            for c in _SHIFTS:
                a, da, dda = _bump_1d(x, c, self.m)
                b, db, ddb = _bump_1d(y, c, self.m)
                p = p + a * b
                gx = gx + da * b
                gy = gy + a * db
                hxx = hxx + dda * b
                hxy = hxy + da * db
                hyy = hyy + a * ddb
        mask = self.inside(x, y)
        eps = 1.0 + np.where(mask, p, 0.0)
        grad = np.stack([np.where(mask, gx, 0.0), np.where(mask, gy, 0.0)])
        hess = np.stack([np.where(mask, h, 0.0) for h in (hxx, hxy, hyy)])
        return eps, grad, hess


def _bump_1d(s, c, m):
    u = np.pi * (2 * s - c)
    sn = np.sin(u)
    cs = np.cos(u)
    k = 2 * np.pi
    val = sn ** m
    d1 = k * m * sn ** (m - 1) * cs
    d2 = k * k * m * ((m - 1) * sn ** (m - 2) * cs ** 2 - sn ** m)
    return val, d1, d2


def epsilon_at(field, point):
    x, y = point
    return float(field.epsilon(x, y))


def sigma_at(field, point):
    x, y = point
    return float(field.sigma(x, y))


def sample_nodal(field, mesh, which):
    """Nodal values of ``eps`` or ``sigma`` on ``mesh`` (one value per vertex)."""
    x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
    if which == "eps":
        vals = field.epsilon(x, y)
    elif which == "sigma":
        vals = field.sigma(x, y)
    else:
        raise ValueError(f"which must be 'eps' or 'sigma', got {which!r}")
    return np.ascontiguousarray(vals, dtype=float)


class GridMax(NamedTuple):
    value: float
    step: float


def sup_eps_minus_one(field, step=2.0 ** -10):
    """Grid maximum of ``eps - 1`` over the inner box.

    The grid includes every multiple of ``step`` strictly inside the box, so
    the result is a lower bound of the true supremum at resolution ``step``.
    """
    if field.homogeneous:
        return GridMax(0.0, step)
    x0, x1, y0, y1 = field.box
    xs = np.arange(np.floor(x0 / step) + 1, np.ceil(x1 / step)) * step
    ys = np.arange(np.floor(y0 / step) + 1, np.ceil(y1 / step)) * step
    best = 0.0
    # row blocks keep memory bounded for fine steps
    for chunk in np.array_split(ys, max(1, ys.size // 256)):
        X, Y = np.meshgrid(xs, chunk)
        best = max(best, float(np.max(field.epsilon(X, Y) - 1.0)))
    return GridMax(best, step)


@dataclass
class AdmissibilityReport:
    max_grad_eps: float
    violation_fraction: float      # fraction of samples with |grad eps| > 0.5 min(0.5, eps-1)
    n_samples: int
    eps_min: float
    eps_max: float
    sigma_min: float
    sigma_max: float
    eps_bounds_ok: bool            # 1 <= eps <= d1
    sigma_bounds_ok: bool          # 0 <= sigma <= d2
    exterior_ok: bool              # eps = 1, sigma = 0 outside the box
    d1_gt_d2: bool
    sample_step: float
    fd_step: float

    @property
    def bounds_ok(self):
        return self.eps_bounds_ok and self.sigma_bounds_ok and self.exterior_ok and self.d1_gt_d2


def check_admissibility(field, mesh=None, sample_step=2.0 ** -8, fd_step=2.0 ** -12):
    """Evaluate the coefficient bounds and the gradient condition on a sample grid.

    Samples sit at cell midpoints ``(k + 1/2) * sample_step`` so no central
    difference stencil crosses the box boundary. If ``mesh`` is given its
    vertices are added to the bound checks. Nothing here raises; callers
    decide what to do with a failing report.
    """
    n = int(round(1.0 / sample_step))
    s = (np.arange(n) + 0.5) * sample_step
    X, Y = np.meshgrid(s, s)
    X = X.ravel()
    Y = Y.ravel()
    eps = field.epsilon(X, Y)
    gx = (field.epsilon(X + fd_step, Y) - field.epsilon(X - fd_step, Y)) / (2 * fd_step)
    gy = (field.epsilon(X, Y + fd_step) - field.epsilon(X, Y - fd_step)) / (2 * fd_step)
    gnorm = np.hypot(gx, gy)
    bound = 0.5 * np.minimum(0.5, eps - 1.0)
    # round-off in the difference quotient must not count as a violation
    violated = gnorm > bound + 1e-9

    if mesh is not None:
        X = np.concatenate([X, mesh.vertices[:, 0]])
        Y = np.concatenate([Y, mesh.vertices[:, 1]])
        eps = field.epsilon(X, Y)
    sig = field.sigma(X, Y)
    outside = ~field.inside(X, Y)
    return AdmissibilityReport(
        max_grad_eps=float(gnorm.max()),
        violation_fraction=float(violated.mean()),
        n_samples=int(violated.size),
        eps_min=float(eps.min()),
        eps_max=float(eps.max()),
        sigma_min=float(sig.min()),
        sigma_max=float(sig.max()),
        eps_bounds_ok=bool(eps.min() >= 1.0 and eps.max() <= field.d1),
        sigma_bounds_ok=bool(sig.min() >= 0.0 and sig.max() <= field.d2),
        exterior_ok=bool(np.all(eps[outside] == 1.0) and np.all(sig[outside] == 0.0)),
        d1_gt_d2=bool(field.d1 > field.d2),
        sample_step=sample_step,
        fd_step=fd_step,
    )
