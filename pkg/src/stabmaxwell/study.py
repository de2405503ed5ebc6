"""Manufactured-solution runs and convergence sweeps."""

import logging
from dataclasses import asdict

import numpy as np

from .analysis import config_hash, convergence_rates, relative_errors, utc_timestamp
from .coefficients import CoefficientField
from .manufactured import ExactSolution, interpolate
from .mesh import build_structured_mesh
from .timestepper import (DEFAULT_CFL_C, build_operators, init_state, init_state_taylor,
                          run)

__all__ = ["manufactured_source", "solve_manufactured", "convergence_study"]

log = logging.getLogger(__name__)

DEFAULT_TAU = 0.0005
DEFAULT_T = 0.25


def manufactured_source(exact, mesh, tau):
    """Nodal ``j^k = -I_h f(., k tau)``; box-boundary vertices take the outside branch."""

    def fn(x, y, t):
        return exact.source(x, y, t, interface="exterior")

    def source(k):
        return -interpolate(fn, mesh, k * tau)

    return source


def solve_manufactured(m, level, tau=DEFAULT_TAU, T=DEFAULT_T, start="taylor", observers=(),
                       cfl_C=DEFAULT_CFL_C, cfl_override=False, field=None, stab_scale=1.0):
    """Run the manufactured problem on one level.

    ``start="taylor"`` uses the second-order first step; ``start="plain"``
    uses ``E^1 = E^0 + tau f1``. Initial data are zero in both cases.
    Returns ``(state, ops, exact, observer_results)``.
    """
    field = field if field is not None else CoefficientField(m=m)
    exact = ExactSolution(field)
    mesh = build_structured_mesh(level)
    ops = build_operators(mesh, field, tau, stab_scale=stab_scale)
    source = manufactured_source(exact, mesh, tau)
    zero = np.zeros(mesh.ndof)
    if start == "taylor":
        state = init_state_taylor(zero, zero, source(0), ops)
    elif start == "plain":
        state = init_state(zero, zero, tau)
    else:
        raise ValueError(f"start must be 'taylor' or 'plain', got {start!r}")
    state, results = run(mesh, field, source, T, tau, observers=observers, state=state,
                         cfl_C=cfl_C, cfl_override=cfl_override, ops=ops)
    return state, ops, exact, results


def convergence_study(m, levels=(3, 4, 5, 6), tau=DEFAULT_TAU, T=DEFAULT_T, start="taylor",
                      l2="nodal", cfl_C=DEFAULT_CFL_C, cfl_override=False, timestamp=True,
                      field=None):
    """Errors and observed orders at final time ``T`` for each mesh level."""
    field = field if field is not None else CoefficientField(m=m)
    errors = []
    for level in levels:
        state, ops, exact, _ = solve_manufactured(m, level, tau, T, start=start, cfl_C=cfl_C,
                                                  cfl_override=cfl_override, field=field)
        errors.append(relative_errors(exact, state.E_curr, ops.mesh, state.t, m=m, l2=l2))
        log.info("l=%d theta1=%.6g theta2=%.6g", level, errors[-1].theta1, errors[-1].theta2)
    config = {"m": m, "levels": list(levels), "tau": tau, "T": T, "start": start, "l2": l2,
              "cfl_C": cfl_C, "field": asdict(field)}
    meta = dict(config, config_hash=config_hash(config))
    if timestamp:
        meta["timestamp"] = utc_timestamp()
    return convergence_rates(errors, metadata=meta)
