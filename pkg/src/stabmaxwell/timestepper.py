"""Explicit damped leapfrog for the stabilized system.

With lumped masses the update for each free dof is

    (M_eps + tau/2 M_sig) E^{k+1} = M_eps (2 E^k - E^{k-1}) + tau/2 M_sig E^{k-1}
                                    - tau^2 ((K + D) E^k + M_1 j^k)

and boundary dofs stay zero.
"""

import csv
import logging
import os
from dataclasses import dataclass

import numpy as np

from .assembly import apply_dirichlet, divdiv_stab, lumped_mass, stiffness
from .coefficients import sample_nodal, sup_eps_minus_one

__all__ = ["StepState", "SchemeOperators", "BlowUpError", "CFLError", "cfl_max_tau",
           "build_operators", "init_state", "init_state_taylor", "step", "run", "SnapshotWriter",
           "estimate_stability_threshold", "leapfrog_invariant"]

log = logging.getLogger(__name__)

DEFAULT_CFL_C = 2.0


class BlowUpError(FloatingPointError):
    def __init__(self, step_index, message=None):
        self.step_index = step_index
        super().__init__(message or f"non-finite field produced at step k={step_index}")


class CFLError(ValueError):
    pass


@dataclass
class StepState:
    k: int
    tau: float
    E_prev: np.ndarray
    E_curr: np.ndarray

    @property
    def t(self):
        return self.k * self.tau


@dataclass(frozen=True, eq=False)
class SchemeOperators:
    mesh: object
    tau: float
    eps_h: np.ndarray
    sigma_h: np.ndarray
    Meps: object
    Msig: object
    Mlhs: object
    M1: object
    K: object
    D: object
    A: object          # masked K + D


def cfl_max_tau(mesh, field, C=DEFAULT_CFL_C):
    """Largest step allowed by ``tau <= h / (C sqrt(1 + 3 sup|eps - 1|))``."""
    if C <= 0:
        raise ValueError("CFL constant must be positive")
    sup = sup_eps_minus_one(field).value
    return mesh.h / (C * np.sqrt(1.0 + 3.0 * sup))


def build_operators(mesh, field, tau, stab_scale=1.0):
    """Assemble everything one step needs.

    ``stab_scale`` multiplies the div-div stabilization; anything but 1 is a
    deliberate fault used by the mutation checks.
    """
    eps_h = sample_nodal(field, mesh, "eps")
    sigma_h = sample_nodal(field, mesh, "sigma")
    Meps = apply_dirichlet(lumped_mass(mesh, eps_h), mesh)
    Msig = lumped_mass(mesh, sigma_h, require_positive=False)
    Msig = type(Meps)(np.where(mesh.is_boundary.repeat(2), 0.0, Msig.values))
    Mlhs = type(Meps)(Meps.values + 0.5 * tau * Msig.values)
    M1 = apply_dirichlet(lumped_mass(mesh), mesh)
    K = stiffness(mesh)
    D = divdiv_stab(mesh, eps_h)
    if stab_scale != 1.0:
        D = stab_scale * D
    A = apply_dirichlet(K + D, mesh)
    return SchemeOperators(mesh=mesh, tau=tau, eps_h=eps_h, sigma_h=sigma_h, Meps=Meps,
                           Msig=Msig, Mlhs=Mlhs, M1=M1, K=K, D=D, A=A)


def init_state(f0h, f1h, tau):
    """``E^0 = f0h``, ``E^1 = f0h + tau f1h``, ``k = 1``."""
    f0h = np.asarray(f0h, dtype=float)
    f1h = np.asarray(f1h, dtype=float)
    if f0h.shape != f1h.shape:
        raise ValueError(f"initial fields live on different meshes: {f0h.shape} vs {f1h.shape}")
    if tau <= 0:
        raise ValueError("tau must be positive")
    return StepState(k=1, tau=tau, E_prev=f0h.copy(), E_curr=f0h + tau * f1h)


def init_state_taylor(f0h, f1h, j0, ops):
    """Second-order start ``E^1 = E^0 + tau f1h + tau^2/2 a0``.

    ``a0`` solves ``M_eps a0 = -(K + D) f0h - M_sig f1h - M_1 j0``, the
    semi-discrete equation at ``t = 0``.
    """
    state = init_state(f0h, f1h, ops.tau)
    force = ops.A @ state.E_prev + ops.Msig.values * np.asarray(f1h, dtype=float)
    if j0 is not None:
        force = force + ops.M1.values * j0
    a0 = -force / ops.Meps.values
    a0[ops.mesh.boundary_dofs()] = 0.0
    state.E_curr = state.E_curr + 0.5 * ops.tau ** 2 * a0
    return state


def step(state, ops, j_k=None):
    """Advance one level: returns the state holding ``(E^k, E^{k+1})``."""
    tau = state.tau
    Ep, Ec = state.E_prev, state.E_curr
    rhs = ops.Meps.values * (2.0 * Ec - Ep) + 0.5 * tau * ops.Msig.values * Ep
    force = ops.A @ Ec
    if j_k is not None:
        force = force + ops.M1.values * j_k
    rhs -= tau * tau * force
    En = rhs / ops.Mlhs.values
    En[ops.mesh.boundary_dofs()] = 0.0
    if not np.all(np.isfinite(En)):
        raise BlowUpError(state.k + 1)
    return StepState(k=state.k + 1, tau=tau, E_prev=Ec, E_curr=En)


def run(mesh, field, source, T, tau, observers=(), state=None, cfl_C=DEFAULT_CFL_C,
        cfl_override=False, ops=None):
    """Integrate to ``t = T``.

    ``source(k)`` returns the nodal source ``j^k`` at ``t_k = k tau`` (or
    ``None`` for no source). ``state`` defaults to zero initial data. Each
    observer is called as ``obs(state, ops)`` once for the initial state and
    once after every step.

    Returns ``(final_state, [obs.result for obs in observers])``.
    """
    if tau <= 0 or T <= 0:
        raise ValueError("T and tau must be positive")
    N = int(round(T / tau))
    if N < 1 or abs(N * tau - T) > 1e-12:
        raise ValueError(f"tau={tau} does not divide T={T}")
    if not cfl_override:
        limit = cfl_max_tau(mesh, field, cfl_C)
        if tau > limit:
            raise CFLError(f"tau={tau:g} exceeds the CFL bound {limit:g} (C={cfl_C:g})")
    if ops is None:
        ops = build_operators(mesh, field, tau)
    if state is None:
        zero = np.zeros(mesh.ndof)
        state = init_state(zero, zero, tau)
    for obs in observers:
        obs(state, ops)
    # growth is caught by the finiteness check in step(), not by numpy warnings
    with np.errstate(over="ignore", invalid="ignore"):
        while state.k < N:
            j_k = source(state.k) if source is not None else None
            try:
                state = step(state, ops, j_k)
            except BlowUpError as exc:
                log.error("blow-up at step %d (last finite level %d)", exc.step_index, state.k)
                raise
            for obs in observers:
                obs(state, ops)
    return state, [getattr(obs, "result", None) for obs in observers]


class SnapshotWriter:
    """Observer writing ``snapshot_{k}.csv`` (x, y, E1, E2) every ``every`` levels."""

    def __init__(self, directory, every=1):
        self.directory = directory
        self.every = max(1, int(every))
        self.result = []

    def __call__(self, state, ops):
        if state.k % self.every:
            return
        os.makedirs(self.directory, exist_ok=True)
        path = os.path.join(self.directory, f"snapshot_{state.k}.csv")
        rows = np.column_stack([ops.mesh.vertices, state.E_curr.reshape(-1, 2)]).tolist()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "y", "E1", "E2"])
            writer.writerows(rows)
        self.result.append(path)


def leapfrog_invariant(state, ops):
    """``|(E^k - E^{k-1})/tau|^2_{M1} + (K E^k) . E^{k-1}``; conserved when eps=1, sigma=0, j=0."""
    d = (state.E_curr - state.E_prev) / state.tau
    return float(d @ (ops.M1.values * d) + state.E_prev @ (ops.K @ state.E_curr))


def _stays_bounded(ops, E0, tau, n_steps, growth):
    state = StepState(k=1, tau=tau, E_prev=E0, E_curr=E0.copy())
    ref = np.max(np.abs(E0))
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            try:
                state = step(state, ops)
            except BlowUpError:
                return False
            if np.max(np.abs(state.E_curr)) >= growth * ref:
                return False
    return True


def estimate_stability_threshold(mesh, field, n_steps=200, seed=0, rel_width=1e-2,
                                 lo=1e-5, hi=None, growth=1e3):
    """Bisect on ``tau`` for the largest step keeping random data bounded.

    Initial data are seeded uniform random nodal values (zero on the
    boundary), so every discrete mode is excited. A run of ``n_steps`` is
    stable when the maximum dof magnitude stays below ``growth`` times its
    initial value.
    """
    hi = mesh.h if hi is None else hi
    rng = np.random.default_rng(seed)
    E0 = apply_dirichlet(rng.uniform(-1.0, 1.0, mesh.ndof), mesh)

    def stable(tau):
        return _stays_bounded(build_operators(mesh, field, tau), E0, tau, n_steps, growth)

    if stable(hi):
        return hi
    while (hi - lo) > rel_width * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
