"""Self-verification properties shared by the ``verify`` command and the tests.

Each check returns a :class:`CheckResult`; none of them raise on failure.
"""

from dataclasses import dataclass

import numpy as np

from .analysis import coercivity_probe, relative_errors
from .assembly import apply_dirichlet, divdiv_stab, stiffness
from .coefficients import CoefficientField, sample_nodal
from .manufactured import ExactSolution, interpolate
from .mesh import build_structured_mesh
from .timestepper import (BlowUpError, build_operators, cfl_max_tau, init_state,
                          leapfrog_invariant, run)

__all__ = ["CheckResult", "check_mesh", "check_exactness", "check_divergence_identity",
           "check_derivative_oracle", "check_coercivity", "check_leapfrog_conservation",
           "check_dirichlet", "check_manufactured_convergence", "fd_derivatives",
           "interior_sample_points", "run_all"]

UNIT_TRIANGLE_STIFFNESS = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def check_mesh(levels=(1, 2, 3, 4, 5)):
    bad = []
    for level in levels:
        mesh = build_structured_mesh(level)
        n = 2 ** level
        if mesh.nno != (n + 1) ** 2 or mesh.nel != 2 * n * n:
            bad.append(f"l={level}: counts")
        if np.any(mesh.areas <= 0):
            bad.append(f"l={level}: nonpositive area")
        if abs(mesh.areas.sum() - 1.0) > 1e-14:
            bad.append(f"l={level}: area sum {mesh.areas.sum()!r}")
        if np.abs(mesh.grads.sum(axis=1)).max() > 1e-12 / mesh.h:
            bad.append(f"l={level}: gradient sum")
        if mesh.boundary.size != 4 * n:
            bad.append(f"l={level}: boundary count")
    return CheckResult("mesh invariants", not bad, "; ".join(bad) or f"levels {list(levels)}")


def _unit_triangle_mesh():
    from .mesh import Mesh, _geometry

    v = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    t = np.array([[0, 1, 2]])
    areas, grads = _geometry(v, t)
    return Mesh(level=0, h=1.0, vertices=v, triangles=t, areas=areas, grads=grads,
                boundary=np.arange(3), is_boundary=np.ones(3, dtype=bool))


def check_exactness(level=3, m=6, tol=1e-14):
    K = stiffness(_unit_triangle_mesh()).toarray()
    k_err = np.abs(K[0::2, 0::2] - UNIT_TRIANGLE_STIFFNESS).max()
    mesh = build_structured_mesh(level)
    eps_h = sample_nodal(CoefficientField(m=m), mesh, "eps")
    d_err = abs(divdiv_stab(mesh, eps_h, "centroid") - divdiv_stab(mesh, eps_h, "midpoint")).max()
    ok = k_err <= tol and d_err <= tol
    return CheckResult("quadrature exactness", ok,
                       f"unit stiffness err {k_err:.1e}, centroid vs midpoint div-div {d_err:.1e}")


def interior_sample_points(n, seed, field, margin=1e-4):
    """Seeded points in (0,1)^2 at least ``margin`` away from the box boundary lines."""
    rng = np.random.default_rng(seed)
    lines = np.array([field.box[0], field.box[1]])
    pts = []
    while len(pts) < n:
        p = rng.uniform(margin, 1.0 - margin, size=2)
        if np.all(np.abs(p[0] - lines) > margin) and np.all(np.abs(p[1] - lines) > margin):
            pts.append(p)
    pts = np.array(pts)
    return pts[:, 0], pts[:, 1]


def check_divergence_identity(m=6, t=0.25, n=10_000, seed=0, tol=1e-10):
    field = CoefficientField(m=m)
    exact = ExactSolution(field)
    x, y = interior_sample_points(n, seed, field)
    div = exact.div_eps_E(x, y, t)
    _, _, G, _ = exact.derivatives(x, y, t)
    scale = max(np.abs(exact.E(x, y, t)).max(), np.abs(G).max())
    worst = np.abs(div).max()
    return CheckResult("divergence identity", worst <= tol * scale,
                       f"max |div(eps E)| = {worst:.2e}, scale {scale:.3f}, m={m}")


def _central(F, x, y, dx, dy, order):
    step = dx + dy
    if order == 2:
        return (F(x + dx, y + dy) - F(x - dx, y - dy)) / (2 * step)
    if order == 4:
        return (8 * (F(x + dx, y + dy) - F(x - dx, y - dy))
                - (F(x + 2 * dx, y + 2 * dy) - F(x - 2 * dx, y - 2 * dy))) / (12 * step)
    raise ValueError(f"order must be 2 or 4, got {order}")


def fd_derivatives(exact, x, y, t, step=1e-5, order=2):
    """Central differences: gradient of ``E`` and of the closed-form gradient.

    Returns ``(gradE, hessE, curlcurlE, f)`` where second derivatives come
    from differencing the closed-form first derivatives once, and ``f`` is
    rebuilt from the differenced curl curl.
    """
    def E(px, py):
        return exact.E(px, py, t)

    def G(px, py):
        return exact.derivatives(px, py, t)[2]

    gradE = np.stack([_central(E, x, y, step, 0.0, order),
                      _central(E, x, y, 0.0, step, order)], axis=1)
    Gx = _central(G, x, y, step, 0.0, order)      # d/dx of gradE[a, d]
    Gy = _central(G, x, y, 0.0, step, order)
    hess = np.stack([Gx[:, 0], Gx[:, 1], Gy[:, 1]], axis=1)  # (2 comps, xx/xy/yy)
    dyw = hess[1, 1] - hess[0, 2]
    dxw = hess[1, 0] - hess[0, 1]
    curlcurl = np.stack([dyw, -dxw])
    dtE, dttE, _, _ = exact.derivatives(x, y, t)
    f = exact.field.epsilon(x, y) * dttE + curlcurl + exact.field.sigma(x, y) * dtE
    return gradE, hess, curlcurl, f


def _closed_hessian(exact, x, y, t):
    _, _, ddq = exact.spatial(x, y)
    return t ** 2 * ddq


def check_derivative_oracle(ms=(6, 12), t=0.25, n=100, seed=0, step=1e-5, tol=1e-6):
    """Closed forms against central differences, error relative to each quantity's scale."""
    worst = 0.0
    for m in ms:
        exact = ExactSolution(CoefficientField(m=m))
        x, y = interior_sample_points(n, seed, exact.field)
        g_fd, h_fd, cc_fd, f_fd = fd_derivatives(exact, x, y, t, step)
        _, _, g, cc = exact.derivatives(x, y, t)
        h = _closed_hessian(exact, x, y, t)
        f = exact.source(x, y, t)
        for a, b in ((g, g_fd), (h, h_fd), (cc, cc_fd), (f, f_fd)):
            worst = max(worst, float(np.abs(a - b).max() / np.abs(b).max()))
    return CheckResult("derivative oracle", worst <= tol,
                       f"max relative deviation {worst:.2e} (step {step:g}, m={list(ms)})")


def check_coercivity(level=3, m=6, n_samples=1000, seed=0, tol=1e-12):
    rep = coercivity_probe(build_structured_mesh(level), CoefficientField(m=m), n_samples, seed,
                           tol=tol)
    return CheckResult("coercivity intermediate bound", rep.intermediate_holds,
                       f"min slack {rep.min_slack:.3e}; a >= |||v|||^2/2 on "
                       f"{100 * rep.half_norm_fraction:.1f}% of {rep.n_samples} samples")


def smooth_initial_field(mesh):
    def fn(x, y, t):
        return np.stack([np.sin(np.pi * x) * np.sin(np.pi * y),
                         np.sin(2 * np.pi * x) * np.sin(np.pi * y)])
    return interpolate(fn, mesh, 0.0)


def check_leapfrog_conservation(level=4, n_steps=500, tau=None, tol=1e-8):
    """Quadratic leapfrog invariant with eps = 1, sigma = 0, j = 0."""
    mesh = build_structured_mesh(level)
    field = CoefficientField.vacuum()
    if tau is None:
        tau = 0.5 * cfl_max_tau(mesh, field)
    ops = build_operators(mesh, field, tau)
    f0 = smooth_initial_field(mesh)
    state = init_state(f0, np.zeros_like(f0), tau)
    values = []

    def record(st, _ops):
        values.append(leapfrog_invariant(st, _ops))

    try:
        run(mesh, field, None, (n_steps + 1) * tau, tau, [record], state=state, ops=ops,
            cfl_override=True)
    except BlowUpError as exc:
        return CheckResult("leapfrog conservation", False, f"blow-up at step {exc.step_index}")
    values = np.array(values)
    drift = float(np.abs(values - values[0]).max() / abs(values[0]))
    ok = bool(np.isfinite(drift) and drift <= tol)
    return CheckResult("leapfrog conservation", ok,
                       f"relative drift {drift:.2e} over {len(values) - 1} steps, tau={tau:g}")


def check_dirichlet(level=3, m=6):
    mesh = build_structured_mesh(level)
    K = stiffness(mesh) + divdiv_stab(mesh, sample_nodal(CoefficientField(m=m), mesh, "eps"))
    once = apply_dirichlet(K, mesh)
    twice = apply_dirichlet(once, mesh)
    v = np.random.default_rng(0).normal(size=mesh.ndof)
    ok = abs(once - twice).max() == 0.0 and np.array_equal(
        apply_dirichlet(v, mesh), apply_dirichlet(apply_dirichlet(v, mesh), mesh))
    return CheckResult("dirichlet idempotence", bool(ok), f"l={level}")


def check_manufactured_convergence(m=6, levels=(3, 4), min_rate=1.5, max_theta=0.03,
                                   stab_scale=1.0):
    """Short sweep: observed L2 order and finest error must look second order."""
    from .study import solve_manufactured

    errs = []
    try:
        for level in levels:
            state, ops, exact, _ = solve_manufactured(m, level, stab_scale=stab_scale)
            errs.append(relative_errors(exact, state.E_curr, ops.mesh, state.t).theta1)
    except BlowUpError as exc:
        return CheckResult("manufactured convergence", False, f"blow-up at step {exc.step_index}")
    rate = float(np.log2(errs[0] / errs[1]))
    ok = bool(np.isfinite(rate) and rate >= min_rate and errs[-1] <= max_theta)
    return CheckResult("manufactured convergence", ok,
                       f"theta1 {['%.4g' % e for e in errs]}, rate {rate:.2f}, m={m}")


def run_all(coercivity_samples=1000, leapfrog_tau=None, stab_scale=1.0):
    return [
        check_mesh(),
        check_exactness(),
        check_divergence_identity(),
        check_derivative_oracle(),
        check_coercivity(n_samples=coercivity_samples),
        check_leapfrog_conservation(tau=leapfrog_tau),
        check_dirichlet(),
        check_manufactured_convergence(stab_scale=stab_scale),
    ]
