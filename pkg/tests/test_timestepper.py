import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from stabmaxwell.analysis import EnergyMonitor
from stabmaxwell.assembly import apply_dirichlet
from stabmaxwell.checks import check_leapfrog_conservation, smooth_initial_field
from stabmaxwell.coefficients import CoefficientField, sample_nodal
from stabmaxwell.manufactured import ExactSolution, interpolate
from stabmaxwell.study import manufactured_source, solve_manufactured
from stabmaxwell.timestepper import (BlowUpError, CFLError, SnapshotWriter, StepState,
                                     build_operators, cfl_max_tau, estimate_stability_threshold,
                                     init_state, init_state_taylor, run, step)

from conftest import mesh_at


def test_cfl_formula(field6, vacuum):
    for level in (1, 3, 6):
        assert cfl_max_tau(mesh_at(level), vacuum, C=1.0) == mesh_at(level).h
    assert cfl_max_tau(mesh_at(3), field6, C=1.0) == pytest.approx(0.0621, abs=1e-4)
    # tau = 0.0005 at l=6 fits any C up to about 15.5
    assert cfl_max_tau(mesh_at(6), field6, C=15.5) >= 0.0005
    assert cfl_max_tau(mesh_at(6), field6, C=15.6) < 0.0005
    with pytest.raises(ValueError):
        cfl_max_tau(mesh_at(3), field6, C=0.0)


def test_init_state():
    z = np.zeros(8)
    g = np.arange(8.0)
    s = init_state(z, z, 0.1)
    assert s.k == 1 and not s.E_prev.any() and not s.E_curr.any()
    s = init_state(g, z, 0.1)
    np.testing.assert_array_equal(s.E_curr, s.E_prev)
    s = init_state(z, g, 0.1)
    np.testing.assert_allclose(s.E_curr, 0.1 * g)
    with pytest.raises(ValueError):
        init_state(z, np.zeros(6), 0.1)
    with pytest.raises(ValueError):
        init_state(z, z, 0.0)


def test_zero_state_stays_zero(mesh3, field6):
    ops = build_operators(mesh3, field6, 0.001)
    z = np.zeros(mesh3.ndof)
    s = step(init_state(z, z, 0.001), ops, z)
    assert s.k == 2 and not s.E_curr.any()


def test_vacuum_step_is_plain_leapfrog(mesh3, vacuum):
    tau = 0.01
    ops = build_operators(mesh3, vacuum, tau)
    rng = np.random.default_rng(0)
    free = ~mesh3.is_boundary.repeat(2)
    E0, E1 = (np.where(free, rng.normal(size=mesh3.ndof), 0.0) for _ in range(2))
    got = step(StepState(1, tau, E0, E1), ops).E_curr
    M1 = ops.M1.values
    want = 2 * E1 - E0 - tau ** 2 * (ops.K @ E1) / M1
    np.testing.assert_allclose(got[free], want[free], rtol=1e-13, atol=1e-15)
    assert not got[~free].any()


def dense_operators(mesh, eps_h):
    """Element-by-element dense K, D and eps-weighted lumped mass."""
    n = mesh.ndof
    K, D, M = np.zeros((n, n)), np.zeros((n, n)), np.zeros(n)
    for e, tri in enumerate(mesh.triangles):
        g, area = mesh.grads[e], mesh.areas[e]
        ge = g.T @ eps_h[tri]
        em1_mean = eps_h[tri].mean() - 1.0
        for i in range(3):
            M[2 * tri[i]:2 * tri[i] + 2] += eps_h[tri[i]] * area / 3
            for j in range(3):
                for a in range(2):
                    K[2 * tri[i] + a, 2 * tri[j] + a] += area * g[i] @ g[j]
                    for b in range(2):
                        # div((eps_h - 1) phi_j e_b) = d_b eps_h / 3 + (eps_h - 1) d_b phi_j, averaged
                        D[2 * tri[i] + a, 2 * tri[j] + b] += area * g[i, a] * (
                            ge[b] / 3 + em1_mean * g[j, b])
    return K, D, M


def test_one_step_against_dense_oracle():
    mesh = mesh_at(2)
    field = CoefficientField(m=6, sigma_scale=0.0)
    tau = 0.01
    ops = build_operators(mesh, field, tau)
    exact = ExactSolution(field)
    E1 = interpolate(exact.E, mesh, 1.0)
    j1 = -interpolate(lambda x, y, t: exact.source(x, y, t, interface="exterior"), mesh, tau)
    got = step(StepState(1, tau, E1, E1), ops, j1).E_curr
    K, D, M = dense_operators(mesh, sample_nodal(field, mesh, "eps"))
    M1 = np.repeat(mesh.h ** 2 * np.ones(mesh.nno), 2)    # interior lumped masses
    free = ~mesh.is_boundary.repeat(2)
    want = E1 - tau ** 2 * ((K + D) @ E1 + M1 * j1) / M
    np.testing.assert_allclose(got[free], want[free], rtol=1e-12, atol=1e-15)


def test_run_counts_and_exits(mesh3, field6):
    count = []
    state, results = run(mesh3, field6, None, 0.25, 0.0005, [lambda s, o: count.append(s.k)])
    assert state.k == 500 and state.t == pytest.approx(0.25)
    assert count == list(range(1, 501)) and results == [None]
    g = smooth_initial_field(mesh3)
    s0 = init_state(g, g, 0.001)
    state, _ = run(mesh3, field6, None, 0.001, 0.001, state=s0)
    np.testing.assert_array_equal(state.E_curr, g + 0.001 * g)
    with pytest.raises(ValueError):
        run(mesh3, field6, None, 0.25, 0.0003)
    with pytest.raises(CFLError):
        run(mesh3, field6, None, 0.25, 0.05)


def test_blow_up_reports_step(mesh3, vacuum):
    g = apply_dirichlet(np.random.default_rng(0).uniform(-1, 1, mesh3.ndof), mesh3)
    with pytest.raises(BlowUpError) as info:
        run(mesh3, vacuum, None, 200.0, 0.125, state=init_state(g, 0 * g, 0.125),
            cfl_override=True)
    assert info.value.step_index > 2


def test_determinism():
    a, _, _, _ = solve_manufactured(6, 3)
    b, _, _, _ = solve_manufactured(6, 3)
    np.testing.assert_array_equal(a.E_curr, b.E_curr)


def test_taylor_start_matches_exact_second_derivative():
    field = CoefficientField(m=6)
    mesh = mesh_at(3)
    tau = 0.0005
    ops = build_operators(mesh, field, tau)
    z = np.zeros(mesh.ndof)
    s = init_state_taylor(z, z, manufactured_source(ExactSolution(field), mesh, tau)(0), ops)
    # E(tau) = tau^2 g / eps, so the start should be close to the interpolant
    exact = interpolate(ExactSolution(field).E, mesh, tau)
    assert np.abs(s.E_curr - exact).max() < 0.05 * np.abs(exact).max()


def final_norm(tau):
    state, ops, _, _ = solve_manufactured(6, 4, tau=tau)
    return np.sqrt(state.E_curr @ (ops.M1.values * state.E_curr))


def test_second_order_in_time():
    n1, n2, n3 = (final_norm(t) for t in (0.0005, 0.00025, 0.000125))
    ratio = abs(n1 - n2) / abs(n2 - n3)
    assert 3.2 <= ratio <= 4.8, ratio


def test_leapfrog_conservation():
    res = check_leapfrog_conservation()
    assert res.passed, res.detail
    bad = check_leapfrog_conservation(tau=0.0625)
    assert not bad.passed


def largest_stable_step(mesh, field):
    ops = build_operators(mesh, field, 1e-3)
    scale = sp.diags(1 / np.sqrt(ops.Meps.values))
    lam = spla.eigsh(scale @ ops.A @ scale, k=1, which="LA", return_eigenvectors=False)[0]
    return 2 / np.sqrt(lam)


def test_threshold_scales_with_h(vacuum):
    thr = [estimate_stability_threshold(mesh_at(l), vacuum) for l in (3, 4, 5)]
    assert all(0.3 <= t / mesh_at(l).h <= 1.0 for t, l in zip(thr, (3, 4, 5)))
    assert 0.4 <= thr[1] / thr[0] <= 0.6 and 0.4 <= thr[2] / thr[1] <= 0.6


@pytest.mark.parametrize("level", [3, 4])
def test_profile_lowers_threshold(level, vacuum, field6):
    mesh = mesh_at(level)
    plain = estimate_stability_threshold(mesh, vacuum, rel_width=1e-5, n_steps=400)
    bumpy = estimate_stability_threshold(mesh, field6, rel_width=1e-5, n_steps=400)
    assert bumpy < plain
    assert plain == pytest.approx(largest_stable_step(mesh, vacuum), rel=1e-3)
    assert bumpy == pytest.approx(largest_stable_step(mesh, field6), rel=1e-3)
    assert largest_stable_step(mesh, field6) < largest_stable_step(mesh, vacuum)


def test_snapshots(tmp_path, mesh3, vacuum):
    snaps = SnapshotWriter(tmp_path, every=7)
    monitor = EnergyMonitor()
    run(mesh3, vacuum, None, 0.01, 0.0005, [snaps, monitor])
    assert [p.rsplit("_", 1)[1] for p in snaps.result] == ["7.csv", "14.csv"]
    data = np.loadtxt(snaps.result[0], delimiter=",", skiprows=1)
    assert data.shape == (mesh3.nno, 4) and not data[:, 2:].any()
    assert len(monitor.result) == 20
