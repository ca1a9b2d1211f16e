import numpy as np
import pytest
from numpy.testing import assert_allclose

from acwflow.action import EffectiveAction
from acwflow.errors import FlowError
from acwflow.flow import (FlowState, compare_adiabatic, lyapunov, run_acw,
                          run_effective, shadow, step_acw)
from acwflow.harmonics import get_basis, lm_index, n_coeffs
from acwflow.metric import make_metric
from acwflow.reduction import assemble_L, solve_LS
from acwflow.surface import GraphSurface, area

FLAT = make_metric("flat")
SCHW = make_metric("schwarzschild")
L8 = 8
N8 = n_coeffs(L8)
I20 = lm_index(2, 0)
Z3 = np.array([0.0, 0.0, 0.3])


@pytest.fixture(scope="module")
def schw_run():
    # bumped equilibrium graph over (20, 0.3 e3), two relaxation times of
    # the slowest decaying mode
    sol = solve_LS(SCHW, 20.0, Z3, L=L8)
    c0 = sol.phi.copy()
    c0[I20] += 1e-3
    x0 = GraphSurface(r=20.0, z=Z3, c=c0, L=L8)
    return run_acw(SCHW, x0, 2.0 * 20.0 ** 4 / 24.0, tol=1e-6,
                   snapshot_every=50)


@pytest.fixture(scope="module")
def schw_path(schw_run):
    return run_effective(SCHW, schw_run.zeta[0], 1.5e5, c=schw_run.final.c,
                         L=L8)


@pytest.fixture(scope="module")
def shadow_schw():
    return shadow(SCHW, np.array([20.0, 0.0, 0.0, 0.2]), L=L8, L_eff=L8)


def test_flat_round_sphere_is_fixed_point():
    x0 = GraphSurface.round(10.0, L=L8)
    dt = 10.0 ** 4 / 2400.0
    ts = run_acw(FLAT, x0, 1000 * dt, dt0=dt, adaptive=False, project=False,
                 snapshot_every=250)
    assert max(np.max(np.abs(s.surface.c)) for s in ts.snapshots) <= 1e-12
    assert np.max(np.abs(ts.area / ts.area[0] - 1.0)) <= 1e-12
    assert_allclose(ts.t[-1], 1000 * dt, rtol=1e-12)


def test_schw_centered_graph_is_fixed_point():
    sol = solve_LS(SCHW, 20.0, np.zeros(3), L=L8)
    x0 = GraphSurface(r=20.0, z=np.zeros(3), c=sol.phi, L=L8)
    ts = run_acw(SCHW, x0, 200 * 20.0 ** 4 / 2400.0, project=False,
                 snapshot_every=50)
    drift = max(np.max(np.abs(s.surface.c - sol.phi)) for s in ts.snapshots)
    assert drift <= 1e-9


def test_bump_decay_matches_linearized_eigenvalue():
    c0 = np.zeros(N8)
    c0[I20] = 1e-2
    x0 = GraphSurface(r=100.0, z=np.zeros(3), c=c0, L=L8)
    ts = run_acw(SCHW, x0, 1.2e6, project=False, snapshot_every=5)
    pbar = np.array([np.linalg.norm(s.surface.c[4:]) for s in ts.snapshots])
    assert np.all(np.diff(pbar) < 0)
    # skip the two-step startup of the explicit part before fitting
    rate = -np.polyfit(ts.t[2:], np.log(pbar[2:]), 1)[0]
    op = assemble_L(SCHW, 100.0, np.zeros(3), L=L8)
    ev, vec = np.linalg.eigh(op.matrix)
    lam20 = ev[np.argmax(np.abs(vec[I20, :]))]
    assert 1.0 / 3.0 < rate / lam20 < 3.0
    assert_allclose(rate / lam20, 0.99452, rtol=1e-2)


def test_fixed_steps_halving_consistency():
    sol = solve_LS(SCHW, 20.0, Z3, L=L8)
    c0 = sol.phi.copy()
    c0[I20] += 1e-3
    x0 = GraphSurface(r=20.0, z=Z3, c=c0, L=L8)
    b = get_basis(L8)
    fin = [run_acw(SCHW, x0, 800.0, dt0=d, adaptive=False, project=False,
                   snapshot_every=1000).final.surface.c
           for d in (20.0, 10.0, 5.0)]
    d1 = np.max(np.abs(b.synthesize(fin[0] - fin[1])))
    d2 = np.max(np.abs(b.synthesize(fin[1] - fin[2])))
    assert d1 <= 1e-6
    assert_allclose(np.log2(d1 / d2), 2.0, atol=0.3)


def test_lyapunov_zero_and_flat_mode():
    zeta = np.array([10.0, 0.0, 0.0, 0.0])
    assert lyapunov(FLAT, np.zeros(N8), zeta, L=L8) == 0.0
    xi = np.zeros(N8)
    xi[I20] = 1e-3
    assert_allclose(lyapunov(FLAT, xi, zeta, L=L8),
                    0.5 * 1e-6 * 24.0 / 10.0 ** 4, rtol=1e-9)


def test_run_projected_diagnostics(schw_run):
    ts = schw_run
    assert np.all(np.diff(ts.t) > 0)
    assert np.all(np.diff(ts.energy) <= 1e-9 * abs(ts.energy[0]))
    assert np.all(np.diff(ts.hawking) >= -1e-12)
    assert np.max(np.abs(ts.area / ts.area[0] - 1.0)) <= 1e-8
    assert np.all(np.isfinite(ts.zeta))
    assert_allclose(ts.zeta[0, 3], 0.3000141, rtol=1e-6)
    assert_allclose(ts.zeta[-1, 3], 0.2966728, rtol=1e-6)
    assert_allclose(ts.xi_h4[0], 0.0489999, rtol=1e-4)
    assert_allclose(ts.xi_h4[-1], 0.0110941, rtol=1e-3)
    # quadratic energy decreases once past the explicit-part startup
    assert np.all(ts.lyap > 0)
    assert np.all(np.diff(ts.lyap[1:]) <= 0)
    assert_allclose(ts.lyap[-1], 2.8596e-12, rtol=1e-2)


def test_fluctuation_stays_bounded(schw_run):
    ts = schw_run
    level = ts.xi_h4[-1]
    assert np.max(ts.xi_h4) <= 2.0 * (ts.xi_h4[0] + level)


def test_reduced_path_decay(schw_path):
    path = schw_path
    assert np.all(np.diff(np.abs(path.zeta[:, 3])) < 0)
    assert np.all(np.diff(path.g) <= 0)
    assert_allclose(path.zeta[-1, 3], 0.264681, rtol=1e-4)
    assert abs(path.zdot[0, 0] / path.zdot[0, 3]) <= 1e-3
    assert_allclose(abs(path.zdot[0, 0] / path.zdot[0, 3]), 7.519e-5,
                    rtol=1e-3)


def test_full_flow_tracks_reduced_path(schw_run, schw_path):
    ts = schw_run
    gaps = np.array([np.max(np.abs(ts.zeta[i]
                                   - schw_path.at(ts.t[i] - ts.t[0])))
                     for i in range(ts.t.size)])
    # the initial gap is the area-level vs barycenter radius offset at the
    # bump amplitude; the late gap grows with the traveled distance
    assert_allclose(gaps[0], 3.557e-6, rtol=1e-2)
    assert gaps.max() <= 3e-5
    assert_allclose(gaps.max(), 1.8212e-5, rtol=1e-2)


def test_reduced_path_stationary_at_critical():
    sol = solve_LS(SCHW, 20.0, np.zeros(3), L=L8)
    c = area(GraphSurface(r=20.0, z=np.zeros(3), c=sol.phi, L=L8), SCHW)
    ea = EffectiveAction(metric=SCHW, c=c, L=L8)
    cp = ea.find_critical(np.zeros(3))
    p = run_effective(SCHW, cp.zeta, 1.0e6, c=c, L=L8)
    assert np.max(np.abs(p.zeta[:, 1:] - cp.zeta[1:])) <= 1e-12
    assert np.max(np.abs(p.zdot)) <= 1e-15


def test_center_rate_and_gradient_scaling():
    # the pairing gradient of the center energy carries the r^-2 leading
    # term; the projected center rate divides out the pairing mass and
    # decays much faster
    rates, grads = [], []
    for r in (15.0, 20.0, 30.0):
        sol = solve_LS(SCHW, r, Z3, L=L8)
        c = area(GraphSurface(r=r, z=Z3, c=sol.phi, L=L8), SCHW)
        p = run_effective(SCHW, np.concatenate(([r], Z3)), 1.0, c=c, L=L8)
        ea = EffectiveAction(metric=SCHW, c=c, L=L8)
        gG = ea.grad_G(np.concatenate(([r], Z3)), method="pairing")
        rates.append(p.zdot[0, 3])
        grads.append(np.linalg.norm(gG))
    assert_allclose(rates, [-1.16569e-06, -2.50613e-07, -2.66572e-08],
                    rtol=1e-3)
    lr = np.log([15.0, 20.0, 30.0])
    lr = lr - lr.mean()
    s_rate = lr @ (np.log(np.abs(rates)) - np.log(np.abs(rates)).mean()) \
        / (lr @ lr)
    s_grad = lr @ (np.log(grads) - np.log(grads).mean()) / (lr @ lr)
    assert -2.5 <= s_grad <= -1.5
    assert_allclose(s_rate, -5.456, atol=0.25)


def test_flat_reduced_path_is_stationary():
    zf = np.array([0.0, 0.0, 0.2])
    sol = solve_LS(FLAT, 10.0, zf, L=L8)
    c = area(GraphSurface(r=10.0, z=zf, c=sol.phi, L=L8), FLAT)
    p = run_effective(FLAT, np.array([10.0, 0.0, 0.0, 0.2]), 1.0e4, c=c,
                      L=L8)
    assert np.max(np.abs(p.zdot)) <= 1e-12
    assert abs(p.zeta[-1, 3] - p.zeta[0, 3]) <= 1e-10


def test_shadow_off_center(shadow_schw):
    rep = shadow_schw
    assert rep.sup_gap <= 1e-7
    assert_allclose(rep.sup_gap, 2.654e-8, rtol=1e-2)
    assert np.isnan(rep.band) and rep.ok


def test_shadow_band_verdict(shadow_schw):
    rep = shadow(SCHW, np.array([20.0, 0.0, 0.0, 0.2]), band=1e-9, L=L8,
                 L_eff=L8)
    assert not rep.ok
    assert_allclose(rep.sup_gap, shadow_schw.sup_gap, rtol=1e-12)


def test_shadow_critical_point():
    sol = solve_LS(SCHW, 20.0, np.zeros(3), L=L8)
    c = area(GraphSurface(r=20.0, z=np.zeros(3), c=sol.phi, L=L8), SCHW)
    ea = EffectiveAction(metric=SCHW, c=c, L=L8)
    cp = ea.find_critical(np.zeros(3))
    rep = shadow(SCHW, cp.zeta, c=c, L=L8, L_eff=L8)
    assert rep.sup_gap <= 1e-8


def test_shadow_flat():
    rep = shadow(FLAT, np.array([10.0, 0.0, 0.0, 0.2]), L=L8, L_eff=L8)
    assert rep.sup_gap <= 1e-10


def test_shadow_perturbed_metric_slack(shadow_schw):
    eta = 1e-2
    pert = make_metric("perturbed", family="quad", eta=eta)
    rep = shadow(pert, np.array([20.0, 0.0, 0.0, 0.2]), L=L8, L_eff=L8)
    assert rep.sup_gap <= (1.0 + 10.0 * eta) * shadow_schw.sup_gap
    assert_allclose(rep.sup_gap, 2.647e-8, rtol=1e-2)


def test_adiabatic_sweep_scaling():
    rep = compare_adiabatic(SCHW, (15.0, 30.0), eps=1e-3, eps_power=3.0,
                            L=L8, L_eff=L8, window_factor=6.0,
                            snapshot_every=40, step_tol=1e-6)
    # initial amplitudes scale as r^-3 and dominate the post-entry sup
    assert_allclose(rep.sup_xi, [49e-3, 49e-3 / 8.0], rtol=1e-4)
    assert rep.xi_exponent <= -2.0
    assert rep.track_exponent <= -2.0
    assert rep.sup_track_late[1] <= 0.5 * rep.sup_track_late[0]
    assert_allclose(rep.sup_track, [1.388e-5, 9.097e-7], rtol=1e-2)
    assert np.all(rep.entry_time == 0.0)
    for (ts, _), level in zip(rep.runs, rep.sup_xi_late):
        assert np.max(ts.xi_h4) <= 2.0 * (ts.xi_h4[0] + level)


def test_flat_sweep_sits_at_solver_floor():
    rep = compare_adiabatic(FLAT, (15.0, 30.0), z0=(0.2, 0.0, 0.0), eps=0.0,
                            L=L8, L_eff=L8, window_factor=8.0,
                            snapshot_every=25)
    assert np.all(rep.sup_xi <= 1e-10)
    assert np.all(rep.sup_track <= 1e-12)
    assert np.isnan(rep.track_exponent)


def test_initial_and_step_error_paths():
    with pytest.raises(FlowError):
        FlowState.initial(FLAT, GraphSurface.round(10.0, L=L8), c=600.0)
    for amp in (0.4, 0.5):
        c = np.zeros(N8)
        c[lm_index(8, 8)] = amp
        x = GraphSurface(r=10.0, z=np.zeros(3), c=c, L=L8)
        with pytest.raises(FlowError):
            step_acw(FLAT, FlowState.initial(FLAT, x), 1e-3)
    sol = solve_LS(SCHW, 20.0, Z3, L=L8)
    x0 = GraphSurface(r=20.0, z=Z3, c=sol.phi, L=L8)
    with pytest.raises(FlowError):
        run_acw(SCHW, x0, 800.0, dt0=1e-3, max_steps=3, project=False)
