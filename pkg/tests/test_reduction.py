import numpy as np
import pytest
from numpy.testing import assert_allclose

from acwflow.harmonics import (degree_of_index, get_basis, lm_index, n_coeffs,
                               sobolev_norm)
from acwflow.metric import make_metric
from acwflow import reduction as rd

FLAT = make_metric("flat")
SCHW = make_metric("schwarzschild")
PERT = make_metric("perturbed", family="quad", eta=1e-2)

RS = np.array([50.0, 100.0, 200.0, 400.0])
Z3 = np.array([0.3, 0.0, 0.0])
L12 = 12


def fit_slope(r, v):
    return np.polyfit(np.log(r), np.log(v), 1)[0]


@pytest.fixture(scope="module")
def pert_sweep():
    out = []
    for r in RS:
        sol = rd.solve_LS(PERT, r, np.zeros(3), L=L12)
        dp = rd.dPhi(PERT, r, np.zeros(3), L=L12)
        fr = rd.frame_and_Q(PERT, r, np.zeros(3), L=L12)
        out.append((sol, dp, fr))
    return out


@pytest.fixture(scope="module")
def schw_sweep():
    out = []
    for r in RS:
        sol = rd.solve_LS(SCHW, r, Z3, L=L12)
        fr = rd.frame_and_Q(SCHW, r, Z3, L=L12)
        out.append((sol, fr))
    return out


@pytest.fixture(scope="module")
def flat_op():
    return rd.assemble_L(FLAT, 10.0, np.zeros(3), L=16)


def test_pullback_flat_round_zero():
    wb = rd.pullback_Wbar(FLAT, 10.0, np.zeros(3), L=8)
    assert np.abs(wb).max() <= 1e-12
    assert_allclose(rd.pullback_energy(FLAT, 10.0, np.zeros(3), L=8),
                    4 * np.pi, rtol=1e-12)


def test_pullback_energy_schwarzschild_closed_form():
    r = 50.0
    q = (r - 1.0) / (r + 1.0)
    assert_allclose(rd.pullback_energy(SCHW, r, np.zeros(3), L=L12),
                    4 * np.pi * q * q, rtol=1e-10)


@pytest.mark.parametrize("r,z,frozen", [
    (50.0, (0.0, 0.0, 0.0), None),
    (100.0, (0.0, 0.0, 0.0), None),
    (50.0, (0.3, 0.0, 0.0), 3.1203987820e-09),
    (100.0, (0.3, 0.0, 0.0), 5.3761368659e-11),
])
def test_pullback_schwarzschild_stationary(r, z, frozen):
    b = get_basis(L12)
    wb = rd.pullback_Wbar(SCHW, r, np.array(z), L=L12)
    norm = np.linalg.norm(b.analyze(wb))
    assert norm <= 1e-8
    if frozen is not None:
        assert_allclose(norm, frozen, rtol=1e-5)


def test_operator_flat_spectrum(flat_op):
    r = 10.0
    ev = np.sort(flat_op.eigenvalues())
    l_of = degree_of_index(16)
    pred = np.sort(l_of * (l_of + 1) * (l_of * (l_of + 1) - 2) / r ** 4)
    for l in range(2, 5):
        lam = l * (l + 1) * (l * (l + 1) - 2) / r ** 4
        block = ev[np.isclose(pred, lam)]
        assert_allclose(block, lam, rtol=1e-6)
    assert flat_op.kernel_dim() == 4
    assert flat_op.asymmetry <= 1e-8
    assert flat_op.richardson_error <= 1e-6


def test_operator_flat_kernel_is_low_degree_span(flat_op):
    import scipy.linalg
    ev, vec = scipy.linalg.eigh(flat_op.matrix)
    kernel = vec[:, np.argsort(np.abs(ev))[:4]]
    off = kernel.copy()
    off[:4, :] = 0.0
    assert np.linalg.norm(off) <= 1e-8


def test_operator_symmetry():
    # centered bases: the raw finite-difference matrix is already symmetric
    assert rd.assemble_L(SCHW, 50.0, np.zeros(3), L=8).asymmetry <= 1e-9
    assert rd.assemble_L(PERT, 200.0, np.zeros(3), L=8).asymmetry <= 1e-8
    # off-center the graph-rate coordinates are not the self-adjoint frame;
    # the genuine skew part decays like r^-2 and is reported, while the
    # stored matrix is symmetrized
    a50 = rd.assemble_L(SCHW, 50.0, Z3, L=8).asymmetry
    a200 = rd.assemble_L(SCHW, 200.0, Z3, L=8).asymmetry
    assert_allclose(a50, 2.2061e-04, rtol=1e-3)
    assert a200 <= a50 / 10.0
    op = rd.assemble_L(SCHW, 50.0, Z3, L=8)
    assert np.array_equal(op.matrix, op.matrix.T)


def test_operator_difference_from_flat_decays():
    diffs = []
    for r in RS:
        lg = rd.assemble_L(SCHW, r, np.zeros(3), L=L12, check_columns=0)
        l0 = rd.assemble_L(FLAT, r, np.zeros(3), L=L12, check_columns=0)
        diffs.append(np.linalg.norm(lg.matrix - l0.matrix, 2))
    assert_allclose(diffs, [5.5830350155e-04, 1.8215007961e-05,
                            5.8181320360e-07, 1.8383307466e-08], rtol=1e-4)
    assert fit_slope(RS, diffs) <= -2.5


def test_solve_flat_round_is_exact_fixed_point():
    sol = rd.solve_LS(FLAT, 10.0, np.zeros(3), L=16)
    assert sol.iterations == 0
    assert sol.converged
    assert np.all(sol.phi == 0.0)
    assert sol.residual <= 1e-10


def test_solve_schwarzschild_centered_is_round():
    sol = rd.solve_LS(SCHW, 100.0, np.zeros(3), L=L12)
    assert sol.iterations == 0
    assert np.all(sol.phi == 0.0)


def test_solve_schwarzschild_offcenter(schw_sweep):
    sol = schw_sweep[0][0]
    assert sol.iterations >= 1
    assert sol.residual <= 1e-12
    assert np.all(sol.phi[:4] == 0.0)
    assert_allclose(np.linalg.norm(sol.phi), 2.2480794668e-06, rtol=1e-5)


def test_solve_schwarzschild_offcenter_decay(schw_sweep):
    h4 = [sobolev_norm(sol.phi, 4, L12) for sol, _ in schw_sweep]
    assert_allclose(h4, [1.1016250402e-04, 1.3904308311e-05,
                         1.7438917166e-06, 2.1826395114e-07], rtol=1e-5)
    assert -3.1 < fit_slope(RS, h4) < -2.9


def test_solve_perturbed_sweep_scaling(pert_sweep):
    h4 = [sobolev_norm(sol.phi, 4, L12) for sol, _, _ in pert_sweep]
    assert_allclose(h4, [4.3175095975e-06, 1.1368883170e-06,
                         2.9156306593e-07, 7.3817116672e-08], rtol=1e-5)
    assert -2.3 < fit_slope(RS, h4) < -1.7


def test_solve_unique_from_random_initials():
    rng = np.random.default_rng(7)
    n = n_coeffs(8)
    sols = [rd.solve_LS(PERT, 50.0, np.zeros(3), L=8).phi]
    for _ in range(3):
        init = np.zeros(n)
        init[4:] = 1e-4 * rng.standard_normal(n - 4) / np.sqrt(n)
        sols.append(rd.solve_LS(PERT, 50.0, np.zeros(3), L=8, initial=init).phi)
    worst = max(np.linalg.norm(a - b)
                for i, a in enumerate(sols) for b in sols[i + 1:])
    assert worst <= 1e-8


def test_solve_even_metric_gives_even_graph(pert_sweep):
    phi = pert_sweep[0][0].phi
    odd = np.abs(phi[degree_of_index(L12) % 2 == 1]).max()
    assert odd <= 1e-9


def test_dphi_flat_zero():
    dp = rd.dPhi(FLAT, 10.0, np.zeros(3), L=L12)
    assert np.abs(dp).max() <= 1e-8


def test_dphi_schwarzschild_centered_small():
    dp = rd.dPhi(SCHW, 100.0, np.zeros(3), L=L12)
    assert np.abs(dp).max() <= 1e-6


def test_dphi_perturbed_slopes(pert_sweep):
    dr = [sobolev_norm(dp[0], 4, L12) for _, dp, _ in pert_sweep]
    dz = [max(sobolev_norm(dp[j], 4, L12) for j in (1, 2, 3))
          for _, dp, _ in pert_sweep]
    assert_allclose(dr, [1.636366e-07, 2.215388e-08,
                         2.878099e-09, 3.669878e-10], rtol=1e-4)
    assert -3.1 < fit_slope(RS, dr) < -2.7
    # the z-derivative signal at r=400 sits below the stencil noise floor,
    # so only the first three radii carry a meaningful fit
    assert -3.1 < fit_slope(RS[:3], dz[:3]) < -2.7
    assert dz[3] <= 5e-9


def test_frame_flat_gram_and_projector():
    fr = rd.frame_and_Q(FLAT, 10.0, np.zeros(3), L=L12)
    assert_allclose(fr.V, np.diag([4 * np.pi] + [4 * np.pi / 3] * 3),
                    atol=1e-10)
    assert np.abs(fr.f[0] - 1.0).max() <= 1e-10
    P = np.zeros_like(fr.Q)
    P[:4, :4] = np.eye(4)
    assert np.linalg.norm(fr.Q - P, 2) <= 1e-8


def test_frame_projector_properties(pert_sweep):
    fr = pert_sweep[0][2]
    assert np.linalg.norm(fr.Q @ fr.Q - fr.Q, 2) <= 1e-8
    assert_allclose(fr.Q @ fr.C.T, fr.C.T, atol=1e-10)
    assert np.linalg.eigvalsh(fr.V).min() > 0.0


def test_frame_projector_approaches_low_degree_projector(schw_sweep):
    qp = []
    for _, fr in schw_sweep:
        P = np.zeros_like(fr.Q)
        P[:4, :4] = np.eye(4)
        qp.append(np.linalg.norm(fr.Q - P, 2))
    assert_allclose(qp, [2.4463706363e-04, 6.1752764103e-05,
                         1.5478046973e-05, 3.8723515411e-06], rtol=1e-5)
    assert -2.5 < fit_slope(RS, qp) < -1.5


def test_diagnostics_flat():
    rep = rd.spectral_diagnostics(FLAT, 10.0, np.zeros(3), L=16)
    assert rep.kernel_dim == 4
    assert rep.lq_norm <= 2e-8
    assert_allclose(rep.min_rayleigh_kerq, 24.0 / 10.0 ** 4, rtol=1e-8)


def test_diagnostics_schwarzschild():
    rep = rd.spectral_diagnostics(SCHW, 100.0, np.zeros(3), L=L12)
    assert rep.kernel_dim == 4
    assert rep.lq_norm <= 1e-2 * rep.operator_norm
    assert_allclose(rep.min_rayleigh_kerq, 2.2606654590e-07, rtol=1e-5)


def test_diagnostics_restricted_form_positive_on_sample():
    for r in (10.0, 30.0, 100.0):
        for z1 in (-0.3, 0.0, 0.3):
            for z2 in (-0.3, 0.0, 0.3):
                rep = rd.spectral_diagnostics(SCHW, r, np.array([z1, z2, 0.0]),
                                              L=8)
                assert rep.min_rayleigh_kerq > 0.0


def test_quadratic_remainder_scaling():
    for metric, r in ((FLAT, 10.0), (PERT, 50.0)):
        rems = []
        for eps in (1e-2, 5e-3):
            xi = np.zeros(n_coeffs(L12))
            xi[lm_index(2, 0)] = eps
            rems.append(rd.quadratic_remainder(metric, r, np.zeros(3), xi,
                                               L=L12))
        assert 3.5 <= rems[0] / rems[1] <= 4.5
    assert rd.quadratic_remainder(FLAT, 10.0, np.zeros(3),
                                  np.zeros(n_coeffs(L12)), L=L12) == 0.0


def test_energy_gradient_matches_residual_pairing():
    # along area-preserving directions the energy gradient is the residual
    # field itself, up to the normal-speed conversion weight
    from acwflow.surface import GraphSurface, extrinsic_data
    r, L = 50.0, 8
    rng = np.random.default_rng(3)
    n = n_coeffs(L)
    damp = (1.0 + degree_of_index(L) * (degree_of_index(L) + 1.0)) ** -2
    base = np.zeros(n)
    base[4:] = 1e-2 * (rng.standard_normal(n - 4) * damp[4:])
    u = np.zeros(n)
    u[4:] = rng.standard_normal(n - 4)
    u /= np.linalg.norm(u)
    s = GraphSurface(r=r, z=np.zeros(3), c=base, L=L)
    ed = extrinsic_data(s, PERT)
    b = ed.basis
    # area form of a coefficient direction is <., q> with q built from the
    # measure density, so projecting against q is exactly area-neutral
    # within the band limit
    q = b.analyze(ed.H * r * ed.gvn * ed.qw / b.wq)
    w = u - (u @ q) / (q @ q) * q
    f = r * ed.gvn * b.synthesize(w)
    assert abs(ed.integrate(ed.H * f)) <= 1e-9
    wb = rd.pullback_Wbar(PERT, r, np.zeros(3), base, L=L)
    pairing = 0.5 * ed.integrate(wb * f)

    def denergy(eps):
        return (rd.pullback_energy(PERT, r, np.zeros(3), base + eps * w, L=L)
                - rd.pullback_energy(PERT, r, np.zeros(3), base - eps * w, L=L)) / (2 * eps)

    de = (4 * denergy(2.5e-4) - denergy(5e-4)) / 3
    assert_allclose(de, pairing, rtol=1e-6)


def test_solver_cache_returns_same_result():
    a = rd.solve_LS(SCHW, 100.0, np.zeros(3), L=8)
    b = rd.solve_LS(SCHW, 100.0, np.zeros(3), L=8)
    assert a is b
