"""Recentering a surface onto the sphere family by the pairing conditions."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BarycenterError, ReductionError
from .harmonics import get_basis, n_coeffs, sobolev_norm
from .metric import make_metric
from .reduction import assemble_L, dPhi, solve_LS
from .surface import GraphSurface, extrinsic_data

_RATIO = (0.5, 2.0)
_FLAT = make_metric("flat")


def _directions(basis):
    """Unit radial vectors of the quadrature grid, shape (Nt, Np, 3)."""
    st = np.sin(basis.theta)[:, None]
    ct = np.cos(basis.theta)[:, None]
    cp = np.cos(basis.phi)[None, :]
    sp = np.sin(basis.phi)[None, :]
    return np.stack(np.broadcast_arrays(st * cp, st * sp, ct + 0.0 * cp), axis=-1)


def _radial_resample(x, z, basis):
    """Radial function of the surface about the center z, on the grid rays.

    Each node solves |z + t v - x.z| = x.r (1 + phi_x(w)) along its ray,
    starting from the round-sphere closed form.  The iteration slope is the
    ray-normal alignment only, so it contracts at rate O(|grad phi_x|).
    """
    v = _directions(basis)
    delta = np.asarray(x.z, dtype=float) - np.asarray(z, dtype=float)
    dn = float(np.linalg.norm(delta))
    if dn <= 1e-13 * (x.r + dn):
        return x.r * (1.0 + basis.synthesize(x.c))
    mu = v @ delta
    disc = mu ** 2 - dn ** 2 + x.r ** 2
    if np.any(disc <= 0.0):
        raise BarycenterError("no ray intersection about the proposed center",
                              {"offset": dn, "radius": float(x.r)})
    t = mu + np.sqrt(disc)
    for _ in range(50):
        u = t[..., None] * v - delta
        un = np.linalg.norm(u, axis=-1)
        w = u / un[..., None]
        align = np.einsum("ijk,ijk->ij", w, v)
        if np.min(align) <= 0.2:
            raise BarycenterError("grazing ray about the proposed center",
                                  {"offset": dn, "alignment": float(np.min(align))})
        th = np.arccos(np.clip(w[..., 2], -1.0, 1.0))
        ph = np.arctan2(w[..., 1], w[..., 0])
        f = un - x.r * (1.0 + basis.point_eval(x.c, th, ph))
        if np.max(np.abs(f)) <= 1e-13 * x.r:
            return t
        t = t - f / align
    raise BarycenterError("ray resampling did not converge",
                          {"offset": dn, "residual": float(np.max(np.abs(f)))})


def _solve_graph(metric, r, z, L, tol, seed):
    """Equilibrium graph at the base point, warm-threaded through seed."""
    if seed is None:
        return solve_LS(metric, r, z, L=L, tol=tol)
    init = seed.get("phi")
    if init is not None and not np.any(init):
        init = None
    try:
        sol = solve_LS(metric, r, z, L=L, tol=tol, initial=init,
                       operator=seed.get("op"))
    except ReductionError:
        seed.pop("phi", None)
        seed.pop("op", None)
        sol = solve_LS(metric, r, z, L=L, tol=tol)
    seed["phi"] = sol.phi
    if sol.operator is not None:
        seed["op"] = sol.operator
    return sol


def _graph_derivative(metric, r, z, L, tol, sol, seed):
    """Derivative of the equilibrium graph in (r, z).

    A center that gated to the round graph is stationary at resolution on
    the whole stencil, so the derivative vanishes there; this also keeps
    parity-protected components exactly zero.
    """
    if not np.any(sol.phi) and sol.iterations == 0:
        return np.zeros((4, n_coeffs(L)))
    if seed is None:
        return dPhi(metric, r, z, L=L, tol=tol)
    op = seed.get("op")
    if op is None:
        op = assemble_L(metric, r, z, base=sol.phi, L=L, check_columns=0)
        seed["op"] = op
    zeta = np.concatenate(([r], np.asarray(z, dtype=float)))
    out = np.empty((4, n_coeffs(L)))
    for a in range(4):
        h = 1e-4 * (abs(zeta[a]) + 1.0)
        plus, minus = zeta.copy(), zeta.copy()
        plus[a] += h
        minus[a] -= h
        sp = solve_LS(metric, plus[0], plus[1:], L=L, tol=tol,
                      initial=sol.phi, operator=op)
        sm = solve_LS(metric, minus[0], minus[1:], L=L, tol=tol,
                      initial=sol.phi, operator=op)
        out[a] = (sp.phi - sm.phi) / (2 * h)
    return out


def _frame_coeffs(metric, r, z, L, sol, dphi):
    """Harmonic rows of the family frame at the equilibrium graph."""
    b = get_basis(L)
    phi = b.synthesize(sol.phi)
    s = GraphSurface(r=r, z=z, c=sol.phi, L=L)
    ed = extrinsic_data(s, metric)
    g = metric.at(ed.x)
    f = np.empty((4,) + phi.shape)
    f[0] = (1.0 + phi + r * b.synthesize(dphi[0])) * ed.gvn
    ge_nu = np.einsum("ijab,ija->ijb", g, ed.nu)
    for j in range(3):
        f[1 + j] = ge_nu[..., j] + r * b.synthesize(dphi[1 + j]) * ed.gvn
    C = np.stack([b.analyze(f[a]) for a in range(4)])
    return C, ed


def _state(metric, x, zeta, L, tol, seed):
    """Fluctuation, resampled radius, graph solution and frame rows at zeta."""
    r = float(zeta[0])
    z = np.asarray(zeta[1:], dtype=float)
    b = get_basis(L)
    sol = _solve_graph(metric, r, z, L, tol, seed)
    t = _radial_resample(x, z, b)
    ratio_lo = float(np.min(t)) / r
    ratio_hi = float(np.max(t)) / r
    if ratio_lo <= _RATIO[0] or ratio_hi >= _RATIO[1]:
        raise BarycenterError("surface not star-shaped about the proposed "
                              "center at the required radius ratio",
                              {"ratio_min": ratio_lo, "ratio_max": ratio_hi})
    xi = b.analyze(t / r - 1.0) - sol.phi
    dphi = _graph_derivative(metric, r, z, L, tol, sol, seed)
    C, _ = _frame_coeffs(metric, r, z, L, sol, dphi)
    return xi, t, sol, dphi, C


def decompose(metric, x, zeta, L=None, tol=1e-10):
    """Fluctuation coefficients of the surface about the base point zeta.

    The surface is resampled as a radial graph about the proposed center
    and the equilibrium graph at zeta is subtracted.
    """
    L = x.L if L is None else L
    r = float(zeta[0])
    z = np.asarray(zeta[1:], dtype=float)
    b = get_basis(L)
    sol = solve_LS(metric, r, z, L=L, tol=tol)
    t = _radial_resample(x, z, b)
    ratio_lo = float(np.min(t)) / r
    ratio_hi = float(np.max(t)) / r
    if ratio_lo <= _RATIO[0] or ratio_hi >= _RATIO[1]:
        raise BarycenterError("surface not star-shaped about the proposed "
                              "center at the required radius ratio",
                              {"ratio_min": ratio_lo, "ratio_max": ratio_hi})
    return b.analyze(t / r - 1.0) - sol.phi


def gamma(metric, x, zeta, L=None, tol=1e-10):
    """Pairings of the fluctuation at zeta against the family frame."""
    L = x.L if L is None else L
    xi, _, _, _, C = _state(metric, x, np.asarray(zeta, dtype=float), L, tol,
                            seed=None)
    return C @ xi


@dataclass
class BarycenterResult:
    zeta: np.ndarray       # base point solving the pairing conditions
    xi: np.ndarray         # fluctuation coefficients about zeta
    gamma: np.ndarray      # final frame pairings, all below gtol
    iterations: int
    recon_error: float     # max nodal gap of theta(Phi + xi) to the input


def solve_barycenter(metric, x, L=None, tol=1e-10, gtol=1e-10, delta0=0.05,
                     max_iter=50, seed=None):
    """Newton solve of the four pairing conditions for the barycenter.

    The initial guess is the Euclidean area average of the surface with the
    flat area radius.  The Newton matrix uses the analytic derivative of
    the fluctuation in the base point together with the graph derivative;
    the frame-motion term it drops is O(||xi||) and only affects the
    contraction rate.  Steps are halved until the pairing norm decreases.
    A seed dict shared across calls threads warm starts through repeated
    solves at nearby surfaces.
    """
    L = x.L if L is None else L
    b = get_basis(L)
    n = n_coeffs(L)
    ed0 = extrinsic_data(x, _FLAT)
    a0 = ed0.integrate(1.0)
    z0 = np.array([ed0.integrate(ed0.x[..., j]) for j in range(3)]) / a0
    zeta = np.concatenate(([np.sqrt(a0 / (4.0 * np.pi))], z0))
    seed = {} if seed is None else seed
    xi, t, sol, dphi, C = _state(metric, x, zeta, L, tol, seed)
    if sobolev_norm(xi, 4, L) > delta0:
        raise BarycenterError("fluctuation outside the admission tube",
                              {"norm": sobolev_norm(xi, 4, L), "delta0": delta0})
    gam = C @ xi
    v = _directions(b)
    it = 0
    while np.max(np.abs(gam)) > gtol:
        if it >= max_iter:
            raise BarycenterError("pairing iteration did not converge",
                                  {"gamma": np.abs(gam).max(),
                                   "iterations": it})
        arows = np.empty((4, n))
        arows[0] = b.analyze(-t / zeta[0] ** 2) - dphi[0]
        for j in range(3):
            arows[1 + j] = b.analyze(-v[..., j] / zeta[0]) - dphi[1 + j]
        m = C @ arows.T  # m[beta, alpha] = d gamma_beta / d zeta_alpha
        try:
            step = scipy.linalg.solve(m, -gam)
        except scipy.linalg.LinAlgError as exc:
            raise BarycenterError("singular pairing derivative",
                                  {"zeta": zeta.tolist()}) from exc
        size = np.max(np.abs(gam))
        for _ in range(50):
            zt = zeta + step
            if zt[0] > 2.0:
                try:
                    state_t = _state(metric, x, zt, L, tol, seed)
                    gam_t = state_t[4] @ state_t[0]
                    if np.max(np.abs(gam_t)) < size:
                        break
                except BarycenterError:
                    pass
            step = 0.5 * step
        else:
            raise BarycenterError("pairing step search failed",
                                  {"gamma": size, "zeta": zeta.tolist()})
        zeta = zt
        xi, t, sol, dphi, C = state_t
        gam = gam_t
        it += 1
    recon = float(np.max(np.abs(t - zeta[0] * (1.0 + b.synthesize(b.analyze(
        t / zeta[0] - 1.0))))))
    return BarycenterResult(zeta=zeta, xi=xi, gamma=gam, iterations=it,
                            recon_error=recon)
