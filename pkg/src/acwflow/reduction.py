r"""Reduction of the constrained flow onto the sphere family.

Around each base point (r, z) the graph directions split into the span of the
degree <= 1 harmonics (moved by the barycenter) and its complement.  This
module pulls the residual field back to the unit sphere, assembles the
linearized operator of the graph velocity as a dense matrix, solves for the
equilibrium graph in the complement by Newton iteration, differentiates it in
the base point, and builds the moving frame with its projector.

All operator quantities act on harmonic coefficients of the graph function in
graph-rate units (the time derivative of phi), which makes the flat spectrum
l(l+1)(l(l+1)-2)/r^4.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ReductionError
from .harmonics import get_basis, n_coeffs, project_Pbar
from .surface import GraphSurface, extrinsic_data, velocity_fields, willmore_energy

__all__ = [
    "LinearizedOperator", "LSResult", "Frame", "pullback_Wbar",
    "pullback_energy", "assemble_L", "solve_LS", "dPhi", "frame_and_Q",
    "spectral_diagnostics", "quadratic_remainder", "clear_cache",
]

_LS_CACHE = {}
_OP_CACHE = {}


def _key(metric, r, z, L, extra=()):
    z = np.asarray(z, dtype=float)
    return (metric.spec.key(), round(float(r), 9), tuple(np.round(z, 9)), L) + tuple(extra)


def clear_cache():
    _LS_CACHE.clear()
    _OP_CACHE.clear()


def _surface(r, z, c, L):
    return GraphSurface(r=float(r), z=np.asarray(z, dtype=float),
                        c=np.asarray(c, dtype=float), L=L)


def pullback_Wbar(metric, r, z, c=None, L=16):
    """Residual field -(W + lam H) of the graph surface, on the grid."""
    c = np.zeros(n_coeffs(L)) if c is None else c
    return velocity_fields(_surface(r, z, c, L), metric).wbar


def pullback_energy(metric, r, z, c=None, L=16):
    """Willmore energy of the graph surface at the base point."""
    c = np.zeros(n_coeffs(L)) if c is None else c
    return willmore_energy(_surface(r, z, c, L), metric)


def _rate_coeffs(metric, r, z, c, L):
    """Harmonic coefficients of the graph velocity d phi / dt."""
    vf = velocity_fields(_surface(r, z, c, L), metric)
    return vf.ed.basis.analyze(vf.graph_rate)


@dataclass
class LinearizedOperator:
    matrix: np.ndarray       # symmetrized, n x n
    r: float
    z: np.ndarray
    L: int
    metric_key: str
    base: np.ndarray         # graph coefficients the operator was assembled at
    asymmetry: float         # relative norm of the skew part before symmetrizing
    richardson_error: float  # step-halving consistency of sampled columns

    def eigenvalues(self):
        return scipy.linalg.eigh(self.matrix, eigvals_only=True)

    def kernel_dim(self, rel_cutoff=1e-6):
        ev = np.abs(self.eigenvalues())
        return int(np.sum(ev <= rel_cutoff * ev.max()))


def assemble_L(metric, r, z, base=None, L=16, fd_step=1e-5, check_columns=10,
               seed=0):
    """Dense linearization of minus the graph velocity at the base graph.

    Columns are central finite differences of the velocity coefficients in
    each harmonic direction, with step fd_step * (||base|| + 1).  The matrix
    is symmetrized; the skew norm and a Richardson step-halving check on
    randomly sampled columns are reported on the result.
    """
    n = n_coeffs(L)
    base = np.zeros(n) if base is None else np.asarray(base, dtype=float)
    key = _key(metric, r, z, L, ("L", tuple(np.round(base, 12)), fd_step))
    hit = _OP_CACHE.get(key)
    if hit is not None:
        return hit
    eps = fd_step * (np.linalg.norm(base) + 1.0)

    def column(j, h):
        e = np.zeros(n)
        e[j] = h
        vp = _rate_coeffs(metric, r, z, base + e, L)
        vm = _rate_coeffs(metric, r, z, base - e, L)
        return -(vp - vm) / (2 * h)

    M = np.empty((n, n))
    for j in range(n):
        M[:, j] = column(j, eps)

    rich = 0.0
    if check_columns:
        rng = np.random.default_rng(seed)
        for j in rng.choice(n, size=min(check_columns, n), replace=False):
            half = column(j, eps / 2)
            extrap = (4 * half - M[:, j]) / 3
            rich = max(rich, np.linalg.norm(half - extrap)
                       / (np.linalg.norm(extrap) + 1e-300))

    scale = np.linalg.norm(M)
    asym = np.linalg.norm(M - M.T) / (scale + 1e-300)
    op = LinearizedOperator(matrix=0.5 * (M + M.T), r=float(r),
                           z=np.asarray(z, dtype=float), L=L,
                           metric_key=metric.spec.key(), base=base,
                           asymmetry=float(asym), richardson_error=float(rich))
    _OP_CACHE[key] = op
    return op


@dataclass
class LSResult:
    phi: np.ndarray          # equilibrium graph coefficients, P phi = 0
    residual: float          # final projected velocity norm
    iterations: int          # accepted Newton steps
    converged: bool
    history: list
    operator: LinearizedOperator
    dphi: np.ndarray = None  # (4, n) derivatives in the base point, on demand


def _projected_residual(metric, r, z, c, L):
    return project_Pbar(_rate_coeffs(metric, r, z, c, L), L)


def solve_LS(metric, r, z, L=16, tol=1e-10, max_iter=8, initial=None,
             operator=None):
    """Newton solve for the equilibrium graph in the degree >= 2 complement.

    Starts from zero (or a warm start) and accepts steps only while they
    reduce the projected residual.  Cold starts whose correction would fall
    below coefficient resolution return the round graph with zero
    iterations.  The Jacobian block is refreshed whenever the iterate moves
    by more than 1% of its scale.
    """
    n = n_coeffs(L)
    cache_key = _key(metric, r, z, L, (tol,)) if initial is None else None
    if cache_key is not None and cache_key in _LS_CACHE:
        return _LS_CACHE[cache_key]

    cold = initial is None
    c = np.zeros(n) if cold else project_Pbar(np.array(initial, dtype=float), L)
    res = _projected_residual(metric, r, z, c, L)
    rnorm = np.linalg.norm(res)
    history = [rnorm]
    op = operator
    op_base = None
    accepted = 0
    # smallest Jacobian-block eigenvalue is >= 20/r^4 for metrics in the
    # admissible class, so this bounds the Newton correction from above;
    # skip the assembly when the base point is stationary at resolution
    if cold and rnorm * r ** 4 / 20.0 <= 1e-12:
        result = LSResult(phi=c, residual=float(rnorm), iterations=0,
                          converged=True, history=history, operator=op)
        if cache_key is not None:
            _LS_CACHE[cache_key] = result
        return result

    for _ in range(max_iter):
        if rnorm == 0.0:
            break
        if op is None or (op_base is not None
                          and np.linalg.norm(c - op_base) > 0.01 * (np.linalg.norm(c) + 1.0)):
            op = assemble_L(metric, r, z, base=c, L=L, check_columns=0)
        op_base = op.base
        J = op.matrix[4:, 4:]
        try:
            step = scipy.linalg.solve(J, res[4:], assume_a="sym")
        except scipy.linalg.LinAlgError as exc:
            raise ReductionError("singular reduced Jacobian",
                                 {"r": float(r), "history": history}) from exc
        if cold and np.linalg.norm(step) <= 1e-12 * (np.linalg.norm(c) + 1.0):
            # correction below coefficient resolution: the base point is
            # already stationary at discretization level
            break
        trial = c.copy()
        trial[4:] += step
        tres = _projected_residual(metric, r, z, trial, L)
        tnorm = np.linalg.norm(tres)
        if tnorm >= 0.5 * rnorm:
            break
        c, res, rnorm = trial, tres, tnorm
        history.append(rnorm)
        accepted += 1
        if rnorm <= 1e-2 * tol:
            break

    if rnorm > tol:
        raise ReductionError(
            "projected velocity residual did not converge",
            {"r": float(r), "residual": float(rnorm), "history": history})
    if op is None:
        op = assemble_L(metric, r, z, base=c, L=L, check_columns=0)
    result = LSResult(phi=c, residual=float(rnorm), iterations=accepted,
                      converged=True, history=history, operator=op)
    if cache_key is not None:
        _LS_CACHE[cache_key] = result
    return result


def dPhi(metric, r, z, L=16, tol=1e-10, rel_step=1e-4):
    """Central differences of the equilibrium graph in the four base
    parameters (r, z1, z2, z3); rows ordered the same way."""
    z = np.asarray(z, dtype=float)
    center = solve_LS(metric, r, z, L=L, tol=tol)
    if center.dphi is not None:
        return center.dphi
    op = center.operator
    if op is None:
        op = assemble_L(metric, r, z, base=center.phi, L=L, check_columns=0)
    out = np.empty((4, n_coeffs(L)))
    for a in range(4):
        zeta = np.concatenate(([r], z))
        h = rel_step * (abs(zeta[a]) + 1.0)
        plus, minus = zeta.copy(), zeta.copy()
        plus[a] += h
        minus[a] -= h
        sp = solve_LS(metric, plus[0], plus[1:], L=L, tol=tol,
                      initial=center.phi, operator=op)
        sm = solve_LS(metric, minus[0], minus[1:], L=L, tol=tol,
                      initial=center.phi, operator=op)
        out[a] = (sp.phi - sm.phi) / (2 * h)
    center.dphi = out
    return out


@dataclass
class Frame:
    f: np.ndarray        # (4, Ntheta, Nphi) normal components of the base motions
    V: np.ndarray        # (4, 4) Gram matrix in the unit-sphere pairing
    C: np.ndarray        # (4, n) harmonic coefficients of the frame fields
    Q: np.ndarray = field(init=False)  # (n, n) projector onto span of the frame

    def __post_init__(self):
        self.Q = self.C.T @ scipy.linalg.solve(self.V, self.C, assume_a="pos")


def frame_and_Q(metric, r, z, L=16, tol=1e-10):
    """Moving frame f_alpha (normal components of the base-point motions of
    the reduced surface) and the projector onto its span."""
    sol = solve_LS(metric, r, z, L=L, tol=tol)
    dphi = dPhi(metric, r, z, L=L, tol=tol)
    s = _surface(r, z, sol.phi, L)
    ed = extrinsic_data(s, metric)
    b = ed.basis
    phi = b.synthesize(sol.phi)
    g = metric.at(ed.x)

    f = np.empty((4,) + phi.shape)
    f[0] = (1.0 + phi + r * b.synthesize(dphi[0])) * ed.gvn
    ge_nu = np.einsum("ijab,ija->ijb", g, ed.nu)
    for j in range(3):
        f[1 + j] = ge_nu[..., j] + r * b.synthesize(dphi[1 + j]) * ed.gvn

    C = np.stack([b.analyze(f[a]) for a in range(4)])
    V = C @ C.T
    return Frame(f=f, V=V, C=C)


@dataclass
class SpectralReport:
    eigenvalues: np.ndarray
    kernel_dim: int
    operator_norm: float
    lq_norm: float           # ||L Q||, smallness of the frame as near-kernel
    min_rayleigh_kerq: float  # smallest Rayleigh quotient on ker Q
    asymmetry: float


def spectral_diagnostics(metric, r, z, L=16, tol=1e-10):
    """Eigenvalue diagnostics of the linearized operator at the reduced
    surface against the frame projector."""
    sol = solve_LS(metric, r, z, L=L, tol=tol)
    op = assemble_L(metric, r, z, base=sol.phi, L=L, check_columns=0)
    fr = frame_and_Q(metric, r, z, L=L, tol=tol)
    Lm = op.matrix
    ev = scipy.linalg.eigh(Lm, eigvals_only=True)
    lmax = np.abs(ev).max()
    # orthonormal basis of ker Q from the projector's eigendecomposition
    qev, qvec = scipy.linalg.eigh(fr.Q)
    B = qvec[:, qev < 0.5]
    restricted = B.T @ Lm @ B
    min_ray = scipy.linalg.eigh(restricted, eigvals_only=True)[0]
    return SpectralReport(
        eigenvalues=ev,
        kernel_dim=int(np.sum(np.abs(ev) <= 1e-6 * lmax)),
        operator_norm=float(lmax),
        lq_norm=float(np.linalg.norm(Lm @ fr.Q, 2)),
        min_rayleigh_kerq=float(min_ray),
        asymmetry=op.asymmetry,
    )


def quadratic_remainder(metric, r, z, xi, L=16, tol=1e-10):
    """Norm of the velocity nonlinearity beyond the linear term at the
    reduced surface; scales quadratically in the perturbation."""
    xi = np.asarray(xi, dtype=float)
    sol = solve_LS(metric, r, z, L=L, tol=tol)
    op = assemble_L(metric, r, z, base=sol.phi, L=L, check_columns=0)
    v0 = _rate_coeffs(metric, r, z, sol.phi, L)
    v1 = _rate_coeffs(metric, r, z, sol.phi + xi, L)
    return float(np.linalg.norm(v1 - v0 + op.matrix @ xi))
