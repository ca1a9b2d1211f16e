r"""Extrinsic geometry of graph surfaces over coordinate spheres.

A surface is the image of v -> z + r (1 + phi(v)) v for a band-limited graph
function phi.  This module assembles the induced metric, outward unit normal,
second fundamental form, mean curvature (H = 2/r on flat round spheres),
Willmore energy and operator, the area-constraint multiplier, and the normal
velocity of the constrained gradient flow, all on the quadrature grid.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import SurfaceError
from .harmonics import get_basis, sobolev_norm

__all__ = [
    "GraphSurface", "ExtrinsicData", "extrinsic_data", "surface_laplacian",
    "area", "willmore_energy", "hawking_mass", "hawking_mass_std",
    "willmore_operator", "lagrange_multiplier", "acw_velocity",
    "velocity_fields", "admissibility",
]


@dataclass
class GraphSurface:
    r: float
    z: np.ndarray
    c: np.ndarray  # harmonic coefficients of phi
    L: int

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float).reshape(3)
        self.c = np.asarray(self.c, dtype=float)
        n = (self.L + 1) ** 2
        if self.c.shape != (n,):
            raise ValueError(f"phi needs {n} coefficients, got {self.c.shape}")
        if np.linalg.norm(self.z) >= 1.0:
            raise ValueError("center must satisfy |z| < 1")

    @classmethod
    def round(cls, r, z=(0.0, 0.0, 0.0), L=16):
        """Coordinate sphere of radius r centered z (phi = 0)."""
        return cls(float(r), np.asarray(z, dtype=float), np.zeros((L + 1) ** 2), L)

    def with_coeffs(self, c):
        return GraphSurface(self.r, self.z.copy(), np.asarray(c, dtype=float), self.L)

    def h4_norm(self):
        return sobolev_norm(self.c, 4, self.L)


def _sphere_vectors(basis):
    """Unit radial vector field and its chart derivatives, shape (Nt, Np, 3)."""
    st = np.sin(basis.theta)[:, None]
    ct = np.cos(basis.theta)[:, None]
    cp = np.cos(basis.phi)[None, :]
    sp = np.sin(basis.phi)[None, :]
    z_ = np.zeros((basis.ntheta, basis.nphi))
    stack = lambda a, b, c: np.stack(np.broadcast_arrays(a, b, c), axis=-1)
    v = stack(st * cp, st * sp, ct + z_)
    vt = stack(ct * cp, ct * sp, -st + z_)
    vp = stack(-st * sp, st * cp, z_)
    vtt = -v
    vtp = stack(-ct * sp, ct * cp, z_)
    vpp = stack(-st * cp, -st * sp, z_)
    return v, vt, vp, vtt, vtp, vpp


@dataclass
class ExtrinsicData:
    surface: GraphSurface
    basis: object
    x: np.ndarray          # embedding points
    v: np.ndarray          # unit radial directions from z
    xt: np.ndarray
    xp: np.ndarray
    nu: np.ndarray         # outward unit normal (metric-normalized)
    gamma: np.ndarray      # induced metric, (..., 2, 2)
    gamma_inv: np.ndarray
    jac: np.ndarray        # sqrt(det gamma)
    qw: np.ndarray         # quadrature weights for the induced measure
    H: np.ndarray
    A: np.ndarray          # second fundamental form
    A2: np.ndarray         # |A|^2
    ring2: np.ndarray      # |A - (H/2) gamma|^2
    ric_nn: np.ndarray     # ambient Ricci contracted with nu
    gvn: np.ndarray        # g_M(v, nu), the graph conversion factor
    tgam: np.ndarray       # gamma^{ab} Gamma^{Sigma,c}_{ab}, shape (..., 2)

    def integrate(self, f):
        """Integral against the induced area measure."""
        return float(np.sum(f * self.qw))


def extrinsic_data(s, metric):
    """Assemble all extrinsic quantities of the graph surface.

    Parameters
    ----------
    s : GraphSurface
    metric : AmbientMetric

    Raises SurfaceError for invalid graphs (1 + phi <= 0) or degenerate
    induced metrics.
    """
    basis = get_basis(s.L)
    phi = basis.synthesize(s.c)
    if np.min(1.0 + phi) <= 0.0:
        raise SurfaceError("graph failure: 1 + phi <= 0",
                           {"min_graph": float(np.min(1.0 + phi))})
    pt = basis.synthesize(s.c, dt=1)
    pp = basis.synthesize(s.c, dp=1)
    ptt = basis.synthesize(s.c, dt=2)
    ptp = basis.synthesize(s.c, dt=1, dp=1)
    ppp = basis.synthesize(s.c, dp=2)
    v, vt, vp, vtt, vtp, vpp = _sphere_vectors(basis)
    r = s.r
    f = (1.0 + phi)[..., None]
    x = s.z + r * f * v
    xt = r * (pt[..., None] * v + f * vt)
    xp = r * (pp[..., None] * v + f * vp)
    xtt = r * (ptt[..., None] * v + 2 * pt[..., None] * vt + f * vtt)
    xtp = r * (ptp[..., None] * v + pt[..., None] * vp + pp[..., None] * vt + f * vtp)
    xpp = r * (ppp[..., None] * v + 2 * pp[..., None] * vp + f * vpp)

    g, ginv, gam, ric = metric.geometry(x)

    def dot(a, b):
        return np.einsum("...ij,...i,...j->...", g, a, b)

    gamma = np.empty(x.shape[:-1] + (2, 2))
    gamma[..., 0, 0] = dot(xt, xt)
    gamma[..., 0, 1] = gamma[..., 1, 0] = dot(xt, xp)
    gamma[..., 1, 1] = dot(xp, xp)
    det = gamma[..., 0, 0] * gamma[..., 1, 1] - gamma[..., 0, 1] ** 2
    if np.min(det) <= 0.0:
        raise SurfaceError("degenerate induced metric", {"min_det": float(np.min(det))})
    jac = np.sqrt(det)
    gamma_inv = np.empty_like(gamma)
    gamma_inv[..., 0, 0] = gamma[..., 1, 1] / det
    gamma_inv[..., 1, 1] = gamma[..., 0, 0] / det
    gamma_inv[..., 0, 1] = gamma_inv[..., 1, 0] = -gamma[..., 0, 1] / det

    w = np.cross(xt, xp)  # Euclidean covector orthogonal to the tangents
    nu = np.einsum("...kl,...l->...k", ginv, w)
    nn = dot(nu, nu)
    nu = nu / np.sqrt(nn)[..., None]

    # Gauss decomposition of the covariant second derivatives: the normal part
    # is the second fundamental form (outward sign), the tangential part gives
    # the surface Christoffels needed for the strong-form Laplacian.
    def covariant(d2x, xa, xb):
        return d2x + np.einsum("...kij,...i,...j->...k", gam, xa, xb)

    covs = (covariant(xtt, xt, xt), covariant(xtp, xt, xp), covariant(xpp, xp, xp))
    A = np.empty_like(gamma)
    A[..., 0, 0] = -dot(covs[0], nu)
    A[..., 0, 1] = A[..., 1, 0] = -dot(covs[1], nu)
    A[..., 1, 1] = -dot(covs[2], nu)
    H = np.einsum("...ab,...ab->...", gamma_inv, A)
    A2 = np.einsum("...ac,...bd,...ab,...cd->...", gamma_inv, gamma_inv, A, A)
    ring2 = A2 - 0.5 * H ** 2
    ric_nn = np.einsum("...ij,...i,...j->...", ric, nu, nu)
    gvn = np.einsum("...ij,...i,...j->...", g, v, nu)
    qw = basis.wq * jac / np.sin(basis.theta)[:, None]

    # tgam^c = gamma^{ab} Gamma^{Sigma,c}_{ab} with Gamma^{Sigma,c}_{ab} =
    # gamma^{cd} g(cov_ab, x_d); contract over the (tt, tp, pp) slots
    giw = np.stack([gamma_inv[..., 0, 0], 2 * gamma_inv[..., 0, 1],
                    gamma_inv[..., 1, 1]], axis=-1)
    cov_t = np.stack([dot(cv, xt) for cv in covs], axis=-1)
    cov_p = np.stack([dot(cv, xp) for cv in covs], axis=-1)
    low_t = np.einsum("...s,...s->...", giw, cov_t)
    low_p = np.einsum("...s,...s->...", giw, cov_p)
    tgam = np.empty(x.shape[:-1] + (2,))
    tgam[..., 0] = gamma_inv[..., 0, 0] * low_t + gamma_inv[..., 0, 1] * low_p
    tgam[..., 1] = gamma_inv[..., 1, 0] * low_t + gamma_inv[..., 1, 1] * low_p
    return ExtrinsicData(surface=s, basis=basis, x=x, v=v, xt=xt, xp=xp, nu=nu,
                         gamma=gamma, gamma_inv=gamma_inv, jac=jac, qw=qw,
                         H=H, A=A, A2=A2, ring2=ring2, ric_nn=ric_nn, gvn=gvn,
                         tgam=tgam)


def surface_laplacian(ed, f):
    """Laplace-Beltrami of a nodal scalar on the surface.

    Strong form gamma^{ab}(d_a d_b f - Gamma^{Sigma,c}_{ab} d_c f): only the
    smooth scalar f is differentiated spectrally, so chart-singular factors
    like 1/sin(theta) never enter a harmonic analysis.
    """
    b = ed.basis
    cf = b.analyze(f)
    ft = b.synthesize(cf, dt=1)
    fp = b.synthesize(cf, dp=1)
    ftt = b.synthesize(cf, dt=2)
    ftp = b.synthesize(cf, dt=1, dp=1)
    fpp = b.synthesize(cf, dp=2)
    gi = ed.gamma_inv
    return (gi[..., 0, 0] * ftt + 2 * gi[..., 0, 1] * ftp + gi[..., 1, 1] * fpp
            - ed.tgam[..., 0] * ft - ed.tgam[..., 1] * fp)


def area(s, metric):
    return extrinsic_data(s, metric).integrate(1.0)


def willmore_energy(s, metric, ed=None):
    ed = ed or extrinsic_data(s, metric)
    return 0.25 * ed.integrate(ed.H ** 2)


def hawking_mass(s, metric, ed=None):
    """Quasi-local mass, sqrt(|S|)/(16 pi)^{3/2} * (16 pi - 1/2 int H^2)."""
    ed = ed or extrinsic_data(s, metric)
    a = ed.integrate(1.0)
    return np.sqrt(a) / (16 * np.pi) ** 1.5 * (16 * np.pi - 0.5 * ed.integrate(ed.H ** 2))


def hawking_mass_std(s, metric, ed=None):
    """Standard normalization sqrt(|S|/16pi) (1 - int H^2 / 16 pi); equals the
    ADM mass exactly on centered Schwarzschild spheres (regression oracle)."""
    ed = ed or extrinsic_data(s, metric)
    a = ed.integrate(1.0)
    return np.sqrt(a / (16 * np.pi)) * (1.0 - ed.integrate(ed.H ** 2) / (16 * np.pi))


def willmore_operator(s, metric, ed=None):
    """W = Lap_Sigma H + H (Ric(nu,nu) + |ring A|^2) at the nodes."""
    ed = ed or extrinsic_data(s, metric)
    return surface_laplacian(ed, ed.H) + ed.H * (ed.ric_nn + ed.ring2)


def lagrange_multiplier(s, metric, ed=None, W=None):
    """Multiplier lam = -<H, W> / <H, H> in L2(d mu); makes the constrained
    velocity orthogonal to H, so area is preserved to quadrature accuracy."""
    ed = ed or extrinsic_data(s, metric)
    if W is None:
        W = willmore_operator(s, metric, ed)
    h2 = ed.integrate(ed.H ** 2)
    if h2 <= 0.0:
        raise SurfaceError("degenerate surface: vanishing int H^2")
    return -ed.integrate(ed.H * W) / h2


@dataclass
class VelocityFields:
    ed: ExtrinsicData
    W: np.ndarray        # Willmore operator values
    lam: float
    speed: np.ndarray    # dissipative normal speed W + lam H
    wbar: np.ndarray     # residual field -(W + lam H); zero iff stationary
    graph_rate: np.ndarray  # d phi / dt = speed / (r g(v, nu))


def velocity_fields(s, metric, ed=None):
    """Normal speed, residual and graph conversion in one pass.

    Sign convention: with nu outward and H = +2/r on round spheres, the
    energy's first variation is dW(f) = -1/2 int W f dmu, so the dissipative
    area-constrained velocity is speed = +(W + lam H); the residual field
    wbar = -speed vanishes exactly on stationary surfaces.
    """
    ed = ed or extrinsic_data(s, metric)
    W = willmore_operator(s, metric, ed)
    lam = lagrange_multiplier(s, metric, ed, W)
    speed = W + lam * ed.H
    conv = s.r * ed.gvn
    return VelocityFields(ed=ed, W=W, lam=lam, speed=speed, wbar=-speed,
                          graph_rate=speed / conv)


def acw_velocity(s, metric, ed=None):
    """Normal speed of the area-constrained Willmore flow and its multiplier."""
    vf = velocity_fields(s, metric, ed)
    return vf.speed, vf.lam


@dataclass
class AdmissibilityReport:
    inner_radius: float     # min Euclidean |x| over nodes
    area_radius: float      # sqrt(area / 4 pi)
    roundness_defect: float  # |inner/area - 1| + int |ring A|^2
    h4: float
    min_graph: float
    admissible: bool
    reasons: list = field(default_factory=list)


def admissibility(s, metric, R=2.0, delta=0.05):
    """Inner-radius / roundness admissibility report for the flow tube."""
    ed = extrinsic_data(s, metric)
    rho = float(np.min(np.linalg.norm(ed.x, axis=-1)))
    lam_r = float(np.sqrt(ed.integrate(1.0) / (4 * np.pi)))
    defect = abs(rho / lam_r - 1.0) + ed.integrate(ed.ring2)
    h4 = s.h4_norm()
    min_graph = float(np.min(1.0 + ed.basis.synthesize(s.c)))
    reasons = []
    if rho <= R:
        reasons.append("inner radius")
    if defect > delta:
        reasons.append("roundness defect")
    if h4 > delta:
        reasons.append("graph norm")
    return AdmissibilityReport(inner_radius=rho, area_radius=lam_r,
                               roundness_defect=float(defect), h4=float(h4),
                               min_graph=min_graph, admissible=not reasons,
                               reasons=reasons)
