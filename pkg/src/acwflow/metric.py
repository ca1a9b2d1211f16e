r"""Ambient 3-metrics: flat, Schwarzschild (isotropic conformal form), and
asymptotically Schwarzschild perturbations g = psi^4 delta + h.

All derivatives are analytic.  Index conventions: dg[..., k, i, j] = d_k g_ij
and d2g[..., l, k, i, j] = d_l d_k g_ij.  The perturbation catalog provides
even-parity families scaled so that max-entry |d^a h| <= eta |x|^{-(2+|a|)}
holds with margin for |a| <= 2; check_decay measures the envelope.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["MetricSpec", "AmbientMetric", "make_metric", "check_decay", "CATALOG"]

_EYE = np.eye(3)


@dataclass(frozen=True)
class MetricSpec:
    mode: str = "schwarzschild"  # flat | schwarzschild | perturbed
    family: str = "quad"         # catalog key (perturbed mode only)
    eta: float = 0.0
    mass: float = 2.0

    def key(self):
        """Stable identity string for caches and manifests."""
        if self.mode == "flat":
            return "flat"
        if self.mode == "schwarzschild":
            return f"schwarzschild(m={self.mass:.17g})"
        return f"perturbed(m={self.mass:.17g},{self.family},eta={self.eta:.17g})"


def _scalar_product(a, da, d2a, b, db, d2b):
    """Value, gradient and Hessian of a pointwise product of scalars."""
    v = a * b
    dv = a[..., None] * db + b[..., None] * da
    d2v = (a[..., None, None] * d2b + b[..., None, None] * d2a
           + da[..., :, None] * db[..., None, :]
           + db[..., :, None] * da[..., None, :])
    return v, dv, d2v


def _bump(x):
    """u = 1/(1+|x|^2) with gradient and Hessian."""
    rho2 = np.sum(x * x, axis=-1)
    u = 1.0 / (1.0 + rho2)
    du = -2.0 * x * u[..., None] ** 2
    d2u = (-2.0 * _EYE * u[..., None, None] ** 2
           + 8.0 * x[..., :, None] * x[..., None, :] * u[..., None, None] ** 3)
    return u, du, d2u


class _Family:
    """One catalog entry: returns (h, dh, d2h) without the eta factor."""

    def __init__(self, name, scale, builder, violates_decay=False):
        self.name = name
        self.scale = scale
        self._builder = builder
        self.violates_decay = violates_decay

    def blocks(self, x):
        h, dh, d2h = self._builder(x)
        return self.scale * h, self.scale * dh, self.scale * d2h


def _family_iso(x):
    # isotropic: u * delta
    u, du, d2u = _bump(x)
    h = u[..., None, None] * _EYE
    dh = du[..., :, None, None] * _EYE
    d2h = d2u[..., :, :, None, None] * _EYE
    return h, dh, d2h


def _family_quad(x):
    # anisotropic even quadrupole: (x1^2 - x3^2) u^2 * delta
    u, du, d2u = _bump(x)
    u2, du2, d2u2 = _scalar_product(u, du, d2u, u, du, d2u)
    B = x[..., 0] ** 2 - x[..., 2] ** 2
    dB = np.zeros_like(x)
    dB[..., 0] = 2.0 * x[..., 0]
    dB[..., 2] = -2.0 * x[..., 2]
    d2B = np.broadcast_to(np.diag([2.0, 0.0, -2.0]), x.shape[:-1] + (3, 3)).copy()
    s, ds, d2s = _scalar_product(B, dB, d2B, u2, du2, d2u2)
    return (s[..., None, None] * _EYE, ds[..., :, None, None] * _EYE,
            d2s[..., :, :, None, None] * _EYE)


def _family_cross(x):
    # even off-diagonal: x1 x2 u^2 on the (1,2) component
    u, du, d2u = _bump(x)
    u2, du2, d2u2 = _scalar_product(u, du, d2u, u, du, d2u)
    C = x[..., 0] * x[..., 1]
    dC = np.zeros_like(x)
    dC[..., 0] = x[..., 1]
    dC[..., 1] = x[..., 0]
    d2C = np.zeros(x.shape[:-1] + (3, 3))
    d2C[..., 0, 1] = 1.0
    d2C[..., 1, 0] = 1.0
    s, ds, d2s = _scalar_product(C, dC, d2C, u2, du2, d2u2)
    pat = np.zeros((3, 3))
    pat[0, 1] = pat[1, 0] = 1.0
    return (s[..., None, None] * pat, ds[..., :, None, None] * pat,
            d2s[..., :, :, None, None] * pat)


def _family_steep(x):
    # deliberate envelope violation: decays only like |x|^{-1}
    rho2 = np.sum(x * x, axis=-1)
    s = 1.0 / np.sqrt(1.0 + rho2)
    ds = -x * s[..., None] ** 3
    d2s = (-_EYE * s[..., None, None] ** 3
           + 3.0 * x[..., :, None] * x[..., None, :] * s[..., None, None] ** 5)
    return (s[..., None, None] * _EYE, ds[..., :, None, None] * _EYE,
            d2s[..., :, :, None, None] * _EYE)


CATALOG = {
    "iso": _Family("iso", 0.075, _family_iso),
    "quad": _Family("quad", 0.02, _family_quad),
    "cross": _Family("cross", 0.08, _family_cross),
    "steep": _Family("steep", 0.5, _family_steep, violates_decay=True),
}


class AmbientMetric:
    """Evaluates g, its analytic derivatives, Christoffels and curvature."""

    def __init__(self, spec):
        if spec.mode not in ("flat", "schwarzschild", "perturbed"):
            raise ValueError(f"unknown metric mode {spec.mode!r}")
        if spec.mode == "perturbed":
            if spec.family not in CATALOG:
                raise ValueError(f"unknown catalog family {spec.family!r}")
            if not spec.eta > 0:
                raise ValueError("perturbed mode needs eta > 0")
        self.spec = spec

    @property
    def is_flat(self):
        return self.spec.mode == "flat"

    def components(self, pts):
        """g, dg, d2g at points of shape (..., 3)."""
        x = np.asarray(pts, dtype=float)
        base = x.shape[:-1]
        g = np.broadcast_to(_EYE, base + (3, 3)).copy()
        dg = np.zeros(base + (3, 3, 3))
        d2g = np.zeros(base + (3, 3, 3, 3))
        if self.is_flat:
            return g, dg, d2g
        half_m = 0.5 * self.spec.mass
        rho = np.sqrt(np.sum(x * x, axis=-1))
        psi = 1.0 + half_m / rho
        dpsi = -half_m * x / rho[..., None] ** 3
        d2psi = half_m * (3.0 * x[..., :, None] * x[..., None, :] / rho[..., None, None] ** 5
                          - _EYE / rho[..., None, None] ** 3)
        g = psi[..., None, None] ** 4 * _EYE
        dg = 4.0 * (psi ** 3)[..., None, None, None] * dpsi[..., :, None, None] * _EYE
        d2g = (12.0 * (psi ** 2)[..., None, None, None, None]
               * dpsi[..., :, None, None, None] * dpsi[..., None, :, None, None]
               + 4.0 * (psi ** 3)[..., None, None, None, None] * d2psi[..., :, :, None, None]
               ) * _EYE
        if self.spec.mode == "perturbed":
            h, dh, d2h = CATALOG[self.spec.family].blocks(x)
            eta = self.spec.eta
            g = g + eta * h
            dg = dg + eta * dh
            d2g = d2g + eta * d2h
        return g, dg, d2g

    def at(self, pts):
        """Metric components g_ij at points."""
        return self.components(pts)[0]

    def christoffel(self, pts, derivative=False):
        """Christoffel symbols Gamma^a_ij (and optionally d_b Gamma^a_ij)."""
        g, dg, d2g = self.components(pts)
        ginv = np.linalg.inv(g)
        # sym[..., l, i, j] = d_i g_jl + d_j g_il - d_l g_ij
        sym = (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
        gam = 0.5 * np.einsum("...al,...lij->...aij", ginv, sym)
        if not derivative:
            return gam
        dginv = -np.einsum("...am,...bmn,...nl->...bal", ginv, dg, ginv)
        dsym = (np.einsum("...bijl->...blij", d2g)
                + np.einsum("...bjil->...blij", d2g) - d2g)
        dgam = (0.5 * np.einsum("...bal,...lij->...baij", dginv, sym)
                + 0.5 * np.einsum("...al,...blij->...baij", ginv, dsym))
        return gam, dgam

    def ricci(self, pts):
        """Ricci tensor R_ij."""
        gam, dgam = self.christoffel(pts, derivative=True)
        term1 = np.einsum("...aaij->...ij", dgam)
        term2 = np.einsum("...iaaj->...ij", dgam)
        term3 = np.einsum("...aab,...bij->...ij", gam, gam)
        term4 = np.einsum("...aib,...baj->...ij", gam, gam)
        return term1 - term2 + term3 - term4

    def scalar_curvature(self, pts):
        """Scalar curvature g^{ij} R_ij."""
        g = self.at(pts)
        return np.einsum("...ij,...ij->...", np.linalg.inv(g), self.ricci(pts))

    def geometry(self, pts):
        """One-pass (g, g^{-1}, Gamma, Ricci) for surface assembly."""
        x = np.asarray(pts, dtype=float)
        base = x.shape[:-1]
        if self.is_flat:
            g = np.broadcast_to(_EYE, base + (3, 3)).copy()
            return g, g.copy(), np.zeros(base + (3, 3, 3)), np.zeros(base + (3, 3))
        g, dg, d2g = self.components(pts)
        ginv = np.linalg.inv(g)
        sym = (np.einsum("...ijl->...lij", dg) + np.einsum("...jil->...lij", dg) - dg)
        gam = 0.5 * np.einsum("...al,...lij->...aij", ginv, sym)
        tmp = np.einsum("...am,...bmn->...ban", ginv, dg)
        dginv = -np.einsum("...ban,...nl->...bal", tmp, ginv)
        dsym = (np.einsum("...bijl->...blij", d2g)
                + np.einsum("...bjil->...blij", d2g) - d2g)
        # Ricci needs only the b=a and outer-index traces of d_b Gamma^a_ij,
        # so the full derivative tensor is never materialized.
        term1 = 0.5 * (np.einsum("...l,...lij->...ij",
                                 np.einsum("...aal->...l", dginv), sym)
                       + np.einsum("...al,...alij->...ij", ginv, dsym))
        term2 = 0.5 * (np.einsum("...ial,...laj->...ij", dginv, sym)
                       + np.einsum("...al,...ilaj->...ij", ginv, dsym))
        term3 = np.einsum("...b,...bij->...ij",
                          np.einsum("...aab->...b", gam), gam)
        term4 = np.einsum("...aib,...baj->...ij", gam, gam)
        return g, ginv, gam, term1 - term2 + term3 - term4


def make_metric(mode="schwarzschild", family="quad", eta=0.0, mass=2.0):
    return AmbientMetric(MetricSpec(mode=mode, family=family, eta=eta, mass=mass))


def check_decay(metric, n_dirs=50, rho_min=1.0, rho_max=1e4, n_rho=60, seed=0):
    """Measure the decay envelopes of g - delta and of the perturbation.

    Returns a dict with the worst measured ratios:
      'metric_C'  : sup rho^{1+|a|} |d^a (g - delta)| over |a| <= 2
                    (finite C is all that is required of the total metric)
      'h_ratio'   : sup rho^{2+|a|} |d^a h| / eta  (perturbed mode; must be
                    <= 1 for the family to be admissible)
      'even_defect': max |h(x) - h(-x)| over the sample
      'ok'        : envelope verdict
    """
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_dirs, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rhos = np.geomspace(rho_min, rho_max, n_rho)
    pts = (rhos[:, None, None] * dirs[None, :, :]).reshape(-1, 3)
    rho = np.linalg.norm(pts, axis=-1)
    g, dg, d2g = metric.components(pts)
    dev = np.max(np.abs(g - _EYE), axis=(-2, -1))
    dev1 = np.max(np.abs(dg), axis=(-3, -2, -1))
    dev2 = np.max(np.abs(d2g), axis=(-4, -3, -2, -1))
    metric_C = max(np.max(dev * rho), np.max(dev1 * rho ** 2), np.max(dev2 * rho ** 3))
    report = {"metric_C": float(metric_C), "h_ratio": 0.0, "even_defect": 0.0,
              "ok": True}
    if metric.spec.mode == "perturbed":
        fam = CATALOG[metric.spec.family]
        h, dh, d2h = fam.blocks(pts)
        r0 = np.max(np.max(np.abs(h), axis=(-2, -1)) * rho ** 2)
        r1 = np.max(np.max(np.abs(dh), axis=(-3, -2, -1)) * rho ** 3)
        r2 = np.max(np.max(np.abs(d2h), axis=(-4, -3, -2, -1)) * rho ** 4)
        hm, _, _ = fam.blocks(-pts)
        report["h_ratio"] = float(max(r0, r1, r2))
        report["even_defect"] = float(np.max(np.abs(h - hm)))
        report["ok"] = bool(report["h_ratio"] <= 1.0 and report["even_defect"] <= 1e-14)
    return report
