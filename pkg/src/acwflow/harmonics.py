r"""Real spherical harmonics on Gauss-Legendre grids.

Basis functions Y_{l,m} are orthonormal in L2(S^2): the (theta, phi)
factorization uses fully normalized associated Legendre functions (no
Condon-Shortley phase) and sqrt(2) cos/sin azimuthal factors.  Coefficient
vectors are packed l-major with index l*l + l + m, length (L+1)^2.

The grid oversamples: N_theta = 2L+2 Gauss latitudes and N_phi = 4L+4
uniform longitudes, so quadrature is exact for products of up to four
band-limited factors.  Transforms are direct dense contractions; at L <= 32
this is faster in practice than staged algorithms and trivially exact.
"""

import numpy as np
from scipy.special import roots_legendre

__all__ = [
    "n_coeffs", "lm_index", "degree_of_index", "SphereBasis", "get_basis",
    "laplace_s2", "sobolev_norm", "project_P", "project_Pbar",
]


def n_coeffs(L):
    return (L + 1) ** 2


def lm_index(l, m):
    """Flat index of (l, m) in the packed coefficient vector."""
    return l * l + l + m


def degree_of_index(L):
    """Array mapping flat index -> degree l."""
    l_of = np.empty(n_coeffs(L), dtype=int)
    for l in range(L + 1):
        l_of[l * l:(l + 1) ** 2] = l
    return l_of


def _legendre_tables(L, x):
    """Normalized associated Legendre values and theta-derivatives at x = cos(theta).

    Returns (p, q, s) with shapes (L+1, L+1, len(x)): p[l, m] holds
    \bar{P}_l^m, q its first and s its second theta-derivative, for m >= 0.
    Normalization: int_{-1}^{1} p[l, m]^2 dx = 1/(2 pi).
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    st = np.sqrt(1.0 - x * x)
    ct = x
    p = np.zeros((L + 1, L + 1, n))
    q = np.zeros_like(p)
    s = np.zeros_like(p)
    dm = 1.0 / np.sqrt(4.0 * np.pi)
    for m in range(L + 1):
        if m > 0:
            dm *= np.sqrt((2 * m + 1) / (2.0 * m))
        if m == 0:
            p[0, 0] = dm
        else:
            p[m, m] = dm * st ** m
            q[m, m] = dm * m * st ** (m - 1) * ct
            # second derivative of sin^m: m[(m-1) sin^{m-2} cos^2 - sin^m]
            t1 = (m - 1) * st ** max(m - 2, 0) * ct * ct
            s[m, m] = dm * m * (t1 - st ** m)
        if m + 1 <= L:
            f = np.sqrt(2 * m + 3.0)
            p[m + 1, m] = f * ct * p[m, m]
            q[m + 1, m] = f * (ct * q[m, m] - st * p[m, m])
            s[m + 1, m] = f * (ct * s[m, m] - 2 * st * q[m, m] - ct * p[m, m])
        for l in range(m + 2, L + 1):
            a = np.sqrt((4.0 * l * l - 1) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1) ** 2 - 1))
            p[l, m] = a * (ct * p[l - 1, m] - b * p[l - 2, m])
            q[l, m] = a * (ct * q[l - 1, m] - st * p[l - 1, m] - b * q[l - 2, m])
            s[l, m] = a * (ct * s[l - 1, m] - 2 * st * q[l - 1, m]
                           - ct * p[l - 1, m] - b * s[l - 2, m])
    return p, q, s


class SphereBasis:
    """Precomputed grid, quadrature and basis tensors for one band limit.

    Parameters
    ----------
    L : int
        Band limit (maximal retained degree).

    Attributes
    ----------
    theta, phi : 1-D node arrays (lengths 2L+2 and 4L+4)
    wq : (N_theta, N_phi) quadrature weights for the round unit-sphere measure
    """

    def __init__(self, L):
        self.L = int(L)
        self.n = n_coeffs(L)
        self.ntheta = 2 * L + 2
        self.nphi = 4 * L + 4
        xg, wg = roots_legendre(self.ntheta)
        self.x = xg
        self.theta = np.arccos(xg)
        self.phi = 2.0 * np.pi * np.arange(self.nphi) / self.nphi
        self.wq = np.outer(wg, np.full(self.nphi, 2.0 * np.pi / self.nphi))
        self.l_of = degree_of_index(L)
        self.eig = -self.l_of * (self.l_of + 1.0)
        self._p, self._q, self._s = _legendre_tables(L, xg)
        self._trig = self._trig_tables(self.phi)
        self._tensors = {}

    def _trig_tables(self, phi):
        # (order m, derivative count) -> azimuthal factor arrays
        L = self.L
        cos = {m: np.sqrt(2.0) * np.cos(m * phi) for m in range(1, L + 1)}
        sin = {m: np.sqrt(2.0) * np.sin(m * phi) for m in range(1, L + 1)}
        return cos, sin

    def tensor(self, dt=0, dp=0):
        """Dense basis tensor with dt theta- and dp phi-derivatives, shape (n, N_theta, N_phi)."""
        key = (dt, dp)
        if key in self._tensors:
            return self._tensors[key]
        if dt > 2 or dp > 2:
            raise ValueError("derivative order not tabulated")
        L, nt, np_ = self.L, self.ntheta, self.nphi
        leg = (self._p, self._q, self._s)[dt]
        cos, sin = self._trig
        one = np.ones(np_)
        out = np.empty((self.n, nt, np_))
        for l in range(L + 1):
            for m in range(-l, l + 1):
                am = abs(m)
                rad = leg[l, am]
                if m == 0:
                    az = one if dp == 0 else np.zeros(np_)
                elif m > 0:
                    # d/dphi cos(m phi) chain: cos -> -m sin -> -m^2 cos
                    az = (cos[m], -m * sin[m], -(m * m) * cos[m])[dp]
                else:
                    az = (sin[am], am * cos[am], -(am * am) * sin[am])[dp]
                out[lm_index(l, m)] = np.outer(rad, az)
        self._tensors[key] = out
        return out

    def synthesize(self, c, dt=0, dp=0):
        """Nodal values of the field with coefficients c (optionally differentiated)."""
        c = np.asarray(c, dtype=float)
        if c.shape != (self.n,):
            raise ValueError(f"expected {self.n} coefficients, got {c.shape}")
        return np.einsum("kij,k->ij", self.tensor(dt, dp), c)

    def analyze(self, f):
        """Coefficients of nodal field f by quadrature projection."""
        f = np.asarray(f, dtype=float)
        if f.shape != (self.ntheta, self.nphi):
            raise ValueError(f"expected grid shape {(self.ntheta, self.nphi)}, got {f.shape}")
        return np.einsum("kij,ij->k", self.tensor(0, 0), f * self.wq)

    def integrate(self, f):
        """Quadrature of a nodal field against the round unit-sphere measure."""
        return float(np.sum(f * self.wq))

    def point_eval(self, c, theta, phi, dt=0, dp=0):
        """Evaluate the field (or a derivative) at arbitrary points.

        theta, phi : arrays of equal shape.  Cost is O(points * (L+1)^2);
        used for off-grid resampling, not for transforms.
        """
        c = np.asarray(c, dtype=float)
        th = np.asarray(theta, dtype=float).ravel()
        ph = np.asarray(phi, dtype=float).ravel()
        p, q, s = _legendre_tables(self.L, np.cos(th))
        leg = (p, q, s)[dt]
        out = np.zeros(th.size)
        for l in range(self.L + 1):
            for m in range(-l, l + 1):
                cf = c[lm_index(l, m)]
                if cf == 0.0:
                    continue
                am = abs(m)
                if m == 0:
                    az = np.ones_like(ph) if dp == 0 else np.zeros_like(ph)
                elif m > 0:
                    az = (np.cos(am * ph), -am * np.sin(am * ph),
                          -(am * am) * np.cos(am * ph))[dp] * np.sqrt(2.0)
                else:
                    az = (np.sin(am * ph), am * np.cos(am * ph),
                          -(am * am) * np.sin(am * ph))[dp] * np.sqrt(2.0)
                out += cf * leg[l, am] * az
        return out.reshape(np.asarray(theta).shape)


_basis_cache = {}


def get_basis(L):
    """Shared SphereBasis instance for band limit L."""
    if L not in _basis_cache:
        _basis_cache[L] = SphereBasis(L)
    return _basis_cache[L]


def laplace_s2(c, L):
    """Unit-sphere Laplace-Beltrami multiplier: c_{l,m} -> -l(l+1) c_{l,m}."""
    return get_basis(L).eig * np.asarray(c, dtype=float)


def sobolev_norm(c, k, L):
    """H^k norm (sum over (1 + l(l+1))^k |c|^2)^(1/2) on the unit sphere."""
    if k < 0:
        raise ValueError("k must be >= 0")
    l_of = get_basis(L).l_of
    w = (1.0 + l_of * (l_of + 1.0)) ** k
    return float(np.sqrt(np.sum(w * np.asarray(c, dtype=float) ** 2)))


def project_P(c, L):
    """Projection onto degrees l <= 1 (the 4-dimensional near-kernel span)."""
    out = np.zeros_like(np.asarray(c, dtype=float))
    out[:4] = c[:4]
    return out


def project_Pbar(c, L):
    """Complementary projection onto degrees l >= 2."""
    out = np.array(c, dtype=float, copy=True)
    out[:4] = 0.0
    return out
