"""Spectral-leakage kernels and the F(2, 2L) family of distributions.

The standardized ordinate under H1 is (chi2_{2,lam}/2) / (chi2_{2L}/2L).  Writing
the noncentral chi-square as a Poisson(lam/2) mixture of central chi2_{2+2j}
gives

    Pr[ratio <= g] = sum_j Pois(j; lam/2) * I_z(1 + j, L),   z = g / (g + L),

with ``I`` the regularized incomplete beta function.  The j = 0 term is the
central law 1 - (L / (g + L))**L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import InvalidInputError, NumericError
from .model import FourierGrid, NoisePsd, SinusoidSet

SERIES_TOL = 1e-15  # Poisson mass left outside the summed window
MAX_SERIES_TERMS = 100_000
# below this many (bins x terms) the mixture is evaluated as one dense product
_DENSE_LIMIT = 5_000_000


def _reduce(nu):
    """Split ``nu`` into nearest integer m and remainder d in [-1/2, 1/2]."""
    nu = np.asarray(nu, dtype=float)
    m = np.rint(nu)
    return m, nu - m


def dirichlet_ratio(nu, n: int):
    """sin(N pi nu) / (N sin(pi nu)), with its limit (-1)**(m (N-1)) at integers m."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    m, d = _reduce(nu)
    sign = np.where((m * (n - 1)) % 2 == 0, 1.0, -1.0)
    singular = np.abs(d) * n < 1e-9
    with np.errstate(invalid="ignore", divide="ignore"):
        r = np.sin(n * np.pi * d) / (n * np.sin(np.pi * d))
    out = sign * np.where(singular, 1.0, r)
    return out if out.ndim else float(out)


def fejer_kernel(nu, n: int):
    """Fejer kernel K_N(nu) = dirichlet_ratio(nu, n)**2, in [0, 1]."""
    r = dirichlet_ratio(nu, n)
    return r * r


@dataclass(frozen=True)
class NoncentralitySpectrum:
    grid: FourierGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise InvalidInputError(f"expected {self.grid.size} values, got shape {v.shape}")
        if not np.isfinite(v).all() or (v < 0).any():
            raise InvalidInputError("noncentralities must be finite and >= 0")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.values.size


def leakage_energy(sines: SinusoidSet, grid: FourierGrid) -> np.ndarray:
    """Noise-free periodogram of the sinusoids on the grid (closed form).

    For a single component this is ``N a**2 / 4 * [K(f-nu) + K(f+nu)
    - 2 D(f-nu) D(f+nu) cos(2 pi (N+1) f + 2 phi)]`` in normalized frequency;
    cross terms between distinct components are neglected, as in the
    asymptotic noncentral law.
    """
    n = grid.n
    nu = grid.normalized
    out = np.zeros(grid.size)
    for c in sines:
        f = c.frequency * grid.dt
        dm = dirichlet_ratio(f - nu, n)
        dp = dirichlet_ratio(f + nu, n)
        phase = np.cos(2 * np.pi * ((n + 1) * f % 1.0) + 2 * c.phase)
        out += c.amplitude ** 2 * (dm * dm + dp * dp - 2 * dm * dp * phase)
    return np.maximum(out * n / 4.0, 0.0)


def noncentrality_lambda(sines: SinusoidSet, psd, grid: FourierGrid) -> NoncentralitySpectrum:
    """Per-bin noncentrality of the periodogram under H1."""
    sines.check_grid(grid)
    s = psd.values if isinstance(psd, NoisePsd) else np.asarray(psd, dtype=float)
    if s.shape != (grid.size,) or not (s > 0).all():
        raise InvalidInputError("psd must be strictly positive on every grid bin")
    return NoncentralitySpectrum(grid, 2.0 * leakage_energy(sines, grid) / s)


def _check_gamma_l(gamma, l):
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0) or np.any(np.isnan(gamma)):
        raise InvalidInputError("gamma must be >= 0")
    if not (l >= 1):
        raise InvalidInputError(f"L must be >= 1, got {l}")
    return gamma


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def f_pdf(gamma, l):
    """Density of F(2, 2L): (1 + gamma/L)**(-L-1)."""
    gamma = _check_gamma_l(gamma, l)
    return _scalar(np.exp(-(l + 1) * np.log1p(gamma / l)))


def f_sf(gamma, l):
    """Survival function of F(2, 2L): (L / (gamma + L))**L."""
    gamma = _check_gamma_l(gamma, l)
    return _scalar(np.exp(-l * np.log1p(gamma / l)))


def f_cdf(gamma, l):
    """CDF of F(2, 2L): 1 - (L / (gamma + L))**L."""
    gamma = _check_gamma_l(gamma, l)
    return _scalar(-np.expm1(-l * np.log1p(gamma / l)))


def _poisson_windows(mu: np.ndarray, tol: float):
    """Index windows around the Poisson mode holding all but ``tol`` of the mass."""
    mode = np.floor(mu)
    step = np.maximum(1.0, np.ceil(np.sqrt(mu)))
    lo, hi = mode.copy(), mode.copy()
    for it in range(MAX_SERIES_TERMS):
        outside = stats.poisson.cdf(lo - 1, mu) + stats.poisson.sf(hi, mu)
        todo = outside >= tol
        if not todo.any():
            return lo.astype(np.int64), hi.astype(np.int64)
        lo = np.where(todo, np.maximum(lo - step, 0.0), lo)
        hi = np.where(todo, hi + step, hi)
        if (hi - lo + 1 > MAX_SERIES_TERMS).any():
            bad = int(np.argmax(hi - lo + 1 > MAX_SERIES_TERMS))
            raise NumericError(
                f"noncentral F series did not reach tolerance {tol:g} within "
                f"{MAX_SERIES_TERMS} terms (lambda={2 * mu[bad]:g}, "
                f"residual mass={outside[bad]:.3g}, iteration {it})")
    raise NumericError("noncentral F series window search did not terminate")


def _mixture(gamma: float, lam: np.ndarray, l: float):
    """(cdf, sf) of the noncentral F(2, 2L) at scalar gamma for each lam."""
    cdf = np.full(lam.shape, f_cdf(gamma, l))
    sf = np.full(lam.shape, f_sf(gamma, l))
    nz = lam > 0
    if not nz.any():
        return cdf, sf
    mu = lam[nz] / 2.0
    lo, hi = _poisson_windows(mu, SERIES_TOL)
    z = gamma / (gamma + l)
    zc = l / (gamma + l)
    j0, j1 = int(lo.min()), int(hi.max())
    if mu.size * (j1 - j0 + 1) <= _DENSE_LIMIT:
        js = np.arange(j0, j1 + 1)
        w = stats.poisson.pmf(js[None, :], mu[:, None])
        w[(js[None, :] < lo[:, None]) | (js[None, :] > hi[:, None])] = 0.0
        c_terms = special.betainc(1.0 + js, l, z)
        s_terms = special.betainc(l, 1.0 + js, zc)
        c, s = w @ c_terms, w @ s_terms
    else:
        c = np.empty(mu.size)
        s = np.empty(mu.size)
        for i in range(mu.size):
            js = np.arange(lo[i], hi[i] + 1)
            w = stats.poisson.pmf(js, mu[i])
            c[i] = w @ special.betainc(1.0 + js, l, z)
            s[i] = w @ special.betainc(l, 1.0 + js, zc)
    cdf[nz] = c
    sf[nz] = s
    return cdf, sf


def noncentral_f_cdf_sf(gamma: float, lam, l):
    """CDF and survival function of F_lam(2, 2L) at ``gamma`` for an array of lam.

    Both tails are summed directly so that small survival probabilities keep
    full relative precision; each omits less than 1e-15 of Poisson mass.
    """
    gamma = float(_check_gamma_l(gamma, l))
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0) or not np.isfinite(lam).all():
        raise InvalidInputError("lambda must be finite and >= 0")
    shape = lam.shape
    cdf, sf = _mixture(gamma, lam.reshape(-1), float(l))
    return cdf.reshape(shape), sf.reshape(shape)


def noncentral_f_cdf(gamma, lam, l):
    """CDF at gamma of (chi2_{2,lam}/2) / (chi2_{2L}/2L); equals f_cdf when lam = 0."""
    g, lm = np.broadcast_arrays(np.asarray(gamma, dtype=float), np.asarray(lam, dtype=float))
    if g.ndim == 0:
        return float(noncentral_f_cdf_sf(float(g), lm, l)[0])
    out = np.empty(g.shape)
    for gv in np.unique(g):
        sel = g == gv
        out[sel] = noncentral_f_cdf_sf(float(gv), lm[sel], l)[0]
    return out


def noncentral_f_sf(gamma, lam, l):
    g, lm = np.broadcast_arrays(np.asarray(gamma, dtype=float), np.asarray(lam, dtype=float))
    if g.ndim == 0:
        return float(noncentral_f_cdf_sf(float(g), lm, l)[1])
    out = np.empty(g.shape)
    for gv in np.unique(g):
        sel = g == gv
        out[sel] = noncentral_f_cdf_sf(float(gv), lm[sel], l)[1]
    return out
