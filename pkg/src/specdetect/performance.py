"""Closed-form false-alarm and detection probabilities for the standardized tests.

Under H0 the standardized ordinates are i.i.d. F(2, 2L), so the maximum and
the N_c-th largest have exact laws.  Under H1 ordinate k follows the
noncentral F_{lam_k}(2, 2L); the count of ordinates above a threshold is then
Poisson-binomial, which we evaluate with an O(eta * N_c) recursion instead of
summing over index combinations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .detectors import Kind, TestKind
from .errors import InvalidInputError, NumericError
from .kernels import noncentral_f_cdf_sf

BISECTION_MAX_ITER = 200
BISECTION_RTOL = 1e-10


def _check_l_eta(l, eta):
    if not l >= 1:
        raise InvalidInputError(f"L must be >= 1, got {l}")
    if int(eta) != eta or eta < 1:
        raise InvalidInputError(f"eta must be an integer >= 1, got {eta}")


def _log_sf(gamma, l):
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma < 0) or np.any(np.isnan(gamma)):
        raise InvalidInputError("gamma must be >= 0")
    return -l * np.log1p(gamma / l)


def pfa_t_tilde(gamma, l, eta):
    """Pr(max standardized ordinate > gamma | H0) = 1 - (1 - (L/(gamma+L))**L)**eta."""
    _check_l_eta(l, eta)
    s = np.exp(_log_sf(gamma, l))
    with np.errstate(divide="ignore"):
        out = -np.expm1(eta * np.log1p(-s))
    return float(out) if out.ndim == 0 else out


def threshold_from_pfa(pfa, l, eta):
    """Threshold gamma at which :func:`pfa_t_tilde` equals ``pfa``."""
    _check_l_eta(l, eta)
    pfa = np.asarray(pfa, dtype=float)
    if np.any(~((pfa > 0) & (pfa < 1))):
        raise InvalidInputError("pfa must lie strictly between 0 and 1")
    per_bin = -np.expm1(np.log1p(-pfa) / eta)  # 1 - (1 - pfa)**(1/eta)
    out = l * np.expm1(-np.log(per_bin) / l)
    return float(out) if out.ndim == 0 else out


def _pfa_nc_scalar(gamma, l, eta, n_c):
    log_s = float(_log_sf(gamma, l))
    with np.errstate(divide="ignore"):
        log_c = np.log(-np.expm1(log_s))
    i = np.arange(n_c, eta + 1)
    log_binom = gammaln(eta + 1) - gammaln(i + 1) - gammaln(eta - i + 1)
    with np.errstate(invalid="ignore"):
        terms = log_binom + i * log_s + np.where(eta - i > 0, (eta - i) * log_c, 0.0)
    return float(np.exp(logsumexp(terms)))


def pfa_t_tilde_nc(gamma, l, eta, n_c):
    """Pr(N_c-th largest standardized ordinate > gamma | H0).

    The number of exceedances is Binomial(eta, (L/(gamma+L))**L); the upper
    tail from n_c on is summed in log space.
    """
    _check_l_eta(l, eta)
    if int(n_c) != n_c or not 1 <= n_c <= eta:
        raise InvalidInputError(f"n_c must be an integer in [1, {eta}], got {n_c}")
    if n_c == 1:
        return pfa_t_tilde(gamma, l, eta)
    g = np.asarray(gamma, dtype=float)
    if g.ndim == 0:
        return _pfa_nc_scalar(float(g), l, int(eta), int(n_c))
    return np.array([_pfa_nc_scalar(float(v), l, int(eta), int(n_c)) for v in g.ravel()]).reshape(g.shape)


def threshold_from_pfa_nc(pfa, l, eta, n_c):
    """Invert :func:`pfa_t_tilde_nc` by bisection.

    The T-tilde threshold at the same ``pfa`` brackets the root from above
    because the N_c-th largest never exceeds the maximum.
    """
    if n_c == 1:
        return threshold_from_pfa(pfa, l, eta)
    hi = threshold_from_pfa(pfa, l, eta)
    lo = 0.0
    if not pfa_t_tilde_nc(hi, l, eta, n_c) <= pfa <= pfa_t_tilde_nc(lo, l, eta, n_c):
        raise NumericError(f"cannot bracket pfa={pfa} for n_c={n_c}")
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        p = pfa_t_tilde_nc(mid, l, eta, n_c)
        if abs(p - pfa) <= BISECTION_RTOL * pfa or mid in (lo, hi):
            return mid
        if p > pfa:
            lo = mid
        else:
            hi = mid
    raise NumericError(f"bisection for pfa={pfa} (n_c={n_c}, L={l}) did not converge "
                       f"in {BISECTION_MAX_ITER} iterations; bracket [{lo}, {hi}]")


def _lambdas(lambdas) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise InvalidInputError("lambdas must be a non-empty 1-D array")
    return lam


def exceedance_probabilities(gamma, lambdas, l):
    """Per-bin (Pr[ordinate <= gamma], Pr[ordinate > gamma]) under H1."""
    return noncentral_f_cdf_sf(float(gamma), _lambdas(lambdas), l)


def pdet_t_tilde(gamma, lambdas, l):
    """Pr(max standardized ordinate > gamma | H1) = 1 - prod_k Phi_{F_lam_k}(gamma)."""
    lam = _lambdas(lambdas)
    if not lam.any():
        return pfa_t_tilde(gamma, l, lam.size)
    if np.ndim(gamma):
        return np.array([pdet_t_tilde(float(g), lam, l) for g in np.ravel(gamma)]).reshape(np.shape(gamma))
    _, sf = noncentral_f_cdf_sf(float(gamma), lam, l)
    with np.errstate(divide="ignore"):
        return float(-np.expm1(np.log1p(-sf).sum()))


def pdet_vs_pfa(pfa, lambdas, l):
    """Detection probability of T-tilde at the threshold giving false-alarm ``pfa``."""
    lam = _lambdas(lambdas)
    return pdet_t_tilde(threshold_from_pfa(pfa, l, lam.size), lam, l)


def poisson_binomial_upper(p: np.ndarray, q: np.ndarray, n_c: int) -> float:
    """Pr(K >= n_c) for K a sum of independent Bernoulli(p_k); q_k = 1 - p_k.

    States 0..n_c-1 track the exact count; state n_c absorbs every count at or
    above n_c, so the tail is accumulated from positive terms only.
    """
    state = np.zeros(n_c + 1)
    state[0] = 1.0
    for pk, qk in zip(p, q):
        absorbed = state[n_c] + state[n_c - 1] * pk
        state[1:n_c] = state[1:n_c] * qk + state[:n_c - 1] * pk
        state[0] *= qk
        state[n_c] = absorbed
    return float(state[n_c])


def pdet_t_tilde_nc(gamma, lambdas, l, n_c):
    """Pr(N_c-th largest standardized ordinate > gamma | H1)."""
    lam = _lambdas(lambdas)
    if int(n_c) != n_c or not 1 <= n_c <= lam.size:
        raise InvalidInputError(f"n_c must be an integer in [1, {lam.size}], got {n_c}")
    if n_c == 1:
        return pdet_t_tilde(gamma, lam, l)
    if not lam.any():
        return pfa_t_tilde_nc(gamma, l, lam.size, n_c)
    if np.ndim(gamma):
        return np.array([pdet_t_tilde_nc(float(g), lam, l, n_c)
                         for g in np.ravel(gamma)]).reshape(np.shape(gamma))
    q, p = noncentral_f_cdf_sf(float(gamma), lam, l)
    return poisson_binomial_upper(p, q, int(n_c))


@dataclass(frozen=True)
class RocCurve:
    pfa: np.ndarray
    pdet: np.ndarray
    pfa_stderr: np.ndarray | None = None
    pdet_stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        pfa = np.asarray(self.pfa, dtype=float)
        pdet = np.asarray(self.pdet, dtype=float)
        if pfa.shape != pdet.shape or pfa.ndim != 1:
            raise InvalidInputError("pfa and pdet must be 1-D arrays of equal length")
        if np.any(np.diff(pfa) <= 0):
            raise InvalidInputError("pfa must be strictly increasing")
        object.__setattr__(self, "pfa", pfa)
        object.__setattr__(self, "pdet", pdet)

    def __len__(self):
        return self.pfa.size

    def auc(self) -> float:
        """Trapezoidal area, closing the curve at (0, 0) and (1, 1)."""
        x, y = self.pfa, self.pdet
        if x[0] > 0:
            x, y = np.r_[0.0, x], np.r_[0.0, y]
        if x[-1] < 1:
            x, y = np.r_[x, 1.0], np.r_[y, 1.0]
        return float(np.trapezoid(y, x))


def roc_curve_analytic(test: TestKind, lambdas, l, pfa_grid) -> RocCurve:
    """Analytic ROC of T-tilde or T-tilde-N_c on a grid of false-alarm rates."""
    lam = _lambdas(lambdas)
    eta = lam.size
    grid = np.asarray(pfa_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or grid[0] <= 0 or grid[-1] >= 1:
        raise InvalidInputError("pfa_grid must be strictly increasing inside (0, 1)")
    if test.kind is Kind.T_TILDE:
        gammas = threshold_from_pfa(grid, l, eta)
        pdet = np.array([pdet_t_tilde(g, lam, l) for g in gammas])
    elif test.kind is Kind.T_TILDE_NC:
        test.check(eta)
        gammas = np.array([threshold_from_pfa_nc(p, l, eta, test.n_c) for p in grid])
        pdet = np.array([pdet_t_tilde_nc(g, lam, l, test.n_c) for g in gammas])
    else:
        raise InvalidInputError(f"no analytic ROC for {test.label}")
    return RocCurve(grid, pdet, meta={"test": test.label, "L": l, "eta": eta,
                                      "thresholds": gammas, "source": "analytic"})
