"""Monte Carlo apparatus: AR noise with exact PSD, seeded trials, calibration and ROC.

Seeding: trial ``t`` of a run with master seed ``s`` draws stream ``k`` from
``numpy.random.PCG64(numpy.random.SeedSequence(s, spawn_key=(t, k)))``.
Stream 0 is the observation noise, stream 1 the training set (its L members
are drawn consecutively from that stream, so a smaller training set is a
prefix of a larger one).  H1 trials reuse the H0 noise of the same trial.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from typing import Mapping, Optional, Sequence

import numpy as np
import yaml
from scipy import signal, stats

from .detectors import TestKind, statistic_array
from .errors import InvalidInputError
from .model import FourierGrid, NoisePsd, SinusoidSet, TimeSeries, fourier_grid
from .performance import RocCurve
from .periodogram import check_denominator, periodogram_ordinates

OBSERVATION_STREAM = 0
TRAINING_STREAM = 1
CHUNK_TRIALS = 32


@dataclass(frozen=True)
class ARModel:
    """Gaussian AR(p): x_t = sum_m coeffs[m-1] * x_{t-m} + sigma * w_t."""

    coeffs: tuple[float, ...] = ()
    sigma: float = 1.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        coeffs = tuple(float(a) for a in self.coeffs)
        object.__setattr__(self, "coeffs", coeffs)
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidInputError(f"sigma must be positive, got {self.sigma}")
        if not np.isfinite(coeffs).all():
            raise InvalidInputError("AR coefficients must be finite")
        if coeffs and self.max_pole_modulus() >= 1:
            raise InvalidInputError(
                f"AR model is not stationary (max pole modulus {self.max_pole_modulus():.6f})")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def denominator(self) -> np.ndarray:
        return np.r_[1.0, -np.asarray(self.coeffs)]

    def poles(self) -> np.ndarray:
        return np.roots(self.denominator) if self.coeffs else np.array([])

    def max_pole_modulus(self) -> float:
        p = self.poles()
        return float(np.abs(p).max()) if p.size else 0.0

    @property
    def burn_in(self) -> int:
        return max(1000, 50 * self.order)

    def psd_at(self, nu) -> np.ndarray:
        """PSD at normalized frequencies ``nu`` (cycles per sample)."""
        nu = np.asarray(nu, dtype=float)
        m = np.arange(self.order + 1)
        resp = np.exp(-2j * np.pi * np.multiply.outer(nu, m)) @ self.denominator
        return self.sigma ** 2 / np.abs(resp) ** 2

    def filter(self, w: np.ndarray) -> np.ndarray:
        """Run the recursion on innovations ``w`` (last axis), dropping the burn-in."""
        x = signal.lfilter([self.sigma], self.denominator, w, axis=-1)
        return x[..., self.burn_in:]


def white_noise(sigma: float = 1.0) -> ARModel:
    return ARModel((), sigma, name=f"white({sigma})")


def default_stellar_ar6() -> ARModel:
    """Shipped AR(6) stand-in for stellar noise (see ``data/stellar_ar6.yaml``)."""
    raw = yaml.safe_load(resources.files(__package__).joinpath("data/stellar_ar6.yaml").read_text())
    model = ARModel(tuple(raw["coeffs"]), float(raw["sigma"]), name=raw["name"])
    assert model.max_pole_modulus() < 1
    return model


def _rng(seed, trial: Optional[int] = None, stream: Optional[int] = None) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
    elif trial is None:
        ss = np.random.SeedSequence(int(seed))
    else:
        ss = np.random.SeedSequence(int(seed), spawn_key=(int(trial), int(stream or 0)))
    return np.random.Generator(np.random.PCG64(ss))


def ar_generate(model: ARModel, n: int, dt: float, seed) -> TimeSeries:
    """One stationary AR path of length ``n`` (zero start, burn-in discarded)."""
    rng = _rng(seed)
    w = rng.standard_normal(n + model.burn_in)
    return TimeSeries(model.filter(w), dt)


def ar_psd(model: ARModel, grid: FourierGrid) -> NoisePsd:
    """Exact PSD of the AR model on the Fourier grid (periodogram-mean convention)."""
    return NoisePsd(grid, model.psd_at(grid.normalized), label=model.name or "ar")


def draw_trial(model: ARModel, n: int, n_training: int, master_seed: int, trial: int):
    """Observation noise (n,) and training set (L, n) of one Monte Carlo trial."""
    obs = _rng(master_seed, trial, OBSERVATION_STREAM).standard_normal(n + model.burn_in)
    train = _rng(master_seed, trial, TRAINING_STREAM).standard_normal((n_training, n + model.burn_in))
    return model.filter(obs), model.filter(train)


@dataclass(frozen=True)
class McConfig:
    n: int
    dt: float
    n_training: int
    noise: ARModel
    tests: tuple[TestKind, ...]
    trials: int
    master_seed: int
    sines: SinusoidSet = SinusoidSet()
    hypotheses: tuple[str, ...] = ("h0", "h1")
    gammas: Optional[Mapping[str, Sequence[float]]] = None
    histogram_bins: int = 50

    def __post_init__(self):
        object.__setattr__(self, "tests", tuple(self.tests))
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        self.validate()

    @property
    def grid(self) -> FourierGrid:
        return fourier_grid(self.n, self.dt)

    def validate(self) -> None:
        grid = self.grid
        if int(self.trials) != self.trials or self.trials < 1:
            raise InvalidInputError(f"trials must be a positive integer, got {self.trials}")
        if int(self.n_training) != self.n_training or self.n_training < 1:
            raise InvalidInputError(f"training size L must be >= 1, got {self.n_training}")
        if not 0 <= int(self.master_seed) < 2 ** 64:
            raise InvalidInputError("master_seed must be an unsigned 64-bit integer")
        if not self.tests:
            raise InvalidInputError("at least one test is required")
        for t in self.tests:
            t.check(grid.size)
        if not set(self.hypotheses) <= {"h0", "h1"} or not self.hypotheses:
            raise InvalidInputError(f"hypotheses must be drawn from h0/h1, got {self.hypotheses}")
        self.sines.check_grid(grid)
        if self.histogram_bins < 1:
            raise InvalidInputError("histogram_bins must be >= 1")

    def replace(self, **changes) -> "McConfig":
        from dataclasses import replace
        return replace(self, **changes)


@dataclass(frozen=True)
class FrequencyHistogram:
    """Counts of the frequency selected by a statistic, in equal-width bins over the grid."""

    edges_hz: np.ndarray
    counts: np.ndarray
    expected_fraction: np.ndarray  # share of grid ordinates falling in each bin

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def uniformity_pvalue(self) -> float:
        """Chi-square goodness-of-fit p-value against a uniform choice of grid index."""
        expected = self.expected_fraction * self.total
        return float(stats.chisquare(self.counts, expected).pvalue)


def frequency_histogram(grid: FourierGrid, k: np.ndarray, bins: int) -> FrequencyHistogram:
    edges_k = np.linspace(0.5, grid.size + 0.5, bins + 1)
    counts = np.histogram(k, edges_k)[0]
    expected = np.histogram(grid.indices, edges_k)[0] / grid.size
    return FrequencyHistogram(edges_k / (grid.n * grid.dt), counts, expected)


@dataclass
class Exceedance:
    gammas: np.ndarray
    counts: np.ndarray
    trials: int

    @property
    def rates(self) -> np.ndarray:
        return self.counts / self.trials

    @property
    def stderr(self) -> np.ndarray:
        r = self.rates
        return np.sqrt(r * (1 - r) / self.trials)


@dataclass
class McSummary:
    """Per-trial statistics and selected grid indices for each hypothesis and test.

    ``statistics[hyp][label]`` and ``argmax[hyp][label]`` are arrays indexed by
    trial; ``argmax`` holds grid indices k in 1..eta.
    """

    config: McConfig
    statistics: dict
    argmax: dict

    @property
    def trials(self) -> int:
        return self.config.trials

    def exceedance(self, test, gammas, hypothesis: str = "h0") -> Exceedance:
        label = test.label if isinstance(test, TestKind) else str(test)
        s = np.sort(self.statistics[hypothesis][label])
        g = np.asarray(gammas, dtype=float)
        counts = s.size - np.searchsorted(s, g, side="right")
        return Exceedance(g, counts, s.size)

    @property
    def exceedances(self) -> dict:
        """Exceedance counts at the configured gamma grids, keyed by (hypothesis, label)."""
        out = {}
        for label, g in (self.config.gammas or {}).items():
            for hyp in self.statistics:
                out[hyp, label] = self.exceedance(label, g, hyp)
        return out

    def histogram(self, test, bins: Optional[int] = None, hypothesis: str = "h0") -> FrequencyHistogram:
        label = test.label if isinstance(test, TestKind) else str(test)
        return frequency_histogram(self.config.grid, self.argmax[hypothesis][label],
                                   bins or self.config.histogram_bins)


def _signal_spectrum(config: McConfig) -> np.ndarray:
    x = config.sines.signal(config.n, config.dt)
    return np.fft.rfft(x)[1:config.n // 2]


def _run_block(config: McConfig, trials: range, sig_fft: Optional[np.ndarray]):
    n = config.n
    eta = config.grid.size
    obs_fft = np.empty((len(trials), eta), dtype=complex)
    pbar = np.empty((len(trials), eta))
    for i, t in enumerate(trials):
        obs, train = draw_trial(config.noise, n, config.n_training, config.master_seed, t)
        obs_fft[i] = np.fft.rfft(obs)[1:n // 2]
        pbar[i] = periodogram_ordinates(train).mean(axis=0)
    check_denominator(pbar)
    out = {}
    for hyp in config.hypotheses:
        spec = obs_fft if hyp == "h0" else obs_fft + sig_fft
        p = (spec.real ** 2 + spec.imag ** 2) / n
        pt = p / pbar
        res = {}
        for test in config.tests:
            stat, idx = statistic_array(test, pt if test.kind.standardized else p)
            res[test.label] = (stat, idx + 1)
        out[hyp] = res
    return out


def run_mc(config: McConfig, threads: int = 1) -> McSummary:
    """Run all trials of ``config``; results do not depend on ``threads``."""
    config.validate()
    sig_fft = _signal_spectrum(config) if "h1" in config.hypotheses else None
    blocks = [range(a, min(a + CHUNK_TRIALS, config.trials))
              for a in range(0, config.trials, CHUNK_TRIALS)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda b: _run_block(config, b, sig_fft), blocks))
    else:
        results = [_run_block(config, b, sig_fft) for b in blocks]
    statistics, argmax = {}, {}
    for hyp in config.hypotheses:
        statistics[hyp], argmax[hyp] = {}, {}
        for test in config.tests:
            statistics[hyp][test.label] = np.concatenate([r[hyp][test.label][0] for r in results])
            argmax[hyp][test.label] = np.concatenate([r[hyp][test.label][1] for r in results])
    return McSummary(config, statistics, argmax)


@dataclass(frozen=True)
class Calibration:
    threshold: float
    ci_low: float
    ci_high: float
    target_pfa: float
    trials: int
    confidence: float = 0.95
    achieved_pfa: Optional[float] = None  # fraction of null statistics strictly above threshold


def calibrate_from_statistics(h0: np.ndarray, target_pfa: float, confidence: float = 0.95) -> Calibration:
    """Empirical (1 - target_pfa) quantile of null statistics with an order-statistic CI."""
    x = np.sort(np.asarray(h0, dtype=float))
    n = x.size
    if not 0 < target_pfa < 1:
        raise InvalidInputError("target_pfa must lie strictly between 0 and 1")
    if n < 100 / target_pfa - 1e-9:
        raise InvalidInputError(
            f"{n} trials cannot resolve pfa={target_pfa}; need at least {math.ceil(100 / target_pfa)}")
    q = 1.0 - target_pfa
    m = int(math.ceil(n * q - 1e-9))
    alpha = 1.0 - confidence
    lo = int(stats.binom.ppf(alpha / 2, n, q))
    hi = int(stats.binom.ppf(1 - alpha / 2, n, q)) + 1
    lo, hi = max(lo, 1), min(hi, n)
    thr = float(x[m - 1])
    achieved = (n - np.searchsorted(x, thr, side="right")) / n
    return Calibration(thr, float(x[lo - 1]), float(x[hi - 1]), target_pfa, n, confidence, float(achieved))


def calibrate_threshold(config: McConfig, test: TestKind, target_pfa: float,
                        threads: int = 1) -> Calibration:
    """Monte Carlo threshold for ``test`` at false-alarm rate ``target_pfa``."""
    if config.trials < 100 / target_pfa - 1e-9:
        raise InvalidInputError(
            f"{config.trials} trials cannot resolve pfa={target_pfa}; "
            f"need at least {math.ceil(100 / target_pfa)}")
    summary = run_mc(config.replace(tests=(test,), hypotheses=("h0",)), threads)
    return calibrate_from_statistics(summary.statistics["h0"][test.label], target_pfa)


def roc_from_statistics(h0: np.ndarray, h1: np.ndarray, meta: Optional[dict] = None) -> RocCurve:
    """Empirical ROC sweeping the threshold over all pooled statistic values.

    Each distinct false-alarm rate keeps its largest detection rate; binomial
    standard errors are attached to both coordinates.
    """
    s0, s1 = np.sort(h0), np.sort(h1)
    n0, n1 = s0.size, s1.size
    gam = np.unique(np.r_[s0, s1])
    pfa = (n0 - np.searchsorted(s0, gam, side="right")) / n0
    pdet = (n1 - np.searchsorted(s1, gam, side="right")) / n1
    pfa, pdet = np.r_[pfa, 1.0], np.r_[pdet, 1.0]
    order = np.lexsort((pdet, pfa))
    pfa, pdet = pfa[order], pdet[order]
    last = np.r_[pfa[1:] != pfa[:-1], True]
    pfa, pdet = pfa[last], pdet[last]
    meta = dict(meta or {})
    meta.update(source="empirical", n0=n0, n1=n1)
    return RocCurve(pfa, pdet, np.sqrt(pfa * (1 - pfa) / n0), np.sqrt(pdet * (1 - pdet) / n1), meta)


def empirical_auc(h0: np.ndarray, h1: np.ndarray) -> tuple[float, float]:
    """Mann-Whitney AUC of H1 over H0 statistics and its Hanley-McNeil standard error."""
    n0, n1 = len(h0), len(h1)
    u = stats.mannwhitneyu(h1, h0, alternative="two-sided").statistic
    a = float(u / (n0 * n1))
    q1, q2 = a / (2 - a), 2 * a * a / (1 + a)
    var = (a * (1 - a) + (n1 - 1) * (q1 - a * a) + (n0 - 1) * (q2 - a * a)) / (n0 * n1)
    return a, float(math.sqrt(max(var, 0.0)))


def _need_h0_h1(config: McConfig) -> McConfig:
    return config.replace(hypotheses=("h0", "h1"))


def empirical_roc(config: McConfig, test: TestKind, threads: int = 1) -> RocCurve:
    summary = run_mc(_need_h0_h1(config).replace(tests=(test,)), threads)
    return summary_roc(summary, test)


def summary_roc(summary: McSummary, test: TestKind) -> RocCurve:
    h0 = summary.statistics["h0"][test.label]
    h1 = summary.statistics["h1"][test.label]
    auc, se = empirical_auc(h0, h1)
    return roc_from_statistics(h0, h1, {"test": test.label, "L": summary.config.n_training,
                                        "auc": auc, "auc_stderr": se})


def fa_frequency_histogram(config: McConfig, test: TestKind, threads: int = 1) -> FrequencyHistogram:
    """Histogram under H0 of the grid frequency selected by ``test``."""
    summary = run_mc(config.replace(tests=(test,), hypotheses=("h0",)), threads)
    return summary.histogram(test)


