"""Sinusoid detection in colored noise with training-set standardized periodograms."""

from .detectors import (Kind, TestKind, TestReport, chiu_stat, decide, evaluate, fisher_stat,
                        order_statistics, robust_fisher_stat, t_tilde, t_tilde_fisher, t_tilde_nc)
from .errors import (ConfigError, DegenerateInputError, IngestionError, InvalidInputError,
                     NumericError, SpecDetectError)
from .kernels import (NoncentralitySpectrum, dirichlet_ratio, f_cdf, f_pdf, f_sf, fejer_kernel,
                      noncentral_f_cdf, noncentral_f_sf, noncentrality_lambda)
from .model import (FourierGrid, NoisePsd, Sinusoid, SinusoidSet, TimeSeries, TrainingSet,
                    fourier_grid, synthesize)
from .performance import (RocCurve, pdet_t_tilde, pdet_t_tilde_nc, pdet_vs_pfa, pfa_t_tilde,
                          pfa_t_tilde_nc, poisson_binomial_upper, roc_curve_analytic,
                          threshold_from_pfa, threshold_from_pfa_nc)
from .periodogram import (Periodogram, averaged_periodogram, classical_periodogram,
                          standardize, standardized_periodogram)
from .simulation import (ARModel, Calibration, FrequencyHistogram, McConfig, McSummary,
                         ar_generate, ar_psd, calibrate_threshold, default_stellar_ar6,
                         empirical_roc, fa_frequency_histogram, run_mc, white_noise)
from .seriesio import load_series, read_table, write_series, write_table

__version__ = "0.1.0"
