"""Classical, training-averaged and standardized periodograms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .model import FourierGrid, TimeSeries, TrainingSet, fourier_grid

CLASSICAL = "classical"
AVERAGED = "averaged"
STANDARDIZED = "standardized"

# Denominator ordinates below this fraction of their mean are treated as zeros.
DEGENERATE_RATIO = 1e-30


@dataclass(frozen=True)
class Periodogram:
    """Ordinates over the Fourier grid, tagged with how they were produced.

    ``n_training`` is the training-set size L for averaged and standardized
    periodograms and ``None`` for a classical one.
    """

    grid: FourierGrid
    ordinates: np.ndarray
    kind: str = CLASSICAL
    n_training: Optional[int] = None

    def __post_init__(self):
        p = np.array(self.ordinates, dtype=float)
        if p.shape != (self.grid.size,):
            raise InvalidInputError(f"expected {self.grid.size} ordinates, got shape {p.shape}")
        if not np.isfinite(p).all() or (p < 0).any():
            raise InvalidInputError("ordinates must be finite and non-negative")
        if self.kind not in (CLASSICAL, AVERAGED, STANDARDIZED):
            raise InvalidInputError(f"unknown periodogram kind {self.kind!r}")
        if self.kind != CLASSICAL and not (self.n_training and self.n_training >= 1):
            raise InvalidInputError(f"{self.kind} periodogram needs n_training >= 1")
        p.setflags(write=False)
        object.__setattr__(self, "ordinates", p)

    @property
    def freqs(self) -> np.ndarray:
        return self.grid.freqs

    def __len__(self) -> int:
        return self.grid.size

    def scaled(self, c: float) -> "Periodogram":
        return Periodogram(self.grid, self.ordinates * c, self.kind, self.n_training)


def periodogram_ordinates(x: np.ndarray) -> np.ndarray:
    """Raw periodogram on the grid indices 1..N/2-1 along the last axis.

    Works on stacks of series (``x.shape == (..., N)``); the DC and Nyquist
    ordinates are dropped.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    spec = np.fft.rfft(x, axis=-1)[..., 1:n // 2]
    return (spec.real ** 2 + spec.imag ** 2) / n


def classical_periodogram(x: TimeSeries) -> Periodogram:
    """Classical periodogram of a single series."""
    return Periodogram(x.grid(), periodogram_ordinates(x.samples), CLASSICAL)


def averaged_periodogram(training: TrainingSet) -> Periodogram:
    """Pointwise mean of the member periodograms."""
    grid = fourier_grid(training.n, training.dt)
    p = periodogram_ordinates(training.as_array()).mean(axis=0)
    return Periodogram(grid, p, AVERAGED, len(training))


def check_denominator(pbar: np.ndarray) -> None:
    pbar = np.asarray(pbar)
    scale = pbar.mean(axis=-1, keepdims=True)
    bad = ~(pbar > DEGENERATE_RATIO * scale) | ~(scale > 0)
    if bad.any():
        k = int(np.argmax(bad.reshape(-1, pbar.shape[-1]).any(axis=0))) + 1
        raise DegenerateInputError(
            f"averaged periodogram vanishes at grid index {k}; training data are degenerate")


def standardized_periodogram(p: Periodogram, pbar: Periodogram) -> Periodogram:
    """Ratio of an observation periodogram to the training-set average."""
    if p.kind != CLASSICAL:
        raise InvalidInputError(f"numerator must be a classical periodogram, got {p.kind}")
    if pbar.kind != AVERAGED:
        raise InvalidInputError(f"denominator must be an averaged periodogram, got {pbar.kind}")
    if p.grid != pbar.grid:
        raise InvalidInputError(f"grid mismatch: {p.grid} vs {pbar.grid}")
    check_denominator(pbar.ordinates)
    return Periodogram(p.grid, p.ordinates / pbar.ordinates, STANDARDIZED, pbar.n_training)


def standardize(x: TimeSeries, training: TrainingSet) -> Periodogram:
    """Convenience: standardized periodogram of ``x`` against ``training``."""
    if (x.n, x.dt) != (training.n, training.dt):
        raise InvalidInputError(
            f"observation grid (n={x.n}, dt={x.dt}) differs from training grid "
            f"(n={training.n}, dt={training.dt})")
    return standardized_periodogram(classical_periodogram(x), averaged_periodogram(training))
