"""Sampled-data model: time series, the positive Fourier grid, sinusoid sets.

Conventions used throughout the package:

* sample ``j`` (0-based) is taken at ``t = (j + 1) * dt``;
* the periodogram is ``|sum_j x_j exp(-2i pi nu t_j)|**2 / N`` and the noise PSD
  is the asymptotic mean of that periodogram, so white noise of variance
  ``s2`` has the flat PSD ``s2``;
* kernels work in normalized frequency ``nu * dt`` in (0, 1/2); public APIs use Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class TimeSeries:
    samples: np.ndarray
    dt: float

    def __post_init__(self):
        x = np.array(self.samples, dtype=float)
        if x.ndim != 1:
            raise InvalidInputError("samples must be one-dimensional")
        n = x.size
        if n < 4 or n % 2:
            raise InvalidInputError(f"series length must be even and >= 4, got {n}")
        if not np.isfinite(x).all():
            raise InvalidInputError("samples must be finite")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "dt", float(self.dt))

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.n) + 1) * self.dt

    def grid(self) -> "FourierGrid":
        return fourier_grid(self.n, self.dt)


@dataclass(frozen=True)
class FourierGrid:
    """Positive Fourier frequencies excluding DC and Nyquist."""

    n: int
    dt: float

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.n // 2)

    @property
    def freqs(self) -> np.ndarray:
        return self.indices / (self.n * self.dt)

    @property
    def normalized(self) -> np.ndarray:
        return self.indices / self.n

    @property
    def size(self) -> int:
        """Number of ordinates, ``N/2 - 1`` (often written eta)."""
        return self.n // 2 - 1

    @property
    def nyquist(self) -> float:
        return 0.5 / self.dt

    def frequency(self, k: int) -> float:
        return k / (self.n * self.dt)


def fourier_grid(n: int, dt: float) -> FourierGrid:
    if int(n) != n or n < 4 or n % 2:
        raise InvalidInputError(f"n must be an even integer >= 4, got {n}")
    if not (np.isfinite(dt) and dt > 0):
        raise InvalidInputError(f"dt must be positive, got {dt}")
    return FourierGrid(int(n), float(dt))


@dataclass(frozen=True)
class Sinusoid:
    amplitude: float
    frequency: float  # Hz
    phase: float = 0.0  # radians

    def __post_init__(self):
        if not self.amplitude >= 0:
            raise InvalidInputError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.frequency > 0:
            raise InvalidInputError(f"frequency must be > 0, got {self.frequency}")
        if not np.isfinite(self.phase):
            raise InvalidInputError("phase must be finite")


@dataclass(frozen=True)
class SinusoidSet:
    components: tuple[Sinusoid, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @classmethod
    def from_arrays(cls, amplitudes, frequencies, phases=None) -> "SinusoidSet":
        amplitudes = np.broadcast_to(np.asarray(amplitudes, dtype=float), np.shape(frequencies))
        if phases is None:
            phases = np.zeros(len(frequencies))
        phases = np.broadcast_to(np.asarray(phases, dtype=float), np.shape(frequencies))
        return cls(tuple(Sinusoid(float(a), float(f), float(p))
                         for a, f, p in zip(amplitudes, frequencies, phases)))

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([c.amplitude for c in self.components], dtype=float)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([c.frequency for c in self.components], dtype=float)

    @property
    def phases(self) -> np.ndarray:
        return np.array([c.phase for c in self.components], dtype=float)

    def check_grid(self, grid: FourierGrid) -> None:
        for c in self.components:
            if c.frequency >= grid.nyquist:
                raise InvalidInputError(
                    f"sinusoid frequency {c.frequency} Hz is not below Nyquist {grid.nyquist} Hz")

    def signal(self, n: int, dt: float) -> np.ndarray:
        """Noise-free sum of the components sampled at ``t_j = j*dt``, j = 1..n."""
        t = (np.arange(n) + 1) * dt
        out = np.zeros(n)
        for c in self.components:
            out += c.amplitude * np.sin(2 * np.pi * c.frequency * t + c.phase)
        return out


@dataclass(frozen=True)
class TrainingSet:
    """L noise-only realizations sharing one sampling grid."""

    members: tuple[TimeSeries, ...]

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise InvalidInputError("training set needs at least one member")
        n, dt = members[0].n, members[0].dt
        for i, m in enumerate(members):
            if m.n != n or m.dt != dt:
                raise InvalidInputError(
                    f"training member {i} has grid (n={m.n}, dt={m.dt}), expected (n={n}, dt={dt})")
        object.__setattr__(self, "members", members)

    @classmethod
    def from_array(cls, samples: np.ndarray, dt: float) -> "TrainingSet":
        return cls(tuple(TimeSeries(row, dt) for row in np.atleast_2d(samples)))

    def __len__(self) -> int:
        return len(self.members)

    @property
    def n(self) -> int:
        return self.members[0].n

    @property
    def dt(self) -> float:
        return self.members[0].dt

    def as_array(self) -> np.ndarray:
        return np.stack([m.samples for m in self.members])


@dataclass(frozen=True)
class NoisePsd:
    """Noise PSD sampled on a Fourier grid (periodogram-mean convention)."""

    grid: FourierGrid
    values: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise InvalidInputError(f"PSD needs {self.grid.size} values, got shape {v.shape}")
        if not (np.isfinite(v).all() and (v > 0).all()):
            raise InvalidInputError("PSD values must be finite and strictly positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def constant(cls, grid: FourierGrid, level: float) -> "NoisePsd":
        return cls(grid, np.full(grid.size, float(level)), label=f"flat({level})")


def synthesize(sines: SinusoidSet, noise: TimeSeries) -> TimeSeries:
    """Add the sinusoids to a noise realization (model under H1)."""
    sines.check_grid(noise.grid())
    if not len(sines):
        return noise
    return TimeSeries(noise.samples + sines.signal(noise.n, noise.dt), noise.dt)


def as_sinusoid_set(obj: SinusoidSet | Iterable[Sinusoid] | Sequence[tuple]) -> SinusoidSet:
    if isinstance(obj, SinusoidSet):
        return obj
    comps = []
    for c in obj:
        comps.append(c if isinstance(c, Sinusoid) else Sinusoid(*c))
    return SinusoidSet(tuple(comps))
