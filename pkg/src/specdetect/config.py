"""YAML experiment configuration, validated with pydantic.

Example::

    schema_version: 1
    seed: 20240101
    grid: {n: 1024, dt: 60.0}
    training_sizes: [5, 100]
    noise: {model: stellar_ar6}
    sines:
      - {amplitude: 0.1, frequency: 0.005, phase: 0.0}
    tests:
      - {kind: t_tilde}
      - {kind: t_tilde_nc, n_c: n_s}
    mc: {trials: 10000}
    pfa: 0.01
    pfa_grid: [0.001, 0.01, 0.1]
"""

from __future__ import annotations

from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .detectors import Kind, TestKind
from .errors import ConfigError, InvalidInputError
from .model import Sinusoid, SinusoidSet, fourier_grid
from .simulation import ARModel, McConfig, default_stellar_ar6, white_noise

SCHEMA_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridSpec(_Strict):
    n: int = Field(ge=4)
    dt: float = Field(gt=0)

    @field_validator("n")
    @classmethod
    def _even(cls, v):
        if v % 2:
            raise ValueError("n must be even")
        return v


class StellarNoise(_Strict):
    model: Literal["stellar_ar6"]


class ArNoise(_Strict):
    model: Literal["ar"]
    coeffs: list[float]
    sigma: float = Field(gt=0)


class WhiteNoise(_Strict):
    model: Literal["white"]
    sigma: float = Field(gt=0)


NoiseSpec = Annotated[Union[StellarNoise, ArNoise, WhiteNoise], Field(discriminator="model")]


class SineSpec(_Strict):
    amplitude: float = Field(ge=0)
    frequency: float = Field(gt=0, description="Hz")
    phase: float


class TestSpec(_Strict):
    __test__ = False

    kind: Kind
    n_c: Union[int, Literal["n_s"], None] = None


class McSpec(_Strict):
    trials: int = Field(ge=1)
    histogram_bins: int = Field(default=50, ge=1)


class InputSpec(_Strict):
    mode: Literal["synthetic", "files"]
    observation: Optional[Path] = None
    training: list[Path] = []
    detrend: Literal["none", "mean", "linear"] = "none"

    @model_validator(mode="after")
    def _files(self):
        if self.mode == "files" and self.observation is None:
            raise ValueError("files mode needs an observation path")
        if self.mode == "synthetic" and (self.observation is not None or self.training):
            raise ValueError("synthetic mode takes no observation/training paths")
        return self


class ExperimentConfig(_Strict):
    schema_version: Literal[1]
    seed: int = Field(ge=0, lt=2 ** 64)
    grid: GridSpec
    training_sizes: Optional[list[int]] = None
    noise: Optional[NoiseSpec] = None
    sines: list[SineSpec]
    tests: list[TestSpec] = Field(min_length=1)
    mc: Optional[McSpec] = None
    pfa: Optional[float] = Field(default=None, gt=0, lt=1)
    pfa_grid: Optional[list[float]] = None
    input: InputSpec = InputSpec(mode="synthetic")

    @field_validator("training_sizes", mode="before")
    @classmethod
    def _listify(cls, v):
        return [v] if isinstance(v, int) else v

    @field_validator("training_sizes")
    @classmethod
    def _positive(cls, v):
        if v is not None and (not v or any(l < 1 for l in v)):
            raise ValueError("training sizes must be >= 1")
        return v

    @field_validator("pfa_grid")
    @classmethod
    def _pfa_grid(cls, v):
        if v is not None and (not v or any(not 0 < p < 1 for p in v)):
            raise ValueError("pfa_grid entries must lie strictly between 0 and 1")
        return v

    @model_validator(mode="after")
    def _consistency(self):
        grid = fourier_grid(self.grid.n, self.grid.dt)
        if self.input.mode == "synthetic":
            if self.noise is None:
                raise ValueError("synthetic mode needs a noise model")
            if not self.training_sizes:
                raise ValueError("synthetic mode needs training_sizes")
        elif self.training_sizes and self.training_sizes != [len(self.input.training)]:
            raise ValueError("training_sizes must match the number of training files")
        for t in self.tests:
            if t.kind.needs_n_c and t.n_c is None:
                raise ValueError(f"{t.kind.value} needs an explicit n_c")
            if t.n_c == "n_s" and not self.sines:
                raise ValueError("n_c: n_s needs at least one sine")
        try:
            for t in self.test_kinds():
                t.check(grid.size)
            self.sine_set().check_grid(grid)
        except InvalidInputError as exc:
            raise ValueError(str(exc)) from None
        return self

    def test_kinds(self) -> tuple[TestKind, ...]:
        out = []
        for t in self.tests:
            n_c = len(self.sines) if t.n_c == "n_s" else t.n_c
            out.append(TestKind(t.kind, n_c))
        return tuple(out)

    def sine_set(self) -> SinusoidSet:
        return SinusoidSet(tuple(Sinusoid(s.amplitude, s.frequency, s.phase) for s in self.sines))

    def noise_model(self) -> ARModel:
        if self.noise is None:
            raise ConfigError("no noise model configured")
        if isinstance(self.noise, StellarNoise):
            return default_stellar_ar6()
        if isinstance(self.noise, WhiteNoise):
            return white_noise(self.noise.sigma)
        try:
            return ARModel(tuple(self.noise.coeffs), self.noise.sigma)
        except InvalidInputError as exc:
            raise ConfigError(str(exc)) from exc

    def mc_config(self, n_training: int, seed: Optional[int] = None, **changes) -> McConfig:
        if self.mc is None:
            raise ConfigError("this command needs an 'mc' section")
        kwargs = dict(n=self.grid.n, dt=self.grid.dt, n_training=n_training,
                      noise=self.noise_model(), tests=self.test_kinds(), trials=self.mc.trials,
                      master_seed=self.seed if seed is None else seed, sines=self.sine_set(),
                      histogram_bins=self.mc.histogram_bins)
        kwargs.update(changes)
        return McConfig(**kwargs)


def parse_config(data: dict, base_dir: Optional[Path] = None) -> ExperimentConfig:
    """Validate a mapping; relative input paths are resolved against ``base_dir``."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc
    if base_dir is not None and cfg.input.mode == "files":
        inp = cfg.input
        resolve = lambda p: p if p.is_absolute() else base_dir / p
        inp = inp.model_copy(update={"observation": resolve(inp.observation),
                                     "training": [resolve(p) for p in inp.training]})
        cfg = cfg.model_copy(update={"input": inp})
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    return parse_config(data, path.parent)
