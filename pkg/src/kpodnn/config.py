"""Pipeline configuration: TOML sections [fom], [sampling], [reduction], [nn], [run].

Defaults describe the smoke-scale wave benchmark: a 5x5x5 Latin hypercube
over (amplitude, center, width), 25 stored time levels per trajectory, and a
kernel basis at gamma = 1e-10. Every field can be overridden from a file or
from command-line flags.
"""

import dataclasses
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .errors import ValidationError
from .sampling import ParameterBox
from .wave import (
    DEFAULT_FINAL_TIME,
    DEFAULT_INTERVALS,
    DEFAULT_LENGTH,
    GridSpec,
    stable_step_count,
)


@dataclass(frozen=True)
class FomConfig:
    length: float = DEFAULT_LENGTH
    final_time: float = DEFAULT_FINAL_TIME
    intervals: int = DEFAULT_INTERVALS
    wave_speed: float = 1.0
    time_steps: int | None = None  # None: smallest stable count that strides evenly


@dataclass(frozen=True)
class SamplingConfig:
    samples_per_axis: int = 5
    stored_times: int = 25
    amplitude: tuple[float, float] = (0.5, 1.0)
    center: tuple[float, float] | None = None  # None: [L/3, 2L/3]
    width: tuple[float, float] = (0.5, 1.0)
    test_points: tuple[tuple[float, ...], ...] = ((0.75, 8.0, 0.9),)


@dataclass(frozen=True)
class ReductionConfig:
    method: str = "kpod"
    gamma: float = 1e-10
    eps_hat: float = 1e-12


@dataclass(frozen=True)
class NnConfig:
    """Training hyperparameters for the coefficient regressor.

    Defaults are calibrated for the wave benchmark: with unit-scale
    inputs and coefficient targets the weight penalty must stay well
    below the data term (theta near 1e-6), and a stepped learning-rate
    decay avoids the late-epoch noise floor of a constant rate.
    """

    epochs: int = 100
    batch_size: int = 32
    lr: float = 0.03
    beta1: float = 0.9
    beta2: float = 0.999
    amsgrad: bool = True
    theta: float = 1e-6
    kfolds: int = 5
    depth_base: float = 10.0
    scale_inputs: bool = True
    decay_every: int = 20
    decay_factor: float = 0.5


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0


@dataclass(frozen=True)
class PipelineConfig:
    fom: FomConfig = field(default_factory=FomConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    reduction: ReductionConfig = field(default_factory=ReductionConfig)
    nn: NnConfig = field(default_factory=NnConfig)
    run: RunConfig = field(default_factory=RunConfig)


_SECTIONS = {
    "fom": FomConfig,
    "sampling": SamplingConfig,
    "reduction": ReductionConfig,
    "nn": NnConfig,
    "run": RunConfig,
}


def _build_section(cls, table: dict, name: str):
    known = {f.name: f for f in dataclasses.fields(cls)}
    values = {}
    for key, raw in table.items():
        if key not in known:
            raise ValidationError(f"unknown key '{key}' in [{name}]")
        values[key] = _coerce(raw, key)
    return cls(**values)


def _coerce(raw, key):
    if isinstance(raw, list):
        return tuple(_coerce(v, key) for v in raw)
    return raw


def load_config(path) -> PipelineConfig:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    sections = {}
    for name, table in data.items():
        if name not in _SECTIONS:
            raise ValidationError(f"unknown config section [{name}]")
        if not isinstance(table, dict):
            raise ValidationError(f"section [{name}] must be a table")
        sections[name] = _build_section(_SECTIONS[name], table, name)
    return PipelineConfig(**sections)


def default_config() -> PipelineConfig:
    return PipelineConfig()


def parameter_box(config: PipelineConfig) -> ParameterBox:
    """(amplitude, center, width) bounds; the center defaults to [L/3, 2L/3]."""
    length = config.fom.length
    center = config.sampling.center
    if center is None:
        center = (length / 3.0, 2.0 * length / 3.0)
    return ParameterBox(
        names=("amplitude", "center", "width"),
        lows=(config.sampling.amplitude[0], center[0], config.sampling.width[0]),
        highs=(config.sampling.amplitude[1], center[1], config.sampling.width[1]),
    )


def grid_and_stride(config: PipelineConfig) -> tuple[GridSpec, int]:
    """Time grid satisfying CFL whose steps subsample evenly onto the stored levels.

    With ``stored_times`` levels (including t = 0) the step count must be a
    multiple of ``stored_times - 1``; the default picks the smallest stable
    such count, keeping dt as large as stability allows.
    """
    stored = config.sampling.stored_times
    if stored < 2:
        raise ValidationError(f"stored_times must be >= 2, got {stored}")
    segments = stored - 1
    fom = config.fom
    if fom.time_steps is None:
        n_steps = stable_step_count(
            L=fom.length, T=fom.final_time, N=fom.intervals,
            c=fom.wave_speed, multiple_of=segments,
        )
    else:
        n_steps = fom.time_steps
        if n_steps % segments != 0:
            raise ValidationError(
                f"time_steps={n_steps} does not divide into {stored} stored levels"
            )
    grid = GridSpec(n_steps=n_steps, L=fom.length, T=fom.final_time, N=fom.intervals)
    return grid, n_steps // segments


def config_payload(config: PipelineConfig) -> dict:
    """JSON-ready nested dict, recorded in model provenance."""
    out = dataclasses.asdict(config)
    for section in out.values():
        for key, value in section.items():
            if isinstance(value, float) and not math.isfinite(value):
                raise ValidationError(f"non-finite config value for {key}")
    return out
