import random

from enum import (
    Enum,
    IntEnum,
)
from pathlib import Path
from typing import (
    Any,
    Dict,
    List,
    Optional,
)

import numpy as np

from pydantic import (
    BaseModel,
    BaseSettings,
    Field,
    ValidationError,
    root_validator,
    validator,
)
from ruamel.yaml import YAML

from .errors import ConfigValidationError
from .model import (
    AdamConfig,
    LogLevel,
    LossWeights,
    MlpArch,
    ScatteringScene,
)


__all__ = [
    "LoggingConfig",
    "LogFormat",
    "LogHandler",
    "FileLogHandler",
    "ArrayLayout",
    "ArrayConfig",
    "NoiseConfig",
    "Quadrature",
    "ShConfig",
    "PwConfig",
    "Weighting",
    "PinnConfig",
    "SliceConfig",
    "EvaluationConfig",
    "Settings",
    "Method",
    "SeedStream",
    "load_config_file",
    "load_settings",
    "get_seed",
    "configure_seed",
    "derive_seed",
]

_SEED: Optional[int] = None

MAX_SEED = 2 ** 64 - 1


class LogFormat(str, Enum):
    """Enum for log formatter styles"""

    PLAIN = "plain"
    """Human readable structured text format"""

    COLORED = "colored"
    """The same as PLAIN, but colorized"""

    JSON = "json"
    """The log events in JSON format"""


class LogHandler(BaseModel):
    """Configuration for a log handler"""

    enabled: bool = Field(
        False,
        description="If the log handler should be enabled or not",
    )
    format: LogFormat = Field(
        LogFormat.PLAIN,
        description="The log format to use when logging to the console",
    )


class FileLogHandler(LogHandler):
    """Configuration for a file log handler"""

    format: LogFormat = Field(
        LogFormat.JSON,
        description="The log format to use when logging to the file",
    )

    path: Path = Field(
        Path("soundfield-pinn.log"),
        description="The file path to log to, must be set if the handler is enabled.",
    )

    @validator("path")
    def validate_log_path(cls, path: Path) -> Path:
        """Validate that the given path is a file if it exists"""
        if path.exists() and not path.is_file():
            raise ValueError(f"Log file path {path.absolute()} is not a file!")
        return path


class LogTimestamp(BaseModel):
    """Configuration for the log timestamp format and key"""

    format: Optional[str] = Field(
        None,
        description=(
            r"The strftime string format to use for formating timestamps (e.g., `%Y-%m-%d %H:%M:%S`). "
            "If this is `None` a [UNIX timestamp](https://en.wikipedia.org/wiki/Unix_time) is used."
        ),
    )
    utc: bool = Field(
        True,
        description="If the timestamp should be in UTC or the local timezone.",
    )
    key: str = Field(
        "timestamp",
        description="The key to use for the timestamp.",
    )


class LoggingConfig(BaseSettings):
    """Configuration options for the logging system."""

    level: LogLevel = Field(
        LogLevel.WARNING,
        description="The log level to use for logging",
    )

    timestamp: LogTimestamp = Field(
        LogTimestamp(),
        description="Configuration options for modifying the log timestamps",
    )

    console: LogHandler = Field(
        LogHandler(enabled=True, format=LogFormat.COLORED),
        description="Configuration for the console logger",
    )

    file: FileLogHandler = Field(
        FileLogHandler(enabled=False, format=LogFormat.JSON),
        description="Configuration for the file logger",
    )


class ArrayLayout(str, Enum):
    """Microphone placements on the rigid sphere"""

    PENTAKIS = "pentakis"
    """The 32 vertices of a pentakis dodecahedron"""

    FIBONACCI = "fibonacci"
    """`count` points of a Fibonacci lattice"""


class ArrayConfig(BaseModel):
    """Configuration of the spherical microphone array."""

    layout: ArrayLayout = Field(
        ArrayLayout.PENTAKIS,
        description="The microphone layout on the sphere surface",
    )
    count: int = Field(
        32,
        ge=1,
        description="Number of microphones (fixed to 32 for the pentakis layout)",
    )

    @validator("count")
    def validate_pentakis_count(cls, v: int, values: Dict[str, Any]) -> int:
        if values.get("layout") == ArrayLayout.PENTAKIS:
            assert v == 32, "the pentakis layout always has 32 microphones"
        return v


class NoiseConfig(BaseModel):
    """Measurement noise configuration."""

    snr_db: Optional[float] = Field(
        30.0,
        description="Signal to noise ratio in dB, `null` for noiseless measurements",
    )


class Quadrature(str, Enum):
    """Quadrature weights for the spherical harmonic projection"""

    UNIFORM = "uniform"
    """Equal weights `4π/Q`"""

    DESIGN = "design"
    """Exact pentakis-dodecahedron weights (only valid with that layout)"""


class ShConfig(BaseModel):
    """Spherical harmonic estimator settings."""

    order: int = Field(4, ge=0, le=60, description="Truncation order N")
    quadrature: Quadrature = Field(
        Quadrature.UNIFORM,
        description="Quadrature weights used to project onto the harmonics",
    )


class PwConfig(BaseModel):
    """Plane wave decomposition settings."""

    directions: Optional[int] = Field(
        None,
        ge=1,
        description="Number of Fibonacci lattice directions, `null` to use the microphone directions",
    )
    reg: float = Field(
        1e-3,
        ge=0,
        description="Tikhonov parameter relative to the largest singular value",
    )
    order: Optional[int] = Field(
        None,
        ge=0,
        le=60,
        description="Modal order of the rigid sphere response, `null` for ceil(ka) + 10",
    )


class Weighting(str, Enum):
    """Default loss weights used when no explicit `weights` are configured"""

    BALANCED = "balanced"
    """`λ1 = 1`, `λ2 = 4/k⁴`, `λ3 = 1`, every weighted term on the scale of the squared field"""

    LITERAL = "literal"
    """`λ1 = 1`, `λ2 = 1/k²`, `λ3 = a`"""


class PinnConfig(BaseModel):
    """Physics informed network settings."""

    arch: MlpArch = Field(MlpArch(hidden_width=16), description="Network architecture")
    input_scale: Optional[float] = Field(
        None,
        gt=0,
        description="Coordinate scale of the network inputs, `null` for 1/a",
    )
    optimizer: AdamConfig = Field(
        AdamConfig(lr=1e-3), description="Adam hyperparameters"
    )
    epochs: int = Field(10000, ge=1, description="Number of full batch epochs")
    weights: Optional[LossWeights] = Field(
        None,
        description="Loss weight override, `null` for the `weighting` defaults",
    )
    weighting: Weighting = Field(
        Weighting.BALANCED, description="Default loss weights without an override"
    )
    data_only: bool = Field(
        False,
        description="Train the plain regression network (λ2 = λ3 = 0)",
    )
    collocation_points: int = Field(1000, ge=1, description="PDE points D")
    boundary_points: int = Field(500, ge=1, description="Boundary points B")
    shell_min: Optional[float] = Field(
        None,
        gt=0,
        description="Inner radius of the collocation shell, `null` for the sphere radius",
    )
    shell_max: float = Field(0.15, gt=0, description="Outer collocation radius")
    reciprocal_coefficient: bool = Field(
        False,
        description="Use the literal (c/ω)² Helmholtz coefficient instead of k²",
    )
    log_every: int = Field(500, ge=1, description="Epochs between progress logs")


class SliceConfig(BaseModel):
    """Spherical field slice settings."""

    radius: float = Field(0.072, gt=0, description="Slice radius in meters")
    n_theta: int = Field(36, ge=2, description="Polar cells")
    n_phi: int = Field(72, ge=2, description="Azimuthal cells")


class EvaluationConfig(BaseModel):
    """Radius sweep and field slice settings."""

    radii: List[float] = Field(
        [0.042, 0.05, 0.06, 0.072, 0.08, 0.09, 0.1],
        min_items=1,
        description="Sweep radii in meters",
    )
    points_per_radius: int = Field(
        2000, ge=1, description="Fibonacci evaluation points per radius"
    )
    slice: SliceConfig = Field(SliceConfig(), description="Field slice settings")


class Settings(BaseSettings):
    """soundfield PINN run configuration"""

    seed: Optional[int] = Field(
        None,
        ge=0,
        le=MAX_SEED,
        description="The seed to use for random generators",
    )

    log: LoggingConfig = Field(
        LoggingConfig(),
        description="The logging configuration",
    )

    scene: ScatteringScene = Field(ScatteringScene(), description="Simulated scene")
    array: ArrayConfig = Field(ArrayConfig(), description="Microphone array")
    noise: NoiseConfig = Field(NoiseConfig(), description="Measurement noise")
    sh: ShConfig = Field(ShConfig(), description="Spherical harmonic estimator")
    pw: PwConfig = Field(PwConfig(), description="Plane wave estimator")
    pinn: PinnConfig = Field(PinnConfig(), description="PINN estimator")
    evaluation: EvaluationConfig = Field(
        EvaluationConfig(), description="Evaluation settings"
    )
    out: Path = Field(Path("out"), description="Output directory")

    class Config:
        env_prefix = "SOUNDFIELD_PINN_"

    @root_validator(skip_on_failure=True)
    def validate_geometry(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """Cross checks the radii of all sections against the scene."""
        scene: ScatteringScene = values["scene"]
        pinn: PinnConfig = values["pinn"]
        evaluation: EvaluationConfig = values["evaluation"]
        a = scene.a

        shell_min = pinn.shell_min if pinn.shell_min is not None else a
        assert shell_min >= a, "pinn.shell_min must not be inside the sphere"
        assert pinn.shell_max >= shell_min, "pinn.shell_max must be >= pinn.shell_min"
        for r in evaluation.radii:
            assert r >= a, f"evaluation radius {r} is inside the sphere (a={a})"
        assert evaluation.slice.radius >= a, "slice radius is inside the sphere"

        outer = max([pinn.shell_max, evaluation.slice.radius, *evaluation.radii])
        for i, source in enumerate(scene.sources):
            assert (
                source.radius > outer
            ), f"source {i} must lie outside every evaluated radius ({outer} m)"

        if values["sh"].quadrature == Quadrature.DESIGN:
            assert (
                values["array"].layout == ArrayLayout.PENTAKIS
            ), "design quadrature requires the pentakis layout"
        return values


def load_config_file(config_path: Path) -> Dict[Any, Any]:
    """Loads a given a config from the given path and returns a raw dictionary.

    Supported file formats are:
        - YAML
        - JSON (as YAML subset)

    Args:
        config_path: The file path to read the config from

    Returns:
        The contents of the configuration file converted to a dictionary or `{}`
        if the file is empty or does not exist.
    """
    yaml = YAML(typ="safe")
    if config_path.exists():
        return yaml.load(config_path) or {}
    return {}


def load_settings(
    settings_path: Path,
    log_level: Optional[LogLevel] = None,
    seed: Optional[int] = None,
    out: Optional[Path] = None,
    epochs: Optional[int] = None,
) -> Settings:
    """Loads the run configuration

    Args:
        settings_path: The path to load the settings file from
        log_level: The CLI log_level override.
        seed: The CLI seed override.
        out: The CLI output directory override.
        epochs: The CLI training epochs override.

    Raises:
        ConfigValidationError: If the config validation fails

    Returns:
        The validated settings object
    """
    try:
        settings_raw = load_config_file(settings_path)

        if log_level is not None:
            settings_raw.setdefault("log", {})["level"] = log_level

        if seed is not None:
            settings_raw["seed"] = seed

        if out is not None:
            settings_raw["out"] = out

        if epochs is not None:
            settings_raw.setdefault("pinn", {})["epochs"] = epochs

        return Settings(**settings_raw)
    except ValidationError as val_err:
        raise ConfigValidationError(val_err)


class Method(str, Enum):
    """Field estimators selectable on the command line"""

    SH = "sh"
    """Spherical harmonic extrapolation"""

    PL = "pl"
    """Free field plane wave decomposition"""

    PINN = "pinn"
    """Physics informed neural network"""


class SeedStream(IntEnum):
    """Independent random streams derived from the run seed"""

    NOISE = 0
    COLLOCATION = 1
    INIT = 2
    SWEEP = 3


def configure_seed(seed: Optional[int] = None) -> int:
    """Configure the run seed, if no seed is passed then one is generated.

    Args:
        seed: The seed to use for PRNG

    Returns:
        The configured seed
    """
    if seed is None:
        seed = random.randint(0, MAX_SEED)
    global _SEED
    _SEED = seed
    return seed


def get_seed() -> int:
    """Get the global random seed value for the run

    Returns:
        The seed value
    """
    global _SEED
    if _SEED is None:
        configure_seed()

    assert _SEED is not None
    return _SEED


def derive_seed(seed: int, stream: SeedStream) -> int:
    """Derive the seed of an independent random stream from the run seed.

    Args:
        seed: The run seed
        stream: The stream to derive

    Returns:
        A 64 bit seed for `numpy.random.default_rng`
    """
    sequence = np.random.SeedSequence(seed, spawn_key=(int(stream),))
    return int(sequence.generate_state(1, np.uint64)[0])
