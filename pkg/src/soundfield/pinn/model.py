import logging
import math

from enum import IntEnum
from typing import (
    Any,
    Dict,
    List,
    Tuple,
    Union,
)

import numpy as np

from pydantic import (
    BaseModel,
    Field,
    root_validator,
    validator,
)


__all__ = [
    "LogLevel",
    "ComplexValue",
    "PointSource",
    "ScatteringScene",
    "MlpArch",
    "LossWeights",
    "AdamConfig",
]


class LogLevel(IntEnum):
    CRITICAL = logging.CRITICAL
    ERROR = logging.ERROR
    WARNING = logging.WARNING
    INFO = logging.INFO
    DEBUG = logging.DEBUG
    NOTSET = logging.NOTSET

    @classmethod
    def lookup(cls):
        return {v: k for v, k in cls.__members__.items()}

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, val: Union[str, int, "LogLevel"]):
        """Parses and validates `LogLevel` input in either `str`, `int` or `Enum` encoding.

        Args:
            val: The encoded input log level

        Raises:
            ValueError: if the given input is not a valid log level

        Returns:
            LogLevel enum
        """
        # check enum input
        if isinstance(val, LogLevel):
            return val
        # check int LogLevel input
        if isinstance(val, int):
            if val in cls.lookup().values():
                return LogLevel(val)
            raise ValueError("invalid integer LogLevel")
        # check str LogLevel input
        try:
            return cls.lookup()[val.upper()]
        except KeyError as key_error:
            raise ValueError("invalid string LogLevel") from key_error


class ComplexValue(complex):
    """Complex number field type for configuration models.

    Accepts a plain number, a `[re, im]` pair, a `{re: ..., im: ...}` mapping
    or a Python complex literal string such as `"1+0.5j"`.
    """

    @classmethod
    def __get_validators__(cls):
        yield cls.validate

    @classmethod
    def validate(cls, val: Any) -> "ComplexValue":
        if isinstance(val, (int, float, complex)) and not isinstance(val, bool):
            value = complex(val)
        elif isinstance(val, (list, tuple)) and len(val) == 2:
            value = complex(float(val[0]), float(val[1]))
        elif isinstance(val, dict) and set(val) <= {"re", "im"}:
            value = complex(float(val.get("re", 0.0)), float(val.get("im", 0.0)))
        elif isinstance(val, str):
            try:
                value = complex(val.replace(" ", ""))
            except ValueError as parse_error:
                raise ValueError("invalid complex literal") from parse_error
        else:
            raise ValueError("expected a number, [re, im] or {re, im}")

        if not (math.isfinite(value.real) and math.isfinite(value.imag)):
            raise ValueError("complex value must be finite")
        return cls(value)


class PointSource(BaseModel):
    """An omnidirectional monopole outside the rigid sphere."""

    position: Tuple[float, float, float] = Field(
        description="Cartesian source position in meters"
    )
    amplitude: ComplexValue = Field(
        ComplexValue(1.0),
        description="Complex source strength (unit magnitude by default)",
    )

    @property
    def radius(self) -> float:
        """Distance of the source from the sphere center."""
        return float(np.linalg.norm(self.position))


class ScatteringScene(BaseModel):
    """A rigid sphere at the origin exposed to a set of point sources at one frequency."""

    a: float = Field(0.042, gt=0, description="Sphere radius in meters")
    c: float = Field(343.0, gt=0, description="Speed of sound in m/s")
    f: float = Field(1000.0, gt=0, description="Frequency in Hz")
    sources: List[PointSource] = Field(
        [
            PointSource(position=(2.5, 0.8, 0.0)),
            PointSource(position=(-2.0, -0.6, 1.2)),
        ],
        description="The point sources driving the field",
    )

    @property
    def k(self) -> float:
        """The wavenumber `2πf/c`."""
        return 2.0 * math.pi * self.f / self.c

    @property
    def omega(self) -> float:
        """The angular frequency."""
        return 2.0 * math.pi * self.f

    @root_validator(skip_on_failure=True)
    def validate_sources_outside(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """Every source has to lie strictly outside the sphere."""
        a = values["a"]
        for i, source in enumerate(values["sources"]):
            assert source.radius > a, f"source {i} is not outside the sphere (r={a})"
        return values


class MlpArch(BaseModel):
    """Shape of the fully connected network (tanh hidden layers, linear output)."""

    input_dim: int = Field(3, ge=1, description="Number of inputs (x, y, z)")
    hidden_layers: int = Field(
        3, ge=0, description="Number of hidden layers (0 for a linear map)"
    )
    hidden_width: int = Field(4, ge=1, description="Units per hidden layer")
    output_dim: int = Field(2, ge=1, description="Number of outputs (Re, Im)")
    input_scale: float = Field(
        1.0, gt=0, description="Factor applied to the coordinates before the first layer"
    )

    @validator("input_scale")
    def validate_input_scale_finite(cls, v: float) -> float:
        assert math.isfinite(v), "input scale must be finite"
        return v

    @property
    def layer_sizes(self) -> List[int]:
        """Sizes of all layers from input to output."""
        return (
            [self.input_dim]
            + [self.hidden_width] * self.hidden_layers
            + [self.output_dim]
        )

    @property
    def parameter_count(self) -> int:
        sizes = self.layer_sizes
        return sum((n_in + 1) * n_out for n_in, n_out in zip(sizes[:-1], sizes[1:]))

    def describe(self) -> str:
        """Single line description used as checkpoint header."""
        return (
            f"mlp input_dim={self.input_dim} hidden_layers={self.hidden_layers} "
            f"hidden_width={self.hidden_width} output_dim={self.output_dim} "
            f"input_scale={self.input_scale!r} activation=tanh"
        )


class LossWeights(BaseModel):
    """Weights of the data, PDE and boundary terms of the training loss."""

    lambda1: float = Field(1.0, ge=0, description="Data loss weight")
    lambda2: float = Field(ge=0, description="Helmholtz residual weight")
    lambda3: float = Field(ge=0, description="Boundary condition weight")

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3)


class AdamConfig(BaseModel):
    """Adam hyperparameters."""

    lr: float = Field(1e-5, gt=0, description="Learning rate")
    beta1: float = Field(0.9, ge=0, lt=1, description="First moment decay")
    beta2: float = Field(0.999, ge=0, lt=1, description="Second moment decay")
    eps: float = Field(1e-8, gt=0, description="Denominator offset")

    @validator("lr")
    def validate_lr_finite(cls, v: float) -> float:
        assert math.isfinite(v), "learning rate must be finite"
        return v
