# -*- coding: utf-8 -*-
"""Estimator evaluation

Common handles over the ground truth and the three estimators, the pressure
error and NMSE metrics, radius sweeps and spherical field slices.
"""
import math

from abc import (
    ABC,
    abstractmethod,
)
from dataclasses import dataclass
from typing import (
    ClassVar,
    Dict,
    List,
    Mapping,
    Optional,
    Sequence,
)

import numpy as np

from numpy.typing import ArrayLike

from .errors import DomainError
from .field import scene_pressure
from .geom import (
    cart_to_sph,
    fibonacci_sphere,
    random_rotation,
    sph_to_cart,
    sphere_grid,
)
from .logging import get_logger
from .model import ScatteringScene
from .nn import (
    MlpParams,
    forward,
)
from .pw_estimator import (
    PwModel,
    reconstruct_pw,
)
from .sh_estimator import (
    ShCoefficients,
    reconstruct,
)
from .specfun import RADIUS_TOLERANCE


__all__ = [
    "NMSE_FLOOR_DB",
    "FieldEstimator",
    "GroundTruth",
    "ShEstimator",
    "PwEstimator",
    "PinnEstimator",
    "ScaledEstimator",
    "SweepTable",
    "FieldSlice",
    "error_map",
    "nmse_db",
    "nmse",
    "radius_sweep",
    "field_slice",
]

log = get_logger()

NMSE_FLOOR_DB = -300.0


class FieldEstimator(ABC):
    """Anything that predicts the complex pressure at Cartesian points."""

    kind: ClassVar[str]

    @property
    def min_radius(self) -> float:
        """Smallest radius the estimator can be evaluated at."""
        return 0.0

    @abstractmethod
    def pressure(self, points: np.ndarray) -> np.ndarray:
        """Complex pressures at `(P, 3)` Cartesian points."""


class GroundTruth(FieldEstimator):
    """The simulated field, divided by the measurement normalization scale."""

    kind = "truth"

    def __init__(self, scene: ScatteringScene, scale: float = 1.0):
        if not scale > 0:
            raise DomainError(f"scale must be positive, got {scale}")
        self.scene = scene
        self.scale = scale

    @property
    def min_radius(self) -> float:
        return self.scene.a

    def pressure(self, points: np.ndarray) -> np.ndarray:
        return scene_pressure(self.scene, points) / self.scale


class ShEstimator(FieldEstimator):
    kind = "sh"

    def __init__(self, coeffs: ShCoefficients):
        self.coeffs = coeffs

    @property
    def min_radius(self) -> float:
        return self.coeffs.a

    def pressure(self, points: np.ndarray) -> np.ndarray:
        return reconstruct(self.coeffs, cart_to_sph(points))


class PwEstimator(FieldEstimator):
    kind = "pl"

    def __init__(self, model: PwModel):
        self.model = model

    def pressure(self, points: np.ndarray) -> np.ndarray:
        return reconstruct_pw(self.model, points)


class PinnEstimator(FieldEstimator):
    """The trained network, its two outputs read as real and imaginary part."""

    kind = "pinn"

    def __init__(self, params: MlpParams):
        self.params = params

    def pressure(self, points: np.ndarray) -> np.ndarray:
        out = forward(self.params, points)
        return out[..., 0] + 1j * out[..., 1]


class ScaledEstimator(FieldEstimator):
    """Another estimator multiplied by a complex constant."""

    kind = "scaled"

    def __init__(self, base: FieldEstimator, factor: complex):
        self.base = base
        self.factor = factor

    @property
    def min_radius(self) -> float:
        return self.base.min_radius

    def pressure(self, points: np.ndarray) -> np.ndarray:
        return self.factor * self.base.pressure(points)


def _cart_points(points: ArrayLike) -> np.ndarray:
    cart = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(cart) == 0:
        raise DomainError("need at least one evaluation point")
    return cart


def error_map(
    truth: FieldEstimator, est: FieldEstimator, points: ArrayLike
) -> np.ndarray:
    """Pointwise pressure error `|P(x) - P̂(x)|`."""
    cart = _cart_points(points)
    return np.abs(truth.pressure(cart) - est.pressure(cart))


def nmse_db(reference: np.ndarray, estimate: np.ndarray) -> float:
    """`10·log10(Σ|P - P̂|² / Σ|P|²)`, floored at `NMSE_FLOOR_DB`."""
    energy = float(np.sum(np.abs(reference) ** 2))
    if energy == 0.0:
        raise DomainError("the reference field is zero everywhere")
    ratio = float(np.sum(np.abs(reference - estimate) ** 2)) / energy
    if ratio == 0.0:
        return NMSE_FLOOR_DB
    return max(10.0 * math.log10(ratio), NMSE_FLOOR_DB)


def nmse(truth: FieldEstimator, est: FieldEstimator, points: ArrayLike) -> float:
    """Normalized mean squared error of `est` against `truth` in dB.

    Raises:
        DomainError: If the truth vanishes at every point
    """
    cart = _cart_points(points)
    return nmse_db(truth.pressure(cart), est.pressure(cart))


@dataclass(frozen=True)
class SweepTable:
    """NMSE in dB per radius (rows) and estimator (columns)."""

    radii: np.ndarray
    columns: Dict[str, np.ndarray]

    def rows(self) -> List[List[float]]:
        names = list(self.columns)
        return [
            [float(r)] + [float(self.columns[name][i]) for name in names]
            for i, r in enumerate(self.radii)
        ]


def radius_sweep(
    truth: FieldEstimator,
    estimators: Mapping[str, FieldEstimator],
    radii: Sequence[float],
    points_per_radius: int,
    seed: Optional[int] = None,
) -> SweepTable:
    """NMSE of every estimator on the spheres of the given radii.

    Each sphere is sampled with a Fibonacci lattice, rotated by
    `random_rotation(seed)` (no rotation for `seed=None`).

    Raises:
        DomainError: If a radius is smaller than an estimator's minimum radius
    """
    limit = max([truth.min_radius] + [e.min_radius for e in estimators.values()])
    for r in radii:
        if r < limit * (1.0 - RADIUS_TOLERANCE):
            raise DomainError(f"sweep radius {r} lies inside the sphere (a={limit})")

    rotation = random_rotation(seed)
    columns: Dict[str, List[float]] = {name: [] for name in estimators}
    for r in radii:
        points = fibonacci_sphere(points_per_radius, r) @ rotation.T
        reference = truth.pressure(points)
        for name, estimator in estimators.items():
            columns[name].append(nmse_db(reference, estimator.pressure(points)))
        log.info(
            "Evaluated radius",
            radius=r,
            **{name: values[-1] for name, values in columns.items()},
        )
    return SweepTable(
        radii=np.asarray(radii, dtype=float),
        columns={name: np.asarray(values) for name, values in columns.items()},
    )


@dataclass(frozen=True)
class FieldSlice:
    """Estimated field and its error on a `(theta, phi)` grid at one radius."""

    r: float
    n_theta: int
    n_phi: int
    theta: np.ndarray
    phi: np.ndarray
    values: np.ndarray
    error: np.ndarray


def field_slice(
    estimator: FieldEstimator,
    truth: FieldEstimator,
    r: float,
    n_theta: int,
    n_phi: int,
) -> FieldSlice:
    """Evaluates `estimator` on a theta-major [`sphere_grid`][soundfield.pinn.geom.sphere_grid]."""
    limit = max(truth.min_radius, estimator.min_radius)
    if r < limit * (1.0 - RADIUS_TOLERANCE):
        raise DomainError(f"slice radius {r} lies inside the sphere (a={limit})")
    grid = sphere_grid(r, n_theta, n_phi)
    points = sph_to_cart(grid)
    values = estimator.pressure(points)
    error = np.abs(truth.pressure(points) - values)
    return FieldSlice(
        r=r,
        n_theta=n_theta,
        n_phi=n_phi,
        theta=grid[:, 1],
        phi=grid[:, 2],
        values=values,
        error=error,
    )
