import math

from typing import (
    Sequence,
    Tuple,
)

import numpy as np

from soundfield.pinn.config import PinnConfig
from soundfield.pinn.field import (
    Measurements,
    simulate_measurements,
)
from soundfield.pinn.geom import (
    cart_to_sph,
    mic_array_layout,
)
from soundfield.pinn.model import (
    AdamConfig,
    MlpArch,
    PointSource,
    ScatteringScene,
)
from soundfield.pinn.specfun import sph_harmonic_matrix


def reference_scene() -> ScatteringScene:
    return ScatteringScene()


def single_source_scene(
    position: Tuple[float, float, float] = (0.4, 0.1, -0.2),
    amplitude: complex = 1.0,
    f: float = 1000.0,
) -> ScatteringScene:
    return ScatteringScene(
        f=f, sources=[PointSource(position=position, amplitude=amplitude)]
    )


def band_limited(order: int, coeffs: Sequence[complex], points: np.ndarray) -> np.ndarray:
    """`Σ c_nm Y_n^m` at Cartesian points."""
    sph = cart_to_sph(points)
    harmonics = sph_harmonic_matrix(order, sph[:, 1], sph[:, 2])
    return harmonics @ np.asarray(coeffs, dtype=complex)


def surface_measurements(scene: ScatteringScene) -> Measurements:
    return simulate_measurements(scene, mic_array_layout(scene.a))


def small_pinn_config(**updates) -> PinnConfig:
    values = dict(
        arch=MlpArch(),
        optimizer=AdamConfig(lr=1e-2),
        epochs=5,
        collocation_points=40,
        boundary_points=20,
        log_every=1000,
    )
    values.update(updates)
    return PinnConfig(**values)


def green_function(k: float, source: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Free field `exp(-ikd)/(4πd)`."""
    d = np.linalg.norm(points - source, axis=-1)
    return np.exp(-1j * k * d) / (4.0 * math.pi * d)
