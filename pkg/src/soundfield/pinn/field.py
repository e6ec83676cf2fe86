# -*- coding: utf-8 -*-
"""Ground truth simulator

Complex pressure around a rigid sphere due to point sources, plus the
measurement noise and normalization applied to the simulated microphone
signals.
"""
import math

from dataclasses import (
    dataclass,
    replace,
)
from typing import Optional

import numpy as np

from numpy.typing import ArrayLike

from .errors import DomainError
from .logging import get_logger
from .model import (
    PointSource,
    ScatteringScene,
)
from .specfun import (
    MAX_ORDER,
    RADIUS_TOLERANCE,
    legendre_p_array,
    radial_propagator_array,
    spherical_hn2_array,
)


__all__ = [
    "Measurements",
    "point_source_pressure",
    "scene_pressure",
    "simulate_measurements",
    "add_noise",
    "normalize",
    "radial_derivative",
]

log = get_logger()

TRUNCATION_TOLERANCE = 1e-12
TRUNCATION_RUN = 3


@dataclass(frozen=True)
class Measurements:
    """Complex pressures observed at a set of positions.

    Attributes:
        positions: `(Q, 3)` Cartesian microphone positions
        pressures: `(Q,)` complex pressures
        scale: Factor the pressures have been divided by
        snr_db: Signal to noise ratio of the added noise, `None` if noiseless
    """

    positions: np.ndarray
    pressures: np.ndarray
    scale: float = 1.0
    snr_db: Optional[float] = None

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        pressures = np.asarray(self.pressures, dtype=complex).reshape(-1)
        if len(positions) != len(pressures):
            raise DomainError(
                f"got {len(positions)} positions but {len(pressures)} pressures"
            )
        if not self.scale > 0:
            raise DomainError(f"scale must be positive, got {self.scale}")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "pressures", pressures)

    def __len__(self) -> int:
        return len(self.pressures)


def _truncated_sum(terms: np.ndarray) -> np.ndarray:
    """Sums order terms until three consecutive ones are negligible.

    Args:
        terms: `(orders, P)` series terms

    Returns:
        `(P,)` partial sums truncated per point
    """
    partial = np.cumsum(terms, axis=0)
    magnitude = np.abs(partial)
    negligible = np.abs(terms) <= TRUNCATION_TOLERANCE * np.where(
        magnitude > 0, magnitude, np.inf
    )
    negligible |= (terms == 0) & (magnitude == 0)
    run = negligible[2:] & negligible[1:-1] & negligible[:-2]
    found = run.any(axis=0)
    last = np.where(found, run.argmax(axis=0) + TRUNCATION_RUN - 1, terms.shape[0] - 1)
    return partial[last, np.arange(terms.shape[1])]


def _check_observations(scene: ScatteringScene, obs: ArrayLike) -> np.ndarray:
    points = np.asarray(obs, dtype=float)
    if points.shape[-1] != 3:
        raise DomainError("observation points need three coordinates")
    if not np.all(np.isfinite(points)):
        raise DomainError("observation points must be finite")
    radii = np.linalg.norm(points, axis=-1)
    if np.any(radii < scene.a * (1.0 - RADIUS_TOLERANCE)):
        raise DomainError(f"observation point inside the rigid sphere (a={scene.a})")
    return points


def _source_pressure(
    scene: ScatteringScene,
    source: PointSource,
    points: np.ndarray,
    scattering: bool,
) -> np.ndarray:
    flat = points.reshape(-1, 3)
    if len(flat) == 0:
        return np.zeros(points.shape[:-1], dtype=complex)

    position = np.asarray(source.position, dtype=float)
    r_s = float(np.linalg.norm(position))
    r = np.linalg.norm(flat, axis=-1)
    if np.any(r >= r_s):
        raise DomainError(
            f"source at r={r_s} is not outside the observation radius {r.max()}"
        )

    k = scene.k
    orders = np.arange(MAX_ORDER + 1).reshape((-1, 1))
    cos_angle = np.clip(flat @ position / (r * r_s), -1.0, 1.0)
    propagator = radial_propagator_array(MAX_ORDER, r, scene.a, k, scattering)
    outgoing = spherical_hn2_array(MAX_ORDER, k * r_s).reshape((-1, 1))
    legendre = legendre_p_array(MAX_ORDER, cos_angle)

    terms = (2 * orders + 1) * propagator * outgoing * legendre
    series = _truncated_sum(terms)
    pressure = complex(source.amplitude) * (-1j * k / (4.0 * math.pi)) * series
    return pressure.reshape(points.shape[:-1])


def point_source_pressure(
    scene: ScatteringScene,
    source_index: int,
    obs: ArrayLike,
    scattering: bool = True,
) -> np.ndarray:
    """Pressure due to a single source of the scene.

    `P = A · (-ik/4π) · Σ_n (2n+1) G_n(r) h_n^(2)(k r_s) P_n(cos Θ)` with the
    series truncated once three consecutive terms fall below `1e-12` of the
    partial sum (at most order 60).

    Args:
        scene: The simulated scene
        source_index: Index into `scene.sources`
        obs: Observation points `(..., 3)` with `r >= a`
        scattering: Set to `False` for the free field Green's function

    Raises:
        DomainError: If a point lies inside the sphere or not inside the source radius

    Returns:
        Complex pressures of shape `obs.shape[:-1]`
    """
    if not 0 <= source_index < len(scene.sources):
        raise DomainError(f"scene has no source {source_index}")
    points = _check_observations(scene, obs)
    return _source_pressure(scene, scene.sources[source_index], points, scattering)


def scene_pressure(
    scene: ScatteringScene, obs: ArrayLike, scattering: bool = True
) -> np.ndarray:
    """Superposition of the pressures of all sources of the scene."""
    points = _check_observations(scene, obs)
    total = np.zeros(points.shape[:-1], dtype=complex)
    for source in scene.sources:
        total = total + _source_pressure(scene, source, points, scattering)
    return total


def simulate_measurements(scene: ScatteringScene, positions: ArrayLike) -> Measurements:
    """Noiseless, unnormalized measurements of the scene at the given positions."""
    pressures = scene_pressure(scene, positions)
    log.debug(
        "Simulated measurements",
        count=len(pressures),
        k=scene.k,
        sources=len(scene.sources),
    )
    return Measurements(positions=np.asarray(positions), pressures=pressures)


def add_noise(m: Measurements, snr_db: Optional[float], seed: int) -> Measurements:
    """Adds circularly symmetric complex white Gaussian noise.

    The noise power is the mean signal power over all microphones times
    `10^(-snr_db/10)`. `snr_db=None` or `+inf` leaves the pressures unchanged.

    Raises:
        DomainError: For empty measurements or an SNR of `-inf` or NaN
    """
    if len(m) == 0:
        raise DomainError("cannot add noise to empty measurements")
    if snr_db is None or snr_db == math.inf:
        return replace(m, snr_db=None)
    if not math.isfinite(snr_db):
        raise DomainError(f"SNR must be finite or +inf, got {snr_db}")

    signal_power = float(np.mean(np.abs(m.pressures) ** 2))
    noise_power = signal_power * 10.0 ** (-snr_db / 10.0)
    rng = np.random.default_rng(seed)
    samples = rng.standard_normal((len(m), 2))
    noise = math.sqrt(noise_power / 2.0) * (samples[:, 0] + 1j * samples[:, 1])
    log.debug("Added measurement noise", snr_db=snr_db, noise_power=noise_power)
    return replace(m, pressures=m.pressures + noise, snr_db=snr_db)


def normalize(m: Measurements) -> Measurements:
    """Scales the pressures so that every real and imaginary part lies in `[-1, 1]`.

    The pressures are divided by the largest absolute real or imaginary
    component, the divisor is accumulated into `scale`.

    Raises:
        DomainError: For empty or all-zero measurements
    """
    if len(m) == 0:
        raise DomainError("cannot normalize empty measurements")
    peak = float(
        max(np.max(np.abs(m.pressures.real)), np.max(np.abs(m.pressures.imag)))
    )
    if peak == 0.0:
        raise DomainError("cannot normalize all-zero measurements")
    # componentwise, complex division by a real peak is not exact in numpy
    pressures = m.pressures.real / peak + 1j * (m.pressures.imag / peak)
    return replace(m, pressures=pressures, scale=m.scale * peak)


# fourth order forward difference weights for f'(0) on 0, h, ..., 4h
FORWARD_STENCIL = np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0


def radial_derivative(
    scene: ScatteringScene, obs: ArrayLike, h: float = 1e-4
) -> np.ndarray:
    """Outward radial derivative `∂P/∂r` of the scene pressure.

    Uses a fourth order one-sided difference along the outward radial
    direction so that points on the sphere surface only sample the exterior.
    """
    points = _check_observations(scene, obs)
    radii = np.linalg.norm(points, axis=-1, keepdims=True)
    if np.any(radii == 0):
        raise DomainError("radial direction undefined at the origin")
    outward = points / radii
    total = np.zeros(points.shape[:-1], dtype=complex)
    for step, weight in enumerate(FORWARD_STENCIL):
        total = total + weight * scene_pressure(scene, points + step * h * outward)
    return total / h
