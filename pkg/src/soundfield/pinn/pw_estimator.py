# -*- coding: utf-8 -*-
"""Plane wave decomposition estimator

Plane wave amplitudes are fitted to the rigid sphere measurements with a
Tikhonov regularized least squares solve and the field is then rebuilt as a
free field superposition of the plane waves, ignoring the scatterer.
"""
import math

from dataclasses import dataclass
from typing import Optional

import numpy as np

from numpy.typing import ArrayLike

from .errors import (
    DomainError,
    NumericalError,
)
from .field import Measurements
from .logging import get_logger
from .specfun import (
    MAX_ORDER,
    RADIUS_TOLERANCE,
    _check_order,
    legendre_p_array,
    radial_propagator_array,
)


__all__ = [
    "PwModel",
    "default_order",
    "steering_matrix",
    "solve_amplitudes",
    "reconstruct_pw",
]

log = get_logger()

UNIT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PwModel:
    """Fitted plane wave dictionary.

    Attributes:
        directions: `(L, 3)` unit arrival directions
        amplitudes: `(L,)` complex amplitudes
        k: The wavenumber
        reg: Tikhonov parameter relative to the largest singular value
        residual: Fit residual `‖H·w - p‖`
        condition: Condition number of the steering matrix
    """

    directions: np.ndarray
    amplitudes: np.ndarray
    k: float
    reg: float
    residual: float = 0.0
    condition: float = 1.0

    def __post_init__(self):
        directions = _unit_directions(self.directions)
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if len(directions) != len(amplitudes):
            raise DomainError(
                f"got {len(directions)} directions but {len(amplitudes)} amplitudes"
            )
        object.__setattr__(self, "directions", directions)
        object.__setattr__(self, "amplitudes", amplitudes)


def _unit_directions(directions: ArrayLike) -> np.ndarray:
    d = np.asarray(directions, dtype=float).reshape(-1, 3)
    if np.any(np.abs(np.linalg.norm(d, axis=1) - 1.0) > UNIT_TOLERANCE):
        raise DomainError("plane wave directions must be unit vectors")
    return d


def default_order(k: float, a: float) -> int:
    """Modal order used for the rigid sphere response: `ceil(ka) + 10`."""
    return min(MAX_ORDER, math.ceil(k * a) + 10)


def steering_matrix(
    directions: ArrayLike,
    mic_positions: ArrayLike,
    k: float,
    a: float,
    order: Optional[int] = None,
    scattering: bool = True,
) -> np.ndarray:
    """Rigid sphere pressure at each microphone due to each unit plane wave.

    `H[q, l] = Σ_n i^n (2n+1) G_n(a, a, k) P_n(cos Θ_ql)` where `Θ_ql` is the
    angle between microphone `q` and arrival direction `l`.

    Raises:
        DomainError: If a microphone is off the sphere or the order is too low

    Returns:
        Complex `(Q, L)` matrix
    """
    d = _unit_directions(directions)
    mics = np.asarray(mic_positions, dtype=float).reshape(-1, 3)
    if len(d) == 0 or len(mics) == 0:
        raise DomainError("need at least one direction and one microphone")
    radii = np.linalg.norm(mics, axis=1)
    if np.any(np.abs(radii - a) > RADIUS_TOLERANCE * a):
        raise DomainError(f"microphones must lie on the sphere r={a}")

    if order is None:
        order = default_order(k, a)
    _check_order(order)
    if order < math.ceil(k * a) + 2:
        raise DomainError(f"order {order} is below ceil(ka) + 2 for ka={k * a}")

    n = np.arange(order + 1)
    modal = (1j ** n) * (2 * n + 1) * radial_propagator_array(order, a, a, k, scattering)
    cos_angle = np.clip((mics / radii[:, None]) @ d.T, -1.0, 1.0)
    return np.einsum("n,nql->ql", modal, legendre_p_array(order, cos_angle))


def solve_amplitudes(
    m: Measurements,
    directions: ArrayLike,
    k: float,
    a: float,
    reg: float = 1e-3,
    order: Optional[int] = None,
) -> PwModel:
    """Fits plane wave amplitudes to the measurements.

    Minimizes `‖H·w - p‖² + (reg·σ_max)²·‖w‖²` through the SVD of the steering
    matrix, so the regularization follows the scale of the system.

    Raises:
        NumericalError: If the system is singular and `reg` is zero
    """
    if reg < 0:
        raise DomainError(f"regularization must not be negative, got {reg}")
    steering = steering_matrix(directions, m.positions, k, a, order)
    u, s, vh = np.linalg.svd(steering, full_matrices=False)
    if not np.all(np.isfinite(s)) or s[0] == 0.0:
        raise NumericalError("steering matrix has no usable singular values")

    rank_tol = s[0] * max(steering.shape) * np.finfo(float).eps
    if reg == 0.0 and (steering.shape[1] > steering.shape[0] or s[-1] <= rank_tol):
        raise NumericalError(
            "singular plane wave system, use a positive regularization"
        )

    lam = reg * s[0]
    filtered = s / (s * s + lam * lam)
    amplitudes = vh.conj().T @ (filtered * (u.conj().T @ m.pressures))
    residual = float(np.linalg.norm(steering @ amplitudes - m.pressures))
    condition = float(s[0] / s[-1]) if s[-1] > 0 else math.inf

    log.debug(
        "Solved plane wave amplitudes",
        directions=steering.shape[1],
        reg=reg,
        residual=residual,
        condition=condition,
    )
    return PwModel(
        directions=directions,
        amplitudes=amplitudes,
        k=k,
        reg=reg,
        residual=residual,
        condition=condition,
    )


def reconstruct_pw(model: PwModel, p: ArrayLike) -> np.ndarray:
    """Free field plane wave superposition `Σ_l w_l · exp(i k p·d_l)` at Cartesian points."""
    points = np.asarray(p, dtype=float)
    phases = np.exp(1j * model.k * (points.reshape(-1, 3) @ model.directions.T))
    return (phases @ model.amplitudes).reshape(points.shape[:-1])
