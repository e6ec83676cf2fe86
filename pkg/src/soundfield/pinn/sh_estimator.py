# -*- coding: utf-8 -*-
"""Spherical harmonic estimator

Projects the pressures measured on the rigid sphere onto the spherical
harmonics up to a truncation order and extrapolates the field away from the
surface with the ratio of radial propagators `G_n(r)/G_n(a)`.
"""
import math

from dataclasses import dataclass
from typing import (
    List,
    Optional,
    Tuple,
)

import numpy as np

from numpy.typing import ArrayLike

from .errors import DomainError
from .field import Measurements
from .geom import cart_to_sph
from .logging import get_logger
from .specfun import (
    RADIUS_TOLERANCE,
    _check_order,
    radial_propagator_array,
    sph_harmonic_matrix,
)


__all__ = [
    "ShCoefficients",
    "mode_orders",
    "estimate_coeffs",
    "amplification",
    "reconstruct",
    "conditioning_report",
]

log = get_logger()


@dataclass(frozen=True)
class ShCoefficients:
    """Surface pressure coefficients `P_n^m(a)` up to order `order`."""

    order: int
    coeffs: np.ndarray
    k: float
    a: float

    def __post_init__(self):
        _check_order(self.order)
        coeffs = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if len(coeffs) != (self.order + 1) ** 2:
            raise DomainError(
                f"order {self.order} needs {(self.order + 1) ** 2} coefficients, got {len(coeffs)}"
            )
        if not (self.k > 0 and self.a > 0):
            raise DomainError("wavenumber and sphere radius must be positive")
        object.__setattr__(self, "coeffs", coeffs)

    def modes(self) -> List[Tuple[int, int]]:
        """The `(n, m)` pairs in coefficient order."""
        return [(n, m) for n in range(self.order + 1) for m in range(-n, n + 1)]


def mode_orders(order: int) -> np.ndarray:
    """The order `n` of every flat mode index up to `order`."""
    return np.repeat(np.arange(order + 1), 2 * np.arange(order + 1) + 1)


def estimate_coeffs(
    m: Measurements,
    order: int,
    a: float,
    k: float,
    weights: Optional[ArrayLike] = None,
) -> ShCoefficients:
    """Discrete spherical harmonic transform of surface measurements.

    `P_n^m = Σ_q w_q · P(a, Ω_q) · conj(Y_n^m(Ω_q))` with `w_q = 4π/Q` unless
    explicit quadrature weights are given.

    Args:
        m: Measurements taken on the sphere of radius `a`
        order: Truncation order N
        a: The sphere radius
        k: The wavenumber
        weights: Optional `(Q,)` quadrature weights

    Raises:
        DomainError: If a measurement position is off the sphere

    Returns:
        The estimated coefficients
    """
    _check_order(order)
    if len(m) == 0:
        raise DomainError("no measurements to transform")
    sph = cart_to_sph(m.positions)
    if np.any(np.abs(sph[:, 0] - a) > RADIUS_TOLERANCE * a):
        raise DomainError(f"measurement positions must lie on the sphere r={a}")

    if weights is None:
        w = np.full(len(m), 4.0 * math.pi / len(m))
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(w) != len(m):
            raise DomainError(f"got {len(w)} weights for {len(m)} measurements")

    if (order + 1) ** 2 > len(m):
        log.warning(
            "Truncation order exceeds the microphone count",
            order=order,
            modes=(order + 1) ** 2,
            mics=len(m),
        )

    harmonics = sph_harmonic_matrix(order, sph[:, 1], sph[:, 2])
    coeffs = np.conj(harmonics).T @ (w * m.pressures)
    log.debug("Estimated SH coefficients", order=order, mics=len(m))
    return ShCoefficients(order=order, coeffs=coeffs, k=k, a=a)


def amplification(order: int, r: ArrayLike, a: float, k: float) -> np.ndarray:
    """Propagator ratios `G_n(r)/G_n(a)` of shape `(order + 1,) + r.shape`.

    Radii within the surface tolerance of `a` get a ratio of exactly one.
    """
    radii = np.asarray(r, dtype=float)
    at_surface = np.abs(radii - a) <= RADIUS_TOLERANCE * a
    outer = radial_propagator_array(order, radii, a, k)
    surface = radial_propagator_array(order, a, a, k).reshape(
        (-1,) + (1,) * radii.ndim
    )
    return np.where(at_surface, 1.0 + 0.0j, outer / surface)


def reconstruct(c: ShCoefficients, p: ArrayLike) -> np.ndarray:
    """Extrapolates the field to spherical points `(r, theta, phi)` with `r >= a`.

    Raises:
        DomainError: If a point lies inside the sphere

    Returns:
        Complex pressures of shape `p.shape[:-1]`
    """
    points = np.asarray(p, dtype=float)
    flat = points.reshape(-1, 3)
    if np.any(flat[:, 0] < c.a * (1.0 - RADIUS_TOLERANCE)):
        raise DomainError(f"cannot extrapolate inside the sphere (a={c.a})")
    if len(flat) == 0:
        return np.zeros(points.shape[:-1], dtype=complex)

    ratio = amplification(c.order, flat[:, 0], c.a, c.k)
    harmonics = sph_harmonic_matrix(c.order, flat[:, 1], flat[:, 2])
    per_mode = ratio[mode_orders(c.order)].T
    values = (harmonics * per_mode) @ c.coeffs
    return values.reshape(points.shape[:-1])


def conditioning_report(c: ShCoefficients, r: float) -> List[Tuple[int, float]]:
    """Amplification `|G_n(r)/G_n(a)|` of every order at radius `r`.

    At low frequencies these grow roughly like `(n+1)/(2n+1) · (r/a)^n`, so
    noise in the high orders dominates extrapolations away from the sphere.
    """
    if r < c.a * (1.0 - RADIUS_TOLERANCE):
        raise DomainError(f"radius {r} lies inside the sphere (a={c.a})")
    factors = np.abs(amplification(c.order, r, c.a, c.k))
    report = [(n, float(factor)) for n, factor in enumerate(factors)]
    log.debug("SH conditioning", r=r, factors=factors)
    return report
