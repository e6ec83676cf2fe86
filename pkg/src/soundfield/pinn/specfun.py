# -*- coding: utf-8 -*-
"""Special functions module

Spherical Bessel and Hankel functions, Legendre functions, complex spherical
harmonics and the rigid sphere radial propagator. Every function has an array
form evaluating all orders `0..n_max` at once (used by the simulator and the
estimators) and a scalar form.

Conventions: time dependence `exp(+iωt)`, so outgoing waves are described by
`h_n^(2) = j_n - i·y_n`. Spherical harmonics are orthonormal and carry the
Condon-Shortley phase.
"""
import math

import numpy as np

from numpy.typing import ArrayLike

from .errors import (
    DomainError,
    NumericalError,
)


__all__ = [
    "MAX_ORDER",
    "spherical_jn_array",
    "spherical_yn_array",
    "spherical_hn2_array",
    "spherical_jn_prime_array",
    "spherical_yn_prime_array",
    "spherical_hn2_prime_array",
    "legendre_p_array",
    "sph_harmonic_matrix",
    "radial_propagator_array",
    "radial_propagator_prime_array",
    "sph_bessel_j",
    "sph_bessel_y",
    "sph_hankel2",
    "sph_bessel_j_prime",
    "sph_bessel_y_prime",
    "sph_hankel2_prime",
    "legendre_p",
    "assoc_legendre_p",
    "sph_harmonic",
    "mode_index",
    "radial_propagator",
    "radial_propagator_prime",
]

MAX_ORDER = 60
"""Highest supported order of all special functions."""

SERIES_LIMIT = 1.0
"""Arguments below this use the power series of `j_n`."""

SERIES_TERMS = 20

RESCALE = 1e250

RADIUS_TOLERANCE = 1e-9
"""Relative tolerance for evaluation radii touching the sphere surface."""


def _check_order(n_max: int) -> None:
    if int(n_max) != n_max or n_max < 0:
        raise DomainError(f"order must be a non-negative integer, got {n_max}")
    if n_max > MAX_ORDER:
        raise DomainError(f"order {n_max} exceeds the maximum order {MAX_ORDER}")


def _as_argument(x: ArrayLike, positive: bool) -> np.ndarray:
    values = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(values)):
        raise DomainError("arguments must be finite")
    if positive and np.any(values <= 0):
        raise DomainError("arguments must be positive")
    if not positive and np.any(values < 0):
        raise DomainError("arguments must be non-negative")
    return values


def _ensure_finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"{what} is not finite for the given arguments")
    return values


def _jn_series(n_max: int, x: np.ndarray) -> np.ndarray:
    """Power series `j_n(x) = x^n/(2n+1)!! Σ_k (-x²/2)^k / (k! (2n+3)...(2n+2k+1))`."""
    out = np.empty((n_max + 1,) + x.shape)
    half_sq = -0.5 * x * x
    lead = np.ones_like(x)
    for n in range(n_max + 1):
        if n > 0:
            lead = lead * x / (2 * n + 1)
        term = np.ones_like(x)
        total = np.ones_like(x)
        for k in range(1, SERIES_TERMS):
            term = term * half_sq / (k * (2 * n + 2 * k + 1))
            total = total + term
        out[n] = lead * total
    return out


def _jn_closed(x: np.ndarray):
    sin = np.sin(x)
    cos = np.cos(x)
    j0 = sin / x
    j1 = sin / x ** 2 - cos / x
    j2 = (3.0 / x ** 2 - 1.0) * sin / x - 3.0 * cos / x ** 2
    return j0, j1, j2


def _jn_miller(n_max: int, x: np.ndarray, j0: np.ndarray, j1: np.ndarray) -> np.ndarray:
    """Downward recurrence normalized against the closed forms of `j_0`, `j_1`."""
    start = n_max + 20 + int(math.sqrt(40 * (n_max + 1)))
    out = np.zeros((n_max + 1,) + x.shape)
    upper = np.zeros_like(x)
    current = np.full_like(x, 1e-30)
    for n in range(start, 0, -1):
        lower = (2 * n + 1) / x * current - upper
        upper, current = current, lower
        if n - 1 <= n_max:
            out[n - 1] = current
        big = np.abs(current) > RESCALE
        if np.any(big):
            current[big] /= RESCALE
            upper[big] /= RESCALE
            out[:, big] /= RESCALE
    # normalize against whichever of j_0, j_1 is further from a zero
    use_zero = np.abs(out[0]) >= np.abs(out[1])
    scale = np.where(use_zero, j0, j1) / np.where(use_zero, out[0], out[1])
    return out * scale


def _jn_large(n_max: int, x: np.ndarray) -> np.ndarray:
    j0, j1, j2 = _jn_closed(x)
    out = np.empty((n_max + 1,) + x.shape)
    closed = [j0, j1, j2]
    for n in range(min(n_max, 2) + 1):
        out[n] = closed[n]
    if n_max <= 2:
        return out

    # upward recurrence is stable while n <= x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(3, n_max + 1):
            out[n] = (2 * n - 1) / x * out[n - 1] - out[n - 2]

    needs_miller = x < n_max
    if np.any(needs_miller):
        xm = x[needs_miller]
        miller = _jn_miller(n_max, xm, j0[needs_miller], j1[needs_miller])
        orders = np.arange(n_max + 1).reshape((-1, 1))
        upward = out[:, needs_miller]
        out[:, needs_miller] = np.where(
            (orders <= xm) | (orders <= 2), upward, miller
        )
    return out


def _jn_upto(n_top: int, x: np.ndarray) -> np.ndarray:
    out = np.empty((n_top + 1,) + x.shape)
    small = x < SERIES_LIMIT
    if np.any(small):
        out[:, small] = _jn_series(n_top, x[small])
    if np.any(~small):
        out[:, ~small] = _jn_large(n_top, x[~small])
    return _ensure_finite(out, "j_n")


def _yn_upto(n_top: int, x: np.ndarray) -> np.ndarray:
    out = np.empty((n_top + 1,) + x.shape)
    cos = np.cos(x)
    out[0] = -cos / x
    if n_top >= 1:
        out[1] = -cos / x ** 2 - np.sin(x) / x
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(2, n_top + 1):
            out[n] = (2 * n - 1) / x * out[n - 1] - out[n - 2]
    return _ensure_finite(out, "y_n")


def _derivative(f: np.ndarray, x: np.ndarray) -> np.ndarray:
    """`f'_n = f_{n-1} - (n+1)/x f_n` given the orders `0..n_max + 1` of `f`.

    The order zero case uses `f_0' = -f_1`, which equals the general rule with
    `j_{-1} = cos(x)/x` and `y_{-1} = sin(x)/x` without its cancellation.
    """
    n_max = f.shape[0] - 2
    out = np.empty((n_max + 1,) + x.shape, dtype=f.dtype)
    out[0] = -f[1]
    for n in range(1, n_max + 1):
        out[n] = f[n - 1] - (n + 1) / x * f[n]
    return out


def spherical_jn_array(n_max: int, x: ArrayLike) -> np.ndarray:
    """Spherical Bessel functions of the first kind of orders `0..n_max`.

    Uses the power series below `x = 1`, closed forms for `n <= 2`, upward
    recurrence while `n <= x` and Miller's downward recurrence above.

    Args:
        n_max: The highest order
        x: Non-negative arguments of any shape

    Raises:
        DomainError: For negative orders or arguments

    Returns:
        Array of shape `(n_max + 1,) + x.shape`
    """
    _check_order(n_max)
    return _jn_upto(n_max, _as_argument(x, positive=False))


def spherical_yn_array(n_max: int, x: ArrayLike) -> np.ndarray:
    """Spherical Bessel functions of the second kind of orders `0..n_max`.

    Computed by upward recurrence from `y_0 = -cos(x)/x` and
    `y_1 = -cos(x)/x² - sin(x)/x`.

    Raises:
        DomainError: For negative orders or non-positive arguments
        NumericalError: If the recurrence overflows (very small `x` and high orders)
    """
    _check_order(n_max)
    return _yn_upto(n_max, _as_argument(x, positive=True))


def spherical_hn2_array(n_max: int, x: ArrayLike) -> np.ndarray:
    """Spherical Hankel functions of the second kind `j_n - i·y_n`."""
    return spherical_jn_array(n_max, x) - 1j * spherical_yn_array(n_max, x)


def spherical_jn_prime_array(n_max: int, x: ArrayLike) -> np.ndarray:
    """Derivatives `j_n'(x)` of orders `0..n_max` for positive `x`."""
    _check_order(n_max)
    values = _as_argument(x, positive=True)
    return _derivative(_jn_upto(n_max + 1, values), values)


def spherical_yn_prime_array(n_max: int, x: ArrayLike) -> np.ndarray:
    """Derivatives `y_n'(x)` of orders `0..n_max` for positive `x`."""
    _check_order(n_max)
    values = _as_argument(x, positive=True)
    return _derivative(_yn_upto(n_max + 1, values), values)


def spherical_hn2_prime_array(n_max: int, x: ArrayLike) -> np.ndarray:
    """Derivatives of the spherical Hankel functions of the second kind."""
    return spherical_jn_prime_array(n_max, x) - 1j * spherical_yn_prime_array(
        n_max, x
    )


def legendre_p_array(n_max: int, t: ArrayLike) -> np.ndarray:
    """Legendre polynomials `P_0..P_{n_max}` by the three-term recurrence.

    Raises:
        DomainError: If any `|t| > 1`
    """
    _check_order(n_max)
    values = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(np.abs(values) > 1.0 + 1e-12):
        raise DomainError("Legendre arguments must lie in [-1, 1]")
    values = np.clip(values, -1.0, 1.0)
    out = np.empty((n_max + 1,) + values.shape)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = values
    for n in range(1, n_max):
        out[n + 1] = ((2 * n + 1) * values * out[n] - n * out[n - 1]) / (n + 1)
    return out


def mode_index(n: int, m: int) -> int:
    """Flat position of mode `(n, m)` in coefficient vectors: `n² + n + m`."""
    return n * n + n + m


def _normalized_legendre(n_max: int, t: np.ndarray) -> np.ndarray:
    """Orthonormalized associated Legendre functions for `m >= 0`.

    Returns an array `P[n, m]` of shape `(n_max + 1, n_max + 1) + t.shape`
    such that `Y_n^m = P[n, m] · exp(imφ)`, Condon-Shortley phase included.
    """
    s = np.sqrt(np.clip(1.0 - t * t, 0.0, None))
    out = np.zeros((n_max + 1, n_max + 1) + t.shape)
    out[0, 0] = math.sqrt(1.0 / (4.0 * math.pi))
    for m in range(1, n_max + 1):
        out[m, m] = -math.sqrt((2 * m + 1) / (2.0 * m)) * s * out[m - 1, m - 1]
    for m in range(0, n_max):
        out[m + 1, m] = math.sqrt(2 * m + 3) * t * out[m, m]
    for m in range(0, n_max + 1):
        for n in range(m + 2, n_max + 1):
            a_nm = math.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            b_nm = math.sqrt(((n - 1.0) ** 2 - m * m) / (4.0 * (n - 1.0) ** 2 - 1.0))
            out[n, m] = a_nm * (t * out[n - 1, m] - b_nm * out[n - 2, m])
    return out


def sph_harmonic_matrix(order: int, theta: ArrayLike, phi: ArrayLike) -> np.ndarray:
    """All spherical harmonics up to `order` at the given directions.

    Args:
        order: The truncation order N
        theta: Polar angles in radians (`0 <= theta <= π`)
        phi: Azimuth angles in radians

    Returns:
        Complex array of shape `theta.shape + ((N+1)²,)`, mode `(n, m)` at
        position [`mode_index(n, m)`][soundfield.pinn.specfun.mode_index].
    """
    _check_order(order)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(theta < -1e-12) or np.any(theta > math.pi + 1e-12):
        raise DomainError("polar angle must lie in [0, π]")
    theta, phi = np.broadcast_arrays(theta, phi)
    legendre = _normalized_legendre(order, np.cos(theta))
    out = np.empty(theta.shape + ((order + 1) ** 2,), dtype=complex)
    for m in range(0, order + 1):
        phase = np.exp(1j * m * phi)
        sign = -1.0 if m % 2 else 1.0
        for n in range(m, order + 1):
            value = legendre[n, m] * phase
            out[..., mode_index(n, m)] = value
            if m > 0:
                out[..., mode_index(n, -m)] = sign * np.conj(value)
    return out


def _propagator_parts(n_max: int, a: float, k: float, scattering: bool):
    if a <= 0 or k <= 0:
        raise DomainError("sphere radius and wavenumber must be positive")
    if not scattering:
        return np.zeros(n_max + 1, dtype=complex)
    ka = k * a
    return spherical_jn_prime_array(n_max, ka) / spherical_hn2_prime_array(n_max, ka)


def _check_radius(r: np.ndarray, a: float) -> None:
    if np.any(r < a * (1.0 - RADIUS_TOLERANCE)):
        raise DomainError(f"evaluation radius inside the rigid sphere (a={a})")


def radial_propagator_array(
    n_max: int, r: ArrayLike, a: float, k: float, scattering: bool = True
) -> np.ndarray:
    """Rigid sphere radial propagators `G_0..G_{n_max}`.

    `G_n(r) = j_n(kr) - j_n'(ka)/h_n^(2)'(ka) · h_n^(2)(kr)`

    Args:
        n_max: The highest order
        r: Radii `>= a` of any shape
        a: The sphere radius
        k: The wavenumber
        scattering: Set to `False` to drop the scattered part (free field)

    Returns:
        Complex array of shape `(n_max + 1,) + r.shape`
    """
    _check_order(n_max)
    radii = _as_argument(r, positive=True)
    _check_radius(radii, a)
    ratio = _propagator_parts(n_max, a, k, scattering)
    ratio = ratio.reshape((-1,) + (1,) * radii.ndim)
    kr = k * radii
    incident = spherical_jn_array(n_max, kr)
    if not scattering:
        return incident.astype(complex)
    return _ensure_finite(incident - ratio * spherical_hn2_array(n_max, kr), "G_n")


def radial_propagator_prime_array(
    n_max: int, r: ArrayLike, a: float, k: float, scattering: bool = True
) -> np.ndarray:
    """Radial derivatives `∂G_n/∂r` of orders `0..n_max`."""
    _check_order(n_max)
    radii = _as_argument(r, positive=True)
    _check_radius(radii, a)
    ratio = _propagator_parts(n_max, a, k, scattering)
    ratio = ratio.reshape((-1,) + (1,) * radii.ndim)
    kr = k * radii
    incident = spherical_jn_prime_array(n_max, kr)
    if not scattering:
        return (k * incident).astype(complex)
    return _ensure_finite(
        k * (incident - ratio * spherical_hn2_prime_array(n_max, kr)), "G_n'"
    )


def _scalar_order(n: int) -> int:
    _check_order(n)
    return int(n)


def sph_bessel_j(n: int, x: float) -> float:
    """Spherical Bessel function of the first kind `j_n(x)`, `x >= 0`."""
    return float(spherical_jn_array(_scalar_order(n), x)[n])


def sph_bessel_y(n: int, x: float) -> float:
    """Spherical Bessel function of the second kind `y_n(x)`, `x > 0`."""
    return float(spherical_yn_array(_scalar_order(n), x)[n])


def sph_hankel2(n: int, x: float) -> complex:
    """Spherical Hankel function of the second kind `h_n^(2)(x)`, `x > 0`."""
    return complex(spherical_hn2_array(_scalar_order(n), x)[n])


def sph_bessel_j_prime(n: int, x: float) -> float:
    return float(spherical_jn_prime_array(_scalar_order(n), x)[n])


def sph_bessel_y_prime(n: int, x: float) -> float:
    return float(spherical_yn_prime_array(_scalar_order(n), x)[n])


def sph_hankel2_prime(n: int, x: float) -> complex:
    return complex(spherical_hn2_prime_array(_scalar_order(n), x)[n])


def legendre_p(n: int, t: float) -> float:
    """Legendre polynomial `P_n(t)` for `-1 <= t <= 1`."""
    return float(legendre_p_array(_scalar_order(n), t)[n])


def assoc_legendre_p(n: int, m: int, t: float) -> float:
    """Associated Legendre function `P_n^m(t)` with Condon-Shortley phase, `m >= 0`."""
    _check_order(n)
    if m < 0 or m > n:
        raise DomainError(f"degree must satisfy 0 <= m <= n, got n={n} m={m}")
    if abs(t) > 1.0 + 1e-12:
        raise DomainError("Legendre arguments must lie in [-1, 1]")
    t = min(1.0, max(-1.0, t))
    normalized = _normalized_legendre(n, np.asarray(t))[n, m]
    log_norm = 0.5 * (
        math.log((2 * n + 1) / (4.0 * math.pi))
        + math.lgamma(n - m + 1)
        - math.lgamma(n + m + 1)
    )
    return float(normalized / math.exp(log_norm))


def sph_harmonic(n: int, m: int, theta: float, phi: float) -> complex:
    """Orthonormal complex spherical harmonic `Y_n^m(θ, φ)`.

    Raises:
        DomainError: If `|m| > n` or the polar angle is outside `[0, π]`
    """
    _check_order(n)
    if abs(m) > n:
        raise DomainError(f"degree must satisfy |m| <= n, got n={n} m={m}")
    return complex(sph_harmonic_matrix(n, theta, phi)[mode_index(n, m)])


def radial_propagator(
    n: int, r: float, a: float, k: float, scattering: bool = True
) -> complex:
    """Rigid sphere radial propagator `G_n(r, a, k)`."""
    return complex(radial_propagator_array(_scalar_order(n), r, a, k, scattering)[n])


def radial_propagator_prime(
    n: int, r: float, a: float, k: float, scattering: bool = True
) -> complex:
    """Radial derivative of the rigid sphere propagator."""
    return complex(
        radial_propagator_prime_array(_scalar_order(n), r, a, k, scattering)[n]
    )
