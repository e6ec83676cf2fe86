# -*- coding: utf-8 -*-
"""Geometry module

Coordinate conversions and every point set used by the simulator, the
estimators and the evaluation: the microphone layout, boundary and collocation
points and evaluation grids.

Point sets are `(N, 3)` float arrays. Cartesian arrays hold `(x, y, z)` in
meters, spherical arrays hold `(r, theta, phi)` with `theta ∈ [0, π]` and
`phi ∈ [0, 2π)`.
"""
import math

from typing import (
    Optional,
    Tuple,
)

import numpy as np

from numpy.typing import ArrayLike

from .errors import DomainError


__all__ = [
    "GOLDEN_ANGLE",
    "sph_to_cart",
    "cart_to_sph",
    "mic_array_layout",
    "mic_array_weights",
    "fibonacci_sphere",
    "random_shell",
    "random_rotation",
    "sphere_grid",
    "sphere_quadrature",
]

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

PHI = (1.0 + math.sqrt(5.0)) / 2.0

ICOSAHEDRON_WEIGHT = 25.0 / 840.0
DODECAHEDRON_WEIGHT = 27.0 / 840.0


def sph_to_cart(points: ArrayLike) -> np.ndarray:
    """Converts `(r, theta, phi)` rows to `(x, y, z)` rows."""
    sph = np.asarray(points, dtype=float)
    r, theta, phi = sph[..., 0], sph[..., 1], sph[..., 2]
    sin_theta = np.sin(theta)
    return np.stack(
        [r * sin_theta * np.cos(phi), r * sin_theta * np.sin(phi), r * np.cos(theta)],
        axis=-1,
    )


def cart_to_sph(points: ArrayLike) -> np.ndarray:
    """Converts `(x, y, z)` rows to `(r, theta, phi)` rows.

    The origin maps to `(0, 0, 0)`.
    """
    cart = np.asarray(points, dtype=float)
    x, y, z = cart[..., 0], cart[..., 1], cart[..., 2]
    rho = np.hypot(x, y)
    r = np.hypot(rho, z)
    theta = np.arctan2(rho, z)
    phi = np.mod(np.arctan2(y, x), 2.0 * math.pi)
    # mod can round tiny negative angles up to exactly 2π
    phi = np.where(phi >= 2.0 * math.pi, 0.0, phi)
    return np.stack([r, theta, phi], axis=-1)


def _pentakis_vertices():
    """Unit vertices of the pentakis dodecahedron and an icosahedron vertex mask."""
    icosahedron = []
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            icosahedron += [(0.0, s1, s2 * PHI), (s1, s2 * PHI, 0.0), (s2 * PHI, 0.0, s1)]

    dodecahedron = [
        (sx, sy, sz) for sx in (-1.0, 1.0) for sy in (-1.0, 1.0) for sz in (-1.0, 1.0)
    ]
    inv = 1.0 / PHI
    for s1 in (-1.0, 1.0):
        for s2 in (-1.0, 1.0):
            dodecahedron += [
                (0.0, s1 * PHI, s2 * inv),
                (s2 * inv, 0.0, s1 * PHI),
                (s1 * PHI, s2 * inv, 0.0),
            ]

    vertices = np.array(icosahedron + dodecahedron)
    vertices /= np.linalg.norm(vertices, axis=1, keepdims=True)
    is_icosahedron = np.arange(len(vertices)) < len(icosahedron)

    sph = cart_to_sph(vertices)
    order = np.lexsort((np.round(sph[:, 2], 12), np.round(vertices[:, 2], 12)))
    return vertices[order], is_icosahedron[order]


def mic_array_layout(a: float) -> np.ndarray:
    """The 32 microphone positions on the rigid sphere.

    The 12 icosahedron and 20 dodecahedron vertices (together the pentakis
    dodecahedron) scaled to radius `a`, sorted by `z` and then azimuth.

    Args:
        a: The sphere radius in meters

    Returns:
        `(32, 3)` Cartesian positions
    """
    if not a > 0:
        raise DomainError(f"sphere radius must be positive, got {a}")
    vertices, _ = _pentakis_vertices()
    return a * vertices


def mic_array_weights() -> np.ndarray:
    """Quadrature weights of the pentakis layout, summing to `4π`.

    Icosahedron vertices get `4π·25/840` and dodecahedron vertices `4π·27/840`,
    which integrates every spherical polynomial up to degree 9 exactly. The
    order matches [`mic_array_layout`][soundfield.pinn.geom.mic_array_layout].
    """
    _, is_icosahedron = _pentakis_vertices()
    return 4.0 * math.pi * np.where(
        is_icosahedron, ICOSAHEDRON_WEIGHT, DODECAHEDRON_WEIGHT
    )


def fibonacci_sphere(count: int, r: float) -> np.ndarray:
    """Fibonacci lattice with `count` nearly uniform points on a sphere.

    Point `i` sits at height `z = 1 - (2i + 1)/count` and azimuth
    `i · GOLDEN_ANGLE`.

    Args:
        count: Number of points
        r: Sphere radius in meters
    """
    if count < 1:
        raise DomainError(f"point count must be positive, got {count}")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = i * GOLDEN_ANGLE
    unit = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    unit /= np.linalg.norm(unit, axis=1, keepdims=True)
    return r * unit


def random_shell(count: int, r_min: float, r_max: float, seed: int) -> np.ndarray:
    """Points uniformly distributed by volume in a spherical shell.

    Radii come from the inverse CDF `r = (r_min³ + u (r_max³ - r_min³))^(1/3)`,
    directions from normalized Gaussian triples. Randomness is drawn from
    `numpy.random.default_rng(seed)` (PCG64), first all radii then all
    directions.

    Raises:
        DomainError: If `r_min > r_max` or `r_min <= 0`
    """
    if count < 0:
        raise DomainError(f"point count must not be negative, got {count}")
    if not r_min > 0:
        raise DomainError(f"inner radius must be positive, got {r_min}")
    if r_min > r_max:
        raise DomainError(f"inner radius {r_min} exceeds outer radius {r_max}")
    rng = np.random.default_rng(seed)
    u = rng.random(count)
    radius = np.cbrt(r_min ** 3 + u * (r_max ** 3 - r_min ** 3))
    radius = np.clip(radius, r_min, r_max)
    direction = rng.standard_normal((count, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return radius[:, None] * direction


def random_rotation(seed: Optional[int]) -> np.ndarray:
    """A random proper rotation matrix, the identity for `seed=None`."""
    if seed is None:
        return np.eye(3)
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def sphere_grid(r: float, n_theta: int, n_phi: int) -> np.ndarray:
    """Regular `(theta, phi)` grid of cell centers at radius `r`.

    Rows are ordered theta-major: all azimuths of the first polar ring come
    first.

    Returns:
        `(n_theta * n_phi, 3)` spherical points
    """
    if n_theta < 2 or n_phi < 2:
        raise DomainError("grid needs at least 2 cells per angle")
    if not r >= 0:
        raise DomainError(f"radius must not be negative, got {r}")
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    phi = (np.arange(n_phi) + 0.5) * 2.0 * math.pi / n_phi
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    return np.stack(
        [np.full(tt.size, float(r)), tt.ravel(), pp.ravel()], axis=-1
    )


def sphere_quadrature(
    n_theta: int = 20, n_phi: int = 25, r: float = 1.0
) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre by trapezoidal product rule on a sphere.

    Polar nodes sit at the Gauss-Legendre roots in `cos(theta)`, azimuths are
    equally spaced. The rule integrates `Y_n^m · conj(Y_n'^m')` exactly as long
    as `n + n' < 2·n_theta` and `|m - m'| < n_phi`. The default 500 points
    cover every order up to 12.

    Unlike the equal weight [`fibonacci_sphere`][soundfield.pinn.geom.fibonacci_sphere],
    whose 500 points leave Gram deviations of about `1.6e-3` at order 4,
    this rule is exact to rounding.

    Returns:
        `(n_theta * n_phi, 3)` Cartesian points (theta-major) and solid angle
        weights summing to `4π`
    """
    if n_theta < 1 or n_phi < 1:
        raise DomainError("quadrature needs at least one node per angle")
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r}")
    cos_theta, polar_weights = np.polynomial.legendre.leggauss(n_theta)
    phi = np.arange(n_phi) * 2.0 * math.pi / n_phi
    tt, pp = np.meshgrid(np.arccos(cos_theta), phi, indexing="ij")
    sph = np.stack([np.full(tt.size, float(r)), tt.ravel(), pp.ravel()], axis=-1)
    points = sph_to_cart(sph)
    weights = np.repeat(polar_weights * 2.0 * math.pi / n_phi, n_phi)
    return points, weights
