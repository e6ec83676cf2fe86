import itertools
import math

import numpy as np
import pytest

from soundfield.pinn.errors import DomainError
from soundfield.pinn.geom import (
    cart_to_sph,
    fibonacci_sphere,
    mic_array_layout,
    mic_array_weights,
    random_rotation,
    random_shell,
    sphere_grid,
    sphere_quadrature,
)
from soundfield.pinn.specfun import sph_harmonic_matrix


A = 0.042


def test_mic_layout_on_sphere():
    mics = mic_array_layout(A)

    assert mics.shape == (32, 3)
    np.testing.assert_allclose(np.linalg.norm(mics, axis=1), A, rtol=0, atol=1e-12)
    np.testing.assert_allclose(mics.mean(axis=0), 0.0, atol=1e-12)


def test_mic_layout_sorted_and_antipodal():
    mics = mic_array_layout(1.0)
    z = np.round(mics[:, 2], 12)

    assert np.all(np.diff(z) >= 0)
    for p in mics:
        assert np.min(np.linalg.norm(mics + p, axis=1)) < 1e-12


def test_mic_layout_minimal_angular_distance():
    # the closest pairs of a pentakis dodecahedron join an icosahedron
    # vertex to its five dodecahedron neighbours
    mics = mic_array_layout(1.0)
    angles = [
        math.acos(np.clip(np.dot(p, q), -1.0, 1.0))
        for p, q in itertools.combinations(mics, 2)
    ]
    phi = (1 + math.sqrt(5)) / 2
    icosa = np.array([0.0, 1.0, phi]) / math.sqrt(1 + phi ** 2)
    dodeca = np.array([1.0, 1.0, 1.0]) / math.sqrt(3)
    expected = math.acos(float(np.dot(icosa, dodeca)))

    assert min(angles) == pytest.approx(expected, rel=1e-12)
    assert sum(abs(a - expected) < 1e-9 for a in angles) == 60


def test_mic_weights():
    weights = mic_array_weights()

    assert weights.shape == (32,)
    assert weights.sum() == pytest.approx(4 * math.pi, rel=1e-14)
    assert np.count_nonzero(np.isclose(weights, 4 * math.pi * 25 / 840)) == 12
    assert np.count_nonzero(np.isclose(weights, 4 * math.pi * 27 / 840)) == 20


def test_fibonacci_sphere():
    points = fibonacci_sphere(500, A)

    assert points.shape == (500, 3)
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), A, rtol=0, atol=1e-12)
    # constant Y_0^0 integrates to r² with weights 4πr²/count
    integral = np.sum(np.full(500, 1 / (4 * math.pi))) * 4 * math.pi * A ** 2 / 500
    assert integral == pytest.approx(A ** 2, rel=1e-3)
    assert abs(points[:, 2].mean()) < 1e-12
    np.testing.assert_array_equal(points, fibonacci_sphere(500, A))


def gram_deviation(points, weights):
    sph = cart_to_sph(points)
    harmonics = sph_harmonic_matrix(4, sph[:, 1], sph[:, 2])
    gram = np.conj(harmonics).T @ (weights[:, None] * harmonics)
    return np.max(np.abs(gram - np.eye(25)))


@pytest.mark.parametrize(
    "count, bound",
    [
        # equal weights leave a pole row error of 1.6e-3 at 500 points
        pytest.param(500, 2e-3, id="500"),
        pytest.param(1000, 1e-3, id="1000"),
        pytest.param(2000, 3e-4, id="2000"),
    ],
)
def test_fibonacci_equal_weight_orthonormality(count, bound):
    points = fibonacci_sphere(count, A)
    weights = np.full(count, 4 * math.pi / count)

    assert gram_deviation(points, weights) < bound


def test_sphere_quadrature():
    points, weights = sphere_quadrature(r=A)

    assert points.shape == (500, 3)
    np.testing.assert_allclose(np.linalg.norm(points, axis=1), A, rtol=0, atol=1e-15)
    assert np.sum(weights) == pytest.approx(4 * math.pi, rel=1e-14)
    assert gram_deviation(points, weights) < 1e-12


def test_sphere_quadrature_is_exact_up_to_its_degree():
    points, weights = sphere_quadrature(3, 7)
    z = points[:, 2]

    # ∫ cos⁴θ dΩ = 4π/5, degree 4 < 2·3
    assert np.sum(weights * z ** 4) == pytest.approx(4 * math.pi / 5, rel=1e-14)


@pytest.mark.parametrize(
    "n_theta, n_phi, r",
    [
        pytest.param(0, 4, 1.0, id="no-polar-nodes"),
        pytest.param(4, 0, 1.0, id="no-azimuths"),
        pytest.param(4, 4, 0.0, id="zero-radius"),
    ],
)
def test_sphere_quadrature_domain_errors(n_theta, n_phi, r):
    with pytest.raises(DomainError):
        sphere_quadrature(n_theta, n_phi, r)


def test_fibonacci_single_point():
    point = fibonacci_sphere(1, 2.0)

    assert point.shape == (1, 3)
    assert np.linalg.norm(point) == pytest.approx(2.0)


def test_random_shell_bounds_and_determinism():
    points = random_shell(1000, A, 0.15, seed=5)
    radii = np.linalg.norm(points, axis=1)

    assert points.shape == (1000, 3)
    assert np.all((radii >= A) & (radii <= 0.15 * (1 + 1e-12)))
    np.testing.assert_array_equal(points, random_shell(1000, A, 0.15, seed=5))
    assert not np.array_equal(points, random_shell(1000, A, 0.15, seed=6))


def test_random_shell_uniform_by_volume():
    r_min, r_max = A, 0.15
    radii = np.linalg.norm(random_shell(100_000, r_min, r_max, seed=1), axis=1)

    assert np.mean(radii ** 3) == pytest.approx((r_min ** 3 + r_max ** 3) / 2, rel=0.01)


def test_random_shell_thin_shell():
    radii = np.linalg.norm(random_shell(50, A, A, seed=2), axis=1)

    np.testing.assert_allclose(radii, A, rtol=1e-12)


@pytest.mark.parametrize(
    "r_min, r_max",
    [
        pytest.param(0.1, 0.05, id="inverted"),
        pytest.param(0.0, 0.05, id="zero-inner"),
    ],
)
def test_random_shell_domain_errors(r_min, r_max):
    with pytest.raises(DomainError):
        random_shell(10, r_min, r_max, seed=0)


def test_random_rotation():
    rotation = random_rotation(42)

    np.testing.assert_allclose(rotation @ rotation.T, np.eye(3), atol=1e-12)
    assert np.linalg.det(rotation) == pytest.approx(1.0)
    np.testing.assert_array_equal(rotation, random_rotation(42))
    np.testing.assert_array_equal(random_rotation(None), np.eye(3))


def test_sphere_grid_cell_centers():
    grid = sphere_grid(0.072, 2, 2)

    np.testing.assert_allclose(
        grid,
        [
            [0.072, math.pi / 4, math.pi / 2],
            [0.072, math.pi / 4, 3 * math.pi / 2],
            [0.072, 3 * math.pi / 4, math.pi / 2],
            [0.072, 3 * math.pi / 4, 3 * math.pi / 2],
        ],
    )


def test_sphere_grid_size():
    grid = sphere_grid(0.05, 36, 72)

    assert grid.shape == (36 * 72, 3)
    assert np.all(grid[:, 0] == 0.05)
    # theta-major: the first n_phi rows share the first polar angle
    assert np.all(grid[:72, 1] == grid[0, 1])
    assert np.all(np.diff(grid[:72, 2]) > 0)


def test_sphere_grid_needs_two_cells():
    with pytest.raises(DomainError):
        sphere_grid(0.05, 1, 4)
