import math

import numpy as np
import pytest

from soundfield.pinn.checks import laplacian_fd
from soundfield.pinn.errors import (
    DomainError,
    NumericalError,
)
from soundfield.pinn.field import Measurements
from soundfield.pinn.geom import (
    fibonacci_sphere,
    mic_array_layout,
    random_shell,
)
from soundfield.pinn.pw_estimator import (
    PwModel,
    default_order,
    reconstruct_pw,
    solve_amplitudes,
    steering_matrix,
)
from soundfield.pinn.specfun import radial_propagator_array


A = 0.042
K = 2 * math.pi * 1000 / 343
MICS = mic_array_layout(A)
DIRECTIONS = MICS / A


def on_mics(pressures) -> Measurements:
    return Measurements(positions=MICS, pressures=pressures)


def test_default_order():
    assert default_order(K, A) == 11
    assert default_order(2000.0, 1.0) == 60


def test_order_below_minimum():
    with pytest.raises(DomainError):
        steering_matrix(DIRECTIONS, MICS, K, A, order=math.ceil(K * A) + 1)


def test_free_field_steering_is_plane_wave():
    steering = steering_matrix(DIRECTIONS, MICS, K, A, scattering=False)

    np.testing.assert_allclose(
        steering, np.exp(1j * K * MICS @ DIRECTIONS.T), rtol=0, atol=1e-8
    )


def test_steering_bounded_by_modal_sum():
    steering = steering_matrix(DIRECTIONS, MICS, K, A)
    order = default_order(K, A)
    n = np.arange(order + 1)
    bound = np.sum((2 * n + 1) * np.abs(radial_propagator_array(order, A, A, K)))

    assert steering.shape == (32, 32)
    assert np.all(np.isfinite(steering))
    assert np.max(np.abs(steering)) <= bound


def test_steering_antipodal_symmetry():
    steering = steering_matrix(DIRECTIONS, MICS, K, A)
    # flipping the arrival direction and the microphone keeps every angle
    opposite = [int(np.argmin(np.linalg.norm(MICS + p, axis=1))) for p in MICS]

    np.testing.assert_allclose(steering[np.ix_(opposite, opposite)], steering, atol=1e-12)


def test_single_direction_recovered():
    steering = steering_matrix(DIRECTIONS, MICS, K, A)
    model = solve_amplitudes(on_mics(steering[:, 7]), DIRECTIONS, K, A, reg=1e-6)
    magnitudes = np.abs(model.amplitudes)

    assert int(np.argmax(magnitudes)) == 7
    assert magnitudes[7] >= 10 * np.median(magnitudes)


def test_zero_measurements():
    model = solve_amplitudes(on_mics(np.zeros(32)), DIRECTIONS, K, A)

    assert np.all(model.amplitudes == 0)
    assert model.residual == 0.0


def test_solution_is_linear():
    rng = np.random.default_rng(0)
    p = rng.normal(size=32) + 1j * rng.normal(size=32)
    single = solve_amplitudes(on_mics(p), DIRECTIONS, K, A)
    double = solve_amplitudes(on_mics(2 * p), DIRECTIONS, K, A)

    np.testing.assert_allclose(double.amplitudes, 2 * single.amplitudes, rtol=1e-12)


def test_residual_shrinks_with_regularization():
    rng = np.random.default_rng(1)
    m = on_mics(rng.normal(size=32) + 1j * rng.normal(size=32))
    residuals = [
        solve_amplitudes(m, DIRECTIONS, K, A, reg=reg).residual
        for reg in (1e-1, 1e-2, 1e-3, 1e-4)
    ]

    assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))


def test_permutation_equivariance():
    rng = np.random.default_rng(4)
    m = on_mics(rng.normal(size=32) + 1j * rng.normal(size=32))
    perm = rng.permutation(32)
    base = solve_amplitudes(m, DIRECTIONS, K, A)
    permuted = solve_amplitudes(m, DIRECTIONS[perm], K, A)

    np.testing.assert_allclose(
        permuted.amplitudes, base.amplitudes[perm], rtol=1e-8, atol=1e-8
    )


def test_unregularized_underdetermined_system():
    with pytest.raises(NumericalError):
        solve_amplitudes(on_mics(np.ones(32)), fibonacci_sphere(40, 1.0), K, A, reg=0.0)


def test_negative_regularization():
    with pytest.raises(DomainError):
        solve_amplitudes(on_mics(np.ones(32)), DIRECTIONS, K, A, reg=-1.0)


def test_directions_must_be_unit_vectors():
    with pytest.raises(DomainError):
        PwModel(directions=2 * DIRECTIONS, amplitudes=np.ones(32), k=K, reg=0.0)


def test_reconstruct_at_origin_sums_amplitudes():
    amplitudes = np.arange(32) * (1 - 1j)
    model = PwModel(directions=DIRECTIONS, amplitudes=amplitudes, k=K, reg=0.0)

    assert complex(reconstruct_pw(model, np.zeros(3))) == pytest.approx(amplitudes.sum())


def test_reconstruct_single_wave_is_periodic():
    model = PwModel(directions=[[0.0, 0.0, 1.0]], amplitudes=[1.0], k=K, reg=0.0)
    wavelength = 2 * math.pi / K

    assert complex(reconstruct_pw(model, [0.0, 0.0, wavelength])) == pytest.approx(
        1.0, abs=1e-12
    )
    assert reconstruct_pw(model, [[0.0, 0.0, wavelength / 2]])[0] == pytest.approx(
        -1.0, abs=1e-12
    )


def test_reconstruction_solves_helmholtz():
    rng = np.random.default_rng(6)
    model = PwModel(
        directions=DIRECTIONS,
        amplitudes=rng.normal(size=32) + 1j * rng.normal(size=32),
        k=K,
        reg=0.0,
    )
    points = random_shell(30, A, 0.15, seed=2)

    def pressure(p):
        return reconstruct_pw(model, p)

    values = pressure(points)
    residual = laplacian_fd(pressure, points, 1e-4) + K ** 2 * values
    assert np.max(np.abs(residual)) < 1e-3 * K ** 2 * np.max(np.abs(values))
