import math

import numpy as np
import pytest

from soundfield.pinn.errors import DomainError
from soundfield.pinn.field import Measurements
from soundfield.pinn.geom import (
    fibonacci_sphere,
    random_shell,
)
from soundfield.pinn.model import (
    LossWeights,
    MlpArch,
)
from soundfield.pinn.nn import (
    LossTerms,
    MlpParams,
    helmholtz_coefficient,
    loss_and_gradient,
    loss_terms,
    param_gradient,
)


A = 0.042
K = 2 * math.pi * 1000 / 343
ARCH = MlpArch()
NO_POINTS = np.zeros((0, 3))


def random_params(seed: int = 0) -> MlpParams:
    rng = np.random.default_rng(seed)
    return MlpParams.from_flat(ARCH, rng.normal(scale=0.5, size=ARCH.parameter_count))


def constant_params(c0: float) -> MlpParams:
    flat = np.zeros(ARCH.parameter_count)
    flat[-2:] = c0
    return MlpParams.from_flat(ARCH, flat)


def data_batch(count: int = 4, seed: int = 0) -> Measurements:
    rng = np.random.default_rng(seed)
    return Measurements(
        positions=fibonacci_sphere(count, A),
        pressures=rng.normal(size=count) + 1j * rng.normal(size=count),
    )


def silent_batch(count: int = 4) -> Measurements:
    return Measurements(positions=fibonacci_sphere(count, A), pressures=np.zeros(count))


def test_helmholtz_coefficient():
    assert helmholtz_coefficient(K) == pytest.approx(K ** 2)
    assert helmholtz_coefficient(K, reciprocal_coefficient=True) == pytest.approx(1 / K ** 2)
    with pytest.raises(DomainError):
        helmholtz_coefficient(0.0)


def test_constant_network_losses():
    c0 = 0.25
    terms = loss_terms(
        constant_params(c0),
        silent_batch(),
        random_shell(6, A, 0.15, seed=1),
        fibonacci_sphere(5, A),
        K,
    )

    # both channels equal c0 everywhere
    assert terms.l_data == pytest.approx(2 * c0 ** 2)
    assert terms.l_pde == pytest.approx(2 * (K ** 2 * c0) ** 2)
    assert terms.l_bc == 0.0


def test_constant_network_with_literal_coefficient():
    c0 = 0.5
    terms = loss_terms(
        constant_params(c0),
        silent_batch(),
        random_shell(3, A, 0.15, seed=1),
        NO_POINTS,
        K,
        reciprocal_coefficient=True,
    )

    assert terms.l_pde == pytest.approx(2 * (c0 / K ** 2) ** 2)


def test_data_loss_against_targets():
    flat = np.zeros(ARCH.parameter_count)
    flat[-2:] = [1.0, -1.0]
    batch = Measurements(positions=fibonacci_sphere(2, A), pressures=[1 - 1j, 0.0])
    terms = loss_terms(MlpParams.from_flat(ARCH, flat), batch, NO_POINTS, NO_POINTS, K)

    assert terms == LossTerms(l_data=1.0, l_pde=0.0, l_bc=0.0)


def test_empty_data_batch():
    with pytest.raises(DomainError):
        loss_terms(random_params(), silent_batch(0), NO_POINTS, NO_POINTS, K)


@pytest.mark.parametrize(
    "weights",
    [
        pytest.param((1.0, -1.0, 0.0), id="negative"),
        pytest.param((1.0, 1.0), id="two-values"),
    ],
)
def test_invalid_weights(weights):
    with pytest.raises(DomainError):
        param_gradient(random_params(), data_batch(), NO_POINTS, NO_POINTS, K, weights)


def test_weighted_total():
    terms = LossTerms(l_data=2.0, l_pde=3.0, l_bc=5.0)

    assert terms.weighted(LossWeights(lambda1=1.0, lambda2=0.5, lambda3=0.1)) == pytest.approx(
        4.0
    )


def test_gradient_matches_finite_differences():
    params = random_params(seed=7)
    batch = data_batch(4, seed=7)
    pde = random_shell(8, A, 0.15, seed=7)
    bc = fibonacci_sphere(8, A)
    weights = (1.0, 1 / K ** 2, A)

    def total(theta):
        terms = loss_terms(MlpParams.from_flat(ARCH, theta), batch, pde, bc, K)
        return terms.weighted(LossWeights(lambda1=1.0, lambda2=1 / K ** 2, lambda3=A))

    theta = params.flatten()
    h = 1e-6
    expected = np.array(
        [(total(theta + h * e) - total(theta - h * e)) / (2 * h) for e in np.eye(len(theta))]
    )
    gradient = param_gradient(params, batch, pde, bc, K, weights)

    np.testing.assert_allclose(
        gradient, expected, rtol=1e-5, atol=1e-6 * np.max(np.abs(expected))
    )


def test_gradient_is_linear_in_weights():
    params = random_params(seed=8)
    batch = data_batch(seed=8)
    pde = random_shell(6, A, 0.15, seed=8)
    bc = fibonacci_sphere(6, A)

    def gradient(weights):
        return param_gradient(params, batch, pde, bc, K, weights)

    parts = gradient((1.0, 0.0, 0.0)) + gradient((0.0, 2.0, 0.0)) + gradient((0.0, 0.0, 3.0))

    np.testing.assert_allclose(gradient((1.0, 2.0, 3.0)), parts, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(
        gradient((2.0, 0.0, 0.0)), 2 * gradient((1.0, 0.0, 0.0)), rtol=1e-14
    )


def test_empty_physics_points_contribute_nothing():
    params = random_params(seed=9)
    batch = data_batch(seed=9)
    terms, gradient = loss_and_gradient(params, batch, NO_POINTS, NO_POINTS, K, (1.0, 1.0, 1.0))
    _, data_only = loss_and_gradient(
        params,
        batch,
        random_shell(5, A, 0.15, seed=9),
        fibonacci_sphere(5, A),
        K,
        (1.0, 0.0, 0.0),
    )

    assert terms.l_pde == 0.0
    assert terms.l_bc == 0.0
    np.testing.assert_allclose(gradient, data_only, rtol=1e-14)


def test_terms_without_gradient():
    params = random_params(seed=10)
    batch = data_batch(seed=10)
    pde = random_shell(5, A, 0.15, seed=10)
    bc = fibonacci_sphere(5, A)
    terms, gradient = loss_and_gradient(
        params, batch, pde, bc, K, (1.0, 1.0, 1.0), need_gradient=False
    )

    assert gradient is None
    assert terms == loss_terms(params, batch, pde, bc, K)


def test_scaled_network_gradient_matches_finite_differences():
    arch = MlpArch(input_scale=1 / A)
    rng = np.random.default_rng(12)
    params = MlpParams.from_flat(arch, rng.normal(scale=0.5, size=arch.parameter_count))
    batch = data_batch(4, seed=12)
    pde = random_shell(8, A, 0.15, seed=12)
    bc = fibonacci_sphere(8, A)
    weights = LossWeights(lambda1=1.0, lambda2=4 / K ** 4, lambda3=1.0)

    def total(theta):
        terms = loss_terms(MlpParams.from_flat(arch, theta), batch, pde, bc, K)
        return terms.weighted(weights)

    theta = params.flatten()
    h = 1e-6
    expected = np.array(
        [(total(theta + h * e) - total(theta - h * e)) / (2 * h) for e in np.eye(len(theta))]
    )
    gradient = param_gradient(params, batch, pde, bc, K, weights)

    np.testing.assert_allclose(
        gradient, expected, rtol=1e-5, atol=1e-6 * np.max(np.abs(expected))
    )


def test_boundary_loss_uses_unscaled_coordinates():
    # Φ = w·(s x) is linear, so x·∇Φ = s (w·x)
    scale = 1 / A
    arch = MlpArch(hidden_layers=0, input_scale=scale)
    flat = np.zeros(arch.parameter_count)
    flat[:3] = [0.2, -0.1, 0.4]
    params = MlpParams.from_flat(arch, flat)
    bc = fibonacci_sphere(7, A)
    terms = loss_terms(params, silent_batch(), NO_POINTS, bc, K)

    radial = scale * bc @ np.array([0.2, -0.1, 0.4])
    assert terms.l_bc == pytest.approx(np.mean(radial ** 2), rel=1e-12)
