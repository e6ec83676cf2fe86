# -*- coding: utf-8 -*-
"""Property checks run by the `verify` command

Each check compares an implementation against an identity or a finite
difference approximation and reports the worst deviation it found next to the
tolerance it has to stay below.
"""
import math

from typing import (
    Callable,
    Dict,
    Iterable,
    List,
    NamedTuple,
    Optional,
)

import numpy as np

from .field import (
    Measurements,
    radial_derivative,
    scene_pressure,
)
from .geom import (
    cart_to_sph,
    random_shell,
    sph_to_cart,
    sphere_quadrature,
)
from .logging import get_logger
from .model import (
    MlpArch,
    ScatteringScene,
)
from .nn import (
    MlpParams,
    forward,
    init_params,
    input_derivatives,
    loss_and_gradient,
)
from .sh_estimator import amplification
from .specfun import (
    legendre_p_array,
    radial_propagator_prime_array,
    sph_harmonic_matrix,
    spherical_jn_array,
    spherical_jn_prime_array,
    spherical_yn_array,
    spherical_yn_prime_array,
)
from .train import balanced_weights


__all__ = [
    "CheckResult",
    "SUITES",
    "central_gradient",
    "laplacian_fd",
    "random_params",
    "relative_error",
    "run_checks",
]

log = get_logger()

Field = Callable[[np.ndarray], np.ndarray]


class CheckResult(NamedTuple):
    suite: str
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.worst < self.tolerance)


def _unit(axis: int) -> np.ndarray:
    return np.eye(3)[axis]


def central_gradient(fn: Field, points: np.ndarray, h: float) -> np.ndarray:
    """Central differences `(f(x + h e_i) - f(x - h e_i)) / 2h`, stacked on a last axis."""
    steps = [h * _unit(i) for i in range(3)]
    return np.stack(
        [(fn(points + e) - fn(points - e)) / (2.0 * h) for e in steps], axis=-1
    )


def laplacian_fd(fn: Field, points: np.ndarray, h: float) -> np.ndarray:
    """Seven point finite difference Laplacian."""
    center = fn(points)
    total = -6.0 * center
    for i in range(3):
        total = total + fn(points + h * _unit(i)) + fn(points - h * _unit(i))
    return total / (h * h)


def relative_error(approx: np.ndarray, exact: np.ndarray) -> float:
    """Largest deviation relative to the largest exact magnitude.

    An all-zero `exact` leaves the deviation absolute.
    """
    deviation = float(np.max(np.abs(approx - exact)))
    scale = float(np.max(np.abs(exact)))
    return deviation / scale if scale > 0 else deviation


def random_params(arch: MlpArch, rng: np.random.Generator) -> MlpParams:
    """Standard normal weights and biases, keeping every tanh in its curved range."""
    return MlpParams.from_flat(arch, rng.standard_normal(arch.parameter_count))


# spans ka = 0.77 of the default scene
WRONSKIAN_ARGUMENTS = (0.1, 0.77, 2.5, 10.0)


def _wronskian(scene: ScatteringScene, rng: np.random.Generator) -> float:
    x = np.array(WRONSKIAN_ARGUMENTS)
    j, y = spherical_jn_array(8, x), spherical_yn_array(8, x)
    jp, yp = spherical_jn_prime_array(8, x), spherical_yn_prime_array(8, x)
    expected = 1.0 / (x * x)
    return float(np.max(np.abs((j * yp - jp * y) / expected - 1.0)))


def _addition_theorem(scene: ScatteringScene, rng: np.random.Generator) -> float:
    theta = np.arccos(rng.uniform(-1.0, 1.0, (2, 10)))
    phi = rng.uniform(0.0, 2.0 * math.pi, (2, 10))
    first = sph_harmonic_matrix(3, theta[0], phi[0])[:, 9:16]
    second = sph_harmonic_matrix(3, theta[1], phi[1])[:, 9:16]
    total = np.sum(first * np.conj(second), axis=1)
    u = sph_to_cart(np.stack([np.ones(10), theta[0], phi[0]], axis=-1))
    v = sph_to_cart(np.stack([np.ones(10), theta[1], phi[1]], axis=-1))
    cos_gamma = np.clip(np.sum(u * v, axis=1), -1.0, 1.0)
    expected = 7.0 / (4.0 * math.pi) * legendre_p_array(3, cos_gamma)[3]
    return float(np.max(np.abs(total - expected)))


def _orthonormality(scene: ScatteringScene, rng: np.random.Generator) -> float:
    points, weights = sphere_quadrature()
    sph = cart_to_sph(points)
    harmonics = sph_harmonic_matrix(4, sph[:, 1], sph[:, 2])
    gram = np.conj(harmonics).T @ (weights[:, None] * harmonics)
    return float(np.max(np.abs(gram - np.eye(len(gram)))))


def _rigid_boundary(scene: ScatteringScene, rng: np.random.Generator) -> float:
    ka = scene.k * scene.a
    derivative = radial_propagator_prime_array(6, scene.a, scene.a, scene.k)
    incident = scene.k * np.abs(spherical_jn_prime_array(6, ka))
    return float(np.max(np.abs(derivative) / incident))


def _power_law(scene: ScatteringScene, rng: np.random.Generator) -> float:
    n = np.arange(5)
    k = 0.01 / scene.a
    factors = np.abs(amplification(4, 2.0 * scene.a, scene.a, k))
    expected = (n + 1) / (2 * n + 1) * 2.0 ** n
    return float(np.max(np.abs(factors / expected - 1.0)))


FD_STEP = 1e-4


def _field_helmholtz(scene: ScatteringScene, rng: np.random.Generator) -> float:
    points = random_shell(
        50, scene.a + 2 * FD_STEP, 0.15, int(rng.integers(2 ** 62))
    )

    def pressure(p):
        return scene_pressure(scene, p)

    values = pressure(points)
    residual = laplacian_fd(pressure, points, FD_STEP) + scene.k ** 2 * values
    return float(np.max(np.abs(residual)) / (scene.k ** 2 * np.max(np.abs(values))))


def _field_rigid_surface(scene: ScatteringScene, rng: np.random.Generator) -> float:
    points = random_shell(50, scene.a, scene.a, int(rng.integers(2 ** 62)))
    derivative = radial_derivative(scene, points, FD_STEP)
    peak = np.max(np.abs(scene_pressure(scene, points)))
    return float(np.max(np.abs(derivative)) / peak)


def _input_gradient(scene: ScatteringScene, rng: np.random.Generator) -> float:
    worst = 0.0
    arch = MlpArch()
    for _ in range(20):
        params = random_params(arch, rng)
        x = rng.uniform(-1.0, 1.0, (1, 3))
        exact = input_derivatives(params, x).gradient
        approx = central_gradient(lambda p: forward(params, p), x, 1e-5)
        worst = max(worst, relative_error(approx, exact))
    return worst


def _input_laplacian(scene: ScatteringScene, rng: np.random.Generator) -> float:
    worst = 0.0
    arch = MlpArch()
    for _ in range(20):
        params = random_params(arch, rng)
        x = rng.uniform(-1.0, 1.0, (1, 3))
        exact = input_derivatives(params, x).laplacian
        approx = laplacian_fd(lambda p: forward(params, p), x, 1e-4)
        worst = max(worst, relative_error(approx, exact))
    return worst


def _param_gradient(scene: ScatteringScene, rng: np.random.Generator) -> float:
    arch = MlpArch(input_scale=1.0 / scene.a)
    weights = balanced_weights(scene.k)
    worst = 0.0
    for _ in range(20):
        seed = int(rng.integers(2 ** 62))
        params = init_params(arch, seed)
        batch = Measurements(
            positions=random_shell(4, scene.a, 0.15, seed + 1),
            pressures=rng.uniform(-1, 1, 4) + 1j * rng.uniform(-1, 1, 4),
        )
        pde = random_shell(8, scene.a, 0.15, seed + 2)
        bc = random_shell(8, scene.a, scene.a, seed + 3)

        def total(theta):
            terms, _ = loss_and_gradient(
                MlpParams.from_flat(arch, theta),
                batch,
                pde,
                bc,
                scene.k,
                weights,
                need_gradient=False,
            )
            return terms.weighted(weights)

        _, exact = loss_and_gradient(params, batch, pde, bc, scene.k, weights)
        theta = params.flatten()
        approx = np.empty_like(theta)
        for i in range(len(theta)):
            step = np.zeros_like(theta)
            step[i] = 1e-6
            approx[i] = (total(theta + step) - total(theta - step)) / 2e-6
        worst = max(worst, relative_error(approx, exact))
    return worst


Check = Callable[[ScatteringScene, np.random.Generator], float]

SUITES: Dict[str, Dict[str, Check]] = {
    "specfun": {
        "wronskian": _wronskian,
        "addition-theorem": _addition_theorem,
        "orthonormality": _orthonormality,
        "rigid-boundary": _rigid_boundary,
        "power-law": _power_law,
    },
    "field": {
        "helmholtz": _field_helmholtz,
        "rigid-surface": _field_rigid_surface,
    },
    "autodiff": {
        "input-gradient": _input_gradient,
        "input-laplacian": _input_laplacian,
        "param-gradient": _param_gradient,
    },
}
"""Checks per suite"""

TOLERANCES: Dict[str, float] = {
    "wronskian": 1e-9,
    "addition-theorem": 1e-12,
    "orthonormality": 1e-3,
    "rigid-boundary": 1e-12,
    "power-law": 0.1,
    "helmholtz": 1e-3,
    "rigid-surface": 1e-6,
    "input-gradient": 1e-6,
    "input-laplacian": 1e-5,
    "param-gradient": 1e-5,
}


def run_checks(
    scene: ScatteringScene,
    seed: int,
    suites: Optional[Iterable[str]] = None,
) -> List[CheckResult]:
    """Runs the selected suites (all by default) with a generator seeded by `seed`."""
    selected = list(SUITES) if suites is None else list(suites)
    unknown = [name for name in selected if name not in SUITES]
    if unknown:
        raise KeyError(f"unknown check suites {unknown}")

    rng = np.random.default_rng(seed)
    results = []
    for suite in selected:
        for name, check in SUITES[suite].items():
            result = CheckResult(suite, name, check(scene, rng), TOLERANCES[name])
            log.info(
                "Check finished",
                suite=suite,
                check=name,
                worst=result.worst,
                tolerance=result.tolerance,
                passed=result.passed,
            )
            results.append(result)
    return results
