# -*- coding: utf-8 -*-
"""Fully connected network and its derivatives

The network maps Cartesian positions, multiplied by the fixed `input_scale`
of its architecture, to the real and imaginary part of the pressure through
tanh hidden layers and a linear output layer. Everything the
training loss needs is computed analytically with numpy:

- input derivatives are propagated forward layer by layer, each layer
  carrying its activations, their Jacobian and their Laplacian
  (or the full Hessian for [`input_derivatives`][soundfield.pinn.nn.input_derivatives])
- parameter gradients are obtained by a reverse sweep over that forward
  propagation, which differentiates through the input derivatives
"""
from dataclasses import dataclass
from typing import (
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from numpy.typing import ArrayLike

from .errors import DomainError
from .field import Measurements
from .model import (
    LossWeights,
    MlpArch,
)


__all__ = [
    "MlpParams",
    "InputDerivatives",
    "LossTerms",
    "init_params",
    "forward",
    "input_derivatives",
    "helmholtz_coefficient",
    "loss_terms",
    "loss_and_gradient",
    "param_gradient",
]


@dataclass(frozen=True)
class MlpParams:
    """Weights `(n_out, n_in)` and biases `(n_out,)` of every layer."""

    arch: MlpArch
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = self.arch.layer_sizes
        weights = tuple(np.asarray(w, dtype=float) for w in self.weights)
        biases = tuple(np.asarray(b, dtype=float) for b in self.biases)
        if len(weights) != len(sizes) - 1 or len(biases) != len(sizes) - 1:
            raise DomainError(f"expected {len(sizes) - 1} layers")
        for n_in, n_out, w, b in zip(sizes[:-1], sizes[1:], weights, biases):
            if w.shape != (n_out, n_in) or b.shape != (n_out,):
                raise DomainError(
                    f"layer shapes {w.shape}, {b.shape} do not match ({n_out}, {n_in})"
                )
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)

    @property
    def parameter_count(self) -> int:
        return self.arch.parameter_count

    def flatten(self) -> np.ndarray:
        """All parameters as one vector, layer by layer, weights (row major) before biases."""
        parts: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            parts += [w.ravel(), b]
        return np.concatenate(parts)

    @classmethod
    def from_flat(cls, arch: MlpArch, values: ArrayLike) -> "MlpParams":
        """Inverse of [`flatten`][soundfield.pinn.nn.MlpParams.flatten]."""
        flat = np.asarray(values, dtype=float).reshape(-1)
        if len(flat) != arch.parameter_count:
            raise DomainError(
                f"architecture has {arch.parameter_count} parameters, got {len(flat)}"
            )
        weights = []
        biases = []
        offset = 0
        sizes = arch.layer_sizes
        for n_in, n_out in zip(sizes[:-1], sizes[1:]):
            weights.append(flat[offset : offset + n_in * n_out].reshape(n_out, n_in))
            offset += n_in * n_out
            biases.append(flat[offset : offset + n_out])
            offset += n_out
        return cls(arch=arch, weights=tuple(weights), biases=tuple(biases))


@dataclass(frozen=True)
class InputDerivatives:
    """Network outputs and their input derivatives at `P` points.

    Attributes:
        value: `(P, out)` outputs
        gradient: `(P, out, 3)` Jacobian `∂out_j/∂x_i`
        hessian: `(P, out, 3, 3)` second derivatives
        laplacian: `(P, out)` trace of the Hessian
    """

    value: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    laplacian: np.ndarray


class LossTerms(NamedTuple):
    l_data: float
    l_pde: float
    l_bc: float

    def weighted(self, weights: LossWeights) -> float:
        lambda1, lambda2, lambda3 = weights.as_tuple()
        return lambda1 * self.l_data + lambda2 * self.l_pde + lambda3 * self.l_bc


def init_params(arch: MlpArch, seed: int) -> MlpParams:
    """Glorot uniform weights and zero biases.

    Weights are drawn from `U(-s, s)` with `s = sqrt(6/(fan_in + fan_out))`
    using `numpy.random.default_rng(seed)`, layer by layer.
    """
    rng = np.random.default_rng(seed)
    sizes = arch.layer_sizes
    weights = []
    biases = []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (n_in + n_out))
        weights.append(rng.uniform(-limit, limit, size=(n_out, n_in)))
        biases.append(np.zeros(n_out))
    return MlpParams(arch=arch, weights=tuple(weights), biases=tuple(biases))


def _as_points(params: MlpParams, x: ArrayLike) -> np.ndarray:
    points = np.asarray(x, dtype=float)
    if points.shape[-1] != params.arch.input_dim:
        raise DomainError(
            f"inputs need {params.arch.input_dim} coordinates, got shape {points.shape}"
        )
    if not np.all(np.isfinite(points)):
        raise DomainError("network inputs must be finite")
    return points


def forward(params: MlpParams, x: ArrayLike) -> np.ndarray:
    """Evaluates the network at points `(..., 3)`, returning `(..., out)`."""
    points = _as_points(params, x)
    a = params.arch.input_scale * points.reshape(-1, params.arch.input_dim)
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        a = a @ w.T + b
        if i < last:
            a = np.tanh(a)
    return a.reshape(points.shape[:-1] + (params.arch.output_dim,))


def input_derivatives(params: MlpParams, x: ArrayLike) -> InputDerivatives:
    """Exact first and second derivatives of the outputs with respect to the inputs.

    The full input Hessian is propagated through every layer:
    for `h = tanh(z)` the Hessian is `tanh'(z)·∇²z + tanh''(z)·∇z ∇zᵀ`.
    Derivatives are taken with respect to the unscaled coordinates.

    Args:
        params: The network parameters
        x: `(P, 3)` points or a single `(3,)` point

    Returns:
        The derivatives, without the point axis for a single point
    """
    points = _as_points(params, x)
    single = points.ndim == 1
    scale = params.arch.input_scale
    a = scale * points.reshape(-1, params.arch.input_dim)
    count, dim = a.shape
    jac = np.broadcast_to(scale * np.eye(dim), (count, dim, dim)).copy()
    hess = np.zeros((count, dim, dim, dim))

    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ w.T + b
        z_jac = np.einsum("mn,pnk->pmk", w, jac)
        z_hess = np.einsum("mn,pnkl->pmkl", w, hess)
        if i == last:
            a, jac, hess = z, z_jac, z_hess
            break
        h = np.tanh(z)
        d1 = 1.0 - h * h
        d2 = -2.0 * h * d1
        a = h
        jac = d1[..., None] * z_jac
        hess = (
            d1[..., None, None] * z_hess
            + d2[..., None, None] * z_jac[..., :, None] * z_jac[..., None, :]
        )

    laplacian = np.trace(hess, axis1=-2, axis2=-1)
    if single:
        return InputDerivatives(a[0], jac[0], hess[0], laplacian[0])
    return InputDerivatives(a, jac, hess, laplacian)


class _HiddenTape(NamedTuple):
    a: np.ndarray
    jac: np.ndarray
    lap: np.ndarray
    z_jac: np.ndarray
    z_lap: np.ndarray
    sq: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


class _Tape(NamedTuple):
    hidden: List[_HiddenTape]
    a: np.ndarray
    jac: np.ndarray
    lap: np.ndarray
    value: np.ndarray
    gradient: np.ndarray
    laplacian: np.ndarray


def _record(params: MlpParams, points: np.ndarray) -> _Tape:
    """Forward propagation of values, Jacobians and Laplacians, kept for the reverse sweep."""
    scale = params.arch.input_scale
    a = scale * points
    count, dim = a.shape
    jac = np.broadcast_to(scale * np.eye(dim), (count, dim, dim))
    lap = np.zeros((count, dim))
    hidden = []
    for w, b in zip(params.weights[:-1], params.biases[:-1]):
        z = a @ w.T + b
        z_jac = np.einsum("mn,pnk->pmk", w, jac)
        z_lap = lap @ w.T
        sq = np.sum(z_jac * z_jac, axis=-1)
        h = np.tanh(z)
        d1 = 1.0 - h * h
        d2 = -2.0 * h * d1
        d3 = -2.0 * d1 * d1 - 2.0 * h * d2
        hidden.append(_HiddenTape(a, jac, lap, z_jac, z_lap, sq, d1, d2, d3))
        a = h
        jac = d1[..., None] * z_jac
        lap = d1 * z_lap + d2 * sq

    w, b = params.weights[-1], params.biases[-1]
    value = a @ w.T + b
    gradient = np.einsum("mn,pnk->pmk", w, jac)
    laplacian = lap @ w.T
    return _Tape(hidden, a, jac, lap, value, gradient, laplacian)


def _reverse(
    params: MlpParams,
    tape: _Tape,
    value_bar: np.ndarray,
    gradient_bar: np.ndarray,
    laplacian_bar: np.ndarray,
) -> List[np.ndarray]:
    """Adjoint sweep returning `[W̄_0, b̄_0, W̄_1, b̄_1, ...]`."""
    w = params.weights[-1]
    grads = [
        value_bar.T @ tape.a
        + np.einsum("pok,pnk->on", gradient_bar, tape.jac)
        + laplacian_bar.T @ tape.lap,
        value_bar.sum(axis=0),
    ]
    a_bar = value_bar @ w
    jac_bar = np.einsum("pok,on->pnk", gradient_bar, w)
    lap_bar = laplacian_bar @ w

    for w, layer in zip(reversed(params.weights[:-1]), reversed(tape.hidden)):
        z_bar = (
            a_bar * layer.d1
            + np.sum(jac_bar * layer.z_jac, axis=-1) * layer.d2
            + lap_bar * (layer.z_lap * layer.d2 + layer.sq * layer.d3)
        )
        z_jac_bar = (
            jac_bar * layer.d1[..., None]
            + 2.0 * (lap_bar * layer.d2)[..., None] * layer.z_jac
        )
        z_lap_bar = lap_bar * layer.d1
        grads = [
            z_bar.T @ layer.a
            + np.einsum("pmk,pnk->mn", z_jac_bar, layer.jac)
            + z_lap_bar.T @ layer.lap,
            z_bar.sum(axis=0),
        ] + grads
        a_bar = z_bar @ w
        jac_bar = np.einsum("pmk,mn->pnk", z_jac_bar, w)
        lap_bar = z_lap_bar @ w
    return grads


def helmholtz_coefficient(k: float, reciprocal_coefficient: bool = False) -> float:
    """Coefficient of the field in the Helmholtz residual.

    `k²` by default, the literal `(c/ω)² = 1/k²` when `reciprocal_coefficient` is set.
    """
    if not k > 0:
        raise DomainError(f"wavenumber must be positive, got {k}")
    return 1.0 / (k * k) if reciprocal_coefficient else k * k


def _targets(data_batch: Measurements) -> np.ndarray:
    if len(data_batch) == 0:
        raise DomainError("the data batch must not be empty")
    return np.stack([data_batch.pressures.real, data_batch.pressures.imag], axis=-1)


def _point_set(params: MlpParams, points: ArrayLike) -> np.ndarray:
    return _as_points(params, points).reshape(-1, params.arch.input_dim)


def loss_and_gradient(
    params: MlpParams,
    data_batch: Measurements,
    pde_points: ArrayLike,
    bc_points: ArrayLike,
    k: float,
    weights: Union[LossWeights, Sequence[float]],
    reciprocal_coefficient: bool = False,
    need_gradient: bool = True,
) -> Tuple[LossTerms, Optional[np.ndarray]]:
    """The three loss terms and the flat gradient of their weighted sum.

    - `l_data = 1/Q Σ_q Σ_j (Φ_j(x_q) - P_j(x_q))²` over the real and imaginary channel
    - `l_pde = 1/D Σ_d Σ_j (ΔΦ_j(x_d) + κ Φ_j(x_d))²` with `κ` from
      [`helmholtz_coefficient`][soundfield.pinn.nn.helmholtz_coefficient]
    - `l_bc = 1/B Σ_b Σ_j (x_b · ∇Φ_j(x_b))²`, the radial derivative on the sphere

    Empty PDE or boundary point sets contribute zero.
    """
    if isinstance(weights, LossWeights):
        lambdas = weights.as_tuple()
    else:
        lambdas = tuple(float(v) for v in weights)
    if len(lambdas) != 3 or any(v < 0 for v in lambdas):
        raise DomainError("loss weights must be three non-negative numbers")
    kappa = helmholtz_coefficient(k, reciprocal_coefficient)
    targets = _targets(data_batch)
    data_points = _point_set(params, data_batch.positions)
    pde = _point_set(params, pde_points)
    bc = _point_set(params, bc_points)

    gradient = np.zeros(params.parameter_count) if need_gradient else None

    def accumulate(tape, value_bar, gradient_bar, laplacian_bar):
        if gradient is None:
            return
        layers = _reverse(params, tape, value_bar, gradient_bar, laplacian_bar)
        gradient[:] += np.concatenate([part.ravel() for part in layers])

    tape = _record(params, data_points)
    misfit = tape.value - targets
    l_data = float(np.sum(misfit * misfit) / len(data_points))
    accumulate(
        tape,
        lambdas[0] * 2.0 * misfit / len(data_points),
        np.zeros_like(tape.gradient),
        np.zeros_like(tape.laplacian),
    )

    l_pde = 0.0
    if len(pde):
        tape = _record(params, pde)
        residual = tape.laplacian + kappa * tape.value
        l_pde = float(np.sum(residual * residual) / len(pde))
        scaled = lambdas[1] * 2.0 * residual / len(pde)
        accumulate(tape, kappa * scaled, np.zeros_like(tape.gradient), scaled)

    l_bc = 0.0
    if len(bc):
        tape = _record(params, bc)
        radial = np.einsum("pjk,pk->pj", tape.gradient, bc)
        l_bc = float(np.sum(radial * radial) / len(bc))
        gradient_bar = (
            lambdas[2] * 2.0 * radial[..., None] * bc[:, None, :] / len(bc)
        )
        accumulate(
            tape, np.zeros_like(tape.value), gradient_bar, np.zeros_like(tape.laplacian)
        )

    return LossTerms(l_data, l_pde, l_bc), gradient


def loss_terms(
    params: MlpParams,
    data_batch: Measurements,
    pde_points: ArrayLike,
    bc_points: ArrayLike,
    k: float,
    reciprocal_coefficient: bool = False,
) -> LossTerms:
    """Data, Helmholtz and rigid boundary losses of the network.

    Raises:
        DomainError: If the data batch is empty or `k <= 0`
    """
    terms, _ = loss_and_gradient(
        params,
        data_batch,
        pde_points,
        bc_points,
        k,
        (1.0, 1.0, 1.0),
        reciprocal_coefficient,
        need_gradient=False,
    )
    return terms


def param_gradient(
    params: MlpParams,
    data_batch: Measurements,
    pde_points: ArrayLike,
    bc_points: ArrayLike,
    k: float,
    weights: Union[LossWeights, Sequence[float]],
    reciprocal_coefficient: bool = False,
) -> np.ndarray:
    """Flat gradient of `λ1·l_data + λ2·l_pde + λ3·l_bc`, ordered like `MlpParams.flatten`."""
    _, gradient = loss_and_gradient(
        params, data_batch, pde_points, bc_points, k, weights, reciprocal_coefficient
    )
    assert gradient is not None
    return gradient
