# -*- coding: utf-8 -*-
"""PINN training

Loss weighting, the Adam optimizer and the full batch training loop.
"""
from dataclasses import (
    dataclass,
    field,
)
from typing import (
    Callable,
    Dict,
    List,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np

from numpy.typing import ArrayLike

from .config import (
    PinnConfig,
    SeedStream,
    Weighting,
    derive_seed,
)
from .errors import (
    DomainError,
    NumericalError,
)
from .field import Measurements
from .geom import (
    fibonacci_sphere,
    random_shell,
)
from .logging import get_logger
from .model import (
    AdamConfig,
    LossWeights,
    MlpArch,
    ScatteringScene,
)
from .nn import (
    MlpParams,
    init_params,
    loss_and_gradient,
)


__all__ = [
    "LossReport",
    "AdamState",
    "TrainingPoints",
    "default_weights",
    "balanced_weights",
    "effective_weights",
    "network_arch",
    "adam_step",
    "training_points",
    "train",
    "half_loss_epochs",
]

log = get_logger()


@dataclass(frozen=True)
class LossReport:
    """Unweighted loss terms at the start of an epoch and their weighted sum."""

    epoch: int
    l_data: float
    l_pde: float
    l_bc: float
    weighted_total: float


@dataclass
class AdamState:
    """Moment estimates and step counter of the Adam optimizer."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0
    config: AdamConfig = field(default_factory=AdamConfig)

    @classmethod
    def create(cls, size: int, config: Optional[AdamConfig] = None) -> "AdamState":
        return cls(
            m=np.zeros(size), v=np.zeros(size), config=config or AdamConfig()
        )


@dataclass(frozen=True)
class TrainingPoints:
    """Collocation points inside the shell and boundary points on the sphere."""

    pde: np.ndarray
    bc: np.ndarray


def default_weights(k: float, a: float) -> LossWeights:
    """`λ1 = 1`, `λ2 = 1/k²` and `λ3 = a`."""
    if not (k > 0 and a > 0):
        raise DomainError("wavenumber and sphere radius must be positive")
    return LossWeights(lambda1=1.0, lambda2=1.0 / (k * k), lambda3=a)


def balanced_weights(k: float) -> LossWeights:
    """`λ1 = 1`, `λ2 = 4/k⁴` and `λ3 = 1`.

    The Helmholtz residual of a field `Φ` is of order `k²Φ` and the radial
    derivative `x·∇Φ` on the sphere of order `ka·Φ`, so with these weights
    all three weighted terms are of the order of the squared field. The
    factor 4 on the residual makes the physics terms settle before the data term.
    """
    if not k > 0:
        raise DomainError(f"wavenumber must be positive, got {k}")
    return LossWeights(lambda1=1.0, lambda2=4.0 / k ** 4, lambda3=1.0)


def effective_weights(scene: ScatteringScene, config: PinnConfig) -> LossWeights:
    """The configured weights or the `weighting` defaults, with the physics terms off for `data_only`."""
    if config.weights is not None:
        weights = config.weights
    elif config.weighting == Weighting.LITERAL:
        weights = default_weights(scene.k, scene.a)
    else:
        weights = balanced_weights(scene.k)
    if config.data_only:
        return LossWeights(lambda1=weights.lambda1, lambda2=0.0, lambda3=0.0)
    return weights


def network_arch(scene: ScatteringScene, config: PinnConfig) -> MlpArch:
    """The configured architecture with the input scale resolved, `1/a` unless set."""
    scale = config.input_scale if config.input_scale is not None else 1.0 / scene.a
    return config.arch.copy(update={"input_scale": float(scale)})


def adam_step(
    state: AdamState, params: ArrayLike, gradient: ArrayLike
) -> Tuple[np.ndarray, AdamState]:
    """One bias corrected Adam update.

    Raises:
        DomainError: If the parameter, gradient and moment shapes differ
    """
    theta = np.asarray(params, dtype=float)
    g = np.asarray(gradient, dtype=float)
    if theta.shape != g.shape or theta.shape != state.m.shape:
        raise DomainError(
            f"shape mismatch: params {theta.shape}, gradient {g.shape}, state {state.m.shape}"
        )
    cfg = state.config
    t = state.t + 1
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    m_hat = m / (1.0 - cfg.beta1 ** t)
    v_hat = v / (1.0 - cfg.beta2 ** t)
    theta = theta - cfg.lr * m_hat / (np.sqrt(v_hat) + cfg.eps)
    return theta, AdamState(m=m, v=v, t=t, config=cfg)


def training_points(scene: ScatteringScene, config: PinnConfig, seed: int) -> TrainingPoints:
    """Draws the collocation points once and lays out the boundary points."""
    shell_min = config.shell_min if config.shell_min is not None else scene.a
    pde = random_shell(
        config.collocation_points,
        shell_min,
        config.shell_max,
        derive_seed(seed, SeedStream.COLLOCATION),
    )
    bc = fibonacci_sphere(config.boundary_points, scene.a)
    return TrainingPoints(pde=pde, bc=bc)


def train(
    scene: ScatteringScene,
    measurements: Measurements,
    config: PinnConfig,
    seed: int,
    epochs: Optional[int] = None,
    on_epoch: Optional[Callable[[LossReport], None]] = None,
) -> Tuple[MlpParams, List[LossReport]]:
    """Trains the PINN with full batch Adam.

    Every epoch evaluates the loss terms and gradient at the current
    parameters, records them, then takes one Adam step. The network
    initialization and the collocation points are derived from `seed`.

    Args:
        scene: The scene providing `k` and the sphere radius
        measurements: The normalized microphone data
        config: Architecture, optimizer, point and weight settings
        seed: The run seed
        epochs: Overrides `config.epochs`
        on_epoch: Called with every report

    Raises:
        NumericalError: If a loss or gradient becomes non-finite

    Returns:
        The trained parameters and one report per epoch
    """
    epochs = config.epochs if epochs is None else epochs
    if epochs < 1:
        raise DomainError(f"need at least one epoch, got {epochs}")

    weights = effective_weights(scene, config)
    arch = network_arch(scene, config)
    points = training_points(scene, config, seed)
    params = init_params(arch, derive_seed(seed, SeedStream.INIT))
    theta = params.flatten()
    state = AdamState.create(len(theta), config.optimizer)
    log.info(
        "Training PINN",
        epochs=epochs,
        parameters=len(theta),
        input_scale=arch.input_scale,
        weights=weights.as_tuple(),
        data=len(measurements),
        collocation=len(points.pde),
        boundary=len(points.bc),
    )

    reports: List[LossReport] = []
    for epoch in range(epochs):
        params = MlpParams.from_flat(arch, theta)
        terms, gradient = loss_and_gradient(
            params,
            measurements,
            points.pde,
            points.bc,
            scene.k,
            weights,
            config.reciprocal_coefficient,
        )
        assert gradient is not None
        report = LossReport(epoch, *terms, weighted_total=terms.weighted(weights))
        if not (np.isfinite(report.weighted_total) and np.all(np.isfinite(gradient))):
            raise NumericalError(f"training diverged at epoch {epoch}")
        reports.append(report)
        if on_epoch is not None:
            on_epoch(report)
        if epoch % config.log_every == 0 or epoch == epochs - 1:
            log.info(
                "Training progress",
                epoch=epoch,
                l_data=report.l_data,
                l_pde=report.l_pde,
                l_bc=report.l_bc,
                total=report.weighted_total,
            )
        theta, state = adam_step(state, theta, gradient)

    return MlpParams.from_flat(arch, theta), reports


def half_loss_epochs(reports: Sequence[LossReport]) -> Dict[str, Optional[int]]:
    """First epoch at which each loss term has fallen to half its initial value.

    Terms that start at zero or never halve map to `None`. Loss weights are
    constant during training, so the epochs hold for the weighted terms too.
    """
    result: Dict[str, Optional[int]] = {}
    for name in ("l_data", "l_pde", "l_bc"):
        values = np.array([getattr(report, name) for report in reports])
        if len(values) == 0 or values[0] <= 0:
            result[name] = None
            continue
        below = np.nonzero(values <= 0.5 * values[0])[0]
        result[name] = int(reports[below[0]].epoch) if len(below) else None
    return result
