#!/usr/bin/env python
# -*- coding: utf-8 -*-

from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import (
    Any,
    Iterator,
    Optional,
    Tuple,
)

import click
import numpy as np

from .artifacts import (
    read_checkpoint,
    read_measurements,
    read_points,
    read_run_scale,
    write_checkpoint,
    write_field,
    write_loss_log,
    write_measurements,
    write_pw_amplitudes,
    write_run_record,
    write_sh_coefficients,
    write_slice,
    write_sweep,
)
from .checks import (
    SUITES,
    run_checks,
)
from .config import (
    MAX_SEED,
    ArrayLayout,
    Method,
    Quadrature,
    SeedStream,
    Settings,
    configure_seed,
    derive_seed,
    load_settings,
)
from .errors import (
    ArtifactFormatError,
    ArtifactParseError,
    DomainError,
    MissingArtifactError,
    NumericalError,
    NumericalFailure,
)
from .evaluation import (
    FieldEstimator,
    GroundTruth,
    PinnEstimator,
    PwEstimator,
    ShEstimator,
    field_slice,
    radius_sweep,
)
from .field import (
    Measurements,
    add_noise,
    normalize,
    simulate_measurements,
)
from .geom import (
    fibonacci_sphere,
    mic_array_layout,
    mic_array_weights,
    sph_to_cart,
    sphere_grid,
)
from .logging import (
    configure_logging,
    get_logger,
)
from .model import LogLevel
from .pw_estimator import solve_amplitudes
from .sh_estimator import estimate_coeffs
from .train import train as train_pinn


__all__ = [
    "CliPath",
    "Info",
    "cli",
    "version",
    "simulate",
    "train",
    "estimate",
    "sweep",
    "slice_command",
    "verify",
]

logger = get_logger()

MEASUREMENTS_FILE = "measurements.csv"
RUN_RECORD_FILE = "simulation.yml"
CHECKPOINT_FILE = "pinn_checkpoint.txt"
LOSS_FILE = "loss.csv"
SWEEP_FILE = "sweep.csv"
SH_COEFFICIENTS_FILE = "sh_coefficients.csv"
PW_AMPLITUDES_FILE = "pw_amplitudes.csv"


class EnumChoice(click.Choice):
    """Click choice from an enum

    from https://github.com/pallets/click/issues/605#issuecomment-582574555
    """

    case_sensitive: bool
    use_value: bool

    def __init__(self, enum, case_sensitive=False, use_value=False):
        self.enum = enum
        self.use_value = use_value
        choices = [
            str(e.value) if use_value else e.name
            for e in self.enum.__members__.values()
        ]
        super().__init__(choices, case_sensitive)

    def convert(
        self,
        value: Any,
        param: Optional[click.Parameter] = None,
        ctx: Optional[click.Context] = None,
    ):
        if isinstance(value, Enum) and value in self.enum:
            return value
        result = super().convert(value, param, ctx)

        if self.use_value:
            return [e for e in self.enum if str(e.value) == result][0]

        return self.enum[result]


class CliPath(click.Path):
    """A Click path argument that returns a pathlib Path, not a string"""

    def convert(self, value, param, ctx):
        return Path(super().convert(value, param, ctx))


class Info:
    """An information object to pass data between CLI functions."""

    def __init__(self):  # Note: This object must have an empty constructor.
        """Create a new instance."""
        self.settings_path: Optional[Path] = None
        self.settings: Optional[Settings] = None
        self.seed: Optional[int] = None

    def context(self) -> Tuple[Settings, int]:
        assert self.settings is not None
        assert self.seed is not None
        return self.settings, self.seed


# pass_info is a decorator for functions that pass 'Info' objects.
#: pylint: disable=invalid-name
pass_info = click.make_pass_decorator(Info, ensure=True)


@contextmanager
def library_errors() -> Iterator[None]:
    """Translates library exceptions into CLI exceptions with exit codes."""
    try:
        yield
    except NumericalError as error:
        raise NumericalFailure(error)
    except ArtifactParseError as error:
        raise ArtifactFormatError(error)
    except DomainError as error:
        raise click.ClickException(str(error))


def require(path: Path, producer: str) -> Path:
    """Returns `path` if the file exists, raises an actionable error otherwise."""
    if not path.is_file():
        raise MissingArtifactError(path, producer)
    return path


def mic_positions(settings: Settings) -> np.ndarray:
    a = settings.scene.a
    if settings.array.layout == ArrayLayout.PENTAKIS:
        return mic_array_layout(a)
    return fibonacci_sphere(settings.array.count, a)


def simulate_array(settings: Settings, seed: int) -> Measurements:
    """Noisy, normalized microphone measurements of the configured scene."""
    measurements = simulate_measurements(settings.scene, mic_positions(settings))
    measurements = add_noise(
        measurements, settings.noise.snr_db, derive_seed(seed, SeedStream.NOISE)
    )
    return normalize(measurements)


def build_estimator(
    method: Method, settings: Settings, measurements: Measurements
) -> FieldEstimator:
    """Fits the selected estimator to the measurements and stores its artifact."""
    scene = settings.scene
    out = settings.out
    if method == Method.SH:
        weights = (
            mic_array_weights()
            if settings.sh.quadrature == Quadrature.DESIGN
            else None
        )
        coeffs = estimate_coeffs(
            measurements, settings.sh.order, scene.a, scene.k, weights
        )
        write_sh_coefficients(out / SH_COEFFICIENTS_FILE, coeffs)
        return ShEstimator(coeffs)
    if method == Method.PL:
        if settings.pw.directions is None:
            positions = measurements.positions
            directions = positions / np.linalg.norm(positions, axis=1, keepdims=True)
        else:
            directions = fibonacci_sphere(settings.pw.directions, 1.0)
        model = solve_amplitudes(
            measurements,
            directions,
            scene.k,
            scene.a,
            settings.pw.reg,
            settings.pw.order,
        )
        write_pw_amplitudes(out / PW_AMPLITUDES_FILE, model)
        return PwEstimator(model)
    return PinnEstimator(read_checkpoint(require(out / CHECKPOINT_FILE, "train")))


def load_measurements(settings: Settings) -> Measurements:
    return read_measurements(require(settings.out / MEASUREMENTS_FILE, "simulate"))


def load_scale(settings: Settings) -> float:
    return read_run_scale(require(settings.out / RUN_RECORD_FILE, "simulate"))


@click.group()
@click.option("--log-level", type=EnumChoice(LogLevel), help="The log level")
@click.option(
    "--seed",
    default=None,
    type=click.IntRange(0, MAX_SEED),
    help="Global seed for all random streams (noise, points, network init)",
)
@click.option(
    "--config",
    "-c",
    type=CliPath(dir_okay=False, readable=True),
    default="config.yml",
    show_default=True,
    help="The soundfield PINN settings file (YAML or JSON)",
)
@click.option(
    "--out",
    "-o",
    type=CliPath(file_okay=False),
    default=None,
    help="Output directory for all artifacts (overrides the config)",
)
@pass_info
def cli(
    info: Info,
    log_level: LogLevel,
    seed: Optional[int],
    config: Path,
    out: Optional[Path],
):
    """Estimate the sound field around a rigid sphere with SH, PL and PINN."""
    info.settings_path = config
    info.settings = load_settings(
        info.settings_path, log_level=log_level, seed=seed, out=out
    )

    # setup logging
    configure_logging(info.settings.log)

    # setup prngs
    info.seed = configure_seed(info.settings.seed)
    logger.info("Configured run seed", seed=info.seed)


@cli.command()
@pass_info
def version(info: Info):
    """Get the library version."""
    from .util import version_info

    click.echo(version_info(cli_info=info))


@cli.command()
@pass_info
def simulate(info: Info):
    """Simulate the noisy, normalized microphone measurements."""
    settings, seed = info.context()
    with library_errors():
        measurements = simulate_array(settings, seed)
        path = write_measurements(settings.out / MEASUREMENTS_FILE, measurements)
        write_run_record(
            settings.out / RUN_RECORD_FILE,
            {
                "seed": seed,
                "scale": float(measurements.scale),
                "k": settings.scene.k,
                "snr_db": measurements.snr_db,
            },
        )
    logger.info("Wrote measurements", path=str(path), rows=len(measurements))
    click.echo(f"scale: {measurements.scale:.17g}")
    click.echo(f"k: {settings.scene.k:.17g}")


@cli.command()
@click.option(
    "--epochs",
    type=click.IntRange(min=1),
    default=None,
    help="Number of training epochs (overrides the config)",
)
@click.option(
    "--data-only",
    is_flag=True,
    default=False,
    help="Train without the Helmholtz and boundary terms",
)
@pass_info
def train(info: Info, epochs: Optional[int], data_only: bool):
    """Train the PINN on the simulated measurements."""
    settings, seed = info.context()
    config = settings.pinn
    if data_only:
        config = config.copy(update={"data_only": True})
    with library_errors():
        measurements = load_measurements(settings)
        params, reports = train_pinn(
            settings.scene, measurements, config, seed, epochs=epochs
        )
        write_checkpoint(settings.out / CHECKPOINT_FILE, params)
        write_loss_log(settings.out / LOSS_FILE, reports)
    click.echo(f"final loss: {reports[-1].weighted_total:.17g}")


@cli.command()
@click.option(
    "--method",
    "-m",
    type=EnumChoice(Method, use_value=True),
    required=True,
    help="The estimator to evaluate",
)
@click.option(
    "--points",
    type=CliPath(dir_okay=False, exists=True),
    default=None,
    help="CSV file with x,y,z columns to evaluate at",
)
@click.option(
    "--radius",
    type=click.FloatRange(min=0, min_open=True),
    default=None,
    help="Radius of the evaluation grid (defaults to the slice radius)",
)
@click.option("--n-theta", type=click.IntRange(min=2), default=None)
@click.option("--n-phi", type=click.IntRange(min=2), default=None)
@pass_info
def estimate(
    info: Info,
    method: Method,
    points: Optional[Path],
    radius: Optional[float],
    n_theta: Optional[int],
    n_phi: Optional[int],
):
    """Estimate the pressure at a point set or on a spherical grid."""
    settings, _ = info.context()
    grid = settings.evaluation.slice
    with library_errors():
        if points is not None:
            cart = read_points(points)
        else:
            cart = sph_to_cart(
                sphere_grid(
                    radius if radius is not None else grid.radius,
                    n_theta or grid.n_theta,
                    n_phi or grid.n_phi,
                )
            )
        estimator = build_estimator(method, settings, load_measurements(settings))
        path = write_field(
            settings.out / f"estimate_{method.value}.csv",
            cart,
            estimator.pressure(cart),
        )
    logger.info("Wrote estimate", method=method.value, path=str(path), rows=len(cart))


@cli.command()
@pass_info
def sweep(info: Info):
    """NMSE of all three estimators as a function of radius."""
    settings, seed = info.context()
    with library_errors():
        measurements = load_measurements(settings)
        truth = GroundTruth(settings.scene, load_scale(settings))
        estimators = {
            method.value: build_estimator(method, settings, measurements)
            for method in Method
        }
        table = radius_sweep(
            truth,
            estimators,
            settings.evaluation.radii,
            settings.evaluation.points_per_radius,
            derive_seed(seed, SeedStream.SWEEP),
        )
        write_sweep(settings.out / SWEEP_FILE, table)
    for row in table.rows():
        click.echo(",".join(f"{value:.6g}" for value in row))


@cli.command(name="slice")
@click.option(
    "--method",
    "-m",
    type=EnumChoice(Method, use_value=True),
    required=True,
    help="The estimator to export",
)
@pass_info
def slice_command(info: Info, method: Method):
    """Export the estimated field and its error on the configured sphere."""
    settings, seed = info.context()
    grid = settings.evaluation.slice
    with library_errors():
        measurements = load_measurements(settings)
        truth = GroundTruth(settings.scene, load_scale(settings))
        estimator = build_estimator(method, settings, measurements)
        result = field_slice(estimator, truth, grid.radius, grid.n_theta, grid.n_phi)
        path = write_slice(settings.out / f"slice_{method.value}.csv", result)
    logger.info("Wrote field slice", method=method.value, path=str(path))


@cli.command()
@click.option(
    "--suite",
    "-s",
    type=click.Choice(list(SUITES)),
    multiple=True,
    help="Check suite to run (repeatable, all by default)",
)
@pass_info
def verify(info: Info, suite: Tuple[str, ...]):
    """Run the special function, simulator and autodiff checks."""
    settings, seed = info.context()
    with library_errors():
        results = run_checks(settings.scene, seed, suite or None)
    failed = [result for result in results if not result.passed]
    for result in results:
        status = "ok" if result.passed else "FAIL"
        click.echo(
            f"{status:>4} {result.suite}/{result.name}: "
            f"worst={result.worst:.3e} tolerance={result.tolerance:.0e}"
        )
    if failed:
        raise NumericalFailure(NumericalError(f"{len(failed)} check(s) failed"))
