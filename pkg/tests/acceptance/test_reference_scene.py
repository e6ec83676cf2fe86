"""End to end runs on the default two source scene with the full training budget.

These runs take minutes, run them with `pytest -m slow`.
"""
from functools import lru_cache
from typing import (
    List,
    NamedTuple,
)

import numpy as np
import pytest

from soundfield.pinn.config import (
    SeedStream,
    Settings,
    derive_seed,
)
from soundfield.pinn.evaluation import (
    GroundTruth,
    PinnEstimator,
    PwEstimator,
    ShEstimator,
    SweepTable,
    radius_sweep,
)
from soundfield.pinn.field import (
    add_noise,
    normalize,
    simulate_measurements,
)
from soundfield.pinn.geom import mic_array_layout
from soundfield.pinn.pw_estimator import solve_amplitudes
from soundfield.pinn.sh_estimator import estimate_coeffs
from soundfield.pinn.train import (
    LossReport,
    half_loss_epochs,
    train,
)


pytestmark = pytest.mark.slow

SEEDS = (0, 1, 2)
OUTER_RADII = (0.06, 0.072, 0.08, 0.09, 0.1)


class Run(NamedTuple):
    table: SweepTable
    reports: List[LossReport]


@lru_cache(maxsize=None)
def reference_run(seed: int) -> Run:
    settings = Settings(seed=seed)
    scene = settings.scene
    mics = mic_array_layout(scene.a)
    measurements = normalize(
        add_noise(
            simulate_measurements(scene, mics),
            settings.noise.snr_db,
            derive_seed(seed, SeedStream.NOISE),
        )
    )
    coeffs = estimate_coeffs(measurements, settings.sh.order, scene.a, scene.k)
    plane_waves = solve_amplitudes(
        measurements, mics / scene.a, scene.k, scene.a, settings.pw.reg
    )
    params, reports = train(scene, measurements, settings.pinn, seed)
    table = radius_sweep(
        GroundTruth(scene, measurements.scale),
        {
            "sh": ShEstimator(coeffs),
            "pl": PwEstimator(plane_waves),
            "pinn": PinnEstimator(params),
        },
        (scene.a,) + OUTER_RADII,
        settings.evaluation.points_per_radius,
        derive_seed(seed, SeedStream.SWEEP),
    )
    return Run(table, reports)


@pytest.mark.xfail(
    strict=True,
    reason="the trained network stays 2 to 8 dB behind the better baseline",
)
def test_pinn_beats_both_baselines_away_from_sphere():
    wins = 0
    for seed in SEEDS:
        columns = reference_run(seed).table.columns
        margin = np.minimum(columns["sh"], columns["pl"])[1:] - columns["pinn"][1:]
        wins += bool(np.all(margin >= 5.0))

    assert wins >= 2


@pytest.mark.parametrize("seed", SEEDS)
def test_pinn_reconstructs_the_field(seed):
    columns = reference_run(seed).table.columns

    assert np.all(columns["pinn"] <= -10.0)


@pytest.mark.xfail(
    strict=True,
    reason="on the sphere SH reaches -30 dB, the network -20 dB, plane waves -10 dB",
)
def test_methods_agree_on_sphere():
    columns = reference_run(SEEDS[0]).table.columns
    on_sphere = [columns[name][0] for name in ("sh", "pl", "pinn")]

    assert max(on_sphere) - min(on_sphere) <= 6.0


def test_physics_terms_halve_before_data_term():
    run = reference_run(SEEDS[0])
    epochs = half_loss_epochs(run.reports)

    assert epochs["l_data"] is not None
    assert epochs["l_pde"] is not None and epochs["l_pde"] < epochs["l_data"]
    assert epochs["l_bc"] is not None and epochs["l_bc"] < epochs["l_data"]


def test_weighted_loss_falls_over_most_windows():
    totals = np.array([r.weighted_total for r in reference_run(SEEDS[0]).reports])
    falling = totals[500:] <= totals[:-500]

    assert len(falling) == 9500
    assert np.mean(falling) >= 0.95
