import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from wavefield_dvr.errors import DimensionError, DomainError, WindowError
from wavefield_dvr.waveguide.environment import EnvironmentModel
from wavefield_dvr.waveguide.field import (
    BroadbandField,
    CwField,
    PulseField,
    broadband_field,
    check_window,
    default_time_window,
    cw_field,
    gaussian_spectrum,
    pulse_field,
    required_n_freq,
    synthesize_pulse,
)
from wavefield_dvr.waveguide.modes import DepthGrid, make_grid, solve_modes


@pytest.fixture(scope="module")
def env() -> EnvironmentModel:
    return EnvironmentModel()


@pytest.fixture(scope="module")
def modes_100hz(env: EnvironmentModel):
    return solve_modes(env, 100.0)


def test_single_mode_field_matches_modal_formula(env: EnvironmentModel, modes_100hz) -> None:
    single = modes_100hz.subset([0])
    z_s, r = 99.0, 5000.0
    field = cw_field(env, single, z_s, r)

    k = single.k_r[0]
    alpha = single.alpha[0]
    prefactor = 1j / (2.0 * math.sqrt(2.0 * math.pi * r)) * np.exp(-1j * math.pi / 4.0)
    expected = (
        prefactor
        * np.exp(1j * (k + 1j * alpha) * r)
        / math.sqrt(k)
        * single.values_at(z_s)[0]
        * single.psi[0]
    )

    assert np.allclose(field.profile, expected, rtol=1e-12, atol=0.0)
    assert field.profile[0] == 0.0


def test_field_is_sum_of_modal_contributions(env: EnvironmentModel, modes_100hz) -> None:
    full = cw_field(env, modes_100hz, 50.0, 2000.0).profile
    parts = sum(
        cw_field(env, modes_100hz.subset([m]), 50.0, 2000.0).profile
        for m in range(modes_100hz.mode_count)
    )

    assert np.allclose(full, parts, atol=1e-14)


def test_field_amplitude_decays_with_range(env: EnvironmentModel, modes_100hz) -> None:
    near = cw_field(env, modes_100hz, 99.0, 1000.0)
    far = cw_field(env, modes_100hz, 99.0, 40000.0)

    assert np.linalg.norm(far.profile) < np.linalg.norm(near.profile)


def test_empty_mode_set_gives_zero_field(env: EnvironmentModel, modes_100hz) -> None:
    field = cw_field(env, modes_100hz.subset([]), 50.0, 1000.0)

    assert field.empty
    assert np.all(field.profile == 0.0)


@pytest.mark.parametrize(("z_s", "r"), [(0.0, 1000.0), (100.0, 1000.0), (50.0, 0.0), (50.0, -5.0)])
def test_invalid_geometry_is_rejected(env: EnvironmentModel, modes_100hz, z_s: float, r: float) -> None:
    with pytest.raises(DomainError):
        cw_field(env, modes_100hz, z_s, r)


def test_field_interpolation_checks_depth(env: EnvironmentModel, modes_100hz) -> None:
    field = cw_field(env, modes_100hz, 50.0, 1000.0)

    assert field.at(field.depths[7]) == pytest.approx(field.profile[7])
    with pytest.raises(DomainError):
        field.at(np.array([10.0, 400.0]))


def test_gaussian_spectrum_is_normalised() -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 240.0)
    omegas = np.linspace(spectrum.omega_c - 6 * spectrum.delta_omega, spectrum.omega_c + 6 * spectrum.delta_omega, 4001)
    omegas = omegas[omegas > 0]

    assert spectrum.delta_omega == pytest.approx(spectrum.omega_c / 2.0)
    assert spectrum.duration == pytest.approx(math.sqrt(2.0 * math.pi) / spectrum.delta_omega)
    assert trapezoid(spectrum(omegas), omegas) == pytest.approx(1.0, abs=1e-6)


def test_synthesis_of_frequency_independent_profile_factorises() -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 100.0)
    grid = DepthGrid(z_max=100.0, n_points=11)
    omegas = np.linspace(2.0 * math.pi, spectrum.omega_c + 4 * spectrum.delta_omega, 400)
    weights = np.full(omegas.size, omegas[1] - omegas[0])
    weights[[0, -1]] *= 0.5
    profile = np.sin(math.pi * grid.depths / 200.0).astype(complex)
    field = BroadbandField(
        omegas=omegas,
        weights=weights,
        spectrum_values=spectrum(omegas),
        grid=grid,
        profiles=np.tile(profile, (omegas.size, 1)),
        range=1000.0,
        source_depth=50.0,
    )

    pulse = synthesize_pulse(field, np.linspace(-0.05, 0.05, 201))

    envelope = pulse.values[:, -1] / profile[-1]
    assert np.allclose(pulse.values, np.outer(envelope, profile))
    assert abs(envelope[100]) == pytest.approx(1.0, abs=1e-3)


def test_pulse_field_validates_axes() -> None:
    grid = DepthGrid(z_max=100.0, n_points=11)
    with pytest.raises(DimensionError):
        PulseField(time_axis=np.linspace(0, 1, 5), grid=grid, values=np.zeros((5, 10), dtype=complex))
    with pytest.raises(DimensionError):
        PulseField(time_axis=np.array([0.0, 0.0, 1.0]), grid=grid, values=np.zeros((3, 11), dtype=complex))


def test_check_window_flags_energy_at_edges() -> None:
    grid = DepthGrid(z_max=100.0, n_points=11)
    times = np.linspace(0.0, 1.0, 501)
    centred = np.exp(-((times - 0.5) / 0.02) ** 2)[:, None] * np.ones(11)
    check_window(PulseField(time_axis=times, grid=grid, values=centred.astype(complex)), 1e-3)

    flat = np.ones((501, 11), dtype=complex)
    with pytest.raises(WindowError):
        check_window(PulseField(time_axis=times, grid=grid, values=flat), 1e-3)


def test_required_n_freq_grows_with_window() -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 240.0)

    short = required_n_freq(spectrum, 64, (0.0, 0.1))
    long = required_n_freq(spectrum, 64, (0.0, 2.0))
    assert short >= 64
    assert long > short
    # lower band edge sits on the 1 Hz floor
    span = spectrum.omega_c + 4.0 * spectrum.delta_omega - 2.0 * math.pi
    assert 2.0 * math.pi * (long - 1) / span >= 1.25 * 2.0


def test_broadband_field_is_independent_of_worker_count(env: EnvironmentModel) -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 40.0)
    grid = make_grid(env, 120.0)

    serial = broadband_field(env, 99.0, 5000.0, grid, spectrum, n_freq=64)
    threaded = broadband_field(env, 99.0, 5000.0, grid, spectrum, n_freq=64, workers=4)

    assert serial.profiles.shape == (64, grid.n_points)
    assert np.array_equal(serial.profiles, threaded.profiles)
    assert serial.omegas[0] >= 2.0 * math.pi


def test_pulse_field_peaks_near_water_travel_time(env: EnvironmentModel) -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 40.0)
    grid = make_grid(env, 120.0)
    r = 2000.0

    pulse = pulse_field(
        env,
        99.0,
        r,
        grid,
        spectrum,
        n_freq=64,
        n_time=256,
        output_grid=grid.truncated(env.h),
        workers=2,
        mode_set="trapped",
    )

    assert pulse.values.shape == (256, grid.truncated(env.h).n_points)
    peak_time = pulse.time_axis[np.argmax(pulse.power())]
    assert r / 1700.0 < peak_time < r / 1200.0
    assert pulse.broadband is not None
    assert pulse.broadband.omegas.size >= 64
    assert pulse.broadband.grid.n_points == pulse.grid.n_points


def test_default_window_brackets_trapped_arrivals(env: EnvironmentModel) -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 100.0)
    r = 10000.0
    start, end = default_time_window(env, 99.0, r, make_grid(env, 300.0), spectrum, mode_set="trapped")

    assert 0.0 <= start < r / env.c_b
    assert end > r / env.c_min + spectrum.duration


def test_lossless_single_mode_spreads_cylindrically() -> None:
    lossless = EnvironmentModel(att_coeff=0.0)
    single = solve_modes(lossless, 100.0).subset([0])
    near = cw_field(lossless, single, 50.0, 1000.0).profile
    far = cw_field(lossless, single, 50.0, 4000.0).profile

    assert single.alpha[0] == 0.0
    assert np.linalg.norm(near) / np.linalg.norm(far) == pytest.approx(2.0, rel=1e-12)


def test_range_weighted_energy_decreases_with_range(env: EnvironmentModel, modes_100hz) -> None:
    ranges = np.array([1000.0, 2000.0, 5000.0, 10000.0, 20000.0])
    energy = np.array(
        [
            np.sum(modes_100hz.weights * np.abs(cw_field(env, modes_100hz, 50.0, r).profile) ** 2)
            for r in ranges
        ]
    )

    assert np.all(np.diff(energy) < 0)
    assert np.all(np.diff(ranges * energy) < 0)


def test_narrowband_pulse_matches_cw_profile(env: EnvironmentModel) -> None:
    f, z_s, r = 100.0, 50.0, 2000.0
    grid = make_grid(env, 101.0)
    spectrum = gaussian_spectrum(2.0 * math.pi * f, relative_bandwidth=0.002)

    pulse = pulse_field(
        env, z_s, r, grid, spectrum, time_window=(-8.0, 10.0), n_freq=64, n_time=361, mode_set="trapped"
    )
    snapshot = pulse.values[np.argmax(pulse.power())]
    cw = cw_field(env, solve_modes(env, f, grid, mode_set="trapped"), z_s, r).profile

    overlap = abs(trapezoid(np.conj(cw) * snapshot, grid.depths)) ** 2
    norms = trapezoid(np.abs(cw) ** 2, grid.depths) * trapezoid(np.abs(snapshot) ** 2, grid.depths)
    assert overlap / norms > 0.99


@pytest.mark.slow
def test_pulse_converges_in_frequency_count(env: EnvironmentModel) -> None:
    spectrum = gaussian_spectrum(2.0 * math.pi * 120.0, relative_bandwidth=0.2)
    grid = make_grid(env, 220.0)
    r = 10000.0
    window = default_time_window(env, 99.0, r, grid, spectrum, mode_set="trapped")
    n_freq = required_n_freq(spectrum, 64, window)
    options = dict(output_grid=grid.truncated(env.h), workers=4, mode_set="trapped")

    coarse = pulse_field(env, 99.0, r, grid, spectrum, window, n_freq, 512, **options)
    fine = pulse_field(env, 99.0, r, grid, spectrum, window, 2 * n_freq, 512, **options)

    change = np.linalg.norm(fine.values - coarse.values) / np.linalg.norm(fine.values)
    assert change < 1e-4
