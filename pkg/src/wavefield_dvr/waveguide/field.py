from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid

from ..errors import DimensionError, DomainError, WindowError
from .environment import EnvironmentModel
from .modes import DEFAULT_MODE_SET, DepthGrid, ModeSet, group_speeds, solve_modes

__all__ = [
    "BroadbandField",
    "CwField",
    "PulseField",
    "SignalSpectrum",
    "broadband_field",
    "check_window",
    "cw_field",
    "default_time_window",
    "gaussian_spectrum",
    "pulse_field",
    "required_n_freq",
    "synthesize_pulse",
]

logger = logging.getLogger(__name__)

DEFAULT_N_FREQ = 512
DEFAULT_N_TIME = 2048
MIN_N_FREQ = 64
SPECTRUM_HALF_WIDTH = 4.0
FREQUENCY_FLOOR_HZ = 1.0
ENVELOPE_MARGIN = 6.0
# relative amplitude below which a spectral component or mode is left out of the window
ARRIVAL_FLOOR = 1e-2
WINDOW_SAMPLES = 16


def _interpolate_complex(x: np.ndarray, xp: np.ndarray, fp: np.ndarray) -> np.ndarray:
    return np.interp(x, xp, fp.real) + 1j * np.interp(x, xp, fp.imag)


@dataclass(frozen=True, eq=False)
class CwField:
    """Complex pressure profile Psi(r, z) of a tonal source at one range."""

    frequency: float
    range: float
    source_depth: float
    grid: DepthGrid
    profile: np.ndarray
    empty: bool = False

    @property
    def depths(self) -> np.ndarray:
        return self.grid.depths

    @property
    def real(self) -> np.ndarray:
        return self.profile.real

    def at(self, z: ArrayLike) -> np.ndarray:
        depths = np.asarray(z, dtype=float)
        if np.any(depths < 0) or np.any(depths > self.grid.z_max * (1 + 1e-12)):
            raise DomainError(f"Depth outside field grid [0, {self.grid.z_max}] m")
        return _interpolate_complex(depths, self.depths, self.profile)


def _check_geometry(env: EnvironmentModel, z_s: float, r: float) -> None:
    if not r > 0:
        raise DomainError(f"Range must be positive, got {r}")
    if not 0.0 < z_s < env.h:
        raise DomainError(f"Source depth must lie inside the water column (0, {env.h}) m, got {z_s}")


def _modal_sum(modeset: ModeSet, z_s: float, r: float, grid: DepthGrid) -> np.ndarray:
    if modeset.mode_count == 0:
        return np.zeros(grid.n_points, dtype=complex)
    if grid == modeset.grid:
        shapes = modeset.psi
    else:
        shapes = modeset.values_at(grid.depths)
    source = modeset.values_at(z_s)
    k = modeset.k_r
    amplitudes = np.exp(1j * (k + 1j * modeset.alpha) * r) * source / np.sqrt(k)
    prefactor = 1j / (2.0 * math.sqrt(2.0 * math.pi * r)) * np.exp(-1j * math.pi / 4.0)
    return prefactor * (amplitudes @ shapes)


def cw_field(
    env: EnvironmentModel,
    modeset: ModeSet,
    z_s: float,
    r: float,
    grid: Optional[DepthGrid] = None,
) -> CwField:
    """Far-field modal sum at range ``r`` for a source at depth ``z_s``."""

    _check_geometry(env, z_s, r)
    grid = grid or modeset.grid
    if modeset.mode_count == 0:
        logger.warning("No propagating modes at %.2f Hz; field is identically zero", modeset.frequency)
    return CwField(
        frequency=modeset.frequency,
        range=r,
        source_depth=z_s,
        grid=grid,
        profile=_modal_sum(modeset, z_s, r, grid),
        empty=modeset.mode_count == 0,
    )


@dataclass(frozen=True)
class SignalSpectrum:
    """Gaussian source spectrum s(Omega) = T/sqrt(2 pi) exp(-(Omega - Omega_c)^2 T^2 / 2)."""

    omega_c: float
    delta_omega: float

    @property
    def duration(self) -> float:
        return math.sqrt(2.0 * math.pi) / self.delta_omega

    @property
    def center_frequency(self) -> float:
        return self.omega_c / (2.0 * math.pi)

    def __call__(self, omega: ArrayLike) -> np.ndarray:
        T = self.duration
        return T / math.sqrt(2.0 * math.pi) * np.exp(-((np.asarray(omega) - self.omega_c) ** 2) * T**2 / 2.0)


def gaussian_spectrum(omega_c: float, *, relative_bandwidth: float = 0.5) -> SignalSpectrum:
    if not omega_c > 0:
        raise DomainError(f"Center angular frequency must be positive, got {omega_c}")
    if not relative_bandwidth > 0:
        raise DomainError("relative_bandwidth must be positive")
    return SignalSpectrum(omega_c=omega_c, delta_omega=relative_bandwidth * omega_c)


@dataclass(frozen=True, eq=False)
class BroadbandField:
    """Per-frequency CW profiles with quadrature weights and source spectrum values."""

    omegas: np.ndarray
    weights: np.ndarray
    spectrum_values: np.ndarray
    grid: DepthGrid
    profiles: np.ndarray
    range: float
    source_depth: float

    def with_profiles(self, profiles: np.ndarray, grid: Optional[DepthGrid] = None) -> "BroadbandField":
        grid = grid or self.grid
        if profiles.shape != (self.omegas.size, grid.n_points):
            raise DimensionError(
                f"Profiles shape {profiles.shape} does not match "
                f"({self.omegas.size}, {grid.n_points})"
            )
        return BroadbandField(
            omegas=self.omegas,
            weights=self.weights,
            spectrum_values=self.spectrum_values,
            grid=grid,
            profiles=profiles,
            range=self.range,
            source_depth=self.source_depth,
        )


@dataclass(frozen=True, eq=False)
class PulseField:
    """Transient field Psi~(t, z) with ``values`` shaped (n_time, n_depth).

    ``broadband`` is the frequency-domain field the pulse was synthesised from, when known.
    """

    time_axis: np.ndarray
    grid: DepthGrid
    values: np.ndarray
    broadband: Optional[BroadbandField] = None

    def __post_init__(self) -> None:
        if np.any(np.diff(self.time_axis) <= 0):
            raise DimensionError("time_axis must be strictly increasing")
        if self.values.shape != (self.time_axis.size, self.grid.n_points):
            raise DimensionError(
                f"Pulse values shape {self.values.shape} does not match axes "
                f"({self.time_axis.size}, {self.grid.n_points})"
            )

    @property
    def depths(self) -> np.ndarray:
        return self.grid.depths

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    def power(self) -> np.ndarray:
        """Depth-integrated |Psi~|^2 per time sample."""

        return trapezoid(np.abs(self.values) ** 2, self.depths, axis=1)


def _frequency_axis(spectrum: SignalSpectrum, n_freq: int) -> tuple[np.ndarray, np.ndarray]:
    low = max(spectrum.omega_c - SPECTRUM_HALF_WIDTH * spectrum.delta_omega, 2.0 * math.pi * FREQUENCY_FLOOR_HZ)
    high = spectrum.omega_c + SPECTRUM_HALF_WIDTH * spectrum.delta_omega
    omegas = np.linspace(low, high, n_freq)
    weights = np.full(n_freq, omegas[1] - omegas[0])
    weights[[0, -1]] *= 0.5
    return omegas, weights


def required_n_freq(spectrum: SignalSpectrum, n_freq: int, window: Sequence[float]) -> int:
    """Smallest count whose synthesis period 2 pi / d_omega exceeds the window by a quarter."""

    omegas, _ = _frequency_axis(spectrum, max(n_freq, MIN_N_FREQ))
    span = omegas[-1] - omegas[0]
    duration = float(window[1] - window[0])
    needed = math.ceil(span * 1.25 * duration / (2.0 * math.pi)) + 1
    return max(n_freq, MIN_N_FREQ, needed)


def broadband_field(
    env: EnvironmentModel,
    z_s: float,
    r: float,
    grid: DepthGrid,
    spectrum: SignalSpectrum,
    *,
    n_freq: int = DEFAULT_N_FREQ,
    output_grid: Optional[DepthGrid] = None,
    workers: Optional[int] = None,
    mode_set: str = DEFAULT_MODE_SET,
) -> BroadbandField:
    """CW profiles over Omega_c +/- 4 Delta_Omega, modes re-solved on ``grid`` per frequency."""

    _check_geometry(env, z_s, r)
    if n_freq < MIN_N_FREQ:
        raise DomainError(f"n_freq must be at least {MIN_N_FREQ}, got {n_freq}")
    output_grid = output_grid or grid
    omegas, weights = _frequency_axis(spectrum, n_freq)

    def profile(omega: float) -> np.ndarray:
        modeset = solve_modes(env, omega / (2.0 * math.pi), grid, mode_set=mode_set)
        return _modal_sum(modeset, z_s, r, output_grid)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            profiles = list(executor.map(profile, omegas))
    else:
        profiles = [profile(omega) for omega in omegas]
    logger.debug("Computed %d CW profiles for f_c=%.1f Hz", n_freq, spectrum.center_frequency)
    return BroadbandField(
        omegas=omegas,
        weights=weights,
        spectrum_values=spectrum(omegas),
        grid=output_grid,
        profiles=np.array(profiles),
        range=r,
        source_depth=z_s,
    )


def synthesize_pulse(field: BroadbandField, time_axis: ArrayLike) -> PulseField:
    """Psi~(t, z) = sum_k w_k s(Omega_k) Psi(r, z, Omega_k) exp(-i Omega_k t)."""

    times = np.asarray(time_axis, dtype=float)
    kernel = np.exp(-1j * np.outer(times, field.omegas)) * (field.weights * field.spectrum_values)
    return PulseField(time_axis=times, grid=field.grid, values=kernel @ field.profiles, broadband=field)


def default_time_window(
    env: EnvironmentModel,
    z_s: float,
    r: float,
    grid: DepthGrid,
    spectrum: SignalSpectrum,
    *,
    mode_set: str = DEFAULT_MODE_SET,
) -> tuple[float, float]:
    """Window bracketing the modal arrivals r / v_g that carry energy to range ``r``.

    Group speeds are sampled across the part of the band where the source spectrum is above
    ``ARRIVAL_FLOOR`` of its peak. A mode counts when its spectral weight times
    exp(-alpha r) |psi(z_s)| / sqrt(k_r) reaches ``ARRIVAL_FLOOR`` of the strongest one.
    No mode travels faster than the fastest sound speed, which bounds the start.
    """

    _check_geometry(env, z_s, r)
    reach = math.sqrt(2.0 * math.log(1.0 / ARRIVAL_FLOOR)) / spectrum.duration
    low = max(spectrum.omega_c - reach, 2.0 * math.pi * FREQUENCY_FLOOR_HZ)
    omegas = np.linspace(low, spectrum.omega_c + reach, WINDOW_SAMPLES)
    peak = float(spectrum(spectrum.omega_c))

    speeds: list[np.ndarray] = []
    strengths: list[np.ndarray] = []
    for omega in omegas:
        f = omega / (2.0 * math.pi)
        modeset = solve_modes(env, f, grid, mode_set=mode_set)
        if modeset.mode_count == 0:
            continue
        values = group_speeds(env, f, grid, mode_set=mode_set)
        weight = float(spectrum(omega)) / peak
        carried = (
            weight
            * np.exp(-modeset.alpha * r)
            * np.abs(modeset.values_at(z_s))
            / np.sqrt(modeset.k_r)
        )
        usable = np.isfinite(values) & (values > 0)
        speeds.append(values[usable])
        strengths.append(carried[usable])

    fastest = max(env.c_b, env.c0)
    margin = ENVELOPE_MARGIN * spectrum.duration
    start = max(0.0, r / fastest - margin)
    all_speeds = np.concatenate(speeds) if speeds else np.zeros(0)
    all_strengths = np.concatenate(strengths) if strengths else np.zeros(0)
    if not all_speeds.size:
        return start, 1.02 * r / env.c_min + margin
    slowest = float(np.min(all_speeds[all_strengths >= ARRIVAL_FLOOR * np.max(all_strengths)]))
    logger.debug("Arrival window for r=%.0f m spans group speeds down to %.1f m/s", r, slowest)
    return start, 1.02 * r / slowest + margin


def check_window(pulse: PulseField, tolerance: float) -> None:
    power = pulse.power()
    peak = float(np.max(power))
    if peak == 0.0:
        return
    edge = max(1, power.size // 50)
    leak = max(float(np.max(power[:edge])), float(np.max(power[-edge:]))) / peak
    if leak > tolerance:
        logger.error("Pulse energy at window edges: %.3g of peak", leak)
        raise WindowError(
            f"Time window clips the arrival pattern (edge power {leak:.3g} of peak)"
        )


def pulse_field(
    env: EnvironmentModel,
    z_s: float,
    r: float,
    grid: DepthGrid,
    spectrum: SignalSpectrum,
    time_window: Optional[Sequence[float]] = None,
    n_freq: int = DEFAULT_N_FREQ,
    n_time: int = DEFAULT_N_TIME,
    *,
    output_grid: Optional[DepthGrid] = None,
    workers: Optional[int] = None,
    edge_tolerance: float = 1e-3,
    mode_set: str = DEFAULT_MODE_SET,
) -> PulseField:
    """Exact pulse at range ``r``; the result keeps its broadband field in ``broadband``."""

    if time_window:
        window = tuple(time_window)
    else:
        window = default_time_window(env, z_s, r, grid, spectrum, mode_set=mode_set)
    if len(window) != 2 or not window[1] > window[0]:
        raise DomainError(f"Time window must be an increasing pair, got {window}")
    required = required_n_freq(spectrum, n_freq, window)
    if required > n_freq:
        logger.info(
            "Raising n_freq from %d to %d for the %.3f s window", n_freq, required, window[1] - window[0]
        )
    broadband = broadband_field(
        env,
        z_s,
        r,
        grid,
        spectrum,
        n_freq=required,
        output_grid=output_grid,
        workers=workers,
        mode_set=mode_set,
    )
    pulse = synthesize_pulse(broadband, np.linspace(window[0], window[1], n_time))
    check_window(pulse, edge_tolerance)
    return pulse
