from __future__ import annotations

import logging
import math
from typing import Any, Sequence

import numpy as np

from ..errors import ConfigError
from ..reconstruction.dvr import spacing_hydrophone_count
from ..waveguide.environment import EnvironmentModel
from ..waveguide.modes import MODE_SETS
from . import ArrayConfig, ExperimentConfig, NoiseConfig, PulseConfig, SweepConfig

logger = logging.getLogger(__name__)

SWEEP_KINDS = ("frequency", "spacing")


def _fail(message: str) -> None:
    logger.error("Invalid experiment config: %s", message)
    raise ConfigError(message)


def _number(value: Any, path: str, *, positive: bool = False, integer: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(f"{path} must be numeric, got {value!r}")
    if not math.isfinite(value):
        _fail(f"{path} must be finite")
    if integer and int(value) != value:
        _fail(f"{path} must be an integer, got {value!r}")
    if positive and value <= 0:
        _fail(f"{path} must be positive, got {value!r}")
    return float(value)


def _list(values: Any, path: str) -> Sequence[Any]:
    if not isinstance(values, (list, tuple)):
        _fail(f"{path} must be a list, got {values!r}")
    return values


def _ascending(values: Any, path: str, *, positive: bool = True) -> list[float]:
    if not _list(values, path):
        _fail(f"{path} must be a non-empty list")
    numbers = [_number(value, f"{path}[{index}]", positive=positive) for index, value in enumerate(values)]
    if np.any(np.diff(numbers) <= 0):
        _fail(f"{path} must be strictly ascending")
    return numbers


def _check_spacings(spacings: Sequence[float], path: str, env: EnvironmentModel) -> None:
    for index, dz in enumerate(spacings):
        if spacing_hydrophone_count(dz, env.L, env.h) < 1:
            _fail(f"{path}[{index}] = {dz} m leaves no hydrophone inside the water column (h={env.h} m)")


def _require_one_layout(array: ArrayConfig, env: EnvironmentModel) -> None:
    chosen = [
        name
        for name, present in (
            ("hydrophones", array.hydrophones is not None),
            ("spacing", array.spacing is not None),
            ("j_max", array.j_max is not None or array.L_eff is not None),
        )
        if present
    ]
    if len(chosen) != 1:
        _fail("array needs exactly one of array.hydrophones, array.spacing or array.j_max + array.L_eff")
    if array.hydrophones is not None:
        _number(array.hydrophones, "array.hydrophones", positive=True, integer=True)
    if array.spacing is not None:
        spacing = _number(array.spacing, "array.spacing", positive=True)
        if spacing_hydrophone_count(spacing, env.L, env.h) < 1:
            _fail(f"array.spacing = {spacing} m leaves no hydrophone inside the water column")
    if chosen == ["j_max"]:
        if array.j_max is None or array.L_eff is None:
            _fail("array.j_max and array.L_eff must be given together")
        _number(array.j_max, "array.j_max", positive=True, integer=True)
        _number(array.L_eff, "array.L_eff", positive=True)


def _validate_sweep(sweep: SweepConfig, env: EnvironmentModel) -> None:
    if not isinstance(sweep.kind, str) or sweep.kind not in SWEEP_KINDS:
        _fail(f"sweep.kind must be one of {', '.join(SWEEP_KINDS)}, got {sweep.kind!r}")
    if sweep.values is not None:
        points = _ascending(sweep.values, "sweep.values")
    else:
        start = _number(sweep.start, "sweep.start", positive=True)
        stop = _number(sweep.stop, "sweep.stop", positive=True)
        _number(sweep.step, "sweep.step", positive=True)
        if stop < start:
            _fail("sweep.stop must not be below sweep.start")
        points = [float(value) for value in sweep.points()]
    if sweep.kind == "spacing":
        _check_spacings(points, "sweep.values" if sweep.values is not None else "sweep points", env)


def _validate_noise(noise: NoiseConfig) -> None:
    for index, value in enumerate(_list(noise.snr_db, "noise.snr_db")):
        _number(value, f"noise.snr_db[{index}]")
    if _number(noise.varsigma, "noise.varsigma") < 0:
        _fail("noise.varsigma must be non-negative")
    _number(noise.realizations, "noise.realizations", positive=True, integer=True)
    _number(noise.trials, "noise.trials", positive=True, integer=True)
    if not isinstance(noise.complex_noise, bool):
        _fail("noise.complex_noise must be true or false")
    if noise.seed is None:
        if noise.enabled:
            _fail("noise.seed is required when noise or displacement is enabled")
    else:
        if _number(noise.seed, "noise.seed", integer=True) < 0:
            _fail("noise.seed must be non-negative")


def _validate_pulse(pulse: PulseConfig, env: EnvironmentModel) -> None:
    _ascending(pulse.center_frequencies, "pulse.center_frequencies")
    _check_spacings(_ascending(pulse.spacings, "pulse.spacings"), "pulse.spacings", env)
    _number(pulse.relative_bandwidth, "pulse.relative_bandwidth", positive=True)
    if _number(pulse.n_freq, "pulse.n_freq", integer=True) < 64:
        _fail("pulse.n_freq must be at least 64")
    if _number(pulse.n_time, "pulse.n_time", integer=True) < 2:
        _fail("pulse.n_time must be at least 2")
    if pulse.time_window is not None:
        if not isinstance(pulse.time_window, (list, tuple)) or len(pulse.time_window) != 2:
            _fail(f"pulse.time_window must be a [start, stop] pair, got {pulse.time_window!r}")
        start = _number(pulse.time_window[0], "pulse.time_window[0]")
        stop = _number(pulse.time_window[1], "pulse.time_window[1]")
        if start < 0 or stop <= start:
            _fail("pulse.time_window must satisfy 0 <= start < stop")


def validate_config(config: ExperimentConfig) -> None:
    env = config.environment
    if not isinstance(env, EnvironmentModel):
        _fail("environment must be a mapping of waveguide parameters")
    depth = _number(config.source.depth, "source.depth")
    if not 0.0 < depth < env.h:
        _fail(f"source.depth must lie inside the water column (0, {env.h}) m, got {depth}")
    _ascending(config.ranges, "ranges")
    _number(config.frequency, "frequency", positive=True)
    _require_one_layout(config.array, env)
    _validate_sweep(config.sweep, env)
    _validate_noise(config.noise)
    _validate_pulse(config.pulse, env)

    if config.grid.n_points is not None:
        if _number(config.grid.n_points, "grid.n_points", integer=True) < 3:
            _fail("grid.n_points must be at least 3")
    if _number(config.grid.points_per_wavelength, "grid.points_per_wavelength", integer=True) < 8:
        _fail("grid.points_per_wavelength must be at least 8")
    if not isinstance(config.grid.mode_set, str) or config.grid.mode_set not in MODE_SETS:
        _fail(f"grid.mode_set must be one of {', '.join(MODE_SETS)}, got {config.grid.mode_set!r}")
    if not isinstance(config.output.directory, str) or not config.output.directory:
        _fail("output.directory must be a non-empty path")
