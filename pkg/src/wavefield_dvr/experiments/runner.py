from __future__ import annotations

import logging
import math
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, Optional, Sequence, TypeVar

import numpy as np

from ..config import ExperimentConfig, config_digest, load_experiment_config, validate_config
from ..errors import ConfigError
from ..models import Measurement, RunLog
from ..reconstruction.dvr import (
    DvrBasis,
    basis_for_spacing,
    build_dvr,
    effective_depth,
    j_max_for_hydrophones,
    reconstruct,
)
from ..reconstruction.metrics import (
    confidence_range,
    fidelity_cw,
    fidelity_pulse,
    nyquist_frequency,
)
from ..reconstruction.sensing import ArraySpec, sample_field, simulate_average, simulate_realization
from ..storage import ResultStore, format_value
from ..waveguide.field import (
    SPECTRUM_HALF_WIDTH,
    CwField,
    PulseField,
    SignalSpectrum,
    cw_field,
    gaussian_spectrum,
    pulse_field,
    synthesize_pulse,
)
from ..waveguide.modes import DepthGrid, make_grid, solve_modes

__all__ = ["ExperimentRunner"]

logger = logging.getLogger(__name__)

T = TypeVar("T")

PERCENTILES = (10.0, 50.0, 90.0)
DVR_CURVE_SAMPLES_PER_SPACING = 20
WINDOW_EDGE_TOLERANCE = 1e-3
# profile-compare draws; the averaged records append their realization index
SINGLE_DRAW_STREAM = (1,)
AVERAGED_DRAW_STREAM = (0,)


def _tag(value: float) -> str:
    return format_value(float(value)).replace(".", "p")


class ExperimentRunner:
    """Coordinator behind every CLI command.

    Each ``run_*`` method writes its tables through the :class:`ResultStore`, records a run log
    and returns the written paths in a fixed order.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        *,
        store: ResultStore | None = None,
        threads: int = 1,
    ) -> None:
        validate_config(config)
        self.config = config
        self.env = config.environment
        self.store = store or ResultStore(Path(config.output.directory))
        self.threads = max(1, int(threads))

    @classmethod
    def from_config_file(
        cls,
        path: Path,
        *,
        seed: Optional[int] = None,
        out_dir: Optional[str] = None,
        threads: int = 1,
    ) -> "ExperimentRunner":
        config = load_experiment_config(path).with_overrides(seed=seed, out_dir=out_dir)
        return cls(config, threads=threads)

    def initialize(self) -> None:
        self.store.ensure_layout()

    # Shared helpers
    def _map(self, function: Callable[[int, Any], T], items: Sequence[Any]) -> list[T]:
        """Apply ``function(index, item)``; results come back in input order."""

        if self.threads > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as executor:
                return list(executor.map(function, range(len(items)), items))
        return [function(index, item) for index, item in enumerate(items)]

    @property
    def mode_set(self) -> str:
        return self.config.grid.mode_set

    def mode_grid(self, f: float) -> DepthGrid:
        if self.config.grid.n_points is not None:
            return DepthGrid(z_max=self.env.L, n_points=int(self.config.grid.n_points))
        return make_grid(
            self.env,
            f,
            points_per_wavelength=int(self.config.grid.points_per_wavelength),
            mode_set=self.mode_set,
        )

    def array_basis(self, spacing: Optional[float] = None) -> tuple[DvrBasis, ArraySpec]:
        """DVR basis and the hydrophones it implies inside the water column."""

        env = self.env
        layout = self.config.array
        if spacing is not None:
            basis = basis_for_spacing(spacing, env.L, env.h)
        elif layout.hydrophones is not None:
            basis = build_dvr(j_max_for_hydrophones(int(layout.hydrophones), env.h, env.L), env.L)
        elif layout.spacing is not None:
            basis = basis_for_spacing(float(layout.spacing), env.L, env.h)
        else:
            L_eff = float(layout.L_eff)
            j_max = int(layout.j_max)
            effective_depth(L_eff / (j_max + 0.5), j_max, env.h)
            basis = build_dvr(j_max, L_eff)
        return basis, ArraySpec.from_basis(basis, env.h)

    @property
    def seed(self) -> int:
        return int(self.config.noise.seed) if self.config.noise.seed is not None else 0

    def snr_levels(self) -> list[Optional[float]]:
        return [float(value) for value in self.config.noise.snr_db] or [None]

    def measure(
        self,
        field: CwField,
        array: ArraySpec,
        snr_db: Optional[float],
        stream: Sequence[int],
        *,
        realizations: Optional[int] = None,
    ) -> Measurement:
        noise = self.config.noise
        if not noise.enabled:
            return sample_field(field, array)
        return simulate_average(
            field,
            array,
            int(realizations or noise.realizations),
            snr_db=snr_db,
            varsigma=float(noise.varsigma),
            seed=self.seed,
            stream=stream,
            complex_noise=noise.complex_noise,
        )

    def _record(self, command: str, outputs: list[Path], started: float, **details: Any) -> None:
        run = RunLog(
            run_id=f"{command}-{uuid.uuid4().hex[:8]}",
            command=command,
            config_digest=config_digest(self.config),
            seed=self.config.noise.seed,
            outputs=[str(path) for path in outputs],
            duration_s=time.perf_counter() - started,
            details=details or None,
        )
        path = self.store.record_run(run)
        logger.info("%s finished in %.2f s; run log %s", command, run.duration_s, path)

    # Commands
    def run_modes(self) -> list[Path]:
        self.initialize()
        started = time.perf_counter()
        f = float(self.config.frequency)
        modeset = solve_modes(self.env, f, self.mode_grid(f), mode_set=self.mode_set)
        table = self.store.write_csv(
            f"modes/modes_{_tag(f)}hz.csv",
            ("mode", "k_r_per_m", "alpha_np_per_m", "phase_speed_m_s"),
            (
                (index + 1, k, alpha, speed)
                for index, (k, alpha, speed) in enumerate(
                    zip(modeset.k_r, modeset.alpha, modeset.phase_speeds)
                )
            ),
        )
        shapes = self.store.write_csv(
            f"modes/shapes_{_tag(f)}hz.csv",
            ("depth_m", *(f"psi_{index + 1}" for index in range(modeset.mode_count))),
            (
                (z, *modeset.psi[:, node])
                for node, z in enumerate(modeset.grid.depths)
            ),
        )
        outputs = [table, shapes]
        self._record("modes", outputs, started, frequency_hz=f, mode_count=modeset.mode_count)
        return outputs

    def dump_dvr(self) -> list[Path]:
        self.initialize()
        started = time.perf_counter()
        layout = self.config.array
        if layout.j_max is not None:
            basis = build_dvr(int(layout.j_max), float(layout.L_eff))
        else:
            basis, _ = self.array_basis()
        grid = self.store.write_csv(
            "dvr/grid.csv",
            ("j", "depth_m", "eigenvalue"),
            (
                (j + 1, z, value)
                for j, (z, value) in enumerate(zip(basis.grid_depths, basis.eigenvalues))
            ),
        )
        samples = DVR_CURVE_SAMPLES_PER_SPACING * (basis.j_max + 1) + 1
        z = np.linspace(0.0, basis.L_eff, samples)
        chi = basis.chi_matrix(z)
        curves = self.store.write_csv(
            "dvr/functions.csv",
            ("depth_m", *(f"chi_{j + 1}" for j in range(basis.j_max))),
            ((depth, *row) for depth, row in zip(z, chi)),
        )
        outputs = [grid, curves]
        self._record("dvr-dump", outputs, started, j_max=basis.j_max, L_eff=basis.L_eff)
        return outputs

    def run_cw(self) -> list[Path]:
        """Exact and reconstructed profiles at the configured frequency, one file per range."""

        self.initialize()
        started = time.perf_counter()
        env = self.env
        f = float(self.config.frequency)
        basis, array = self.array_basis()
        modeset = solve_modes(env, f, self.mode_grid(f), mode_set=self.mode_set)
        outputs: list[Path] = []
        summary: list[tuple[Any, ...]] = []
        for r_index, r in enumerate(self.config.ranges):
            field = cw_field(env, modeset, float(self.config.source.depth), float(r))
            measurement = self.measure(field, array, self.snr_levels()[0], (0, r_index, 0))
            estimate = reconstruct(basis, measurement.values)
            fidelity = math.nan if field.empty else fidelity_cw(field, estimate, env.h).value
            sub = field.grid.truncated(env.h)
            z = sub.depths
            exact = field.profile[: sub.n_points]
            est = estimate(z)
            outputs.append(
                self.store.write_csv(
                    f"cw/profile_{_tag(f)}hz_{_tag(r)}m.csv",
                    ("depth_m", "exact_real", "exact_imag", "estimate_real", "estimate_imag"),
                    zip(z, exact.real, exact.imag, est.real, est.imag),
                )
            )
            outputs.append(
                self.store.write_measurement(f"cw/measurement_{_tag(f)}hz_{_tag(r)}m.csv", measurement)
            )
            summary.append((f, r, array.J, array.dz, fidelity))
        outputs.append(
            self.store.write_csv(
                "cw/fidelity.csv",
                ("frequency_hz", "range_m", "hydrophones", "spacing_m", "fidelity"),
                summary,
            )
        )
        self._record("cw", outputs, started, frequency_hz=f)
        return outputs

    def run_pulse(self) -> list[Path]:
        """Exact pulse arrival patterns for every center frequency and range."""

        self.initialize()
        started = time.perf_counter()
        env = self.env
        pulse_config = self.config.pulse
        outputs: list[Path] = []
        for f_c in pulse_config.center_frequencies:
            spectrum = gaussian_spectrum(
                2.0 * math.pi * float(f_c), relative_bandwidth=float(pulse_config.relative_bandwidth)
            )
            grid = self.mode_grid(self._band_top(spectrum))
            for r in self.config.ranges:
                pulse = self._exact_pulse(spectrum, grid, float(r))
                stem = f"pulse/pulse_{_tag(f_c)}hz_{_tag(r)}m"
                outputs.append(self.store.save_pulse(f"{stem}.npz", pulse))
                outputs.append(
                    self.store.write_csv(
                        f"{stem}_envelope.csv",
                        ("time_s", "power"),
                        zip(pulse.time_axis, pulse.power()),
                    )
                )
        self._record("pulse", outputs, started)
        return outputs

    def _band_top(self, spectrum: SignalSpectrum) -> float:
        return (spectrum.omega_c + SPECTRUM_HALF_WIDTH * spectrum.delta_omega) / (2.0 * math.pi)

    def _exact_pulse(self, spectrum: SignalSpectrum, grid: DepthGrid, r: float) -> PulseField:
        """Pulse on the water-column grid; ``broadband`` holds the field it was synthesised from."""

        pulse_config = self.config.pulse
        return pulse_field(
            self.env,
            float(self.config.source.depth),
            r,
            grid,
            spectrum,
            pulse_config.time_window,
            int(pulse_config.n_freq),
            int(pulse_config.n_time),
            output_grid=grid.truncated(self.env.h),
            workers=self.threads,
            edge_tolerance=WINDOW_EDGE_TOLERANCE,
            mode_set=self.mode_set,
        )

    def run_sweep_frequency(self) -> list[Path]:
        """Fidelity over the frequency sweep for every range and SNR level."""

        self.initialize()
        started = time.perf_counter()
        if self.config.sweep.kind != "frequency":
            raise ConfigError("sweep-frequency needs sweep.kind = 'frequency'")
        env = self.env
        basis, array = self.array_basis()
        frequencies = [float(f) for f in self.config.sweep.points()]
        snr_levels = self.snr_levels()
        ranges = [float(r) for r in self.config.ranges]
        realizations = int(self.config.noise.realizations) if self.config.noise.enabled else 1

        def point(f_index: int, f: float) -> list[tuple[Any, ...]]:
            modeset = solve_modes(env, f, self.mode_grid(f), mode_set=self.mode_set)
            rows = []
            for r_index, r in enumerate(ranges):
                field = cw_field(env, modeset, float(self.config.source.depth), r)
                for s_index, snr in enumerate(snr_levels):
                    if field.empty:
                        fidelity = math.nan
                    else:
                        measurement = self.measure(field, array, snr, (f_index, r_index, s_index))
                        fidelity = fidelity_cw(field, reconstruct(basis, measurement.values), env.h).value
                    rows.append((f, r, array.J, snr, realizations, fidelity))
            return rows

        rows = [row for chunk in self._map(point, frequencies) for row in chunk]
        table = self.store.write_csv(
            "sweep_frequency/fidelity.csv",
            ("frequency_hz", "range_m", "hydrophones", "snr_db", "realizations", "fidelity"),
            rows,
        )
        nyquist = nyquist_frequency(array.dz, env.c_min)
        summaries = []
        for r in ranges:
            for snr in snr_levels:
                curve = [row for row in rows if row[1] == r and row[3] == snr]
                ranges_found = confidence_range([row[0] for row in curve], [row[5] for row in curve])
                summaries.append(
                    {
                        "range_m": r,
                        "snr_db": snr,
                        "hydrophones": array.J,
                        "spacing_m": array.dz,
                        "realizations": realizations,
                        "nyquist_hz": nyquist,
                        **ranges_found.to_dict(),
                    }
                )
        summary = self.store.write_json("sweep_frequency/confidence_ranges.json", summaries)
        outputs = [table, summary]
        self._record("sweep-frequency", outputs, started, points=len(frequencies))
        return outputs

    def run_sweep_spacing(self) -> list[Path]:
        """Pulse fidelity against array spacing; each frequency component is reconstructed."""

        self.initialize()
        started = time.perf_counter()
        env = self.env
        pulse_config = self.config.pulse
        if self.config.sweep.kind == "spacing":
            spacings = [float(dz) for dz in self.config.sweep.points()]
        else:
            spacings = [float(dz) for dz in pulse_config.spacings]
        rows: list[tuple[Any, ...]] = []
        summaries = []
        for f_c in pulse_config.center_frequencies:
            spectrum = gaussian_spectrum(
                2.0 * math.pi * float(f_c), relative_bandwidth=float(pulse_config.relative_bandwidth)
            )
            grid = self.mode_grid(self._band_top(spectrum))
            for r in self.config.ranges:
                exact = self._exact_pulse(spectrum, grid, float(r))
                broadband = exact.broadband

                def point(index: int, dz: float) -> tuple[Any, ...]:
                    basis, array = self.array_basis(spacing=dz)
                    depths = broadband.grid.depths
                    samples = np.array(
                        [
                            np.interp(array.depths, depths, profile.real)
                            + 1j * np.interp(array.depths, depths, profile.imag)
                            for profile in broadband.profiles
                        ]
                    )
                    chi = basis.chi_matrix(depths, array.J)
                    estimates = math.sqrt(basis.dz) * samples @ chi.T
                    estimate = synthesize_pulse(broadband.with_profiles(estimates), exact.time_axis)
                    fidelity = fidelity_pulse(exact, estimate, env.h).value
                    return (dz, float(f_c), float(r), array.J, fidelity)

                curve = self._map(point, spacings)
                rows.extend(curve)
                found = confidence_range([row[0] for row in curve], [row[4] for row in curve], unit="m")
                summaries.append({"center_frequency_hz": float(f_c), "range_m": float(r), **found.to_dict()})
        table = self.store.write_csv(
            "sweep_spacing/fidelity.csv",
            ("spacing_m", "center_frequency_hz", "range_m", "hydrophones", "fidelity"),
            rows,
        )
        summary = self.store.write_json("sweep_spacing/confidence_ranges.json", summaries)
        outputs = [table, summary]
        self._record("sweep-spacing", outputs, started, points=len(spacings))
        return outputs

    def run_profile_compare(self) -> list[Path]:
        """Exact, noiseless, single-realization and averaged real profiles at one (f, r)."""

        self.initialize()
        started = time.perf_counter()
        env = self.env
        noise = self.config.noise
        f = float(self.config.frequency)
        r = float(self.config.ranges[0])
        basis, array = self.array_basis()
        modeset = solve_modes(env, f, self.mode_grid(f), mode_set=self.mode_set)
        field = cw_field(env, modeset, float(self.config.source.depth), r)

        variants: Dict[str, Measurement] = {"noiseless": sample_field(field, array)}
        if noise.enabled:
            snr = self.snr_levels()[0]
            variants["single"] = simulate_realization(
                field,
                array,
                snr_db=snr,
                varsigma=float(noise.varsigma),
                seed=self.seed,
                stream=SINGLE_DRAW_STREAM,
                complex_noise=noise.complex_noise,
            )
            variants["averaged"] = simulate_average(
                field,
                array,
                int(noise.realizations),
                snr_db=snr,
                varsigma=float(noise.varsigma),
                seed=self.seed,
                stream=AVERAGED_DRAW_STREAM,
                complex_noise=noise.complex_noise,
            )

        sub = field.grid.truncated(env.h)
        z = sub.depths
        columns = [field.profile[: sub.n_points].real]
        fidelities: Dict[str, Any] = {}
        outputs: list[Path] = []
        for name, measurement in variants.items():
            estimate = reconstruct(basis, measurement.values)
            columns.append(estimate.real(z))
            fidelities[name] = fidelity_cw(field, estimate, env.h).value
            fidelities[f"{name}_real"] = fidelity_cw(field, estimate, env.h, real=True).value
            outputs.append(self.store.write_measurement(f"profile_compare/measurement_{name}.csv", measurement))
        table = self.store.write_csv(
            "profile_compare/profiles.csv",
            ("depth_m", "exact_real", *(f"{name}_real" for name in variants)),
            zip(z, *columns),
        )
        summary = self.store.write_json(
            "profile_compare/fidelity.json",
            {
                "frequency_hz": f,
                "range_m": r,
                "hydrophones": array.J,
                "snr_db": self.snr_levels()[0],
                "varsigma_m": float(noise.varsigma),
                "realizations": int(noise.realizations),
                "fidelity": fidelities,
            },
        )
        outputs = [table, summary, *outputs]
        self._record("profile-compare", outputs, started, frequency_hz=f, range_m=r)
        return outputs

    def run_monte_carlo(self) -> list[Path]:
        """Fidelity percentiles over ``noise.trials`` independent seed batches."""

        self.initialize()
        started = time.perf_counter()
        noise = self.config.noise
        if not noise.enabled:
            raise ConfigError("monte-carlo needs noise.snr_db or noise.varsigma to be set")
        env = self.env
        f = float(self.config.frequency)
        basis, array = self.array_basis()
        modeset = solve_modes(env, f, self.mode_grid(f), mode_set=self.mode_set)
        counts = sorted({1, int(noise.realizations)})
        snr_levels = self.snr_levels()
        rows: list[tuple[Any, ...]] = []
        for r_index, r in enumerate(self.config.ranges):
            field = cw_field(env, modeset, float(self.config.source.depth), float(r))
            for s_index, snr in enumerate(snr_levels):
                for n_index, count in enumerate(counts):

                    def trial(index: int, _: Any) -> float:
                        measurement = self.measure(
                            field, array, snr, (r_index, s_index, n_index, index), realizations=count
                        )
                        return fidelity_cw(field, reconstruct(basis, measurement.values), env.h).value

                    values = np.array(self._map(trial, [None] * int(noise.trials)))
                    p10, median, p90 = np.percentile(values, PERCENTILES)
                    rows.append((f, float(r), array.J, snr, count, int(noise.trials), median, p10, p90))
        table = self.store.write_csv(
            "monte_carlo/fidelity_stats.csv",
            (
                "frequency_hz",
                "range_m",
                "hydrophones",
                "snr_db",
                "realizations",
                "trials",
                "median",
                "p10",
                "p90",
            ),
            rows,
        )
        outputs = [table]
        self._record("monte-carlo", outputs, started, frequency_hz=f)
        return outputs

    def run(self, command: str) -> list[Path]:
        handlers: Dict[str, Callable[[], list[Path]]] = {
            "modes": self.run_modes,
            "dvr-dump": self.dump_dvr,
            "cw": self.run_cw,
            "pulse": self.run_pulse,
            "sweep-frequency": self.run_sweep_frequency,
            "sweep-spacing": self.run_sweep_spacing,
            "profile-compare": self.run_profile_compare,
            "monte-carlo": self.run_monte_carlo,
        }
        if command not in handlers:
            raise ConfigError(f"Unknown command: {command}")
        return handlers[command]()

    def status(self) -> Dict[str, str]:
        latest = self.store.latest_run()
        return {"output_dir": str(self.store.base_dir), "latest_run": latest.name if latest else "none"}
