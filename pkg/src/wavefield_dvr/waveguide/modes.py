from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import eigh_tridiagonal

from ..errors import ConfigError, DegenerateError, DomainError, ResolutionError
from .environment import EnvironmentModel, refractive_index_sq, water_sound_speed

__all__ = [
    "DepthGrid",
    "DiscreteMedium",
    "MODE_SETS",
    "ModeSet",
    "SturmLiouvilleOperator",
    "assemble_operator",
    "discretize",
    "group_speeds",
    "make_grid",
    "minimum_vertical_wavelength",
    "modal_attenuation",
    "solve_medium",
    "solve_modes",
]

logger = logging.getLogger(__name__)

MIN_POINTS_PER_WAVELENGTH = 8
DEFAULT_POINTS_PER_WAVELENGTH = 20
DEFAULT_MIN_POINTS = 2001

# "discrete" keeps every eigenvalue with k_r^2 > 0 (rigid basement), "trapped" only k_r > omega/c_b.
MODE_SETS = ("discrete", "trapped")
DEFAULT_MODE_SET = "discrete"


@dataclass(frozen=True)
class DepthGrid:
    """Uniform grid on ``[0, z_max]`` including both end points."""

    z_max: float
    n_points: int

    def __post_init__(self) -> None:
        if self.n_points < 3:
            raise ConfigError("DepthGrid needs at least 3 points")
        if not self.z_max > 0:
            raise ConfigError("DepthGrid extent must be positive")

    @property
    def spacing(self) -> float:
        return self.z_max / (self.n_points - 1)

    @cached_property
    def depths(self) -> np.ndarray:
        return np.linspace(0.0, self.z_max, self.n_points)

    def node_offset(self, z: float) -> float:
        """Distance from ``z`` to the nearest grid node."""

        index = round(z / self.spacing)
        return abs(z - index * self.spacing)

    def truncated(self, z: float) -> "DepthGrid":
        """Sub-grid ``[0, z']`` where z' is the last node not beyond ``z``."""

        last = int(math.floor(z / self.spacing + 1e-9))
        last = min(max(last, 2), self.n_points - 1)
        return DepthGrid(z_max=last * self.spacing, n_points=last + 1)


def _check_mode_set(mode_set: str) -> None:
    if mode_set not in MODE_SETS:
        raise ConfigError(f"mode_set must be one of {', '.join(MODE_SETS)}, got {mode_set!r}")


def minimum_vertical_wavelength(
    env: EnvironmentModel, f: float, mode_set: str = DEFAULT_MODE_SET
) -> float:
    """Shortest vertical wavelength among the modes of ``mode_set`` at frequency ``f``.

    The full discrete spectrum reaches k_r -> 0, where k_z approaches omega / c_min.
    """

    _check_mode_set(mode_set)
    if mode_set == "trapped":
        kz_max = 2.0 * math.pi * f * math.sqrt(1.0 / env.c_min**2 - 1.0 / env.c_b**2)
    else:
        kz_max = 2.0 * math.pi * f / env.c_min
    return 2.0 * math.pi / kz_max


def make_grid(
    env: EnvironmentModel,
    f: float,
    *,
    points_per_wavelength: int = DEFAULT_POINTS_PER_WAVELENGTH,
    min_points: int = DEFAULT_MIN_POINTS,
    mode_set: str = DEFAULT_MODE_SET,
) -> DepthGrid:
    """Default mode grid over ``[0, L]`` with the interface ``h`` on a node."""

    if not f > 0:
        raise DomainError(f"Frequency must be positive, got {f}")
    wavelength = minimum_vertical_wavelength(env, f, mode_set)
    intervals = max(min_points - 1, math.ceil(points_per_wavelength * env.L / wavelength))
    step = Fraction(env.h / env.L).limit_denominator(10_000).denominator
    intervals = step * math.ceil(intervals / step)
    return DepthGrid(z_max=env.L, n_points=intervals + 1)


@dataclass(frozen=True, eq=False)
class DiscreteMedium:
    """Medium sampled for the finite-volume scheme.

    Each node owns an upper half cell ``[z - dz/2, z]`` and a lower half cell
    ``[z, z + dz/2]``; ``k_sq_*`` hold omega^2 / c^2 (complex when lossy) and ``rho_*`` the
    density on them. ``flux`` is 1/rho on every segment between neighbouring nodes.
    """

    k_sq_upper: np.ndarray
    k_sq_lower: np.ndarray
    rho_upper: np.ndarray
    rho_lower: np.ndarray
    flux: np.ndarray

    @classmethod
    def uniform(cls, grid: DepthGrid, *, sound_speed: float, rho: float, f: float) -> "DiscreteMedium":
        k_sq = np.full(grid.n_points, (2.0 * math.pi * f / sound_speed) ** 2, dtype=complex)
        rho_nodes = np.full(grid.n_points, rho)
        return cls(k_sq, k_sq.copy(), rho_nodes, rho_nodes.copy(), np.full(grid.n_points - 1, 1.0 / rho))


def discretize(env: EnvironmentModel, f: float, grid: DepthGrid) -> DiscreteMedium:
    if not f > 0:
        raise DomainError(f"Frequency must be positive, got {f}")
    if not math.isclose(grid.z_max, env.L, rel_tol=1e-9):
        raise ConfigError(f"Mode grid must span [0, L={env.L}] m, got z_max={grid.z_max}")
    z = grid.depths
    dz = grid.spacing
    k0_sq = (2.0 * math.pi * f / env.c_min) ** 2
    water = k0_sq * (env.c_min / np.asarray(water_sound_speed(env, z), dtype=float)) ** 2
    sediment = k0_sq * complex(refractive_index_sq(env, env.L, f))

    def half(centre: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        in_water = centre < env.h
        return (
            np.where(in_water, water, sediment).astype(complex),
            np.where(in_water, env.rho_wat, env.rho_sed),
        )

    k_sq_upper, rho_upper = half(z - 0.25 * dz)
    k_sq_lower, rho_lower = half(z + 0.25 * dz)

    upper, lower = z[:-1], z[1:]
    flux = np.where(lower <= env.h, 1.0 / env.rho_wat, 1.0 / env.rho_sed)
    straddles = (upper < env.h) & (lower > env.h)
    if np.any(straddles):
        rho_mean = (
            (env.h - upper[straddles]) * env.rho_wat + (lower[straddles] - env.h) * env.rho_sed
        ) / dz
        flux[straddles] = 1.0 / rho_mean
    return DiscreteMedium(k_sq_upper, k_sq_lower, rho_upper, rho_lower, flux)


class SturmLiouvilleOperator(NamedTuple):
    """rho d/dz[(1/rho) d/dz] + k^2 on the unknowns z_1..z_N, as ``A u = k_r^2 M u``.

    ``A`` is tridiagonal (``diagonal``/``offdiagonal``), ``M`` the diagonal 1/rho mass and
    ``loss`` the integral of Im(k^2)/rho over each cell. ``diagonal`` is complex when lossy.
    """

    diagonal: np.ndarray
    offdiagonal: np.ndarray
    mass: np.ndarray
    loss: np.ndarray


def _cell_integrals(medium: DiscreteMedium, grid: DepthGrid) -> tuple[np.ndarray, np.ndarray]:
    n = grid.n_points
    half = 0.5 * grid.spacing
    upper = np.where(np.arange(n) > 0, half, 0.0)
    lower = np.where(np.arange(n) < n - 1, half, 0.0)
    mass = upper / medium.rho_upper + lower / medium.rho_lower
    potential = (
        upper * medium.k_sq_upper / medium.rho_upper + lower * medium.k_sq_lower / medium.rho_lower
    )
    return mass, potential


def assemble_operator(
    medium: DiscreteMedium, grid: DepthGrid, *, lossy: bool = False
) -> SturmLiouvilleOperator:
    mass, potential = _cell_integrals(medium, grid)
    flux = medium.flux / grid.spacing

    # z = 0 is Dirichlet and drops out; z = L keeps its half cell (Neumann).
    left = flux
    right = np.append(flux[1:], 0.0)
    cell_potential = potential[1:] if lossy else potential[1:].real
    return SturmLiouvilleOperator(
        diagonal=-(left + right) + cell_potential,
        offdiagonal=flux[1:].copy(),
        mass=mass[1:],
        loss=potential[1:].imag,
    )


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Normal modes at one frequency, sampled on ``grid``.

    ``psi`` has shape (M, n_points) and is normalised so that the discrete
    integral of psi_m psi_n / rho with ``weights`` equals delta_mn.
    """

    frequency: float
    grid: DepthGrid
    k_r: np.ndarray
    alpha: np.ndarray
    psi: np.ndarray
    weights: np.ndarray

    @property
    def mode_count(self) -> int:
        return int(self.k_r.size)

    @property
    def phase_speeds(self) -> np.ndarray:
        return 2.0 * math.pi * self.frequency / self.k_r

    def values_at(self, z: ArrayLike) -> np.ndarray:
        """Mode amplitudes at depth(s) ``z`` by linear interpolation, shape (M, ...)."""

        depths = np.asarray(z, dtype=float)
        if np.any(depths < 0) or np.any(depths > self.grid.z_max * (1 + 1e-12)):
            raise DomainError(f"Depth outside mode grid [0, {self.grid.z_max}] m")
        flat = np.atleast_1d(depths).ravel()
        values = np.array([np.interp(flat, self.grid.depths, row) for row in self.psi])
        return values.reshape((self.mode_count,) + depths.shape)

    def subset(self, indices: Sequence[int]) -> "ModeSet":
        selected = np.asarray(indices, dtype=int)
        return ModeSet(
            frequency=self.frequency,
            grid=self.grid,
            k_r=self.k_r[selected],
            alpha=self.alpha[selected],
            psi=self.psi[selected],
            weights=self.weights,
        )

    def orthonormality_matrix(self) -> np.ndarray:
        return (self.psi * self.weights) @ self.psi.T


def _check_resolution(env: EnvironmentModel, f: float, grid: DepthGrid, mode_set: str) -> None:
    points = minimum_vertical_wavelength(env, f, mode_set) / grid.spacing
    if points < MIN_POINTS_PER_WAVELENGTH:
        logger.error(
            "Grid spacing %.4g m gives %.1f points per vertical wavelength at %.1f Hz",
            grid.spacing,
            points,
            f,
        )
        raise ResolutionError(
            f"Grid too coarse at {f} Hz: {points:.1f} points per vertical wavelength "
            f"(need {MIN_POINTS_PER_WAVELENGTH})"
        )


def _fix_signs(psi: np.ndarray) -> np.ndarray:
    for row in psi:
        significant = np.flatnonzero(np.abs(row) > 1e-8 * np.max(np.abs(row)))
        if significant.size and row[significant[0]] < 0:
            row *= -1.0
    return psi


def modal_attenuation(
    env: EnvironmentModel, grid: DepthGrid, psi: np.ndarray, k_rm: float, f: float
) -> float:
    """First-order modal decay rate (Np/m) from the sediment loss.

    alpha_m = k0^2 / (2 k_rm) * integral Im(n^2) psi_m^2 / rho dz, with ``psi`` sampled on
    ``grid`` and density-normalised.
    """

    if not k_rm > 0:
        raise DegenerateError(f"Horizontal wavenumber must be positive, got {k_rm}")
    _, potential = _cell_integrals(discretize(env, f, grid), grid)
    return float(np.sum(potential.imag * np.asarray(psi) ** 2) / (2.0 * k_rm))


def solve_medium(
    medium: DiscreteMedium, grid: DepthGrid, f: float, *, cutoff_wavenumber: float
) -> ModeSet:
    """All discrete modes with k_r above ``cutoff_wavenumber``, attenuation by perturbation.

    A zero cutoff keeps every propagating eigenvalue, k_r^2 > 0.
    """

    operator = assemble_operator(medium, grid)
    scale = 1.0 / np.sqrt(operator.mass)
    diagonal = operator.diagonal * scale**2
    offdiagonal = operator.offdiagonal * scale[:-1] * scale[1:]

    weights = np.insert(operator.mass, 0, 0.5 * grid.spacing / medium.rho_lower[0])
    # eigh_tridiagonal selects the half-open interval (lower, upper]
    lower = max(cutoff_wavenumber, 0.0) ** 2
    bounds = np.abs(np.append(offdiagonal, 0.0)) + np.abs(np.insert(offdiagonal, 0, 0.0))
    upper = float(np.max(diagonal + bounds))
    eigenvalues = np.zeros(0)
    if upper > lower:
        eigenvalues, eigenvectors = eigh_tridiagonal(
            diagonal, offdiagonal, select="v", select_range=(lower, upper)
        )
    if eigenvalues.size == 0:
        logger.info("No propagating modes at %.2f Hz", f)
        return ModeSet(
            frequency=f,
            grid=grid,
            k_r=np.zeros(0),
            alpha=np.zeros(0),
            psi=np.zeros((0, grid.n_points)),
            weights=weights,
        )

    order = np.argsort(eigenvalues)[::-1]
    k_r = np.sqrt(eigenvalues[order])
    interior = (eigenvectors[:, order] * scale[:, None]).T
    psi = _fix_signs(np.hstack([np.zeros((k_r.size, 1)), interior]))
    loss = np.insert(operator.loss, 0, 0.0)
    alpha = (psi**2 @ loss) / (2.0 * k_r)
    logger.debug("Solved %d modes at %.2f Hz", k_r.size, f)
    return ModeSet(
        frequency=f,
        grid=grid,
        k_r=k_r,
        alpha=np.clip(alpha, 0.0, None),
        psi=psi,
        weights=weights,
    )


def solve_modes(
    env: EnvironmentModel,
    f: float,
    grid: DepthGrid | None = None,
    *,
    mode_set: str = DEFAULT_MODE_SET,
) -> ModeSet:
    """Normal modes at frequency ``f``.

    ``mode_set="discrete"`` returns the whole discrete spectrum of the rigid-basement guide
    (0 < k_r < omega/c_min); ``"trapped"`` keeps only omega/c_b < k_r.
    """

    if not f > 0:
        raise DomainError(f"Frequency must be positive, got {f}")
    _check_mode_set(mode_set)
    grid = grid or make_grid(env, f, mode_set=mode_set)
    _check_resolution(env, f, grid, mode_set)
    if grid.node_offset(env.h) > 1e-6 * grid.spacing:
        logger.warning("Interface h=%.3f m is not a grid node; accuracy drops to first order", env.h)
    medium = discretize(env, f, grid)
    cutoff = 2.0 * math.pi * f / env.c_b if mode_set == "trapped" else 0.0
    return solve_medium(medium, grid, f, cutoff_wavenumber=cutoff)


def group_speeds(
    env: EnvironmentModel,
    f: float,
    grid: DepthGrid,
    *,
    relative_step: float = 1e-3,
    mode_set: str = DEFAULT_MODE_SET,
) -> np.ndarray:
    """Modal group speeds d(omega)/d(k_r) by centred differences; NaN where a mode is cut off."""

    below = solve_modes(env, f * (1.0 - relative_step), grid, mode_set=mode_set)
    above = solve_modes(env, f * (1.0 + relative_step), grid, mode_set=mode_set)
    count = solve_modes(env, f, grid, mode_set=mode_set).mode_count
    speeds = np.full(count, np.nan)
    shared = min(count, below.mode_count, above.mode_count)
    d_omega = 2.0 * math.pi * f * 2.0 * relative_step
    speeds[:shared] = d_omega / (above.k_r[:shared] - below.k_r[:shared])
    return speeds
