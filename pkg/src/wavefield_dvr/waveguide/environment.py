from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, fields
from numbers import Real
from typing import Any, Dict

import numpy as np
from numpy.typing import ArrayLike

from ..errors import ConfigError, DomainError

__all__ = [
    "NEPER_PER_DB",
    "EnvironmentModel",
    "attenuation_db_per_m",
    "attenuation_np_per_m",
    "density",
    "reference_wavenumber",
    "refractive_index_sq",
    "sound_speed",
    "water_sound_speed",
]

logger = logging.getLogger(__name__)

# 1 Np = 20 log10(e) dB
NEPER_PER_DB = 1.0 / (20.0 * math.log10(math.e))

ATTENUATION_CONVENTIONS = ("neper", "literal")
_DEPTH_TOLERANCE = 1e-9


def _is_real(value: Any) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool) and math.isfinite(value)


@dataclass(frozen=True)
class EnvironmentModel:
    """Range-independent shallow-water waveguide.

    Water column ``[0, h)`` with a tanh thermocline, a fluid sediment ``[h, L]`` and a rigid
    basement at ``L``. Units: m, m/s, g/cm^3, dB s^2/m.
    """

    c0: float = 1500.0
    delta_c: float = 25.0
    z_c: float = 50.0
    delta_z: float = 10.0
    c_b: float = 1600.0
    h: float = 100.0
    L: float = 300.0
    rho_wat: float = 1.0
    rho_sed: float = 1.7
    att_coeff: float = 0.42e-6
    attenuation_convention: str = "neper"

    def __post_init__(self) -> None:
        problems = [
            f"{item.name} must be a finite number, got {getattr(self, item.name)!r}"
            for item in fields(self)
            if item.name != "attenuation_convention" and not _is_real(getattr(self, item.name))
        ]
        if not isinstance(self.attenuation_convention, str):
            problems.append("attenuation_convention must be a string")
        if not problems:
            problems = self._range_problems()
        if problems:
            logger.error("Invalid environment: %s", "; ".join(problems))
            raise ConfigError(f"Invalid environment: {'; '.join(problems)}")

    def _range_problems(self) -> list[str]:
        problems = []
        if not 0.0 < self.z_c < self.h < self.L:
            problems.append("depths must satisfy 0 < z_c < h < L")
        if self.delta_z <= 0:
            problems.append("delta_z must be positive")
        if self.delta_c < 0:
            problems.append("delta_c must be non-negative")
        if self.rho_wat <= 0 or self.rho_sed <= 0:
            problems.append("densities must be positive")
        if self.c0 - self.delta_c <= 0:
            problems.append("minimum water sound speed must be positive")
        if self.c_b <= self.c0 - self.delta_c:
            problems.append("c_b must exceed the minimum water sound speed")
        if self.att_coeff < 0:
            problems.append("att_coeff must be non-negative")
        if self.attenuation_convention not in ATTENUATION_CONVENTIONS:
            problems.append(
                f"attenuation_convention must be one of {', '.join(ATTENUATION_CONVENTIONS)}"
            )
        return problems

    @property
    def c_min(self) -> float:
        return self.c0 - self.delta_c

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "EnvironmentModel":
        return cls(**data)


def _depths(env: EnvironmentModel, z: ArrayLike) -> np.ndarray:
    depths = np.asarray(z, dtype=float)
    slack = _DEPTH_TOLERANCE * env.L
    if np.any(depths < -slack) or np.any(depths > env.L + slack):
        raise DomainError(f"Depth outside [0, {env.L}] m")
    return depths


def _check_frequency(f: float) -> None:
    if not f > 0:
        raise DomainError(f"Frequency must be positive, got {f}")


def _like(z: ArrayLike, values: np.ndarray) -> Any:
    return values if np.ndim(z) else values.item()


def water_sound_speed(env: EnvironmentModel, z: ArrayLike) -> Any:
    """tanh thermocline branch, evaluated without the sediment switch."""

    depths = np.asarray(z, dtype=float)
    values = env.c0 - 0.5 * env.delta_c * (1.0 + np.tanh((depths - env.z_c) / env.delta_z))
    return _like(z, values)


def sound_speed(env: EnvironmentModel, z: ArrayLike) -> Any:
    depths = _depths(env, z)
    water = env.c0 - 0.5 * env.delta_c * (1.0 + np.tanh((depths - env.z_c) / env.delta_z))
    return _like(z, np.where(depths < env.h, water, env.c_b))


def density(env: EnvironmentModel, z: ArrayLike) -> Any:
    depths = _depths(env, z)
    return _like(z, np.where(depths < env.h, env.rho_wat, env.rho_sed))


def attenuation_db_per_m(env: EnvironmentModel, f: float) -> float:
    _check_frequency(f)
    return env.att_coeff * f**2


def attenuation_np_per_m(env: EnvironmentModel, f: float) -> float:
    return attenuation_db_per_m(env, f) * NEPER_PER_DB


def reference_wavenumber(env: EnvironmentModel, f: float) -> float:
    _check_frequency(f)
    return 2.0 * math.pi * f / env.c_min


def refractive_index_sq(env: EnvironmentModel, z: ArrayLike, f: float) -> Any:
    """n^2(z, f) relative to c_min, lossy below the water-sediment interface.

    With the ``neper`` convention Im(n) = alpha_np / k0, so Im(n^2) = 2 Re(n) alpha_np / k0.
    The ``literal`` convention takes n = c_min/c + 2i alpha with alpha in dB/m.
    """

    _check_frequency(f)
    depths = _depths(env, z)
    n_re = env.c_min / np.asarray(sound_speed(env, depths), dtype=float)
    sediment = depths >= env.h
    if env.attenuation_convention == "literal":
        n_im = 2.0 * attenuation_db_per_m(env, f)
        n_sq = n_re**2 + np.where(sediment, -(n_im**2) + 2j * n_re * n_im, 0.0)
    else:
        n_im = attenuation_np_per_m(env, f) / reference_wavenumber(env, f)
        n_sq = n_re**2 + 1j * np.where(sediment, 2.0 * n_re * n_im, 0.0)
    return _like(z, np.asarray(n_sq, dtype=complex))
