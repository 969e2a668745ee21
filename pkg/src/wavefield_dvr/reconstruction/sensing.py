from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike

from ..errors import ConfigError, DegenerateError, DimensionError, DomainError
from ..models import Measurement
from ..waveguide.field import CwField
from .dvr import DvrBasis, hydrophone_count

__all__ = [
    "ArraySpec",
    "DISPLACEMENT_STREAM",
    "DisplacementModel",
    "NOISE_STREAM",
    "add_noise",
    "average_measurements",
    "displace",
    "rng_stream",
    "sample_field",
    "simulate_average",
    "simulate_realization",
]

logger = logging.getLogger(__name__)

DISPLACEMENT_STREAM = 0
NOISE_STREAM = 1


def rng_stream(seed: int, *key: int) -> np.random.Generator:
    """Generator for one work item; ``key`` is (work item indices..., realization, purpose)."""

    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


@dataclass(frozen=True)
class ArraySpec:
    """Vertical line array with hydrophones at z_j = j dz, j = 1..J."""

    J: int
    dz: float
    h: float

    def __post_init__(self) -> None:
        if self.J < 1:
            raise ConfigError(f"Array needs at least one hydrophone, got J={self.J}")
        if not self.dz > 0:
            raise ConfigError(f"Hydrophone spacing must be positive, got {self.dz}")
        if self.J * self.dz > self.h * (1.0 + 1e-12):
            logger.error("Array of %d x %.3f m extends below h=%.1f m", self.J, self.dz, self.h)
            raise ConfigError(f"Array depth {self.J * self.dz:.3f} m exceeds water depth {self.h} m")

    @property
    def depths(self) -> np.ndarray:
        return np.arange(1, self.J + 1) * self.dz

    @classmethod
    def from_basis(cls, basis: DvrBasis, h: float) -> "ArraySpec":
        return cls(J=hydrophone_count(basis, h), dz=basis.dz, h=h)


@dataclass(frozen=True)
class DisplacementModel:
    """Cable shape zeta(z) = (varsigma / sqrt 2)(zeta1 sin(pi z / h) + zeta2 sin(2 pi z / h))."""

    varsigma: float
    h: float
    zeta1: float = 0.0
    zeta2: float = 0.0

    def __post_init__(self) -> None:
        if self.varsigma < 0:
            raise DomainError(f"varsigma must be non-negative, got {self.varsigma}")

    def draw(self, rng: np.random.Generator) -> "DisplacementModel":
        zeta1, zeta2 = rng.standard_normal(2)
        return replace(self, zeta1=float(zeta1), zeta2=float(zeta2))

    def __call__(self, z: ArrayLike) -> np.ndarray:
        depths = np.asarray(z, dtype=float)
        phase = math.pi * depths / self.h
        shape = self.zeta1 * np.sin(phase) + self.zeta2 * np.sin(2.0 * phase)
        # fixed ends
        shape = np.where((depths <= 0.0) | (depths >= self.h), 0.0, shape)
        return self.varsigma / math.sqrt(2.0) * shape


def sample_field(field: CwField, array: ArraySpec) -> Measurement:
    return Measurement(values=field.at(array.depths), depths=array.depths, kind="clean")


def displace(
    field: CwField,
    array: ArraySpec,
    model: DisplacementModel,
    seed: int,
    *,
    stream: Sequence[int] = (),
) -> Measurement:
    """Sample the field at z_j + zeta(z_j) for one freshly drawn cable shape."""

    realized = model.draw(rng_stream(seed, *stream, DISPLACEMENT_STREAM))
    depths = array.depths
    shifted = np.clip(depths + realized(depths), 0.0, field.grid.z_max)
    return Measurement(values=field.at(shifted), depths=depths, kind="displaced", seed=seed)


def add_noise(
    meas: Measurement,
    snr_db: float,
    seed: int,
    *,
    reference: Optional[Measurement] = None,
    complex_noise: bool = True,
    stream: Sequence[int] = (),
) -> Measurement:
    """Add white noise whose variance gives ``snr_db`` against the clean energy at the array.

    ``reference`` is the clean measurement used for calibration; ``meas`` itself when omitted.
    """

    reference = reference or meas
    if reference.size != meas.size:
        raise DimensionError("Reference and measurement lengths differ")
    energy = reference.energy()
    if energy == 0.0:
        logger.error("SNR requested for a zero-energy measurement")
        raise DegenerateError("SNR is undefined for a zero-energy measurement")
    if math.isinf(snr_db) and snr_db > 0:
        return replace(meas, kind="noisy", seed=seed, realized_snr_db=math.inf)

    variance = energy / (meas.size * 10.0 ** (snr_db / 10.0))
    rng = rng_stream(seed, *stream, NOISE_STREAM)
    if complex_noise:
        noise = math.sqrt(variance / 2.0) * (
            rng.standard_normal(meas.size) + 1j * rng.standard_normal(meas.size)
        )
    else:
        noise = math.sqrt(variance) * rng.standard_normal(meas.size).astype(complex)
    noise_energy = float(np.sum(np.abs(noise) ** 2))
    realized = 10.0 * math.log10(energy / noise_energy) if noise_energy > 0 else math.inf
    return replace(
        meas, values=meas.values + noise, kind="noisy", seed=seed, realized_snr_db=realized
    )


def average_measurements(measurements: Sequence[Measurement]) -> Measurement:
    if not measurements:
        raise DimensionError("Nothing to average")
    first = measurements[0]
    for meas in measurements[1:]:
        if meas.size != first.size or not np.allclose(meas.depths, first.depths):
            raise DimensionError("Measurements to average must share the array geometry")
    values = np.mean(np.stack([meas.values for meas in measurements]), axis=0)
    return Measurement(
        values=values,
        depths=first.depths,
        kind="averaged",
        seed=first.seed,
        n_realizations=len(measurements),
    )


def simulate_realization(
    field: CwField,
    array: ArraySpec,
    *,
    snr_db: Optional[float],
    varsigma: float,
    seed: int,
    stream: Sequence[int] = (),
    complex_noise: bool = True,
) -> Measurement:
    """One noisy record: displaced sampling (when varsigma > 0) plus noise (when snr_db is set)."""

    clean = sample_field(field, array)
    if varsigma > 0:
        record = displace(field, array, DisplacementModel(varsigma, array.h), seed, stream=stream)
    else:
        record = clean
    if snr_db is None:
        return record
    return add_noise(
        record, snr_db, seed, reference=clean, complex_noise=complex_noise, stream=stream
    )


def simulate_average(
    field: CwField,
    array: ArraySpec,
    n_realizations: int,
    *,
    snr_db: Optional[float],
    varsigma: float,
    seed: int,
    stream: Sequence[int] = (),
    complex_noise: bool = True,
) -> Measurement:
    if n_realizations < 1:
        raise DomainError(f"Need at least one realization, got {n_realizations}")
    records = [
        simulate_realization(
            field,
            array,
            snr_db=snr_db,
            varsigma=varsigma,
            seed=seed,
            stream=(*stream, realization),
            complex_noise=complex_noise,
        )
        for realization in range(n_realizations)
    ]
    return average_measurements(records)
