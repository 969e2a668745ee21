from __future__ import annotations

import logging
from typing import Callable, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import trapezoid

from ..errors import DegenerateError, DimensionError, DomainError
from ..models import ConfidenceRange, FidelityResult
from ..waveguide.field import CwField, PulseField

__all__ = [
    "DEFAULT_THRESHOLD",
    "confidence_range",
    "fidelity_cw",
    "fidelity_pulse",
    "nyquist_frequency",
]

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 0.9

Profile = Union[CwField, Callable[[np.ndarray], ArrayLike], np.ndarray]


def _profile_values(profile: Profile, z: np.ndarray) -> np.ndarray:
    if isinstance(profile, CwField):
        return profile.at(z)
    if callable(profile):
        return np.asarray(profile(z), dtype=complex)
    values = np.asarray(profile, dtype=complex)
    if values.shape != z.shape:
        raise DimensionError(f"Profile of length {values.size} does not match {z.size} depths")
    return values


def _overlap(exact: np.ndarray, est: np.ndarray, integrate: Callable[[np.ndarray], complex]) -> FidelityResult:
    a_exact = float(np.real(integrate(np.abs(exact) ** 2)))
    a_est = float(np.real(integrate(np.abs(est) ** 2)))
    if a_exact <= 0.0 or a_est <= 0.0:
        logger.error("Fidelity requested for a zero-norm profile (A_exact=%g, A_est=%g)", a_exact, a_est)
        raise DegenerateError("Fidelity is undefined for a zero-norm profile")
    value = abs(integrate(np.conj(exact) * est)) ** 2 / (a_exact * a_est)
    return FidelityResult(value=float(value), a_exact=a_exact, a_est=a_est, domain=(0.0, 0.0))


def fidelity_cw(exact: CwField, est: Profile, h: float, *, real: bool = False) -> FidelityResult:
    """F = |int_0^h Psi_exact* Psi_est dz|^2 / (A_exact A_est), trapezoidal on the exact field grid.

    ``est`` may be a field, a callable profile such as a reconstruction, or values on the
    exact grid up to ``h``. With ``real=True`` only the real pressures are compared.
    """

    if not 0.0 < h <= exact.grid.z_max * (1.0 + 1e-12):
        raise DomainError(f"Integration depth {h} m outside the field grid")
    sub = exact.grid.truncated(h)
    z = sub.depths
    exact_values = exact.profile[: sub.n_points]
    est_values = _profile_values(est, z)
    if real:
        exact_values = exact_values.real.astype(complex)
        est_values = est_values.real.astype(complex)
    result = _overlap(exact_values, est_values, lambda y: trapezoid(y, z))
    return FidelityResult(result.value, result.a_exact, result.a_est, (0.0, float(z[-1])))


def fidelity_pulse(exact: PulseField, est: PulseField, h: float) -> FidelityResult:
    """Space-time analogue of :func:`fidelity_cw` over the synthesis window and [0, h]."""

    if exact.values.shape != est.values.shape or not np.allclose(exact.time_axis, est.time_axis):
        raise DimensionError("Pulse fields must share time and depth axes")
    if not np.allclose(exact.depths, est.depths):
        raise DimensionError("Pulse fields must share time and depth axes")
    columns = exact.depths <= h * (1.0 + 1e-12)
    if np.count_nonzero(columns) < 2:
        raise DomainError(f"Integration depth {h} m leaves fewer than two depth samples")
    z = exact.depths[columns]
    t = exact.time_axis

    def integrate(y: np.ndarray) -> complex:
        return trapezoid(trapezoid(y, z, axis=1), t)

    result = _overlap(exact.values[:, columns], est.values[:, columns], integrate)
    return FidelityResult(result.value, result.a_exact, result.a_est, (0.0, float(z[-1])))


def _crossing(x0: float, x1: float, f0: float, f1: float, threshold: float) -> float:
    if f1 == f0:
        return x0
    return x0 + (threshold - f0) * (x1 - x0) / (f1 - f0)


def confidence_range(
    x: ArrayLike, fidelity: ArrayLike, threshold: float = DEFAULT_THRESHOLD, *, unit: str = "Hz"
) -> ConfidenceRange:
    """Maximal intervals with F > threshold; single-sample dips are reported but do not split."""

    xs = np.asarray(x, dtype=float)
    fs = np.asarray(fidelity, dtype=float)
    if xs.shape != fs.shape or xs.ndim != 1:
        raise DimensionError("Sweep grid and fidelity curve must be 1-D and of equal length")
    if xs.size > 1 and np.any(np.diff(xs) <= 0):
        raise DomainError("Sweep grid must be strictly ascending")

    above = fs > threshold
    dips: list[float] = []
    for i in range(1, xs.size - 1):
        if not above[i] and above[i - 1] and above[i + 1]:
            dips.append(float(xs[i]))
    if dips:
        logger.info("Fidelity dips below %.2f treated as non-splitting at %s", threshold, dips)
        above = above | np.isin(xs, dips)

    intervals: list[tuple[float, float]] = []
    i = 0
    while i < xs.size:
        if not above[i]:
            i += 1
            continue
        start = i
        while i + 1 < xs.size and above[i + 1]:
            i += 1
        stop = i
        lo = xs[0] if start == 0 else _crossing(xs[start - 1], xs[start], fs[start - 1], fs[start], threshold)
        hi = xs[-1] if stop == xs.size - 1 else _crossing(xs[stop], xs[stop + 1], fs[stop], fs[stop + 1], threshold)
        intervals.append((float(lo), float(hi)))
        i += 1
    return ConfidenceRange(threshold=threshold, intervals=intervals, dips=dips, unit=unit)


def nyquist_frequency(dz: float, c: float) -> float:
    """Sampling-theorem bound c / (2 dz) for a uniform array."""

    if not dz > 0 or not c > 0:
        raise DomainError("Spacing and sound speed must be positive")
    return c / (2.0 * dz)
