from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.typing import ArrayLike
from scipy.linalg import eigh

from ..errors import ConfigError, ConsistencyError, DimensionError, DomainError

__all__ = [
    "DvrBasis",
    "ReconstructedProfile",
    "bandwidth_defect",
    "basis_for_spacing",
    "build_dvr",
    "build_dvr_numeric",
    "effective_depth",
    "eval_chi",
    "eval_phi",
    "hydrophone_count",
    "j_max_for_hydrophones",
    "reconstruct",
    "spacing_hydrophone_count",
]

logger = logging.getLogger(__name__)

TRIDIAGONAL_TOLERANCE = 1e-10
GAUSS_NODES_PER_PANEL = 16


def _check_depths(z: ArrayLike, L_eff: float) -> np.ndarray:
    depths = np.asarray(z, dtype=float)
    slack = 1e-9 * L_eff
    if np.any(depths < -slack) or np.any(depths > L_eff + slack):
        raise DomainError(f"Depth outside [0, {L_eff}] m")
    return depths


def _check_size(j_max: int, L_eff: float) -> None:
    if int(j_max) != j_max or j_max < 1:
        raise DomainError(f"j_max must be a positive integer, got {j_max}")
    if not L_eff > 0:
        raise DomainError(f"L_eff must be positive, got {L_eff}")


def _phi_matrix(z: np.ndarray, count: int, L_eff: float) -> np.ndarray:
    """phi_i(z) for i = 1..count, shape z.shape + (count,)."""

    harmonics = (2.0 * np.arange(1, count + 1) - 1.0) * math.pi / (2.0 * L_eff)
    return math.sqrt(2.0 / L_eff) * np.sin(z[..., None] * harmonics)


def eval_phi(i: int, z: ArrayLike, L_eff: float) -> np.ndarray | float:
    """Auxiliary harmonic sqrt(2/L) sin((2i - 1) pi z / (2L)); Dirichlet at 0, Neumann at L."""

    if int(i) != i or i < 1:
        raise DomainError(f"Harmonic index must be >= 1, got {i}")
    depths = _check_depths(z, L_eff)
    values = math.sqrt(2.0 / L_eff) * np.sin((2 * i - 1) * math.pi * depths / (2.0 * L_eff))
    return values if np.ndim(z) else float(values)


@dataclass(frozen=True, eq=False)
class DvrBasis:
    """DVR functions chi_j = sum_i V_ij phi_i pinned to the depths z_j = j dz."""

    j_max: int
    L_eff: float
    dz: float
    grid_depths: np.ndarray
    eigenvalues: np.ndarray
    eigvecs: np.ndarray

    def phi_matrix(self, z: ArrayLike) -> np.ndarray:
        return _phi_matrix(_check_depths(z, self.L_eff), self.j_max, self.L_eff)

    def chi_matrix(self, z: ArrayLike, count: Optional[int] = None) -> np.ndarray:
        """chi_j(z) for j = 1..count, shape z.shape + (count,)."""

        count = self.j_max if count is None else count
        return self.phi_matrix(z) @ self.eigvecs[:, :count]

    def chi(self, j: int, z: ArrayLike) -> np.ndarray | float:
        return eval_chi(self, j, z)


def build_dvr(j_max: int, L_eff: float) -> DvrBasis:
    """Closed-form DVR basis.

    f_j = cos(j pi / (j_max + 1/2)), z_j = j dz with dz = L_eff / (j_max + 1/2) and
    V_ij = sqrt(2 / (j_max + 1/2)) sin((i - 1/2) j pi / (j_max + 1/2)).
    """

    _check_size(j_max, L_eff)
    j_max = int(j_max)
    half = j_max + 0.5
    index = np.arange(1, j_max + 1)
    theta = index * math.pi / half
    eigvecs = math.sqrt(2.0 / half) * np.sin(np.outer(index - 0.5, theta))
    dz = L_eff / half
    return DvrBasis(
        j_max=j_max,
        L_eff=float(L_eff),
        dz=dz,
        grid_depths=index * dz,
        eigenvalues=np.cos(theta),
        eigvecs=eigvecs,
    )


def _gauss_legendre(L_eff: float, panels: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = leggauss(GAUSS_NODES_PER_PANEL)
    edges = np.linspace(0.0, L_eff, panels + 1)
    half_width = 0.5 * np.diff(edges)
    centres = 0.5 * (edges[:-1] + edges[1:])
    z = (centres[:, None] + half_width[:, None] * nodes[None, :]).ravel()
    w = (half_width[:, None] * weights[None, :]).ravel()
    return z, w


def position_matrix(j_max: int, L_eff: float, *, panels: Optional[int] = None) -> np.ndarray:
    """Z_mn = integral phi_m cos(pi z / L_eff) phi_n dz by composite Gauss-Legendre."""

    _check_size(j_max, L_eff)
    panels = panels or max(8, 2 * int(j_max) + 2)
    z, w = _gauss_legendre(L_eff, panels)
    phi = _phi_matrix(z, int(j_max), L_eff)
    return phi.T @ (phi * (w * np.cos(math.pi * z / L_eff))[:, None])


def build_dvr_numeric(j_max: int, L_eff: float) -> DvrBasis:
    """DVR basis by diagonalising the position matrix; reference for :func:`build_dvr`."""

    Z = position_matrix(j_max, L_eff)
    band = np.abs(np.triu(Z, 2))
    if band.size and float(np.max(band)) > TRIDIAGONAL_TOLERANCE:
        logger.error("Position matrix is not tridiagonal (max off-band %.3g)", float(np.max(band)))
        raise ConsistencyError("Position matrix Z is not tridiagonal")

    eigenvalues, eigvecs = eigh(Z)
    order = np.argsort(eigenvalues)[::-1]
    eigenvalues = eigenvalues[order]
    eigvecs = eigvecs[:, order]
    for column in eigvecs.T:
        nonzero = np.flatnonzero(np.abs(column) > 1e-12)
        if nonzero.size and column[nonzero[0]] < 0:
            column *= -1.0
    depths = L_eff / math.pi * np.arccos(np.clip(eigenvalues, -1.0, 1.0))
    return DvrBasis(
        j_max=int(j_max),
        L_eff=float(L_eff),
        dz=L_eff / (j_max + 0.5),
        grid_depths=depths,
        eigenvalues=eigenvalues,
        eigvecs=eigvecs,
    )


def eval_chi(basis: DvrBasis, j: int, z: ArrayLike) -> np.ndarray | float:
    if int(j) != j or not 1 <= j <= basis.j_max:
        raise DomainError(f"DVR index must be in [1, {basis.j_max}], got {j}")
    values = basis.phi_matrix(z) @ basis.eigvecs[:, int(j) - 1]
    return values if np.ndim(z) else float(values)


@dataclass(frozen=True, eq=False)
class ReconstructedProfile:
    """Psi_est(z) = sqrt(dz) sum_{j <= J} samples_j chi_j(z); deeper terms are dropped."""

    basis: DvrBasis
    samples: np.ndarray

    def __call__(self, z: ArrayLike) -> np.ndarray:
        count = self.samples.size
        return math.sqrt(self.basis.dz) * (self.basis.chi_matrix(z, count) @ self.samples)

    def real(self, z: ArrayLike) -> np.ndarray:
        """Reconstructed real pressure u = Re Psi_est."""

        return np.real(self(z))


def reconstruct(basis: DvrBasis, samples: ArrayLike) -> ReconstructedProfile:
    values = np.asarray(samples, dtype=complex).ravel()
    if values.size > basis.j_max:
        raise DimensionError(f"{values.size} samples exceed basis size j_max={basis.j_max}")
    return ReconstructedProfile(basis=basis, samples=values)


def bandwidth_defect(
    field: Callable[[np.ndarray], ArrayLike],
    j_max: int,
    L_eff: float,
    *,
    relative: bool = False,
    panels: Optional[int] = None,
) -> float:
    """epsilon = | sum_{j <= j_max} |a_j|^2 - integral |Psi|^2 dz | with a_j = <phi_j, Psi>."""

    _check_size(j_max, L_eff)
    z, w = _gauss_legendre(L_eff, panels or max(32, 8 * int(j_max)))
    values = np.asarray(field(z), dtype=complex)
    coefficients = _phi_matrix(z, int(j_max), L_eff).T @ (w * values)
    norm = float(np.sum(w * np.abs(values) ** 2))
    defect = abs(float(np.sum(np.abs(coefficients) ** 2)) - norm)
    if relative:
        return defect / norm if norm > 0 else 0.0
    return defect


def effective_depth(dz_desired: float, j_max: int, h: Optional[float] = None) -> float:
    """Fictitious depth L' = (j_max + 1/2) dz that puts the DVR grid on the given spacing."""

    if not dz_desired > 0:
        raise DomainError(f"Spacing must be positive, got {dz_desired}")
    _check_size(j_max, 1.0)
    L_prime = (j_max + 0.5) * dz_desired
    if h is not None and L_prime < h:
        logger.error("Effective depth %.3f m is shallower than the water column %.3f m", L_prime, h)
        raise ConfigError(f"Effective depth {L_prime:.3f} m is shallower than h={h} m")
    return L_prime


def _spacing_j_max(dz: float, L: float) -> int:
    return max(1, math.ceil(L / dz - 0.5 - 1e-9))


def basis_for_spacing(dz: float, L: float, h: Optional[float] = None) -> DvrBasis:
    """Smallest basis with L' >= L on the requested spacing."""

    j_max = _spacing_j_max(dz, L)
    return build_dvr(j_max, effective_depth(dz, j_max, h))


def hydrophone_count(basis: DvrBasis, h: float) -> int:
    """J = floor(j_max h / L_eff): DVR depths inside the water column."""

    return min(basis.j_max, int(math.floor(basis.j_max * h / basis.L_eff + 1e-9)))


def spacing_hydrophone_count(dz: float, L: float, h: float) -> int:
    """J for the basis that ``basis_for_spacing(dz, L, h)`` builds, without building it."""

    if not dz > 0:
        raise DomainError(f"Spacing must be positive, got {dz}")
    j_max = _spacing_j_max(dz, L)
    return min(j_max, int(math.floor(j_max * h / ((j_max + 0.5) * dz) + 1e-9)))


def j_max_for_hydrophones(J: int, h: float, L: float) -> int:
    """Smallest j_max with floor(j_max h / L) = J."""

    if J < 1:
        raise DomainError(f"Hydrophone count must be >= 1, got {J}")
    return int(math.ceil(J * L / h - 1e-9))
