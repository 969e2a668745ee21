from __future__ import annotations

from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, Optional

import numpy as np

from ..errors import DimensionError

__all__ = ["ConfidenceRange", "FidelityResult", "Measurement", "MEASUREMENT_KINDS", "RunLog"]

MEASUREMENT_KINDS = ("clean", "displaced", "noisy", "averaged")


def _utc_iso() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass(frozen=True, eq=False)
class Measurement:
    """Complex pressure at the hydrophone depths z_j = j dz, j = 1..J."""

    values: np.ndarray
    depths: np.ndarray
    kind: str
    seed: Optional[int] = None
    n_realizations: int = 1
    realized_snr_db: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in MEASUREMENT_KINDS:
            raise ValueError(f"Unknown measurement kind: {self.kind}")
        if self.values.shape != self.depths.shape:
            raise DimensionError(
                f"Measurement has {self.values.size} values for {self.depths.size} depths"
            )

    @property
    def size(self) -> int:
        return int(self.values.size)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "real": self.values.real.tolist(),
            "imag": self.values.imag.tolist(),
            "depths": self.depths.tolist(),
            "kind": self.kind,
            "seed": self.seed,
            "n_realizations": self.n_realizations,
            "realized_snr_db": self.realized_snr_db,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Measurement":
        return cls(
            values=np.asarray(data["real"], dtype=float) + 1j * np.asarray(data["imag"], dtype=float),
            depths=np.asarray(data["depths"], dtype=float),
            kind=data["kind"],
            seed=data.get("seed"),
            n_realizations=data.get("n_realizations", 1),
            realized_snr_db=data.get("realized_snr_db"),
        )


@dataclass(frozen=True)
class FidelityResult:
    value: float
    a_exact: float
    a_est: float
    domain: tuple[float, float]

    def to_dict(self) -> Dict[str, Any]:
        payload = asdict(self)
        payload["domain"] = list(self.domain)
        return payload

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "FidelityResult":
        return cls(
            value=data["value"],
            a_exact=data["a_exact"],
            a_est=data["a_est"],
            domain=tuple(data["domain"]),
        )


@dataclass
class ConfidenceRange:
    """Maximal intervals of the sweep variable where fidelity exceeds ``threshold``."""

    threshold: float
    intervals: list[tuple[float, float]]
    dips: list[float] = field(default_factory=list)
    unit: str = "Hz"

    @property
    def upper_boundary(self) -> Optional[float]:
        return self.intervals[-1][1] if self.intervals else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "threshold": self.threshold,
            "intervals": [list(interval) for interval in self.intervals],
            "dips": list(self.dips),
            "unit": self.unit,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ConfidenceRange":
        return cls(
            threshold=data["threshold"],
            intervals=[tuple(interval) for interval in data["intervals"]],
            dips=list(data.get("dips", [])),
            unit=data.get("unit", "Hz"),
        )


@dataclass
class RunLog:
    run_id: str
    command: str
    config_digest: str
    seed: Optional[int]
    outputs: list[str]
    duration_s: float
    created_at: str = field(default_factory=_utc_iso)
    details: Dict[str, Any] | None = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunLog":
        return cls(**data)
