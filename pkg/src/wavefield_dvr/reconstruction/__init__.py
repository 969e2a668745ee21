from .dvr import (
    DvrBasis,
    ReconstructedProfile,
    bandwidth_defect,
    basis_for_spacing,
    build_dvr,
    build_dvr_numeric,
    effective_depth,
    eval_chi,
    eval_phi,
    hydrophone_count,
    j_max_for_hydrophones,
    reconstruct,
)
from .metrics import confidence_range, fidelity_cw, fidelity_pulse, nyquist_frequency
from .sensing import (
    ArraySpec,
    DisplacementModel,
    add_noise,
    average_measurements,
    displace,
    rng_stream,
    sample_field,
    simulate_average,
    simulate_realization,
)

__all__ = [
    "ArraySpec",
    "DisplacementModel",
    "DvrBasis",
    "ReconstructedProfile",
    "add_noise",
    "average_measurements",
    "bandwidth_defect",
    "basis_for_spacing",
    "build_dvr",
    "build_dvr_numeric",
    "confidence_range",
    "displace",
    "effective_depth",
    "eval_chi",
    "eval_phi",
    "fidelity_cw",
    "fidelity_pulse",
    "hydrophone_count",
    "j_max_for_hydrophones",
    "nyquist_frequency",
    "reconstruct",
    "rng_stream",
    "sample_field",
    "simulate_average",
    "simulate_realization",
]
