from .environment import (
    EnvironmentModel,
    density,
    reference_wavenumber,
    refractive_index_sq,
    sound_speed,
)
from .field import (
    BroadbandField,
    CwField,
    PulseField,
    SignalSpectrum,
    broadband_field,
    cw_field,
    gaussian_spectrum,
    pulse_field,
    synthesize_pulse,
)
from .modes import DepthGrid, ModeSet, make_grid, modal_attenuation, solve_modes

__all__ = [
    "BroadbandField",
    "CwField",
    "DepthGrid",
    "EnvironmentModel",
    "ModeSet",
    "PulseField",
    "SignalSpectrum",
    "broadband_field",
    "cw_field",
    "density",
    "gaussian_spectrum",
    "make_grid",
    "modal_attenuation",
    "pulse_field",
    "reference_wavenumber",
    "refractive_index_sq",
    "solve_modes",
    "sound_speed",
    "synthesize_pulse",
]
