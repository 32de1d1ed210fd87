"""AFDM integrated sensing and communication simulation laboratory.

Modem, doubly dispersive channel, superimposed-pilot channel estimation,
range-Doppler sensing, and closed-form bound/ambiguity analysis, plus a
config-driven Monte Carlo experiment runner (``afdm-isac`` CLI).
"""

from .errors import AfdmError, ConfigurationError, NumericalError, ParameterError
from .daft import (
    AfdmConfig,
    add_cpp,
    build_daft_matrix,
    chirp_rate_bounds,
    daft,
    idaft,
    remove_cpp,
    waveform_samples,
)

__version__ = "0.1.0"

__all__ = [
    "AfdmError",
    "ConfigurationError",
    "ParameterError",
    "NumericalError",
    "AfdmConfig",
    "idaft",
    "daft",
    "build_daft_matrix",
    "add_cpp",
    "remove_cpp",
    "waveform_samples",
    "chirp_rate_bounds",
    "__version__",
]
