"""On-off frequency-shift keying over Rician fading with energy combining.

Error probabilities for MAP detection when the receiver knows either the
fading statistics only or the instantaneous fading magnitudes, computed
analytically or by Monte Carlo simulation.
"""

from .analytic import (
    ErrorReport,
    Method,
    asymptotic_pe,
    ebn0_db,
    entropy_bits,
    error_probability,
    pc0,
    pc1_unknown_hypergeom,
    pc1_unknown_integral,
    pe_known_average,
    pe_known_conditional,
    pe_unknown,
    snr_from_ebn0_db,
)
from .detector import DetectorContext, detect, threshold_known, threshold_unknown
from .errors import ConfigError, NumericError
from .model import Knowledge, Normalization, SystemConfig
from .montecarlo import SimPlan, confidence_interval, run

__all__ = [
    "ConfigError",
    "DetectorContext",
    "ErrorReport",
    "Knowledge",
    "Method",
    "Normalization",
    "NumericError",
    "SimPlan",
    "SystemConfig",
    "asymptotic_pe",
    "confidence_interval",
    "detect",
    "ebn0_db",
    "entropy_bits",
    "error_probability",
    "pc0",
    "pc1_unknown_hypergeom",
    "pc1_unknown_integral",
    "pe_known_average",
    "pe_known_conditional",
    "pe_unknown",
    "run",
    "snr_from_ebn0_db",
    "threshold_known",
    "threshold_unknown",
]

__version__ = "0.1.0"
