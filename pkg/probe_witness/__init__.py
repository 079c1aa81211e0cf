__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    ContractError,
    ConvergenceError,
    DimensionError,
    FitError,
    ProbeWitnessError,
    UsageError,
)
from .interference import (  # noqa: E402
    ExternalPhase,
    InterferencePattern,
    ProbeScenario,
    WitnessReport,
    calibrate,
    extract_observable,
    fit_pattern,
    intensity,
    pattern_params,
    separable_minimum,
    witness_verdict,
)
from .states import BellKind, DensityMatrix, ppt_check  # noqa: E402

__all__ = [
    "BellKind",
    "ConfigError",
    "ContractError",
    "ConvergenceError",
    "DensityMatrix",
    "DimensionError",
    "ExternalPhase",
    "FitError",
    "InterferencePattern",
    "ProbeScenario",
    "ProbeWitnessError",
    "UsageError",
    "WitnessReport",
    "calibrate",
    "extract_observable",
    "fit_pattern",
    "intensity",
    "pattern_params",
    "ppt_check",
    "separable_minimum",
    "witness_verdict",
]
