"""Python access to the heralded AFC storage simulator."""

from ._core import (
    AnalysisError,
    ConfigError,
    FormatError,
    afc_efficiency,
    afc_efficiency_numeric,
    cauchy_schwarz_R,
    g2_input_prediction,
    read_timestamps,
    run_point,
    run_scenario,
    simulate,
    visibility_from_g2,
    write_timestamps,
)

__version__ = "1.0.0"

__all__ = [
    "AnalysisError",
    "ConfigError",
    "FormatError",
    "afc_efficiency",
    "afc_efficiency_numeric",
    "cauchy_schwarz_R",
    "g2_input_prediction",
    "read_timestamps",
    "run_point",
    "run_scenario",
    "simulate",
    "visibility_from_g2",
    "write_timestamps",
]
