"""sqzratio: characterize squeezed-light sources from the QNL crossings of
phase-scanned homodyne traces.

The crossing positions of a scanned variance trace through its quantum-noise
limit depend only on the squeezing parameter, not on loss or dark noise.
This package forward-models such traces, measures the crossing-interval
ratio, inverts it to the minimum-uncertainty state, and extracts the loss
budget down to the cavity escape efficiency.
"""

from .analysis import AnalysisReport, analyze_trace
from .efficiency import (
    ConsistencyVerdict,
    EfficiencyBudget,
    EtaEstimate,
    RatioCurve,
    consistency_check,
    escape_efficiency,
    extract_efficiency,
    extract_efficiency_db,
    total_efficiency,
    variance_vs_ratio_curve,
)
from .estimator import (
    Crossing,
    CrossingSet,
    InsufficientScanError,
    RatioEstimate,
    SqueezeEstimate,
    crossing_angles,
    estimate_ratio,
    estimate_squeeze,
    find_crossings,
    lambda_of_r,
    r_of_ratio,
    ratio_of_r,
)
from .schema import REPORT_SCHEMA
from .synth import (
    NoiseSpec,
    ScanSpec,
    Trace,
    detect_turning_points,
    segment_monotone,
    synthesize_trace,
    synthesize_trace_from_variance,
)
from .traceio import read_trace, write_trace
from .variance import (
    ChannelModel,
    SqueezeState,
    VarianceSample,
    apply_loss,
    db_from_linear,
    detected_variance,
    linear_from_db,
    mu_variance,
    r_from_squeeze_db,
    squeeze_db_from_r,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisReport",
    "ChannelModel",
    "ConsistencyVerdict",
    "Crossing",
    "CrossingSet",
    "EfficiencyBudget",
    "EtaEstimate",
    "InsufficientScanError",
    "NoiseSpec",
    "RatioCurve",
    "RatioEstimate",
    "REPORT_SCHEMA",
    "ScanSpec",
    "SqueezeEstimate",
    "SqueezeState",
    "Trace",
    "VarianceSample",
    "analyze_trace",
    "apply_loss",
    "consistency_check",
    "crossing_angles",
    "db_from_linear",
    "detect_turning_points",
    "detected_variance",
    "escape_efficiency",
    "estimate_ratio",
    "estimate_squeeze",
    "extract_efficiency",
    "extract_efficiency_db",
    "find_crossings",
    "lambda_of_r",
    "linear_from_db",
    "mu_variance",
    "r_from_squeeze_db",
    "r_of_ratio",
    "ratio_of_r",
    "read_trace",
    "segment_monotone",
    "squeeze_db_from_r",
    "synthesize_trace",
    "synthesize_trace_from_variance",
    "total_efficiency",
    "variance_vs_ratio_curve",
    "write_trace",
]
