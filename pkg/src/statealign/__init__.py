"""State-sequence alignment toolkit for anomaly root-cause analysis.

The pipeline runs per series: fit a local-level state-space model, smooth,
standardize residuals, discretize them into ordered warning states, then
align state sequences pairwise under truncation shifts to score directional
causality, cluster series on alignment cost, and rank the members of suspect
clusters by how often they lead their peers.
"""

from .align import (
    AlignmentResult,
    DCIResult,
    PairwiseMatrices,
    WarpPath,
    causality_index,
    dtw,
    pairwise_alignment,
    shifted_dtw,
    state_distance,
)
from .cluster import (
    ClusterResult,
    RootCauseRanking,
    cluster_causality_score,
    gini_impurity,
    rank_root_causes,
    sac_dtw_cluster,
)
from .config import PipelineConfig
from .discretize import (
    DEFAULT_CUTS,
    FIVE_STATE_SIGNED,
    THREE_STATE,
    HmmParams,
    StateAlphabet,
    StateSequence,
    hmm_decode,
    hmm_fit,
    standardize,
    threshold_discretize,
)
from .errors import (
    AlphabetMismatch,
    BadDistanceMatrix,
    ConfigError,
    ContractViolation,
    DegenerateFitWarning,
    DegenerateSeries,
    DegenerateSeriesWarning,
    EmptySequence,
    InsufficientOverlapWarning,
    IrregularStrideWarning,
    MissingLabels,
    NumericalBreakdown,
    ParseError,
    SegmentTooShort,
    ShiftTooLarge,
    SpecInvalid,
    StabilityWarning,
    StateAlignError,
)
from .model import (
    FilterResult,
    FitOptions,
    ModelParams,
    ResidualProcess,
    SeriesMeta,
    SmoothResult,
    TimeSeriesSegment,
    extract_residuals,
    fit_and_smooth,
    fit_local_level,
    kalman_filter,
    kalman_smooth,
    smooth_view_of_filter,
)
from .pipeline import (
    CausalityReport,
    ClusterRecord,
    EvaluationBlock,
    PairRecord,
    SeriesTrace,
    emit_outputs,
    ingest_csv,
    run_pipeline,
)
from .simulate import (
    ExperimentResult,
    InjectionRecord,
    SimDataset,
    SimSpec,
    cdtw_baseline,
    classification_error,
    generate_dataset,
    method_matrices,
    run_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult",
    "AlphabetMismatch",
    "BadDistanceMatrix",
    "CausalityReport",
    "ClusterRecord",
    "ClusterResult",
    "ConfigError",
    "ContractViolation",
    "DCIResult",
    "DEFAULT_CUTS",
    "DegenerateFitWarning",
    "DegenerateSeries",
    "DegenerateSeriesWarning",
    "EmptySequence",
    "EvaluationBlock",
    "ExperimentResult",
    "FIVE_STATE_SIGNED",
    "FilterResult",
    "FitOptions",
    "HmmParams",
    "InjectionRecord",
    "InsufficientOverlapWarning",
    "IrregularStrideWarning",
    "MissingLabels",
    "ModelParams",
    "NumericalBreakdown",
    "PairRecord",
    "PairwiseMatrices",
    "ParseError",
    "PipelineConfig",
    "ResidualProcess",
    "RootCauseRanking",
    "SegmentTooShort",
    "SeriesMeta",
    "SeriesTrace",
    "ShiftTooLarge",
    "SimDataset",
    "SimSpec",
    "SmoothResult",
    "SpecInvalid",
    "StabilityWarning",
    "StateAlignError",
    "StateAlphabet",
    "StateSequence",
    "THREE_STATE",
    "TimeSeriesSegment",
    "WarpPath",
    "causality_index",
    "cdtw_baseline",
    "classification_error",
    "cluster_causality_score",
    "dtw",
    "emit_outputs",
    "extract_residuals",
    "fit_and_smooth",
    "fit_local_level",
    "generate_dataset",
    "gini_impurity",
    "hmm_decode",
    "hmm_fit",
    "ingest_csv",
    "kalman_filter",
    "kalman_smooth",
    "method_matrices",
    "pairwise_alignment",
    "rank_root_causes",
    "run_experiment",
    "run_pipeline",
    "sac_dtw_cluster",
    "shifted_dtw",
    "smooth_view_of_filter",
    "standardize",
    "state_distance",
    "threshold_discretize",
    "__version__",
]
