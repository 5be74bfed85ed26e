"""Data models for blowuplab."""
from .schemas import (
    ALPHA,
    CUBIC_INDEX,
    BesselEval,
    BlowupPrediction,
    BoundaryPoint,
    ConcentrationConfig,
    ConstantsInput,
    CorrectionEval,
    CurvatureEval,
    CurvatureMaxima,
    CurvatureMaximum,
    DomainKind,
    DomainSpec,
    EnergyBreakdown,
    EnergySampleRecord,
    ErrorNormReport,
    ErrorScalingReport,
    ExpansionConstants,
    ExperimentConfig,
    FieldEval,
    InvariantCheck,
    InvariantReport,
    QDecomposition,
    QuadResult,
    ReducedEnergySample,
    ScalingFit,
    ScalingModel,
    ScalingScan,
    SingularityHint,
    TermScaling,
    Tolerance,
    ToleranceOverrides,
    to_plain,
)

__all__ = [
    "ALPHA",
    "CUBIC_INDEX",
    "BesselEval",
    "BlowupPrediction",
    "BoundaryPoint",
    "ConcentrationConfig",
    "ConstantsInput",
    "CorrectionEval",
    "CurvatureEval",
    "CurvatureMaxima",
    "CurvatureMaximum",
    "DomainKind",
    "DomainSpec",
    "EnergyBreakdown",
    "EnergySampleRecord",
    "ErrorNormReport",
    "ErrorScalingReport",
    "ExpansionConstants",
    "ExperimentConfig",
    "FieldEval",
    "InvariantCheck",
    "InvariantReport",
    "QDecomposition",
    "QuadResult",
    "ReducedEnergySample",
    "ScalingFit",
    "ScalingModel",
    "ScalingScan",
    "SingularityHint",
    "TermScaling",
    "Tolerance",
    "ToleranceOverrides",
    "to_plain",
]
