"""Desk-scale trajectory forecasting lab with angle-partitioned social context."""

from .data import (
    AgentTrack,
    NormalizationTransform,
    PredictionCase,
    TrajectoryParseError,
    build_windows,
    infer_frame_step,
    load_trajectory_file,
    normalize_case,
    parse_trajectory_file,
    select_neighbors,
)
from .social import (
    AngleDomainError,
    AttentionProfile,
    ConfigError,
    MetaMatrix,
    PartitionConfig,
    assign_partition,
    assign_partitions,
    attention_scores,
    compute_meta,
    factors_from_codes,
    inject_manual_neighbor,
    relative_angle,
    zero_pad,
)
from .model import (
    ModelConfig,
    ParameterStore,
    PredictionOutput,
    embed_social,
    embed_trajectory,
    forward,
    fuse,
    sample_K,
)
from .metrics import EvalReport, ade, derive_case_seed, evaluate, fde, min_over_k
from .training import AdamState, TrainConfig, TrainingDivergedError, adam_step, train
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .probe import predictor, run_probe

__version__ = "0.1.0"

__all__ = [
    "AgentTrack",
    "AngleDomainError",
    "AttentionProfile",
    "AdamState",
    "CheckpointError",
    "ConfigError",
    "EvalReport",
    "MetaMatrix",
    "ModelConfig",
    "NormalizationTransform",
    "ParameterStore",
    "PartitionConfig",
    "PredictionCase",
    "PredictionOutput",
    "TrainConfig",
    "TrainingDivergedError",
    "TrajectoryParseError",
    "adam_step",
    "ade",
    "assign_partition",
    "assign_partitions",
    "attention_scores",
    "build_windows",
    "compute_meta",
    "derive_case_seed",
    "embed_social",
    "embed_trajectory",
    "evaluate",
    "factors_from_codes",
    "fde",
    "forward",
    "fuse",
    "infer_frame_step",
    "inject_manual_neighbor",
    "load_checkpoint",
    "load_trajectory_file",
    "min_over_k",
    "normalize_case",
    "parse_trajectory_file",
    "predictor",
    "relative_angle",
    "run_probe",
    "sample_K",
    "save_checkpoint",
    "select_neighbors",
    "train",
    "zero_pad",
]
