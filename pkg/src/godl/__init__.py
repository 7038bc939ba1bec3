"""Fall detection from 3-D skeleton sequences with robust (GNC-weighted) dictionary learning."""

from .dictionary import Dictionary, OdlConfig
from .errors import GodlError
from .evalharness import Metrics, evaluate, noise_sweep
from .gnc import GncConfig, godl_train, train_all, update_weights
from .inference import detect, detect_many
from .model import FallModel, TemporalParams, load_model, save_model
from .pipeline import TrainConfig, train_model
from .skeleton_io import SkeletonSequence, build_features, normalize, parse_sequence, read_sequence
from .sparse_coding import FistaConfig, fista_lasso
from .synthetic import SynthConfig, generate_synthetic, inject_outliers

__version__ = "0.1.0"

__all__ = [
    "Dictionary", "OdlConfig", "GodlError", "Metrics", "evaluate", "noise_sweep",
    "GncConfig", "godl_train", "train_all", "update_weights", "detect", "detect_many",
    "FallModel", "TemporalParams", "load_model", "save_model", "TrainConfig", "train_model",
    "SkeletonSequence", "build_features", "normalize", "parse_sequence", "read_sequence",
    "FistaConfig", "fista_lasso", "SynthConfig", "generate_synthetic", "inject_outliers",
]
