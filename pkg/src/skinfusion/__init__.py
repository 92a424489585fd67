"""Skin detection with small sigmoid MLPs and classifier fusion."""

from .color import FeatureKind, Ycbcr, extract_feature, features_from_rgb, normalize_feature, rgb_to_ycbcr
from .evaluate import EvalResult, metrics, segment, threshold
from .mlp import Network, TrainConfig, Topology, forward, init_network, jacobian, mse, train_lm
from .search import SearchReport, coarse_to_fine, fine_range

__version__ = "0.1.0"

__all__ = [
    "EvalResult",
    "FeatureKind",
    "Network",
    "SearchReport",
    "Topology",
    "TrainConfig",
    "Ycbcr",
    "coarse_to_fine",
    "extract_feature",
    "features_from_rgb",
    "fine_range",
    "forward",
    "init_network",
    "jacobian",
    "metrics",
    "mse",
    "normalize_feature",
    "rgb_to_ycbcr",
    "segment",
    "threshold",
    "train_lm",
]
