"""topowarp: homotopy-warping toolkit for binary 2D/3D masks.

Simple-point tests, distance-ordered homotopic warping, critical-cell
extraction, a masked warping loss with analytic gradients, and
topology-aware evaluation metrics, with file I/O and a batch CLI.
"""
from ._version import __version__
from .core import (
    Adjacency,
    BettiProfile,
    ComponentLabeling,
    Grid,
    betti,
    bg_components_with_border,
    connected_components,
    euler_characteristic,
    hamming,
    xor_mask,
)
from .distance import DistanceField, Metric, distance_transform
from .loss import (
    LikelihoodMap,
    LossConfig,
    LossReport,
    PixelLoss,
    binarize,
    total_loss,
    warping_loss,
)
from .metrics import (
    MetricReport,
    adapted_rand,
    betti_error,
    dice_score,
    evaluate,
    warping_error,
)
from .simple import (
    NeighborhoodPatch,
    is_simple_2d,
    is_simple_3d,
    is_simple_at,
    oracle_is_simple,
    simple_mask,
)
from .warp import (
    CriticalMask,
    WarpConfig,
    WarpResult,
    critical_mask,
    naive_warp,
    warp,
)

__all__ = [
    "__version__",
    "Adjacency", "Grid", "ComponentLabeling", "BettiProfile",
    "connected_components", "euler_characteristic", "betti",
    "bg_components_with_border", "xor_mask", "hamming",
    "NeighborhoodPatch", "is_simple_2d", "is_simple_3d", "is_simple_at",
    "oracle_is_simple", "simple_mask",
    "Metric", "DistanceField", "distance_transform",
    "WarpConfig", "WarpResult", "CriticalMask",
    "warp", "critical_mask", "naive_warp",
    "PixelLoss", "LikelihoodMap", "LossConfig", "LossReport",
    "binarize", "warping_loss", "total_loss",
    "MetricReport", "dice_score", "adapted_rand", "warping_error",
    "betti_error", "evaluate",
]
