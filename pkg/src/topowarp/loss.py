"""Training losses: a masked per-cell loss over the critical cells, a soft
Dice term over the whole map, and their weighted combination, all with
analytic per-cell gradients.

The critical mask depends on the likelihood map only through thresholding,
so it is frozen per evaluation and carries no gradient; a training loop
recomputes it each iteration. Gradients are dense float64 fields of the same
shape as the input map.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from .core import Adjacency, Grid, _coerce
from .warp import CriticalMask, WarpConfig, critical_mask

__all__ = [
    "PixelLoss",
    "LikelihoodMap",
    "LossConfig",
    "LossReport",
    "binarize",
    "warping_loss",
    "total_loss",
    "DEFAULT_LAMBDA_2D",
    "DEFAULT_LAMBDA_3D",
]

DEFAULT_LAMBDA_2D = 1e-4
DEFAULT_LAMBDA_3D = 2e-5


class PixelLoss(enum.Enum):
    CROSS_ENTROPY = "cross-entropy"
    MEAN_SQUARED_ERROR = "mse"
    SOFT_DICE = "soft-dice"

    @staticmethod
    def parse(value: Union["PixelLoss", str]) -> "PixelLoss":
        if isinstance(value, PixelLoss):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {
            "cross-entropy": PixelLoss.CROSS_ENTROPY,
            "ce": PixelLoss.CROSS_ENTROPY,
            "bce": PixelLoss.CROSS_ENTROPY,
            "mse": PixelLoss.MEAN_SQUARED_ERROR,
            "mean-squared-error": PixelLoss.MEAN_SQUARED_ERROR,
            "soft-dice": PixelLoss.SOFT_DICE,
            "dice": PixelLoss.SOFT_DICE,
        }
        if key not in aliases:
            raise ValueError(f"unknown pixel loss {value!r}; "
                             f"choose cross-entropy, mse, or soft-dice")
        return aliases[key]


@dataclass(frozen=True)
class LikelihoodMap:
    """A per-cell probability field in [0,1]. Values are stored as float64;
    NaN and Inf are rejected."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim not in (2, 3):
            raise ValueError(f"likelihood map must be 2D or 3D, got {v.shape}")
        if not np.issubdtype(v.dtype, np.floating):
            raise ValueError(f"likelihood values must be floating, got {v.dtype}")
        v = np.ascontiguousarray(v, dtype=np.float64)
        if not np.isfinite(v).all():
            raise ValueError("likelihood map contains NaN or Inf")
        if v.min() < 0.0 or v.max() > 1.0:
            raise ValueError(
                f"likelihood values must lie in [0,1], got range "
                f"[{v.min()}, {v.max()}]")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.values.shape

    @property
    def ndim(self) -> int:
        return self.values.ndim


def _coerce_map(f) -> LikelihoodMap:
    if isinstance(f, LikelihoodMap):
        return f
    return LikelihoodMap(np.asarray(f, dtype=np.float64))


@dataclass(frozen=True)
class LossConfig:
    """pixel_loss applies inside the critical mask; lambda_warp weights that
    term against the global soft Dice (None picks the dimensional default:
    1e-4 in 2D, 2e-5 in 3D). reduction averages or sums the masked per-cell
    losses; soft Dice is a ratio and ignores it."""

    pixel_loss: Union[PixelLoss, str] = PixelLoss.CROSS_ENTROPY
    lambda_warp: Optional[float] = None
    epsilon: float = 1e-7
    dice_smooth: float = 1.0
    reduction: str = "mean"

    def __post_init__(self):
        object.__setattr__(self, "pixel_loss", PixelLoss.parse(self.pixel_loss))
        if self.lambda_warp is not None and self.lambda_warp < 0:
            raise ValueError(f"lambda_warp must be >= 0, got {self.lambda_warp}")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError(f"epsilon must lie in (0, 0.5), got {self.epsilon}")
        if self.dice_smooth <= 0:
            raise ValueError(f"dice_smooth must be > 0, got {self.dice_smooth}")
        if self.reduction not in ("mean", "sum"):
            raise ValueError(f"reduction must be 'mean' or 'sum', got {self.reduction!r}")

    def resolved_lambda(self, ndim: int) -> float:
        if self.lambda_warp is not None:
            return float(self.lambda_warp)
        return DEFAULT_LAMBDA_2D if ndim == 2 else DEFAULT_LAMBDA_3D


@dataclass(frozen=True)
class LossReport:
    l_dice: float
    l_warp: float
    l_total: float
    gradient: np.ndarray
    critical_count: int
    lambda_warp: float


def binarize(f, adjacency: Optional[Union[Adjacency, int]] = None) -> Grid:
    """Threshold a likelihood map at 0.5; exactly 0.5 goes to BG."""
    fmap = _coerce_map(f)
    return Grid.from_array((fmap.values > 0.5).astype(np.uint8), adjacency)


def _soft_dice(f: np.ndarray, g: np.ndarray, smooth: float
               ) -> Tuple[float, np.ndarray]:
    """1 - (2*sum(f*g)+s) / (sum(f)+sum(g)+s), with its gradient in f."""
    a = 2.0 * float((f * g).sum()) + smooth
    b = float(f.sum()) + float(g.sum()) + smooth
    value = 1.0 - a / b
    grad = (a - 2.0 * g * b) / (b * b)
    return value, grad


def _masked_pixel_loss(f: np.ndarray, g: np.ndarray, m: np.ndarray,
                       config: LossConfig) -> Tuple[float, np.ndarray]:
    grad = np.zeros_like(f)
    count = int(m.sum())
    if count == 0:
        return 0.0, grad
    sel = m != 0
    fv = f[sel]
    gv = g[sel].astype(np.float64)
    kind = config.pixel_loss
    if kind is PixelLoss.SOFT_DICE:
        value, gsel = _soft_dice(fv, gv, config.dice_smooth)
        grad[sel] = gsel
        return value, grad
    scale = 1.0 / count if config.reduction == "mean" else 1.0
    if kind is PixelLoss.CROSS_ENTROPY:
        eps = config.epsilon
        fc = np.clip(fv, eps, 1.0 - eps)
        per = -(gv * np.log(fc) + (1.0 - gv) * np.log1p(-fc))
        # the clamp flattens the loss outside [eps, 1-eps]
        active = (fv > eps) & (fv < 1.0 - eps)
        gsel = np.where(active, (-gv / fc + (1.0 - gv) / (1.0 - fc)) * scale, 0.0)
    else:
        per = (fv - gv) ** 2
        gsel = 2.0 * (fv - gv) * scale
    value = float(per.sum()) * scale
    grad[sel] = gsel
    return value, grad


def warping_loss(f, g, m: Union[CriticalMask, Grid, np.ndarray],
                 config: Optional[LossConfig] = None
                 ) -> Tuple[float, np.ndarray]:
    """Per-cell loss between the likelihood map and the reference labels,
    restricted to the critical cells. Returns (value, gradient); the
    gradient is exactly zero outside the mask, and an empty mask gives
    (0, zero field)."""
    if config is None:
        config = LossConfig()
    fmap = _coerce_map(f)
    ref = _coerce(g)
    if isinstance(m, CriticalMask):
        mdata = m.mask.data
    else:
        mdata = _coerce(m).data
    if fmap.dims != ref.dims or fmap.dims != mdata.shape:
        raise ValueError(
            f"dims mismatch: map {fmap.dims}, reference {ref.dims}, "
            f"mask {mdata.shape}")
    return _masked_pixel_loss(fmap.values, ref.data, mdata, config)


def total_loss(f, g, config: Optional[LossConfig] = None,
               warp_config: Optional[WarpConfig] = None) -> LossReport:
    """Combined objective: global soft Dice plus lambda times the masked
    warping loss, with the combined gradient. The critical mask is computed
    from the thresholded map and treated as constant."""
    if config is None:
        config = LossConfig()
    if warp_config is None:
        warp_config = WarpConfig()
    fmap = _coerce_map(f)
    ref = _coerce(g)
    if fmap.dims != ref.dims:
        raise ValueError(f"dims mismatch: map {fmap.dims} vs reference {ref.dims}")

    f_b = binarize(fmap, ref.adjacency)
    crit = critical_mask(f_b, ref, warp_config)
    l_dice, grad_dice = _soft_dice(
        fmap.values, ref.data.astype(np.float64), config.dice_smooth)
    l_warp, grad_warp = _masked_pixel_loss(
        fmap.values, ref.data, crit.mask.data, config)
    lam = config.resolved_lambda(fmap.ndim)
    gradient = grad_dice + lam * grad_warp
    return LossReport(
        l_dice=float(l_dice),
        l_warp=float(l_warp),
        l_total=float(l_dice + lam * l_warp),
        gradient=gradient,
        critical_count=int(crit.mask.data.sum()),
        lambda_warp=lam,
    )
