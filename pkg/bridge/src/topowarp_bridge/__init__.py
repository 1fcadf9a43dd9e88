"""Array-in/array-out bindings over the topowarp public API, shaped for
training loops: hand in numpy buffers, get numpy buffers back, no wrapper
objects to unpack at the call site.

Masks are accepted as uint8 or bool; a contiguous buffer is used as-is
(bool is reinterpreted in place, same item size), anything else is
rejected rather than coerced. Likelihood maps are accepted as float32 or
float64; float32 input costs exactly one widening copy, and gradients come
back float64 so they match the core results bit for bit.

The underlying kernels release the interpreter lock while they run, so
calls from multiple host threads execute concurrently; every call treats
its inputs as read-only and returns freshly allocated outputs.

Option keywords mirror the core configuration dataclasses one-to-one
(``passes``, ``metric``, ``tie_break``, ``seed``,
``recompute_distance_each_pass``; ``epsilon``, ``dice_smooth``,
``reduction``). There is no binding-only behavior.
"""
from __future__ import annotations

import dataclasses
from typing import Optional, Tuple, Union

import numpy as np

import topowarp as _core

__all__ = [
    "critical_mask_py",
    "warping_loss_py",
    "warp",
    "betti",
    "metrics",
    "__version__",
]

__version__ = _core.__version__

_WARP_KEYS = {f.name for f in dataclasses.fields(_core.WarpConfig)}
_LOSS_KEYS = {f.name for f in dataclasses.fields(_core.LossConfig)} \
    - {"pixel_loss", "lambda_warp"}


def _as_mask(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype == np.bool_:
        arr = np.ascontiguousarray(arr).view(np.uint8)
    elif arr.dtype != np.uint8:
        raise TypeError(
            f"{name} must be a uint8 or bool array, got {arr.dtype}")
    return np.ascontiguousarray(arr)


def _as_likelihood(arr, name: str = "f") -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype == np.float32:
        return arr.astype(np.float64)
    if arr.dtype == np.float64:
        return np.ascontiguousarray(arr)
    raise TypeError(
        f"{name} must be a float32 or float64 array, got {arr.dtype}")


def _split_options(options: dict) -> Tuple[_core.WarpConfig, dict]:
    warp_kwargs = {}
    loss_kwargs = {}
    for key, value in options.items():
        if key in _WARP_KEYS:
            warp_kwargs[key] = value
        elif key in _LOSS_KEYS:
            loss_kwargs[key] = value
        else:
            raise TypeError(f"unknown option {key!r}")
    return _core.WarpConfig(**warp_kwargs), loss_kwargs


def critical_mask_py(pred_binary, gt, **options
                     ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Critical cells of a binary prediction against its reference.

    Returns ``(M, M_g, M_f)`` as uint8 arrays: cells that stay wrong after
    warping the reference toward the prediction (M_g), after warping the
    prediction toward the reference (M_f), and their union (M). Identical
    inputs give three zero arrays.
    """
    pred = _as_mask(pred_binary, "pred_binary")
    ref = _as_mask(gt, "gt")
    if pred.shape != ref.shape:
        raise ValueError(
            f"shape mismatch: pred {pred.shape} vs gt {ref.shape}")
    config, extra = _split_options(options)
    if extra:
        raise TypeError(f"unknown option {sorted(extra)[0]!r}")
    crit = _core.critical_mask(pred, ref, config)
    return (crit.mask.to_array(), crit.from_gt_warp.to_array(),
            crit.from_pred_warp.to_array())


def warping_loss_py(f, gt, lambda_warp: Optional[float] = None,
                    pixel_loss: Union[str, _core.PixelLoss] = "cross-entropy",
                    **options) -> Tuple[float, np.ndarray]:
    """Combined training objective and its gradient for one instance.

    ``f`` is the likelihood map, ``gt`` the reference mask. Returns
    ``(l_total, gradient)`` where the gradient is a float64 array of the
    map's shape, suitable as the constant Jacobian of a custom autodiff
    op. ``lambda_warp=0`` reduces the value to the plain soft-Dice term.
    """
    fmap = _as_likelihood(f)
    ref = _as_mask(gt, "gt")
    if fmap.shape != ref.shape:
        raise ValueError(f"shape mismatch: f {fmap.shape} vs gt {ref.shape}")
    warp_config, loss_kwargs = _split_options(options)
    loss_config = _core.LossConfig(pixel_loss=pixel_loss,
                                   lambda_warp=lambda_warp, **loss_kwargs)
    report = _core.total_loss(fmap, ref, loss_config, warp_config)
    return report.l_total, report.gradient


def warp(source, target, **options):
    """Homotopic warp of one mask toward another; returns the core result
    record (arrays inside: ``warped``, ``residual``, flip log, counts)."""
    src = _as_mask(source, "source")
    tgt = _as_mask(target, "target")
    config, extra = _split_options(options)
    if extra:
        raise TypeError(f"unknown option {sorted(extra)[0]!r}")
    return _core.warp(src, tgt, config)


def betti(mask, adjacency: Optional[int] = None) -> Tuple[int, ...]:
    """Betti numbers of a mask as a plain tuple: (b0, b1) or (b0, b1, b2)."""
    grid = _core.Grid.from_array(_as_mask(mask, "mask"), adjacency)
    return _core.betti(grid).as_tuple()


def metrics(pred, gt, **kwargs) -> dict:
    """Evaluation metrics for a mask pair as a plain dict (see the core
    ``evaluate`` for the knobs: patch, samples, dims_used, seed)."""
    return _core.evaluate(_as_mask(pred, "pred"), _as_mask(gt, "gt"),
                          **kwargs).to_dict()
