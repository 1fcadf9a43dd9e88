"""File formats: grayscale images and NPY arrays for masks, NPY for
likelihood maps, overlay rendering, and the per-run manifest.

Mask files are strict: an NPY mask must be uint8 with values 0/1 only (a 2
is rejected, not coerced); image masks map 0 to BG and any nonzero gray to
FG. Likelihoods are float32/float64 NPY in [0,1].
"""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from PIL import Image

from ._version import __version__
from .core import Adjacency, Grid, _coerce
from .loss import LikelihoodMap

__all__ = [
    "MaskIOError",
    "IMAGE_SUFFIXES",
    "load_mask",
    "save_mask",
    "load_likelihood",
    "save_likelihood",
    "render_overlay",
    "file_digest",
    "RunManifest",
]

IMAGE_SUFFIXES = {".png", ".bmp", ".pgm", ".tif", ".tiff"}

# overlay palette, fixed: prediction FG gray; critical cells from the
# reference-side warp red, from the prediction-side warp green, both yellow
OVERLAY_BASE = (96, 96, 96)
OVERLAY_GT_SIDE = (220, 50, 47)
OVERLAY_PRED_SIDE = (64, 190, 80)
OVERLAY_BOTH = (240, 200, 40)


class MaskIOError(Exception):
    """Unreadable file or content outside the supported format policy."""


def _kind_of(path: Path, format: Optional[str]) -> str:
    if format is not None:
        kind = format.lower()
        if kind not in ("image", "npy"):
            raise MaskIOError(f"unknown format {format!r}; use 'image' or 'npy'")
        return kind
    suffix = path.suffix.lower()
    if suffix == ".npy":
        return "npy"
    if suffix in IMAGE_SUFFIXES:
        return "image"
    raise MaskIOError(
        f"cannot infer format of {path}; supported: .npy, "
        f"{', '.join(sorted(IMAGE_SUFFIXES))}")


def load_mask(path: Union[str, Path], format: Optional[str] = None,
              adjacency: Optional[Union[Adjacency, int]] = None) -> Grid:
    """Read a binary mask from an 8-bit grayscale image (2D, nonzero = FG)
    or an NPY uint8 array of strict 0/1 values (2D or 3D)."""
    path = Path(path)
    kind = _kind_of(path, format)
    if not path.exists():
        raise MaskIOError(f"no such file: {path}")
    if kind == "image":
        try:
            with Image.open(path) as im:
                arr = np.asarray(im.convert("L"))
        except Exception as exc:
            raise MaskIOError(f"unreadable image {path}: {exc}") from exc
        data = (arr != 0).astype(np.uint8)
    else:
        try:
            arr = np.load(path, allow_pickle=False)
        except Exception as exc:
            raise MaskIOError(f"unreadable NPY {path}: {exc}") from exc
        if arr.dtype != np.uint8:
            raise MaskIOError(
                f"{path}: mask NPY must be uint8, got {arr.dtype}")
        if arr.ndim not in (2, 3):
            raise MaskIOError(f"{path}: mask must be 2D or 3D, got {arr.shape}")
        bad = (arr != 0) & (arr != 1)
        if bad.any():
            where = tuple(int(i) for i in np.argwhere(bad)[0])
            raise MaskIOError(
                f"{path}: mask values must be 0 or 1, found "
                f"{int(arr[where])} at {where}")
        data = np.ascontiguousarray(arr)
    try:
        return Grid.from_array(data, adjacency)
    except ValueError as exc:
        raise MaskIOError(f"{path}: {exc}") from exc


def save_mask(path: Union[str, Path], mask) -> None:
    """Write a mask as .npy (uint8 0/1) or as an image (FG rendered 255)."""
    path = Path(path)
    grid = _coerce(mask)
    kind = _kind_of(path, None)
    if kind == "npy":
        np.save(path, np.ascontiguousarray(grid.data))
        return
    if grid.ndim != 2:
        raise MaskIOError(f"image formats are 2D only; save {path.suffix} "
                          f"from a 2D mask or use .npy")
    Image.fromarray((grid.data * 255).astype(np.uint8), mode="L").save(path)


def load_likelihood(path: Union[str, Path]) -> LikelihoodMap:
    path = Path(path)
    if not path.exists():
        raise MaskIOError(f"no such file: {path}")
    try:
        arr = np.load(path, allow_pickle=False)
    except Exception as exc:
        raise MaskIOError(f"unreadable NPY {path}: {exc}") from exc
    if arr.dtype not in (np.float32, np.float64):
        raise MaskIOError(
            f"{path}: likelihood NPY must be float32/float64, got {arr.dtype}")
    try:
        return LikelihoodMap(arr.astype(np.float64))
    except ValueError as exc:
        raise MaskIOError(f"{path}: {exc}") from exc


def save_likelihood(path: Union[str, Path], values: np.ndarray) -> None:
    np.save(Path(path), np.asarray(values, dtype=np.float32))


def _overlay_rgb(base2d: np.ndarray, gt_side2d: np.ndarray,
                 pred_side2d: np.ndarray) -> np.ndarray:
    h, w = base2d.shape
    rgb = np.zeros((h, w, 3), np.uint8)
    rgb[base2d != 0] = OVERLAY_BASE
    only_g = (gt_side2d != 0) & (pred_side2d == 0)
    only_p = (pred_side2d != 0) & (gt_side2d == 0)
    both = (gt_side2d != 0) & (pred_side2d != 0)
    rgb[only_g] = OVERLAY_GT_SIDE
    rgb[only_p] = OVERLAY_PRED_SIDE
    rgb[both] = OVERLAY_BOTH
    return rgb


def render_overlay(path: Union[str, Path], base, gt_side, pred_side) -> None:
    """Color the critical cells over the prediction mask. For 3D inputs a
    directory of per-slice PNGs (slice_000.png, ...) is written instead."""
    path = Path(path)
    b = _coerce(base).data
    gs = _coerce(gt_side).data
    ps = _coerce(pred_side).data
    if b.ndim == 2:
        Image.fromarray(_overlay_rgb(b, gs, ps), mode="RGB").save(path)
        return
    path.mkdir(parents=True, exist_ok=True)
    for z in range(b.shape[0]):
        rgb = _overlay_rgb(b[z], gs[z], ps[z])
        Image.fromarray(rgb, mode="RGB").save(path / f"slice_{z:03d}.png")


def file_digest(path: Union[str, Path]) -> str:
    hasher = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


class RunManifest:
    """Reproducibility record for one CLI invocation: the argv, resolved
    configuration, content digests of every input, library version, seed,
    and per-stage wall-clock timings. Timings describe the run; every other
    field is deterministic in the inputs."""

    def __init__(self, argv: Sequence[str], config: dict,
                 seed: Optional[int]) -> None:
        self.argv = list(argv)
        self.config = dict(config)
        self.seed = seed
        self.inputs: dict = {}
        self.timings: dict = {}

    def add_input(self, role: str, path: Union[str, Path]) -> None:
        self.inputs[str(role)] = {
            "path": str(path),
            "sha256": file_digest(path),
        }

    def add_timing(self, stage: str, seconds: float) -> None:
        self.timings[stage] = self.timings.get(stage, 0.0) + float(seconds)

    def to_dict(self) -> dict:
        return {
            "argv": self.argv,
            "config": self.config,
            "inputs": self.inputs,
            "version": __version__,
            "seed": self.seed,
            "timings_s": {k: round(v, 6) for k, v in self.timings.items()},
        }

    def write(self, path: Union[str, Path]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
