"""Seeded synthetic mask pairs: blobs, curves, and road-like line networks.

Used by the benchmark subcommand, the demo scripts, and the test suite.
Every generator is deterministic in its seed.
"""
from __future__ import annotations

from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

__all__ = ["blob_pair", "curve_pair", "road_like_pair"]


def _field(shape: Sequence[int], rng: np.random.Generator,
           smooth: float) -> np.ndarray:
    noise = rng.standard_normal(shape)
    return ndimage.uniform_filter(noise, size=max(3, int(smooth)))


def blob_pair(shape: Sequence[int], seed: int, smooth: float = 7,
              density: float = 0.35, jitter: float = 0.3
              ) -> Tuple[np.ndarray, np.ndarray]:
    """A smooth random blob mask and a correlated variant of it, like a
    segmentation next to its ground truth: the second mask thresholds the
    same underlying field plus `jitter` times an independent one, so the
    two disagree along boundaries and in small islands rather than
    everywhere. Each mask is nonempty for any seed (the quantile threshold
    guarantees FG cells). jitter=0 makes the masks identical."""
    shape = tuple(int(s) for s in shape)
    rng = np.random.default_rng(seed)
    base = _field(shape, rng, smooth)
    bump = _field(shape, rng, smooth)
    a = (base > np.quantile(base, 1.0 - density)).astype(np.uint8)
    shifted = base + float(jitter) * bump
    b = (shifted > np.quantile(shifted, 1.0 - density)).astype(np.uint8)
    return a, b


def _walk(shape: Tuple[int, ...], rng: np.random.Generator,
          steps: int) -> np.ndarray:
    mask = np.zeros(shape, np.uint8)
    pos = np.array([rng.integers(0, s) for s in shape])
    heading = rng.integers(0, len(shape))
    sign = 1 if rng.random() < 0.5 else -1
    for _ in range(steps):
        mask[tuple(pos)] = 1
        if rng.random() < 0.2:
            heading = int(rng.integers(0, len(shape)))
            sign = 1 if rng.random() < 0.5 else -1
        pos[heading] = np.clip(pos[heading] + sign, 0, shape[heading] - 1)
    mask[tuple(pos)] = 1
    return mask


def curve_pair(shape: Sequence[int], seed: int, walks: int = 4,
               thick: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """Two masks of rasterized random-walk curves; the second is a jittered
    relative of the first (shared walks plus its own extras), so the pair
    disagrees along bands rather than everywhere."""
    shape = tuple(int(s) for s in shape)
    rng = np.random.default_rng(seed)
    steps = 2 * max(shape)
    a = np.zeros(shape, np.uint8)
    for _ in range(walks):
        a |= _walk(shape, rng, steps)
    shift = tuple(int(rng.integers(-2, 3)) for _ in shape)
    b = np.zeros_like(a)
    src = tuple(slice(max(0, -s), min(d, d - s)) for s, d in zip(shift, shape))
    dst = tuple(slice(max(0, s), min(d, d + s)) for s, d in zip(shift, shape))
    b[dst] = a[src]
    b |= _walk(shape, rng, steps)
    if thick:
        a = ndimage.binary_dilation(a).astype(np.uint8)
        b = ndimage.binary_dilation(b).astype(np.uint8)
    return a, b


def road_like_pair(size: int = 512, seed: int = 0, spacing: int = 176,
                   wide: int = 141, narrow: int = 11
                   ) -> Tuple[np.ndarray, np.ndarray]:
    """A 2D road network and the same network with every road's width
    changed: alternating roads are wide in the target and narrow in the
    source or vice versa. The two masks share their loop structure, so the
    pair is topologically equivalent and the whole difference is warpable.

    The disagreement forms thick sleeves along every road. Sleeve cells
    sit at graded distances from the source boundary, so the
    distance-ordered pass absorbs a sleeve in one sweep (each tie group is
    adjacent to the previous one), while a naive repeated row-major scan
    grows or peels roughly one cell layer per sweep and needs a sweep count
    proportional to the half-width change. This is the benchmark workload.
    """
    rng = np.random.default_rng(seed)
    source = np.zeros((size, size), np.uint8)
    target = np.zeros((size, size), np.uint8)

    def lines(axis: int) -> None:
        pos = spacing // 2
        flip = bool(rng.integers(0, 2))
        while pos < size - wide:
            center = pos + int(rng.integers(-3, 4))
            w_src, w_tgt = (wide, narrow) if flip else (narrow, wide)
            flip = not flip
            for mask, w in ((source, w_src), (target, w_tgt)):
                lo = max(0, center - w // 2)
                hi = min(size, center + w // 2 + 1)
                if axis == 0:
                    mask[lo:hi, :] = 1
                else:
                    mask[:, lo:hi] = 1
            pos += spacing + int(rng.integers(-5, 6))

    lines(0)
    lines(1)
    return source, target
