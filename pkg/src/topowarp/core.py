"""Binary masks on the cubical grid: adjacency conventions, connected
components, Euler characteristic, and Betti numbers.

Masks live on 2D or 3D grids, one bit per cell (1 = foreground). Foreground
and background always use complementary adjacencies, (4,8) or (8,4) in 2D
and (6,26) or (26,6) in 3D; anything else breaks the digital Jordan property.
Out-of-range neighbors are background (the mask floats in an infinite
background plane), which keeps loop and cavity counting well defined.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np

from ._kernels import (
    _bg_components_2d,
    _betti_2d,
    _betti_3d,
    _euler_2d,
    _euler_3d,
    _label_2d,
    _label_3d,
)

__all__ = [
    "Adjacency",
    "Grid",
    "ComponentLabeling",
    "BettiProfile",
    "connected_components",
    "euler_characteristic",
    "betti",
    "xor_mask",
    "hamming",
]

_VALID_FG = {2: (4, 8), 3: (6, 26)}
_COMPLEMENT = {4: 8, 8: 4, 6: 26, 26: 6}


@dataclass(frozen=True)
class Adjacency:
    """A complementary foreground/background neighbor pair."""

    fg_neighbors: int

    def __post_init__(self):
        if self.fg_neighbors not in _COMPLEMENT:
            raise ValueError(
                f"fg_neighbors must be one of 4, 8 (2D) or 6, 26 (3D), "
                f"got {self.fg_neighbors}")

    @property
    def bg_neighbors(self) -> int:
        return _COMPLEMENT[self.fg_neighbors]

    @property
    def ndim(self) -> int:
        return 2 if self.fg_neighbors in (4, 8) else 3

    @property
    def fg_full(self) -> bool:
        """True when FG uses the full (8 or 26) neighborhood."""
        return self.fg_neighbors in (8, 26)

    @staticmethod
    def default_for(ndim: int) -> "Adjacency":
        if ndim == 2:
            return Adjacency(4)
        if ndim == 3:
            return Adjacency(6)
        raise ValueError(f"only 2D and 3D grids are supported, got ndim={ndim}")


def _validate_mask(arr: np.ndarray) -> np.ndarray:
    if arr.ndim not in (2, 3):
        raise ValueError(f"mask must be 2D or 3D, got shape {arr.shape}")
    if any(s <= 0 for s in arr.shape):
        raise ValueError(f"mask extents must be positive, got shape {arr.shape}")
    if arr.dtype == bool:
        return np.ascontiguousarray(arr, dtype=np.uint8)
    arr = np.ascontiguousarray(arr)
    if not np.issubdtype(arr.dtype, np.integer):
        raise ValueError(f"mask dtype must be boolean or integer, got {arr.dtype}")
    bad = (arr != 0) & (arr != 1)
    if bad.any():
        where = tuple(int(i) for i in np.argwhere(bad)[0])
        raise ValueError(
            f"mask cells must be 0 or 1; found {int(arr[where])} at {where}")
    return arr.astype(np.uint8, copy=False)


@dataclass(frozen=True)
class Grid:
    """An immutable binary mask with its adjacency convention."""

    data: np.ndarray
    adjacency: Adjacency

    def __post_init__(self):
        arr = _validate_mask(self.data)
        if self.adjacency.ndim != arr.ndim:
            raise ValueError(
                f"adjacency {self.adjacency.fg_neighbors} is for "
                f"{self.adjacency.ndim}D grids, mask is {arr.ndim}D")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @staticmethod
    def from_array(arr, adjacency: Optional[Union[Adjacency, int]] = None) -> "Grid":
        arr = np.asarray(arr)
        if adjacency is None:
            adjacency = Adjacency.default_for(arr.ndim)
        elif isinstance(adjacency, int):
            adjacency = Adjacency(adjacency)
        return Grid(arr, adjacency)

    @property
    def dims(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def to_array(self) -> np.ndarray:
        return self.data.copy()

    def count_fg(self) -> int:
        return int(self.data.sum())


def _coerce(mask, adjacency: Optional[Union[Adjacency, int]] = None) -> Grid:
    """Accept a Grid or anything array-like; arrays get the default adjacency."""
    if isinstance(mask, Grid):
        if adjacency is not None:
            adj = adjacency if isinstance(adjacency, Adjacency) else Adjacency(adjacency)
            if adj != mask.adjacency:
                return Grid(mask.data, adj)
        return mask
    return Grid.from_array(mask, adjacency)


@dataclass(frozen=True)
class ComponentLabeling:
    """Per-cell labels 1..count over the labeled set, 0 elsewhere. Labels are
    assigned in row-major first-visit order, so they are deterministic."""

    labels: np.ndarray
    count: int


@dataclass(frozen=True)
class BettiProfile:
    b0: int
    b1: int
    b2: Optional[int] = None
    euler: int = 0

    def as_tuple(self) -> Tuple[int, ...]:
        if self.b2 is None:
            return (self.b0, self.b1)
        return (self.b0, self.b1, self.b2)


def connected_components(mask, set: str = "fg",
                         adjacency: Optional[Union[Adjacency, int]] = None
                         ) -> ComponentLabeling:
    """Label the connected components of the FG or BG cells.

    ``adjacency`` is the neighbor scheme for the traversal (4/8/6/26); it
    defaults to the grid's FG scheme for set="fg" and the complementary BG
    scheme for set="bg". Labels cover exactly the requested set.
    """
    grid = _coerce(mask)
    sel = set.lower()
    if sel not in ("fg", "bg"):
        raise ValueError(f"set must be 'fg' or 'bg', got {set!r}")
    if adjacency is None:
        n = grid.adjacency.fg_neighbors if sel == "fg" else grid.adjacency.bg_neighbors
    else:
        n = adjacency.fg_neighbors if isinstance(adjacency, Adjacency) else int(adjacency)
    if n not in _VALID_FG[grid.ndim]:
        raise ValueError(f"adjacency {n} is invalid for a {grid.ndim}D grid")
    target = grid.data if sel == "fg" else (1 - grid.data).astype(np.uint8)
    full = n in (8, 26)
    if grid.ndim == 2:
        labels, count = _label_2d(target, full)
    else:
        labels, count = _label_3d(target, full)
    labels.setflags(write=False)
    return ComponentLabeling(labels=labels, count=int(count))


def euler_characteristic(mask) -> int:
    """Euler characteristic of the FG complex under the grid's FG adjacency."""
    grid = _coerce(mask)
    if grid.ndim == 2:
        return int(_euler_2d(grid.data, grid.adjacency.fg_full))
    return int(_euler_3d(grid.data, grid.adjacency.fg_full))


def betti(mask) -> BettiProfile:
    """Betti numbers of the FG set: b0 components, b1 loops/tunnels, and in
    3D b2 enclosed cavities (BG components not reaching the border)."""
    grid = _coerce(mask)
    if grid.ndim == 2:
        b0, b1, chi = _betti_2d(grid.data, grid.adjacency.fg_full)
        return BettiProfile(b0=int(b0), b1=int(b1), b2=None, euler=int(chi))
    b0, b1, b2, chi = _betti_3d(grid.data, grid.adjacency.fg_full)
    return BettiProfile(b0=int(b0), b1=int(b1), b2=int(b2), euler=int(chi))


def _check_same_dims(a: Grid, b: Grid) -> None:
    if a.dims != b.dims:
        raise ValueError(f"grids have different dims: {a.dims} vs {b.dims}")


def xor_mask(a, b) -> Grid:
    """Cellwise XOR; the result inherits the adjacency of ``a``."""
    ga = _coerce(a)
    gb = _coerce(b)
    _check_same_dims(ga, gb)
    return Grid(np.bitwise_xor(ga.data, gb.data), ga.adjacency)


def hamming(a, b) -> int:
    """Number of disagreeing cells."""
    ga = _coerce(a)
    gb = _coerce(b)
    _check_same_dims(ga, gb)
    return int(np.count_nonzero(ga.data != gb.data))


def bg_components_with_border(mask) -> int:
    """BG component count under the BG adjacency, implicit border included
    (the exterior counts as one component). 2D duality: b1 = this - 1."""
    grid = _coerce(mask)
    if grid.ndim != 2:
        raise ValueError("border-inclusive BG count is a 2D helper")
    return int(_bg_components_2d(grid.data, grid.adjacency.fg_full))
