"""Simple-point classification: is a single cell flippable without changing
the topology of the mask?

The 2D test follows the classic two-condition characterization: the flip is
safe iff the ring has exactly one FG component adjacent to the center under
the FG adjacency and exactly one BG component adjacent to the center under
the BG adjacency. All 256 ring configurations are compiled into a lookup
table at import and verified against the brute-force oracle in the tests.

The 3D test classifies the 26-cell ring exactly, matching the brute-force
Betti comparison of the patch embedded in an all-BG volume: the center flip
is safe iff the FG ring cells form exactly one component adjacent to the
center and the local Euler-characteristic change of the flip is zero. (A
center enclosed on all sides forces a nonzero change, so the cavity case
needs no separate condition.) The two-condition analogue in 3D is slightly
conservative and is kept separately as the flip gate used during warping;
see warp.py.

The verdict never depends on the center's own value: flipping FG->BG and
BG->FG at the same site are topologically symmetric.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from . import _tables as T
from ._kernels import (
    _betti_2d,
    _betti_3d,
    _ring2_bits,
    _ring3_bits,
    _simple3d_patch,
    _simple3d_patch_batch,
)
from .core import Adjacency, Grid, _coerce

__all__ = [
    "NeighborhoodPatch",
    "is_simple_2d",
    "is_simple_3d",
    "is_simple_at",
    "oracle_is_simple",
    "simple_mask",
]


@dataclass(frozen=True)
class NeighborhoodPatch:
    """A center bit plus its ring bits in canonical row-major order.

    The ring order is the row-major traversal of the 3x3 (3x3x3) block with
    the center omitted; see _tables.RING2_OFFSETS / RING3_OFFSETS. Bit i of
    the packed representation corresponds to ring offset i. This order is a
    stable public contract.
    """

    center_value: int
    ring: Tuple[int, ...]

    def __post_init__(self):
        if self.center_value not in (0, 1):
            raise ValueError(f"center_value must be 0 or 1, got {self.center_value}")
        ring = tuple(int(b) for b in self.ring)
        if len(ring) not in (8, 26):
            raise ValueError(
                f"ring must have 8 (2D) or 26 (3D) bits, got {len(ring)}")
        if any(b not in (0, 1) for b in ring):
            raise ValueError("ring bits must be 0 or 1")
        object.__setattr__(self, "ring", ring)

    @property
    def ndim(self) -> int:
        return 2 if len(self.ring) == 8 else 3

    @property
    def ring_bits(self) -> int:
        """The ring packed little-endian: bit i = ring[i]."""
        bits = 0
        for i, b in enumerate(self.ring):
            bits |= b << i
        return bits

    @staticmethod
    def from_bits(bits: int, ndim: int, center_value: int = 1) -> "NeighborhoodPatch":
        n = 8 if ndim == 2 else 26
        ring = tuple((bits >> i) & 1 for i in range(n))
        return NeighborhoodPatch(center_value=center_value, ring=ring)

    @staticmethod
    def from_grid(grid, coord: Sequence[int]) -> "NeighborhoodPatch":
        grid = _coerce(grid)
        coord = _check_coord(grid, coord)
        if grid.ndim == 2:
            bits = int(_ring2_bits(grid.data, coord[0], coord[1]))
        else:
            bits = int(_ring3_bits(grid.data, coord[0], coord[1], coord[2]))
        return NeighborhoodPatch.from_bits(
            bits, grid.ndim, center_value=int(grid.data[coord]))


def _check_coord(grid: Grid, coord: Sequence[int]) -> Tuple[int, ...]:
    coord = tuple(int(c) for c in coord)
    if len(coord) != grid.ndim:
        raise ValueError(f"coord {coord} does not match a {grid.ndim}D grid")
    for c, s in zip(coord, grid.dims):
        if not 0 <= c < s:
            raise IndexError(f"coord {coord} out of bounds for dims {grid.dims}")
    return coord


def _ring_bits_of(patch: Union[NeighborhoodPatch, int], ndim: int) -> int:
    if isinstance(patch, NeighborhoodPatch):
        if patch.ndim != ndim:
            raise ValueError(f"expected a {ndim}D patch, got {patch.ndim}D")
        return patch.ring_bits
    return int(patch)


def is_simple_2d(patch: Union[NeighborhoodPatch, int],
                 adjacency: Adjacency = Adjacency(4)) -> bool:
    """True iff flipping the center preserves the mask topology (2D).

    ``patch`` may be a NeighborhoodPatch or the packed 8-bit ring value.
    """
    if adjacency.ndim != 2:
        raise ValueError("is_simple_2d needs a 2D adjacency (4 or 8)")
    bits = _ring_bits_of(patch, 2)
    lut = T.SIMPLE_LUT_2D_FG8 if adjacency.fg_full else T.SIMPLE_LUT_2D_FG4
    return bool(lut[bits])


def is_simple_3d(patch: Union[NeighborhoodPatch, int],
                 adjacency: Adjacency = Adjacency(6)) -> bool:
    """True iff flipping the center preserves the patch topology (3D)."""
    if adjacency.ndim != 3:
        raise ValueError("is_simple_3d needs a 3D adjacency (6 or 26)")
    bits = _ring_bits_of(patch, 3)
    return bool(_simple3d_patch(
        bits, adjacency.fg_full, T.PAIRS3_FACE, T.PAIRS3_FULL, T.FACE3,
        T.IN18, T.EDGE_TRIPLES3, T.VERT_SEPTS3))


def is_simple_at(grid, coord: Sequence[int]) -> bool:
    """Extract the neighborhood at ``coord`` (implicit BG outside bounds)
    and run the dimensional simple test under the grid's adjacency."""
    grid = _coerce(grid)
    coord = _check_coord(grid, coord)
    if grid.ndim == 2:
        bits = int(_ring2_bits(grid.data, coord[0], coord[1]))
        return is_simple_2d(bits, grid.adjacency)
    bits = int(_ring3_bits(grid.data, coord[0], coord[1], coord[2]))
    return is_simple_3d(bits, grid.adjacency)


def pack_ring_grid(grid) -> np.ndarray:
    """Packed ring bits for every cell at once (int64 field, bit i = ring
    offset i, implicit BG outside bounds)."""
    grid = _coerce(grid)
    data = grid.data
    padded = np.pad(data, 1).astype(np.int64)
    bits = np.zeros(data.shape, np.int64)
    if grid.ndim == 2:
        h, w = data.shape
        for i, (dr, dc) in enumerate(T.RING2_OFFSETS.tolist()):
            bits |= padded[1 + dr:1 + dr + h, 1 + dc:1 + dc + w] << i
    else:
        n0, n1, n2 = data.shape
        for i, (da, db, dg) in enumerate(T.RING3_OFFSETS.tolist()):
            bits |= (padded[1 + da:1 + da + n0, 1 + db:1 + db + n1,
                            1 + dg:1 + dg + n2] << i)
    return bits


def simple_mask(grid) -> np.ndarray:
    """Verdict for every cell of the grid as a uint8 field (1 = flipping
    that cell preserves topology). Vectorized; equivalent to calling
    is_simple_at on each coordinate."""
    grid = _coerce(grid)
    bits = pack_ring_grid(grid)
    if grid.ndim == 2:
        lut = T.SIMPLE_LUT_2D_FG8 if grid.adjacency.fg_full else T.SIMPLE_LUT_2D_FG4
        return lut[bits]
    flat = _simple3d_patch_batch(
        np.ascontiguousarray(bits.ravel()), grid.adjacency.fg_full,
        T.PAIRS3_FACE, T.PAIRS3_FULL, T.FACE3, T.IN18,
        T.EDGE_TRIPLES3, T.VERT_SEPTS3)
    return flat.reshape(grid.dims)


def oracle_is_simple(grid, coord: Sequence[int]) -> bool:
    """Brute-force reference: flip the cell and compare full-grid Betti
    numbers. Slow; meant for tests and spot checks."""
    grid = _coerce(grid)
    coord = _check_coord(grid, coord)
    work = grid.data.copy()
    full = grid.adjacency.fg_full
    if grid.ndim == 2:
        before = _betti_2d(work, full)[:2]
        work[coord] = 1 - work[coord]
        after = _betti_2d(work, full)[:2]
    else:
        before = _betti_3d(work, full)[:3]
        work[coord] = 1 - work[coord]
        after = _betti_3d(work, full)[:3]
    return tuple(before) == tuple(after)
