"""Static neighborhood tables shared by the simple-point tests and warp kernels.

Canonical ring order: offsets enumerated row-major over the 3x3 (3x3x3) block
with the center omitted. Bit i of a packed ring corresponds to offset i in
RING2_OFFSETS / RING3_OFFSETS. This order is part of the public contract of
NeighborhoodPatch and must stay stable.
"""
from __future__ import annotations

import itertools

import numpy as np

# ---------------------------------------------------------------- 2D ring

RING2_OFFSETS = np.array(
    [(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)],
    dtype=np.int64,
)

# ---------------------------------------------------------------- 3D ring

RING3_OFFSETS = np.array(
    [o for o in itertools.product((-1, 0, 1), repeat=3) if o != (0, 0, 0)],
    dtype=np.int64,
)

_IDX3 = {tuple(o): i for i, o in enumerate(RING3_OFFSETS.tolist())}

# Face neighbors (the six |o|_1 == 1 offsets) in ring-index form.
FACE3 = np.array(
    [i for i, o in enumerate(RING3_OFFSETS.tolist()) if sum(map(abs, o)) == 1],
    dtype=np.int64,
)

# Ring indices lying inside the 18-neighborhood (|o|_1 <= 2).
IN18 = np.array(
    [1 if sum(map(abs, o)) <= 2 else 0 for o in RING3_OFFSETS.tolist()],
    dtype=np.uint8,
)


def _pairs(offsets, pred):
    out = []
    offs = offsets.tolist()
    for i in range(len(offs)):
        for j in range(i + 1, len(offs)):
            d = [abs(offs[i][k] - offs[j][k]) for k in range(len(offs[i]))]
            if pred(d):
                out.append((i, j))
    return np.array(out, dtype=np.int64).reshape(-1, 2)


def _face_adj(d):
    return sum(d) == 1


def _full_adj(d):
    return max(d) == 1


# Ring-index pairs adjacent under face adjacency (4 in 2D / 6 in 3D) and
# under full adjacency (8 / 26). Used by the union-find component counters.
PAIRS2_FACE = _pairs(RING2_OFFSETS, _face_adj)
PAIRS2_FULL = _pairs(RING2_OFFSETS, _full_adj)
PAIRS3_FACE = _pairs(RING3_OFFSETS, _face_adj)
PAIRS3_FULL = _pairs(RING3_OFFSETS, _full_adj)

FACE2 = np.array(
    [i for i, o in enumerate(RING2_OFFSETS.tolist()) if sum(map(abs, o)) == 1],
    dtype=np.int64,
)

# The twelve edges of the center voxel. Each row lists the three ring cells
# sharing that edge with the center: two face neighbors u, v on distinct axes
# and their diagonal u+v. Used for the incremental Euler-characteristic term.
_edges = []
for a, b in ((0, 1), (0, 2), (1, 2)):
    for sa, sb in itertools.product((-1, 1), repeat=2):
        u = [0, 0, 0]
        v = [0, 0, 0]
        u[a] = sa
        v[b] = sb
        w = [u[k] + v[k] for k in range(3)]
        _edges.append((_IDX3[tuple(u)], _IDX3[tuple(v)], _IDX3[tuple(w)]))
EDGE_TRIPLES3 = np.array(_edges, dtype=np.int64)

# The eight vertices of the center voxel. Each row lists the seven ring cells
# of the 2x2x2 block at that vertex.
_verts = []
for s in itertools.product((-1, 1), repeat=3):
    block = []
    for m in itertools.product((0, 1), repeat=3):
        o = tuple(s[k] * m[k] for k in range(3))
        if o != (0, 0, 0):
            block.append(_IDX3[o])
    _verts.append(tuple(block))
VERT_SEPTS3 = np.array(_verts, dtype=np.int64)


def _comp_count(present, pairs, anchors=None):
    """Components of the ring cells flagged in `present` under `pairs`.

    With `anchors`, count only components containing an anchor index.
    """
    n = len(present)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in pairs.tolist():
        if present[i] and present[j]:
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    if anchors is None:
        roots = {find(i) for i in range(n) if present[i]}
    else:
        roots = {find(i) for i in anchors.tolist() if present[i]}
    return len(roots)


def _classic_simple_2d(ring_bits, fg_full):
    """Two-condition test on a 2D ring (complementary pair implied)."""
    fg = [1 if ring_bits & (1 << i) else 0 for i in range(8)]
    bg = [1 - b for b in fg]
    if fg_full:
        c1 = _comp_count(fg, PAIRS2_FULL)
        c2 = _comp_count(bg, PAIRS2_FACE, anchors=FACE2)
    else:
        c1 = _comp_count(fg, PAIRS2_FACE, anchors=FACE2)
        c2 = _comp_count(bg, PAIRS2_FULL)
    return c1 == 1 and c2 == 1


def build_simple_lut_2d(fg_full=False):
    """256-entry lookup table for the 2D simple-point test, keyed on ring bits."""
    lut = np.zeros(256, dtype=np.uint8)
    for bits in range(256):
        lut[bits] = 1 if _classic_simple_2d(bits, fg_full) else 0
    return lut


SIMPLE_LUT_2D_FG4 = build_simple_lut_2d(fg_full=False)
SIMPLE_LUT_2D_FG8 = build_simple_lut_2d(fg_full=True)
