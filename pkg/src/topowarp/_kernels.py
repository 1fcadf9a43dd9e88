"""Compiled kernels: labeling, Euler counts, simple-point tests, distance
transforms, and the warping scan loops.

All kernels are deterministic, sequential per call, and release the GIL, so
batch drivers may run many images concurrently from Python threads.
"""
from __future__ import annotations

import numpy as np
from numba import njit

INT32_MAX = np.int32(np.iinfo(np.int32).max)
_BIG = 1 << 30        # chamfer "infinity"; real distances stay far below
_BIG_SQ = 1 << 40     # squared-EDT "infinity" (int64 domain)


# ------------------------------------------------------------ labeling

@njit(cache=True, nogil=True)
def _label_2d(mask, full_adj):
    """Row-major first-visit BFS labeling of nonzero cells. Returns
    (labels int32, count); labels are 1..count in first-visit order."""
    h, w = mask.shape
    labels = np.zeros((h, w), np.int32)
    qr = np.empty(h * w, np.int32)
    qc = np.empty(h * w, np.int32)
    count = 0
    for r0 in range(h):
        for c0 in range(w):
            if mask[r0, c0] != 0 and labels[r0, c0] == 0:
                count += 1
                labels[r0, c0] = count
                qr[0] = r0
                qc[0] = c0
                head, tail = 0, 1
                while head < tail:
                    r = qr[head]
                    c = qc[head]
                    head += 1
                    for dr in range(-1, 2):
                        for dc in range(-1, 2):
                            if dr == 0 and dc == 0:
                                continue
                            if not full_adj and dr != 0 and dc != 0:
                                continue
                            rr = r + dr
                            cc = c + dc
                            if (0 <= rr < h and 0 <= cc < w
                                    and mask[rr, cc] != 0
                                    and labels[rr, cc] == 0):
                                labels[rr, cc] = count
                                qr[tail] = rr
                                qc[tail] = cc
                                tail += 1
    return labels, count


@njit(cache=True, nogil=True)
def _label_3d(mask, full_adj):
    n0, n1, n2 = mask.shape
    labels = np.zeros((n0, n1, n2), np.int32)
    n = n0 * n1 * n2
    qa = np.empty(n, np.int32)
    qb = np.empty(n, np.int32)
    qc = np.empty(n, np.int32)
    count = 0
    for a0 in range(n0):
        for b0 in range(n1):
            for c0 in range(n2):
                if mask[a0, b0, c0] == 0 or labels[a0, b0, c0] != 0:
                    continue
                count += 1
                labels[a0, b0, c0] = count
                qa[0] = a0
                qb[0] = b0
                qc[0] = c0
                head, tail = 0, 1
                while head < tail:
                    a = qa[head]
                    b = qb[head]
                    c = qc[head]
                    head += 1
                    for da in range(-1, 2):
                        for db in range(-1, 2):
                            for dc in range(-1, 2):
                                if da == 0 and db == 0 and dc == 0:
                                    continue
                                if not full_adj and abs(da) + abs(db) + abs(dc) != 1:
                                    continue
                                aa = a + da
                                bb = b + db
                                cc = c + dc
                                if (0 <= aa < n0 and 0 <= bb < n1 and 0 <= cc < n2
                                        and mask[aa, bb, cc] != 0
                                        and labels[aa, bb, cc] == 0):
                                    labels[aa, bb, cc] = count
                                    qa[tail] = aa
                                    qb[tail] = bb
                                    qc[tail] = cc
                                    tail += 1
    return labels, count


# ------------------------------------------------------------ Euler counts

@njit(cache=True, nogil=True)
def _euler_2d(mask, fg_full):
    """Euler characteristic of the FG complex.

    fg_full=False (4-adjacency): dual complex — pixels as vertices,
    4-adjacent FG pairs as edges, all-FG 2x2 blocks as faces.
    fg_full=True (8-adjacency): closed complex — lattice cells counted when
    any incident pixel is FG.
    """
    h, w = mask.shape
    v = 0
    e = 0
    f = 0
    if fg_full:
        for r in range(h):
            for c in range(w):
                if mask[r, c] != 0:
                    f += 1
        for r in range(h + 1):
            for c in range(w + 1):
                hit = False
                for dr in range(-1, 1):
                    if hit:
                        break
                    for dc in range(-1, 1):
                        rr = r + dr
                        cc = c + dc
                        if 0 <= rr < h and 0 <= cc < w and mask[rr, cc] != 0:
                            hit = True
                            break
                if hit:
                    v += 1
        for r in range(h + 1):          # edges along columns (horizontal)
            for c in range(w):
                if ((r - 1 >= 0 and mask[r - 1, c] != 0)
                        or (r < h and mask[r, c] != 0)):
                    e += 1
        for r in range(h):              # edges along rows (vertical)
            for c in range(w + 1):
                if ((c - 1 >= 0 and mask[r, c - 1] != 0)
                        or (c < w and mask[r, c] != 0)):
                    e += 1
    else:
        for r in range(h):
            for c in range(w):
                if mask[r, c] != 0:
                    v += 1
                    if r + 1 < h and mask[r + 1, c] != 0:
                        e += 1
                    if c + 1 < w and mask[r, c + 1] != 0:
                        e += 1
                    if (r + 1 < h and c + 1 < w and mask[r + 1, c] != 0
                            and mask[r, c + 1] != 0 and mask[r + 1, c + 1] != 0):
                        f += 1
    return v - e + f


@njit(cache=True, nogil=True)
def _euler_3d(mask, fg_full):
    """3D Euler characteristic: closed complex for 26-adjacency FG, dual
    complex for 6-adjacency FG (the convention satisfying chi = b0 - b1 + b2)."""
    n0, n1, n2 = mask.shape
    v = 0
    e = 0
    f = 0
    c = 0
    if fg_full:
        for a in range(n0):
            for b in range(n1):
                for g in range(n2):
                    if mask[a, b, g] != 0:
                        c += 1
        for a in range(n0 + 1):
            for b in range(n1 + 1):
                for g in range(n2 + 1):
                    hit = False
                    for da in range(-1, 1):
                        if hit:
                            break
                        for db in range(-1, 1):
                            if hit:
                                break
                            for dg in range(-1, 1):
                                aa = a + da
                                bb = b + db
                                gg = g + dg
                                if (0 <= aa < n0 and 0 <= bb < n1
                                        and 0 <= gg < n2 and mask[aa, bb, gg] != 0):
                                    hit = True
                                    break
                    if hit:
                        v += 1
        # edges along axis 0 / 1 / 2
        for a in range(n0):
            for b in range(n1 + 1):
                for g in range(n2 + 1):
                    hit = False
                    for db in range(-1, 1):
                        if hit:
                            break
                        for dg in range(-1, 1):
                            bb = b + db
                            gg = g + dg
                            if (0 <= bb < n1 and 0 <= gg < n2
                                    and mask[a, bb, gg] != 0):
                                hit = True
                                break
                    if hit:
                        e += 1
        for a in range(n0 + 1):
            for b in range(n1):
                for g in range(n2 + 1):
                    hit = False
                    for da in range(-1, 1):
                        if hit:
                            break
                        for dg in range(-1, 1):
                            aa = a + da
                            gg = g + dg
                            if (0 <= aa < n0 and 0 <= gg < n2
                                    and mask[aa, b, gg] != 0):
                                hit = True
                                break
                    if hit:
                        e += 1
        for a in range(n0 + 1):
            for b in range(n1 + 1):
                for g in range(n2):
                    hit = False
                    for da in range(-1, 1):
                        if hit:
                            break
                        for db in range(-1, 1):
                            aa = a + da
                            bb = b + db
                            if (0 <= aa < n0 and 0 <= bb < n1
                                    and mask[aa, bb, g] != 0):
                                hit = True
                                break
                    if hit:
                        e += 1
        # faces normal to axis 0 / 1 / 2
        for a in range(n0 + 1):
            for b in range(n1):
                for g in range(n2):
                    if ((a - 1 >= 0 and mask[a - 1, b, g] != 0)
                            or (a < n0 and mask[a, b, g] != 0)):
                        f += 1
        for a in range(n0):
            for b in range(n1 + 1):
                for g in range(n2):
                    if ((b - 1 >= 0 and mask[a, b - 1, g] != 0)
                            or (b < n1 and mask[a, b, g] != 0)):
                        f += 1
        for a in range(n0):
            for b in range(n1):
                for g in range(n2 + 1):
                    if ((g - 1 >= 0 and mask[a, b, g - 1] != 0)
                            or (g < n2 and mask[a, b, g] != 0)):
                        f += 1
    else:
        for a in range(n0):
            for b in range(n1):
                for g in range(n2):
                    if mask[a, b, g] == 0:
                        continue
                    v += 1
                    if a + 1 < n0 and mask[a + 1, b, g] != 0:
                        e += 1
                    if b + 1 < n1 and mask[a, b + 1, g] != 0:
                        e += 1
                    if g + 1 < n2 and mask[a, b, g + 1] != 0:
                        e += 1
                    if (a + 1 < n0 and b + 1 < n1 and mask[a + 1, b, g] != 0
                            and mask[a, b + 1, g] != 0 and mask[a + 1, b + 1, g] != 0):
                        f += 1
                    if (a + 1 < n0 and g + 1 < n2 and mask[a + 1, b, g] != 0
                            and mask[a, b, g + 1] != 0 and mask[a + 1, b, g + 1] != 0):
                        f += 1
                    if (b + 1 < n1 and g + 1 < n2 and mask[a, b + 1, g] != 0
                            and mask[a, b, g + 1] != 0 and mask[a, b + 1, g + 1] != 0):
                        f += 1
                    if a + 1 < n0 and b + 1 < n1 and g + 1 < n2:
                        allfg = True
                        for da in range(2):
                            if not allfg:
                                break
                            for db in range(2):
                                if not allfg:
                                    break
                                for dg in range(2):
                                    if mask[a + da, b + db, g + dg] == 0:
                                        allfg = False
                                        break
                        if allfg:
                            c += 1
    return v - e + f - c


@njit(cache=True, nogil=True)
def _betti_2d(mask, fg_full):
    labels, b0 = _label_2d(mask, fg_full)
    chi = _euler_2d(mask, fg_full)
    b1 = b0 - chi
    return b0, b1, chi


@njit(cache=True, nogil=True)
def _betti_3d(mask, fg_full):
    n0, n1, n2 = mask.shape
    labels, b0 = _label_3d(mask, fg_full)
    chi = _euler_3d(mask, fg_full)
    comp = np.ones((n0 + 2, n1 + 2, n2 + 2), np.uint8)
    for a in range(n0):
        for b in range(n1):
            for g in range(n2):
                if mask[a, b, g] != 0:
                    comp[a + 1, b + 1, g + 1] = 0
    labels2, nbg = _label_3d(comp, not fg_full)
    b2 = nbg - 1           # the pad ring fuses everything reaching the border
    b1 = b0 + b2 - chi
    return b0, b1, b2, chi


@njit(cache=True, nogil=True)
def _bg_components_2d(mask, fg_full):
    """BG components under the complementary adjacency, implicit border
    included (pad trick). Used by the 2D duality check b1 = this - 1."""
    h, w = mask.shape
    comp = np.ones((h + 2, w + 2), np.uint8)
    for r in range(h):
        for c in range(w):
            if mask[r, c] != 0:
                comp[r + 1, c + 1] = 0
    labels, nbg = _label_2d(comp, not fg_full)
    return nbg


# ------------------------------------------------------------ ring packing

@njit(cache=True, nogil=True)
def _ring2_bits(mask, r, c):
    h, w = mask.shape
    bits = 0
    idx = 0
    for dr in range(-1, 2):
        for dc in range(-1, 2):
            if dr == 0 and dc == 0:
                continue
            rr = r + dr
            cc = c + dc
            if 0 <= rr < h and 0 <= cc < w and mask[rr, cc] != 0:
                bits |= 1 << idx
            idx += 1
    return bits


@njit(cache=True, nogil=True)
def _ring3_bits(vol, a, b, g):
    n0, n1, n2 = vol.shape
    bits = 0
    idx = 0
    for da in range(-1, 2):
        for db in range(-1, 2):
            for dg in range(-1, 2):
                if da == 0 and db == 0 and dg == 0:
                    continue
                aa = a + da
                bb = b + db
                gg = g + dg
                if (0 <= aa < n0 and 0 <= bb < n1 and 0 <= gg < n2
                        and vol[aa, bb, gg] != 0):
                    bits |= 1 << idx
                idx += 1
    return bits


# ------------------------------------------------------------ 3D simple tests

@njit(cache=True, nogil=True)
def _uf_find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _ring_comps_3d(bits, want_fg, restrict18, pairs, anchored, in18, face_idx):
    """Component count of the selected ring cells.

    want_fg selects FG or BG cells of the packed ring; restrict18 drops the
    eight corner cells; pairs defines the adjacency among ring indices;
    anchored counts only components containing a face neighbor of the center.
    """
    present = np.zeros(26, np.uint8)
    for i in range(26):
        b = (bits >> i) & 1
        if not want_fg:
            b = 1 - b
        if b and (restrict18 == 0 or in18[i] != 0):
            present[i] = 1
    parent = np.empty(26, np.int64)
    for i in range(26):
        parent[i] = i
    for t in range(pairs.shape[0]):
        i = pairs[t, 0]
        j = pairs[t, 1]
        if present[i] != 0 and present[j] != 0:
            ri = _uf_find(parent, i)
            rj = _uf_find(parent, j)
            if ri != rj:
                parent[ri] = rj
    seen = np.zeros(26, np.uint8)
    k = 0
    if anchored:
        for t in range(face_idx.shape[0]):
            i = face_idx[t]
            if present[i] != 0:
                r = _uf_find(parent, i)
                if seen[r] == 0:
                    seen[r] = 1
                    k += 1
    else:
        for i in range(26):
            if present[i] != 0:
                r = _uf_find(parent, i)
                if seen[r] == 0:
                    seen[r] = 1
                    k += 1
    return k


@njit(cache=True, nogil=True)
def _delta_chi_3d(bits, fg_full, face_idx, edge_triples, vert_septs):
    """Change in Euler characteristic when the center cell turns FG."""
    if fg_full:
        # closed complex: new boundary cells are those all of whose other
        # incident voxels are BG
        df = 0
        for t in range(6):
            if ((bits >> face_idx[t]) & 1) == 0:
                df += 1
        de = 0
        for t in range(12):
            if (((bits >> edge_triples[t, 0]) & 1) == 0
                    and ((bits >> edge_triples[t, 1]) & 1) == 0
                    and ((bits >> edge_triples[t, 2]) & 1) == 0):
                de += 1
        dv = 0
        for t in range(8):
            allbg = True
            for u in range(7):
                if ((bits >> vert_septs[t, u]) & 1) != 0:
                    allbg = False
                    break
            if allbg:
                dv += 1
        return dv - de + df - 1
    # dual complex: new cells require every other participating voxel FG
    nf = 0
    for t in range(6):
        if ((bits >> face_idx[t]) & 1) != 0:
            nf += 1
    de = 0
    for t in range(12):
        if (((bits >> edge_triples[t, 0]) & 1) != 0
                and ((bits >> edge_triples[t, 1]) & 1) != 0
                and ((bits >> edge_triples[t, 2]) & 1) != 0):
            de += 1
    dv = 0
    for t in range(8):
        allfg = True
        for u in range(7):
            if ((bits >> vert_septs[t, u]) & 1) == 0:
                allfg = False
                break
        if allfg:
            dv += 1
    return 1 - nf + de - dv


@njit(cache=True, nogil=True)
def _simple3d_patch(bits, fg_full, pairs_face, pairs_full, face_idx, in18,
                    edge_triples, vert_septs):
    """Patch-level test: the center flip preserves (b0, b1, b2) of the patch
    embedded in an all-BG volume. Exactly: one FG ring component adjacent to
    the center, and zero local Euler-characteristic change. (The cavity case
    is subsumed: an enclosed center forces delta-chi = -1.)"""
    if fg_full:
        k = _ring_comps_3d(bits, True, 0, pairs_full, False, in18, face_idx)
    else:
        k = _ring_comps_3d(bits, True, 0, pairs_face, True, in18, face_idx)
    if k != 1:
        return False
    return _delta_chi_3d(bits, fg_full, face_idx, edge_triples, vert_septs) == 0


@njit(cache=True, nogil=True)
def _simple3d_gate(bits, fg_full, pairs_face, pairs_full, face_idx, in18,
                   edge_triples, vert_septs):
    """Conservative two-phase test, safe as a flip gate on arbitrary volumes:
    both the FG side (components within the 18-neighborhood under 6-adjacency,
    anchored at a face neighbor) and the BG side (components under the
    complementary adjacency) must be single components."""
    if fg_full:
        kfg = _ring_comps_3d(bits, True, 0, pairs_full, False, in18, face_idx)
        kbg = _ring_comps_3d(bits, False, 1, pairs_face, True, in18, face_idx)
    else:
        kfg = _ring_comps_3d(bits, True, 1, pairs_face, True, in18, face_idx)
        kbg = _ring_comps_3d(bits, False, 0, pairs_full, False, in18, face_idx)
    return kfg == 1 and kbg == 1


@njit(cache=True, nogil=True)
def _simple3d_patch_batch(bits_arr, fg_full, pairs_face, pairs_full, face_idx,
                          in18, edge_triples, vert_septs):
    n = bits_arr.shape[0]
    out = np.zeros(n, np.uint8)
    for i in range(n):
        if _simple3d_patch(bits_arr[i], fg_full, pairs_face, pairs_full,
                           face_idx, in18, edge_triples, vert_septs):
            out[i] = 1
    return out


# ------------------------------------------------------------ distance

@njit(cache=True, nogil=True)
def _chamfer_2d(seed, chess):
    """Exact grid distance to the nearest nonzero seed cell: path length on
    the 4-graph (chess=False, city-block) or 8-graph (chess=True)."""
    h, w = seed.shape
    d = np.full((h, w), _BIG, np.int32)
    for r in range(h):
        for c in range(w):
            if seed[r, c] != 0:
                d[r, c] = 0
    for r in range(h):
        for c in range(w):
            v = d[r, c]
            if r > 0 and d[r - 1, c] + 1 < v:
                v = d[r - 1, c] + 1
            if c > 0 and d[r, c - 1] + 1 < v:
                v = d[r, c - 1] + 1
            if chess and r > 0:
                if c > 0 and d[r - 1, c - 1] + 1 < v:
                    v = d[r - 1, c - 1] + 1
                if c < w - 1 and d[r - 1, c + 1] + 1 < v:
                    v = d[r - 1, c + 1] + 1
            d[r, c] = v
    for r in range(h - 1, -1, -1):
        for c in range(w - 1, -1, -1):
            v = d[r, c]
            if r < h - 1 and d[r + 1, c] + 1 < v:
                v = d[r + 1, c] + 1
            if c < w - 1 and d[r, c + 1] + 1 < v:
                v = d[r, c + 1] + 1
            if chess and r < h - 1:
                if c < w - 1 and d[r + 1, c + 1] + 1 < v:
                    v = d[r + 1, c + 1] + 1
                if c > 0 and d[r + 1, c - 1] + 1 < v:
                    v = d[r + 1, c - 1] + 1
            d[r, c] = v
    return d


@njit(cache=True, nogil=True)
def _chamfer_3d(seed, chess):
    n0, n1, n2 = seed.shape
    d = np.full((n0, n1, n2), _BIG, np.int32)
    for a in range(n0):
        for b in range(n1):
            for c in range(n2):
                if seed[a, b, c] != 0:
                    d[a, b, c] = 0
    # forward: all offsets preceding the center in row-major order
    for a in range(n0):
        for b in range(n1):
            for c in range(n2):
                v = d[a, b, c]
                for da in range(-1, 1):
                    for db in range(-1, 2):
                        for dc in range(-1, 2):
                            if da == 0 and (db > 0 or (db == 0 and dc >= 0)):
                                continue
                            if not chess and abs(da) + abs(db) + abs(dc) != 1:
                                continue
                            aa = a + da
                            bb = b + db
                            cc = c + dc
                            if (0 <= aa < n0 and 0 <= bb < n1 and 0 <= cc < n2
                                    and d[aa, bb, cc] + 1 < v):
                                v = d[aa, bb, cc] + 1
                d[a, b, c] = v
    for a in range(n0 - 1, -1, -1):
        for b in range(n1 - 1, -1, -1):
            for c in range(n2 - 1, -1, -1):
                v = d[a, b, c]
                for da in range(0, 2):
                    for db in range(-1, 2):
                        for dc in range(-1, 2):
                            if da == 0 and (db < 0 or (db == 0 and dc <= 0)):
                                continue
                            if not chess and abs(da) + abs(db) + abs(dc) != 1:
                                continue
                            aa = a + da
                            bb = b + db
                            cc = c + dc
                            if (0 <= aa < n0 and 0 <= bb < n1 and 0 <= cc < n2
                                    and d[aa, bb, cc] + 1 < v):
                                v = d[aa, bb, cc] + 1
                d[a, b, c] = v
    return d


@njit(cache=True, nogil=True)
def _edt_1d(f, d, v, z):
    """Felzenszwalb-Huttenlocher lower envelope for one line of squared
    distances. f: input costs, d: output, v/z: work arrays."""
    n = f.shape[0]
    k = 0
    v[0] = 0
    z[0] = -1e30
    z[1] = 1e30
    for q in range(1, n):
        while True:
            p = v[k]
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * q - 2.0 * p)
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = 1e30
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        d[q] = (q - p) * (q - p) + f[p]


@njit(cache=True, nogil=True)
def _edt_2d(seed):
    """Exact squared Euclidean distance to the nearest nonzero seed."""
    h, w = seed.shape
    g = np.empty((h, w), np.int64)
    for r in range(h):
        for c in range(w):
            g[r, c] = 0 if seed[r, c] != 0 else _BIG_SQ
    f = np.empty(max(h, w), np.int64)
    d = np.empty(max(h, w), np.int64)
    v = np.empty(max(h, w) + 1, np.int64)
    z = np.empty(max(h, w) + 2, np.float64)
    for c in range(w):
        for r in range(h):
            f[r] = g[r, c]
        _edt_1d(f[:h], d[:h], v, z)
        for r in range(h):
            g[r, c] = d[r]
    for r in range(h):
        for c in range(w):
            f[c] = g[r, c]
        _edt_1d(f[:w], d[:w], v, z)
        for c in range(w):
            g[r, c] = d[c]
    return g


@njit(cache=True, nogil=True)
def _edt_3d(seed):
    n0, n1, n2 = seed.shape
    g = np.empty((n0, n1, n2), np.int64)
    for a in range(n0):
        for b in range(n1):
            for c in range(n2):
                g[a, b, c] = 0 if seed[a, b, c] != 0 else _BIG_SQ
    m = max(n0, max(n1, n2))
    f = np.empty(m, np.int64)
    d = np.empty(m, np.int64)
    v = np.empty(m + 1, np.int64)
    z = np.empty(m + 2, np.float64)
    for b in range(n1):
        for c in range(n2):
            for a in range(n0):
                f[a] = g[a, b, c]
            _edt_1d(f[:n0], d[:n0], v, z)
            for a in range(n0):
                g[a, b, c] = d[a]
    for a in range(n0):
        for c in range(n2):
            for b in range(n1):
                f[b] = g[a, b, c]
            _edt_1d(f[:n1], d[:n1], v, z)
            for b in range(n1):
                g[a, b, c] = d[b]
    for a in range(n0):
        for b in range(n1):
            for c in range(n2):
                f[c] = g[a, b, c]
            _edt_1d(f[:n2], d[:n2], v, z)
            for c in range(n2):
                g[a, b, c] = d[c]
    return g


# ------------------------------------------------------------ sorting

@njit(cache=True, nogil=True)
def _counting_sort(keys):
    """Stable counting sort; returns the order as indices into keys."""
    n = keys.shape[0]
    order = np.empty(n, np.int64)
    if n == 0:
        return order
    kmax = 0
    for i in range(n):
        if keys[i] > kmax:
            kmax = keys[i]
    counts = np.zeros(kmax + 2, np.int64)
    for i in range(n):
        counts[keys[i] + 1] += 1
    for k in range(1, kmax + 2):
        counts[k] += counts[k - 1]
    for i in range(n):
        k = keys[i]
        order[counts[k]] = i
        counts[k] += 1
    return order


# ------------------------------------------------------------ warp scans

@njit(cache=True, nogil=True)
def _warp_pass_2d(cur, tgt, rr, cc, lut, out_pos):
    """One ordered scan: flip each still-different candidate that is simple
    at its turn. Returns the number of flips; out_pos records candidate
    positions (indices into rr/cc) in flip order."""
    cnt = 0
    for t in range(rr.shape[0]):
        r = rr[t]
        c = cc[t]
        if cur[r, c] == tgt[r, c]:
            continue
        if lut[_ring2_bits(cur, r, c)] != 0:
            cur[r, c] = 1 - cur[r, c]
            out_pos[cnt] = t
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def _warp_pass_3d(cur, tgt, aa, bb, gg, fg_full, pairs_face, pairs_full,
                  face_idx, in18, edge_triples, vert_septs, out_pos):
    cnt = 0
    for t in range(aa.shape[0]):
        a = aa[t]
        b = bb[t]
        g = gg[t]
        if cur[a, b, g] == tgt[a, b, g]:
            continue
        bits = _ring3_bits(cur, a, b, g)
        if _simple3d_gate(bits, fg_full, pairs_face, pairs_full, face_idx,
                          in18, edge_triples, vert_septs):
            cur[a, b, g] = 1 - cur[a, b, g]
            out_pos[cnt] = t
            cnt += 1
    return cnt


@njit(cache=True, nogil=True)
def _warp_sweeps_2d(cur, tgt, rr, cc, lut, max_passes, out_pos, out_pass):
    """Up to max_passes ordered scans without reordering, stopping early on
    a scan with no flip. Cells that refuse a flip are compacted into the
    front of the live index list so later scans only revisit stragglers.
    Returns (total flips, scans performed); out_pos holds candidate indices
    in flip order, out_pass the 0-based scan of each flip."""
    n = rr.shape[0]
    idx = np.empty(n, np.int64)
    for t in range(n):
        idx[t] = t
    live = n
    total = 0
    passes_run = 0
    for p in range(max_passes):
        if live == 0:
            break
        flips = 0
        keep = 0
        for j in range(live):
            t = idx[j]
            r = rr[t]
            c = cc[t]
            if cur[r, c] == tgt[r, c]:
                continue
            if lut[_ring2_bits(cur, r, c)] != 0:
                cur[r, c] = 1 - cur[r, c]
                out_pos[total] = t
                out_pass[total] = p
                total += 1
                flips += 1
            else:
                idx[keep] = t
                keep += 1
        live = keep
        passes_run = p + 1
        if flips == 0:
            break
    return total, passes_run


@njit(cache=True, nogil=True)
def _warp_sweeps_3d(cur, tgt, aa, bb, gg, fg_full, pairs_face, pairs_full,
                    face_idx, in18, edge_triples, vert_septs, max_passes,
                    out_pos, out_pass):
    n = aa.shape[0]
    idx = np.empty(n, np.int64)
    for t in range(n):
        idx[t] = t
    live = n
    total = 0
    passes_run = 0
    for p in range(max_passes):
        if live == 0:
            break
        flips = 0
        keep = 0
        for j in range(live):
            t = idx[j]
            a = aa[t]
            b = bb[t]
            g = gg[t]
            if cur[a, b, g] == tgt[a, b, g]:
                continue
            bits = _ring3_bits(cur, a, b, g)
            if _simple3d_gate(bits, fg_full, pairs_face, pairs_full, face_idx,
                              in18, edge_triples, vert_septs):
                cur[a, b, g] = 1 - cur[a, b, g]
                out_pos[total] = t
                out_pass[total] = p
                total += 1
                flips += 1
            else:
                idx[keep] = t
                keep += 1
        live = keep
        passes_run = p + 1
        if flips == 0:
            break
    return total, passes_run


@njit(cache=True, nogil=True)
def _naive_2d(cur, tgt, rr, cc, lut, out_pos, out_scan):
    """Repeated row-major scans over the difference set until a scan makes
    no flip. Returns (total flips, scans performed including the empty one)."""
    total = 0
    scan = 0
    while True:
        flips = 0
        for t in range(rr.shape[0]):
            r = rr[t]
            c = cc[t]
            if cur[r, c] == tgt[r, c]:
                continue
            if lut[_ring2_bits(cur, r, c)] != 0:
                cur[r, c] = 1 - cur[r, c]
                out_pos[total] = t
                out_scan[total] = scan
                total += 1
                flips += 1
        scan += 1
        if flips == 0:
            break
    return total, scan


@njit(cache=True, nogil=True)
def _naive_3d(cur, tgt, aa, bb, gg, fg_full, pairs_face, pairs_full, face_idx,
              in18, edge_triples, vert_septs, out_pos, out_scan):
    total = 0
    scan = 0
    while True:
        flips = 0
        for t in range(aa.shape[0]):
            a = aa[t]
            b = bb[t]
            g = gg[t]
            if cur[a, b, g] == tgt[a, b, g]:
                continue
            bits = _ring3_bits(cur, a, b, g)
            if _simple3d_gate(bits, fg_full, pairs_face, pairs_full, face_idx,
                              in18, edge_triples, vert_septs):
                cur[a, b, g] = 1 - cur[a, b, g]
                out_pos[total] = t
                out_scan[total] = scan
                total += 1
                flips += 1
        scan += 1
        if flips == 0:
            break
    return total, scan
