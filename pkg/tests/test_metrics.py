"""Evaluation metrics: worked examples and brute-force cross-checks."""
import numpy as np
import pytest

import topowarp as tw
from topowarp.metrics import DEFAULT_PATCH_2D, DEFAULT_PATCH_3D
from topowarp.synth import blob_pair

import oracles


def random_mask(rng, shape, p=0.5):
    return (rng.random(shape) < p).astype(np.uint8)


def test_dice_worked_examples():
    a = np.zeros((4, 4), np.uint8)
    a[1:3, 1:3] = 1
    assert tw.dice_score(a, a) == 1.0
    b = np.zeros((4, 4), np.uint8)
    b[0, 0] = 1
    assert tw.dice_score(a, b) == 0.0
    # one shared cell, sizes 1 and 2
    p = np.zeros((3, 3), np.uint8)
    p[0, 0] = 1
    g = np.zeros((3, 3), np.uint8)
    g[0, 0] = g[0, 1] = 1
    assert tw.dice_score(p, g) == pytest.approx(2.0 / 3.0)
    empty = np.zeros((3, 3), np.uint8)
    assert tw.dice_score(empty, empty) == 1.0
    assert tw.dice_score(p, empty) == 0.0


def test_dice_matches_oracle():
    rng = np.random.default_rng(80)
    for trial in range(50):
        a = random_mask(rng, (9, 8), rng.uniform(0.1, 0.9))
        b = random_mask(rng, (9, 8), rng.uniform(0.1, 0.9))
        assert tw.dice_score(a, b) == pytest.approx(oracles.dice(a, b)), trial


def test_adapted_rand_split_component():
    # prediction splits one reference bar into two pieces: every predicted
    # pair stays within one reference region (precision 1) but only half of
    # the reference pair mass is recovered (recall 1/2)
    gt = np.zeros((3, 5), np.uint8)
    gt[1, :] = 1
    pred = gt.copy()
    pred[1, 2] = 0
    assert tw.adapted_rand(pred, gt) == pytest.approx(2.0 / 3.0)
    assert tw.adapted_rand(gt, gt) == 1.0


def test_adapted_rand_empty_and_disjoint_rules():
    empty = np.zeros((4, 4), np.uint8)
    full = np.ones((4, 4), np.uint8)
    assert tw.adapted_rand(empty, empty) == 1.0
    assert tw.adapted_rand(full, empty) == 0.0
    assert tw.adapted_rand(empty, full) == 0.0
    a = np.zeros((4, 4), np.uint8)
    a[0, 0] = 1
    b = np.zeros((4, 4), np.uint8)
    b[3, 3] = 1
    assert tw.adapted_rand(a, b) == 0.0


def test_adapted_rand_matches_pair_counting_oracle():
    rng = np.random.default_rng(81)
    for trial in range(60):
        shape = (7, 7) if trial % 2 else (6, 9)
        a = random_mask(rng, shape, rng.uniform(0.2, 0.8))
        b = random_mask(rng, shape, rng.uniform(0.2, 0.8))
        got = tw.adapted_rand(a, b)
        want = oracles.adapted_rand(a, b)
        assert got == pytest.approx(want), trial


def test_adapted_rand_uses_each_masks_adjacency():
    # two diagonal pixels: one component under 8-adjacency, two under 4
    a = np.zeros((3, 3), np.uint8)
    a[0, 0] = a[1, 1] = 1
    g4 = tw.Grid.from_array(a, tw.Adjacency(4))
    g8 = tw.Grid.from_array(a, tw.Adjacency(8))
    assert tw.adapted_rand(g4, g8) == pytest.approx(
        oracles.adapted_rand(a, a, pred_full=False, gt_full=True))
    assert tw.adapted_rand(g8, g8) == 1.0


def test_warping_error_examples():
    a = np.zeros((5, 5), np.uint8)
    a[2, 1:4] = 1
    assert tw.warping_error(a, a) == 0.0
    # reference line, prediction broken in the middle: no reference cell in
    # the cut can be removed without splitting the line, so the whole cut
    # counts as topological error
    gt = np.zeros((7, 7), np.uint8)
    gt[3, :] = 1
    pred = gt.copy()
    pred[3, 2:5] = 0
    assert tw.warping_error(pred, gt) == pytest.approx(3.0 / 49.0)
    # the opposite orientation can absorb the cut ends by growth
    r = tw.warp(pred, gt)
    assert r.final_hamming == 1
    # pure one-cell erosion is fully absorbable
    band = np.zeros((9, 9), np.uint8)
    band[2:7, 2:7] = 1
    shrunk = np.zeros_like(band)
    shrunk[3:6, 3:6] = 1
    cfg = tw.WarpConfig(passes=8)
    assert tw.warping_error(shrunk, band, cfg) == 0.0


def test_betti_error_examples():
    rng = np.random.default_rng(82)
    a = random_mask(rng, (20, 20), 0.4)
    assert tw.betti_error(a, a) == 0.0
    # lone speck against an empty reference: every window that contains it
    # disagrees by one component; the full-image window always does
    speck = np.zeros((12, 12), np.uint8)
    speck[5, 7] = 1
    empty = np.zeros_like(speck)
    assert tw.betti_error(speck, empty, patch=(12, 12), samples=3,
                          dims_used=(0,)) == 1.0
    b = random_mask(rng, (14, 14), 0.5)
    c = random_mask(rng, (14, 14), 0.5)
    one_window = tw.betti_error(b, c, patch=(14, 14), samples=5)
    bb = tw.betti(tw.Grid.from_array(b)).as_tuple()
    bc = tw.betti(tw.Grid.from_array(c)).as_tuple()
    assert one_window == pytest.approx(abs(bb[0] - bc[0]) + abs(bb[1] - bc[1]))


def test_betti_error_seeded_sampling():
    s, t = blob_pair((40, 40), seed=3)
    x = tw.betti_error(s, t, patch=(16, 16), samples=25, seed=9)
    y = tw.betti_error(s, t, patch=(16, 16), samples=25, seed=9)
    assert x == y
    z = tw.betti_error(s, t, patch=(16, 16), samples=400, seed=10)
    assert z >= 0.0


def test_betti_error_patch_rules():
    a = np.zeros((32, 32), np.uint8)
    # default larger than the grid clamps, an explicit oversize is an error
    assert tw.betti_error(a, a) == 0.0
    assert DEFAULT_PATCH_2D == (64, 64) and DEFAULT_PATCH_3D == (48, 48, 16)
    with pytest.raises(ValueError):
        tw.betti_error(a, a, patch=(64, 64))
    with pytest.raises(ValueError):
        tw.betti_error(a, a, patch=(0, 4))
    with pytest.raises(ValueError):
        tw.betti_error(a, a, patch=(8, 8, 8))
    with pytest.raises(ValueError):
        tw.betti_error(a, a, samples=0)
    with pytest.raises(ValueError):
        tw.betti_error(a, a, dims_used=(2,))


def test_evaluate_identical_and_echo():
    s, _ = blob_pair((30, 30), seed=4)
    rep = tw.evaluate(s, s, patch=(10, 10), samples=7, seed=11)
    assert (rep.dice, rep.ari, rep.warping_error, rep.betti_error) == \
        (1.0, 1.0, 0.0, 0.0)
    assert rep.patch == (10, 10) and rep.samples == 7 and rep.seed == 11
    assert rep.betti_dims == (0, 1) and rep.metric == "cityblock"
    d = rep.to_dict()
    assert d["config"]["patch"] == [10, 10]
    assert d["dice"] == 1.0


def test_evaluate_binarizes_float_input():
    g = np.zeros((8, 8), np.uint8)
    g[2:6, 2:6] = 1
    fmap = np.where(g, 0.9, 0.1)
    rep = tw.evaluate(fmap, g, patch=(8, 8), samples=2)
    assert rep.dice == 1.0 and rep.warping_error == 0.0


def test_evaluate_deterministic_rerun():
    s, t = blob_pair((28, 28), seed=5)
    a = tw.evaluate(s, t, patch=(12, 12), samples=15, seed=2)
    b = tw.evaluate(s, t, patch=(12, 12), samples=15, seed=2)
    assert a == b


def test_metric_dims_mismatch():
    a = np.zeros((4, 4), np.uint8)
    b = np.zeros((5, 4), np.uint8)
    for fn in (tw.dice_score, tw.adapted_rand, tw.warping_error,
               tw.betti_error):
        with pytest.raises(ValueError):
            fn(a, b)
