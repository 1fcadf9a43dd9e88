"""Differential tests: every binding result must equal the core result
bit for bit, and validation must reject rather than coerce."""
import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

import topowarp as tw
import topowarp_bridge as bridge
from topowarp.synth import blob_pair


def fd_gradient(fn, values, step=1e-5):
    values = np.asarray(values, np.float64)
    grad = np.zeros_like(values)
    it = np.nditer(values, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        up = values.copy()
        up[idx] += step
        down = values.copy()
        down[idx] -= step
        grad[idx] = (fn(up) - fn(down)) / (2 * step)
        it.iternext()
    return grad


def safe_map(rng, shape):
    v = rng.uniform(0.02, 0.98, size=shape)
    return np.where(np.abs(v - 0.5) < 0.01, v + 0.03, v)


def test_critical_mask_matches_core_bitwise():
    for trial in range(60):
        shape = (14, 14) if trial % 2 else (8, 8, 6)
        s, t = blob_pair(shape, seed=trial)
        passes = 1 + trial % 3
        metric = ("cityblock", "chessboard", "euclidean")[trial % 3]
        if trial % 4 == 0:
            m_all, m_g, m_f = bridge.critical_mask_py(
                s.astype(bool), t.astype(bool), passes=passes, metric=metric)
        else:
            m_all, m_g, m_f = bridge.critical_mask_py(
                s, t, passes=passes, metric=metric)
        crit = tw.critical_mask(
            s, t, tw.WarpConfig(metric=metric, passes=passes))
        assert np.array_equal(m_all, crit.mask.to_array()), trial
        assert np.array_equal(m_g, crit.from_gt_warp.to_array()), trial
        assert np.array_equal(m_f, crit.from_pred_warp.to_array()), trial
        assert m_all.dtype == m_g.dtype == m_f.dtype == np.uint8


def test_identical_inputs_give_zero_masks():
    s, _ = blob_pair((12, 12), seed=3)
    for out in bridge.critical_mask_py(s, s):
        assert out.shape == s.shape and not out.any()


def test_broken_line_worked_example():
    gt = np.zeros((7, 7), np.uint8)
    gt[3, :] = 1
    pred = gt.copy()
    pred[3, 2:5] = 0
    m_all, m_g, m_f = bridge.critical_mask_py(pred, gt)
    assert int(m_all.sum()) == 3
    assert int(m_g.sum()) == 3
    assert int(m_f.sum()) == 1 and m_f[3, 3] == 1


def test_differential_against_cli_files(tmp_path):
    from topowarp.cli import main

    s, t = blob_pair((20, 20), seed=9)
    np.save(tmp_path / "p.npy", s)
    np.save(tmp_path / "g.npy", t)
    rc = main(["critical", "--pred", str(tmp_path / "p.npy"),
               "--gt", str(tmp_path / "g.npy"), "--passes", "2",
               "--out", str(tmp_path / "out")])
    assert rc == 0
    m_all, m_g, m_f = bridge.critical_mask_py(s, t, passes=2)
    assert np.array_equal(np.load(tmp_path / "out" / "critical.npy"), m_all)
    assert np.array_equal(
        np.load(tmp_path / "out" / "critical_gt_side.npy"), m_g)
    assert np.array_equal(
        np.load(tmp_path / "out" / "critical_pred_side.npy"), m_f)


def test_objective_matches_core_bitwise():
    rng = np.random.default_rng(20)
    for trial in range(40):
        shape = (12, 12) if trial % 2 else (7, 7, 5)
        _, g = blob_pair(shape, seed=trial)
        f = safe_map(rng, shape)
        kind = ("cross-entropy", "mse", "soft-dice")[trial % 3]
        lam = (None, 0.0, 0.02)[trial % 3]
        value, grad = bridge.warping_loss_py(f, g, lambda_warp=lam,
                                             pixel_loss=kind, passes=2)
        rep = tw.total_loss(f, g, tw.LossConfig(pixel_loss=kind,
                                                lambda_warp=lam),
                            tw.WarpConfig(passes=2))
        assert value == rep.l_total, trial
        assert grad.dtype == np.float64
        assert np.array_equal(grad, rep.gradient), trial


def test_float32_input_equals_float64_path():
    rng = np.random.default_rng(21)
    _, g = blob_pair((10, 10), seed=5)
    f32 = safe_map(rng, (10, 10)).astype(np.float32)
    v32, g32 = bridge.warping_loss_py(f32, g)
    v64, g64 = bridge.warping_loss_py(f32.astype(np.float64), g)
    assert v32 == v64
    assert np.array_equal(g32, g64)


def test_lambda_zero_is_plain_soft_dice():
    rng = np.random.default_rng(22)
    _, g = blob_pair((11, 11), seed=6)
    f = safe_map(rng, (11, 11))
    value, _ = bridge.warping_loss_py(f, g, lambda_warp=0.0)
    rep = tw.total_loss(f, g, tw.LossConfig(lambda_warp=0.0))
    assert value == rep.l_dice == rep.l_total


def test_fd_gradient_through_binding():
    rng = np.random.default_rng(23)
    _, g = blob_pair((9, 9), seed=7)
    f = safe_map(rng, (9, 9))
    _, grad = bridge.warping_loss_py(f, g)
    fd = fd_gradient(lambda v: bridge.warping_loss_py(v, g)[0], f)
    sel = np.abs(grad) > 1e-6
    rel = np.abs(grad[sel] - fd[sel]) / np.abs(grad[sel])
    assert float(rel.max()) <= 1e-4


def test_validation_rejects_instead_of_coercing():
    s, t = blob_pair((6, 6), seed=8)
    with pytest.raises(TypeError):
        bridge.critical_mask_py(s.astype(np.float32), t)
    with pytest.raises(TypeError):
        bridge.critical_mask_py(s, t.astype(np.int16))
    with pytest.raises(ValueError):
        bridge.critical_mask_py(s, t[:5])
    bad = s.copy()
    bad[0, 0] = 2
    with pytest.raises(ValueError):
        bridge.critical_mask_py(bad, t)
    with pytest.raises(TypeError):
        bridge.warping_loss_py(s, t)          # uint8 map
    with pytest.raises(ValueError):
        bridge.warping_loss_py(np.full((6, 6), 1.5), t)
    with pytest.raises(TypeError):
        bridge.critical_mask_py(s, t, speed="ludicrous")
    with pytest.raises(TypeError):
        bridge.warping_loss_py(np.full((6, 6), 0.5), t, warp_speed=9)


def test_inputs_untouched_outputs_fresh():
    s, t = blob_pair((10, 10), seed=10)
    s0, t0 = s.copy(), t.copy()
    m_all, m_g, m_f = bridge.critical_mask_py(s, t, passes=2)
    assert np.array_equal(s, s0) and np.array_equal(t, t0)
    for out in (m_all, m_g, m_f):
        assert out.base is None or out.base is not s and out.base is not t
        out[0, 0] ^= 1          # caller owns the result
    f = np.full((10, 10), 0.25)
    _, grad = bridge.warping_loss_py(f, t)
    grad[0, 0] = 7.0
    assert f[0, 0] == 0.25


def test_concurrent_calls_match_serial():
    pairs = [blob_pair((24, 24), seed=s) for s in range(8)]
    serial = [bridge.critical_mask_py(a, b, passes=2) for a, b in pairs]
    with ThreadPoolExecutor(max_workers=4) as pool:
        pooled = list(pool.map(
            lambda ab: bridge.critical_mask_py(*ab, passes=2), pairs))
    for (sa, sb, sc), (pa, pb, pc) in zip(serial, pooled):
        assert np.array_equal(sa, pa)
        assert np.array_equal(sb, pb)
        assert np.array_equal(sc, pc)


def test_conveniences():
    s, t = blob_pair((16, 16), seed=11)
    r = bridge.warp(s, t, passes=2)
    assert r.final_hamming == r.initial_hamming - r.flip_count
    assert bridge.betti(s) == tw.betti(tw.Grid.from_array(s)).as_tuple()
    ring = np.zeros((5, 5), np.uint8)
    ring[1:4, 1:4] = 1
    ring[2, 2] = 0
    assert bridge.betti(ring) == (1, 1)
    doc = bridge.metrics(s, t, patch=(8, 8), samples=4)
    assert set(doc) >= {"dice", "ari", "warping_error", "betti_error"}
    assert json.dumps(doc)
    assert bridge.__version__ == tw.__version__
