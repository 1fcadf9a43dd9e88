"""File formats and the batch command line."""
import json
import os

import numpy as np
import pytest
from PIL import Image

import topowarp as tw
from topowarp.cli import main
from topowarp.io import (
    OVERLAY_BASE,
    OVERLAY_BOTH,
    OVERLAY_GT_SIDE,
    OVERLAY_PRED_SIDE,
    MaskIOError,
    RunManifest,
    file_digest,
    load_likelihood,
    load_mask,
    render_overlay,
    save_likelihood,
    save_mask,
)
from topowarp.synth import blob_pair


def test_npy_round_trip_many_grids(tmp_path):
    rng = np.random.default_rng(90)
    path = tmp_path / "m.npy"
    for trial in range(150):
        if trial % 3 == 2:
            shape = tuple(rng.integers(1, 7, size=3))
            adj = tw.Adjacency(6 if trial % 2 else 26)
        else:
            shape = tuple(rng.integers(1, 12, size=2))
            adj = tw.Adjacency(4 if trial % 2 else 8)
        mask = (rng.random(shape) < rng.random()).astype(np.uint8)
        save_mask(path, tw.Grid.from_array(mask, adj))
        back = load_mask(path, adjacency=adj)
        assert np.array_equal(back.to_array(), mask), trial
        assert back.adjacency == adj, trial


def test_png_round_trip_and_nonzero_rule(tmp_path):
    mask = np.zeros((9, 11), np.uint8)
    mask[2:5, 3:9] = 1
    p = tmp_path / "m.png"
    save_mask(p, mask)
    assert np.array_equal(load_mask(p).to_array(), mask)
    # any nonzero gray level counts as foreground
    gray = np.array([[0, 7], [128, 255]], np.uint8)
    Image.fromarray(gray, mode="L").save(tmp_path / "g.png")
    assert np.array_equal(load_mask(tmp_path / "g.png").to_array(),
                          np.array([[0, 1], [1, 1]], np.uint8))


def test_mask_npy_policy_rejections(tmp_path):
    two = np.zeros((4, 4), np.uint8)
    two[1, 2] = 2
    np.save(tmp_path / "two.npy", two)
    with pytest.raises(MaskIOError, match=r"\(1, 2\)"):
        load_mask(tmp_path / "two.npy")
    np.save(tmp_path / "f.npy", np.zeros((4, 4), np.float32))
    with pytest.raises(MaskIOError, match="uint8"):
        load_mask(tmp_path / "f.npy")
    np.save(tmp_path / "b.npy", np.zeros((4, 4), bool))
    with pytest.raises(MaskIOError, match="uint8"):
        load_mask(tmp_path / "b.npy")
    np.save(tmp_path / "one.npy", np.zeros(5, np.uint8))
    with pytest.raises(MaskIOError, match="2D or 3D"):
        load_mask(tmp_path / "one.npy")
    with pytest.raises(MaskIOError, match="no such file"):
        load_mask(tmp_path / "missing.npy")
    with pytest.raises(MaskIOError, match="cannot infer"):
        load_mask(tmp_path / "mask.txt")
    with pytest.raises(MaskIOError):
        save_mask(tmp_path / "vol.png", np.zeros((3, 3, 3), np.uint8))


def test_likelihood_io(tmp_path):
    vals = np.linspace(0, 1, 12, dtype=np.float32).reshape(3, 4)
    save_likelihood(tmp_path / "f.npy", vals)
    fmap = load_likelihood(tmp_path / "f.npy")
    assert fmap.values.dtype == np.float64
    assert np.allclose(fmap.values, vals)
    np.save(tmp_path / "i.npy", np.zeros((3, 3), np.int32))
    with pytest.raises(MaskIOError, match="float32/float64"):
        load_likelihood(tmp_path / "i.npy")
    np.save(tmp_path / "big.npy", np.full((3, 3), 1.0001))
    with pytest.raises(MaskIOError, match=r"\[0,1\]"):
        load_likelihood(tmp_path / "big.npy")
    np.save(tmp_path / "nan.npy", np.full((3, 3), np.nan))
    with pytest.raises(MaskIOError, match="NaN"):
        load_likelihood(tmp_path / "nan.npy")


def test_overlay_palette(tmp_path):
    base = np.zeros((4, 4), np.uint8)
    base[0, :] = 1
    gt_side = np.zeros_like(base)
    gt_side[1, 0] = 1
    gt_side[3, 3] = 1
    pred_side = np.zeros_like(base)
    pred_side[2, 0] = 1
    pred_side[3, 3] = 1
    p = tmp_path / "o.png"
    render_overlay(p, base, gt_side, pred_side)
    rgb = np.asarray(Image.open(p).convert("RGB"))
    assert tuple(rgb[0, 1]) == OVERLAY_BASE
    assert tuple(rgb[1, 0]) == OVERLAY_GT_SIDE
    assert tuple(rgb[2, 0]) == OVERLAY_PRED_SIDE
    assert tuple(rgb[3, 3]) == OVERLAY_BOTH
    assert tuple(rgb[2, 2]) == (0, 0, 0)
    # 3D writes one PNG per leading-axis slice
    vol = np.zeros((3, 4, 4), np.uint8)
    render_overlay(tmp_path / "vol", vol, vol, vol)
    assert sorted(q.name for q in (tmp_path / "vol").iterdir()) == \
        ["slice_000.png", "slice_001.png", "slice_002.png"]


def test_file_digest_and_manifest(tmp_path):
    p = tmp_path / "x.bin"
    p.write_bytes(b"topology")
    import hashlib
    assert file_digest(p) == hashlib.sha256(b"topology").hexdigest()
    m = RunManifest(["warp", "--source", "a.npy"], {"passes": 2}, seed=7)
    m.add_input("source", p)
    m.add_timing("compute", 0.5)
    m.add_timing("compute", 0.25)
    doc = m.to_dict()
    assert doc["argv"][0] == "warp"
    assert doc["config"] == {"passes": 2}
    assert doc["seed"] == 7
    assert doc["timings_s"]["compute"] == 0.75
    assert doc["inputs"]["source"]["sha256"] == file_digest(p)
    assert doc["version"] == tw.__version__
    m.write(tmp_path / "out" / "manifest.json")
    assert json.load(open(tmp_path / "out" / "manifest.json")) == \
        json.loads(json.dumps(doc))


# ------------------------------------------------------------------- CLI


def _write_pair(tmp_path, seed=0, shape=(24, 24)):
    s, t = blob_pair(shape, seed=seed)
    sp = tmp_path / f"s{seed}.npy"
    tp = tmp_path / f"t{seed}.npy"
    np.save(sp, s)
    np.save(tp, t)
    return sp, tp


def test_cli_simple_check(tmp_path, capsys):
    mask = np.zeros((6, 6), np.uint8)
    mask[2, 2:5] = 1
    np.save(tmp_path / "m.npy", mask)
    out = tmp_path / "out"
    rc = main(["simple-check", "--mask", str(tmp_path / "m.npy"),
               "--out", str(out)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    field = np.load(out / "simple_cells.npy")
    assert doc["simple_count"] == int(field.sum())
    assert field[2, 2] == 1 and field[2, 3] == 0
    assert (out / "manifest.json").exists()
    rc = main(["simple-check", "--mask", str(tmp_path / "m.npy"),
               "--coord", "2,3", "--out", str(out)])
    assert rc == 0
    assert json.loads(capsys.readouterr().out) == {"coord": [2, 3],
                                                   "simple": False}


def test_cli_warp_single_pair(tmp_path, capsys):
    sp, tp = _write_pair(tmp_path)
    out = tmp_path / "out"
    rc = main(["warp", "--source", str(sp), "--target", str(tp),
               "--passes", "4", "--out", str(out)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    r = tw.warp(np.load(sp), np.load(tp), tw.WarpConfig(passes=4))
    assert doc["initial_hamming"] == r.initial_hamming
    assert doc["final_hamming"] == r.final_hamming
    assert doc["flips"] == r.flip_count
    assert doc["passes_run"] == r.passes_run
    assert np.array_equal(np.load(out / "warped.npy"), r.warped.to_array())
    assert np.array_equal(np.load(out / "residual.npy"),
                          r.residual.to_array())
    flips = json.load(open(out / "flips.json"))
    assert len(flips) == r.flip_count
    manifest = json.load(open(out / "manifest.json"))
    assert manifest["config"]["passes"] == 4
    assert set(manifest["inputs"]) == {"source[0]", "target[0]"}


def test_cli_warp_batch_thread_cap_invariance(tmp_path, capsys, monkeypatch):
    sources, targets = [], []
    for seed in range(3):
        sp, tp = _write_pair(tmp_path, seed=seed)
        sources.append(str(sp))
        targets.append(str(tp))

    def run(threads, tag):
        monkeypatch.setenv("TOPOWARP_THREADS", threads)
        out = tmp_path / tag
        rc = main(["warp", "--source", *sources, "--target", *targets,
                   "--passes", "2", "--out", str(out)])
        assert rc == 0
        docs = json.loads(capsys.readouterr().out.replace(str(out), "@"))
        assert len(docs) == 3
        blobs = []
        for i in range(3):
            d = out / f"pair_{i:04d}"
            blobs.append((d / "warped.npy").read_bytes()
                         + (d / "residual.npy").read_bytes()
                         + (d / "flips.json").read_bytes())
        manifest = json.loads(
            (out / "manifest.json").read_text().replace(str(out), "@"))
        manifest.pop("timings_s")
        return docs, blobs, manifest

    d1, b1, m1 = run("1", "serial")
    d4, b4, m4 = run("4", "pooled")
    assert d1 == d4
    assert b1 == b4
    assert m1 == m4


def test_cli_critical_outputs(tmp_path, capsys):
    sp, tp = _write_pair(tmp_path, seed=1)
    out = tmp_path / "out"
    rc = main(["critical", "--pred", str(sp), "--gt", str(tp),
               "--passes", "4", "--out", str(out)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    m = np.load(out / "critical.npy")
    mg = np.load(out / "critical_gt_side.npy")
    mp = np.load(out / "critical_pred_side.npy")
    assert np.array_equal(m, mg | mp)
    assert doc["critical_count"] == int(m.sum())
    assert doc["gt_side_count"] == int(mg.sum())
    assert doc["pred_side_count"] == int(mp.sum())
    assert (out / "overlay.png").exists()
    crit = tw.critical_mask(np.load(sp), np.load(tp),
                            tw.WarpConfig(passes=4))
    assert np.array_equal(m, crit.mask.to_array())


def test_cli_loss_matches_library(tmp_path, capsys):
    rng = np.random.default_rng(91)
    f = rng.uniform(0.05, 0.95, size=(16, 16))
    g = (rng.random((16, 16)) < 0.5).astype(np.uint8)
    fp = tmp_path / "f.npy"
    np.save(fp, f)
    gp = tmp_path / "g.npy"
    np.save(gp, g)
    out = tmp_path / "out"
    rc = main(["loss", "--likelihood", str(fp), "--gt", str(gp),
               "--out", str(out)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    rep = tw.total_loss(f, g)
    assert doc["l_total"] == pytest.approx(rep.l_total, rel=1e-12)
    assert doc["l_dice"] == pytest.approx(rep.l_dice, rel=1e-12)
    assert doc["lambda_warp"] == rep.lambda_warp
    assert doc["critical_count"] == rep.critical_count
    grad = np.load(out / "gradient.npy")
    assert np.array_equal(grad, rep.gradient)


def test_cli_metrics_matches_library(tmp_path, capsys):
    sp, tp = _write_pair(tmp_path, seed=2, shape=(28, 28))
    out = tmp_path / "out"
    rc = main(["metrics", "--pred", str(sp), "--gt", str(tp),
               "--patch", "12x12", "--samples", "9", "--seed", "3",
               "--out", str(out)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    want = tw.evaluate(np.load(sp), np.load(tp), patch=(12, 12), samples=9,
                       seed=3).to_dict()
    for key in ("dice", "ari", "warping_error", "betti_error", "config"):
        assert doc[key] == want[key], key
    assert doc["pred"] == str(sp)


def test_cli_metrics_binarizes_float_pred(tmp_path, capsys):
    g = np.zeros((10, 10), np.uint8)
    g[3:7, 3:7] = 1
    fp = tmp_path / "pred.npy"
    np.save(fp, np.where(g, 0.8, 0.2))
    gp = tmp_path / "gt.npy"
    np.save(gp, g)
    rc = main(["metrics", "--pred", str(fp), "--gt", str(gp),
               "--patch", "10x10", "--samples", "2",
               "--out", str(tmp_path / "out")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dice"] == 1.0 and doc["warping_error"] == 0.0


def test_cli_bench_smoke(tmp_path, capsys):
    rc = main(["bench", "--size", "256", "--pairs", "1",
               "--out", str(tmp_path)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    for key in ("ordered_s_per_pair", "naive_s_per_pair", "speedup_ratio",
                "ordered_final_hamming", "naive_final_hamming"):
        assert key in doc
    manifest = json.load(open(tmp_path / "manifest.json"))
    assert manifest["config"]["passes"] == 128


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["--version"]) == 0
    capsys.readouterr()
    # usage error (unknown subcommand)
    assert main(["frobnicate"]) == 1
    # I/O error: missing input file
    assert main(["warp", "--source", str(tmp_path / "no.npy"),
                 "--target", str(tmp_path / "no.npy"),
                 "--out", str(tmp_path)]) == 2
    # validation error: mismatched pair counts
    sp, tp = _write_pair(tmp_path, seed=3)
    assert main(["warp", "--source", str(sp), "--target", str(tp),
                 str(tp), "--out", str(tmp_path)]) == 1
    # validation error: malformed patch spec
    assert main(["metrics", "--pred", str(sp), "--gt", str(tp),
                 "--patch", "axb", "--out", str(tmp_path)]) == 1
    # validation error: random tie-break without a seed
    assert main(["warp", "--source", str(sp), "--target", str(tp),
                 "--tie", "random", "--out", str(tmp_path)]) == 1
    capsys.readouterr()


def test_cli_rerun_is_deterministic(tmp_path, capsys):
    sp, tp = _write_pair(tmp_path, seed=4)
    argv = ["critical", "--pred", str(sp), "--gt", str(tp), "--passes", "2"]
    rc = main(argv + ["--out", str(tmp_path / "a")])
    out_a = capsys.readouterr().out
    rc2 = main(argv + ["--out", str(tmp_path / "b")])
    out_b = capsys.readouterr().out
    assert rc == rc2 == 0
    assert out_a.replace(str(tmp_path / "a"), "@") == \
        out_b.replace(str(tmp_path / "b"), "@")
    for name in ("critical.npy", "critical_gt_side.npy",
                 "critical_pred_side.npy", "overlay.png"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes(), name
    ma = json.load(open(tmp_path / "a" / "manifest.json"))
    mb = json.load(open(tmp_path / "b" / "manifest.json"))
    ma.pop("timings_s")
    mb.pop("timings_s")
    ma["argv"].remove(str(tmp_path / "a"))
    mb["argv"].remove(str(tmp_path / "b"))
    assert ma == mb
