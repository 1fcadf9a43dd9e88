"""Batch command line: simple-check, warp, critical, loss, metrics, bench.

Every invocation writes a manifest (manifest.json in the output directory)
recording the argv, resolved configuration, input content digests, library
version, seed, and stage timings. All structured stdout is JSON with sorted
keys. Exit status: 0 success, 1 validation error, 2 I/O error.

Multiple input pairs are accepted by passing several paths to the pair
flags; pairs are processed by a thread pool capped by the TOPOWARP_THREADS
environment variable, and outputs keep input order regardless of completion
order. With more than one pair, file outputs go to per-pair subdirectories
pair_0000, pair_0001, ...
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._version import __version__
from .core import Grid
from .distance import Metric
from .io import (
    MaskIOError,
    RunManifest,
    load_likelihood,
    load_mask,
    render_overlay,
    save_mask,
)
from .loss import LossConfig, total_loss
from .metrics import evaluate
from .simple import is_simple_at, simple_mask
from .synth import road_like_pair
from .warp import ROW_MAJOR, RANDOM, WarpConfig, critical_mask, naive_warp, warp

_TIE_CHOICES = {"rowmajor": ROW_MAJOR, "random": RANDOM}


def _thread_cap(n_tasks: int) -> int:
    raw = os.environ.get("TOPOWARP_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap < 1:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def _add_warp_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--metric", choices=["cityblock", "chessboard", "euclidean"],
                   default="cityblock", help="distance metric for ordering")
    p.add_argument("--passes", type=int, default=1, metavar="N",
                   help="maximum warping rounds (default 1)")
    p.add_argument("--recompute-dt", action="store_true",
                   help="recompute the distance transform between rounds")
    p.add_argument("--tie", choices=sorted(_TIE_CHOICES), default="rowmajor",
                   help="order of equal-distance candidates")
    p.add_argument("--seed", type=int, default=None, metavar="S",
                   help="seed for random tie-break (and patch sampling "
                        "where applicable)")


def _warp_config(args: argparse.Namespace) -> WarpConfig:
    return WarpConfig(
        metric=args.metric,
        passes=args.passes,
        recompute_distance_each_pass=args.recompute_dt,
        tie_break=_TIE_CHOICES[args.tie],
        seed=args.seed,
    )


def _parse_patch(text: Optional[str]) -> Optional[Tuple[int, ...]]:
    if text is None:
        return None
    try:
        parts = tuple(int(x) for x in text.lower().split("x"))
    except ValueError:
        raise ValueError(f"--patch expects HxW or HxWxD, got {text!r}")
    if len(parts) not in (2, 3) or any(p <= 0 for p in parts):
        raise ValueError(f"--patch expects 2 or 3 positive extents, got {text!r}")
    return parts


def _parse_dims(text: Optional[str]) -> Optional[Tuple[int, ...]]:
    if text is None:
        return None
    try:
        return tuple(int(x) for x in text.replace(",", " ").split())
    except ValueError:
        raise ValueError(f"--betti-dims expects integers, got {text!r}")


def _pair_dirs(out: Path, n: int) -> List[Path]:
    if n == 1:
        return [out]
    return [out / f"pair_{i:04d}" for i in range(n)]


def _check_pair_counts(a: Sequence[str], b: Sequence[str],
                       name_a: str, name_b: str) -> None:
    if len(a) != len(b):
        raise ValueError(
            f"{name_a} and {name_b} must list the same number of files "
            f"({len(a)} vs {len(b)})")


def _emit(doc) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _mask_ext(path: str) -> str:
    return ".npy" if Path(path).suffix.lower() == ".npy" else ".png"


def _run_batch(worker, n: int):
    """Run worker(i) for i in 0..n-1 on the capped pool, results in order."""
    threads = _thread_cap(n)
    if threads == 1 or n == 1:
        return [worker(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n)))


# ------------------------------------------------------------ subcommands

def _cmd_simple_check(args: argparse.Namespace) -> int:
    out = Path(args.out)
    manifest = RunManifest(args.argv_, {"coord": args.coord}, None)
    t0 = time.perf_counter()
    grid = load_mask(args.mask)
    manifest.add_input("mask", args.mask)
    manifest.add_timing("load", time.perf_counter() - t0)

    t0 = time.perf_counter()
    if args.coord is not None:
        coord = tuple(int(x) for x in args.coord.replace(",", " ").split())
        verdict = is_simple_at(grid, coord)
        manifest.add_timing("compute", time.perf_counter() - t0)
        doc = {"coord": list(coord), "simple": bool(verdict)}
    else:
        field = simple_mask(grid)
        manifest.add_timing("compute", time.perf_counter() - t0)
        t0 = time.perf_counter()
        out.mkdir(parents=True, exist_ok=True)
        target = out / "simple_cells.npy"
        np.save(target, field)
        manifest.add_timing("write", time.perf_counter() - t0)
        doc = {
            "simple_count": int(field.sum()),
            "cells_total": int(field.size),
            "out": str(target),
        }
    manifest.write(out / "manifest.json")
    _emit(doc)
    return 0


def _cmd_warp(args: argparse.Namespace) -> int:
    _check_pair_counts(args.source, args.target, "--source", "--target")
    out = Path(args.out)
    config = _warp_config(args)
    manifest = RunManifest(args.argv_, {
        "metric": args.metric, "passes": args.passes,
        "recompute_dt": args.recompute_dt, "tie": args.tie,
    }, args.seed)
    n = len(args.source)
    dirs = _pair_dirs(out, n)

    t0 = time.perf_counter()
    pairs = []
    for i, (s, t) in enumerate(zip(args.source, args.target)):
        pairs.append((load_mask(s), load_mask(t)))
        manifest.add_input(f"source[{i}]", s)
        manifest.add_input(f"target[{i}]", t)
    manifest.add_timing("load", time.perf_counter() - t0)

    t0 = time.perf_counter()
    results = _run_batch(lambda i: warp(pairs[i][0], pairs[i][1], config), n)
    manifest.add_timing("compute", time.perf_counter() - t0)

    t0 = time.perf_counter()
    docs = []
    for i, res in enumerate(results):
        d = dirs[i]
        d.mkdir(parents=True, exist_ok=True)
        ext = _mask_ext(args.source[i])
        save_mask(d / f"warped{ext}", res.warped)
        save_mask(d / f"residual{ext}", res.residual)
        with open(d / "flips.json", "w") as fh:
            json.dump([[c, int(p)] for c, p in
                       zip(res.flip_coords.tolist(), res.flip_passes.tolist())],
                      fh)
            fh.write("\n")
        docs.append({
            "source": args.source[i],
            "target": args.target[i],
            "initial_hamming": res.initial_hamming,
            "final_hamming": res.final_hamming,
            "flips": res.flip_count,
            "passes_run": res.passes_run,
            "out": str(d),
        })
    manifest.add_timing("write", time.perf_counter() - t0)
    manifest.write(out / "manifest.json")
    _emit(docs[0] if n == 1 else docs)
    return 0


def _cmd_critical(args: argparse.Namespace) -> int:
    _check_pair_counts(args.pred, args.gt, "--pred", "--gt")
    out = Path(args.out)
    config = _warp_config(args)
    manifest = RunManifest(args.argv_, {
        "metric": args.metric, "passes": args.passes,
        "recompute_dt": args.recompute_dt, "tie": args.tie,
    }, args.seed)
    n = len(args.pred)
    dirs = _pair_dirs(out, n)

    t0 = time.perf_counter()
    pairs = []
    for i, (p, g) in enumerate(zip(args.pred, args.gt)):
        pairs.append((load_mask(p), load_mask(g)))
        manifest.add_input(f"pred[{i}]", p)
        manifest.add_input(f"gt[{i}]", g)
    manifest.add_timing("load", time.perf_counter() - t0)

    t0 = time.perf_counter()
    results = _run_batch(
        lambda i: critical_mask(pairs[i][0], pairs[i][1], config), n)
    manifest.add_timing("compute", time.perf_counter() - t0)

    t0 = time.perf_counter()
    docs = []
    for i, crit in enumerate(results):
        d = dirs[i]
        d.mkdir(parents=True, exist_ok=True)
        ext = _mask_ext(args.pred[i])
        save_mask(d / f"critical{ext}", crit.mask)
        save_mask(d / f"critical_gt_side{ext}", crit.from_gt_warp)
        save_mask(d / f"critical_pred_side{ext}", crit.from_pred_warp)
        overlay = d / ("overlay.png" if pairs[i][0].ndim == 2 else "overlay")
        render_overlay(overlay, pairs[i][0], crit.from_gt_warp,
                       crit.from_pred_warp)
        docs.append({
            "pred": args.pred[i],
            "gt": args.gt[i],
            "critical_count": int(crit.mask.data.sum()),
            "gt_side_count": int(crit.from_gt_warp.data.sum()),
            "pred_side_count": int(crit.from_pred_warp.data.sum()),
            "out": str(d),
        })
    manifest.add_timing("write", time.perf_counter() - t0)
    manifest.write(out / "manifest.json")
    _emit(docs[0] if n == 1 else docs)
    return 0


def _cmd_loss(args: argparse.Namespace) -> int:
    _check_pair_counts(args.likelihood, args.gt, "--likelihood", "--gt")
    out = Path(args.out)
    warp_cfg = _warp_config(args)
    loss_cfg = LossConfig(pixel_loss=args.pixel_loss,
                          lambda_warp=args.lambda_warp)
    manifest = RunManifest(args.argv_, {
        "metric": args.metric, "passes": args.passes,
        "recompute_dt": args.recompute_dt, "tie": args.tie,
        "pixel_loss": args.pixel_loss, "lambda_warp": args.lambda_warp,
    }, args.seed)
    n = len(args.likelihood)
    dirs = _pair_dirs(out, n)

    t0 = time.perf_counter()
    pairs = []
    for i, (f, g) in enumerate(zip(args.likelihood, args.gt)):
        pairs.append((load_likelihood(f), load_mask(g)))
        manifest.add_input(f"likelihood[{i}]", f)
        manifest.add_input(f"gt[{i}]", g)
    manifest.add_timing("load", time.perf_counter() - t0)

    t0 = time.perf_counter()
    reports = _run_batch(
        lambda i: total_loss(pairs[i][0], pairs[i][1], loss_cfg, warp_cfg), n)
    manifest.add_timing("compute", time.perf_counter() - t0)

    t0 = time.perf_counter()
    docs = []
    for i, rep in enumerate(reports):
        d = dirs[i]
        d.mkdir(parents=True, exist_ok=True)
        np.save(d / "gradient.npy", rep.gradient)
        docs.append({
            "likelihood": args.likelihood[i],
            "gt": args.gt[i],
            "l_dice": rep.l_dice,
            "l_warp": rep.l_warp,
            "l_total": rep.l_total,
            "lambda_warp": rep.lambda_warp,
            "pixel_loss": args.pixel_loss,
            "critical_count": rep.critical_count,
            "gradient": str(d / "gradient.npy"),
        })
    manifest.add_timing("write", time.perf_counter() - t0)
    manifest.write(out / "manifest.json")
    _emit(docs[0] if n == 1 else docs)
    return 0


def _load_pred(path: str) -> Grid:
    """Prediction input: a mask file, or a float NPY binarized at 0.5."""
    if Path(path).suffix.lower() == ".npy":
        arr = np.load(path, allow_pickle=False)
        if np.issubdtype(arr.dtype, np.floating):
            from .loss import binarize
            return binarize(load_likelihood(path))
    return load_mask(path)


def _cmd_metrics(args: argparse.Namespace) -> int:
    _check_pair_counts(args.pred, args.gt, "--pred", "--gt")
    out = Path(args.out)
    warp_cfg = _warp_config(args)
    patch = _parse_patch(args.patch)
    dims_used = _parse_dims(args.betti_dims)
    seed = args.seed if args.seed is not None else 0
    manifest = RunManifest(args.argv_, {
        "metric": args.metric, "passes": args.passes,
        "recompute_dt": args.recompute_dt, "tie": args.tie,
        "patch": args.patch, "samples": args.samples,
        "betti_dims": args.betti_dims,
    }, seed)
    n = len(args.pred)

    t0 = time.perf_counter()
    pairs = []
    for i, (p, g) in enumerate(zip(args.pred, args.gt)):
        pairs.append((_load_pred(p), load_mask(g)))
        manifest.add_input(f"pred[{i}]", p)
        manifest.add_input(f"gt[{i}]", g)
    manifest.add_timing("load", time.perf_counter() - t0)

    t0 = time.perf_counter()
    reports = _run_batch(
        lambda i: evaluate(pairs[i][0], pairs[i][1], warp_cfg,
                           patch=patch, samples=args.samples,
                           dims_used=dims_used, seed=seed), n)
    manifest.add_timing("compute", time.perf_counter() - t0)

    docs = []
    for i, rep in enumerate(reports):
        doc = rep.to_dict()
        doc["pred"] = args.pred[i]
        doc["gt"] = args.gt[i]
        docs.append(doc)
    manifest.write(out / "manifest.json")
    _emit(docs[0] if n == 1 else docs)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    out = Path(args.out)
    manifest = RunManifest(args.argv_, {
        "size": args.size, "pairs": args.pairs, "metric": args.metric,
        "passes": args.passes, "recompute_dt": args.recompute_dt,
        "tie": args.tie,
    }, args.seed)
    seed = args.seed if args.seed is not None else 0

    t0 = time.perf_counter()
    if args.source and args.target:
        instances = [(load_mask(args.source).data, load_mask(args.target).data)]
        manifest.add_input("source", args.source)
        manifest.add_input("target", args.target)
    else:
        # the road geometry defaults suit a 512 grid; scale them so small
        # --size values still draw a nonempty, loop-bearing network
        spacing = max(12, args.size * 176 // 512)
        wide = max(5, args.size * 141 // 512) | 1
        narrow = max(3, args.size * 11 // 512) | 1
        instances = [road_like_pair(args.size, seed + i, spacing, wide, narrow)
                     for i in range(args.pairs)]
    manifest.add_timing("load", time.perf_counter() - t0)

    cfg = _warp_config(args)

    # warm the compiled kernels at full size so the timed loop measures
    # steady-state work (warp leaves its inputs untouched)
    ws, wt = instances[0]
    warp(ws, wt, cfg)
    naive_warp(ws, wt)
    ordered_s = 0.0
    naive_s = 0.0
    ordered_flips = 0
    naive_flips = 0
    final_ordered = 0
    final_naive = 0
    for s, t in instances:
        t0 = time.perf_counter()
        r1 = warp(s, t, cfg)
        ordered_s += time.perf_counter() - t0
        t0 = time.perf_counter()
        r2 = naive_warp(s, t)
        naive_s += time.perf_counter() - t0
        ordered_flips += r1.flip_count
        naive_flips += r2.flip_count
        final_ordered += r1.final_hamming
        final_naive += r2.final_hamming
    k = len(instances)
    manifest.add_timing("compute", ordered_s + naive_s)
    manifest.write(out / "manifest.json")
    _emit({
        "pairs": k,
        "size": args.size if not args.source else "provided",
        "metric": args.metric,
        "ordered_s_per_pair": ordered_s / k,
        "naive_s_per_pair": naive_s / k,
        "speedup_ratio": (naive_s / ordered_s) if ordered_s > 0 else float("inf"),
        "ordered_flips": ordered_flips,
        "naive_flips": naive_flips,
        "ordered_final_hamming": final_ordered,
        "naive_final_hamming": final_naive,
    })
    return 0


# ------------------------------------------------------------ dispatch

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topowarp",
        description="Homotopy-warping toolkit for binary 2D/3D masks.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simple-check",
                       help="simple-cell field of a mask, or one verdict")
    p.add_argument("--mask", required=True)
    p.add_argument("--coord", default=None, metavar="R,C[,Z]",
                   help="single coordinate to test (otherwise the whole "
                        "field is written)")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=_cmd_simple_check)

    p = sub.add_parser("warp", help="warp source masks toward targets")
    p.add_argument("--source", required=True, nargs="+")
    p.add_argument("--target", required=True, nargs="+")
    p.add_argument("--out", default=".", help="output directory")
    _add_warp_flags(p)
    p.set_defaults(func=_cmd_warp)

    p = sub.add_parser("critical",
                       help="critical cells of predictions vs references")
    p.add_argument("--pred", required=True, nargs="+")
    p.add_argument("--gt", required=True, nargs="+")
    p.add_argument("--out", default=".", help="output directory")
    _add_warp_flags(p)
    p.set_defaults(func=_cmd_critical)

    p = sub.add_parser("loss", help="masked warping loss and gradient")
    p.add_argument("--likelihood", required=True, nargs="+")
    p.add_argument("--gt", required=True, nargs="+")
    p.add_argument("--lambda-warp", type=float, default=None, metavar="X")
    p.add_argument("--pixel-loss", choices=["ce", "mse", "dice"],
                   default="ce")
    p.add_argument("--out", default=".", help="output directory")
    _add_warp_flags(p)
    p.set_defaults(func=_cmd_loss)

    p = sub.add_parser("metrics", help="evaluation metrics for mask pairs")
    p.add_argument("--pred", required=True, nargs="+",
                   help="binary mask files, or float NPY likelihoods "
                        "(binarized at 0.5)")
    p.add_argument("--gt", required=True, nargs="+")
    p.add_argument("--patch", default=None, metavar="HxW[xD]")
    p.add_argument("--samples", type=int, default=100, metavar="N")
    p.add_argument("--betti-dims", default=None, metavar="LIST",
                   help="comma-separated Betti dimensions, e.g. 0,1")
    p.add_argument("--out", default=".", help="output directory (manifest)")
    _add_warp_flags(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("bench",
                       help="distance-ordered vs naive warping timings")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--pairs", type=int, default=3)
    p.add_argument("--source", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--out", default=".", help="output directory (manifest)")
    _add_warp_flags(p)
    # naive_warp always runs to its fixpoint, so give the ordered side a
    # pass budget that reaches its own fixpoint too (early stop keeps
    # converged runs cheap); --passes still overrides
    p.set_defaults(func=_cmd_bench, passes=128)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are validation failures
        code = exc.code if exc.code is not None else 0
        return 0 if code == 0 else 1
    # manifests record the invocation whether it came from the console
    # script or a programmatic main(argv) call
    args.argv_ = list(argv) if argv is not None else sys.argv[1:]
    try:
        return args.func(args)
    except MaskIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, IndexError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
