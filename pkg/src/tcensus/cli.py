"""Command-line entry point: ``tcensus <command> ...``.

Failures exit with status 2 and print one line to stderr of the form
``error: <Category>: <message>``.
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import census, evaluation
from .classifier import LinearModel, score_windows
from .dataset import DatasetManifest, RunConfig, positive_windows, sample_negatives
from .detector import (PyramidConfig, detect, detections_to_json, detections_to_lines,
                       draw_boxes)
from .errors import ConfigError, TCensusError
from .features import BlockLayout, extract, grid_rects, select_local_optimal_blocks
from .imagefile import atomic_write, encode_pgm, load_image, save_image

log = logging.getLogger("tcensus")


def _config(path, seed) -> RunConfig:
    cfg = RunConfig.load(path) if path else RunConfig()
    if seed is not None:
        cfg.seed = seed
    return cfg


def _training_windows(manifest: DatasetManifest, cfg: RunConfig, window=None):
    pos = positive_windows(manifest.images("positives"), window or cfg.window, cfg.mirror,
                           cfg.n_positives)
    negs = manifest.images("negatives")
    return pos, negs


def cmd_transform(args) -> None:
    img = load_image(args.image)
    pair = census.utct_images(img)
    prefix = args.out_prefix
    atomic_write(f"{prefix}.i1.pgm", encode_pgm(pair.i1))
    atomic_write(f"{prefix}.i2.pgm", encode_pgm(pair.i2))
    atomic_write(f"{prefix}.ct.pgm", encode_pgm(census.ct_image(img)))


def _select_layout(pos, negative_images, cfg: RunConfig) -> BlockLayout:
    neg = sample_negatives(negative_images, cfg.n_negatives, cfg.window, cfg.seed)
    labels = np.concatenate([np.ones(len(pos)), -np.ones(len(neg))])
    b, s = cfg.block_size, cfg.block_stride
    report: list = []
    layout = select_local_optimal_blocks(pos + neg, labels, grid_rects(cfg.window, (b, b), (s, s)),
                                         cfg.window, scheme=cfg.descriptor, C=cfg.svm_c,
                                         seed=cfg.seed, report=report)
    for row in report:
        log.info("block %s -> %s", row["base"], row["selected"])
    return layout


def cmd_select_blocks(args) -> None:
    manifest = DatasetManifest.load(args.manifest)
    cfg = _config(args.config, args.seed)
    pos, negs = _training_windows(manifest, cfg)
    layout = _select_layout(pos, negs, cfg)
    atomic_write(args.out, json.dumps(layout.to_dict(), sort_keys=True, indent=1) + "\n")


def cmd_train(args) -> None:
    from .training import bootstrap_train

    manifest = DatasetManifest.load(args.manifest)
    cfg = _config(args.config, args.seed)
    if args.layout:
        layout = BlockLayout.from_dict(json.loads(Path(args.layout).read_text()))
        if layout.window != cfg.window:
            raise ConfigError(f"layout window {layout.window} differs from the configured "
                              f"window {cfg.window}")
    pos, negs = _training_windows(manifest, cfg)
    if not args.layout:
        layout = _select_layout(pos, negs, cfg) if cfg.select_blocks else cfg.layout()
    model = bootstrap_train(pos, negs, layout, cfg)
    atomic_write(args.out, model.to_json() + "\n")


def cmd_detect(args) -> None:
    model = LinearModel.from_json(Path(args.model).read_text())
    cfg = _config(args.config, None)
    stride = args.stride or cfg.scan_stride
    threshold = cfg.detect_threshold if args.threshold is None else args.threshold
    overlap = cfg.nms_overlap if args.overlap is None else args.overlap
    results = {}
    for path in args.images:
        img = load_image(path)
        dets = detect(img, model, PyramidConfig(cfg.pyramid_factor), stride, threshold, overlap)
        results[str(path)] = dets
        if args.annotate:
            save_image(Path(args.annotate) / (Path(path).stem + ".png"), draw_boxes(img, dets))
    atomic_write(args.out, detections_to_json(results) + "\n")
    if args.lines:
        atomic_write(args.lines, detections_to_lines(results))


def _summary_path(out: str) -> Path:
    p = Path(out)
    return p.with_name(p.stem + ".summary.json")


def cmd_eval_sim(args) -> None:
    manifest = DatasetManifest.load(args.manifest)
    cfg = _config(args.config, args.seed)
    layout = cfg.layout(args.descriptor)
    pos = positive_windows(manifest.images("positives"), cfg.window, cfg.mirror)
    rng = np.random.default_rng(cfg.seed)
    if len(pos) > args.count:
        pos = [pos[i] for i in np.sort(rng.choice(len(pos), args.count, replace=False))]
    neg = sample_negatives(manifest.images("negatives"), args.count, cfg.window, cfg.seed)
    X = np.array([extract(w, layout, normalize=cfg.normalize) for w in pos + neg])
    y = np.array([1] * len(pos) + [-1] * len(neg))
    data = evaluation.LabeledFeatureSet(X, y, args.descriptor)
    rows, summary = [], {}
    for cls, name in ((1, "positive"), (-1, "negative")):
        d = evaluation.diff_scores(data, cls)
        rows += [(args.descriptor, name, i, v) for i, v in enumerate(d)]
        summary[name] = {"count": int(d.size),
                         "negative_fraction_percent": 100.0 * float(np.mean(d < 0))}
    atomic_write(args.out, evaluation.diff_csv(rows))
    atomic_write(_summary_path(args.out),
                 json.dumps({args.descriptor: summary}, sort_keys=True, indent=1) + "\n")


def cmd_eval_roc(args) -> None:
    model = LinearModel.from_json(Path(args.model).read_text())
    manifest = DatasetManifest.load(args.manifest)
    cfg = _config(args.config, args.seed)
    window = model.layout.window
    pos = positive_windows(manifest.images("test_positives"), window, mirror=False)
    neg = sample_negatives(manifest.images("test_negatives"), cfg.n_test_negatives, window,
                           cfg.seed)
    curve = evaluation.roc(score_windows(model, pos), score_windows(model, neg))
    atomic_write(args.out, evaluation.roc_csv(curve))
    atomic_write(_summary_path(args.out),
                 evaluation.roc_summary({model.layout.scheme: curve}) + "\n")


def cmd_selftest(args) -> int:
    from .selftest import run

    return 0 if run(print) else 1


def cmd_synth(args) -> None:
    from .synthetic import write_dataset

    path = write_dataset(args.out_dir, seed=args.seed or 0, n_pos=args.positives,
                         n_neg_images=args.negatives)
    print(path)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tcensus", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("transform", help="write UTCT label images and the CT image")
    s.add_argument("image")
    s.add_argument("--out-prefix", required=True)
    s.set_defaults(func=cmd_transform)

    s = sub.add_parser("select-blocks", help="choose an extension structure per block")
    s.add_argument("manifest")
    s.add_argument("config", nargs="?")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_select_blocks)

    s = sub.add_parser("train", help="two-round linear SVM training")
    s.add_argument("manifest")
    s.add_argument("config", nargs="?")
    s.add_argument("--layout")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("detect", help="multi-scale detection")
    s.add_argument("model")
    s.add_argument("images", nargs="+")
    s.add_argument("--out", required=True)
    s.add_argument("--lines", help="also write one whitespace-separated record per detection")
    s.add_argument("--annotate", help="directory for images with drawn boxes")
    s.add_argument("--config")
    s.add_argument("--stride", type=int)
    s.add_argument("--threshold", type=float)
    s.add_argument("--overlap", type=float)
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("eval-sim", help="similarity-score (Diff_s) report")
    s.add_argument("manifest")
    s.add_argument("config", nargs="?")
    s.add_argument("--descriptor", choices=("centrist", "tcentrist"), default="tcentrist")
    s.add_argument("--count", type=int, default=2000, help="samples per class")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_eval_sim)

    s = sub.add_parser("eval-roc", help="classification ROC on the test split")
    s.add_argument("model")
    s.add_argument("manifest")
    s.add_argument("--config")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_eval_roc)

    s = sub.add_parser("selftest", help="run the brute-force oracle equivalence checks")
    s.set_defaults(func=cmd_selftest)

    s = sub.add_parser("synth", help="write a synthetic dataset and manifest")
    s.add_argument("out_dir")
    s.add_argument("--seed", type=int)
    s.add_argument("--positives", type=int, default=200)
    s.add_argument("--negatives", type=int, default=40)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = args.func(args)
    except TCensusError as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
