"""Two-round training: random negatives, then mined hard negatives."""

import logging

import numpy as np

from .classifier import LinearModel, codes_for, score_map, train_linear_svm
from .dataset import RunConfig, sample_negatives
from .detector import PyramidConfig, pyramid
from .errors import NoNegatives
from .features import BlockLayout, extract

log = logging.getLogger(__name__)


def features_of(windows, layout: BlockLayout) -> np.ndarray:
    if not len(windows):
        return np.zeros((0, layout.dim))
    return np.array([extract(w, layout) for w in windows], dtype=np.float64)


def mine_hard_negatives(model: LinearModel, negative_images, config: RunConfig,
                        cap: int) -> list[tuple]:
    """Scan every negative image; return up to ``cap`` false positives, hardest first.

    Each entry is ``(score, image_index, level, top, left, window_pixels)``.
    """
    if cap <= 0:
        return []
    pcfg = PyramidConfig(config.pyramid_factor)
    window = model.layout.window
    hits = []
    for n, img in enumerate(negative_images):
        for k, _, level_img in pyramid(img, window, pcfg):
            rows, cols, scores = score_map(model, codes_for(model, level_img),
                                           config.scan_stride)
            for i, j in zip(*np.nonzero(scores > config.mining_threshold)):
                hits.append((float(scores[i, j]), n, k, int(rows[i]), int(cols[j])))
    hits.sort(key=lambda h: (-h[0], h[1], h[2], h[3], h[4]))
    hits = hits[:cap]
    # Re-render only the levels that contributed a kept window.
    wanted: dict[tuple[int, int], list] = {}
    for h in hits:
        wanted.setdefault((h[1], h[2]), []).append(h)
    crops = {}
    for n in sorted({key[0] for key in wanted}):
        for k, _, level_img in pyramid(negative_images[n], window, pcfg):
            for h in wanted.get((n, k), []):
                top, left = h[3], h[4]
                crops[h] = np.array(level_img[top:top + window[0], left:left + window[1]])
    return [h + (crops[h],) for h in hits]


def bootstrap_train(positives, negative_images, layout: BlockLayout,
                    config: RunConfig = RunConfig(), report: dict | None = None) -> LinearModel:
    """Train on positives vs random negative windows, mine false positives, retrain."""
    pos = features_of(positives, layout)
    negs = sample_negatives(negative_images, config.n_negatives, layout.window, config.seed)
    if not negs:
        raise NoNegatives("no negative windows were sampled")
    neg = features_of(negs, layout)
    X = np.vstack([pos, neg])
    y = np.concatenate([np.ones(len(pos)), -np.ones(len(neg))])
    model = train_linear_svm(X, y, config.svm_c, config.seed, layout, config.normalize)
    log.info("round 1: %d positives, %d negatives", len(pos), len(neg))

    mined = mine_hard_negatives(model, negative_images, config, config.hard_negative_cap)
    log.info("mined %d hard negatives", len(mined))
    if mined:
        X = np.vstack([X, features_of([m[5] for m in mined], layout)])
        y = np.concatenate([y, -np.ones(len(mined))])
    final = train_linear_svm(X, y, config.svm_c, config.seed, layout, config.normalize)
    accuracy = float(np.mean(np.sign(final.decision(X)) == y))
    final.meta.update(rounds=2, n_mined=len(mined), train_accuracy=accuracy)
    if report is not None:
        report["round1"] = model
        report["mined"] = [m[:5] for m in mined]
    return final
