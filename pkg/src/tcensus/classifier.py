"""Linear SVM models and integral-image window scoring.

Scoring a window with a linear model over block histograms reduces to
summing, over every block rectangle interior, the weight selected by each
pixel's label. An auxiliary image holds those per-pixel weights, and its
integral image turns every rectangle into 4 lookups.

Two auxiliary constructions are provided:

* ``build_auxiliary_images`` anchors the whole layout at one window origin
  (one image pair per window). It needs block interiors to be disjoint
  unless ``accumulate=True``.
* ``block_auxiliary_images`` builds one translation-free image pair per
  block. Window scores then use that block's pair at
  ``rect + origin``, which handles overlapping layouts exactly and is what
  the scanner uses.
"""

import json
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from sklearn.exceptions import ConvergenceWarning
from sklearn.svm import LinearSVC

from .census import CodeImagePair, ct_image, utct_images
from .errors import ConfigError, DegenerateData, LayoutNotGridded, OutOfBounds
from .features import (CENTRIST, TCENTRIST, BlockLayout, extract_centrist,
                       extract_tcentrist, normalization_scale)

MODEL_VERSION = 1


@dataclass
class LinearModel:
    weights: np.ndarray
    bias: float
    layout: BlockLayout | None = None
    normalize: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = float(self.bias)
        if self.layout is not None and self.weights.shape != (self.layout.dim,):
            raise ConfigError(
                f"weights length {self.weights.size} != layout dimension {self.layout.dim}")

    def decision(self, X) -> np.ndarray:
        """Scores of raw (unnormalized) feature vectors."""
        return np.asarray(X, dtype=np.float64) @ self.effective_weights() + self.bias

    def effective_weights(self) -> np.ndarray:
        """Weights that act on raw counts (folds per-block normalization in)."""
        if self.normalize:
            return self.weights / normalization_scale(self.layout)
        return self.weights

    def block_weights(self, k: int) -> np.ndarray:
        """Effective weights of block ``k`` shaped ``(channels, bins)``."""
        lay = self.layout
        w = self.effective_weights()[k * lay.block_dim:(k + 1) * lay.block_dim]
        return w.reshape(lay.channels, lay.bins)

    def to_dict(self) -> dict:
        return {
            "version": MODEL_VERSION,
            "layout": None if self.layout is None else self.layout.to_dict(),
            "normalize": self.normalize,
            "bias": self.bias.hex(),
            "weights": [float(v).hex() for v in self.weights],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "LinearModel":
        if doc.get("version") != MODEL_VERSION:
            raise ConfigError(f"unsupported model version {doc.get('version')!r}")
        layout = None if doc["layout"] is None else BlockLayout.from_dict(doc["layout"])
        return cls(
            weights=np.array([float.fromhex(v) for v in doc["weights"]], dtype=np.float64),
            bias=float.fromhex(doc["bias"]),
            layout=layout,
            normalize=bool(doc["normalize"]),
            meta=doc.get("meta", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "LinearModel":
        return cls.from_dict(json.loads(text))


def train_linear_svm(features, labels, C: float = 1.0, seed: int = 0,
                     layout: BlockLayout | None = None, normalize: bool = False,
                     tol: float = 1e-6, max_iter: int = 20000) -> LinearModel:
    """L2-regularized hinge-loss SVM via liblinear's dual coordinate descent.

    Labels are mapped to +1 (label > 0) and -1 (otherwise). The solver
    shuffles with ``seed`` and is deterministic for a fixed data order.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.where(np.asarray(labels) > 0, 1, -1)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("features must be 2-D with one row per label")
    if len(np.unique(y)) < 2:
        raise DegenerateData("training data contains a single class")
    if normalize:
        X = X / normalization_scale(layout)
    svc = LinearSVC(C=C, loss="hinge", dual=True, tol=tol, max_iter=max_iter,
                    random_state=seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        svc.fit(X, y)
    meta = {"C": C, "seed": seed, "n_iter": int(svc.n_iter_),
            "n_pos": int((y > 0).sum()), "n_neg": int((y < 0).sum())}
    return LinearModel(svc.coef_.ravel().copy(), float(svc.intercept_[0]), layout,
                       normalize, meta)


class IntegralImage:
    """Zero-padded 2-D prefix sums; ``lookups`` counts table reads."""

    def __init__(self, raster):
        raster = np.asarray(raster, dtype=np.float64)
        h, w = raster.shape
        self.table = np.zeros((h + 1, w + 1), dtype=np.float64)
        np.cumsum(np.cumsum(raster, axis=0), axis=1, out=self.table[1:, 1:])
        self.lookups = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.table.shape[0] - 1, self.table.shape[1] - 1

    def rect_sum(self, top, left, height: int, width: int):
        """Sum over rows [top, top+height) and cols [left, left+width).

        ``top`` and ``left`` may be broadcastable integer arrays.
        """
        t = np.asarray(top)
        l = np.asarray(left)
        b = t + height
        r = l + width
        T = self.table
        out = T[b, r] - T[t, r] - T[b, l] + T[t, l]
        self.lookups += 4 * int(np.broadcast(t, l).size)
        return out


@dataclass
class AuxiliaryImagePair:
    a1: np.ndarray
    a2: np.ndarray | None = None

    def integrals(self) -> tuple:
        return tuple(IntegralImage(a) for a in (self.a1, self.a2) if a is not None)


def _label_rasters(codes) -> tuple[np.ndarray, ...]:
    if isinstance(codes, CodeImagePair):
        return codes.i1, codes.i2
    return (np.asarray(codes),)


def _check_scheme(model: LinearModel, codes) -> None:
    if model.layout is None:
        raise ConfigError("model is not bound to a block layout")
    want = TCENTRIST if isinstance(codes, CodeImagePair) else CENTRIST
    if model.layout.scheme != want:
        raise ConfigError(f"model scheme {model.layout.scheme} does not match {want} codes")


def block_auxiliary_images(model: LinearModel, codes, k: int) -> AuxiliaryImagePair:
    """Translation-free auxiliary images of block ``k``: a_t(x, y) = w[k, t, label_t(x, y)]."""
    _check_scheme(model, codes)
    wk = model.block_weights(k)
    out = []
    for t, raster in enumerate(_label_rasters(codes)):
        a = wk[t][raster]
        a[0, :] = a[-1, :] = 0.0
        a[:, 0] = a[:, -1] = 0.0
        out.append(a)
    return AuxiliaryImagePair(*out)


def build_auxiliary_images(model: LinearModel, codes, origin=(0, 0),
                           accumulate: bool = False) -> AuxiliaryImagePair:
    """Auxiliary images for the layout anchored at ``origin``.

    Each pixel inside a block rectangle's interior holds the weight of
    (block, sub-pattern, that pixel's label); all other pixels hold 0.
    Overlapping interiors raise ``LayoutNotGridded`` unless
    ``accumulate`` is set, in which case covering blocks' weights add up.
    """
    _check_scheme(model, codes)
    layout = model.layout
    if not accumulate and not layout.is_gridded():
        raise LayoutNotGridded("block interiors overlap; pass accumulate=True or use "
                               "block_auxiliary_images")
    rasters = _label_rasters(codes)
    shape = rasters[0].shape
    oy, ox = origin
    if oy < 0 or ox < 0 or oy + layout.window[0] > shape[0] or ox + layout.window[1] > shape[1]:
        raise OutOfBounds(f"window at {origin} leaves image of shape {shape}")
    aux = [np.zeros(shape, dtype=np.float64) for _ in rasters]
    for k, block in enumerate(layout.blocks):
        wk = model.block_weights(k)
        for r in block.rects:
            top, left, h, w = r.interior()
            sl = (slice(oy + top, oy + top + h), slice(ox + left, ox + left + w))
            for t, raster in enumerate(rasters):
                aux[t][sl] += wk[t][raster[sl]]
    return AuxiliaryImagePair(*aux)


def fast_window_score(integrals, layout: BlockLayout, origin, bias: float) -> float:
    """Window score from integral images of auxiliary images.

    ``integrals`` is either one tuple of integral images (one per
    sub-pattern) shared by all blocks, or a sequence with one such tuple
    per block. Each block rectangle costs 4 lookups per sub-pattern.
    """
    per_block = _per_block(integrals, layout)
    oy, ox = origin
    total = 0.0
    for block, iis in zip(layout.blocks, per_block):
        for r in block.rects:
            top, left, h, w = r.interior()
            for ii in iis:
                if oy + r.top < 0 or ox + r.left < 0 or oy + r.bottom > ii.shape[0] \
                        or ox + r.right > ii.shape[1]:
                    raise OutOfBounds(f"rect {r} at origin {origin} leaves the integral image")
                total += float(ii.rect_sum(oy + top, ox + left, h, w))
    return total + bias


def _per_block(integrals, layout: BlockLayout):
    if isinstance(integrals, IntegralImage):
        return [(integrals,)] * len(layout.blocks)
    integrals = list(integrals)
    if integrals and isinstance(integrals[0], IntegralImage):
        return [tuple(integrals)] * len(layout.blocks)
    if len(integrals) != len(layout.blocks):
        raise ValueError("need one integral tuple per block")
    return [tuple(x) for x in integrals]


def scan_integrals(model: LinearModel, codes) -> list[tuple[IntegralImage, ...]]:
    """Per-block integral images over a whole code raster."""
    return [block_auxiliary_images(model, codes, k).integrals()
            for k in range(len(model.layout.blocks))]


def lattice(shape, window, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column origins of every window on the stride lattice."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    rows = np.arange(0, shape[0] - window[0] + 1, stride)
    cols = np.arange(0, shape[1] - window[1] + 1, stride)
    return rows, cols


def codes_for(model: LinearModel, img):
    img = np.asarray(img)
    if model.layout.scheme == TCENTRIST:
        return utct_images(img)
    return ct_image(img)


def score_map(model: LinearModel, codes, stride: int = 1,
              counter: dict | None = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Fast scores of every lattice window; returns (rows, cols, scores[rows, cols]).

    Auxiliary and integral images are built one block at a time, so peak
    memory stays at one block's images.
    """
    layout = model.layout
    rasters = _label_rasters(codes)
    rows, cols = lattice(rasters[0].shape, layout.window, stride)
    scores = np.full((len(rows), len(cols)), model.bias, dtype=np.float64)
    if len(rows) == 0 or len(cols) == 0:
        return rows, cols, scores
    R, Cc = rows[:, None], cols[None, :]
    lookups = 0
    for k, block in enumerate(layout.blocks):
        for ii in block_auxiliary_images(model, codes, k).integrals():
            for r in block.rects:
                top, left, h, w = r.interior()
                scores += ii.rect_sum(R + top, Cc + left, h, w)
            lookups += ii.lookups
    if counter is not None:
        counter["lookups"] = counter.get("lookups", 0) + lookups
        counter["windows"] = counter.get("windows", 0) + scores.size
    return rows, cols, scores


def naive_score_map(model: LinearModel, codes, stride: int = 1):
    """Reference scorer: extract each window's feature vector, then dot product."""
    layout = model.layout
    rasters = _label_rasters(codes)
    rows, cols = lattice(rasters[0].shape, layout.window, stride)
    scores = np.empty((len(rows), len(cols)), dtype=np.float64)
    w = model.effective_weights()
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            if isinstance(codes, CodeImagePair):
                x = extract_tcentrist(codes, layout, (r, c))
            else:
                x = extract_centrist(codes, layout, (r, c))
            scores[i, j] = x @ w + model.bias
    return rows, cols, scores


def score_windows(model: LinearModel, windows: Sequence[np.ndarray]) -> np.ndarray:
    """Decision values of window-sized images."""
    from .features import extract

    X = np.array([extract(w, model.layout) for w in windows], dtype=np.float64)
    return X @ model.effective_weights() + model.bias
