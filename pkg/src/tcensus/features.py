"""Block layouts and CENTRIST / T-CENTRIST histogram features.

A detection window is covered by M blocks. Each block is a union of up to
four disjoint rectangles; only the 1-pixel-inset interior of every
rectangle contributes to the block histogram, so a 12x12 rectangle counts
10x10 labels.
"""

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .census import N_LABELS, CodeImagePair
from .errors import ConfigError, InsufficientData, OutOfBounds

LAYOUT_VERSION = 1

TCENTRIST = "tcentrist"
CENTRIST = "centrist"
SCHEMES = {TCENTRIST: (N_LABELS, 2), CENTRIST: (256, 1)}

BASE = "Base"
EXTEND_UP = "ExtendUp"
EXTEND_DOWN = "ExtendDown"
EXTEND_LEFT = "ExtendLeft"
EXTEND_RIGHT = "ExtendRight"
# Also the tie-break order for block selection.
VARIANTS = (BASE, EXTEND_UP, EXTEND_DOWN, EXTEND_LEFT, EXTEND_RIGHT)


@dataclass(frozen=True, order=True)
class Rect:
    top: int
    left: int
    height: int
    width: int

    def __post_init__(self):
        if self.height < 3 or self.width < 3:
            raise ValueError(f"rect must be at least 3x3, got {self.height}x{self.width}")

    @property
    def bottom(self) -> int:
        return self.top + self.height

    @property
    def right(self) -> int:
        return self.left + self.width

    def interior(self) -> tuple[int, int, int, int]:
        """(top, left, height, width) of the 1-pixel-inset interior."""
        return self.top + 1, self.left + 1, self.height - 2, self.width - 2

    @property
    def interior_area(self) -> int:
        return (self.height - 2) * (self.width - 2)

    def shifted(self, dr: int, dc: int) -> "Rect":
        return Rect(self.top + dr, self.left + dc, self.height, self.width)

    def inside(self, height: int, width: int) -> bool:
        return self.top >= 0 and self.left >= 0 and self.bottom <= height and self.right <= width

    def to_list(self) -> list[int]:
        return [self.top, self.left, self.height, self.width]


@dataclass(frozen=True)
class BlockStructure:
    variant: str
    rects: tuple[Rect, ...]

    def __post_init__(self):
        if not 1 <= len(self.rects) <= 4:
            raise ValueError("a block is made of 1 to 4 rectangles")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        for i, a in enumerate(self.rects):
            for b in self.rects[i + 1:]:
                if _overlap(a, b):
                    raise ValueError("block rectangles must be disjoint")

    @property
    def interior_area(self) -> int:
        return sum(r.interior_area for r in self.rects)

    def inside(self, height: int, width: int) -> bool:
        return all(r.inside(height, width) for r in self.rects)


def _overlap(a: Rect, b: Rect) -> bool:
    return a.top < b.bottom and b.top < a.bottom and a.left < b.right and b.left < a.right


def extension_block(base: Rect, variant: str) -> BlockStructure:
    """Materialize ``variant`` around ``base``.

    Extensions append a strip of half the base height (or width) with the
    same cross extent on one side of the base rectangle.
    """
    eh, ew = base.height // 2, base.width // 2
    if variant == BASE:
        rects = (base,)
    elif variant == EXTEND_UP:
        rects = (Rect(base.top - eh, base.left, eh, base.width), base)
    elif variant == EXTEND_DOWN:
        rects = (base, Rect(base.bottom, base.left, eh, base.width))
    elif variant == EXTEND_LEFT:
        rects = (Rect(base.top, base.left - ew, base.height, ew), base)
    elif variant == EXTEND_RIGHT:
        rects = (base, Rect(base.top, base.right, base.height, ew))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return BlockStructure(variant, rects)


@dataclass(frozen=True)
class BlockLayout:
    """Ordered blocks over a ``(height, width)`` window plus a bin scheme."""

    window: tuple[int, int]
    blocks: tuple[BlockStructure, ...]
    scheme: str = TCENTRIST

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("layout needs at least one block")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown bin scheme {self.scheme!r}")
        h, w = self.window
        for b in self.blocks:
            if not b.inside(h, w):
                raise OutOfBounds(f"block {b} leaves the {h}x{w} window")

    @property
    def bins(self) -> int:
        return SCHEMES[self.scheme][0]

    @property
    def channels(self) -> int:
        return SCHEMES[self.scheme][1]

    @property
    def block_dim(self) -> int:
        return self.bins * self.channels

    @property
    def dim(self) -> int:
        return len(self.blocks) * self.block_dim

    @property
    def n_rects(self) -> int:
        return sum(len(b.rects) for b in self.blocks)

    def with_scheme(self, scheme: str) -> "BlockLayout":
        return BlockLayout(self.window, self.blocks, scheme)

    def is_gridded(self) -> bool:
        """True when no two block interiors share a pixel."""
        spans = [r.interior() for b in self.blocks for r in b.rects]
        for i, a in enumerate(spans):
            for b in spans[i + 1:]:
                if (a[0] < b[0] + b[2] and b[0] < a[0] + a[2]
                        and a[1] < b[1] + b[3] and b[1] < a[1] + a[3]):
                    return False
        return True

    def to_dict(self) -> dict:
        return {
            "version": LAYOUT_VERSION,
            "window": {"height": self.window[0], "width": self.window[1]},
            "scheme": self.scheme,
            "blocks": [
                {"variant": b.variant, "rects": [r.to_list() for r in b.rects]}
                for b in self.blocks
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "BlockLayout":
        if doc.get("version") != LAYOUT_VERSION:
            raise ConfigError(f"unsupported layout version {doc.get('version')!r}")
        blocks = tuple(
            BlockStructure(b["variant"], tuple(Rect(*r) for r in b["rects"]))
            for b in doc["blocks"]
        )
        window = (int(doc["window"]["height"]), int(doc["window"]["width"]))
        return cls(window, blocks, doc["scheme"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def grid_rects(window: tuple[int, int], block: tuple[int, int],
               stride: tuple[int, int]) -> list[Rect]:
    """Base rectangles on a regular grid, row-major."""
    wh, ww = window
    bh, bw = block
    sh, sw = stride
    if bh > wh or bw > ww:
        raise ConfigError(f"block {block} larger than window {window}")
    return [Rect(top, left, bh, bw)
            for top in range(0, wh - bh + 1, sh)
            for left in range(0, ww - bw + 1, sw)]


def grid_layout(window=(72, 36), block=(12, 12), stride=(6, 6),
                scheme: str = TCENTRIST) -> BlockLayout:
    blocks = tuple(BlockStructure(BASE, (r,)) for r in grid_rects(window, block, stride))
    return BlockLayout(tuple(window), blocks, scheme)


def _rect_labels(raster: np.ndarray, rect: Rect, origin: tuple[int, int]) -> np.ndarray:
    top, left, h, w = rect.interior()
    top += origin[0]
    left += origin[1]
    return raster[top:top + h, left:left + w]


def _check_fits(shape, structure: BlockStructure, origin) -> None:
    for r in structure.rects:
        if not r.shifted(*origin).inside(*shape):
            raise OutOfBounds(f"rect {r} at origin {origin} leaves image of shape {shape}")


def block_histogram(codes, structure: BlockStructure, origin=(0, 0)):
    """Histogram(s) of the labels inside ``structure`` placed at ``origin``.

    A ``CodeImagePair`` yields a pair of 59-bin histograms; a CT raster
    yields one 256-bin histogram.
    """
    origin = tuple(origin)
    if isinstance(codes, CodeImagePair):
        _check_fits(codes.shape, structure, origin)
        h1 = np.zeros(N_LABELS, dtype=np.int64)
        h2 = np.zeros(N_LABELS, dtype=np.int64)
        for r in structure.rects:
            h1 += np.bincount(_rect_labels(codes.i1, r, origin).ravel(), minlength=N_LABELS)
            h2 += np.bincount(_rect_labels(codes.i2, r, origin).ravel(), minlength=N_LABELS)
        return h1, h2
    raster = np.asarray(codes)
    _check_fits(raster.shape, structure, origin)
    hist = np.zeros(256, dtype=np.int64)
    for r in structure.rects:
        hist += np.bincount(_rect_labels(raster, r, origin).ravel(), minlength=256)
    return hist


def _check_window(shape, layout: BlockLayout, origin) -> None:
    top, left = origin
    if top < 0 or left < 0 or top + layout.window[0] > shape[0] or left + layout.window[1] > shape[1]:
        raise OutOfBounds(f"window {layout.window} at {origin} leaves image of shape {shape}")


def extract_tcentrist(codes: CodeImagePair, layout: BlockLayout, origin=(0, 0),
                      normalize: bool = False) -> np.ndarray:
    if layout.scheme != TCENTRIST:
        layout = layout.with_scheme(TCENTRIST)
    _check_window(codes.shape, layout, origin)
    out = np.empty(layout.dim, dtype=np.float64)
    for k, block in enumerate(layout.blocks):
        h1, h2 = block_histogram(codes, block, origin)
        base = k * 2 * N_LABELS
        out[base:base + N_LABELS] = h1
        out[base + N_LABELS:base + 2 * N_LABELS] = h2
        if normalize:
            out[base:base + 2 * N_LABELS] /= block.interior_area
    return out


def extract_centrist(ct: np.ndarray, layout: BlockLayout, origin=(0, 0),
                     normalize: bool = False) -> np.ndarray:
    if layout.scheme != CENTRIST:
        layout = layout.with_scheme(CENTRIST)
    _check_window(np.shape(ct), layout, origin)
    out = np.empty(layout.dim, dtype=np.float64)
    for k, block in enumerate(layout.blocks):
        out[k * 256:(k + 1) * 256] = block_histogram(ct, block, origin)
        if normalize:
            out[k * 256:(k + 1) * 256] /= block.interior_area
    return out


def extract(img, layout: BlockLayout, origin=(0, 0), normalize: bool = False) -> np.ndarray:
    """Feature vector of ``img`` under ``layout``'s bin scheme."""
    from .census import ct_image, utct_images

    if layout.scheme == TCENTRIST:
        return extract_tcentrist(utct_images(img), layout, origin, normalize)
    return extract_centrist(ct_image(img), layout, origin, normalize)


def normalization_scale(layout: BlockLayout) -> np.ndarray:
    """Per-coordinate divisor that L1-normalizes every block histogram."""
    return np.repeat([float(b.interior_area) for b in layout.blocks], layout.block_dim)


def stratified_split(labels: Sequence[int], holdout: float = 0.2,
                     seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic per-class split; returns (train_idx, holdout_idx)."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for cls in np.unique(labels):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(len(idx))]
        n_test = max(1, int(round(holdout * len(idx))))
        n_test = min(n_test, len(idx) - 1)
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(np.array(train, dtype=np.int64)), np.sort(np.array(test, dtype=np.int64))


def select_local_optimal_blocks(windows: Sequence[np.ndarray], labels: Sequence[int],
                                grid: Sequence[Rect], window: tuple[int, int],
                                candidates: Sequence[str] = VARIANTS,
                                scheme: str = TCENTRIST, C: float = 1.0,
                                seed: int = 0, holdout: float = 0.2,
                                report: list | None = None) -> BlockLayout:
    """Pick, per grid position, the extension structure with the best held-out accuracy.

    Each candidate gets its own linear SVM trained on that block's
    histogram alone. Ties go to the earliest variant in ``VARIANTS``.
    If ``report`` is given, one dict per position with every candidate's
    accuracy is appended to it.
    """
    from .census import ct_image, utct_images
    from .classifier import train_linear_svm

    labels = np.asarray(labels)
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2 or counts.min() < 2:
        raise InsufficientData("block selection needs at least 2 windows of each of 2 classes")
    order = [v for v in VARIANTS if v in candidates]
    if not order:
        raise ConfigError("no candidate structures given")
    if scheme == TCENTRIST:
        codes = [utct_images(w) for w in windows]
    else:
        codes = [ct_image(w) for w in windows]
    train_idx, test_idx = stratified_split(labels, holdout, seed)
    chosen = []
    for base in grid:
        accs = {}
        for variant in order:
            try:
                structure = extension_block(base, variant)
            except ValueError:
                continue
            if not structure.inside(*window):
                continue
            feats = np.array([np.concatenate(np.atleast_2d(block_histogram(c, structure)))
                              for c in codes], dtype=np.float64)
            model = train_linear_svm(feats[train_idx], labels[train_idx], C=C, seed=seed)
            pred = np.where(model.decision(feats[test_idx]) > 0, 1, -1)
            accs[variant] = float(np.mean(pred == np.where(labels[test_idx] > 0, 1, -1)))
        if not accs:
            raise ConfigError(f"no candidate structure fits at {base}")
        best = max(accs, key=lambda v: (accs[v], -order.index(v)))
        chosen.append(extension_block(base, best))
        if report is not None:
            report.append({"base": base.to_list(), "accuracy": accs, "selected": best})
    return BlockLayout(tuple(window), tuple(chosen), scheme)
