"""Multi-scale sliding-window detection."""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .classifier import LinearModel, codes_for, naive_score_map, score_map
from .errors import WindowTooLarge

DEFAULT_FACTOR = 2 ** (1 / 8)


@dataclass(frozen=True)
class PyramidConfig:
    factor: float = DEFAULT_FACTOR
    min_level: int = 0
    max_level: int | None = None

    def __post_init__(self):
        if not self.factor > 1:
            raise ValueError("pyramid factor must be > 1")


@dataclass(frozen=True)
class Detection:
    left: int
    top: int
    width: int
    height: int
    score: float
    level: int

    def iou(self, other: "Detection") -> float:
        return box_iou((self.left, self.top, self.width, self.height),
                       (other.left, other.top, other.width, other.height))

    def to_dict(self) -> dict:
        return asdict(self)


def box_iou(a, b) -> float:
    """IoU of two (left, top, width, height) boxes."""
    ax, ay, aw, ah = a
    bx, by, bw, bh = b
    iw = min(ax + aw, bx + bw) - max(ax, bx)
    ih = min(ay + ah, by + bh) - max(ay, by)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    return inter / (aw * ah + bw * bh - inter)


def round_half_down(v: float) -> int:
    """Nearest integer, ties toward negative infinity."""
    return int(math.ceil(v - 0.5))


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-centred bilinear resampling to ``(out_h, out_w)``, rounded to uint8."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    if (out_h, out_w) == (h, w):
        return img.astype(np.uint8)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    dy = (ys - y0)[:, None]
    dx = (xs - x0)[None, :]
    top = img[y0][:, x0] * (1 - dx) + img[y0][:, x1] * dx
    bot = img[y1][:, x0] * (1 - dx) + img[y1][:, x1] * dx
    out = top * (1 - dy) + bot * dy
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def pyramid(img: np.ndarray, window: tuple[int, int], config: PyramidConfig = PyramidConfig()):
    """Yield ``(level, scale, level_image)`` for every level the window fits in."""
    img = np.asarray(img)
    h, w = img.shape
    k = config.min_level
    while config.max_level is None or k <= config.max_level:
        scale = config.factor ** k
        lh, lw = int(math.floor(h / scale)), int(math.floor(w / scale))
        if lh < window[0] or lw < window[1]:
            break
        yield k, scale, resize_bilinear(img, lh, lw)
        k += 1


def _threads() -> int:
    try:
        cap = int(os.environ.get("TCENSUS_THREADS", "0"))
    except ValueError:
        cap = 0
    n = os.cpu_count() or 1
    return max(1, min(cap, n) if cap > 0 else n)


def scan_scale(level_img: np.ndarray, model: LinearModel, stride: int = 4,
               threshold: float = 0.0, level: int = 0, scale: float = 1.0,
               naive: bool = False) -> list[Detection]:
    """Score every lattice origin of one pyramid level; keep scores above ``threshold``."""
    wh, ww = model.layout.window
    if level_img.shape[0] < wh or level_img.shape[1] < ww:
        raise WindowTooLarge(f"window {model.layout.window} exceeds level image {level_img.shape}")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    codes = codes_for(model, level_img)
    scorer = naive_score_map if naive else score_map
    rows, cols, scores = scorer(model, codes, stride)
    out = []
    bw, bh = round_half_down(ww * scale), round_half_down(wh * scale)
    for i, j in zip(*np.nonzero(scores > threshold)):
        out.append(Detection(
            left=round_half_down(cols[j] * scale), top=round_half_down(rows[i] * scale),
            width=bw, height=bh, score=float(scores[i, j]), level=level))
    return out


def _order_key(d: Detection):
    return (-d.score, d.level, d.top, d.left)


def nms(detections, overlap: float = 0.5) -> list[Detection]:
    """Greedy non-maximum suppression; ties in score break by (level, top, left)."""
    if not 0 <= overlap < 1:
        raise ValueError("overlap threshold must lie in [0, 1)")
    keep: list[Detection] = []
    for d in sorted(detections, key=_order_key):
        if all(d.iou(k) <= overlap for k in keep):
            keep.append(d)
    return keep


def detect(img, model: LinearModel, pyramid_config: PyramidConfig = PyramidConfig(),
           stride: int = 4, threshold: float = 0.0, overlap: float = 0.5,
           naive: bool = False) -> list[Detection]:
    levels = list(pyramid(img, model.layout.window, pyramid_config))

    def run(item):
        k, scale, level_img = item
        return scan_scale(level_img, model, stride, threshold, k, scale, naive)

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        found = [d for dets in pool.map(run, levels) for d in dets]
    return nms(found, overlap)


def detections_to_json(results: dict[str, list[Detection]]) -> str:
    doc = {"detections": [dict(image=name, **d.to_dict())
                          for name, dets in results.items() for d in dets]}
    return json.dumps(doc, sort_keys=True, indent=1)


def detections_to_lines(results: dict[str, list[Detection]]) -> str:
    lines = [f"{name} {d.left} {d.top} {d.width} {d.height} {d.score!r} {d.level}"
             for name, dets in results.items() for d in dets]
    return "".join(line + "\n" for line in lines)


def draw_boxes(img: np.ndarray, detections, value: int = 255) -> np.ndarray:
    """Copy of ``img`` with 1-pixel box outlines drawn at ``value``."""
    out = np.array(img, dtype=np.uint8, copy=True)
    h, w = out.shape
    for d in detections:
        t, l = max(d.top, 0), max(d.left, 0)
        b, r = min(d.top + d.height - 1, h - 1), min(d.left + d.width - 1, w - 1)
        if t > b or l > r:
            continue
        out[t, l:r + 1] = value
        out[b, l:r + 1] = value
        out[t:b + 1, l] = value
        out[t:b + 1, r] = value
    return out
