"""Run configuration, dataset manifests and training-window sampling."""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .detector import DEFAULT_FACTOR, resize_bilinear
from .errors import ConfigError, ImageTooSmall
from .features import TCENTRIST, BlockLayout, grid_layout
from .imagefile import load_image

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".pgm", ".png")


@dataclass
class RunConfig:
    window_width: int = 36
    window_height: int = 72
    block_size: int = 12
    block_stride: int = 6
    select_blocks: bool = False
    descriptor: str = TCENTRIST
    svm_c: float = 1.0
    seed: int = 0
    n_positives: int = 2000
    n_negatives: int = 5000
    hard_negative_cap: int = 5000
    mining_threshold: float = 0.0
    mirror: bool = True
    pyramid_factor: float = DEFAULT_FACTOR
    scan_stride: int = 4
    detect_threshold: float = 0.0
    nms_overlap: float = 0.5
    normalize: bool = False
    n_test_negatives: int = 1000

    def __post_init__(self):
        for f in ("window_width", "window_height", "block_size", "block_stride",
                  "scan_stride"):
            if int(getattr(self, f)) < 1:
                raise ConfigError(f"{f} must be positive")
        for f in ("n_positives", "n_negatives", "hard_negative_cap", "n_test_negatives"):
            if int(getattr(self, f)) < 0:
                raise ConfigError(f"{f} must be non-negative")
        if self.svm_c <= 0:
            raise ConfigError("svm_c must be positive")
        if self.pyramid_factor <= 1:
            raise ConfigError("pyramid_factor must be > 1")
        if not 0 <= self.nms_overlap < 1:
            raise ConfigError("nms_overlap must lie in [0, 1)")
        if self.descriptor not in ("tcentrist", "centrist"):
            raise ConfigError(f"unknown descriptor {self.descriptor!r}")
        if self.block_size > min(self.window_width, self.window_height):
            raise ConfigError("block_size exceeds the window")

    @property
    def window(self) -> tuple[int, int]:
        return self.window_height, self.window_width

    def layout(self, scheme: str | None = None) -> BlockLayout:
        b, s = self.block_size, self.block_stride
        return grid_layout(self.window, (b, b), (s, s), scheme or self.descriptor)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError, TypeError) as exc:
            raise ConfigError(f"cannot load config {path}: {exc}") from exc


@dataclass
class DatasetManifest:
    """Directory layout of a training/testing set.

    Relative directories resolve against ``root`` (which itself resolves
    against the manifest file's directory).
    """

    root: Path
    positives: str
    negatives: str
    test_positives: str | None = None
    test_negatives: str | None = None
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot load manifest {path}: {exc}") from exc
        root = Path(doc.get("root", "."))
        if not root.is_absolute():
            root = path.parent / root
        try:
            return cls(root=root, positives=doc["positives"], negatives=doc["negatives"],
                       test_positives=doc.get("test_positives"),
                       test_negatives=doc.get("test_negatives"),
                       seed=int(doc.get("seed", 0)))
        except KeyError as exc:
            raise ConfigError(f"manifest {path} lacks {exc}") from exc

    def dir(self, name: str) -> Path:
        sub = getattr(self, name)
        if sub is None:
            raise ConfigError(f"manifest has no {name} directory")
        return self.root / sub

    def files(self, name: str) -> list[Path]:
        d = self.dir(name)
        if not d.is_dir():
            raise ConfigError(f"{d} is not a directory")
        return sorted(p for p in d.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)

    def images(self, name: str) -> list[np.ndarray]:
        return [load_image(p) for p in self.files(name)]


def fit_window(img: np.ndarray, window: tuple[int, int]) -> np.ndarray:
    """Isotropically resize to cover ``window`` then center-crop."""
    wh, ww = window
    h, w = img.shape
    if (h, w) == (wh, ww):
        return np.asarray(img, dtype=np.uint8)
    s = max(wh / h, ww / w)
    rh, rw = max(wh, int(math.ceil(h * s - 1e-9))), max(ww, int(math.ceil(w * s - 1e-9)))
    resized = resize_bilinear(img, rh, rw)
    top, left = (rh - wh) // 2, (rw - ww) // 2
    return resized[top:top + wh, left:left + ww]


def positive_windows(images, window: tuple[int, int], mirror: bool = True,
                     limit: int | None = None) -> list[np.ndarray]:
    out = []
    for img in images:
        crop = fit_window(img, window)
        out.append(crop)
        if mirror:
            out.append(crop[:, ::-1].copy())
    if limit is not None:
        out = out[:limit]
    return out


def sample_negatives(images, count: int, window: tuple[int, int],
                     seed: int = 0) -> list[np.ndarray]:
    """Uniformly random windows, drawn round-robin across ``images``.

    Images smaller than the window are skipped with a warning.
    """
    if count <= 0:
        return []
    wh, ww = window
    usable = []
    for i, img in enumerate(images):
        if img.shape[0] < wh or img.shape[1] < ww:
            log.warning("negative image %d (%s) is smaller than the window; skipped",
                        i, img.shape)
            continue
        usable.append(img)
    if not usable:
        raise ImageTooSmall("no negative image is large enough for one window")
    rng = np.random.default_rng(seed)
    out = []
    for n in range(count):
        img = usable[n % len(usable)]
        top = int(rng.integers(0, img.shape[0] - wh + 1))
        left = int(rng.integers(0, img.shape[1] - ww + 1))
        out.append(np.array(img[top:top + wh, left:left + ww], dtype=np.uint8))
    return out
