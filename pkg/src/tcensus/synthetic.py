"""Seeded synthetic pedestrian data.

Backgrounds are Gaussian noise fields whose smoothing scale is drawn per
image, so texture ranges from pixel-level grain to coarse blotches.
Positives carry a textured upright silhouette (head, torso, arms, legs);
negatives are bare noise fields. Scenes are larger noise fields with one
planted silhouette.
"""

import json
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter

from .imagefile import atomic_write, save_image

NOISE_AMPLITUDE = 15.0
MAX_SMOOTHING = 3.0
CONTRAST = (40.0, 80.0)
FILL_TEXTURE = 5.0


def noise_field(rng, shape) -> np.ndarray:
    n = rng.normal(0, 1, shape)
    s = rng.uniform(0, MAX_SMOOTHING)
    if s > 0.05:
        n = gaussian_filter(n, s)
    return rng.uniform(80, 170) + n * NOISE_AMPLITUDE / (n.std() + 1e-9)


def silhouette_mask(height: int = 72, width: int = 36, rng=None) -> np.ndarray:
    """Boolean upright-person mask, with small pose jitter when ``rng`` is given."""
    jitter = (lambda s: rng.uniform(-s, s)) if rng is not None else (lambda s: 0.0)
    y, x = np.mgrid[0:height, 0:width].astype(np.float64)
    sy, sx = height / 72.0, width / 36.0
    cx = width / 2 + jitter(1.0)
    head = ((y - (11 + jitter(1)) * sy) / (6 * sy)) ** 2 + ((x - cx) / (5 * sx)) ** 2 <= 1
    torso = (np.abs(x - cx) <= (7 + jitter(0.8)) * sx) & (y >= 17 * sy) & (y <= 44 * sy)
    arm_dx = (9.5 + jitter(0.8)) * sx
    arms = ((np.abs(np.abs(x - cx) - arm_dx) <= 2 * sx)
            & (y >= 19 * sy) & (y <= (40 + jitter(2)) * sy))
    leg_gap = (2 + jitter(0.7)) * sx
    legs = ((np.abs(x - cx) >= leg_gap) & (np.abs(x - cx) <= leg_gap + 5.5 * sx)
            & (y > 44 * sy) & (y <= (67 + jitter(2)) * sy))
    return head | torso | arms | legs


def _to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.round(img), 0, 255).astype(np.uint8)


def plant(canvas: np.ndarray, top: int, left: int, height: int, width: int, rng) -> None:
    """Paint a textured silhouette into float ``canvas`` in place."""
    mask = silhouette_mask(height, width, rng)
    region = canvas[top:top + height, left:left + width]
    sign = 1 if rng.random() < 0.5 else -1
    texture = gaussian_filter(rng.normal(0, 1, mask.shape), 1.0)
    texture *= FILL_TEXTURE / (texture.std() + 1e-9)
    region[mask] = region.mean() + sign * rng.uniform(*CONTRAST) + texture[mask]


def positive_window(rng, height: int = 72, width: int = 36) -> np.ndarray:
    img = noise_field(rng, (height, width))
    plant(img, 0, 0, height, width, rng)
    return _to_uint8(img)


def negative_image(rng, height: int = 120, width: int = 160) -> np.ndarray:
    return _to_uint8(noise_field(rng, (height, width)))


def scene(rng, height: int = 120, width: int = 160, box=None):
    """Noise scene with one planted silhouette; returns (image, (left, top, width, height))."""
    img = noise_field(rng, (height, width))
    if box is None:
        bw, bh = 36, 72
        top = int(rng.integers(0, height - bh + 1))
        left = int(rng.integers(0, width - bw + 1))
    else:
        left, top, bw, bh = box
    plant(img, top, left, bh, bw, rng)
    return _to_uint8(img), (left, top, bw, bh)


def make_dataset(seed: int = 0, n_pos: int = 200, n_neg_images: int = 40,
                 n_test_pos: int = 100, n_test_neg_images: int = 20,
                 window=(72, 36), neg_size=(120, 160)) -> dict:
    """Train/test split as lists of uint8 arrays."""
    rng = np.random.default_rng(seed)
    h, w = window
    return {
        "positives": [positive_window(rng, h, w) for _ in range(n_pos)],
        "negatives": [negative_image(rng, *neg_size) for _ in range(n_neg_images)],
        "test_positives": [positive_window(rng, h, w) for _ in range(n_test_pos)],
        "test_negatives": [negative_image(rng, *neg_size) for _ in range(n_test_neg_images)],
    }


def write_dataset(root, seed: int = 0, **kwargs) -> Path:
    """Write a synthetic dataset as PGM files plus ``manifest.json``; returns the manifest path."""
    root = Path(root)
    data = make_dataset(seed, **kwargs)
    for split, images in data.items():
        for n, img in enumerate(images):
            save_image(root / split / f"{n:05d}.pgm", img)
    manifest = {"root": ".", "positives": "positives", "negatives": "negatives",
                "test_positives": "test_positives", "test_negatives": "test_negatives",
                "seed": seed}
    path = root / "manifest.json"
    atomic_write(path, json.dumps(manifest, sort_keys=True, indent=1) + "\n")
    return path
