"""Pixel-level census transforms.

Binary census codes (CT), ternary census codes (TCT) over consecutive
neighbour pairs, their split into two binary sub-patterns, and the
uniform-pattern labelling (UTCT) that maps each sub-pattern to one of
59 labels.

Images are plain 2-D ``uint8`` numpy arrays indexed ``[row, col]``.
Code rasters have the same shape as their source; the 1-pixel border is
undefined and held at 0.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ImageTooSmall

P = 8
HYBRID_LABEL = P * (P - 1) + 2  # 58
N_LABELS = HYBRID_LABEL + 1  # 59 bins per sub-pattern

# (drow, dcol) of p0..p7, clockwise from top-left.
RING = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))

# Census bits read left-to-right, top-to-bottom; the first neighbour is the MSB.
CT_SCAN = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))


def as_gray(img) -> np.ndarray:
    """Validate and return a read-only 2-D uint8 copy of ``img``."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D grayscale raster, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("intensities must lie in [0, 255]")
        if np.issubdtype(arr.dtype, np.floating) and not np.all(arr == np.round(arr)):
            raise ValueError("intensities must be integers")
    out = np.array(arr, dtype=np.uint8, copy=True)
    out.setflags(write=False)
    return out


def ct_code(window) -> int:
    w = np.asarray(window).reshape(3, 3)
    center = w[1, 1]
    code = 0
    for dr, dc in CT_SCAN:
        code = (code << 1) | int(center < w[1 + dr, 1 + dc])
    return code


def tct_code(window) -> tuple:
    """Ternary digits for the 8 consecutive ring pairs of a 3x3 window.

    Digit i compares the center with the pair (p_i, p_{i+1 mod 8}):
    -1 below the pair's min, +1 above its max, 0 otherwise.
    """
    w = np.asarray(window).reshape(3, 3).astype(np.int64)
    center = w[1, 1]
    ring = [w[1 + dr, 1 + dc] for dr, dc in RING]
    digits = []
    for i in range(P):
        a, b = ring[i], ring[(i + 1) % P]
        if center < min(a, b):
            digits.append(-1)
        elif center > max(a, b):
            digits.append(1)
        else:
            digits.append(0)
    return tuple(digits)


def decompose(digits) -> tuple[int, int]:
    """Split a ternary code into (positive, negative) 8-bit codes; bit i is digit i."""
    pos = neg = 0
    for i, d in enumerate(digits):
        if d == 1:
            pos |= 1 << i
        elif d == -1:
            neg |= 1 << i
    return pos, neg


def uniformity(bits: int) -> int:
    """Number of circular 0/1 transitions in an 8-bit code."""
    rotated = ((bits >> 1) | ((bits & 1) << (P - 1))) & 0xFF
    return bin((bits ^ rotated) & 0xFF).count("1")


def _build_lut() -> np.ndarray:
    lut = np.full(256, HYBRID_LABEL, dtype=np.uint8)
    label = 0
    for code in range(256):
        if uniformity(code) <= 2:
            lut[code] = label
            label += 1
    assert label == HYBRID_LABEL
    lut.setflags(write=False)
    return lut


UNIFORM_LUT = _build_lut()


def utct_label(bits: int, lut: np.ndarray = UNIFORM_LUT) -> int:
    return int(lut[bits & 0xFF])


@dataclass(frozen=True)
class CodeImagePair:
    """UTCT label images of the positive (i1) and negative (i2) sub-patterns."""

    i1: np.ndarray
    i2: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.i1.shape

    @property
    def valid(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[1:-1, 1:-1] = True
        return mask


def _check_size(img: np.ndarray) -> None:
    if img.ndim != 2 or img.shape[0] < 3 or img.shape[1] < 3:
        raise ImageTooSmall(f"image must be at least 3x3, got {img.shape}")


def _shifted(img: np.ndarray, dr: int, dc: int) -> np.ndarray:
    h, w = img.shape
    return img[1 + dr:h - 1 + dr, 1 + dc:w - 1 + dc]


def ct_image(img) -> np.ndarray:
    img = np.asarray(img)
    _check_size(img)
    center = _shifted(img, 0, 0)
    code = np.zeros(center.shape, dtype=np.uint8)
    for dr, dc in CT_SCAN:
        code = (code << 1) | (center < _shifted(img, dr, dc)).astype(np.uint8)
    out = np.zeros(img.shape, dtype=np.uint8)
    out[1:-1, 1:-1] = code
    return out


def subpattern_images(img) -> tuple[np.ndarray, np.ndarray]:
    """Raw 8-bit positive and negative sub-pattern codes per pixel (border 0)."""
    img = np.asarray(img)
    _check_size(img)
    center = _shifted(img, 0, 0)
    ring = [_shifted(img, dr, dc) for dr, dc in RING]
    pos = np.zeros(center.shape, dtype=np.uint8)
    neg = np.zeros(center.shape, dtype=np.uint8)
    for i in range(P):
        a, b = ring[i], ring[(i + 1) % P]
        pos |= (center > np.maximum(a, b)).astype(np.uint8) << i
        neg |= (center < np.minimum(a, b)).astype(np.uint8) << i
    out_pos = np.zeros(img.shape, dtype=np.uint8)
    out_neg = np.zeros(img.shape, dtype=np.uint8)
    out_pos[1:-1, 1:-1] = pos
    out_neg[1:-1, 1:-1] = neg
    return out_pos, out_neg


def utct_images(img) -> CodeImagePair:
    pos, neg = subpattern_images(img)
    i1 = UNIFORM_LUT[pos]
    i2 = UNIFORM_LUT[neg]
    # Border codes are 0, which the LUT maps to label 0; keep them at 0.
    return CodeImagePair(i1=i1, i2=i2)
