"""Literal per-pixel reference implementations.

Deliberately slow and independent of the vectorized code paths: plain
Python loops, string-based bit handling, no shared lookup tables. Used by
the test suite and by ``tcensus selftest``.
"""

import numpy as np

_SCAN = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
_RING = [(-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1)]


def _uniform_codes() -> list[int]:
    codes = []
    for code in range(256):
        bits = [(code >> i) & 1 for i in range(8)]
        g = sum(abs(bits[i] - bits[(i + 1) % 8]) for i in range(8))
        if g <= 2:
            codes.append(code)
    return codes


UNIFORM_CODES = _uniform_codes()
_UNIFORM_INDEX = {code: n for n, code in enumerate(UNIFORM_CODES)}


def ct_pixel(img, r: int, c: int) -> int:
    center = int(img[r][c])
    bitstring = "".join("1" if center < int(img[r + dr][c + dc]) else "0" for dr, dc in _SCAN)
    return int(bitstring, 2)


def tct_pixel(img, r: int, c: int) -> list[int]:
    center = int(img[r][c])
    ring = [int(img[r + dr][c + dc]) for dr, dc in _RING]
    digits = []
    for i in range(8):
        pi, pj = ring[i], ring[(i + 1) % 8]
        if center < min(pi, pj):
            digits.append(-1)
        elif center > max(pi, pj):
            digits.append(1)
        else:
            digits.append(0)
    return digits


def utct_pixel(img, r: int, c: int) -> tuple[int, int]:
    digits = tct_pixel(img, r, c)
    labels = []
    for target in (1, -1):
        xi = [1 if d == target else 0 for d in digits]
        g = sum(abs(xi[i] - xi[(i + 1) % 8]) for i in range(8))
        if g <= 2:
            code = sum(2 ** i * xi[i] for i in range(8))
            labels.append(_UNIFORM_INDEX[code])
        else:
            labels.append(58)
    return labels[0], labels[1]


def ct_image(img) -> np.ndarray:
    h, w = np.shape(img)
    img = np.asarray(img).tolist()
    out = np.zeros((h, w), dtype=np.int64)
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            out[r, c] = ct_pixel(img, r, c)
    return out


def utct_images(img) -> tuple[np.ndarray, np.ndarray]:
    h, w = np.shape(img)
    img = np.asarray(img).tolist()
    i1 = np.zeros((h, w), dtype=np.int64)
    i2 = np.zeros((h, w), dtype=np.int64)
    for r in range(1, h - 1):
        for c in range(1, w - 1):
            i1[r, c], i2[r, c] = utct_pixel(img, r, c)
    return i1, i2


def block_counts(label_raster, rects, origin, bins: int) -> list[int]:
    """Label counts over the 1-pixel-inset interiors of ``rects`` (top, left, h, w)."""
    counts = [0] * bins
    oy, ox = origin
    for top, left, h, w in rects:
        for r in range(oy + top + 1, oy + top + h - 1):
            for c in range(ox + left + 1, ox + left + w - 1):
                counts[int(label_raster[r][c])] += 1
    return counts


def tcentrist_vector(i1, i2, blocks, origin) -> list[int]:
    """``blocks`` is a list of rect lists; I1 histogram then I2 histogram per block."""
    vec = []
    for rects in blocks:
        vec += block_counts(i1, rects, origin, 59)
        vec += block_counts(i2, rects, origin, 59)
    return vec


def centrist_vector(ct, blocks, origin) -> list[int]:
    vec = []
    for rects in blocks:
        vec += block_counts(ct, rects, origin, 256)
    return vec


def naive_window_score(weights, bias, features) -> float:
    return float(sum(float(w) * float(x) for w, x in zip(weights, features)) + bias)
