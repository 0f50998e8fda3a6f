"""Grayscale image reading and writing (binary PGM and PNG)."""

import io
import os
import re
import tempfile
from pathlib import Path

import numpy as np

from .errors import DecodeError, UnsupportedFormat

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_PGM_HEADER = re.compile(rb"P5(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)"
                         rb"(?:\s+|#[^\n]*\n)+?(\d+)\s")


def luminance(rgb: np.ndarray) -> np.ndarray:
    """round(0.299 R + 0.587 G + 0.114 B) in exact integer arithmetic."""
    rgb = np.asarray(rgb, dtype=np.int64)
    y = (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2] + 500) // 1000
    return y.astype(np.uint8)


def decode_pgm(data: bytes) -> np.ndarray:
    m = _PGM_HEADER.match(data)
    if m is None:
        raise DecodeError("malformed PGM header")
    width, height, maxval = (int(g) for g in m.groups())
    if maxval > 255:
        raise UnsupportedFormat("16-bit PGM is not supported")
    if width < 1 or height < 1 or maxval < 1:
        raise DecodeError("invalid PGM dimensions")
    raster = data[m.end():m.end() + width * height]
    if len(raster) != width * height:
        raise DecodeError("truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy()


def decode_png(data: bytes) -> np.ndarray:
    from PIL import Image

    try:
        im = Image.open(io.BytesIO(data))
        im.load()
    except Exception as exc:  # Pillow raises a zoo of types
        raise DecodeError(f"cannot decode PNG: {exc}") from exc
    if im.mode in ("L", "1"):
        return np.asarray(im.convert("L"), dtype=np.uint8).copy()
    if im.mode in ("RGB", "RGBA", "P", "LA"):
        if im.mode == "LA":
            return np.asarray(im, dtype=np.uint8)[..., 0].copy()
        return luminance(np.asarray(im.convert("RGB")))
    raise UnsupportedFormat(f"PNG mode {im.mode} is not supported")


def load_image(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DecodeError(f"cannot read {path}: {exc}") from exc
    if data.startswith(b"P5"):
        return decode_pgm(data)
    if data.startswith(PNG_SIGNATURE):
        return decode_png(data)
    raise UnsupportedFormat(f"{path}: not a binary PGM or PNG file")


def encode_pgm(img: np.ndarray) -> bytes:
    img = np.asarray(img, dtype=np.uint8)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + img.tobytes()


def encode_png(img: np.ndarray) -> bytes:
    from PIL import Image

    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(img, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def atomic_write(path, data: bytes | str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode()
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_image(path, img: np.ndarray) -> None:
    path = Path(path)
    data = encode_png(img) if path.suffix.lower() == ".png" else encode_pgm(img)
    atomic_write(path, data)
