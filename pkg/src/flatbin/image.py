"""Grayscale/binary image containers, validation and PGM/PNG I/O.

Images are plain 2-D numpy arrays: gray images are ``float64`` with values in
[0, 1], binary images are ``uint8`` with values in {0, 1}.  Indexing is
row-major and 0-based.
"""
from __future__ import annotations

import os
import re
from typing import NamedTuple

import numpy as np
from sklearn.utils import check_array

__all__ = [
    "ImageFormatError",
    "Rect",
    "check_gray",
    "check_binary",
    "check_same_shape",
    "load_gray",
    "save_binary",
    "save_gray",
]


class ImageFormatError(ValueError):
    """Raised when an image file cannot be decoded."""


class Rect(NamedTuple):
    """Window with exclusive top-left ``(y0, x0)`` and inclusive bottom-right
    ``(y1, x1)`` corners, in the 1-based coordinates of a zero-bordered table.

    Row ``k`` of the table (1-based) is image row ``k - 1``; index 0 is the
    virtual zero border.  The covered image rows are ``y0 .. y1 - 1``
    (0-based), so the area is ``(y1 - y0) * (x1 - x0)``.
    """

    y0: int
    x0: int
    y1: int
    x1: int

    @property
    def area(self) -> int:
        return (self.y1 - self.y0) * (self.x1 - self.x0)

    def validate(self, shape) -> "Rect":
        rows, cols = shape
        if not (0 <= self.y0 < self.y1 <= rows and 0 <= self.x0 < self.x1 <= cols):
            raise ValueError(f"degenerate or out-of-bounds rectangle {tuple(self)} for shape {shape}")
        return self


def check_gray(img, name="img") -> np.ndarray:
    """Validate a grayscale image and return it as a float64 array."""
    arr = check_array(img, dtype=np.float64, ensure_2d=True, ensure_min_samples=1,
                      ensure_min_features=1, input_name=name)
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError(f"{name}: intensities must lie in [0, 1], got range "
                         f"[{arr.min():g}, {arr.max():g}]")
    return arr


def check_binary(img, name="img") -> np.ndarray:
    """Validate a binary mask and return it as a uint8 array of 0/1."""
    arr = np.asarray(img)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    arr = check_array(arr, dtype=None, ensure_2d=True, ensure_min_samples=1,
                      ensure_min_features=1, input_name=name)
    if not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name}: binary image values must be exactly 0 or 1")
    return arr.astype(np.uint8, copy=False)


def check_same_shape(a, b):
    if np.shape(a) != np.shape(b):
        raise ValueError(f"dimension mismatch: {np.shape(a)} vs {np.shape(b)}")


_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _read_pgm(data: bytes) -> np.ndarray:
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise ImageFormatError(f"magic: expected P2 or P5, got {magic!r}")
    pos = 2
    header = []
    for field in ("width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise ImageFormatError(f"{field}: missing from header")
        try:
            header.append(int(m.group(1)))
        except ValueError:
            raise ImageFormatError(f"{field}: not an integer: {m.group(1)!r}") from None
        pos = m.end()
    width, height, maxval = header
    if width < 1 or height < 1:
        raise ImageFormatError(f"width/height: must be positive, got {width}x{height}")
    if not 0 < maxval < 65536:
        raise ImageFormatError(f"maxval: must be in 1..65535, got {maxval}")
    count = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = count * dtype.itemsize
        raster = data[pos:pos + need]
        if len(raster) < need:
            raise ImageFormatError(f"raster: truncated, expected {need} bytes, got {len(raster)}")
        values = np.frombuffer(raster, dtype=dtype).astype(np.float64)
    else:
        tokens = data[pos:].split()
        if len(tokens) < count:
            raise ImageFormatError(f"raster: truncated, expected {count} values, got {len(tokens)}")
        try:
            values = np.array([int(t) for t in tokens[:count]], dtype=np.float64)
        except ValueError:
            raise ImageFormatError("raster: non-integer sample in plain PGM") from None
    if values.max(initial=0) > maxval:
        raise ImageFormatError(f"raster: sample exceeds maxval {maxval}")
    return (values / maxval).reshape(height, width)


def _read_png(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        if im.mode == "L":
            scale = 255.0
        elif im.mode in ("I;16", "I;16B", "I;16L", "I"):
            scale = 65535.0
        else:
            raise ImageFormatError(f"mode: PNG must be 8/16-bit grayscale, got {im.mode!r}")
        arr = np.asarray(im).astype(np.float64)
    return arr / scale


def load_gray(path) -> np.ndarray:
    """Read a P2/P5 PGM or grayscale PNG, normalized by its maxval to [0, 1]."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(b"\x89PNG"):
        return _read_png(path)
    with open(path, "rb") as fh:
        return _read_pgm(fh.read())


def _write_p5(path, raster: np.ndarray, maxval=255):
    rows, cols = raster.shape
    dtype = ">u2" if maxval > 255 else "u1"
    with open(os.fspath(path), "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n{maxval}\n".encode("ascii"))
        fh.write(raster.astype(dtype).tobytes())


def save_binary(img, path):
    """Write a binary mask as P5 PGM (1 -> 255, 0 -> 0)."""
    arr = check_binary(img)
    _write_p5(path, arr * 255)


def save_gray(img, path, maxval=255):
    """Write a grayscale image as P5 PGM, rounding values to multiples of
    ``1 / maxval``.  ``maxval=100`` stores 2-decimal intensities exactly."""
    if not 0 < maxval < 65536:
        raise ValueError(f"maxval must be in 1..65535, got {maxval}")
    arr = check_gray(img)
    _write_p5(path, np.rint(arr * maxval), maxval)
