"""Image decoding and RGB -> HSV conversion.

Channels are normalized to [0, 1] so that hue, saturation and value weigh
equally when their derivatives are summed in the structure tensor.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImage, ImageNotFound, ImageTooSmall, UnsupportedFormat

MIN_SIZE = 3

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
_JPEG_MAGIC = b"\xff\xd8\xff"


@dataclass(frozen=True)
class RGBImage:
    """8-bit RGB raster, ``pixels`` has shape (height, width, 3)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = self.pixels
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"expected (H, W, 3) array, got shape {px.shape}")
        if px.dtype != np.uint8:
            raise ValueError(f"expected uint8 pixels, got {px.dtype}")
        if px.shape[0] < MIN_SIZE or px.shape[1] < MIN_SIZE:
            raise ImageTooSmall(f"image is {px.shape[1]}x{px.shape[0]}, need at least 3x3")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_array(cls, arr) -> "RGBImage":
        return cls(np.ascontiguousarray(arr, dtype=np.uint8))


@dataclass(frozen=True)
class HSVImage:
    h: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def height(self) -> int:
        return self.h.shape[0]

    @property
    def width(self) -> int:
        return self.h.shape[1]

    def planes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.h, self.s, self.v


def _sniff(path) -> str | None:
    with open(path, "rb") as fh:
        head = fh.read(8)
    if head.startswith(_PNG_MAGIC):
        return "PNG"
    if head.startswith(_JPEG_MAGIC):
        return "JPEG"
    return None


def load_image(path) -> RGBImage:
    """Decode a JPEG or PNG file into an 8-bit RGB raster.

    The format is detected from the file signature, not the extension.
    Alpha channels are dropped (not composited).
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ImageNotFound(f"no such image file: {path}")
    kind = _sniff(path)
    if kind is None:
        raise UnsupportedFormat(f"{path}: not a PNG or JPEG file")
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode != "RGB":
                im = im.convert("RGB")
            arr = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise CorruptImage(f"{path}: cannot decode {kind} data ({exc})") from exc
    return RGBImage.from_array(arr)


def rgb_to_hsv(img: RGBImage) -> HSVImage:
    """Hexcone RGB -> HSV with every channel in [0, 1].

    Hue is the angle divided by 360 degrees, so it lies in [0, 1). Achromatic
    pixels get hue 0 and black pixels get saturation 0. The arithmetic follows
    the same operation order as :func:`colorsys.rgb_to_hsv`, so results are
    bit-identical to it.
    """
    rgb = img.pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    maxc = rgb.max(axis=-1)
    minc = rgb.min(axis=-1)
    rangec = maxc - minc
    chroma = rangec > 0

    safe_range = np.where(chroma, rangec, 1.0)
    safe_max = np.where(chroma, maxc, 1.0)
    s = np.where(chroma, rangec / safe_max, 0.0)
    rc = (maxc - r) / safe_range
    gc = (maxc - g) / safe_range
    bc = (maxc - b) / safe_range

    h = np.where(
        r == maxc,
        bc - gc,
        np.where(g == maxc, 2.0 + rc - bc, 4.0 + gc - rc),
    )
    h = np.mod(h / 6.0, 1.0)
    h = np.where(chroma, h, 0.0)
    # np.mod can round a tiny negative up to exactly 1.0
    h[h >= 1.0] = 0.0
    return HSVImage(h=h, s=s, v=maxc)
