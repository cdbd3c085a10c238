"""Synthetic striped-image corpus for end-to-end runs without external data.

A category is a (hue, stripe orientation) pair. Images are sinusoidal
brightness gratings at a fixed hue and saturation, with per-image random
phase and brightness offset. Two categories sharing a hue have the same
color distribution, so only a descriptor that also sees edge orientation
can tell them apart.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from PIL import Image

from .index import ManifestEntry, write_manifest

# hue in degrees, centred in a 10-bin hue quantizer cell
HUES = (
    ("red", 18.0),
    ("blue", 234.0),
    ("green", 126.0),
    ("yellow", 54.0),
    ("purple", 270.0),
    ("cyan", 198.0),
)

# direction of brightness variation, degrees from the +x axis (y points down)
STRIPES = (
    ("vertical", 0.0),
    ("horizontal", 90.0),
    ("diagonal", 60.0),
    ("antidiagonal", 150.0),
)

PERIOD = 8.0
SATURATION = 0.75
BASE_VALUE = 0.68
AMPLITUDE = 0.22
BRIGHTNESS_JITTER = 0.08


def category_grid(n_categories: int) -> list[tuple[str, float, str, float]]:
    """(hue name, hue deg, stripe name, stripe deg) for each category, hue-major."""
    if n_categories < 1:
        raise ValueError("need at least one category")
    n_stripes = min(len(STRIPES), max(2, math.ceil(math.sqrt(n_categories))))
    n_hues = math.ceil(n_categories / n_stripes)
    if n_hues > len(HUES):
        raise ValueError(f"at most {len(HUES) * len(STRIPES)} categories are available")
    combos = [(h, hd, s, sd) for h, hd in HUES[:n_hues] for s, sd in STRIPES[:n_stripes]]
    return combos[:n_categories]


def hsv_to_rgb8(h, s, v) -> np.ndarray:
    """Vectorized hexcone HSV (all in [0, 1]) -> uint8 RGB."""
    h = np.asarray(h, dtype=np.float64)
    s = np.broadcast_to(np.asarray(s, dtype=np.float64), h.shape)
    v = np.broadcast_to(np.asarray(v, dtype=np.float64), h.shape)
    i = np.floor(h * 6.0)
    f = h * 6.0 - i
    p = v * (1.0 - s)
    q = v * (1.0 - s * f)
    t = v * (1.0 - s * (1.0 - f))
    i = i.astype(np.int64) % 6
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)


def stripe_image(
    hue_deg: float, stripe_deg: float, phase: float, brightness: float, size: int = 64
) -> np.ndarray:
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    a = math.radians(stripe_deg)
    t = xx * math.cos(a) + yy * math.sin(a)
    v = np.clip(BASE_VALUE + brightness + AMPLITUDE * np.sin(2 * math.pi * t / PERIOD + phase), 0.0, 1.0)
    return hsv_to_rgb8(np.full_like(v, hue_deg / 360.0), SATURATION, v)


def generate_corpus(
    out_dir, categories: int = 4, per_category: int = 25, seed: int = 42, size: int = 64
) -> list[ManifestEntry]:
    """Write PNGs under ``out_dir/<category>/`` plus ``out_dir/manifest.csv``."""
    if per_category < 1:
        raise ValueError("per_category must be >= 1")
    out = Path(out_dir)
    rng = np.random.Generator(np.random.PCG64(seed))
    entries = []
    for hue, hue_deg, stripe, stripe_deg in category_grid(categories):
        cat = f"{hue}-{stripe}"
        (out / cat).mkdir(parents=True, exist_ok=True)
        for k in range(per_category):
            phase = rng.uniform(0.0, 2 * math.pi)
            brightness = rng.uniform(-BRIGHTNESS_JITTER, BRIGHTNESS_JITTER)
            pixels = stripe_image(hue_deg, stripe_deg, phase, brightness, size)
            image_id = f"{cat}-{k:03d}"
            path = out / cat / f"{image_id}.png"
            Image.fromarray(pixels).save(path, format="PNG")
            entries.append(ManifestEntry(image_id, str(path), cat))
    write_manifest(out / "manifest.csv", entries, relative_to=out)
    return entries
