"""Mix histogram descriptor.

Every pixel gets a quantized HSV color and a quantized edge orientation. The
orientation comes from the multi-channel (Di Zenzo) gradient of the H, S and V
planes: per-channel Sobel partials are combined into a 2x2 structure tensor
``[[gxx, gxy], [gxy, gyy]]`` and the pixel's orientation is the direction along
which the rate of change ``F`` is largest. The joint (orientation, color)
frequencies, normalized by the pixel count and flattened row-major, form the
feature vector.

Conventions: ``x`` runs along columns (left to right), ``y`` along rows (top to
bottom); orientation bins and color bins are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .imaging import MIN_SIZE, HSVImage, RGBImage, rgb_to_hsv

# Color-bin count -> (n_h, n_s, n_v). Only 160 is given by the method; the
# other factorizations are our choice.
COLOR_PRESETS: dict[int, tuple[int, int, int]] = {
    72: (8, 3, 3),
    90: (10, 3, 3),
    160: (10, 4, 4),
    240: (15, 4, 4),
}


@dataclass(frozen=True)
class QuantizationScheme:
    n_h: int = 10
    n_s: int = 4
    n_v: int = 4
    n_q: int = 4

    def __post_init__(self):
        for name in ("n_h", "n_s", "n_v", "n_q"):
            val = getattr(self, name)
            if not isinstance(val, (int, np.integer)) or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val!r}")
            if val > 0xFFFF:
                raise ValueError(f"{name}={val} does not fit the database header")

    @property
    def n_c(self) -> int:
        return self.n_h * self.n_s * self.n_v

    @property
    def length(self) -> int:
        return self.n_q * self.n_c

    @classmethod
    def from_preset(cls, n_c: int, n_q: int = 4) -> "QuantizationScheme":
        try:
            n_h, n_s, n_v = COLOR_PRESETS[n_c]
        except KeyError:
            raise ValueError(
                f"no color preset for Nc={n_c}; known: {sorted(COLOR_PRESETS)}"
            ) from None
        return cls(n_h, n_s, n_v, n_q)

    def with_nq(self, n_q: int) -> "QuantizationScheme":
        return QuantizationScheme(self.n_h, self.n_s, self.n_v, n_q)


DEFAULT_SCHEME = QuantizationScheme()


@dataclass(frozen=True)
class GradientField:
    gxx: np.ndarray
    gyy: np.ndarray
    gxy: np.ndarray


@dataclass(frozen=True)
class MixHistogram:
    """``values[i, j]``: probability of orientation bin i together with color bin j."""

    values: np.ndarray

    @property
    def n_q(self) -> int:
        return self.values.shape[0]

    @property
    def n_c(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    scheme: QuantizationScheme

    def __post_init__(self):
        if self.values.shape != (self.scheme.length,):
            raise DimensionMismatch(
                f"vector length {self.values.shape} does not match scheme length {self.scheme.length}"
            )

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self) -> int:
        return self.values.shape[0]


# --- color -------------------------------------------------------------------


def _uniform_bin(x, n):
    return np.minimum(np.floor(x * n), n - 1).astype(np.int64)


def quantize_color(h, s, v, scheme: QuantizationScheme = DEFAULT_SCHEME):
    """Uniform HSV bin index ``qh*(n_s*n_v) + qs*n_v + qv``.

    Accepts scalars or equally shaped arrays. Values of exactly 1.0 fall into
    the last bin of their channel.
    """
    h, s, v = (np.asarray(c, dtype=np.float64) for c in (h, s, v))
    for name, arr in (("h", h), ("s", s), ("v", v)):
        if arr.size and not (np.all(arr >= 0.0) and np.all(arr <= 1.0)):
            raise ValueError(f"{name} values must lie in [0, 1]")
    qh = _uniform_bin(h, scheme.n_h)
    qs = _uniform_bin(s, scheme.n_s)
    qv = _uniform_bin(v, scheme.n_v)
    c = qh * (scheme.n_s * scheme.n_v) + qs * scheme.n_v + qv
    return int(c) if c.ndim == 0 else c


def color_map(hsv: HSVImage, scheme: QuantizationScheme = DEFAULT_SCHEME) -> np.ndarray:
    return quantize_color(hsv.h, hsv.s, hsv.v, scheme)


# --- gradient ----------------------------------------------------------------


def _weighted_line(a, b, c):
    return a + 2.0 * b + c


def sobel_partials(plane) -> tuple[np.ndarray, np.ndarray]:
    """Unnormalized 3x3 Sobel derivatives with replicate padding.

    Returns ``(dx, dy)``; a step from 0 (left) to 1 (right) gives ``dx = 4``
    on both sides of the step.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.shape[0] < MIN_SIZE or plane.shape[1] < MIN_SIZE:
        raise ValueError(f"sobel_partials needs a 2-D plane of at least 3x3, got {plane.shape}")
    p = np.pad(plane, 1, mode="edge")
    rows, cols = plane.shape
    n = {(i, j): p[i : i + rows, j : j + cols] for i in range(3) for j in range(3)}
    # (positive side) - (negative side): exactly zero on flat neighborhoods
    dx = _weighted_line(n[0, 2], n[1, 2], n[2, 2]) - _weighted_line(n[0, 0], n[1, 0], n[2, 0])
    dy = _weighted_line(n[2, 0], n[2, 1], n[2, 2]) - _weighted_line(n[0, 0], n[0, 1], n[0, 2])
    return dx, dy


def structure_tensor(dh_x, dh_y, ds_x, ds_y, dv_x, dv_y) -> GradientField:
    parts = [np.asarray(p, dtype=np.float64) for p in (dh_x, dh_y, ds_x, ds_y, dv_x, dv_y)]
    if len({p.shape for p in parts}) != 1:
        raise DimensionMismatch("all partial-derivative planes must share one shape")
    dh_x, dh_y, ds_x, ds_y, dv_x, dv_y = parts
    gxx = dh_x * dh_x + ds_x * ds_x + dv_x * dv_x
    gyy = dh_y * dh_y + ds_y * ds_y + dv_y * dv_y
    gxy = dh_x * dh_y + ds_x * ds_y + dv_x * dv_y
    return GradientField(gxx, gyy, gxy)


def gradient_field(hsv: HSVImage) -> GradientField:
    partials = []
    for plane in hsv.planes():
        partials.extend(sobel_partials(plane))
    return structure_tensor(*partials)


def rate_of_change(theta, gxx, gyy, gxy):
    """Directional rate of change ``F(theta)`` of the multi-channel image."""
    two_theta = 2.0 * np.asarray(theta, dtype=np.float64)
    f2 = 0.5 * ((gxx + gyy) + (gxx - gyy) * np.cos(two_theta) + 2.0 * gxy * np.sin(two_theta))
    return np.sqrt(np.maximum(f2, 0.0))


def edge_orientation(gxx, gyy, gxy):
    """Direction in [0, pi) of maximal rate of change.

    The two-argument arctangent yields one of an orthogonal pair of
    candidates; ``F`` is evaluated at both and the larger wins. If both are
    equal (isotropic or zero gradient) the orientation is 0.
    """
    gxx = np.asarray(gxx, dtype=np.float64)
    gyy = np.asarray(gyy, dtype=np.float64)
    gxy = np.asarray(gxy, dtype=np.float64)
    if np.any(gxx < 0) or np.any(gyy < 0):
        raise ValueError("gxx and gyy must be non-negative")

    theta0 = 0.5 * np.arctan2(2.0 * gxy, gxx - gyy)
    theta1 = theta0 + np.pi / 2
    f0 = rate_of_change(theta0, gxx, gyy, gxy)
    f1 = rate_of_change(theta1, gxx, gyy, gxy)

    theta = np.where(f1 > f0, theta1, theta0)
    theta = np.where(theta < 0.0, theta + np.pi, theta)
    theta = np.where(theta >= np.pi, theta - np.pi, theta)
    theta = np.where(f0 == f1, 0.0, theta)
    return float(theta) if theta.ndim == 0 else theta


def quantize_orientation(theta, n_q: int):
    theta = np.asarray(theta, dtype=np.float64)
    if n_q < 1:
        raise ValueError("n_q must be >= 1")
    if theta.size and not (np.all(theta >= 0.0) and np.all(theta < np.pi)):
        raise ValueError("orientation angles must lie in [0, pi)")
    q = np.minimum(np.floor(theta * n_q / np.pi), n_q - 1).astype(np.int64)
    return int(q) if q.ndim == 0 else q


def orientation_angles(hsv: HSVImage) -> np.ndarray:
    g = gradient_field(hsv)
    return edge_orientation(g.gxx, g.gyy, g.gxy)


def orientation_map(hsv: HSVImage, n_q: int) -> np.ndarray:
    return quantize_orientation(orientation_angles(hsv), n_q)


# --- histogram ---------------------------------------------------------------


def mix_histogram(colors, orients, scheme: QuantizationScheme = DEFAULT_SCHEME) -> MixHistogram:
    colors = np.asarray(colors)
    orients = np.asarray(orients)
    if colors.shape != orients.shape:
        raise DimensionMismatch(
            f"color map {colors.shape} and orientation map {orients.shape} differ in shape"
        )
    if colors.size == 0:
        raise DimensionMismatch("empty maps")
    if colors.min() < 0 or colors.max() >= scheme.n_c:
        raise ValueError(f"color bins must lie in [0, {scheme.n_c})")
    if orients.min() < 0 or orients.max() >= scheme.n_q:
        raise ValueError(f"orientation bins must lie in [0, {scheme.n_q})")
    joint = orients.ravel().astype(np.int64) * scheme.n_c + colors.ravel()
    counts = np.bincount(joint, minlength=scheme.length)
    values = counts / colors.size
    return MixHistogram(values.reshape(scheme.n_q, scheme.n_c))


def flatten(mh: MixHistogram, scheme: QuantizationScheme | None = None) -> FeatureVector:
    """Row-major flattening; row = orientation bin, column = color bin.

    ``scheme`` is needed only to recover the (n_h, n_s, n_v) split of the
    color axis; without it the color axis is recorded as ``n_h = n_c``.
    """
    if scheme is None:
        scheme = QuantizationScheme(mh.n_c, 1, 1, mh.n_q)
    elif (scheme.n_q, scheme.n_c) != mh.values.shape:
        raise DimensionMismatch(f"histogram shape {mh.values.shape} does not fit {scheme}")
    return FeatureVector(np.ascontiguousarray(mh.values, dtype=np.float64).ravel(), scheme)


def features_from_angles(hsv: HSVImage, theta: np.ndarray, scheme: QuantizationScheme) -> FeatureVector:
    """Build the feature vector from precomputed orientation angles.

    Angles do not depend on the scheme, so callers evaluating several
    schemes on one image compute them once.
    """
    colors = color_map(hsv, scheme)
    orients = quantize_orientation(theta, scheme.n_q)
    return flatten(mix_histogram(colors, orients, scheme), scheme)


def extract(img: RGBImage, scheme: QuantizationScheme = DEFAULT_SCHEME) -> FeatureVector:
    """Mix histogram feature vector of an RGB image."""
    hsv = rgb_to_hsv(img)
    return features_from_angles(hsv, orientation_angles(hsv), scheme)


def describe(pixels, scheme: QuantizationScheme = DEFAULT_SCHEME) -> np.ndarray:
    """Shortcut: uint8 (H, W, 3) array in, plain feature array out."""
    return extract(RGBImage.from_array(pixels), scheme).values


__all__ = [
    "COLOR_PRESETS",
    "DEFAULT_SCHEME",
    "FeatureVector",
    "GradientField",
    "MixHistogram",
    "QuantizationScheme",
    "color_map",
    "describe",
    "edge_orientation",
    "extract",
    "features_from_angles",
    "flatten",
    "gradient_field",
    "mix_histogram",
    "orientation_angles",
    "orientation_map",
    "quantize_color",
    "quantize_orientation",
    "rate_of_change",
    "sobel_partials",
    "structure_tensor",
]
