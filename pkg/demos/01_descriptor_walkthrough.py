"""
From pixels to a mix histogram
==============================

Walks one image through every stage of the descriptor: HSV conversion,
per-channel Sobel partials, the multi-channel structure tensor, the edge
orientation of each pixel, and finally the joint orientation/color
histogram.

Run with ``python demos/01_descriptor_walkthrough.py``.
"""

import numpy as np

from mixhist.descriptor import (
    DEFAULT_SCHEME,
    color_map,
    edge_orientation,
    extract,
    gradient_field,
    quantize_orientation,
)
from mixhist.imaging import RGBImage, rgb_to_hsv
from mixhist.synth import stripe_image

np.set_printoptions(precision=3, suppress=True)

###############################################################################
# A red image with horizontal stripes (brightness varies down the rows)
pixels = stripe_image(hue_deg=18.0, stripe_deg=90.0, phase=0.4, brightness=0.0, size=24)
img = RGBImage(pixels)
print("image:", img.width, "x", img.height)

###############################################################################
# HSV planes, all in [0, 1]
hsv = rgb_to_hsv(img)
print("hue range       ", hsv.h.min(), hsv.h.max())
print("saturation range", hsv.s.min(), hsv.s.max())
print("value, column 0 ", hsv.v[:8, 0])

###############################################################################
# Structure tensor: the stripes only change along y, so gxx ~ 0
g = gradient_field(hsv)
print("mean gxx, gyy, gxy:", g.gxx.mean(), g.gyy.mean(), g.gxy.mean())

###############################################################################
# Edge orientation maximizes the rate of change; here it is pi/2 almost everywhere
theta = edge_orientation(g.gxx, g.gyy, g.gxy)
orients = quantize_orientation(theta, DEFAULT_SCHEME.n_q)
print("orientation bin counts:", np.bincount(orients.ravel(), minlength=4))

###############################################################################
# Color bins in use
colors = color_map(hsv, DEFAULT_SCHEME)
print("color bins used:", np.unique(colors))

###############################################################################
# The 4 x 160 mix histogram, flattened to 640 values
vec = extract(img, DEFAULT_SCHEME).values
mh = vec.reshape(DEFAULT_SCHEME.n_q, DEFAULT_SCHEME.n_c)
print("feature length:", vec.size, " sum:", vec.sum())
print("mass per orientation row:", mh.sum(axis=1))
for i, j in zip(*np.nonzero(mh)):
    print(f"  orientation {i}, color {j:3d}: {mh[i, j]:.3f}")
