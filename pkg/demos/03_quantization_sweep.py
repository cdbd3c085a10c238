"""
Quantization sweep
==================

Benchmarks every combination of orientation bin count and color preset on
one shared query sample, producing a grid laid out like a results table
(rows: orientation bins, columns: color bins).

Color presets map the number of color bins to an HSV split:
72 = 8x3x3, 90 = 10x3x3, 160 = 10x4x4, 240 = 15x4x4.

On Corel-5k, with a manifest listing its 5000 images::

    mixhist sweep --manifest corel5k.csv --out sweep.csv
"""

import sys
import tempfile
from pathlib import Path

from mixhist.descriptor import COLOR_PRESETS
from mixhist.evaluation import EvalConfig, sweep
from mixhist.index import read_manifest
from mixhist.synth import generate_corpus

if len(sys.argv) > 1:
    entries = read_manifest(sys.argv[1])
else:
    out = Path(tempfile.mkdtemp(prefix="mixhist-sweep-")) / "corpus"
    generate_corpus(out, categories=8, per_category=20, seed=7)
    entries = read_manifest(out / "manifest.csv")

print("color presets:", COLOR_PRESETS)
result = sweep(entries, [1, 3, 4, 5], [72, 90, 160, 240], EvalConfig(rng_seed=42))
print(result.to_csv())
print("best cell (n_q, Nc):", result.best_cell())
