"""Content-based image retrieval with the mix histogram descriptor."""

from .descriptor import (
    COLOR_PRESETS,
    DEFAULT_SCHEME,
    FeatureVector,
    MixHistogram,
    QuantizationScheme,
    describe,
    extract,
)
from .evaluation import EvalConfig, EvalReport, pr_curve, run_benchmark, sample_queries, sweep
from .imaging import HSVImage, RGBImage, load_image, rgb_to_hsv
from .index import FeatureDB, ManifestEntry, build_index, load_db, read_manifest, save_db
from .query import RankedResult, distance, rank

__version__ = "0.1.0"
