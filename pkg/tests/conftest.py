import numpy as np
import pytest
from PIL import Image

from mixhist.synth import generate_corpus


def random_pixels(rng, rows, cols):
    return rng.integers(0, 256, size=(rows, cols, 3), dtype=np.uint8)


def write_png(path, pixels):
    Image.fromarray(np.asarray(pixels, dtype=np.uint8)).save(path, format="PNG")
    return path


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    """4 categories (2 hues x 2 stripe orientations), 25 images each, seed 42."""
    out = tmp_path_factory.mktemp("synth")
    entries = generate_corpus(out, categories=4, per_category=25, seed=42)
    return out, entries


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
