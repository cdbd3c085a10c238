import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import ndimage

import oracles
from conftest import random_pixels
from mixhist.descriptor import (
    DEFAULT_SCHEME,
    FeatureVector,
    MixHistogram,
    QuantizationScheme,
    color_map,
    edge_orientation,
    extract,
    flatten,
    mix_histogram,
    orientation_map,
    quantize_color,
    quantize_orientation,
    rate_of_change,
    sobel_partials,
    structure_tensor,
)
from mixhist.errors import DimensionMismatch
from mixhist.imaging import RGBImage, rgb_to_hsv

schemes = st.builds(
    QuantizationScheme,
    st.integers(1, 16),
    st.integers(1, 6),
    st.integers(1, 6),
    st.integers(1, 8),
)


@st.composite
def tensors(draw):
    """Random (gxx, gyy, gxy) satisfying gxy^2 <= gxx*gyy."""
    gxx = draw(st.floats(0, 100))
    gyy = draw(st.floats(0, 100))
    rho = draw(st.floats(-1, 1))
    return gxx, gyy, rho * math.sqrt(gxx * gyy)


class TestScheme:
    def test_default(self):
        assert DEFAULT_SCHEME.n_c == 160
        assert DEFAULT_SCHEME.length == 640

    @pytest.mark.parametrize("nc", [72, 90, 160, 240])
    def test_presets(self, nc):
        assert QuantizationScheme.from_preset(nc, 3).n_c == nc

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            QuantizationScheme(0, 4, 4, 4)

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            QuantizationScheme.from_preset(100)


class TestQuantizeColor:
    def test_zero(self):
        assert quantize_color(0, 0, 0) == 0

    def test_midpoint(self):
        # qh=5, qs=2, qv=2 -> 5*16 + 2*4 + 2
        assert quantize_color(0.5, 0.5, 0.5) == 90

    def test_upper_clamp(self):
        assert quantize_color(math.nextafter(1.0, 0.0), 1.0, 1.0) == 159
        assert quantize_color(1.0, 1.0, 1.0) == 159

    @pytest.mark.parametrize("bad", [(-0.1, 0, 0), (0, 1.5, 0), (0, 0, float("nan"))])
    def test_out_of_range(self, bad):
        with pytest.raises(ValueError):
            quantize_color(*bad)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1), st.floats(0, 1), schemes)
    def test_matches_oracle(self, h, s, v, scheme):
        expected = oracles.color_bin(h, s, v, scheme.n_h, scheme.n_s, scheme.n_v)
        assert quantize_color(h, s, v, scheme) == expected
        assert 0 <= expected < scheme.n_c


class TestSobel:
    def test_constant(self):
        dx, dy = sobel_partials(np.full((5, 6), 0.3))
        assert not dx.any() and not dy.any()

    def test_vertical_step(self):
        plane = np.zeros((6, 6))
        plane[:, 3:] = 1.0
        dx, dy = sobel_partials(plane)
        assert dx[2, 2] == 4 and dx[2, 3] == 4
        assert dy[2, 2] == 0 and dy[2, 3] == 0
        assert dx[2, 0] == 0

    def test_horizontal_step(self):
        plane = np.zeros((6, 6))
        plane[3:, :] = 1.0
        dx, dy = sobel_partials(plane)
        assert dy[2, 2] == 4 and dy[3, 2] == 4
        assert dx[2, 2] == 0

    def test_matches_naive_loop_exactly(self, rng):
        plane = rng.random((7, 9))
        dx, dy = sobel_partials(plane)
        assert dx.tolist() == oracles.sobel(plane.tolist(), "x")
        assert dy.tolist() == oracles.sobel(plane.tolist(), "y")

    def test_matches_scipy(self, rng):
        plane = rng.random((12, 10))
        dx, dy = sobel_partials(plane)
        np.testing.assert_allclose(dx, ndimage.sobel(plane, axis=1, mode="nearest"), atol=1e-12)
        np.testing.assert_allclose(dy, ndimage.sobel(plane, axis=0, mode="nearest"), atol=1e-12)

    def test_too_small(self):
        with pytest.raises(ValueError):
            sobel_partials(np.zeros((2, 5)))


class TestStructureTensor:
    def test_flat(self):
        z = np.zeros((3, 3))
        g = structure_tensor(z, z, z, z, z, z)
        assert not (g.gxx.any() or g.gyy.any() or g.gxy.any())

    def test_value_only(self):
        z = np.zeros(1)
        g = structure_tensor(z, z, z, z, np.array([4.0]), z)
        assert (g.gxx[0], g.gyy[0], g.gxy[0]) == (16, 0, 0)

    def test_saturated_cauchy_schwarz(self):
        z, o = np.zeros(1), np.ones(1)
        g = structure_tensor(o, o, z, z, z, z)
        assert (g.gxx[0], g.gyy[0], g.gxy[0]) == (1, 1, 1)
        assert g.gxy[0] ** 2 == g.gxx[0] * g.gyy[0]

    def test_cauchy_schwarz(self, rng):
        parts = rng.normal(size=(6, 50, 50))
        g = structure_tensor(*parts)
        assert (g.gxx >= 0).all() and (g.gyy >= 0).all()
        assert (g.gxy**2 <= g.gxx * g.gyy * (1 + 1e-12)).all()

    def test_shape_mismatch(self):
        z = np.zeros((3, 3))
        with pytest.raises(DimensionMismatch):
            structure_tensor(z, z, z, z, z, np.zeros((3, 4)))


class TestEdgeOrientation:
    @pytest.mark.parametrize(
        "g, theta",
        [
            ((0, 0, 0), 0.0),
            ((16, 0, 0), 0.0),
            ((0, 16, 0), math.pi / 2),
            ((1, 1, 1), math.pi / 4),
            ((1, 1, -1), 3 * math.pi / 4),
        ],
    )
    def test_examples(self, g, theta):
        assert edge_orientation(*g) == pytest.approx(theta, abs=1e-15)

    def test_rate_values(self):
        assert rate_of_change(0.0, 16, 0, 0) == 4
        assert rate_of_change(math.pi / 2, 16, 0, 0) == pytest.approx(0, abs=1e-7)
        assert rate_of_change(math.pi / 4, 1, 1, 1) == pytest.approx(math.sqrt(2))
        assert rate_of_change(3 * math.pi / 4, 1, 1, 1) == pytest.approx(0, abs=1e-7)

    def test_isotropic_is_zero(self):
        assert edge_orientation(5.0, 5.0, 0.0) == 0.0

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            edge_orientation(-1.0, 0.0, 0.0)

    @settings(max_examples=300, deadline=None)
    @given(tensors())
    def test_maximizes_rate(self, g):
        theta = edge_orientation(*g)
        assert 0.0 <= theta < math.pi
        grid = np.linspace(0, math.pi, 2000, endpoint=False)
        assert rate_of_change(theta, *g) >= rate_of_change(grid, *g).max() - 1e-6

    @settings(max_examples=300, deadline=None)
    @given(tensors())
    def test_orthogonal_pair_trace(self, g):
        theta = edge_orientation(*g)
        f_max = rate_of_change(theta, *g)
        f_min = rate_of_change(theta + math.pi / 2, *g)
        assert f_max**2 + f_min**2 == pytest.approx(g[0] + g[1], abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(tensors(), st.floats(0.01, 100))
    def test_scale_invariant(self, g, scale):
        # unnormalized Sobel: a global factor on the partials scales g by c^2
        assume(abs(g[0] - g[1]) + abs(g[2]) > 1e-6)
        c2 = scale * scale
        a = edge_orientation(*g)
        b = edge_orientation(g[0] * c2, g[1] * c2, g[2] * c2)
        diff = abs(a - b)
        assert min(diff, math.pi - diff) < 1e-6

    def test_vectorized_matches_scalar(self, rng):
        gxx, gyy = rng.random(500) * 10, rng.random(500) * 10
        gxy = (rng.random(500) * 2 - 1) * np.sqrt(gxx * gyy)
        vec = edge_orientation(gxx, gyy, gxy)
        ref = [oracles.orientation(*t) for t in zip(gxx.tolist(), gyy.tolist(), gxy.tolist())]
        np.testing.assert_allclose(vec, ref, atol=1e-12)


class TestQuantizeOrientation:
    def test_examples(self):
        assert quantize_orientation(0.0, 4) == 0
        assert quantize_orientation(math.pi / 2, 4) == 2
        assert quantize_orientation(math.nextafter(math.pi, 0), 4) == 3

    @given(st.floats(0, math.pi, exclude_max=True))
    def test_single_bin(self, theta):
        assert quantize_orientation(theta, 1) == 0

    @pytest.mark.parametrize("theta", [-0.1, math.pi, 4.0])
    def test_out_of_range(self, theta):
        with pytest.raises(ValueError):
            quantize_orientation(theta, 4)


class TestMixHistogram:
    def test_single_cell(self):
        s = QuantizationScheme(10, 4, 4, 4)
        mh = mix_histogram(np.full((4, 4), 5), np.full((4, 4), 2), s)
        expected = np.zeros((4, 160))
        expected[2, 5] = 1.0
        np.testing.assert_array_equal(mh.values, expected)

    def test_four_quarters(self):
        s = QuantizationScheme(2, 1, 1, 2)
        orients = np.array([[0, 0], [1, 1]])
        colors = np.array([[0, 1], [0, 1]])
        mh = mix_histogram(colors, orients, s)
        np.testing.assert_array_equal(mh.values, np.full((2, 2), 0.25))

    def test_nq1_is_color_histogram(self, rng):
        s = QuantizationScheme(10, 4, 4, 1)
        colors = rng.integers(0, 160, size=(9, 11))
        mh = mix_histogram(colors, np.zeros_like(colors), s)
        expected = np.bincount(colors.ravel(), minlength=160) / colors.size
        np.testing.assert_array_equal(mh.values[0], expected)

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mix_histogram(np.zeros((3, 3), int), np.zeros((3, 4), int))

    def test_bins_out_of_range(self):
        with pytest.raises(ValueError):
            mix_histogram(np.full((3, 3), 160), np.zeros((3, 3), int))


class TestFlatten:
    def test_row_major(self):
        vals = np.zeros((2, 3))
        vals[1, 2] = 1.0
        fv = flatten(MixHistogram(vals))
        assert len(fv) == 6 and fv.values[5] == 1.0

    def test_default_length(self):
        fv = flatten(MixHistogram(np.full((4, 160), 1 / 640)), DEFAULT_SCHEME)
        assert len(fv) == 640
        assert fv.scheme == DEFAULT_SCHEME

    def test_nq1(self):
        fv = flatten(MixHistogram(np.full((1, 160), 1 / 160)))
        assert len(fv) == 160

    def test_scheme_mismatch(self):
        with pytest.raises(DimensionMismatch):
            flatten(MixHistogram(np.zeros((2, 3))), DEFAULT_SCHEME)

    def test_feature_vector_checks_length(self):
        with pytest.raises(DimensionMismatch):
            FeatureVector(np.zeros(10), DEFAULT_SCHEME)


class TestExtract:
    def test_constant_image(self):
        img = RGBImage.from_array(np.full((9, 7, 3), (200, 40, 90), dtype=np.uint8))
        for scheme in (DEFAULT_SCHEME, QuantizationScheme(8, 3, 3, 5)):
            vec = extract(img, scheme).values
            hsv = rgb_to_hsv(img)
            c = quantize_color(hsv.h[0, 0], hsv.s[0, 0], hsv.v[0, 0], scheme)
            assert np.flatnonzero(vec).tolist() == [c]  # orientation bin 0
            assert vec[c] == 1.0

    def test_nq1_matches_color_histogram(self, rng):
        px = random_pixels(rng, 12, 10)
        vec = extract(RGBImage(px), QuantizationScheme(10, 4, 4, 1)).values
        assert vec.tolist() == oracles.color_histogram(px.tolist(), 10, 4, 4)

    @settings(max_examples=15, deadline=None)
    @given(st.integers(0, 2**32 - 1), schemes)
    def test_matches_naive_pipeline(self, seed, scheme):
        px = random_pixels(np.random.default_rng(seed), 8, 8)
        vec = extract(RGBImage(px), scheme).values
        expected = oracles.mix_histogram(px.tolist(), scheme.n_h, scheme.n_s, scheme.n_v, scheme.n_q)
        assert vec.tolist() == expected

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(3, 24), st.integers(3, 24), schemes)
    def test_normalized(self, seed, rows, cols, scheme):
        px = random_pixels(np.random.default_rng(seed), rows, cols)
        vec = extract(RGBImage(px), scheme).values
        assert (vec >= 0).all()
        assert abs(vec.sum() - 1.0) <= 1e-9

    def test_deterministic(self, rng):
        px = random_pixels(rng, 30, 20)
        a = extract(RGBImage(px.copy())).values
        b = extract(RGBImage(px.copy())).values
        assert a.tobytes() == b.tobytes()

    def test_smooth_stripes_separate_by_orientation(self):
        from mixhist.synth import stripe_image

        vert = extract(RGBImage(stripe_image(18.0, 0.0, 0.3, 0.0, 32))).values.reshape(4, 160)
        horiz = extract(RGBImage(stripe_image(18.0, 90.0, 0.3, 0.0, 32))).values.reshape(4, 160)
        assert vert[0].sum() > 0.9
        assert horiz[2].sum() > 0.9


def _ramp(a, b, size=20):
    yy, xx = np.mgrid[0:size, 0:size]
    v = (a * xx + b * yy).astype(np.uint8)
    return np.repeat(v[..., None], 3, axis=2)


def _interior_mh(px, scheme):
    hsv = rgb_to_hsv(RGBImage(px))
    colors = color_map(hsv, scheme)[1:-1, 1:-1]
    orients = orientation_map(hsv, scheme.n_q)[1:-1, 1:-1]
    return mix_histogram(colors, orients, scheme).values


class TestRotation:
    @settings(max_examples=60, deadline=None)
    @given(st.integers(-6, 6), st.integers(-6, 6))
    def test_quarter_turn_rolls_orientation_rows(self, a, b):
        assume(a or b)
        theta = math.atan2(b, a) % math.pi
        # keep the gradient direction clear of the n_q=4 bin edges
        assume(min(abs(theta - k * math.pi / 4) for k in range(5)) > 1e-3)
        offset = 6 * 19
        yy, xx = np.mgrid[0:20, 0:20]
        v = a * xx + b * yy + offset
        px = np.repeat(v[..., None], 3, axis=2).astype(np.uint8)
        scheme = QuantizationScheme(10, 4, 4, 4)
        before = _interior_mh(px, scheme)
        after = _interior_mh(np.ascontiguousarray(np.rot90(px)), scheme)
        np.testing.assert_array_equal(after, np.roll(before, 2, axis=0))
