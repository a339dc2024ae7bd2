import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lowlight_forge.errors import ContractError, DomainError, FormatError
from lowlight_forge.image import (
    clamp01,
    dequantize,
    histogram,
    load_image,
    luma_plane,
    quantize,
    require_image,
    rgb_to_lab,
    save_image,
    value_plane,
)

unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


def unit_images(min_side=1, max_side=16):
    shapes = st.tuples(
        st.integers(min_side, max_side), st.integers(min_side, max_side)
    ).map(lambda hw: (hw[0], hw[1], 3))
    return hnp.arrays(np.float64, shapes, elements=unit_floats)


class TestQuantize:
    @given(unit_images())
    def test_roundtrip_is_idempotent(self, img):
        once = dequantize(quantize(img, 8))
        twice = dequantize(quantize(once, 8))
        assert np.array_equal(once, twice)

    @given(unit_images())
    def test_roundtrip_error_bounded_by_half_step(self, img):
        for depth, levels in ((8, 255), (16, 65535)):
            back = dequantize(quantize(img, depth))
            assert np.abs(back - img).max() <= 0.5 / levels + 1e-12

    def test_dtypes(self):
        img = np.full((2, 2, 3), 0.5)
        assert quantize(img, 8).dtype == np.uint8
        assert quantize(img, 16).dtype == np.uint16

    def test_exact_codes(self):
        img = np.array([[[0.0, 1.0, 127 / 255]]])
        assert quantize(img, 8).ravel().tolist() == [0, 255, 127]

    def test_rejects_other_depths(self):
        with pytest.raises(FormatError):
            quantize(np.zeros((1, 1, 3)), 12)


class TestRequireImage:
    def test_accepts_valid(self, random_image):
        require_image(random_image)

    def test_rejects_wrong_rank(self):
        with pytest.raises(ContractError):
            require_image(np.zeros((4, 4)))

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            require_image(np.full((2, 2, 3), 1.5))

    def test_rejects_nan(self):
        bad = np.zeros((2, 2, 3))
        bad[0, 0, 0] = np.nan
        with pytest.raises(DomainError):
            require_image(bad)


class TestFileRoundTrip:
    @pytest.mark.parametrize("depth", [8, 16])
    def test_png_preserves_codes(self, tmp_path, rng, depth):
        img = rng.random((20, 24, 3))
        path = tmp_path / "img.png"
        save_image(path, img, depth)
        back = load_image(path)
        levels = 2**depth - 1
        expected = np.rint(img * levels) / levels
        assert np.array_equal(back, expected)

    def test_grayscale_png_loads_as_three_channels(self, tmp_path):
        import cv2

        path = str(tmp_path / "gray.png")
        cv2.imwrite(path, np.arange(64, dtype=np.uint8).reshape(8, 8))
        img = load_image(path)
        assert img.shape == (8, 8, 3)
        assert np.array_equal(img[:, :, 0], img[:, :, 2])

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_image(tmp_path / "nope.png")

    def test_undecodable_raises_format_error(self, tmp_path):
        path = tmp_path / "junk.png"
        path.write_bytes(b"not a png at all")
        with pytest.raises(FormatError):
            load_image(path)


class TestPlanes:
    def test_value_plane_is_channel_max(self, random_image):
        assert np.array_equal(value_plane(random_image), random_image.max(axis=2))

    def test_luma_weights_sum_to_one(self):
        ones = np.ones((3, 3, 3))
        assert np.allclose(luma_plane(ones), 1.0)

    def test_luma_known_value(self):
        img = np.zeros((1, 1, 3))
        img[0, 0] = [1.0, 0.0, 0.0]
        assert luma_plane(img)[0, 0] == pytest.approx(0.299)

    def test_clamp01(self):
        arr = np.array([-0.5, 0.25, 1.5])
        assert clamp01(arr).tolist() == [0.0, 0.25, 1.0]


class TestHistogram:
    def test_counts_every_sample_once(self, rng):
        plane = rng.random((31, 17))
        counts = histogram(plane)
        assert counts.sum() == plane.size

    def test_extremes_fall_in_end_bins(self):
        plane = np.array([[0.0, 1.0]])
        counts = histogram(plane)
        assert counts[0] == 1 and counts[-1] == 1


class TestLab:
    def test_white_black_anchors(self):
        white = np.ones((1, 1, 3))
        black = np.zeros((1, 1, 3))
        lw = rgb_to_lab(white)[0, 0]
        lb = rgb_to_lab(black)[0, 0]
        assert lw[0] == pytest.approx(100.0, abs=1e-4)
        assert np.allclose(lw[1:], 0.0, atol=1e-3)
        assert np.allclose(lb, 0.0, atol=1e-6)

    def test_mid_gray_is_neutral(self):
        gray = np.full((1, 1, 3), 0.5)
        lab = rgb_to_lab(gray)[0, 0]
        assert np.allclose(lab[1:], 0.0, atol=1e-3)
        assert 50.0 < lab[0] < 60.0

    def test_primaries_have_expected_hue_signs(self):
        red = np.zeros((1, 1, 3))
        red[0, 0, 0] = 1.0
        blue = np.zeros((1, 1, 3))
        blue[0, 0, 2] = 1.0
        assert rgb_to_lab(red)[0, 0, 1] > 0
        assert rgb_to_lab(blue)[0, 0, 2] < 0
