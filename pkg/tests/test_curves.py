import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from lowlight_forge.curves import (
    ToneCurve,
    apply_curve,
    curve_severity,
    dataset_curve_report,
    estimate_curve,
)
from lowlight_forge.errors import ContractError, DomainError


def gray(plane):
    return np.repeat(np.asarray(plane)[:, :, None], 3, axis=2)


def full_ramp(side=64):
    """Every 8-bit level occupied equally, as a grayscale image.

    side * side must be a multiple of 256 so no level gets truncated.
    """
    assert side * side % 256 == 0
    levels = np.arange(256).repeat(side * side // 256)
    return gray((levels / 255.0).reshape(side, side))


unit_floats = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestToneCurve:
    def test_rejects_wrong_length(self):
        with pytest.raises(ContractError):
            ToneCurve(np.linspace(0, 1, 100))

    def test_rejects_decreasing(self):
        lut = np.linspace(0, 1, 256)
        lut[100] = 0.9
        with pytest.raises(DomainError):
            ToneCurve(lut)

    def test_rejects_out_of_range(self):
        with pytest.raises(DomainError):
            ToneCurve(np.linspace(0, 1.5, 256))


class TestEstimateCurve:
    def test_identity_on_matching_ramps(self):
        img = full_ramp()
        curve = estimate_curve(img, img)
        ident = np.arange(256) / 255.0
        assert np.abs(curve.lut - ident).max() <= 1.0 / 255.0 + 1e-12
        assert not curve.degenerate

    def test_square_pair_recovers_square_root(self):
        ref = full_ramp()
        low = gray(ref[:, :, 0] ** 2)
        curve = estimate_curve(low, ref)
        codes = np.arange(256) / 255.0
        occupied = np.bincount(
            np.rint(low[:, :, 0].ravel() * 255).astype(int), minlength=256
        )
        # Code 0 aggregates a dozen source levels, so its match lands at the
        # top of that bucket rather than at sqrt(0); check from code 1 up.
        dense = occupied > 0
        dense[0] = False
        err = np.abs(curve.lut - np.sqrt(codes))[dense]
        assert err.max() <= 0.02

    @given(hnp.arrays(np.float64, (12, 12, 3), elements=unit_floats))
    def test_estimated_curve_is_monotone(self, low):
        rng = np.random.default_rng(0)
        ref = rng.random((12, 12, 3))
        curve = estimate_curve(low, ref)
        assert (np.diff(curve.lut) >= 0.0).all()
        assert curve.lut[0] >= 0.0 and curve.lut[-1] <= 1.0

    def test_constant_low_image_is_degenerate(self):
        low = np.full((16, 16, 3), 0.1)
        ref = full_ramp(16)
        curve = estimate_curve(low, ref)
        assert curve.degenerate
        assert curve.lut[0] == 0.0
        assert curve.lut[-1] == 1.0
        assert (np.diff(curve.lut) >= 0.0).all()

    def test_shapes_need_not_match(self):
        low = gray(np.linspace(0, 1, 64).reshape(8, 8))
        ref = full_ramp(16)
        curve = estimate_curve(low, ref)
        assert (np.diff(curve.lut) >= 0.0).all()


class TestApplyCurve:
    def test_identity_curve_is_identity(self, random_image):
        ident = ToneCurve(np.arange(256) / 255.0)
        out = apply_curve(random_image, ident)
        assert np.abs(out - random_image).max() < 1e-9

    def test_matching_brightens_dark_input(self):
        ref = full_ramp()
        low = gray(ref[:, :, 0] ** 2)
        curve = estimate_curve(low, ref)
        out = apply_curve(low, curve)
        assert out.mean() > low.mean()

    def test_preserves_hue_ratios(self):
        img = np.zeros((1, 1, 3))
        img[0, 0] = [0.4, 0.2, 0.1]
        curve = ToneCurve(np.minimum(np.arange(256) / 255.0 * 2.0, 1.0))
        out = apply_curve(img, curve)
        assert out[0, 0, 1] / out[0, 0, 0] == pytest.approx(0.5, abs=1e-9)
        assert out[0, 0, 2] / out[0, 0, 0] == pytest.approx(0.25, abs=1e-9)

    def test_output_clamped(self, random_image):
        steep = ToneCurve(np.minimum(np.arange(256) / 255.0 * 4.0, 1.0))
        out = apply_curve(random_image, steep)
        assert out.min() >= 0.0 and out.max() <= 1.0


class TestSeverity:
    def test_identity_is_one(self):
        assert curve_severity(ToneCurve(np.arange(256) / 255.0)) == pytest.approx(1.0)

    def test_square_curve_below_one(self):
        lut = (np.arange(256) / 255.0) ** 2
        assert curve_severity(ToneCurve(lut)) < 1.0

    def test_cube_root_curve_is_steep(self):
        lut = (np.arange(256) / 255.0) ** (1 / 3)
        assert curve_severity(ToneCurve(lut)) > 5.0

    def test_flat_lower_half_scores_zero(self):
        lut = np.concatenate([np.zeros(128), np.linspace(0.0, 1.0, 128)])
        assert curve_severity(ToneCurve(lut)) == pytest.approx(0.0)


class TestDatasetReport:
    def test_report_structure_and_json(self, tmp_path):
        ref = full_ramp(32)
        pairs = [(gray(ref[:, :, 0] ** g), ref) for g in (1.5, 2.0, 3.0)]
        out = tmp_path / "curves.json"
        report = dataset_curve_report(pairs, out=out, names=["a", "b", "c"])
        assert report["count"] == 3
        assert len(report["curves"]) == 3
        assert report["curves"][0]["name"] == "a"
        reloaded = json.loads(out.read_text())
        assert reloaded["count"] == 3

    def test_envelopes_are_ordered(self):
        ref = full_ramp(32)
        pairs = [(gray(ref[:, :, 0] ** g), ref) for g in (1.5, 2.5, 4.0)]
        report = dataset_curve_report(pairs)
        p10 = np.array(report["envelopes"]["p10"])
        p90 = np.array(report["envelopes"]["p90"])
        assert (p10 <= p90 + 1e-12).all()

    def test_severity_spread_widens_with_gamma(self):
        ref = full_ramp(32)
        pairs = [(gray(ref[:, :, 0] ** g), ref) for g in np.linspace(1.5, 5.0, 8)]
        report = dataset_curve_report(pairs)
        severities = sorted(c["severity"] for c in report["curves"])
        assert severities[-1] > 2.0 * severities[0]
