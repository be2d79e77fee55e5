import numpy as np
import pytest

from orthoshadow import colorspace, invariant
from orthoshadow.kernels import _tables


def reference_rgb_to_lab(r, g, b):
    """Independent scalar CIELAB reference following the sRGB/D65 standard."""

    def linear(c):
        c = c / 255.0
        return c / 12.92 if c <= 0.04045 else ((c + 0.055) / 1.055) ** 2.4

    def f(t):
        d = 6.0 / 29.0
        return t ** (1.0 / 3.0) if t > d**3 else t / (3 * d * d) + 4.0 / 29.0

    lin = np.array([linear(v) for v in (r, g, b)])
    xyz = _tables.RGB_TO_XYZ @ lin
    fx, fy, fz = (f(t) for t in xyz / _tables.WHITE_XYZ)
    return 116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)


class TestFromLog:
    def test_inverts_to_log_on_all_code_values(self):
        ramp = np.arange(256)
        img = np.stack([ramp, ramp[::-1], ramp * 7 % 256], -1).astype(np.uint8)
        img = img[None, :, :]
        back = colorspace.from_log(invariant.to_log(img))
        np.testing.assert_array_equal(back, img)

    def test_low_values_clamp_to_zero(self):
        out = colorspace.from_log(np.zeros((1, 1, 3)))
        np.testing.assert_array_equal(out, 0)

    def test_high_values_clamp_to_255(self):
        out = colorspace.from_log(np.full((1, 1, 3), 6.0))
        # exp(6) - 14 = 389.4 exceeds the 8-bit range
        assert np.exp(6.0) - 14.0 == pytest.approx(389.43, abs=0.01)
        np.testing.assert_array_equal(out, 255)


class TestRgbToLab:
    def test_white_is_neutral(self):
        lab = colorspace.rgb_to_lab(np.full((1, 1, 3), 255, np.uint8))
        L, a, b = lab[0, 0]
        assert L == pytest.approx(100.0, abs=1e-9)
        assert abs(a) < 0.01 and abs(b) < 0.01

    def test_black_is_zero(self):
        lab = colorspace.rgb_to_lab(np.zeros((1, 1, 3), np.uint8))
        np.testing.assert_allclose(lab[0, 0], 0.0, atol=1e-9)

    def test_primary_red_reference(self):
        lab = colorspace.rgb_to_lab(np.array([[[255, 0, 0]]], np.uint8))
        L, a, b = lab[0, 0]
        assert L == pytest.approx(53.2371, abs=5e-3)
        assert a == pytest.approx(80.0901, abs=5e-3)
        assert b == pytest.approx(67.2033, abs=5e-3)

    def test_matches_scalar_reference_on_random_sample(self, rng):
        triples = rng.integers(0, 256, (64, 3)).astype(np.uint8)
        lab = colorspace.rgb_to_lab(triples[None, :, :])[0]
        for triple, got in zip(triples, lab):
            expected = reference_rgb_to_lab(*(int(v) for v in triple))
            np.testing.assert_allclose(got, expected, atol=1e-9)

    def test_round_trip_sampled(self, rng):
        img = rng.integers(0, 256, (64, 64, 3)).astype(np.uint8)
        back = colorspace.lab_to_rgb(colorspace.rgb_to_lab(img))
        np.testing.assert_array_equal(back, img)

    def test_out_of_gamut_clamps(self):
        lab = np.array([[[50.0, 150.0, -150.0]]])
        out = colorspace.lab_to_rgb(lab)
        assert out.dtype == np.uint8  # and no error despite impossible color


class TestRecombine:
    def test_identity_pair(self, rng):
        img = rng.integers(0, 256, (16, 16, 3)).astype(np.uint8)
        out = colorspace.recombine(img, img)
        assert np.abs(out.astype(int) - img.astype(int)).max() <= 1

    def test_gray_chrominance_neutralizes(self, rng):
        lum = rng.integers(0, 256, (8, 8, 3)).astype(np.uint8)
        gray = np.full((8, 8, 3), 128, np.uint8)
        out = colorspace.recombine(lum, gray)
        lab = colorspace.rgb_to_lab(out)
        # chrominance comes from the gray image: a, b ~ 0 up to quantization
        assert np.abs(lab[..., 1:]).max() < 1.0
        lab_lum = colorspace.rgb_to_lab(lum)
        assert np.abs(lab[..., 0] - lab_lum[..., 0]).max() < 1.0

    def test_constant_color_composition(self):
        lum = np.full((4, 4, 3), 0, np.uint8)
        lum[:] = (40, 200, 90)
        chroma = np.full((4, 4, 3), 0, np.uint8)
        chroma[:] = (180, 60, 60)
        out = colorspace.recombine(lum, chroma)
        assert (out == out[0, 0]).all()
        merged = np.concatenate(
            [
                colorspace.rgb_to_lab(lum)[:1, :1, :1],
                colorspace.rgb_to_lab(chroma)[:1, :1, 1:],
            ],
            axis=2,
        )
        expected = colorspace.lab_to_rgb(merged)
        np.testing.assert_array_equal(out[0, 0], expected[0, 0])

    def test_luminance_channel_idempotent(self, rng):
        lum = rng.integers(0, 256, (8, 8, 3)).astype(np.uint8)
        chroma = rng.integers(0, 256, (8, 8, 3)).astype(np.uint8)
        out = colorspace.recombine(lum, chroma)
        got_l = colorspace.rgb_to_lab(out)[..., 0]
        want_l = colorspace.rgb_to_lab(lum)[..., 0]
        # one quantization round trip of slack; gamut clamping can cost a
        # little more for extreme chroma/luminance combinations
        assert np.median(np.abs(got_l - want_l)) < 1.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError, match="shapes differ"):
            colorspace.recombine(
                np.zeros((2, 2, 3), np.uint8), np.zeros((2, 3, 3), np.uint8)
            )
