"""Log-to-RGB exponentiation, sRGB/CIELAB conversion, and recombination.

Colorimetry is fixed to sRGB primaries with D65 white and the 2 degree
observer; out-of-gamut results clamp per channel. The luminance of the
restored image and the chrominance of the invariant image are merged in
CIELAB.
"""

import numpy as np

from . import kernels


def _flat(arr, dtype):
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) raster, got shape {arr.shape}")
    return arr


def from_log(u):
    """8-bit image from a log raster: round(exp(u) - 14), clamped to [0, 255]."""
    u = _flat(u, np.float64)
    h, w = u.shape[:2]
    return kernels.active().exp_transform(u.reshape(-1, 3)).reshape(h, w, 3)


def rgb_to_lab(image):
    """8-bit sRGB image -> CIELAB float64 raster (L in [0, 100])."""
    image = _flat(image, np.uint8)
    h, w = image.shape[:2]
    return kernels.active().srgb_to_lab(image.reshape(-1, 3)).reshape(h, w, 3)


def lab_to_rgb(lab):
    """CIELAB raster -> 8-bit sRGB image, gamut-clamped per channel."""
    lab = _flat(lab, np.float64)
    h, w = lab.shape[:2]
    return kernels.active().lab_to_rgb(lab.reshape(-1, 3)).reshape(h, w, 3)


def recombine(luminance_rgb, chrominance_rgb):
    """Merge luminance of one image with chrominance of another in CIELAB.

    The output takes L from luminance_rgb and (a, b) from chrominance_rgb,
    then converts back to 8-bit sRGB.
    """
    if luminance_rgb.shape != chrominance_rgb.shape:
        raise ValueError(
            f"raster shapes differ: {luminance_rgb.shape} vs {chrominance_rgb.shape}"
        )
    lab_l = rgb_to_lab(luminance_rgb)
    lab_c = rgb_to_lab(chrominance_rgb)
    merged = np.empty_like(lab_l)
    merged[..., 0] = lab_l[..., 0]
    merged[..., 1] = lab_c[..., 1]
    merged[..., 2] = lab_c[..., 2]
    return lab_to_rgb(merged)
