"""Pure-numpy kernel backend.

Every function here has a twin with the same signature in numba_impl.
All kernels operate on flattened pixel arrays of shape (n, 3) (or (n,)
for scalar fields) and are elementwise, so processing any partition of
the rows yields bit-identical results. Channel sums are written out
explicitly so the evaluation order matches the numba loops.
"""

import numpy as np

from ._tables import (
    GAMMA,
    LAB_DELTA,
    LOG_OFFSET,
    RGB_TO_XYZ,
    SRGB_LINEAR_LUT,
    WHITE_XYZ,
    XYZ_TO_RGB,
)

NAME = "numpy"


def log_transform(v):
    """ln(v + 14) per channel; v is float64 (n, 3)."""
    return np.log(v + LOG_OFFSET)


def exp_transform(u):
    """Inverse of log_transform onto 8-bit: round(exp(u) - 14), clamped."""
    v = np.exp(u) - LOG_OFFSET
    return np.clip(np.rint(v), 0.0, 255.0).astype(np.uint8)


def _dot3(u, w):
    return u[:, 0] * w[0] + u[:, 1] * w[1] + u[:, 2] * w[2]


def _norm3(u):
    return np.sqrt(u[:, 0] ** 2 + u[:, 1] ** 2 + u[:, 2] ** 2)


def project_pixels(u, u0):
    """Split each log vector into (orthogonal part, coordinate along u0)."""
    alpha = _dot3(u, u0)
    up = u - alpha[:, None] * u0
    return up, alpha


def dot_rows(u, row):
    """Per-pixel dot product with a fixed 3-vector."""
    return _dot3(u, row)


def neutral_distance(u, u0):
    """Per-pixel || u/||u|| - u0 ||."""
    diff = u / _norm3(u)[:, None] - u0
    return _norm3(diff)


def masked_deviation_sum(u, u0, mask):
    """Sum of (u0 - u/||u||) over masked pixels, plus the count.

    numpy's pairwise reduction over the row-major masked selection is
    deterministic for a fixed input, matching the partition-independence
    contract of the numba twin's compensated sum.
    """
    sel = u[mask]
    if sel.shape[0] == 0:
        return np.zeros(3), 0
    dev = u0 - sel / _norm3(sel)[:, None]
    return dev.sum(axis=0), sel.shape[0]


def color_correct(up, dist, t, kappa):
    """Apply the radial-falloff color correction toward t.

    uc = ||up|| * (up/||up|| + falloff * t) with falloff = 1/(kappa*d^3 + 1);
    pixels with ||up|| below 1e-12 map to zero.
    """
    norm = _norm3(up)
    falloff = 1.0 / (kappa * dist**3 + 1.0)
    tiny = norm < 1e-12
    scale = np.where(tiny, 0.0, norm * falloff)
    uc = np.where(tiny[:, None], 0.0, up)
    return uc + scale[:, None] * t


def _mat3(v, m):
    out = np.empty_like(v)
    for c in range(3):
        out[:, c] = v[:, 0] * m[c, 0] + v[:, 1] * m[c, 1] + v[:, 2] * m[c, 2]
    return out


def srgb_to_lab(rgb):
    """8-bit sRGB (n, 3) -> CIELAB float64 (n, 3), D65 white."""
    lin = SRGB_LINEAR_LUT[rgb]
    ratio = _mat3(lin, RGB_TO_XYZ) / WHITE_XYZ
    f = np.where(
        ratio > LAB_DELTA**3,
        np.cbrt(ratio),
        ratio / (3.0 * LAB_DELTA**2) + 4.0 / 29.0,
    )
    out = np.empty_like(f)
    out[:, 0] = 116.0 * f[:, 1] - 16.0
    out[:, 1] = 500.0 * (f[:, 0] - f[:, 1])
    out[:, 2] = 200.0 * (f[:, 1] - f[:, 2])
    return out


def lab_to_rgb(lab):
    """CIELAB float64 (n, 3) -> 8-bit sRGB, out-of-gamut clamped per channel."""
    fy = (lab[:, 0] + 16.0) / 116.0
    f = np.empty_like(lab)
    f[:, 0] = fy + lab[:, 1] / 500.0
    f[:, 1] = fy
    f[:, 2] = fy - lab[:, 2] / 200.0
    xyz = np.where(f > LAB_DELTA, f**3, 3.0 * LAB_DELTA**2 * (f - 4.0 / 29.0))
    xyz *= WHITE_XYZ
    lin = _mat3(xyz, XYZ_TO_RGB)
    srgb = np.where(
        lin <= 0.0031308,
        12.92 * lin,
        1.055 * np.power(np.clip(lin, 0.0, None), 1.0 / GAMMA) - 0.055,
    )
    return np.clip(np.rint(srgb * 255.0), 0.0, 255.0).astype(np.uint8)


def apply_shadow(v, ramp, shift):
    """Attenuate (v + 14) by exp(-ramp * shift) per channel, minus 14.

    v is float64 (n, 3); ramp (n,) in [0, 1]; shift (3,) = ln(K)/2.4.
    Returns unclamped float64 so the lossless path stays exact.
    """
    return (v + LOG_OFFSET) * np.exp(-ramp[:, None] * shift) - LOG_OFFSET
