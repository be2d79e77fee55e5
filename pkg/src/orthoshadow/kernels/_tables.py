"""Constants shared by both kernel backends.

Both backends must read the exact same tables so their outputs agree to
floating-point rounding.
"""

import numpy as np

# Additive offset of the log transform: u = ln(v + 14).
LOG_OFFSET = 14.0

# Gamma exponent of the shadow attenuation model: shadowed value
# (v + 14) * K^(-1/GAMMA) - 14.
GAMMA = 2.4

# sRGB primaries -> XYZ (D65, 2 degree observer), IEC 61966-2-1.
RGB_TO_XYZ = np.array(
    [
        [0.41239079926595934, 0.357584339383878, 0.1804807884018343],
        [0.21263900587151027, 0.715168678767756, 0.07219231536073371],
        [0.01933081871559182, 0.11919477979462598, 0.9505321522496607],
    ]
)
XYZ_TO_RGB = np.linalg.inv(RGB_TO_XYZ)

# Reference white = XYZ of RGB (1,1,1); using the matrix row sums keeps the
# round trip self-consistent so pure white maps to L=100, a=b=0 exactly.
WHITE_XYZ = RGB_TO_XYZ.sum(axis=1)

# CIELAB f() breakpoint.
LAB_DELTA = 6.0 / 29.0

# 8-bit sRGB -> linear-light lookup (exact for every uint8 code value).
_codes = np.arange(256) / 255.0
SRGB_LINEAR_LUT = np.where(
    _codes <= 0.04045, _codes / 12.92, ((_codes + 0.055) / 1.055) ** 2.4
)
del _codes
