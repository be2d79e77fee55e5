"""Numba-compiled kernel backend.

Explicit per-pixel loops compiled with @njit(nogil=True) so row bands can
run on worker threads. fastmath stays off: results must be IEEE-reproducible
and agree with the numpy backend to rounding.
"""

import math

import numpy as np
from numba import njit

from ._tables import (
    GAMMA,
    LAB_DELTA,
    LOG_OFFSET,
    RGB_TO_XYZ,
    SRGB_LINEAR_LUT,
    WHITE_XYZ,
    XYZ_TO_RGB,
)

NAME = "numba"

_FWD_BREAK = LAB_DELTA**3
_FWD_SLOPE = 1.0 / (3.0 * LAB_DELTA**2)
_INV_SLOPE = 3.0 * LAB_DELTA**2
_INV_GAMMA = 1.0 / GAMMA


@njit(cache=True, nogil=True)
def log_transform(v):
    n = v.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        for c in range(3):
            out[i, c] = math.log(v[i, c] + LOG_OFFSET)
    return out


@njit(cache=True, nogil=True)
def exp_transform(u):
    n = u.shape[0]
    out = np.empty((n, 3), np.uint8)
    for i in range(n):
        for c in range(3):
            v = np.rint(math.exp(u[i, c]) - LOG_OFFSET)
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            out[i, c] = np.uint8(v)
    return out


@njit(cache=True, nogil=True)
def project_pixels(u, u0):
    n = u.shape[0]
    up = np.empty((n, 3))
    alpha = np.empty(n)
    for i in range(n):
        a = u[i, 0] * u0[0] + u[i, 1] * u0[1] + u[i, 2] * u0[2]
        alpha[i] = a
        for c in range(3):
            up[i, c] = u[i, c] - a * u0[c]
    return up, alpha


@njit(cache=True, nogil=True)
def dot_rows(u, row):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        out[i] = u[i, 0] * row[0] + u[i, 1] * row[1] + u[i, 2] * row[2]
    return out


@njit(cache=True, nogil=True)
def neutral_distance(u, u0):
    n = u.shape[0]
    out = np.empty(n)
    for i in range(n):
        norm = math.sqrt(u[i, 0] ** 2 + u[i, 1] ** 2 + u[i, 2] ** 2)
        s = 0.0
        for c in range(3):
            d = u[i, c] / norm - u0[c]
            s += d * d
        out[i] = math.sqrt(s)
    return out


@njit(cache=True, nogil=True)
def masked_deviation_sum(u, u0, mask):
    # Compensated (Kahan) sum in row-major order: deterministic and
    # independent of how callers later partition per-pixel work.
    total = np.zeros(3)
    comp = np.zeros(3)
    count = 0
    for i in range(u.shape[0]):
        if not mask[i]:
            continue
        count += 1
        norm = math.sqrt(u[i, 0] ** 2 + u[i, 1] ** 2 + u[i, 2] ** 2)
        for c in range(3):
            term = (u0[c] - u[i, c] / norm) - comp[c]
            tmp = total[c] + term
            comp[c] = (tmp - total[c]) - term
            total[c] = tmp
    return total, count


@njit(cache=True, nogil=True)
def color_correct(up, dist, t, kappa):
    n = up.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        norm = math.sqrt(up[i, 0] ** 2 + up[i, 1] ** 2 + up[i, 2] ** 2)
        if norm < 1e-12:
            out[i, 0] = 0.0
            out[i, 1] = 0.0
            out[i, 2] = 0.0
            continue
        falloff = 1.0 / (kappa * dist[i] ** 3 + 1.0)
        scale = norm * falloff
        for c in range(3):
            out[i, c] = up[i, c] + scale * t[c]
    return out


@njit(cache=True, nogil=True)
def srgb_to_lab(rgb):
    n = rgb.shape[0]
    out = np.empty((n, 3))
    f = np.empty(3)
    for i in range(n):
        r = SRGB_LINEAR_LUT[rgb[i, 0]]
        g = SRGB_LINEAR_LUT[rgb[i, 1]]
        b = SRGB_LINEAR_LUT[rgb[i, 2]]
        for c in range(3):
            t = (
                RGB_TO_XYZ[c, 0] * r + RGB_TO_XYZ[c, 1] * g + RGB_TO_XYZ[c, 2] * b
            ) / WHITE_XYZ[c]
            if t > _FWD_BREAK:
                f[c] = np.cbrt(t)
            else:
                f[c] = t * _FWD_SLOPE + 4.0 / 29.0
        out[i, 0] = 116.0 * f[1] - 16.0
        out[i, 1] = 500.0 * (f[0] - f[1])
        out[i, 2] = 200.0 * (f[1] - f[2])
    return out


@njit(cache=True, nogil=True)
def lab_to_rgb(lab):
    n = lab.shape[0]
    out = np.empty((n, 3), np.uint8)
    f = np.empty(3)
    xyz = np.empty(3)
    for i in range(n):
        fy = (lab[i, 0] + 16.0) / 116.0
        f[0] = fy + lab[i, 1] / 500.0
        f[1] = fy
        f[2] = fy - lab[i, 2] / 200.0
        for c in range(3):
            if f[c] > LAB_DELTA:
                xyz[c] = f[c] ** 3 * WHITE_XYZ[c]
            else:
                xyz[c] = _INV_SLOPE * (f[c] - 4.0 / 29.0) * WHITE_XYZ[c]
        for c in range(3):
            lin = (
                XYZ_TO_RGB[c, 0] * xyz[0]
                + XYZ_TO_RGB[c, 1] * xyz[1]
                + XYZ_TO_RGB[c, 2] * xyz[2]
            )
            if lin <= 0.0031308:
                srgb = 12.92 * lin
            else:
                srgb = 1.055 * lin**_INV_GAMMA - 0.055
            v = np.rint(srgb * 255.0)
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            out[i, c] = np.uint8(v)
    return out


@njit(cache=True, nogil=True)
def apply_shadow(v, ramp, shift):
    n = v.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        for c in range(3):
            out[i, c] = (v[i, c] + LOG_OFFSET) * math.exp(
                -ramp[i] * shift[c]
            ) - LOG_OFFSET
    return out
