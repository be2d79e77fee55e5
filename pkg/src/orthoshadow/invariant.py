"""Pixel-wise log transform, grayscale invariants, and orthogonal decomposition.

The core model: a log-RGB pixel u = ln(v + 14) satisfies a rank-2 linear
system whose matrix depends only on the illumination parameters beta.
Changing illumination moves u along the system's one-dimensional null
direction u0, so the component of u orthogonal to u0 is an illumination
invariant. All image-level operations are per-pixel maps and return the
same bits for any partition of the raster.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError


def matrix(beta):
    """3x3 system matrix for the grayscale invariants."""
    b1, b2, b3 = beta
    return np.array(
        [
            [1.0, 1.0, -b1],
            [1.0, -b2, 1.0],
            [-b3, 1.0, 1.0],
        ]
    )


def free_solution(beta):
    """Normalized null vector of matrix(beta).

    Built from the closed form (b1*b2 - 1, 1 + b1, 1 + b2); callers must
    supply betas satisfying the rank-2 identity (residual <= 1e-9) or the
    third matrix row will not annihilate the result.
    """
    b1, b2, _ = beta
    raw = np.array([b1 * b2 - 1.0, 1.0 + b1, 1.0 + b2])
    norm = np.linalg.norm(raw)
    if norm == 0.0:
        raise DomainError("degenerate parameters: null vector has zero norm")
    return raw / norm


def _as_pixels(image):
    arr = np.asarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.float64)


def to_log(image):
    """Log image: per channel ln(v + 14), float64.

    Accepts 8-bit rasters or float arrays (the lossless simulation path).
    """
    v = _as_pixels(image)
    h, w = v.shape[:2]
    return kernels.active().log_transform(v.reshape(-1, 3)).reshape(h, w, 3)


def gray_invariant(u, beta, index):
    """One grayscale invariant of a single log vector.

    index selects which channel carries the -beta weight: 1 -> blue,
    2 -> green, 3 -> red.
    """
    if index not in (1, 2, 3):
        raise ValueError(f"index must be 1, 2 or 3, got {index}")
    row = matrix(beta)[index - 1]
    u = np.asarray(u, dtype=np.float64)
    return float(u @ row)


def gray_invariant_image(image, params, index, normalize=False):
    """Apply one grayscale invariant per pixel.

    Returns the raw float64 raster, or an 8-bit raster min-max scaled to
    [0, 255] when normalize is set (all zeros for a constant raster).
    """
    if index not in (1, 2, 3):
        raise ValueError(f"index must be 1, 2 or 3, got {index}")
    u = to_log(image)
    h, w = u.shape[:2]
    row = np.ascontiguousarray(matrix(params.beta)[index - 1])
    raster = kernels.active().dot_rows(u.reshape(-1, 3), row).reshape(h, w)
    if not normalize:
        return raster
    return normalize_to_u8(raster)


def normalize_to_u8(raster):
    """Min-max map a float raster onto [0, 255]; constant rasters go to 0."""
    lo = float(raster.min())
    hi = float(raster.max())
    if hi == lo:
        return np.zeros(raster.shape, dtype=np.uint8)
    scaled = (raster - lo) * (255.0 / (hi - lo))
    return np.clip(np.rint(scaled), 0.0, 255.0).astype(np.uint8)


def project(u, u0):
    """Decompose one log vector: (orthogonal part, coordinate along u0)."""
    u = np.asarray(u, dtype=np.float64)
    u0 = np.asarray(u0, dtype=np.float64)
    alpha = float(u @ u0)
    return u - alpha * u0, alpha


@dataclass
class Decomposition:
    """Per-pixel orthogonal split of a log image.

    up holds the illumination-invariant vectors, alpha the scalar
    illumination coordinate along u0.
    """

    up: np.ndarray
    alpha: np.ndarray
    u0: np.ndarray


def project_image(u, u0):
    """Vectorized project() over an (H, W, 3) log image."""
    h, w = u.shape[:2]
    u0 = np.ascontiguousarray(u0, dtype=np.float64)
    up, alpha = kernels.active().project_pixels(
        np.ascontiguousarray(u, dtype=np.float64).reshape(-1, 3), u0
    )
    return Decomposition(up.reshape(h, w, 3), alpha.reshape(h, w), u0)


def decompose(image, params):
    """to_log followed by the per-pixel orthogonal projection."""
    return project_image(to_log(image), params.u0)


def ups_agree(ups, tol=1e-9):
    """True when every row of ups matches the first within tol."""
    ups = np.asarray(ups, dtype=np.float64)
    return bool(np.abs(ups - ups[0]).max() <= tol)


def uniqueness_check(u_s, u0, trials, seed=0, tol=1e-9):
    """Executable uniqueness property of the orthogonal particular solution.

    Shifts u_s by random multiples of u0 and checks all shifts project to
    the same orthogonal part.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    u_s = np.asarray(u_s, dtype=np.float64)
    u0 = np.asarray(u0, dtype=np.float64)
    rng = np.random.default_rng(seed)
    scales = rng.uniform(-10.0, 10.0, size=trials)
    shifted = u_s[None, :] + scales[:, None] * u0[None, :]
    alphas = shifted @ u0
    ups = shifted - alphas[:, None] * u0[None, :]
    base_up, _ = project(u_s, u0)
    return ups_agree(np.vstack([base_up[None, :], ups]), tol)
