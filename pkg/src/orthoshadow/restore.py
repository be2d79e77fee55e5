"""Color restoration for pixels near the RGB neutral surface.

The orthogonal projection destroys color information for pixels whose log
vector is nearly parallel to u0 (grays). A global correction vector t,
the mean deviation of those pixels from u0, is pushed back onto the
invariant image with a radial falloff.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

DEFAULT_EPSILON = 0.15
DEFAULT_KAPPA = 0.02


@dataclass
class NeutralSet:
    """Pixels whose direction lies within epsilon of u0, plus their stats."""

    mask: np.ndarray
    count: int
    t: np.ndarray


def falloff(dist, kappa=DEFAULT_KAPPA):
    """Correction weight 1/(kappa * d^3 + 1); 1 at d = 0, decreasing in d."""
    return 1.0 / (kappa * np.asarray(dist, dtype=np.float64) ** 3 + 1.0)


def direction_distance(u, u0):
    """Per-pixel chordal distance || u/||u|| - u0 || as an (H, W) field."""
    h, w = u.shape[:2]
    impl = kernels.active()
    return impl.neutral_distance(
        np.ascontiguousarray(u, dtype=np.float64).reshape(-1, 3),
        np.ascontiguousarray(u0, dtype=np.float64),
    ).reshape(h, w)


def neutral_set(u, u0, epsilon=DEFAULT_EPSILON, dist=None):
    """Find the near-neutral pixel set and its mean deviation from u0.

    t is zero when the set is empty. The reduction runs in row-major
    order with a deterministic summation, so the result never depends on
    how callers partition per-pixel work. A precomputed distance field
    may be passed to avoid recomputing it.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    if dist is None:
        dist = direction_distance(u, u0)
    mask = dist <= epsilon
    impl = kernels.active()
    total, count = impl.masked_deviation_sum(
        np.ascontiguousarray(u, dtype=np.float64).reshape(-1, 3),
        np.ascontiguousarray(u0, dtype=np.float64),
        np.ascontiguousarray(mask).reshape(-1),
    )
    t = total / count if count else np.zeros(3)
    return NeutralSet(mask=mask, count=int(count), t=t)


def correct(up, u, u0, ns, kappa=DEFAULT_KAPPA, dist=None):
    """Luminance-bearing image: push t onto up with radial falloff.

    Per pixel: uc = ||up|| * (up/||up|| + falloff(d) * t). Exactly-neutral
    pixels (||up|| < 1e-12) map to zero; the downstream recombination takes
    only luminance from this image, so those pixels stay neutral. With
    t = 0 the input is returned unchanged (bit-exact identity).
    """
    if up.shape != u.shape:
        raise ValueError(f"raster shapes differ: {up.shape} vs {u.shape}")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if not ns.t.any():
        return up
    if dist is None:
        dist = direction_distance(u, u0)
    h, w = up.shape[:2]
    impl = kernels.active()
    uc = impl.color_correct(
        np.ascontiguousarray(up, dtype=np.float64).reshape(-1, 3),
        np.ascontiguousarray(dist, dtype=np.float64).reshape(-1),
        np.ascontiguousarray(ns.t, dtype=np.float64),
        float(kappa),
    )
    return uc.reshape(h, w, 3)
