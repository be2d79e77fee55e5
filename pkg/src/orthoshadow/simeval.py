"""Synthetic shadows from the linear illumination model, plus evaluation.

The synthesizer darkens masked pixels exactly the way the model says a
shadow does: (v + 14) -> (v + 14) * K^(-1/2.4) per channel. Because that
is the same family of illumination shifts the decomposition removes, a
synthesized pair (image, shadowed image) is a ground-truth oracle for the
invariance claim. The report generator measures RMSE and relative error
across such pairs.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .errors import DomainError
from .kernels._tables import GAMMA

_SHADOW_KINDS = ("original", "invariant", "shadow_free")


@dataclass
class ShadowSpec:
    """One synthetic shadow: where (mask), how soft (penumbra), how deep (k)."""

    mask: np.ndarray
    k: tuple
    penumbra_width: float = 0.0
    label: str = ""

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        self.k = tuple(float(v) for v in self.k)
        if len(self.k) != 3:
            raise ValueError("k must have three channels")
        for v in self.k:
            if v <= 1.0:
                raise DomainError(
                    f"shadow K must exceed 1 (got {v}); K <= 1 would not darken"
                )
        if self.penumbra_width < 0:
            raise ValueError("penumbra_width must be >= 0")


def shadow_ramp(mask, penumbra_width):
    """Per-pixel shadow depth in [0, 1].

    0 outside the mask, 1 in the umbra; inside the mask within
    penumbra_width of the boundary the depth ramps linearly with the
    euclidean distance to the nearest unmasked pixel.
    """
    ramp = mask.astype(np.float64)
    if penumbra_width > 0 and mask.any() and not mask.all():
        dist = ndimage.distance_transform_edt(mask)
        np.minimum(dist / penumbra_width, 1.0, out=ramp)
    return ramp


def synthesize_shadow_float(image, spec):
    """Lossless shadow synthesis: float64 result, unrounded and unclamped.

    Keeping values exact (possibly slightly below 0) lets tests separate
    model error from 8-bit rounding.
    """
    v = np.ascontiguousarray(image, dtype=np.float64)
    if v.shape[:2] != spec.mask.shape:
        raise ValueError(
            f"mask shape {spec.mask.shape} does not match image {v.shape[:2]}"
        )
    ramp = shadow_ramp(spec.mask, spec.penumbra_width)
    shift = np.log(np.asarray(spec.k)) / GAMMA
    h, w = v.shape[:2]
    out = kernels.active().apply_shadow(
        v.reshape(-1, 3), np.ascontiguousarray(ramp).reshape(-1), shift
    )
    return out.reshape(h, w, 3)


def synthesize_shadow(image, spec):
    """8-bit shadow synthesis: the float model rounded and clamped."""
    out = synthesize_shadow_float(image, spec)
    return np.clip(np.rint(out), 0.0, 255.0).astype(np.uint8)


def rmse(a, b):
    """Root mean square difference over all pixels and channels."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def value_range(a, b):
    """max - min over the union of both images' values."""
    return float(
        max(np.max(a), np.max(b)) - min(np.min(a), np.min(b))
    )


def relative_error(a, b):
    """RMSE divided by the union value range of the compared pair."""
    basis = value_range(a, b)
    if basis == 0.0:
        return 0.0
    return rmse(a, b) / basis


@dataclass
class ReportRow:
    label: str
    rmse: float
    relative_error: float
    range_basis: float


@dataclass
class EvalReport:
    """RMSE / relative-error table across shadow variants.

    Rows are original / invariant / shadow-free image pairs; one column
    per variant.
    """

    variant_labels: list
    rmse_table: np.ndarray
    rel_table: np.ndarray
    range_table: np.ndarray
    kinds: tuple = field(default=_SHADOW_KINDS)

    @property
    def rows(self):
        out = []
        for i, kind in enumerate(self.kinds):
            for j, label in enumerate(self.variant_labels):
                out.append(
                    ReportRow(
                        label=f"{kind}/{label}",
                        rmse=float(self.rmse_table[i, j]),
                        relative_error=float(self.rel_table[i, j]),
                        range_basis=float(self.range_table[i, j]),
                    )
                )
        return out

    def to_csv(self):
        lines = ["label,rmse,relative_error"]
        for row in self.rows:
            lines.append(f"{row.label},{row.rmse:.6f},{row.relative_error:.6f}")
        return "\n".join(lines) + "\n"

    def to_text(self):
        """Aligned two-block table: RMSE, then relative error in percent."""
        names = {
            "original": "Original img.",
            "invariant": "Invariant img.",
            "shadow_free": "Shadow-free img.",
        }
        width = max(len(v) for v in names.values()) + 2
        col = max(9, max(len(str(l)) for l in self.variant_labels) + 2)
        header = " " * width + "".join(f"{str(l):>{col}}" for l in self.variant_labels)
        lines = ["RMSE", header]
        for i, kind in enumerate(self.kinds):
            cells = "".join(f"{v:>{col}.2f}" for v in self.rmse_table[i])
            lines.append(f"{names[kind]:<{width}}" + cells)
        lines += ["", "Relative error (%)", header]
        for i, kind in enumerate(self.kinds):
            cells = "".join(f"{100 * v:>{col}.2f}" for v in self.rel_table[i])
            lines.append(f"{names[kind]:<{width}}" + cells)
        return "\n".join(lines) + "\n"


def invariance_report(base, specs, params, epsilon=None, kappa=None):
    """Synthesize each variant and measure how invariant the outputs are.

    For every spec, compares base-vs-variant pairs of the original
    images, the rendered invariant images, and the shadow-free images.
    """
    from . import pipeline  # local import: pipeline depends on this module's types

    specs = list(specs)
    if not specs:
        raise ValueError("need at least one shadow spec")
    kwargs = {}
    if epsilon is not None:
        kwargs["epsilon"] = epsilon
    if kappa is not None:
        kwargs["kappa"] = kappa

    base = np.asarray(base)
    ref = pipeline.run(base, params, **kwargs)
    labels = []
    rmse_t = np.empty((3, len(specs)))
    rel_t = np.empty((3, len(specs)))
    rng_t = np.empty((3, len(specs)))
    for j, spec in enumerate(specs):
        labels.append(spec.label or f"v{j + 1}")
        variant = synthesize_shadow(base, spec)
        res = pipeline.run(variant, params, **kwargs)
        pairs = (
            (base, variant),
            (ref.invariant_rgb, res.invariant_rgb),
            (ref.shadow_free, res.shadow_free),
        )
        for i, (a, b) in enumerate(pairs):
            rmse_t[i, j] = rmse(a, b)
            rng_t[i, j] = value_range(a, b)
            rel_t[i, j] = rmse_t[i, j] / rng_t[i, j] if rng_t[i, j] else 0.0
    return EvalReport(
        variant_labels=labels,
        rmse_table=rmse_t,
        rel_table=rel_t,
        range_table=rng_t,
    )
