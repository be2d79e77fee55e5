"""End-to-end shadow-free pipeline and entropy-based parameter selection.

Stages follow the fixed order: log transform, orthogonal decomposition,
neutral-set statistics, color correction, exponentiation of both the
invariant and the corrected image, then CIELAB recombination (luminance
from the corrected image, chrominance from the invariant one).

Per-pixel stages may be split across worker threads in contiguous row
bands; every stage is an elementwise map, and the one global reduction
(the neutral-set mean) always runs as a single deterministic pass, so
outputs are bit-identical for any worker count.
"""

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import colorspace, invariant, params as params_mod, restore
from .kernels._tables import LOG_OFFSET

EMIT_CHOICES = (
    "invariant",
    "shadow_free",
    "alpha",
    "gray1",
    "gray2",
    "gray3",
    "mask",
)

# Fraction of values trimmed from each histogram tail, and bin count, for
# the entropy score. Fixed so parameter selection is deterministic.
ENTROPY_CLIP = 0.025
ENTROPY_BINS = 64

# Gray level whose illumination coordinate is used to re-expose the
# invariant and corrected log images for 8-bit export. The projection
# leaves those images with near-zero norm, far below the working range of
# the exponentiation; shifting every pixel by the same fixed multiple of
# u0 embeds them at a mid-gray exposure without touching the invariance
# (the shift is constant across images for a given parameter set).
EXPOSURE_GRAY = 128.0

# Advisory threshold: fraction of pixels with >= 2 saturated channels
# above which the model's known overexposure failure mode is flagged.
OVEREXPOSURE_FRACTION = 0.05


@dataclass
class PipelineConfig:
    """Everything a shadow-free run needs besides the image itself."""

    params_source: tuple = ("preset", "mean")
    epsilon: float = restore.DEFAULT_EPSILON
    kappa: float = restore.DEFAULT_KAPPA
    emit: tuple = ("shadow_free",)
    workers: int = 1

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        self.emit = tuple(self.emit)
        if not self.emit:
            raise ValueError("emit set must not be empty")
        for name in self.emit:
            if name not in EMIT_CHOICES:
                raise ValueError(
                    f"unknown emit {name!r}; expected one of {EMIT_CHOICES}"
                )
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class PipelineResult:
    """All intermediate and final rasters of one run."""

    params: object
    up: np.ndarray
    alpha: np.ndarray
    corrected: np.ndarray
    neutral: restore.NeutralSet
    invariant_rgb: np.ndarray
    restored_rgb: np.ndarray
    shadow_free: np.ndarray
    warnings: list = field(default_factory=list)


def _bands(height, workers):
    n = min(workers, height)
    edges = np.linspace(0, height, n + 1, dtype=int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _map_bands(height, workers, band_fn):
    spans = _bands(height, workers)
    if len(spans) <= 1:
        band_fn(0, height)
        return
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        for _ in pool.map(lambda span: band_fn(*span), spans):
            pass


def exposure_shift(u0):
    """Fixed re-exposure offset: the illumination coordinate of mid-gray."""
    return float(np.log(EXPOSURE_GRAY + LOG_OFFSET) * np.sum(u0))


def overexposure_fraction(image):
    """Fraction of pixels with at least two channels saturated at 255."""
    sat = (np.asarray(image) == 255).sum(axis=-1)
    return float((sat >= 2).mean())


def run(image, params, epsilon=restore.DEFAULT_EPSILON, kappa=restore.DEFAULT_KAPPA,
        workers=1):
    """Execute the full pipeline for fixed parameters."""
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {image.shape}")
    h, w = image.shape[:2]
    u0 = params.u0
    v = np.ascontiguousarray(image, dtype=np.float64)

    u = np.empty((h, w, 3))
    up = np.empty((h, w, 3))
    alpha = np.empty((h, w))
    dist = np.empty((h, w))

    def decompose_band(r0, r1):
        u[r0:r1] = invariant.to_log(v[r0:r1])
        dec = invariant.project_image(u[r0:r1], u0)
        up[r0:r1] = dec.up
        alpha[r0:r1] = dec.alpha
        dist[r0:r1] = restore.direction_distance(u[r0:r1], u0)

    _map_bands(h, workers, decompose_band)

    # Global reduction: single deterministic pass regardless of workers.
    neutral = restore.neutral_set(u, u0, epsilon=epsilon, dist=dist)

    corrected = np.empty((h, w, 3))
    invariant_rgb = np.empty((h, w, 3), np.uint8)
    restored_rgb = np.empty((h, w, 3), np.uint8)
    shift = exposure_shift(u0) * u0

    def correct_band(r0, r1):
        corrected[r0:r1] = restore.correct(
            up[r0:r1], u[r0:r1], u0, neutral, kappa=kappa, dist=dist[r0:r1]
        )
        invariant_rgb[r0:r1] = colorspace.from_log(up[r0:r1] + shift)
        restored_rgb[r0:r1] = colorspace.from_log(corrected[r0:r1] + shift)

    _map_bands(h, workers, correct_band)

    shadow_free = np.empty((h, w, 3), np.uint8)

    def recombine_band(r0, r1):
        shadow_free[r0:r1] = colorspace.recombine(
            restored_rgb[r0:r1], invariant_rgb[r0:r1]
        )

    _map_bands(h, workers, recombine_band)

    warnings = []
    fraction = overexposure_fraction(image)
    if fraction > OVEREXPOSURE_FRACTION:
        warnings.append(
            f"overexposure: {fraction:.1%} of pixels have >= 2 saturated "
            "channels; such pixels violate the illumination model and their "
            "decomposition is unreliable"
        )
    return PipelineResult(
        params=params,
        up=up,
        alpha=alpha,
        corrected=corrected,
        neutral=neutral,
        invariant_rgb=invariant_rgb,
        restored_rgb=restored_rgb,
        shadow_free=shadow_free,
        warnings=warnings,
    )


def histogram_entropy(values, clip_fraction=ENTROPY_CLIP, bins=ENTROPY_BINS):
    """Shannon entropy (nats) of a clipped, uniformly binned histogram.

    The lowest and highest clip_fraction of values are discarded before
    binning so stray extremes cannot stretch the bin range.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    lo, hi = np.quantile(v, [clip_fraction, 1.0 - clip_fraction])
    kept = v[(v >= lo) & (v <= hi)]
    if kept.size == 0 or hi <= lo:
        return 0.0
    hist, _ = np.histogram(kept, bins=bins, range=(lo, hi))
    p = hist[hist > 0] / kept.size
    return float(-(p * np.log(p)).sum())


def invariant_entropy(image, params):
    """Entropy score of the first grayscale-invariant raster.

    Lower means less residual illumination structure, i.e. a better
    parameter fit for this image.
    """
    raster = invariant.gray_invariant_image(image, params, index=1)
    return histogram_entropy(raster)


def select_params_by_entropy(image, candidates):
    """Pick the candidate whose invariant image has minimal entropy.

    Ties break toward the earliest candidate.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("candidate list must not be empty")
    scores = [invariant_entropy(image, cand) for cand in candidates]
    return candidates[int(np.argmin(scores))]


def resolve_params(image, source):
    """Turn a config params_source into ModelParams.

    Sources: ('preset', label); ('spd', {'day','sky','qr','qg','qb'} paths);
    ('entropy', (labels...)) with an empty label tuple meaning all presets.
    """
    kind = source[0]
    if kind == "preset":
        return params_mod.preset(source[1])
    if kind == "spd":
        paths = source[1]
        missing = {"day", "sky", "qr", "qg", "qb"} - set(paths)
        if missing:
            raise ValueError(f"spd source missing entries: {sorted(missing)}")
        day = params_mod.load_spd(paths["day"], "illuminant")
        sky = params_mod.load_spd(paths["sky"], "illuminant")
        q = tuple(
            params_mod.load_spd(paths[name], f"matching_function_{ch}")
            for name, ch in (("qr", "R"), ("qg", "G"), ("qb", "B"))
        )
        k = params_mod.estimate_k(day, sky, q)
        return params_mod.params_from_k(k, label="estimated")
    if kind == "entropy":
        labels = source[1] or params_mod.PRESET_LABELS
        candidates = [params_mod.preset(label) for label in labels]
        return select_params_by_entropy(image, candidates)
    raise ValueError(f"unknown params source {source!r}")


def shadow_free(image, cfg):
    """Run the pipeline per config; returns (emitted rasters, result).

    The first element maps each name in cfg.emit to its raster.
    """
    params = resolve_params(image, cfg.params_source)
    result = run(
        image, params, epsilon=cfg.epsilon, kappa=cfg.kappa, workers=cfg.workers
    )
    outputs = {}
    for name in cfg.emit:
        if name == "invariant":
            outputs[name] = result.invariant_rgb
        elif name == "shadow_free":
            outputs[name] = result.shadow_free
        elif name == "alpha":
            outputs[name] = invariant.normalize_to_u8(result.alpha)
        elif name == "mask":
            outputs[name] = result.neutral.mask.astype(np.uint8) * 255
        else:
            index = int(name[-1])
            outputs[name] = invariant.gray_invariant_image(
                image, params, index, normalize=True
            )
    return outputs, result


_SOURCE_RE = re.compile(r"^(\w+)\((.*)\)$")


def parse_params_source(text):
    """Parse 'preset(mean)' / 'spd(day=...,sky=...)' / 'entropy(a,b)'."""
    text = text.strip()
    match = _SOURCE_RE.match(text)
    if not match:
        raise ValueError(
            f"bad params_source {text!r}; expected preset(...), spd(...) or "
            "entropy(...)"
        )
    kind, body = match.group(1), match.group(2).strip()
    if kind == "preset":
        if not body:
            raise ValueError("preset(...) needs a label")
        return ("preset", body)
    if kind == "spd":
        paths = {}
        for item in filter(None, (s.strip() for s in body.split(","))):
            if "=" not in item:
                raise ValueError(f"bad spd entry {item!r}; expected key=path")
            key, path = item.split("=", 1)
            paths[key.strip()] = path.strip()
        return ("spd", paths)
    if kind == "entropy":
        labels = tuple(filter(None, (s.strip() for s in body.split(","))))
        return ("entropy", labels)
    raise ValueError(f"unknown params source kind {kind!r}")


def parse_config_text(text):
    """Parse `key = value` lines; # starts a comment line."""
    values = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip()] = value.strip()
    return values
