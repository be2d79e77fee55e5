"""Color illumination-invariant and shadow-free images from single photos.

A pixel's log-RGB vector moves along a fixed direction u0 when the
illumination changes (shadow vs. direct light); projecting each pixel
onto the plane orthogonal to u0 yields an illumination-invariant image,
and a CIELAB recombination with a color-restored companion produces a
shadow-free image. See the README for the CLI and the parameter model.
"""

from .colorspace import from_log, lab_to_rgb, recombine, rgb_to_lab
from .errors import DomainError, ImageFormatError, SpdParseError
from .invariant import (
    Decomposition,
    decompose,
    free_solution,
    gray_invariant,
    gray_invariant_image,
    project,
    to_log,
    uniqueness_check,
)
from .params import (
    ModelParams,
    Spd,
    betas_from_k,
    estimate_k,
    load_spd,
    params_from_k,
    preset,
    validate_identity,
)
from .pipeline import PipelineConfig, select_params_by_entropy, shadow_free
from .restore import NeutralSet, correct, neutral_set
from .simeval import (
    EvalReport,
    ShadowSpec,
    invariance_report,
    relative_error,
    rmse,
    synthesize_shadow,
)

__version__ = "0.1.0"

__all__ = [
    "Decomposition",
    "DomainError",
    "EvalReport",
    "ImageFormatError",
    "ModelParams",
    "NeutralSet",
    "PipelineConfig",
    "ShadowSpec",
    "Spd",
    "SpdParseError",
    "betas_from_k",
    "correct",
    "decompose",
    "estimate_k",
    "free_solution",
    "from_log",
    "gray_invariant",
    "gray_invariant_image",
    "invariance_report",
    "lab_to_rgb",
    "load_spd",
    "neutral_set",
    "params_from_k",
    "preset",
    "project",
    "recombine",
    "relative_error",
    "rgb_to_lab",
    "rmse",
    "select_params_by_entropy",
    "shadow_free",
    "synthesize_shadow",
    "to_log",
    "uniqueness_check",
    "validate_identity",
]
