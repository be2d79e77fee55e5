"""Illumination-model parameters: spectral data, K estimation, presets.

The daylight/skylight proportionality constants K per channel determine
three log-ratio parameters beta, which in turn fix the invariant system
and its null direction u0. Built-in presets cover sun angles from 20 to
80 degrees plus their mean.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SpdParseError
from .invariant import free_solution, matrix

# Uniform wavelength grid all spectra are resampled onto (nm).
GRID_START = 400.0
GRID_STOP = 700.0
GRID_STEP = 5.0
GRID = np.arange(GRID_START, GRID_STOP + GRID_STEP / 2, GRID_STEP)

SPD_KINDS = (
    "illuminant",
    "matching_function_R",
    "matching_function_G",
    "matching_function_B",
)

# Half-open default search range for K: daylight is strictly brighter than
# skylight per channel, and measured ratios stay well below 10.
DEFAULT_K_RANGE = (1.01, 10.0)
DEFAULT_K_STEP = 0.01


@dataclass
class Spd:
    """A spectral power distribution sampled on the uniform 5 nm grid."""

    power: np.ndarray
    kind: str
    source_samples: int = len(GRID)

    def __post_init__(self):
        if self.kind not in SPD_KINDS:
            raise ValueError(f"unknown spd kind {self.kind!r}")
        self.power = np.asarray(self.power, dtype=np.float64)
        if self.power.shape != GRID.shape:
            raise ValueError(
                f"power must have {GRID.size} samples, got {self.power.size}"
            )
        if not np.isfinite(self.power).all():
            raise DomainError("spectral power must be finite")
        if (self.power < 0).any():
            raise DomainError("spectral power must be nonnegative")

    @property
    def wavelengths(self):
        return GRID


def spd_from_samples(wavelengths, power, kind):
    """Validate irregular samples and resample them onto the 5 nm grid."""
    w = np.asarray(wavelengths, dtype=np.float64)
    p = np.asarray(power, dtype=np.float64)
    if w.size != p.size:
        raise ValueError("wavelengths and power must have equal length")
    if w.size < 2:
        raise DomainError("need at least 2 spectral samples")
    if not np.isfinite(w).all() or not np.isfinite(p).all():
        raise DomainError("spectral samples must be finite")
    if (np.diff(w) <= 0).any():
        raise DomainError("wavelengths must be strictly increasing")
    if w[0] < GRID_START or w[-1] > GRID_STOP:
        raise DomainError(
            f"wavelengths outside [{GRID_START:.0f}, {GRID_STOP:.0f}] nm"
        )
    if w[0] != GRID_START or w[-1] != GRID_STOP:
        raise DomainError(
            "samples must cover the full range "
            f"[{GRID_START:.0f}, {GRID_STOP:.0f}] nm for interpolation"
        )
    if (p < 0).any():
        raise DomainError("spectral power must be nonnegative")
    return Spd(np.interp(GRID, w, p), kind, source_samples=int(w.size))


def load_spd(path, kind):
    """Read a `wavelength_nm,power` text file and resample to the grid.

    Lines starting with # and blank lines are ignored.
    """
    wavelengths = []
    power = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise SpdParseError(
                    path, line_no, f"expected 'wavelength,power', got {line!r}"
                )
            try:
                w = float(parts[0])
                p = float(parts[1])
            except ValueError:
                raise SpdParseError(
                    path, line_no, f"non-numeric sample {line!r}"
                ) from None
            wavelengths.append(w)
            power.append(p)
    if len(wavelengths) < 2:
        raise DomainError(f"{path}: need at least 2 spectral samples")
    return spd_from_samples(wavelengths, power, kind)


def estimate_k(e_day, e_sky, q, k_step=DEFAULT_K_STEP, k_range=DEFAULT_K_RANGE):
    """Grid-search the per-channel daylight/skylight ratio K.

    For each channel, minimizes sum_lambda |Q * (E_day - K * E_sky)| over
    the arithmetic grid {lo, lo+step, ..., hi}; ties go to the smaller K.
    """
    lo, hi = k_range
    if lo <= 0:
        raise ValueError("k_range lower bound must be > 0")
    if k_step <= 0:
        raise ValueError("k_step must be > 0")
    if hi < lo:
        raise ValueError("empty search range")
    spds = (e_day, e_sky) + tuple(q)
    for spd in spds:
        if not spd.power.any():
            raise DomainError(f"all-zero spectrum ({spd.kind})")
    count = int(math.floor((hi - lo) / k_step + 1e-9)) + 1
    ks = lo + k_step * np.arange(count)
    result = []
    for qh in q:
        a = qh.power * e_day.power
        b = qh.power * e_sky.power
        objective = np.abs(a[None, :] - ks[:, None] * b[None, :]).sum(axis=1)
        result.append(float(ks[int(np.argmin(objective))]))
    return tuple(result)


def betas_from_k(k):
    """Log-ratio parameters from the per-channel constants K.

    The rank-2 identity 2 + b1 + b2 + b3 - b1*b2*b3 = 0 holds exactly by
    construction.
    """
    k = tuple(float(v) for v in k)
    for v in k:
        if v <= 0:
            raise DomainError(f"K must be positive, got {v}")
        if abs(v - 1.0) <= 1e-12:
            raise DomainError("singular parameters: K equal to 1 has log 0")
    r, g, b = (math.log(v) for v in k)
    return ((r + g) / b, (r + b) / g, (g + b) / r)


def identity_residual(beta):
    """|2 + b1 + b2 + b3 - b1*b2*b3|, the rank-2 defect of the system."""
    b1, b2, b3 = beta
    return abs(2.0 + b1 + b2 + b3 - b1 * b2 * b3)


def validate_identity(beta, tol):
    """Residual of the rank-2 identity and whether it is within tol."""
    residual = identity_residual(beta)
    return residual, residual <= tol


def beta3_exact(b1, b2):
    """The third parameter solving the rank-2 identity for given b1, b2."""
    denom = b1 * b2 - 1.0
    if denom == 0.0:
        raise DomainError("singular parameters: b1*b2 == 1")
    return (2.0 + b1 + b2) / denom


@dataclass
class ModelParams:
    """Illumination model for one sun angle / weather condition."""

    beta: tuple
    u0: np.ndarray
    label: str = ""
    k: tuple | None = None
    identity_tol: float = field(default=1e-9, repr=False)

    def __post_init__(self):
        self.beta = tuple(float(b) for b in self.beta)
        self.u0 = np.asarray(self.u0, dtype=np.float64)
        if self.u0.shape != (3,):
            raise ValueError("u0 must be a 3-vector")

    def validate(self):
        """Check the model invariants; raises DomainError on violation."""
        if self.k is not None:
            for v in self.k:
                if v <= 1.0:
                    raise DomainError(f"K must exceed 1, got {v}")
        if identity_residual(self.beta) > self.identity_tol:
            raise DomainError(
                f"rank-2 identity residual {identity_residual(self.beta):.3e} "
                f"exceeds {self.identity_tol:.1e}"
            )
        if abs(np.linalg.norm(self.u0) - 1.0) > 1e-12:
            raise DomainError("u0 is not normalized")
        if (self.u0 <= 0).any():
            raise DomainError("u0 must have all-positive components")
        if np.abs(matrix(self.beta) @ self.u0).max() > 1e-9:
            raise DomainError("u0 is not a null vector of the system")
        return self


def params_from_k(k, label=""):
    """Build validated ModelParams from per-channel constants K (> 1)."""
    k = tuple(float(v) for v in k)
    for v in k:
        if v <= 1.0:
            raise DomainError(f"K must exceed 1 for a shadow model, got {v}")
    beta = betas_from_k(k)
    return ModelParams(beta=beta, u0=free_solution(beta), label=label, k=k).validate()


def params_from_betas(b1, b2, label=""):
    """Build validated ModelParams from two betas; the third is derived.

    Deriving b3 from the rank-2 identity keeps the system matrix exactly
    rank 2 even when b1, b2 come from rounded tables.
    """
    beta = (float(b1), float(b2), beta3_exact(float(b1), float(b2)))
    return ModelParams(beta=beta, u0=free_solution(beta), label=label).validate()


# Measured parameters per sun angle (betas as published, rounded to 3
# decimals; the mean column comes from the 20-70 degree mean spectra).
PRESET_TABLE = {
    "20deg": (2.353, 1.963, 1.745),
    "30deg": (2.321, 1.963, 1.767),
    "40deg": (2.299, 1.977, 1.770),
    "50deg": (2.371, 1.982, 1.716),
    "60deg": (2.648, 1.925, 1.604),
    "70deg": (2.520, 1.996, 1.617),
    "80deg": (2.473, 1.985, 1.652),
    "mean": (2.557, 1.889, 1.682),
}

PRESET_LABELS = tuple(PRESET_TABLE)


def canonical_label(label):
    """Map '40', '40deg', '40°', 'Mean', ... onto a preset table key."""
    text = str(label).strip().lower().replace("°", "").replace("deg", "")
    if text == "mean":
        return "mean"
    key = f"{text}deg"
    if key in PRESET_TABLE:
        return key
    raise ValueError(
        f"unknown preset {label!r}; expected one of {', '.join(PRESET_TABLE)}"
    )


def preset(label):
    """Built-in ModelParams for a sun angle ('20deg'..'80deg') or 'mean'.

    b1 and b2 are taken verbatim from the table; b3 is re-derived from the
    rank-2 identity so u0 is an exact null vector. K is unknown for presets.
    """
    key = canonical_label(label)
    b1, b2, _ = PRESET_TABLE[key]
    return params_from_betas(b1, b2, label=key)


def all_presets():
    """Every built-in preset, in table order."""
    return [preset(label) for label in PRESET_TABLE]


def implied_k(params, strength):
    """A K triple whose betas reproduce params' model.

    The betas pin K only up to a common exponent; strength sets it:
    K = exp(strength * u0). Used to synthesize shadows that a given
    preset removes exactly.
    """
    if strength <= 0:
        raise ValueError("strength must be > 0")
    return tuple(np.exp(strength * params.u0))


def format_preset_table():
    """The built-in table as `label,beta1,beta2,beta3` text lines."""
    lines = ["# preset,beta1,beta2,beta3"]
    for label, (b1, b2, b3) in PRESET_TABLE.items():
        lines.append(f"{label},{b1},{b2},{b3}")
    return "\n".join(lines) + "\n"
