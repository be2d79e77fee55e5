"""Kernel backend selection.

The hot per-pixel loops exist twice: a numba-compiled version and a pure
numpy fallback with identical signatures. The ORTHOSHADOW_BACKEND
environment variable picks one at import time:

    auto   (default) numba if it imports, else numpy
    numba  require the compiled backend
    numpy  force the fallback

`use()` switches at runtime (used by the benchmark and the parity tests).
Backend choice affects speed only; outputs agree to floating rounding.
"""

import os

from . import numpy_impl

_IMPLS = {"numpy": numpy_impl}
_numba_error = None
try:
    from . import numba_impl

    _IMPLS["numba"] = numba_impl
except ImportError as exc:  # pragma: no cover - depends on environment
    _numba_error = exc

BACKENDS = tuple(sorted(_IMPLS))


def _resolve(name):
    if name == "auto":
        return _IMPLS.get("numba", numpy_impl)
    try:
        return _IMPLS[name]
    except KeyError:
        if name == "numba" and _numba_error is not None:
            raise RuntimeError(
                f"numba backend requested but unavailable: {_numba_error}"
            ) from _numba_error
        raise ValueError(
            f"unknown backend {name!r}; expected one of {('auto',) + BACKENDS}"
        ) from None


_active = _resolve(os.environ.get("ORTHOSHADOW_BACKEND", "auto"))


def active():
    """The currently selected kernel module."""
    return _active


def use(name):
    """Select a backend by name ('auto', 'numpy', 'numba'); returns it."""
    global _active
    _active = _resolve(name)
    return _active
