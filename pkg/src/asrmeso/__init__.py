"""Meso-scale finite-element simulation of alkali-silica reaction in concrete."""

import numba as _numba

# OpenMP first: avoids a noisy probe of incompatible TBB builds.
_numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AsrMesoError,
    CalibrationError,
    ConfigurationError,
    NumericalFailure,
    PackingSaturationError,
    StepError,
)


def set_threads(n):
    """Set the number of worker threads used by the element kernels.

    Values above the pool size fixed at import are clipped; returns the
    count in effect.
    """
    n = max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)
    return n


__all__ = [
    "AsrMesoError", "CalibrationError", "ConfigurationError", "NumericalFailure",
    "PackingSaturationError", "StepError", "set_threads", "__version__",
]
