"""Backend selection for the hot kernels.

The environment variable ``KAMLAB_BACKEND`` picks the implementation:

    auto  (default) -- numba-compiled kernels if numba imports, else plain
    numba           -- require numba, fail loudly if missing
    numpy           -- force the uncompiled pure NumPy/Python path

Both paths run the same source (``kernels/_impl.py``); the numpy path is a
slow reference used for cross-checks and environments without a JIT.
``BACKEND`` records which one is active.
"""

import os

from . import _impl

_choice = os.environ.get("KAMLAB_BACKEND", "auto").strip().lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"KAMLAB_BACKEND must be auto|numba|numpy, got {_choice!r}")

BACKEND = "numpy"
if _choice in ("auto", "numba"):
    try:
        from numba import njit as _njit
    except ImportError:
        if _choice == "numba":
            raise
    else:
        BACKEND = "numba"
        # jit leaves first and rebind them in _impl so jitted callers link
        # against the compiled versions, not the plain-Python ones
        for _leaf in ("eval_generator", "spectral_norm_2x2"):
            setattr(_impl, _leaf, _njit(cache=True)(getattr(_impl, _leaf)))
        for _fn in (
            "track_rotation",
            "lyapunov_orbit",
            "bounded_orbit",
            "sturm_count_leq",
            "winding_samples",
        ):
            setattr(_impl, _fn, _njit(cache=True)(getattr(_impl, _fn)))

eval_generator = _impl.eval_generator
track_rotation = _impl.track_rotation
spectral_norm_2x2 = _impl.spectral_norm_2x2
lyapunov_orbit = _impl.lyapunov_orbit
bounded_orbit = _impl.bounded_orbit
sturm_count_leq = _impl.sturm_count_leq
winding_samples = _impl.winding_samples

__all__ = [
    "BACKEND",
    "eval_generator",
    "track_rotation",
    "spectral_norm_2x2",
    "lyapunov_orbit",
    "bounded_orbit",
    "sturm_count_leq",
    "winding_samples",
]
