"""Optional numba compilation.

Set ``VERNE_NO_NUMBA=1`` to run every kernel as plain Python/numpy.  The
flag is read once at import time.
"""

from __future__ import annotations

import os

USE_NUMBA = os.environ.get("VERNE_NO_NUMBA", "").strip().lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        USE_NUMBA = False


def maybe_njit(fn):
    """``numba.njit(cache=True)`` when enabled, otherwise the function unchanged."""
    if USE_NUMBA:
        return _njit(cache=True)(fn)
    return fn
