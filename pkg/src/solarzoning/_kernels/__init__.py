"""Geometry inner loops with a compiled fast path.

Importing this package picks the Cython extension when it was built and the
numpy implementation otherwise.  Both implementations are formula-identical
and return bit-equal results, so the choice only affects speed.  Set the
environment variable ``SOLARZONING_NO_SPEEDUPS=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _pyfallback

pyfallback = _pyfallback

if os.environ.get("SOLARZONING_NO_SPEEDUPS"):
    _impl = _pyfallback
    IMPLEMENTATION = "python"
else:
    try:
        from . import _speedups as _impl

        IMPLEMENTATION = "cython"
    except ImportError:
        _impl = _pyfallback
        IMPLEMENTATION = "python"

active = _impl
points_in_ring = _impl.points_in_ring
count_cleared = _impl.count_cleared

__all__ = [
    "IMPLEMENTATION",
    "active",
    "count_cleared",
    "points_in_ring",
    "pyfallback",
]
