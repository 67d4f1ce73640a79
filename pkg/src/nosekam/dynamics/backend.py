"""Kernel backend selection.

The compiled extension is preferred when importable; setting NOSEKAM_PURE
(to anything nonempty) forces the pure-Python fallback.  Both expose the
same midpoint_run / midpoint_step / rhs_eval API with identical numerics.
"""
from __future__ import annotations

import os

if os.environ.get("NOSEKAM_PURE"):
    from . import pure as kernels
    BACKEND = "pure"
else:
    try:
        from nosekam import _core as kernels  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from . import pure as kernels
        BACKEND = "pure"


def backend_name() -> str:
    return BACKEND
