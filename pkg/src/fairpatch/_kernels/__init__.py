"""Kernel lane selection.

The compiled Cython extension is preferred when importable; the numpy
fallback is used otherwise. FAIRPATCH_PURE=1 forces the fallback (useful
for the lane-parity tests and benchmarks).
"""

import os

if os.environ.get("FAIRPATCH_PURE", "0") not in ("", "0"):
    from . import pure as _impl
else:
    try:
        from . import _ctree as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

IMPLEMENTATION: str = _impl.IMPLEMENTATION
best_split = _impl.best_split
route_rows = _impl.route_rows

__all__ = ["IMPLEMENTATION", "best_split", "route_rows"]
