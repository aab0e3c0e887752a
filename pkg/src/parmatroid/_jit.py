"""Optional numba compilation for the hot kernels.

Set MATROID_DISABLE_NUMBA=1 to run every kernel as plain Python over numpy
arrays. Both paths execute the same source, so results are identical.
"""
import os

_DISABLED = os.environ.get("MATROID_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit
    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    NUMBA_ENABLED = False


def kernel(fn):
    """Compile ``fn`` with numba when enabled; keep the Python version as ``py_func``."""
    if NUMBA_ENABLED:
        return _njit(cache=True, nogil=True)(fn)
    fn.py_func = fn
    return fn
