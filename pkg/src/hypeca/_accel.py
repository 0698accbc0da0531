"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``HYPECA_DISABLE_NUMBA=1`` to force the numpy path.
"""

import os

_FLAG = os.environ.get("HYPECA_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it untouched."""
    if USE_NUMBA:
        return _njit(cache=True, nogil=True)(fn)
    return fn
