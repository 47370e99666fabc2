"""Optional numba acceleration.

Set ``BEMLAB_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``) to run
the pure numpy / pure Python kernels instead of the compiled ones.
"""

import os

_DISABLED = os.environ.get("BEMLAB_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by BEMLAB_DISABLE_NUMBA")
    from numba import njit as _numba_njit

    NUMBA_ENABLED = True
except ImportError:
    _numba_njit = None
    NUMBA_ENABLED = False


def njit(*args, **kwargs):
    """``numba.njit`` when available and enabled, otherwise the identity decorator."""
    if len(args) == 1 and callable(args[0]) and not kwargs:
        fn = args[0]
        return _numba_njit(cache=True)(fn) if NUMBA_ENABLED else fn

    def wrapper(fn):
        if not NUMBA_ENABLED:
            return fn
        kwargs.setdefault("cache", True)
        return _numba_njit(*args, **kwargs)(fn)

    return wrapper
