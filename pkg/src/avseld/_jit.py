"""numba switch.

Set ``AVSELD_NO_JIT=1`` to force the pure-numpy kernels, e.g. for debugging or
on platforms without numba.
"""
import os

_disabled = os.environ.get("AVSELD_NO_JIT", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit, prange

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


def use_jit():
    return HAS_NUMBA
