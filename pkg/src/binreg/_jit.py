"""Numba switch.

Set ``BINREG_DISABLE_NUMBA=1`` to force the pure-numpy kernels. Numba is
also skipped silently when it is not importable.
"""
import os

_FLAG = "BINREG_DISABLE_NUMBA"

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def numba_enabled():
    if not HAVE_NUMBA:
        return False
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise.

    Compilation is lazy, so decorating costs nothing when the numpy path
    is selected at call time.
    """
    opts = dict(cache=True, nogil=True)
    opts.update(kwargs)

    def wrap(func):
        if not HAVE_NUMBA:
            return func
        return numba.njit(**opts)(func)

    if args and callable(args[0]):
        return wrap(args[0])
    return wrap
