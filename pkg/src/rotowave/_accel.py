"""Optional numba acceleration for the hot inner loops.

Set ``ROTOWAVE_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
to force the pure-numpy paths.  Both paths are always importable so the
benchmark and the equivalence tests can exercise them side by side.
"""

import os

_FLAG_OFF = ("1", "true", "yes", "on")

NUMBA_REQUESTED = os.getenv("ROTOWAVE_DISABLE_NUMBA", "0").lower() not in _FLAG_OFF

try:
    import numba

    HAVE_NUMBA = os.getenv("NUMBA_DISABLE_JIT", "0") not in _FLAG_OFF
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = NUMBA_REQUESTED and HAVE_NUMBA

NUMBA_OPTS = {"cache": True, "fastmath": False}


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise the identity decorator."""
    if numba is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    opts = dict(NUMBA_OPTS)
    opts.update(kwargs)
    if len(args) == 1 and callable(args[0]):
        return numba.njit(**opts)(args[0])
    return numba.njit(*args, **opts)
