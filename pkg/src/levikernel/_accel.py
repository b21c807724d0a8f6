"""Optional numba acceleration with a pure-NumPy fallback.

Hot kernels carry ``@njit``. Setting the environment variable
``LEVIKERNEL_NO_NUMBA=1`` (or a failed numba import) selects the fallback
path: the same functions run un-jitted, so results are identical and only
speed changes. ``benchmarks/bench_kernels.py`` compares the two paths.
"""

import os

NUMBA_ENABLED = False

def _null_decorator(*args, **kwargs):
    """Identity decorator standing in for numba.njit."""
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap


if os.environ.get("LEVIKERNEL_NO_NUMBA", "").strip() not in ("", "0", "false"):
    njit = _null_decorator
    prange = range
else:
    try:
        from numba import njit, prange

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        njit = _null_decorator
        prange = range
