"""Numba switch.

Kernels are written in the numba-compatible subset of Python and decorated
with :func:`jit`.  Setting ``SYSCOVAR_DISABLE_NUMBA=1`` (or running without
numba installed) leaves them as plain Python; the Monte Carlo counting loops
then dispatch to vectorised numpy implementations instead.
"""
import logging
import os

_FLAG = "SYSCOVAR_DISABLE_NUMBA"

NUMBA_ENABLED = os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        import numba
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False
    else:
        logging.getLogger("numba").setLevel(logging.WARNING)


def jit(func):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(func)
    return func


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
