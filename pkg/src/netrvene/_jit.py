"""JIT switch.

Hot kernels are written as plain loops and compiled with numba when it is
available.  Setting ``NETRVENE_DISABLE_JIT=1`` selects the vectorised numpy
twins instead (handy for debugging and for the kernel benchmark).
"""

import os

_FLAG = os.environ.get("NETRVENE_DISABLE_JIT", "0").strip().lower()

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

JIT_ENABLED = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")

if HAVE_NUMBA:
    from numba import njit
else:  # pragma: no cover

    def njit(func=None, **kwargs):
        if func is not None:
            return func

        def wrapper(f):
            return f

        return wrapper


def backend_name():
    return "numba" if JIT_ENABLED else "numpy"
