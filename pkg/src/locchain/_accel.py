"""Backend switch for the numeric kernels.

Kernels are written twice: a numba ``@njit`` loop version and a pure-numpy
version.  Set ``LOCCHAIN_NUMBA=0`` in the environment to force numpy; the
default uses numba whenever it imports cleanly.
"""
import os

_FLAG = os.environ.get("LOCCHAIN_NUMBA", "1").strip().lower()

try:
    if _FLAG in ("0", "false", "no", "off"):
        raise ImportError("numba disabled by LOCCHAIN_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # bare @njit or @njit(...) both return the function untouched
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f


def backend():
    return "numba" if HAVE_NUMBA else "numpy"
