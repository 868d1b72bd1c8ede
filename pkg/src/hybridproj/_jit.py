"""JIT switch for the numeric kernels.

Kernels are written once in the numpy subset numba understands. With numba
available they are compiled with ``njit``; setting ``HYBRIDPROJ_DISABLE_JIT=1``
(or ``NUMBA_DISABLE_JIT=1``) leaves them as plain numpy functions.
"""
import os

_FALSEY = ("", "0", "false", "no", "off")


def _flag(name):
    return os.environ.get(name, "").strip().lower() not in _FALSEY


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = (
    numba is not None
    and not _flag("HYBRIDPROJ_DISABLE_JIT")
    and not _flag("NUMBA_DISABLE_JIT")
)


def jit(fn):
    """Compile ``fn`` with numba when enabled, otherwise return it unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
