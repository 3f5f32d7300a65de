"""Backend selection for the hot numeric kernels.

Kernels in :mod:`relayframe._kernels` come in two flavours: a numba
``@njit`` version and a pure-numpy version.  The numba path is used when
numba imports cleanly and ``RELAYFRAME_DISABLE_NUMBA`` is unset (or set to
``0``/``false``/empty).  The flag is read once, at import time.
"""
import os

_FLAG = "RELAYFRAME_DISABLE_NUMBA"


def _flag_disables(value):
    return value.strip().lower() not in ("", "0", "false", "no", "off")


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

NUMBA_AVAILABLE = _numba is not None
USE_NUMBA = NUMBA_AVAILABLE and not _flag_disables(os.environ.get(_FLAG, ""))
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` with caching on, or an identity decorator without numba."""
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)
