"""Backend switch for the compiled kernels.

Set ``FFG_DISABLE_NUMBA=1`` to force the pure-numpy code paths.  When numba
is not importable the numpy path is used automatically.
"""

import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _flag(name):
    return os.environ.get(name, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _flag("FFG_DISABLE_NUMBA")

NUMBA_OPTS = {"cache": True, "nogil": True}


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return numba.njit(**NUMBA_OPTS)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
