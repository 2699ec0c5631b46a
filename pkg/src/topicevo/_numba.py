"""Backend switch for the compiled kernels.

Kernels are written once as plain Python over numpy arrays. When numba is
importable and ``TOPICEVO_DISABLE_NUMBA`` is not set, the dispatchers in
:mod:`topicevo.kernels` call the ``@njit`` versions; otherwise they fall back
to the numpy paths. Both paths must return identical results.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    numba = None

ENV_FLAG = "TOPICEVO_DISABLE_NUMBA"


def _env_disabled():
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


_use_numba = numba is not None and not _env_disabled()


def numba_available():
    return numba is not None


def use_numba():
    """Return True when the compiled kernels are active."""
    return _use_numba


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` at runtime (used by the benchmark and tests)."""
    global _use_numba
    if name == "numba":
        if numba is None:
            raise RuntimeError("numba is not installed")
        _use_numba = True
    elif name == "numpy":
        _use_numba = False
    else:
        raise ValueError(f"unknown backend {name!r}")


def backend_name():
    return "numba" if _use_numba else "numpy"


def jit(fn):
    """``njit`` with an on-disk cache; the original function stays reachable as ``.py_func``.

    Compilation is lazy, so importing this module costs nothing when the
    numpy backend is selected.
    """
    if numba is None:
        fn.py_func = fn
        return fn
    # no fastmath: the numba and numpy paths must round identically
    return numba.njit(cache=True, nogil=True)(fn)
