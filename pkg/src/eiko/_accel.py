"""Numba / pure-NumPy implementation switch.

Hot numeric kernels in this package ship in two interchangeable versions: a
numba ``@njit`` loop implementation and a vectorized pure-NumPy one.  The
jitted path is the default; set ``EIKO_PURE_NUMPY=1`` in the environment to
force the NumPy path (it is also selected automatically when numba is not
importable).  Both paths compute the same floating-point operations per node,
and the test suite asserts they agree.  ``benchmarks/bench_impls.py`` compares
their speed.
"""

import os

PURE_NUMPY = os.environ.get("EIKO_PURE_NUMPY", "").strip().lower() in {
    "1",
    "true",
    "yes",
    "on",
}

USE_NUMBA = False
if not PURE_NUMPY:
    try:
        from numba import njit

        USE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass

if not USE_NUMBA:

    def njit(*args, **kwargs):
        """No-op stand-in for numba.njit when jitting is disabled."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap
