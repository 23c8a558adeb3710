"""Numba switch.

Kernels are compiled with numba when it is importable and ``ILHEDGE_NUMBA``
is not set to a false value (``0``, ``false``, ``no``, ``off``).  Otherwise
the pure-numpy implementations are used.  ``ILHEDGE_THREADS`` caps the
number of numba worker threads (``0`` or unset = numba's default).
"""

from __future__ import annotations

import logging
import os

log = logging.getLogger(__name__)

_FALSE = {"0", "false", "no", "off"}

# the bundled TBB is too old for numba; skip straight to OpenMP/workqueue
os.environ.setdefault("NUMBA_THREADING_LAYER_PRIORITY", "omp workqueue tbb")

try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ILHEDGE_NUMBA", "1").strip().lower() not in _FALSE


def thread_cap() -> int:
    """Requested thread cap from ``ILHEDGE_THREADS``; 0 means automatic."""
    raw = os.environ.get("ILHEDGE_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        log.warning("ignoring non-integer ILHEDGE_THREADS=%r", raw)
        return 0
    return max(n, 0)


def apply_thread_cap() -> None:
    if not HAVE_NUMBA:
        return
    n = thread_cap()
    if n > 0:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


prange = numba.prange if HAVE_NUMBA else range
