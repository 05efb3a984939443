"""Backend selection for the hot solver loops.

The compiled extension is preferred; the pure-numpy fallback is used when
the extension is missing or when ``MONOREG_PURE_PYTHON`` is set in the
environment.  Both expose the same functions and status codes.
"""

import os

from . import py_backend

if os.environ.get("MONOREG_PURE_PYTHON"):
    backend = py_backend
else:
    try:
        from . import _core as backend
    except ImportError:
        backend = py_backend

BACKEND_NAME = backend.NAME

OK = py_backend.OK
MAX_ITER = py_backend.MAX_ITER
STALLED = py_backend.STALLED
NON_FINITE = py_backend.NON_FINITE
INDEFINITE = py_backend.INDEFINITE

fixed_point = backend.fixed_point
cg = backend.cg
