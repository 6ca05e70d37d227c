"""Select the compiled or pure-python kernel implementation.

The compiled extension is preferred when importable.  Set the
environment variable FBMILT_BACKEND to "cython" or "python" to force a
choice (forcing "cython" raises if the extension is missing).
"""

from __future__ import annotations

import os

_requested = os.environ.get("FBMILT_BACKEND", "auto").lower()
if _requested not in ("auto", "cython", "python"):
    raise ImportError(
        f"FBMILT_BACKEND must be 'auto', 'cython' or 'python', got {_requested!r}"
    )

if _requested in ("auto", "cython"):
    try:
        from . import _kernels as _impl
        backend_name = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _kernels_py as _impl
        backend_name = "python"
else:
    from . import _kernels_py as _impl
    backend_name = "python"

gauss_weight_sum = _impl.gauss_weight_sum
