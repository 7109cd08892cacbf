"""Select the kernel implementation at import time.

The compiled extension is preferred; ``AIRYGAP_PURE_PYTHON=1`` forces the
numpy fallback (used by the parity tests and the benchmark).
"""

import os

from . import _kernels_py

if os.environ.get("AIRYGAP_PURE_PYTHON", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels_c as kernels
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _kernels_py
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
