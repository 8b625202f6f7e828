"""Select the compiled kernels when available, else the Python fallback.

Set ``CRSCAT_BACKEND=python`` to force the fallback.
"""
import os

if os.environ.get("CRSCAT_BACKEND", "").lower() == "python":
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _kernels_py as kernels

BACKEND = kernels.BACKEND


def threads() -> int:
    """Worker count from ``CRSCAT_THREADS`` (default 1, deterministic)."""
    try:
        return max(1, int(os.environ.get("CRSCAT_THREADS", "1")))
    except ValueError:
        return 1
