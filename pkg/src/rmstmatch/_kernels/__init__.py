"""Hot loops, compiled when the Cython extension is built.

``BACKEND`` is ``"cython"`` or ``"numpy"``.  Set ``RMSTMATCH_PURE_PYTHON=1``
to force the NumPy fallback.
"""
import os

from . import _numpy

try:
    if os.environ.get("RMSTMATCH_PURE_PYTHON") == "1":
        raise ImportError("pure python requested")
    from ._core import monotone_match, risk_table
    BACKEND = "cython"
except ImportError:
    from ._numpy import monotone_match, risk_table
    BACKEND = "numpy"

__all__ = ["BACKEND", "monotone_match", "risk_table"]
