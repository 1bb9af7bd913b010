"""Kernel backend selection.

The compiled extension is used when importable; set ``MARGINLAB_PURE_PYTHON=1``
to force the NumPy fallback.
"""

import os

from . import _kernels_py

if os.environ.get("MARGINLAB_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _kernels as _active
    except ImportError:  # extension not built
        _active = _kernels_py
else:
    _active = _kernels_py

BACKEND = _active.BACKEND
correlations = _active.correlations
margin_boost = _active.margin_boost
adaboost = _active.adaboost

python_backend = _kernels_py


def compiled_backend():
    """Return the compiled module, or None when it is not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
