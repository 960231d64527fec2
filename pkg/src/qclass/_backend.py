"""Kernel backend selection.

The compiled extension is preferred; setting ``QCLASS_PURE_PYTHON=1`` (or a
failed import) selects the numpy fallback. ``BACKEND`` names the choice.
"""
import os

from . import _pykernels

if os.environ.get("QCLASS_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

jacobi_eigh = _impl.jacobi_eigh
sym_product_table = _impl.sym_product_table
