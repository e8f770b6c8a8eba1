"""Kernel backend selection.

The compiled extension is preferred; the pure-numpy implementation is used
when the extension is missing or when ``NEARLIFT_PURE_PYTHON=1`` is set.
Both expose ``miller_rows`` / ``miller_start_order`` / ``BACKEND``.
"""

import os

if os.environ.get("NEARLIFT_PURE_PYTHON") == "1":
    from . import _miller_py as _impl
else:
    try:
        from . import _miller as _impl
    except ImportError:
        from . import _miller_py as _impl

miller_rows = _impl.miller_rows
miller_start_order = _impl.miller_start_order


def backend_name():
    """Either ``"compiled"`` or ``"python"``."""
    return _impl.BACKEND
