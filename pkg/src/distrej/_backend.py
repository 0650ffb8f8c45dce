"""Pick the compiled kernels when available, NumPy otherwise.

Set ``DISTREJ_PURE_PYTHON=1`` before import to force the NumPy path.
"""

import os

from . import _pykernels

kernels = _pykernels
if os.environ.get("DISTREJ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
    except ImportError:  # extension not built
        kernels = _pykernels

BACKEND = kernels.BACKEND


def available_backends():
    """Mapping of backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _kernels
    except ImportError:
        return out
    out["cython"] = _kernels
    return out
