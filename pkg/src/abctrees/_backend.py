"""Select the compiled kernels when available, else the pure-Python ones.

Set ``ABC_PURE_PYTHON=1`` to force the Python kernels.
"""
import os

if os.environ.get("ABC_PURE_PYTHON") == "1":
    from . import _pykernels as kernels
else:
    try:
        from . import _kernels as kernels
    except ImportError:  # extension not built
        from . import _pykernels as kernels

from . import _pykernels as py_kernels

BACKEND = kernels.NAME


def compiled_kernels():
    """The compiled module, or None when it was not built."""
    try:
        from . import _kernels
    except ImportError:
        return None
    return _kernels
