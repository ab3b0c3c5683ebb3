"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``PARETOTAILS_PURE_PYTHON=1`` to force the fallback.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

kernels = _pykernels
BACKEND = "python"

if os.environ.get("PARETOTAILS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        log.debug("compiled kernels unavailable, using numpy fallback")
    else:
        kernels = _ckernels
        BACKEND = "cython"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ('cython', 'python') or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
