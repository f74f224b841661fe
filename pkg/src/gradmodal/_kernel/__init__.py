"""Hot loops of formula evaluation and exhaustive model search.

The compiled backend is used when it was built and ``GRADMODAL_PURE`` is
unset; otherwise the pure-Python one.  Both expose the same functions.
"""

from __future__ import annotations

import os

from . import _pykernel

if os.environ.get("GRADMODAL_PURE"):
    kernel = _pykernel
else:
    try:
        from . import _ckernel as kernel
    except ImportError:  # extension not built
        kernel = _pykernel

BACKEND = kernel.NAME
pykernel = _pykernel


def for_worlds(n: int):
    """Backend able to handle ``n`` worlds."""
    if kernel.MAX_WORLDS is not None and n > kernel.MAX_WORLDS:
        return _pykernel
    return kernel


__all__ = ["kernel", "pykernel", "BACKEND", "for_worlds"]
