"""Kernel backend selection: compiled extension when available, numpy otherwise.

Set PDLAB_PURE=1 to force the numpy lane (useful for benchmarking and for
environments without a compiler). Both lanes share contracts and numerics;
tests compare them directly.
"""

from __future__ import annotations

import os

from . import pure

_FORCE_PURE = os.environ.get("PDLAB_PURE", "") not in ("", "0")

if not _FORCE_PURE:
    try:
        from . import _cykernels as _compiled
    except ImportError:
        _compiled = None
else:
    _compiled = None

BACKEND = "cython" if _compiled is not None else "pure"

dct_denoise = _compiled.dct_denoise if _compiled is not None else pure.dct_denoise

__all__ = ["BACKEND", "dct_denoise", "pure"]
