"""Kernel backend selection.

The environment variable SOLSPEC_KERNELS picks the implementation:

* ``auto`` (default): compiled extension if importable, else pure Python
* ``native``: compiled extension, ImportError if missing
* ``python``: always the pure-Python kernels

`BACKEND` names the choice that won.  Both backends expose
``tridiag_eigenvalues``, ``sturm_count`` and ``rk4_geodesic`` with
identical semantics.
"""

import os

_mode = os.environ.get("SOLSPEC_KERNELS", "auto").strip().lower()
if _mode not in ("auto", "native", "python"):
    raise ImportError(
        "SOLSPEC_KERNELS must be one of auto, native, python; got %r" % _mode)

if _mode == "python":
    from . import fallback as _impl
elif _mode == "native":
    from . import _native as _impl  # type: ignore[attr-defined]
else:
    try:
        from . import _native as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import fallback as _impl

BACKEND = _impl.BACKEND_NAME
tridiag_eigenvalues = _impl.tridiag_eigenvalues
sturm_count = _impl.sturm_count
rk4_geodesic = _impl.rk4_geodesic

__all__ = ["BACKEND", "tridiag_eigenvalues", "sturm_count", "rk4_geodesic"]
