"""Kernel backend selection.

The compiled extension is preferred when importable; setting the
environment variable ``LATKAM_PURE_PYTHON=1`` forces the pure-Python
fallback (useful for benchmarking and debugging).  Both backends produce
bit-identical results.
"""

import os

if os.environ.get("LATKAM_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND
multiply_terms = _impl.multiply_terms
bracket_terms = _impl.bracket_terms
