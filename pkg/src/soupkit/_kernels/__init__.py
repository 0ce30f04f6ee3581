"""Kernel backend selection.

The compiled Cython extension is preferred when present; otherwise the
NumPy fallback is used. SOUPKIT_KERNELS forces a choice:

    auto      compiled if available, else python (default)
    compiled  require the extension, raise if missing
    python    always use the NumPy fallback

Both backends are bit-identical, so the choice never affects results,
only speed.
"""

import os

from . import fallback as _py

_choice = os.environ.get("SOUPKIT_KERNELS", "auto")
if _choice not in ("auto", "compiled", "python"):
    raise RuntimeError(
        f"SOUPKIT_KERNELS must be one of auto/compiled/python, got {_choice!r}"
    )

if _choice == "python":
    _impl = _py
else:
    try:
        from . import _fast as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise RuntimeError(
                "SOUPKIT_KERNELS=compiled but the extension is not built"
            ) from None
        _impl = _py

BACKEND: str = "python" if _impl is _py else "compiled"

saxpy = _impl.saxpy
mean_update = _impl.mean_update
affine = _impl.affine
pair_symxent_sum = _impl.pair_symxent_sum
jacobi_eigh = _impl.jacobi_eigh
