"""Bit-kernel backend selection.

The compiled Cython backend is preferred; the pure-numpy fallback is used
when the extension failed to build.  Set RMLAB_BACKEND=numpy or =cython to
force one (forcing cython raises if the extension is missing).
"""
from __future__ import annotations

import os

from . import _pybits

_choice = os.environ.get("RMLAB_BACKEND", "auto").strip().lower() or "auto"
if _choice not in {"auto", "cython", "numpy"}:
    raise ImportError(
        f"RMLAB_BACKEND={_choice!r} not recognized; use 'auto', 'cython', or 'numpy'"
    )

if _choice == "numpy":
    _impl = _pybits
else:
    try:
        from . import _bitsc as _impl  # type: ignore[no-redef]
    except ImportError:
        if _choice == "cython":
            raise
        _impl = _pybits

BACKEND = _impl.BACKEND_NAME

xor_select_rows = _impl.xor_select_rows
popcount_rows = _impl.popcount_rows
score_rows = _impl.score_rows
weight_histogram = _impl.weight_histogram
coset_scan = _impl.coset_scan
syndrome_zero_count = _impl.syndrome_zero_count


def available_backends() -> list[str]:
    """Names of importable backends, preferred first."""
    names = []
    try:
        from . import _bitsc  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    names.append("numpy")
    return names


__all__ = [
    "BACKEND",
    "available_backends",
    "xor_select_rows",
    "popcount_rows",
    "score_rows",
    "weight_histogram",
    "coset_scan",
    "syndrome_zero_count",
]
