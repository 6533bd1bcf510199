"""Kernel backend selection.

Imports the compiled extension when it is available, otherwise falls back to
the pure-Python implementations.  Setting ``BIASAUDIT_PURE_PYTHON=1`` in the
environment forces the fallback (used by the parity tests and the benchmark).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("BIASAUDIT_PURE_PYTHON"):
    _impl = _pure
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND
binom_tail = _impl.binom_tail
scan_phrases = _impl.scan_phrases

__all__ = ["BACKEND", "binom_tail", "scan_phrases"]
