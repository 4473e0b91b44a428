"""Kernel backend selection.

Prefers the compiled Cython extension; falls back to the pure-Python
implementation when the extension is absent or COBOTSIM_PURE_KERNELS=1.
Both backends are bit-identical (see benchmarks/bench_kernels.py for the
speed comparison).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("COBOTSIM_PURE_KERNELS") == "1":
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND
admittance_run = _impl.admittance_run
admittance_settle = _impl.admittance_settle
fnv1a64 = _impl.fnv1a64

__all__ = ["BACKEND", "admittance_run", "admittance_settle", "fnv1a64"]
