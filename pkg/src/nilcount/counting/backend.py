"""Backend selection: compiled Cython kernel when importable, pure fallback.

NILCOUNT_FORCE_PURE=1 disables the extension globally (the benchmark and the
test matrix use it); per-call `backend=` arguments override in both
directions.
"""

from __future__ import annotations

import os

try:
    from . import _ckernel  # noqa: F401

    HAVE_COMPILED = True
except ImportError:
    HAVE_COMPILED = False


def force_pure() -> bool:
    return os.environ.get("NILCOUNT_FORCE_PURE", "") not in ("", "0")


def active_backend() -> str:
    return "compiled" if (HAVE_COMPILED and not force_pure()) else "pure"
