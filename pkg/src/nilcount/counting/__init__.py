"""Exact lattice-point counting in homogeneous-norm balls.

The hot fiber kernel has a compiled (Cython) and a pure-Python backend with
identical semantics; `backend.active_backend()` reports which one import
selected.  See `core` for the ball/ellipsoid counters and `ops` for shells,
centered balls, averaged shells and the sharpness probe.
"""

from .backend import HAVE_COMPILED, active_backend
from .core import CountResult, count_ball, count_ellipsoid
from .ops import (
    ShellResult,
    SharpnessReport,
    average_shell_count,
    brute_force_count,
    count_ball_centered,
    count_lattice_ball,
    count_shell,
    delta_scale,
    sharpness_probe_alpha2,
)
from .plan import CountOverflowError

__all__ = [
    "HAVE_COMPILED",
    "active_backend",
    "CountResult",
    "count_ball",
    "count_ellipsoid",
    "ShellResult",
    "SharpnessReport",
    "average_shell_count",
    "brute_force_count",
    "count_ball_centered",
    "count_lattice_ball",
    "count_shell",
    "delta_scale",
    "sharpness_probe_alpha2",
    "CountOverflowError",
]
