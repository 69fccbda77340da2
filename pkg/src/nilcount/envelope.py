"""Log-log envelope slope fitting on dyadic-style windows.

Oscillating magnitudes (transforms through their zeros, count errors through
sign changes) make raw log-log fits meaningless; the fit runs on per-window
maxima instead.  Windows are geometric with ratio min(2, span^(1/8)), so at
least 8 windows cover the grid while staying dyadic whenever the span allows.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

NEG_INF_SLOPE = float("-inf")


@dataclasses.dataclass
class EnvelopeFit:
    slope: float
    intercept: float
    window_x: tuple  # abscissa of each window's max
    window_y: tuple
    n_windows: int
    flagged: str | None = None  # set when the fit is degenerate

    def to_json(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "n_windows": self.n_windows,
            "window_x": list(self.window_x),
            "window_y": list(self.window_y),
            "flagged": self.flagged,
        }


def envelope_windows(xs, ys, min_windows: int = 8):
    """Per-window (argmax_x, max_y) over geometric windows of xs."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size != ys.size or xs.size == 0:
        raise ValueError("mismatched or empty envelope input")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("abscissae must be strictly increasing")
    span = xs[-1] / xs[0]
    if span <= 1:
        return [(float(xs[0]), float(np.max(np.abs(ys))))]
    n_win = max(min_windows, int(math.ceil(math.log2(span))))
    edges = np.geomspace(xs[0], xs[-1], n_win + 1)
    edges[-1] *= 1 + 1e-12
    out = []
    for i in range(n_win):
        mask = (xs >= edges[i]) & (xs < edges[i + 1])
        if not np.any(mask):
            continue
        sub = np.abs(ys[mask])
        j = int(np.argmax(sub))
        out.append((float(xs[mask][j]), float(sub[j])))
    return out


def fit_envelope(xs, ys, min_windows: int = 8) -> EnvelopeFit:
    """OLS slope of log(window max |y|) against log(window x)."""
    pts = envelope_windows(xs, ys, min_windows)
    if len(pts) < 2:
        return EnvelopeFit(
            slope=float("nan"), intercept=float("nan"),
            window_x=tuple(p[0] for p in pts), window_y=tuple(p[1] for p in pts),
            n_windows=len(pts), flagged="fewer than 2 windows: slope undefined",
        )
    wx = np.array([p[0] for p in pts])
    wy = np.array([p[1] for p in pts])
    if np.all(wy == 0):
        return EnvelopeFit(
            slope=NEG_INF_SLOPE, intercept=NEG_INF_SLOPE,
            window_x=tuple(wx), window_y=tuple(wy),
            n_windows=len(pts), flagged="identically zero input",
        )
    keep = wy > 0
    if np.count_nonzero(keep) < 2:
        return EnvelopeFit(
            slope=float("nan"), intercept=float("nan"),
            window_x=tuple(wx), window_y=tuple(wy),
            n_windows=len(pts), flagged="fewer than 2 nonzero windows",
        )
    lx, ly = np.log(wx[keep]), np.log(wy[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    return EnvelopeFit(
        slope=float(slope), intercept=float(intercept),
        window_x=tuple(wx), window_y=tuple(wy), n_windows=len(pts),
    )
