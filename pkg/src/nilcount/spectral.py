"""Fourier transform of the unit ball indicator and its decay.

The transform of chi_{B_1} at (w, s) depends only on (|w|, |s|) and reduces
to a single integral over (0,1) carrying one or two Bessel factors; two
equivalent reductions exist (integrate the center layer first or the first
layer first) and the auto route picks whichever keeps the singular-frequency
endpoint attached to the smaller frequency.  A tensor-layered quadrature
oracle (no Bessel evaluations at all) provides the independent check, and
decay_fit measures log-log envelope slopes against the predicted exponents.
"""

from __future__ import annotations

import cmath
import dataclasses
import math

import numpy as np

from .bessel import bessel_j_array, bessel_j_limit_coeff
from .envelope import EnvelopeFit, fit_envelope
from .norms import _beta, unit_ball_volume
from .quadrature import integrate


def sigma(alpha: float) -> float:
    """The mixed-frequency decay exponent: 1/3 on 1 < alpha < 2, else 1/2."""
    return 1.0 / 3.0 if 1.0 < alpha < 2.0 else 0.5


def c_alpha(alpha: float) -> float:
    """Route-split constant: 2 (2-a)^(2/a-1) (a-1)^(1-1/a) on (1,2), else 2."""
    if 1.0 < alpha < 2.0:
        return 2.0 * (2.0 - alpha) ** (2.0 / alpha - 1.0) * (alpha - 1.0) ** (1.0 - 1.0 / alpha)
    return 2.0


def unit_ball_norm_volume(alpha: float, q: int, m: int) -> float:
    """vol(B_1) for M = I: w_m q w_q a^-1 B(q/a, 2m/a + 1)."""
    return unit_ball_volume(m) * q * unit_ball_volume(q) / alpha * _beta(q / alpha, 2 * m / alpha + 1)


@dataclasses.dataclass(frozen=True)
class SpectralQuery:
    lambda1: float  # 2 pi |w|
    lambda2: float  # 2 pi |s|
    route: str = "auto"  # auto | first_layer | center


@dataclasses.dataclass
class SpectralSample:
    alpha: float
    q: int
    m: int
    lambda1: float
    lambda2: float
    value: float
    route: str
    quad_error: float

    @property
    def j_normalized(self) -> float:
        c = (2 * math.pi) ** (-(self.q + self.m) / 2)
        return c * self.lambda1 ** (self.q / 2 - 1) * self.lambda2 ** (self.m / 2) * self.value

    @property
    def k_normalized(self) -> float:
        c = (2 * math.pi) ** (-(self.q + self.m) / 2)
        return c * self.lambda1 ** (self.q / 2) * self.lambda2 ** (self.m / 2 - 1) * self.value


def _axis_w(alpha, q, m, lam1, tol):
    """chi-hat(w, 0): single-Bessel reduction with the s -> 0 limit constant."""
    wmag = lam1 / (2 * math.pi)
    pref = 2 * math.pi ** (m / 2 + 1) / math.gamma(m / 2 + 1) * wmag ** (1 - q / 2)
    inner_tol = tol / max(abs(pref), 1.0)
    nu = q / 2 - 1
    split = 0.5 ** (1.0 / alpha)

    def left(r):
        return bessel_j_array(nu, lam1 * r) * r ** (q / 2) * (1 - r**alpha) ** (2 * m / alpha)

    v1, e1 = integrate(left, 0.0, split, tol=inner_tol / 2, max_freq=lam1)

    def right(u):
        r = (1 - u) ** (1 / alpha)
        return (
            bessel_j_array(nu, lam1 * r)
            * r ** (q / 2)
            * u ** (2 * m / alpha)
            * (1 / alpha) * (1 - u) ** (1 / alpha - 1)
        )

    v2, e2 = integrate(right, 0.0, 0.5, tol=inner_tol / 2, max_freq=lam1 / alpha + 1)
    return pref * (v1 + v2), abs(pref) * (e1 + e2)


def _axis_s(alpha, q, m, lam2, tol):
    """chi-hat(0, s): single-Bessel reduction with the w -> 0 limit constant."""
    smag = lam2 / (2 * math.pi)
    pref = 2 * math.pi ** (q / 2 + 1) / math.gamma(q / 2 + 1) * smag ** (1 - m / 2)
    inner_tol = tol / max(abs(pref), 1.0)
    nu = m / 2 - 1
    ah = alpha / 2
    split = 0.5 ** (1.0 / ah)

    def left(r):
        return bessel_j_array(nu, lam2 * r) * r ** (m / 2) * (1 - r**ah) ** (q / alpha)

    v1, e1 = integrate(left, 0.0, split, tol=inner_tol / 2, max_freq=lam2)

    def right(u):
        r = (1 - u) ** (1 / ah)
        return (
            bessel_j_array(nu, lam2 * r)
            * r ** (m / 2)
            * u ** (q / alpha)
            * (1 / ah) * (1 - u) ** (1 / ah - 1)
        )

    v2, e2 = integrate(right, 0.0, 0.5, tol=inner_tol / 2, max_freq=lam2 / ah + 1)
    return pref * (v1 + v2), abs(pref) * (e1 + e2)


def _mixed_first_layer(alpha, q, m, lam1, lam2, tol):
    """First-layer reduction: J_{q/2-1}(l1 r) J_{m/2}(l2 (1-r^a)^(2/a))."""
    wmag = lam1 / (2 * math.pi)
    smag = lam2 / (2 * math.pi)
    pref = 2 * math.pi * wmag ** (1 - q / 2) * smag ** (-m / 2)
    inner_tol = tol / max(abs(pref), 1.0)
    nu1, nu2 = q / 2 - 1, m / 2
    split = 0.5 ** (1.0 / alpha)

    def left(r):
        ra = r**alpha
        return (
            bessel_j_array(nu1, lam1 * r)
            * bessel_j_array(nu2, lam2 * (1 - ra) ** (2 / alpha))
            * r ** (q / 2) * (1 - ra) ** (m / alpha)
        )

    v1, e1 = integrate(left, 0.0, split, tol=inner_tol / 2, max_freq=lam1 + 2 * lam2)

    def right(u):
        r = (1 - u) ** (1 / alpha)
        return (
            bessel_j_array(nu1, lam1 * r)
            * bessel_j_array(nu2, lam2 * u ** (2 / alpha))
            * r ** (q / 2) * u ** (m / alpha)
            * (1 / alpha) * (1 - u) ** (1 / alpha - 1)
        )

    v2, e2 = integrate(right, 0.0, 0.5, tol=inner_tol / 2,
                       max_freq=(lam1 + 2 * lam2) / alpha + 1)
    return pref * (v1 + v2), abs(pref) * (e1 + e2)


def _mixed_center(alpha, q, m, lam1, lam2, tol):
    """Center reduction: J_{m/2-1}(l2 r) J_{q/2}(l1 (1-r^(a/2))^(1/a))."""
    wmag = lam1 / (2 * math.pi)
    smag = lam2 / (2 * math.pi)
    pref = 2 * math.pi * wmag ** (-q / 2) * smag ** (1 - m / 2)
    inner_tol = tol / max(abs(pref), 1.0)
    nu1, nu2 = m / 2 - 1, q / 2
    ah = alpha / 2
    split = 0.5 ** (1.0 / ah)

    def left(r):
        rh = r**ah
        return (
            bessel_j_array(nu1, lam2 * r)
            * bessel_j_array(nu2, lam1 * (1 - rh) ** (1 / alpha))
            * r ** (m / 2) * (1 - rh) ** (q / (2 * alpha))
        )

    v1, e1 = integrate(left, 0.0, split, tol=inner_tol / 2, max_freq=lam2 + lam1)

    def right(u):
        r = (1 - u) ** (1 / ah)
        return (
            bessel_j_array(nu1, lam2 * r)
            * bessel_j_array(nu2, lam1 * u ** (1 / alpha))
            * r ** (m / 2) * u ** (q / (2 * alpha))
            * (1 / ah) * (1 - u) ** (1 / ah - 1)
        )

    v2, e2 = integrate(right, 0.0, 0.5, tol=inner_tol / 2,
                       max_freq=(lam1 + lam2) / ah + 1)
    return pref * (v1 + v2), abs(pref) * (e1 + e2)


def fourier_ball(alpha: float, q: int, m: int, query, lambda2=None, *,
                 route: str = None, tol: float = 1e-10) -> SpectralSample:
    """chi-hat_{B_1^alpha}(w, s) for M = I, from (lambda1, lambda2) = 2 pi (|w|, |s|).

    Accepts a SpectralQuery or two nonnegative floats.  The zero-frequency
    value is the ball volume; single-zero frequencies use the axis limit
    formulas; the mixed evaluation picks the reduction per the route.
    """
    if isinstance(query, SpectralQuery):
        lam1, lam2, rt = query.lambda1, query.lambda2, query.route
    else:
        lam1, lam2, rt = float(query), float(lambda2), route or "auto"
    if route is not None:
        rt = route
    alpha = float(alpha)
    if lam1 < 0 or lam2 < 0 or alpha <= 0:
        raise ValueError("need nonnegative frequencies and positive alpha")
    if lam1 == 0 and lam2 == 0:
        return SpectralSample(alpha, q, m, 0.0, 0.0,
                              unit_ball_norm_volume(alpha, q, m), "volume", 0.0)
    if lam2 == 0:
        val, err = _axis_w(alpha, q, m, lam1, tol)
        return SpectralSample(alpha, q, m, lam1, 0.0, val, "w-axis", err)
    if lam1 == 0:
        val, err = _axis_s(alpha, q, m, lam2, tol)
        return SpectralSample(alpha, q, m, 0.0, lam2, val, "s-axis", err)
    if rt == "auto":
        rt = "first_layer" if lam1 >= c_alpha(alpha) * lam2 else "center"
    if rt == "first_layer":
        val, err = _mixed_first_layer(alpha, q, m, lam1, lam2, tol)
    elif rt == "center":
        val, err = _mixed_center(alpha, q, m, lam1, lam2, tol)
    else:
        raise ValueError(f"unknown route {rt!r}")
    return SpectralSample(alpha, q, m, lam1, lam2, val, rt, err)


def fourier_scaled(p, w, s, *, route: str = None, tol: float = 1e-10) -> SpectralSample:
    """chi-hat of the M-ball: |det M|^-1 chi-hat_{B_1}((M1^-T) w, (M2^-T) s)."""
    m1f, m2f = p.M1_float(), p.M2_float()
    wv = np.atleast_1d(np.asarray(w, dtype=float))
    sv = np.atleast_1d(np.asarray(s, dtype=float))
    wt = np.linalg.solve(m1f.T, wv) if wv.size else wv
    st = np.linalg.solve(m2f.T, sv)
    lam1 = 2 * math.pi * float(np.linalg.norm(wt))
    lam2 = 2 * math.pi * float(np.linalg.norm(st))
    base = fourier_ball(p.alpha_f, p.q, p.m, lam1, lam2, route=route, tol=tol)
    det = p.det_abs()
    return dataclasses.replace(base, value=base.value / det, quad_error=base.quad_error / det)


def fourier_scaled_at_radius(p, R: float, w, s, **kw) -> SpectralSample:
    """Dilation identity: chi-hat_{B_R}(w, s) = R^Q chi-hat_{B_1}(R w, R^2 s)."""
    R = float(R)
    wv = np.asarray(w, dtype=float) * R
    sv = np.asarray(s, dtype=float) * R * R
    base = fourier_scaled(p, wv, sv, **kw)
    scale = R**p.Q
    return dataclasses.replace(base, value=base.value * scale,
                               quad_error=base.quad_error * scale)


# ---------------------------------------------------------------------------
# independent oracle: layered tensor quadrature, no Bessel routines anywhere


def _t_layer(m, smag, h):
    """Integral of e^{-2 pi i s.t} over the m-ball |t| <= h (vectorized in h)."""
    h = np.asarray(h, dtype=float)
    if smag == 0:
        return unit_ball_volume(m) * h**m + 0j
    a = 2 * math.pi * smag
    if m == 1:
        return np.sin(a * h) / (math.pi * smag) + 0j
    if m == 3:
        ah = a * h
        return (2 / smag) * (np.sin(ah) - ah * np.cos(ah)) / a**2 + 0j
    # m = 2: angular trapezoid (spectrally accurate), radial Gauss-Legendre
    nodes, weights = np.polynomial.legendre.leggauss(48)
    theta = np.linspace(0.0, 2 * math.pi, 257)[:-1]
    out = np.empty(h.shape, dtype=complex)
    for i, hh in np.ndenumerate(h):
        rho = 0.5 * hh * (nodes + 1.0)
        ang = np.exp(-1j * a * rho[:, None] * np.cos(theta)[None, :]).mean(axis=1)
        out[i] = 2 * math.pi * 0.5 * hh * np.sum(weights * rho * ang)
    return out


def _x_angular(q, wmag, r):
    """Integral of e^{-2 pi i w.x} over the sphere of radius r in R^q
    (surface measure), vectorized in r; trapezoid / Gauss in the angle."""
    r = np.asarray(r, dtype=float)
    z = 2 * math.pi * wmag * r
    if q == 2:
        theta = np.linspace(0.0, 2 * math.pi, 257)[:-1]
        ang = np.exp(-1j * z[:, None] * np.cos(theta)[None, :]).mean(axis=1)
        return 2 * math.pi * r * ang
    # q = 3: Gauss-Legendre in mu = cos(theta)
    nodes, weights = np.polynomial.legendre.leggauss(64)
    ang = np.exp(-1j * z[:, None] * nodes[None, :]) @ weights
    return 2 * math.pi * r**2 * ang


def fourier_oracle(alpha: float, q: int, m: int, w, s, *, n_base: int = 2048):
    """Direct layered quadrature of the ball transform; returns (value, err).

    Composite Simpson in the radial x-variable, refined once for the error
    bar.  Supports q in {2, 3}, m in {1, 2, 3} and moderate frequencies
    (|w|, |s| <= 20); everything else exceeds the oracle's budget.
    """
    if q not in (2, 3) or m not in (1, 2, 3):
        raise ValueError("oracle supports q in {2,3}, m in {1,2,3}")
    wmag = float(np.linalg.norm(np.atleast_1d(np.asarray(w, dtype=float))))
    smag = float(np.linalg.norm(np.atleast_1d(np.asarray(s, dtype=float))))
    if wmag > 20 or smag > 20:
        raise ValueError("oracle budget: |w|, |s| <= 20")

    def value(n):
        r = np.linspace(0.0, 1.0, n + 1)
        h = (1 - r**alpha) ** (2 / alpha)
        h[-1] = 0.0
        f = _x_angular(q, wmag, r) * _t_layer(m, smag, h)
        weights = np.ones(n + 1)
        weights[1:-1:2] = 4.0
        weights[2:-1:2] = 2.0
        return (1.0 / (3 * n)) * np.sum(weights * f)

    v1 = value(n_base)
    v2 = value(2 * n_base)
    err = abs(v2 - v1) / 15 + 1e-12
    return complex(v2), float(err)


# ---------------------------------------------------------------------------
# decay fits


@dataclasses.dataclass
class DecayFit:
    ray: str
    fit: EnvelopeFit
    predicted: float
    case: str
    lambdas: tuple
    values: tuple

    def to_json(self) -> dict:
        return {
            "ray": self.ray,
            "slope": self.fit.slope,
            "predicted": self.predicted,
            "case": self.case,
            "n_windows": self.fit.n_windows,
            "flagged": self.fit.flagged,
        }


def _is_multiple_of(alpha: float, base: int) -> bool:
    k = alpha / base
    return abs(k - round(k)) < 1e-12 and round(k) >= 1


def predicted_axis_exponent(alpha: float, q: int, m: int, ray: str):
    """The proven envelope exponent and which clause produced it."""
    if ray == "w-axis":
        improved = -(q + 1) / 2 - 2 * m / alpha
        if _is_multiple_of(alpha, 2):
            return improved, "even-alpha (improved)"
        if q < 4 * m / alpha - 2 * alpha + 1:
            return -(q + alpha), "steep (q below threshold)"
        return improved, "generic"
    if ray == "s-axis":
        improved = -(m + 1) / 2 - q / alpha
        if _is_multiple_of(alpha, 4):
            return improved, "alpha in 4N (improved)"
        if q > (m + alpha - 1) * alpha / 2:
            return -(m + alpha / 2), "large-q"
        return improved, "generic"
    # fixed-ratio ray: |w|^(-q/2) |s|^(-m/2) |(w,s)|^(-sigma)
    return -(q + m) / 2 - sigma(alpha), f"mixed (sigma={sigma(alpha):g})"


def decay_fit(alpha: float, q: int, m: int, ray: str, lambda_grid, *,
              ratio: float = 1.0, route: str = None, tol: float = 1e-10) -> DecayFit:
    """Envelope slope of |chi-hat| along a ray vs the predicted exponent.

    Grid must span at least 1.5 decades (the envelope needs >= 8 windows of
    real content to mean anything).
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid[-1] / grid[0] < 10**1.5:
        raise ValueError("lambda grid must span at least 1.5 decades")
    vals = []
    for lam in grid:
        if ray == "w-axis":
            smp = fourier_ball(alpha, q, m, lam, 0.0, tol=tol)
        elif ray == "s-axis":
            smp = fourier_ball(alpha, q, m, 0.0, lam, tol=tol)
        elif ray == "fixed-ratio":
            smp = fourier_ball(alpha, q, m, lam, ratio * lam, route=route, tol=tol)
        else:
            raise ValueError(f"unknown ray {ray!r}")
        vals.append(abs(smp.value))
    fit = fit_envelope(grid, vals)
    predicted, case = predicted_axis_exponent(alpha, q, m, ray)
    return DecayFit(ray=ray, fit=fit, predicted=predicted, case=case,
                    lambdas=tuple(map(float, grid)), values=tuple(vals))
