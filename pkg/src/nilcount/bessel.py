"""Bessel functions J_nu of the first kind, real order nu >= -3/2.

Evaluation strategy by region:
  * ascending power series for r <= max(14, 2|nu|) (fsum keeps the
    alternating sum correctly rounded; the cutoff keeps cancellation ~1e5);
  * half-integer and integer orders beyond the cutoff: closed trig seeds
    (J_{1/2}, J_{3/2}) or Hankel-asymptotic seeds (J_0, J_1) plus upward
    recurrence, stable because the cutoff guarantees r > 2 nu;
  * other real orders beyond the cutoff: the Hankel asymptotic series when
    its smallest term is below target, else backward recurrence normalized
    by (r/2)^nu = sum_k (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(r).

Target accuracy 1e-10 relative (to the envelope near zeros) for
r <= 1e4, nu in [-3/2, 50].
"""

from __future__ import annotations

import math

import numpy as np

_SERIES_CUT = 14.0
_TWO_OVER_PI = 2.0 / math.pi


def _is_near_int(x: float) -> bool:
    return abs(x - round(x)) < 1e-12


def _series(nu: float, r: float):
    """Ascending series with fsum; returns None when alternating cancellation
    would push the error above ~1e-11 of the oscillation envelope."""
    half = 0.5 * r
    t = math.exp(nu * math.log(half) - math.lgamma(nu + 1)) if half > 0 else (1.0 if nu == 0 else 0.0)
    if t == 0.0 and half > 0:  # underflow of the leading term
        return 0.0
    h2 = half * half
    terms = [t]
    peak = abs(t)
    k = 0
    while True:
        k += 1
        t *= -h2 / (k * (nu + k))
        terms.append(t)
        peak = max(peak, abs(t))
        if abs(t) < 1e-18 * peak and k > half:
            break
        if k > 700:
            break
    val = math.fsum(terms)
    env = math.sqrt(_TWO_OVER_PI / r) if r >= 1.0 else 1.0
    if peak > 2e4 * max(abs(val), env) and peak > 1e-280:
        return None
    return val


def _hankel_pq(nu: float, r: float):
    """P, Q of the large-argument expansion, truncated at the smallest term.

    The truncation error in J is sqrt(2/(pi r)) * (smallest term), i.e. the
    smallest term IS the envelope-relative error; None when it exceeds 1e-11
    (callers fall back to Miller).
    """
    mu = 4.0 * nu * nu
    p = 1.0
    q = 0.0
    term = 1.0
    best = (p, q)
    best_abs = 1.0
    for k in range(1, 61):
        term *= (mu - (2 * k - 1) ** 2) / (8.0 * k * r)
        if k % 2 == 1:
            q += term * (-1.0) ** ((k - 1) // 2)
        else:
            p += term * (-1.0) ** (k // 2)
        a = abs(term)
        if a < 1e-16:
            return p, q
        if a < best_abs:
            best_abs = a
            best = (p, q)
        elif a > 4.0 * best_abs:
            break
    return best if best_abs <= 1e-11 else None


def _asymptotic(nu: float, r: float):
    pq = _hankel_pq(nu, r)
    if pq is None:
        return None
    p, q = pq
    w = r - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(_TWO_OVER_PI / r) * (math.cos(w) * p - math.sin(w) * q)


def _recurrence_up(nu: float, r: float) -> float:
    """Upward recurrence from trig/asymptotic seeds; needs r > 2 nu."""
    if _is_near_int(nu):
        jm, j = _asymptotic(0.0, r), _asymptotic(1.0, r)
        order = 1.0
    else:
        c = math.sqrt(_TWO_OVER_PI / r)
        jm = c * math.sin(r)
        j = c * (math.sin(r) / r - math.cos(r))
        order = 1.5
    n_steps = int(round(nu - order))
    if n_steps == -1:
        return jm
    for _ in range(n_steps):
        jm, j = j, (2.0 * order / r) * j - jm
        order += 1.0
    return j


def _miller(nu: float, r: float) -> float:
    """Backward recurrence with the (r/2)^nu Neumann-type normalization.

    The start order must clear 2r + margin: the normalization weights grow
    fast enough that the series only converges beyond twice the argument.
    """
    top = int(2.0 * r + 50.0)
    if top % 2:
        top += 1
    fp = 0.0  # f_{k+1}
    f = 1e-300  # f_k
    # rho_k ratios accumulate downwards, so collect the f_{2k} first
    fs = [0.0] * (top + 1)
    for k in range(top, -1, -1):
        fs[k] = f
        fm = (2.0 * (nu + k) / r) * f - fp
        fp, f = f, fm
        if abs(f) > 1e250:
            f *= 1e-250
            fp *= 1e-250
            for i in range(k, top + 1):
                fs[i] *= 1e-250
    f0 = fs[0]
    rho = 1.0
    s = rho * fs[0]
    for k in range(1, top // 2 + 1):
        if nu == 0.0:
            rho = 2.0  # c_k/c_0 degenerates to 2 for all k >= 1 at nu = 0
        else:
            rho *= ((nu + 2 * k) / (nu + 2 * k - 2)) * ((nu + k - 1) / k)
        s += rho * fs[2 * k]
    t = math.exp(nu * math.log(0.5 * r) - math.lgamma(nu + 1))
    return f0 * t / s


def bessel_j(nu: float, r: float) -> float:
    """J_nu(r) for r >= 0, nu >= -3/2."""
    nu = float(nu)
    r = float(r)
    if r < 0:
        raise ValueError("r must be nonnegative")
    if nu < -1.5 - 1e-12:
        raise ValueError("order below -3/2 is out of the supported range")
    if r == 0.0:
        if nu == 0:
            return 1.0
        if nu > 0 or _is_near_int(nu):
            return 0.0
        raise ValueError("J_nu(0) diverges for negative non-integer nu")
    if nu < 0:
        if _is_near_int(nu):
            n = int(round(-nu))
            return (-1.0) ** n * bessel_j(-nu, r)
        if abs(nu + 0.5) < 1e-12:
            return math.sqrt(_TWO_OVER_PI / r) * math.cos(r)
        if abs(nu + 1.5) < 1e-12:
            return -math.sqrt(_TWO_OVER_PI / r) * (math.cos(r) / r + math.sin(r))
        if r <= _SERIES_CUT:
            val = _series(nu, r)
            if val is not None:
                return val
        # J_{nu} = (2(nu+1)/r) J_{nu+1} - J_{nu+2}, shifting into nu >= 0
        return (2.0 * (nu + 1.0) / r) * bessel_j(nu + 1.0, r) - bessel_j(nu + 2.0, r)
    if r <= max(_SERIES_CUT, 2.0 * nu):
        val = _series(nu, r)
        if val is not None:
            return val
    if _is_near_int(2.0 * nu) and r >= max(_SERIES_CUT, 2.0 * nu):
        return _recurrence_up(nu, r)
    val = _asymptotic(nu, r)
    if val is not None:
        return val
    return _miller(nu, r)


def bessel_j_array(nu: float, r) -> np.ndarray:
    """Elementwise J_nu over an array of nonnegative arguments."""
    rr = np.asarray(r, dtype=float)
    out = np.empty(rr.shape, dtype=float)
    flat_in = rr.ravel()
    flat_out = out.ravel()
    for i in range(flat_in.size):
        flat_out[i] = bessel_j(nu, flat_in[i])
    return out


def bessel_j_limit_coeff(nu: float) -> float:
    """lim_{r->0} J_nu(r) / r^nu = 1 / (2^nu Gamma(nu+1))."""
    return math.exp(-nu * math.log(2.0) - math.lgamma(nu + 1.0))
