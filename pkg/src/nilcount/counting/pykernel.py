"""Pure-Python counting backend.

Swap-in fallback for the compiled extension: identical function surface,
Python integers instead of int64/int128 (so it also serves the bigint plans
the compiled guard rejects).  Enumeration intervals are seeded from the float
Cholesky factor, widened by whole integers, and the innermost endpoints are
settled by the exact integer predicate, so results are exact regardless of
float rounding.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..norms import contains_exact

_GUARD = 1e-7


def _int_rows(P):
    return [[int(x) for x in row] for row in P]


def _make_pred(plan, w: int):
    """Exact membership predicate u -> bool for one fiber (monotone in u)."""
    a, b, d1, d2 = plan.ra_num, plan.ra_den, plan.D1, plan.D2
    if plan.mode == "exact2":
        c2 = (b * d1) ** 2
        ad1 = a * d1

        def pred(u, _w=w):
            num = ad1 - u * b
            return num >= 0 and _w * c2 <= d2 * num * num

        return pred
    if plan.mode == "exact4":
        bd2 = b * d2
        wb = w * b * d1 * d1
        rhs = a * d1 * d1 * d2

        def pred(u):
            return u * u * bd2 + wb <= rhs

        return pred
    # exact1 / exact_even: bigint Fraction chain shared with ball membership
    ra = Fraction(a, b)
    wf = Fraction(w, d2)
    aint = plan.alpha_int

    def pred(u):
        return contains_exact(aint, Fraction(u, d1), wf, ra)

    return pred


def _count_one_exact(P, chol, n, rho2, pred):
    """#(Z^n) with k^T G k inside the fiber budget, pred deciding exactly."""
    if n == 1:
        return _innermost(P[0][0], 0, 0, chol[0][0], 0.0, rho2, pred)
    sdot0 = [0] * n
    return _rec_exact(P, chol, n, n - 1, sdot0, 0, rho2, [0] * n, pred)


def _rec_exact(P, chol, n, level, sdot, tail, res, kvals, pred):
    if level == 0:
        c0 = 0.0
        row = chol[0]
        for j in range(1, n):
            c0 += row[j] * kvals[j]
        return _innermost(P[0][0], sdot[0], tail, chol[0][0], c0, res, pred)
    c = 0.0
    row = chol[level]
    for j in range(level + 1, n):
        c += row[j] * kvals[j]
    t = math.sqrt(res) if res > 0 else 0.0
    dll = row[level]
    klo = math.ceil((-c - t) / dll) - 1
    khi = math.floor((-c + t) / dll) + 1
    guard = _GUARD * (1.0 + abs(res))
    total = 0
    prow = P[level]
    slevel = sdot[level]
    for k in range(klo, khi + 1):
        y = dll * k + c
        res2 = res - y * y
        if res2 < -guard:
            continue
        kvals[level] = k
        new_sdot = [sdot[j] + P[j][level] * k for j in range(level)]
        new_tail = tail + prow[level] * k * k + 2 * k * slevel
        total += _rec_exact(P, chol, n, level - 1, new_sdot, new_tail, res2, kvals, pred)
    return total


def _innermost(A, B, C, d00, c0, res, pred):
    t = math.sqrt(res) if res > 0 else 0.0
    lo = math.ceil((-c0 - t) / d00) - 2
    hi = math.floor((-c0 + t) / d00) + 2

    def u(k):
        return A * k * k + 2 * B * k + C

    while lo <= hi and not pred(u(lo)):
        lo += 1
    if lo > hi:
        return 0
    while hi > lo and not pred(u(hi)):
        hi -= 1
    while pred(u(lo - 1)):
        lo -= 1
    while pred(u(hi + 1)):
        hi += 1
    return hi - lo + 1


def count_fibers_exact(plan, w_list, rho2_list):
    """Exact fiber counts for unique outer values w = D2 |Mt2 k''|^2."""
    P = _int_rows(plan.P1)
    chol = [list(map(float, row)) for row in plan.chol1]
    n = plan.q
    out = []
    for w, rho2 in zip(w_list, rho2_list):
        out.append(_count_one_exact(P, chol, n, float(rho2), _make_pred(plan, int(w))))
    return out


def count_fibers_plain(P1, chol1, thresholds, rho2_list):
    """Ellipsoid counts #{k : k^T P k <= threshold} (P integer, exact)."""
    P = _int_rows(P1)
    chol = [list(map(float, row)) for row in chol1]
    n = len(P)
    out = []
    for thr, rho2 in zip(thresholds, rho2_list):
        thr = int(thr)
        out.append(_count_one_exact(P, chol, n, float(rho2), lambda u, t=thr: u <= t))
    return out


# ---------------------------------------------------------------------------
# float path: two nested budgets decide inside-with-band and the band tally


def _count_one_float(chol, n, rho2_hi, rho2_lo):
    if rho2_hi < 0:
        return (0, 0)
    return _rec_float(chol, n, n - 1, rho2_hi, rho2_lo, [0] * n)


def _rec_float(chol, n, level, res_hi, res_lo, kvals):
    row = chol[level]
    c = 0.0
    for j in range(level + 1, n):
        c += row[j] * kvals[j]
    dll = row[level]
    if level == 0:
        return (_interval_len(c, dll, res_hi), _interval_len(c, dll, res_lo))
    t = math.sqrt(res_hi) if res_hi > 0 else 0.0
    klo = math.ceil((-c - t) / dll - 1e-9)
    khi = math.floor((-c + t) / dll + 1e-9)
    tot_hi = tot_lo = 0
    for k in range(klo, khi + 1):
        y = dll * k + c
        y2 = y * y
        r2h = res_hi - y2
        if r2h < 0:
            continue
        kvals[level] = k
        h, l = _rec_float(chol, n, level - 1, r2h, res_lo - y2, kvals)
        tot_hi += h
        tot_lo += l
    return tot_hi, tot_lo


def _interval_len(c, dll, res):
    if res < 0:
        return 0
    t = math.sqrt(res)
    lo = math.ceil((-c - t) / dll - 1e-12)
    hi = math.floor((-c + t) / dll + 1e-12)
    return hi - lo + 1 if hi >= lo else 0


def count_fibers_float(chol1, rho2_hi_list, rho2_lo_list):
    chol = [list(map(float, row)) for row in chol1]
    n = len(chol)
    hi_out, lo_out = [], []
    for rh, rl in zip(rho2_hi_list, rho2_lo_list):
        h, l = _count_one_float(chol, n, float(rh), float(rl))
        hi_out.append(h)
        lo_out.append(l)
    return hi_out, lo_out
