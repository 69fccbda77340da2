# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled fiber-counting kernels.

Same contract as `pykernel`: float Cholesky data seeds the enumeration
intervals, integer predicates (64/128-bit here) settle the innermost
endpoints exactly.  The plan builder only routes work here after an exact
worst-case magnitude audit, so the 128-bit intermediates cannot overflow.
"""

import numpy as np

from libc.math cimport ceil, floor, sqrt

cdef extern from *:
    ctypedef long long int128 "__int128"

DEF MAXN = 24
DEF GUARD = 1e-7


cdef inline bint pred_exact(int mode, long long u, long long w,
                            long long d1, long long d2,
                            long long ra_num, long long ra_den) noexcept nogil:
    cdef long long num
    cdef int128 lhs, rhs
    if mode == 2:
        num = ra_num * d1 - u * ra_den
        if num < 0:
            return 0
        lhs = <int128> w * (<int128> (ra_den * d1)) * (<int128> (ra_den * d1))
        rhs = <int128> d2 * ((<int128> num) * (<int128> num))
        return lhs <= rhs
    elif mode == 4:
        lhs = (<int128> u) * (<int128> u) * (<int128> (ra_den * d2))
        lhs = lhs + (<int128> w) * (<int128> ra_den) * (<int128> (d1 * d1))
        rhs = (<int128> ra_num) * (<int128> (d1 * d1)) * (<int128> d2)
        return lhs <= rhs
    # mode 0: plain threshold, w carries the bound
    return u <= w


cdef inline long long innermost_exact(long long A, long long B, long long C,
                                      double d00, double c0, double res,
                                      int mode, long long w,
                                      long long d1, long long d2,
                                      long long ra_num, long long ra_den) noexcept nogil:
    cdef double t = sqrt(res) if res > 0 else 0.0
    cdef long long lo = <long long> ceil((-c0 - t) / d00) - 2
    cdef long long hi = <long long> floor((-c0 + t) / d00) + 2
    while lo <= hi and not pred_exact(mode, A * lo * lo + 2 * B * lo + C, w, d1, d2, ra_num, ra_den):
        lo += 1
    if lo > hi:
        return 0
    while hi > lo and not pred_exact(mode, A * hi * hi + 2 * B * hi + C, w, d1, d2, ra_num, ra_den):
        hi -= 1
    while pred_exact(mode, A * (lo - 1) * (lo - 1) + 2 * B * (lo - 1) + C, w, d1, d2, ra_num, ra_den):
        lo -= 1
    while pred_exact(mode, A * (hi + 1) * (hi + 1) + 2 * B * (hi + 1) + C, w, d1, d2, ra_num, ra_den):
        hi += 1
    return hi - lo + 1


cdef long long enum_exact(long long[:, ::1] P, double[:, ::1] chol, int n,
                          double rho2, int mode, long long w,
                          long long d1, long long d2,
                          long long ra_num, long long ra_den) noexcept nogil:
    cdef long long k[MAXN]
    cdef long long khi[MAXN]
    cdef long long tail[MAXN]
    cdef long long sdot[MAXN * MAXN]
    cdef double res[MAXN]
    cdef double cc[MAXN]
    cdef double guard[MAXN]
    cdef long long total = 0, kl, tail_child, b0
    cdef double t, dll, y, res_child, c0
    cdef int level, j

    if n == 1:
        return innermost_exact(P[0, 0], 0, 0, chol[0, 0], 0.0, rho2,
                               mode, w, d1, d2, ra_num, ra_den)

    level = n - 1
    res[level] = rho2
    tail[level] = 0
    for j in range(n):
        sdot[level * MAXN + j] = 0
    cc[level] = 0.0
    guard[level] = GUARD * (1.0 + (res[level] if res[level] > 0 else -res[level]))
    t = sqrt(res[level]) if res[level] > 0 else 0.0
    dll = chol[level, level]
    k[level] = <long long> ceil((-t) / dll) - 2
    khi[level] = <long long> floor(t / dll) + 1

    while True:
        k[level] += 1
        if k[level] > khi[level]:
            level += 1
            if level == n:
                break
            continue
        kl = k[level]
        dll = chol[level, level]
        y = dll * kl + cc[level]
        res_child = res[level] - y * y
        if res_child < -guard[level]:
            continue
        for j in range(level):
            sdot[(level - 1) * MAXN + j] = sdot[level * MAXN + j] + P[j, level] * kl
        tail_child = tail[level] + P[level, level] * kl * kl + 2 * kl * sdot[level * MAXN + level]
        if level == 1:
            c0 = 0.0
            for j in range(1, n):
                c0 += chol[0, j] * k[j]
            b0 = sdot[0 * MAXN + 0]
            total += innermost_exact(P[0, 0], b0, tail_child, chol[0, 0], c0, res_child,
                                     mode, w, d1, d2, ra_num, ra_den)
            continue
        level -= 1
        res[level] = res_child
        tail[level] = tail_child
        guard[level] = GUARD * (1.0 + (res_child if res_child > 0 else -res_child))
        c0 = 0.0
        for j in range(level + 1, n):
            c0 += chol[level, j] * k[j]
        cc[level] = c0
        t = sqrt(res_child) if res_child > 0 else 0.0
        dll = chol[level, level]
        k[level] = <long long> ceil((-c0 - t) / dll) - 2
        khi[level] = <long long> floor((-c0 + t) / dll) + 1
    return total


def count_fibers_exact(long long[:, ::1] P1, double[:, ::1] chol1,
                       long long d1, long long d2,
                       long long ra_num, long long ra_den,
                       long long[::1] w_arr, double[::1] rho2_arr, int alpha_mode):
    cdef int n = P1.shape[0]
    cdef Py_ssize_t nw = w_arr.shape[0], i
    if n > MAXN:
        raise ValueError(f"dimension {n} exceeds compiled kernel limit {MAXN}")
    out = np.empty(nw, dtype=np.int64)
    cdef long long[::1] ov = out
    with nogil:
        for i in range(nw):
            ov[i] = enum_exact(P1, chol1, n, rho2_arr[i], alpha_mode, w_arr[i],
                               d1, d2, ra_num, ra_den)
    return out


def count_fibers_plain(long long[:, ::1] P, double[:, ::1] chol,
                       long long[::1] thresholds, double[::1] rho2_arr):
    cdef int n = P.shape[0]
    cdef Py_ssize_t nw = thresholds.shape[0], i
    if n > MAXN:
        raise ValueError(f"dimension {n} exceeds compiled kernel limit {MAXN}")
    out = np.empty(nw, dtype=np.int64)
    cdef long long[::1] ov = out
    with nogil:
        for i in range(nw):
            ov[i] = enum_exact(P, chol, n, rho2_arr[i], 0, thresholds[i], 1, 1, 0, 1)
    return out


# ---------------------------------------------------------------------------
# float path (two budgets: inside-with-band, strict inner)


cdef inline long long interval_len(double c0, double d00, double res) noexcept nogil:
    cdef double t
    cdef long long lo, hi
    if res < 0:
        return 0
    t = sqrt(res)
    lo = <long long> ceil((-c0 - t) / d00 - 1e-12)
    hi = <long long> floor((-c0 + t) / d00 + 1e-12)
    return hi - lo + 1 if hi >= lo else 0


cdef void enum_float(double[:, ::1] chol, int n, double rho_hi, double rho_lo,
                     long long* out_hi, long long* out_lo) noexcept nogil:
    cdef long long k[MAXN]
    cdef long long khi[MAXN]
    cdef double res_h[MAXN]
    cdef double res_l[MAXN]
    cdef double cc[MAXN]
    cdef long long tot_h = 0, tot_l = 0, kl
    cdef double t, dll, y, y2, rh, c0
    cdef int level, j

    out_hi[0] = 0
    out_lo[0] = 0
    if rho_hi < 0:
        return
    if n == 1:
        out_hi[0] = interval_len(0.0, chol[0, 0], rho_hi)
        out_lo[0] = interval_len(0.0, chol[0, 0], rho_lo)
        return

    level = n - 1
    res_h[level] = rho_hi
    res_l[level] = rho_lo
    cc[level] = 0.0
    t = sqrt(rho_hi) if rho_hi > 0 else 0.0
    dll = chol[level, level]
    k[level] = <long long> ceil((-t) / dll - 1e-9) - 1
    khi[level] = <long long> floor(t / dll + 1e-9)

    while True:
        k[level] += 1
        if k[level] > khi[level]:
            level += 1
            if level == n:
                break
            continue
        kl = k[level]
        dll = chol[level, level]
        y = dll * kl + cc[level]
        y2 = y * y
        rh = res_h[level] - y2
        if rh < 0:
            continue
        if level == 1:
            c0 = 0.0
            for j in range(1, n):
                c0 += chol[0, j] * k[j]
            tot_h += interval_len(c0, chol[0, 0], rh)
            tot_l += interval_len(c0, chol[0, 0], res_l[level] - y2)
            continue
        level -= 1
        res_h[level] = rh
        res_l[level] = res_l[level + 1] - y2
        c0 = 0.0
        for j in range(level + 1, n):
            c0 += chol[level, j] * k[j]
        cc[level] = c0
        t = sqrt(rh) if rh > 0 else 0.0
        dll = chol[level, level]
        k[level] = <long long> ceil((-c0 - t) / dll - 1e-9) - 1
        khi[level] = <long long> floor((-c0 + t) / dll + 1e-9)
    out_hi[0] = tot_h
    out_lo[0] = tot_l


def count_fibers_float(double[:, ::1] chol, double[::1] rho2_hi, double[::1] rho2_lo):
    cdef int n = chol.shape[0]
    cdef Py_ssize_t nw = rho2_hi.shape[0], i
    cdef long long h = 0, l = 0
    if n > MAXN:
        raise ValueError(f"dimension {n} exceeds compiled kernel limit {MAXN}")
    hi_out = np.empty(nw, dtype=np.int64)
    lo_out = np.empty(nw, dtype=np.int64)
    cdef long long[::1] hv = hi_out
    cdef long long[::1] lv = lo_out
    with nogil:
        for i in range(nw):
            enum_float(chol, n, rho2_hi[i], rho2_lo[i], &h, &l)
            hv[i] = h
            lv[i] = l
    return hi_out, lo_out
