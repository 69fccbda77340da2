"""Counting orchestration around the fiber kernels.

The ball count enumerates the center layer k'' over the ellipsoid
|Mt2 k''| <= R^2, reuses fiber counts through the per-slab memo of distinct
|Mt2 k''| values, and counts each fiber's first-layer ellipsoid with the
innermost coordinate as an integer interval (never point by point).

Parallelism partitions the outer ellipsoid into contiguous slabs of its top
coordinate; each slab keeps a private memo and the integer subtotals are
summed, so results are bit-identical for any partition count.
"""

from __future__ import annotations

import dataclasses
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from .. import ratlin
from ..lattices import ReducedSpec
from ..norms import unit_ball_volume, _beta
from . import backend as backend_mod
from . import pykernel
from .plan import KernelPlan, _enum_box_bound, check_count_overflow, plan_ball

_QUANT = 1e-12  # float-mode memo key quantum


@dataclasses.dataclass
class CountResult:
    count: int
    boundary_hits: int
    mode: str
    backend: str
    wall_ms: float
    partitions: int

    def __int__(self):
        return self.count


@dataclasses.dataclass
class CountRecord:
    """One sweep sample: count vs the volume leading term vol(B_1) R^Q / covol."""

    R: float
    count: int
    volume: float
    abs_error: float
    rel_discrepancy: float


def _resolve_backend(plan: KernelPlan, backend: str) -> str:
    if backend == "pure":
        return "pure"
    have = backend_mod.HAVE_COMPILED and not backend_mod.force_pure()
    if backend == "compiled":
        if not have:
            raise RuntimeError("compiled kernel unavailable")
        if not (plan.mode == "float" or plan.compiled_ok):
            raise RuntimeError("plan fails the compiled magnitude guard")
        return "compiled"
    # auto
    if have and (plan.mode == "float" or plan.compiled_ok):
        return "compiled"
    return "pure"


def _outer_top_range(plan: KernelPlan):
    s = plan.outer_bound
    d = float(plan.chol2[plan.m - 1][plan.m - 1])
    t = s / d
    return -int(math.floor(t)) - 1, int(math.floor(t)) + 1


def _outer_points(plan: KernelPlan, top_lo: int, top_hi: int):
    """Yield integer center-layer points k'' with |Mt2 k''| <~ R^2,
    the top coordinate restricted to [top_lo, top_hi]."""
    m = plan.m
    chol = plan.chol2
    s2 = plan.outer_bound**2
    if m == 1:
        d = float(chol[0][0])
        lo = max(top_lo, math.ceil(-plan.outer_bound / d) - 1)
        hi = min(top_hi, math.floor(plan.outer_bound / d) + 1)
        for k in range(lo, hi + 1):
            yield (k,)
        return
    kvals = [0] * m

    def rec(level, res):
        row = chol[level]
        c = 0.0
        for j in range(level + 1, m):
            c += row[j] * kvals[j]
        t = math.sqrt(res) if res > 0 else 0.0
        dll = float(row[level])
        lo = math.ceil((-c - t) / dll) - 1
        hi = math.floor((-c + t) / dll) + 1
        if level == m - 1:
            lo, hi = max(lo, top_lo), min(hi, top_hi)
        for k in range(lo, hi + 1):
            kvals[level] = k
            if level == 0:
                yield tuple(kvals)
            else:
                y = dll * k + c
                yield from rec(level - 1, res - y * y)

    yield from rec(m - 1, s2)


def _w_of(plan: KernelPlan, kpp) -> int:
    p2 = plan.P2
    m = plan.m
    w = 0
    for i in range(m):
        ki = kpp[i]
        if ki:
            row = p2[i]
            w += int(row[i]) * ki * ki
            for j in range(i + 1, m):
                w += 2 * int(row[j]) * ki * kpp[j]
    return w


def _v_of(plan: KernelPlan, kpp) -> float:
    acc = 0.0
    chol = plan.chol2
    m = plan.m
    for i in range(m):
        y = 0.0
        for j in range(i, m):
            y += float(chol[i][j]) * kpp[j]
        acc += y * y
    return acc


def _fiber_rho2_exact(plan: KernelPlan, w: int) -> float:
    vf = w / plan.D2
    sf = plan.ra_num / plan.ra_den
    a = plan.alpha_int
    if a == 2:
        return sf - math.sqrt(vf)
    if a == 4:
        val = sf - vf
        return math.copysign(abs(val) ** 0.5, val)
    if a == 1:
        rho = sf - vf**0.25
        return math.copysign(rho * rho, rho)
    val = sf - vf ** (a / 4)
    return math.copysign(abs(val) ** (2.0 / a), val)


def _fiber_rho2_float(plan: KernelPlan, v: float, R: float) -> float:
    a = plan.alpha
    val = R**a - v ** (a / 4)
    if val < 0:
        return -1.0
    return val ** (2.0 / a)


def _count_slab(args):
    plan, top_lo, top_hi, backend = args
    if plan.mode == "float":
        agg: dict[int, int] = {}
        for kpp in _outer_points(plan, top_lo, top_hi):
            key = round(_v_of(plan, kpp) / _QUANT)
            agg[key] = agg.get(key, 0) + 1
        if not agg:
            return 0, 0
        keys = sorted(agg)
        r_hi = plan.R * (1.0 + plan.tol)
        r_lo = plan.R * (1.0 - plan.tol)
        rho_hi = [_fiber_rho2_float(plan, k * _QUANT, r_hi) for k in keys]
        rho_lo = [_fiber_rho2_float(plan, k * _QUANT, r_lo) for k in keys]
        if backend == "compiled":
            from . import _ckernel

            hi, lo = _ckernel.count_fibers_float(
                np.asarray(plan.chol1, dtype=np.float64),
                np.asarray(rho_hi, dtype=np.float64),
                np.asarray(rho_lo, dtype=np.float64),
            )
        else:
            hi, lo = pykernel.count_fibers_float(plan.chol1, rho_hi, rho_lo)
        total = sum(int(h) * agg[k] for h, k in zip(hi, keys))
        inner = sum(int(l) * agg[k] for l, k in zip(lo, keys))
        return total, total - inner
    # exact modes
    agg2: dict[int, int] = {}
    for kpp in _outer_points(plan, top_lo, top_hi):
        w = _w_of(plan, kpp)
        agg2[w] = agg2.get(w, 0) + 1
    if not agg2:
        return 0, 0
    ws = sorted(agg2)
    rho2 = [_fiber_rho2_exact(plan, w) for w in ws]
    keep = [i for i, r in enumerate(rho2) if r > -1e-3]
    ws_k = [ws[i] for i in keep]
    rho_k = [rho2[i] for i in keep]
    if backend == "compiled":
        from . import _ckernel

        counts = _ckernel.count_fibers_exact(
            np.asarray(plan.P1, dtype=np.int64),
            np.asarray(plan.chol1, dtype=np.float64),
            plan.D1,
            plan.D2,
            plan.ra_num,
            plan.ra_den,
            np.asarray(ws_k, dtype=np.int64),
            np.asarray(rho_k, dtype=np.float64),
            2 if plan.mode == "exact2" else 4,
        )
    else:
        counts = pykernel.count_fibers_exact(plan, ws_k, rho_k)
    return sum(int(c) * agg2[w] for c, w in zip(counts, ws_k)), 0


def run_plan(plan: KernelPlan, *, partitions: int = 1, workers: int = 1, backend: str = "auto"):
    resolved = _resolve_backend(plan, backend)
    top_lo, top_hi = _outer_top_range(plan)
    partitions = max(1, min(partitions, top_hi - top_lo + 1))
    edges = np.linspace(top_lo, top_hi + 1, partitions + 1).astype(int)
    tasks = [
        (plan, int(edges[i]), int(edges[i + 1]) - 1, resolved)
        for i in range(partitions)
        if edges[i] <= edges[i + 1] - 1
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
            parts = list(ex.map(_count_slab, tasks))
    else:
        parts = [_count_slab(t) for t in tasks]
    count = sum(p[0] for p in parts)
    hits = sum(p[1] for p in parts)
    return count, hits, resolved


def unit_volume_of_plan(plan: KernelPlan) -> float:
    """vol(B_1) for the reduced data, from the Cholesky determinants."""
    det1 = float(np.prod(np.diag(plan.chol1)))
    det2 = float(np.prod(np.diag(plan.chol2)))
    q, m, a = plan.q, plan.m, plan.alpha
    return (
        unit_ball_volume(m) * q * unit_ball_volume(q) / a
        * _beta(q / a, 2 * m / a + 1) / (det1 * det2)
    )


def count_ball(
    reduced: ReducedSpec,
    alpha,
    radius=None,
    *,
    radius_pow_alpha=None,
    tol: float = 1e-9,
    backend: str = "auto",
    partitions: int | None = None,
    workers: int = 1,
) -> CountResult:
    """Exact (or toleranced-float) #{k in Z^(q+m) : N_{alpha,Mt}(k) <= R}."""
    t0 = time.perf_counter()
    plan = plan_ball(reduced, alpha, radius, radius_pow_alpha=radius_pow_alpha, tol=tol,
                     backend="auto" if backend == "compiled" else backend)
    check_count_overflow(unit_volume_of_plan(plan), plan.R, plan.q + 2 * plan.m)
    if partitions is None:
        partitions = max(1, workers)
    count, hits, resolved = run_plan(plan, partitions=partitions, workers=workers, backend=backend)
    return CountResult(
        count=count,
        boundary_hits=hits,
        mode=plan.mode,
        backend=resolved,
        wall_ms=(time.perf_counter() - t0) * 1e3,
        partitions=partitions,
    )


def count_ellipsoid(A, rho, *, backend: str = "auto") -> int:
    """Exact #{k in Z^n : |A k| <= rho} for invertible A (exact for rational
    A and rho; floats fall back to the toleranced float kernel with tol 0)."""
    if isinstance(A, np.ndarray) or isinstance(rho, float):
        Af = np.asarray(A, dtype=float)
        if abs(np.linalg.det(Af)) < 1e-300:
            raise ValueError("singular matrix")
        g = Af.T @ Af
        chol = np.linalg.cholesky(g).T.copy()
        r2 = float(rho) ** 2
        hi, _ = pykernel.count_fibers_float(chol, [r2], [r2])
        return int(hi[0])
    Am = ratlin.mat(A)
    if ratlin.det(Am) == 0:
        raise ValueError("singular matrix")
    rr = ratlin.fr(rho)
    if rr < 0:
        raise ValueError("rho must be nonnegative")
    g = ratlin.gram(Am)
    d = ratlin.denominator_lcm(g)
    p = ratlin.scaled_int(g, d)
    thr = (rr * rr * d).__floor__()
    rho2 = float(rr * rr)
    chol = np.linalg.cholesky(ratlin.to_float(g)).T.copy()
    n = len(p)
    pmx = max(abs(x) for row in p for x in row)
    kmax = _enum_box_bound(chol, rho2)
    use_compiled = (
        backend != "pure"
        and backend_mod.HAVE_COMPILED
        and not backend_mod.force_pure()
        and thr < 2**62
        and pmx * (n * kmax) ** 2 < 2**62
    )
    if use_compiled:
        from . import _ckernel

        counts = _ckernel.count_fibers_plain(
            np.asarray(p, dtype=np.int64),
            np.asarray(chol, dtype=np.float64),
            np.asarray([thr], dtype=np.int64),
            np.asarray([rho2], dtype=np.float64),
        )
        return int(counts[0])
    counts = pykernel.count_fibers_plain(p, chol, [thr], [rho2])
    return int(counts[0])
