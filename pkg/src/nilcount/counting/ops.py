"""Counting operations above the raw kernel: shells, centered balls, averaged
shell statistics, the alpha=2 sharpness probe, and the brute-force oracle."""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

import numpy as np

from .. import groups, lattices, norms, ratlin
from ..groups import GroupElement, GroupSpec
from ..lattices import LatticeSpec, ReducedSpec
from ..norms import NormParams
from .core import CountResult, count_ball


def brute_force_count(reduced: ReducedSpec, alpha, radius=None, *, radius_pow_alpha=None,
                      tol: float = 1e-9) -> int:
    """Independent oracle: box enumeration with per-point membership.

    Exact membership for rational data with alpha = 1 or even; otherwise the
    same relative boundary band the float kernel uses.  Only sized for small
    R (the box is enumerated point by point).
    """
    q, m = reduced.q, reduced.m
    exact = (
        reduced.kind == "exact"
        and not isinstance(alpha, float)
        and ratlin.fr(alpha).denominator == 1
        and (int(ratlin.fr(alpha)) == 1 or int(ratlin.fr(alpha)) % 2 == 0)
        and not isinstance(radius, float)
    )
    m1f = reduced.Mt1_float()
    m2f = reduced.Mt2_float()
    if radius is not None:
        rf = float(radius)
        af = float(alpha)
    else:
        af = float(alpha)
        rf = float(radius_pow_alpha) ** (1 / af)
    b1 = [int(np.linalg.norm(row) * rf) + 1 for row in np.linalg.inv(m1f)]
    b2 = [int(np.linalg.norm(row) * rf * rf) + 1 for row in np.linalg.inv(m2f)]
    total = 0
    if exact:
        aint = int(ratlin.fr(alpha))
        if radius_pow_alpha is not None:
            ra = ratlin.fr(radius_pow_alpha)
        else:
            ra = ratlin.fr(radius) ** aint
        g1 = ratlin.gram(reduced.Mt1)
        g2 = ratlin.gram(reduced.Mt2)
        for kp in itertools.product(*(range(-b, b + 1) for b in b1)):
            kv = ratlin.vec(kp)
            u = ratlin.vdot(kv, ratlin.matvec(g1, kv))
            for kpp in itertools.product(*(range(-b, b + 1) for b in b2)):
                kv2 = ratlin.vec(kpp)
                w = ratlin.vdot(kv2, ratlin.matvec(g2, kv2))
                if norms.contains_exact(aint, u, w, ra):
                    total += 1
        return total
    rhi = rf * (1 + tol)
    for kp in itertools.product(*(range(-b, b + 1) for b in b1)):
        nx = float(np.linalg.norm(m1f @ np.asarray(kp, float)))
        for kpp in itertools.product(*(range(-b, b + 1) for b in b2)):
            nt = float(np.linalg.norm(m2f @ np.asarray(kpp, float)))
            if (nx**af + nt ** (af / 2)) ** (1 / af) <= rhi:
                total += 1
    return total


@dataclasses.dataclass
class ShellResult:
    count: int
    outer: CountResult
    inner: CountResult


def count_shell(reduced: ReducedSpec, alpha, radius, delta, *, debug: bool = False,
                **kw) -> ShellResult:
    """#(B_{R+delta} \\ B_{R-delta}) as the difference of two ball counts."""
    rf, df = float(radius), float(delta)
    if not (0 < df < rf):
        raise ValueError("need 0 < delta < R")
    if isinstance(radius, float) or isinstance(delta, float):
        r_out, r_in = rf + df, rf - df
    else:
        r_out = ratlin.fr(radius) + ratlin.fr(delta)
        r_in = ratlin.fr(radius) - ratlin.fr(delta)
    outer = count_ball(reduced, alpha, r_out, **kw)
    inner = count_ball(reduced, alpha, r_in, **kw)
    shell = outer.count - inner.count
    if debug:
        ref = brute_force_count(reduced, alpha, r_out) - brute_force_count(reduced, alpha, r_in)
        if ref != shell:
            raise AssertionError(f"shell cross-check failed: kernel {shell}, oracle {ref}")
    return ShellResult(count=shell, outer=outer, inner=inner)


def count_lattice_ball(p: NormParams, lat: LatticeSpec, alpha=None, radius=None, **kw) -> CountResult:
    """#(Gamma_L intersect B_R^{alpha,M}) via the reduction Mt = M L."""
    reduced = lattices.reduce(p, lat)
    return count_ball(reduced, p.alpha if alpha is None else alpha, radius, **kw)


def count_ball_centered(
    spec: GroupSpec,
    p: NormParams,
    lat: LatticeSpec,
    radius,
    center: GroupElement,
    *,
    tol: float = 1e-9,
    budget: int = 20_000_000,
    **kw,
) -> CountResult:
    """#(Gamma_L intersect B_R(center)).

    When the lattice is a subgroup and the center is a lattice point, left
    translation by center^-1 permutes Gamma_L and the count equals the
    origin-centered one (computed exactly).  Otherwise falls back to direct
    toleranced enumeration of N(center^-1 o gamma) <= R.
    """
    cert = lattices.is_subgroup(spec, lat)
    coords = lattices.lattice_coords(lat, center)
    if cert.is_subgroup and coords is not None:
        return count_lattice_ball(p, lat, radius=radius, tol=tol, **kw)
    return _centered_direct(spec, p, lat, radius, center, tol=tol, budget=budget)


def _centered_direct(spec, p, lat, radius, center, *, tol, budget):
    import time

    t0 = time.perf_counter()
    rf = float(radius)
    cf = center.to_float()
    m1f, m2f = p.M1_float(), p.M2_float()
    l1f, l2f = lat.L1_float(), lat.L2_float()
    Uf = spec.U_float()
    a = p.alpha_f
    rhi = rf * (1 + tol)
    # k' box: |M1 (L1 k' - xc)| <= R
    inv1 = np.linalg.inv(m1f @ l1f)
    c1 = inv1 @ (m1f @ cf.x)
    rad1 = np.array([np.linalg.norm(row) * rf for row in inv1])
    los = np.ceil(c1 - rad1 - 1e-9).astype(int)
    his = np.floor(c1 + rad1 + 1e-9).astype(int)
    inv2 = np.linalg.inv(m2f @ l2f)
    rad2 = np.array([np.linalg.norm(row) * rf * rf for row in inv2])
    n_outer = int(np.prod(his - los + 1))
    if n_outer <= 0:
        n_outer = 1
    total = 0
    hits = 0
    visited = 0
    for kp in itertools.product(*(range(lo, hi + 1) for lo, hi in zip(los, his))):
        xg = l1f @ np.asarray(kp, float)
        dx = xg - cf.x
        nx = float(np.linalg.norm(m1f @ dx))
        if nx > rhi:
            continue
        # t-shift: t_gamma - tc - 1/2 <U xc, dx>
        shift = cf.t + 0.5 * np.einsum("ljk,k,j->l", Uf, cf.x, dx)
        c2 = inv2 @ (m2f @ shift)
        lo2 = np.ceil(c2 - rad2 - 1e-9).astype(int)
        hi2 = np.floor(c2 + rad2 + 1e-9).astype(int)
        for kpp in itertools.product(*(range(l, h + 1) for l, h in zip(lo2, hi2))):
            visited += 1
            if visited > budget:
                raise RuntimeError(f"centered enumeration exceeded budget {budget}")
            tv = l2f @ np.asarray(kpp, float) - shift
            nt = float(np.linalg.norm(m2f @ tv))
            val = (nx**a + nt ** (a / 2)) ** (1 / a)
            if val <= rhi:
                total += 1
                if abs(val - rf) <= tol * rf:
                    hits += 1
    return CountResult(
        count=total, boundary_hits=hits, mode="float-centered", backend="pure",
        wall_ms=(time.perf_counter() - t0) * 1e3, partitions=1,
    )


def average_shell_count(
    spec: GroupSpec,
    lat: LatticeSpec,
    p: NormParams,
    T,
    radius,
    delta,
    *,
    budget: int = 100_000,
) -> float:
    """T^-Q #{(g1, g2) in Gamma_L(T)^2 : |N(g1^-1 o g2) - R| <= delta}."""
    rf, df, tf = float(radius), float(delta), float(T)
    if tf <= 0 or not (0 < df < rf):
        raise ValueError("need T > 0 and 0 < delta < R")
    pts = [g.to_float() for g in lattices.truncated_lattice(lat, T, budget=budget)]
    n = len(pts)
    if n == 0:
        return 0.0
    X = np.stack([g.x for g in pts])
    Tt = np.stack([g.t for g in pts])
    Uf = spec.U_float()
    m1f, m2f = p.M1_float(), p.M2_float()
    a = p.alpha_f
    total = 0
    for i in range(n):
        dx = X - X[i]
        dt = Tt - Tt[i] - 0.5 * np.einsum("ljk,k,nj->nl", Uf, X[i], dx)
        nx = np.linalg.norm(dx @ m1f.T, axis=1)
        nt = np.linalg.norm(dt @ m2f.T, axis=1)
        vals = (nx**a + nt ** (a / 2)) ** (1 / a)
        total += int(np.count_nonzero(np.abs(vals - rf) <= df))
    return total / tf ** (spec.q + 2 * spec.m)


def delta_scale(reduced: ReducedSpec, c) -> ReducedSpec:
    """Apply the parabolic matrix dilation (c Mt1, c^2 Mt2)."""
    cf = ratlin.fr(c)
    if reduced.kind != "exact":
        raise TypeError("delta_scale needs exact blocks")
    mt1 = tuple(tuple(cf * x for x in row) for row in reduced.Mt1)
    mt2 = tuple(tuple(cf * cf * x for x in row) for row in reduced.Mt2)
    return ReducedSpec(Mt1=mt1, Mt2=mt2)


@dataclasses.dataclass
class SharpnessReport:
    n_max: int
    all_equal: bool
    failures: tuple
    counts: tuple  # count at sqrt(N) for N = 1..n_max
    volume_jumps: tuple  # vol(B_1) ((N + 1/2)^(Q/2) - N^(Q/2))

    def max_jump(self) -> float:
        return max(self.volume_jumps) if self.volume_jumps else 0.0


def sharpness_probe_alpha2(reduced: ReducedSpec, n_max: int, *, workers: int = 1,
                           backend: str = "auto") -> SharpnessReport:
    """Verify count(sqrt(N)) = count(sqrt(N + 1/2)) for N = 1..n_max.

    Needs alpha = 2, m = 1 and integral Mt (rescale with delta_scale first if
    necessary): then the squared norm of every integer point is an integer,
    so no point can land in (N, N + 1/2], while the volume keeps growing --
    the mechanism that pins the discrepancy exponent.
    """
    if reduced.m != 1:
        raise ValueError("sharpness probe needs m = 1")
    if reduced.kind != "exact" or not (
        ratlin.is_integral(reduced.Mt1) and ratlin.is_integral(reduced.Mt2)
    ):
        raise ValueError("sharpness probe needs integral Mt (apply delta_scale)")
    from .core import unit_volume_of_plan
    from .plan import plan_ball

    vol1 = unit_volume_of_plan(plan_ball(reduced, 2, 1))
    Q = reduced.q + 2
    failures = []
    counts = []
    jumps = []
    for n in range(1, n_max + 1):
        c_lo = count_ball(reduced, 2, radius_pow_alpha=n, workers=workers, backend=backend)
        c_hi = count_ball(
            reduced, 2, radius_pow_alpha=Fraction(2 * n + 1, 2), workers=workers, backend=backend
        )
        counts.append(c_lo.count)
        jumps.append(vol1 * ((n + 0.5) ** (Q / 2) - n ** (Q / 2)))
        if c_lo.count != c_hi.count:
            failures.append((n, c_lo.count, c_hi.count))
    return SharpnessReport(
        n_max=n_max,
        all_equal=not failures,
        failures=tuple(failures),
        counts=tuple(counts),
        volume_jumps=tuple(jumps),
    )
