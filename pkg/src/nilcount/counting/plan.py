"""Kernel plans: everything the counting backends need, precomputed.

A plan integerizes the Gram data so the hot loops never touch Fractions:
P1 = D1 * Mt1^T Mt1 and P2 = D2 * Mt2^T Mt2 are integer matrices, the
radius enters as the exact rational R^alpha, and per-point membership is an
integer predicate.  Float Cholesky factors seed the enumeration intervals;
only the interval ENDPOINTS are decided exactly.

Modes:
  exact2 / exact4  -- alpha = 2 / 4, rational data (compiled backend eligible)
  exact1           -- alpha = 1, rational data (pure backend, bigint chain)
  exact_even       -- even alpha >= 6, rational data (pure backend)
  float            -- everything else; relative boundary band `tol` counted
                      as inside and tallied
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import numpy as np

from .. import ratlin
from ..lattices import ReducedSpec

INT64_SAFE = 2**62
INT128_SAFE = 2**125


class CountOverflowError(OverflowError):
    pass


@dataclasses.dataclass
class KernelPlan:
    q: int
    m: int
    alpha: float
    mode: str
    alpha_int: int | None
    # exact data (ints; numpy int64 when small enough, python lists otherwise)
    P1: object | None
    D1: int
    P2: object | None
    D2: int
    ra_num: int
    ra_den: int
    # float data
    chol1: np.ndarray
    chol2: np.ndarray
    R: float
    tol: float
    # resolved execution hints
    compiled_ok: bool
    big: bool

    @property
    def outer_bound(self) -> float:
        """|Mt2 k''| <= R^2 for every alpha."""
        return self.R * self.R


def _upper_cholesky(gram_f: np.ndarray) -> np.ndarray:
    """Upper-triangular C with gram = C^T C (numpy gives the lower factor)."""
    return np.linalg.cholesky(gram_f).T.copy()


def _int_matrix(g: ratlin.Mat):
    d = ratlin.denominator_lcm(g)
    p = ratlin.scaled_int(g, d)
    return p, d


def _as_int64_or_list(p):
    mx = max((abs(x) for row in p for x in row), default=0)
    if mx < INT64_SAFE:
        return np.asarray(p, dtype=np.int64), False
    return [list(row) for row in p], True


def plan_ball(
    reduced: ReducedSpec,
    alpha,
    radius=None,
    *,
    radius_pow_alpha=None,
    tol: float = 1e-9,
    backend: str = "auto",
) -> KernelPlan:
    """Build the counting plan for #(Z^(q+m) intersect B_R^{alpha, Mt}).

    `radius` may be Fraction/int/str (exact) or float; `radius_pow_alpha`
    supplies R^alpha directly (e.g. N + 1/2 for R = sqrt(N + 1/2)).
    """
    q, m = reduced.q, reduced.m
    a_int = None
    if not isinstance(alpha, float):
        af = ratlin.fr(alpha)
        if af.denominator == 1:
            a_int = int(af)
    alpha_f = float(alpha)
    if alpha_f <= 0:
        raise ValueError("alpha must be positive")

    exact_radius = radius_pow_alpha is not None or (
        radius is not None and not isinstance(radius, float)
    )
    exactable = (
        reduced.kind == "exact"
        and a_int is not None
        and (a_int == 1 or a_int % 2 == 0)
        and exact_radius
        and backend != "float"
    )

    if exactable:
        if radius_pow_alpha is not None:
            ra = ratlin.fr(radius_pow_alpha)
            if ra <= 0:
                raise ValueError("R^alpha must be positive")
            R_f = float(ra) ** (1.0 / a_int)
        else:
            rad = ratlin.fr(radius)
            if rad <= 0:
                raise ValueError("R must be positive")
            ra = rad**a_int
            R_f = float(rad)
        g1 = ratlin.gram(reduced.Mt1)
        g2 = ratlin.gram(reduced.Mt2)
        p1_raw, d1 = _int_matrix(g1)
        p2_raw, d2 = _int_matrix(g2)
        p1, big1 = _as_int64_or_list(p1_raw)
        p2, big2 = _as_int64_or_list(p2_raw)
        mode = {1: "exact1", 2: "exact2", 4: "exact4"}.get(a_int, "exact_even")
        chol1 = _upper_cholesky(ratlin.to_float(g1))
        chol2 = _upper_cholesky(ratlin.to_float(g2))
        plan = KernelPlan(
            q=q, m=m, alpha=alpha_f, mode=mode, alpha_int=a_int,
            P1=p1, D1=d1, P2=p2, D2=d2,
            ra_num=ra.numerator, ra_den=ra.denominator,
            chol1=chol1, chol2=chol2, R=R_f, tol=tol,
            compiled_ok=False, big=big1 or big2,
        )
        plan.compiled_ok = _compiled_feasible(plan)
        if backend == "compiled" and not plan.compiled_ok:
            raise ValueError("compiled backend cannot run this plan exactly (magnitude guard)")
        return plan

    # float mode
    if radius is not None:
        R_f = float(radius)
    elif radius_pow_alpha is not None:
        R_f = float(radius_pow_alpha) ** (1.0 / alpha_f)
    else:
        raise ValueError("need radius or radius_pow_alpha")
    if R_f <= 0:
        raise ValueError("R must be positive")
    m1f, m2f = reduced.Mt1_float(), reduced.Mt2_float()
    chol1 = _upper_cholesky(m1f.T @ m1f)
    chol2 = _upper_cholesky(m2f.T @ m2f)
    return KernelPlan(
        q=q, m=m, alpha=alpha_f, mode="float", alpha_int=a_int,
        P1=None, D1=1, P2=None, D2=1, ra_num=0, ra_den=1,
        chol1=chol1, chol2=chol2, R=R_f, tol=tol,
        compiled_ok=True, big=False,
    )


def _enum_box_bound(chol: np.ndarray, rho2: float) -> int:
    """Max |k_i| the enumerator can visit for budget rho2 (with margins)."""
    if rho2 <= 0:
        return 2
    dmin = float(np.min(np.diag(chol)))
    return int(math.sqrt(rho2) / dmin) + 3


def _compiled_feasible(plan: KernelPlan) -> bool:
    """Exact worst-case magnitude audit for the int64/int128 compiled path."""
    if plan.big or plan.mode not in ("exact2", "exact4"):
        return False
    rho2_max = plan.R**2 * (1 + 1e-9) + 1
    kmax1 = _enum_box_bound(plan.chol1, rho2_max)
    kmax2 = _enum_box_bound(plan.chol2, plan.outer_bound**2 + 1)
    p1mx = int(np.max(np.abs(plan.P1)))
    p2mx = int(np.max(np.abs(plan.P2)))
    umax = p1mx * (plan.q * kmax1) ** 2
    wmax = p2mx * (plan.m * kmax2) ** 2
    a, b, d1, d2 = plan.ra_num, plan.ra_den, plan.D1, plan.D2
    if plan.mode == "exact2":
        num_max = a * d1 + umax * b
        return (
            num_max < INT64_SAFE
            and d2 * num_max * num_max < INT128_SAFE
            and wmax * (b * d1) ** 2 < INT128_SAFE
        )
    # exact4: u^2 b d2 + w b d1^2 <= a d1^2 d2
    return (
        umax * umax < INT128_SAFE // max(b * d2, 1)
        and wmax * b * d1 * d1 < INT128_SAFE
        and a * d1 * d1 * d2 < INT128_SAFE
        and umax < INT64_SAFE
        and wmax < INT64_SAFE
        and b * d2 < INT64_SAFE
        and d1 * d1 < INT64_SAFE
    )


def predicted_count(vol_unit_ball: float, R: float, Q: int) -> float:
    return vol_unit_ball * R**Q


def check_count_overflow(vol_unit_ball: float, R: float, Q: int):
    """Refuse queries whose count cannot fit a signed 64-bit integer."""
    if predicted_count(vol_unit_ball, R, Q) >= 2**63:
        raise CountOverflowError(
            f"predicted count ~{predicted_count(vol_unit_ball, R, Q):.3e} exceeds 2^63"
        )
