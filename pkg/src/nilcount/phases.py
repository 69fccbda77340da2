"""Oscillation phases of the one-dimensional ball-transform reductions.

Two families on (0,1), each with a +/- branch:
    phi(r) = l1 r +/- l2 (1 - r^a)^(2/a)
    psi(r) = l2 r +/- l1 (1 - r^(a/2))^(1/a)
with closed-form derivatives through third order, the critical points
r*, R*, r0 = (a-1)^(1/a), R0 = (2-a)^(2/a), grid verification of the
derivative lower bounds in each parameter regime, and a van der Corput
bound checker with c_k = 5 * 2^(k-1) - 2.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .quadrature import integrate
from .spectral import c_alpha


@dataclasses.dataclass(frozen=True)
class PhaseSpec:
    alpha: float
    lambda1: float
    lambda2: float
    sign: int = +1  # +1 or -1
    family: str = "phi"  # 'phi' | 'psi'

    def __post_init__(self):
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("lambda1, lambda2 must be positive")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.family not in ("phi", "psi"):
            raise ValueError("family must be 'phi' or 'psi'")


def phase_eval(spec: PhaseSpec, r, order: int = 0):
    """Value or derivative (order <= 3) of the phase at r in (0,1)."""
    r = np.asarray(r, dtype=float)
    if np.any((r <= 0) | (r >= 1)):
        raise ValueError("phase defined on the open interval (0,1)")
    a = spec.alpha
    s = float(spec.sign)
    if spec.family == "phi":
        l1, l2 = spec.lambda1, spec.lambda2
        ra = r**a
        if order == 0:
            return l1 * r + s * l2 * (1 - ra) ** (2 / a)
        if order == 1:
            return l1 - s * 2 * l2 * (1 - ra) ** (2 / a - 1) * r ** (a - 1)
        if order == 2:
            return -s * 2 * l2 * (1 - ra) ** (2 / a - 2) * r ** (a - 2) * (a - 1 - ra)
        if order == 3:
            bracket = (a - 1 - ra) * (a - 2 + a * ra) - a * (1 - ra) * ra
            return -s * 2 * l2 * (1 - ra) ** (2 / a - 3) * r ** (a - 3) * bracket
    else:
        l1, l2 = spec.lambda1, spec.lambda2
        rh = r ** (a / 2)
        if order == 0:
            return l2 * r + s * l1 * (1 - rh) ** (1 / a)
        if order == 1:
            return l2 - s * 0.5 * l1 * (1 - rh) ** (1 / a - 1) * r ** (a / 2 - 1)
        if order == 2:
            return -s * 0.25 * l1 * (1 - rh) ** (1 / a - 2) * r ** (a / 2 - 2) * (a - 2 + rh)
        if order == 3:
            bracket = (a - 2 + rh) * ((a / 2 - 2) + (a / 2 + 1.5) * rh) + (a / 2) * rh * (1 - rh)
            return -s * 0.25 * l1 * (1 - rh) ** (1 / a - 3) * r ** (a / 2 - 3) * bracket
    raise ValueError("order must be 0..3")


def _bisect(fn, lo, hi, increasing, target, iters=200):
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (fn(mid) > target) == increasing:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _g_phi(alpha):
    return lambda r: (1 - r**alpha) ** (2 / alpha - 1) * r ** (alpha - 1)


def _h_psi(alpha):
    return lambda r: (1 - r ** (alpha / 2)) ** (1 / alpha - 1) * r ** (alpha / 2 - 1)


def stationary_point(alpha: float, family: str) -> float:
    """r0 = (a-1)^(1/a) (phi) or R0 = (2-a)^(2/a) (psi), for 1 < a < 2."""
    if not 1 < alpha < 2:
        raise ValueError("stationary point defined for 1 < alpha < 2")
    if family == "phi":
        return (alpha - 1) ** (1 / alpha)
    return (2 - alpha) ** (2 / alpha)


@dataclasses.dataclass
class CriticalPoints:
    family: str
    r_star: float | None  # root of the first-derivative equation, if any
    r0: float | None  # interior stationary point (1 < alpha < 2 only)
    r0_lo: float | None  # interval around r0 where |third deriv| >= half its r0 value
    r0_hi: float | None
    residual: float  # |g(r_star) - target| / target


def critical_points(spec: PhaseSpec) -> CriticalPoints:
    """Solve the defining equations on their monotone pieces by bisection.

    For alpha outside (1,2), r_star is the unique root of
    g(r) = lambda1/(4 lambda2) (phi) or h(r) = lambda2/lambda1 (psi); absence
    (the equation has no root in (0,1)) is reported as None.  For
    alpha in (1,2) the lemma structure uses r0 and the lambda-free interval
    [r0_lo, r0_hi] on which the third derivative keeps at least half its
    value at r0.
    """
    a = spec.alpha
    eps = 1e-15
    if spec.family == "phi":
        fn = _g_phi(a)
        target = spec.lambda1 / (4 * spec.lambda2)
    else:
        fn = _h_psi(a)
        target = spec.lambda2 / spec.lambda1
    if 1 < a < 2:
        r0 = stationary_point(a, spec.family)
        ref = abs(float(phase_eval(dataclasses.replace(spec, sign=+1), r0, 3)))
        lam_scale = spec.lambda2 if spec.family == "phi" else spec.lambda1
        half = 0.5 * ref / lam_scale

        def third_over_lambda(r):
            return abs(float(phase_eval(dataclasses.replace(spec, sign=+1), r, 3))) / lam_scale

        lo = _scan_crossing(third_over_lambda, r0, 1e-6, half)
        hi = _scan_crossing(third_over_lambda, r0, 1 - 1e-6, half)
        return CriticalPoints(spec.family, None, r0, lo, hi, 0.0)
    increasing = a >= 2  # g and h are both monotone increasing iff alpha >= 2
    flo, fhi = fn(eps), fn(1 - eps)
    span = (min(flo, fhi), max(flo, fhi))
    if not (span[0] < target < span[1]):
        return CriticalPoints(spec.family, None, None, None, None, 0.0)
    r_star = _bisect(fn, eps, 1 - eps, increasing, target)
    residual = abs(fn(r_star) - target) / target
    return CriticalPoints(spec.family, r_star, None, None, None, residual)


def _scan_crossing(fn, start, end, level, steps=4000):
    """March from start toward end; return the last point with fn >= level
    (refined by bisection), or `end` if the level is never crossed."""
    xs = np.linspace(start, end, steps)
    prev = start
    for x in xs[1:]:
        if fn(float(x)) < level:
            lo, hi = prev, float(x)
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if fn(mid) >= level:
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        prev = float(x)
    return end


# ---------------------------------------------------------------------------
# lemma clause verification


@dataclasses.dataclass
class ClauseResult:
    name: str
    region: tuple
    measured: float
    threshold: float
    passed: bool


@dataclasses.dataclass
class PhaseReport:
    alpha: float
    regime: str
    clauses: list
    critical: dict
    d_alpha: float | None  # measured min/lambda for the (iii) clauses
    all_passed: bool

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "regime": self.regime,
            "all_passed": self.all_passed,
            "d_alpha": self.d_alpha,
            "critical": {k: v for k, v in self.critical.items()},
            "clauses": [dataclasses.asdict(c) for c in self.clauses],
        }


def _grid(a: float, b: float, n: int):
    if b - a < 1e-12:
        return None
    return np.linspace(a, b, n + 2)[1:-1]


def _mono_ok(vals: np.ndarray, direction: str, scale: float) -> bool:
    d = np.diff(vals)
    slack = 1e-12 * scale
    return bool(np.all(d <= slack) if direction == "dec" else np.all(d >= -slack))


def verify_phase_lemmas(alpha: float, lambda_pairs, grid_n: int = 10_000) -> list[PhaseReport]:
    """Check every derivative-bound clause for each (lambda1, lambda2).

    Pairs with lambda1 >= C_alpha lambda2 exercise the phi+ dichotomy, the
    rest the psi+ one; the minus-branch bounds hold in both regimes.  The
    stated lambda-multiples (l1/2, l2/2, l2/4, l1, l2) are asserted with zero
    tolerance; the (1,2)-range combined bounds assert positivity and report
    the measured constant.
    """
    out = []
    ca = c_alpha(alpha)
    for lam1, lam2 in lambda_pairs:
        regime = "case-i" if lam1 >= ca * lam2 else "case-ii"
        clauses = []
        crit_info = {}
        d_measured = None
        if regime == "case-i":
            spec = PhaseSpec(alpha, lam1, lam2, +1, "phi")
            cp = critical_points(spec)
            crit_info = dataclasses.asdict(cp)
            dp = lambda r, o: phase_eval(spec, r, o)  # noqa: E731
            if alpha >= 2 or alpha <= 1:
                r_star = cp.r_star
                if r_star is None:
                    r_star = 1.0 if alpha >= 2 else 0.0
                reg1 = (0.0, r_star) if alpha >= 2 else (r_star, 1.0)
                reg2 = (r_star, 1.0) if alpha >= 2 else (0.0, r_star)
                g1 = _grid(*reg1, grid_n)
                if g1 is not None:
                    clauses.append(_clause("phi+' >= l1/2", reg1, np.min(dp(g1, 1)), lam1 / 2))
                g2 = _grid(*reg2, grid_n)
                if g2 is not None:
                    clauses.append(_clause("|phi+''| >= l1/2", reg2, np.min(np.abs(dp(g2, 2))), lam1 / 2))
                gm = _grid(0.0, 1.0, grid_n)
                direction = "dec" if alpha >= 2 else "inc"
                clauses.append(ClauseResult(
                    f"phi+' monotone {direction}", (0.0, 1.0), math.nan, math.nan,
                    _mono_ok(dp(gm, 1), direction, lam1)))
            else:
                r0, lo, hi = cp.r0, cp.r0_lo, cp.r0_hi
                mins = []
                for reg in ((0.0, lo), (hi, 1.0)):
                    g = _grid(*reg, grid_n)
                    if g is not None:
                        mins.append(float(np.min(dp(g, 1))))
                if mins:
                    clauses.append(_clause("phi+' > 0 off [r0',r0'']",
                                           (lo, hi), min(mins), 0.0, strict=True))
                    d_measured = min(mins) / lam1
                g = _grid(lo, hi, grid_n)
                combo = float(np.min(dp(g, 1))) + float(np.min(np.abs(dp(g, 3))))
                clauses.append(_clause("inf phi+' + inf |phi+'''| > 0 on [r0',r0'']",
                                       (lo, hi), combo, 0.0, strict=True))
                d_measured = combo / lam1 if d_measured is None else min(d_measured, combo / lam1)
                gl, gr = _grid(0.0, r0, grid_n), _grid(r0, 1.0, grid_n)
                clauses.append(ClauseResult("phi+' dec on (0,r0)", (0.0, r0), math.nan, math.nan,
                                            _mono_ok(dp(gl, 1), "dec", lam1)))
                clauses.append(ClauseResult("phi+' inc on (r0,1)", (r0, 1.0), math.nan, math.nan,
                                            _mono_ok(dp(gr, 1), "inc", lam1)))
        else:
            spec = PhaseSpec(alpha, lam1, lam2, +1, "psi")
            cp = critical_points(spec)
            crit_info = dataclasses.asdict(cp)
            dp = lambda r, o: phase_eval(spec, r, o)  # noqa: E731
            if alpha >= 2 or alpha <= 1:
                r_star = cp.r_star
                if r_star is None:
                    r_star = 0.0 if alpha >= 2 else 1.0
                reg1 = (0.0, r_star) if alpha >= 2 else (r_star, 1.0)
                reg2 = (r_star, 1.0) if alpha >= 2 else (0.0, r_star)
                g1 = _grid(*reg1, grid_n)
                if g1 is not None:
                    clauses.append(_clause("psi+' >= l2/2", reg1, np.min(dp(g1, 1)), lam2 / 2))
                g2 = _grid(*reg2, grid_n)
                if g2 is not None:
                    clauses.append(_clause("|psi+''| >= l2/4", reg2, np.min(np.abs(dp(g2, 2))), lam2 / 4))
                gm = _grid(0.0, 1.0, grid_n)
                direction = "dec" if alpha >= 2 else "inc"
                clauses.append(ClauseResult(
                    f"psi+' monotone {direction}", (0.0, 1.0), math.nan, math.nan,
                    _mono_ok(dp(gm, 1), direction, lam2)))
            else:
                r0, lo, hi = cp.r0, cp.r0_lo, cp.r0_hi
                mins1 = []
                mins2 = []
                for reg in ((0.0, lo), (hi, 1.0)):
                    g = _grid(*reg, grid_n)
                    if g is not None:
                        mins1.append(float(np.min(np.abs(dp(g, 1)))))
                        mins2.append(float(np.min(np.abs(dp(g, 2)))))
                if mins1:
                    combo_out = min(mins1) + min(mins2)
                    clauses.append(_clause("inf |psi+'| + inf |psi+''| > 0 off [R0',R0'']",
                                           (lo, hi), combo_out, 0.0, strict=True))
                    d_measured = combo_out / lam2
                g = _grid(lo, hi, grid_n)
                combo = float(np.min(np.abs(dp(g, 1)))) + float(np.min(np.abs(dp(g, 3))))
                clauses.append(_clause("inf |psi+'| + inf |psi+'''| > 0 on [R0',R0'']",
                                       (lo, hi), combo, 0.0, strict=True))
                d_measured = combo / lam2 if d_measured is None else min(d_measured, combo / lam2)
                gl, gr = _grid(0.0, r0, grid_n), _grid(r0, 1.0, grid_n)
                clauses.append(ClauseResult("psi+' inc on (0,R0)", (0.0, r0), math.nan, math.nan,
                                            _mono_ok(dp(gl, 1), "inc", lam2)))
                clauses.append(ClauseResult("psi+' dec on (R0,1)", (r0, 1.0), math.nan, math.nan,
                                            _mono_ok(dp(gr, 1), "dec", lam2)))

        # minus-branch bounds hold in every regime
        for fam, lam_ref, label in (("phi", lam1, "phi-' >= l1"), ("psi", lam2, "psi-' >= l2")):
            mspec = PhaseSpec(alpha, lam1, lam2, -1, fam)
            g = _grid(0.0, 1.0, grid_n)
            vals = phase_eval(mspec, g, 1)
            clauses.append(_clause(label, (0.0, 1.0), float(np.min(vals)), lam_ref))
            if 1 < alpha < 2:
                split = stationary_point(alpha, fam)
                pieces = ((0.0, split), (split, 1.0))
            else:
                pieces = ((0.0, 1.0),)
            for lo_, hi_ in pieces:
                gg = _grid(lo_, hi_, grid_n)
                vv = phase_eval(mspec, gg, 1)
                mono = _mono_ok(vv, "inc", lam_ref) or _mono_ok(vv, "dec", lam_ref)
                clauses.append(ClauseResult(f"{fam}-' monotone piece", (lo_, hi_),
                                            math.nan, math.nan, mono))

        out.append(PhaseReport(
            alpha=alpha, regime=regime, clauses=clauses, critical=crit_info,
            d_alpha=d_measured, all_passed=all(c.passed for c in clauses),
        ))
    return out


def _clause(name, region, measured, threshold, strict=False) -> ClauseResult:
    measured = float(measured)
    passed = measured > threshold if strict else measured >= threshold
    return ClauseResult(name, (float(region[0]), float(region[1])), measured,
                        float(threshold), bool(passed))


# ---------------------------------------------------------------------------
# van der Corput


def vdc_constant(k: int) -> float:
    return 5.0 * 2.0 ** (k - 1) - 2.0


@dataclasses.dataclass
class VdcResult:
    lhs: float
    rhs: float
    c_k: float
    lam: float
    k: int
    min_kth: float
    passed: bool


def van_der_corput_check(phase, kth_deriv, psi, dpsi, a: float, b: float, k: int,
                         lam: float, *, dphase=None, grid_n: int = 4000) -> VdcResult:
    """Check |int_a^b e^{i lam phase} psi dr| <= c_k lam^{-1/k} (min(|psi(a)|,|psi(b)|) + int |psi'|).

    Hypotheses are validated on a grid: |phase^(k)| >= 1 on (a,b); for k = 1
    the first derivative must also be monotone (dphase required then).
    """
    if k not in (1, 2, 3):
        raise ValueError("k must be 1, 2 or 3")
    g = np.linspace(a, b, grid_n + 2)[1:-1]
    kth = np.abs(np.asarray(kth_deriv(g), dtype=float))
    min_kth = float(np.min(kth))
    if min_kth < 1.0 - 1e-9:
        raise ValueError(f"hypothesis violated: min |phase^({k})| = {min_kth:.6g} < 1")
    if k == 1:
        if dphase is None:
            raise ValueError("k = 1 requires dphase for the monotonicity hypothesis")
        dp = np.asarray(dphase(g), dtype=float)
        if not (_mono_ok(dp, "inc", np.max(np.abs(dp))) or _mono_ok(dp, "dec", np.max(np.abs(dp)))):
            raise ValueError("hypothesis violated: phase' not monotone on the grid")
        freq_scale = float(np.max(np.abs(dp)))
    else:
        freq_scale = float(np.max(np.abs(np.asarray(dphase(g), dtype=float)))) if dphase else 10.0

    def integrand(r):
        return np.exp(1j * lam * np.asarray(phase(r), dtype=float)) * np.asarray(psi(r), dtype=float)

    val, quad_err = integrate(integrand, a, b, tol=1e-11, max_freq=lam * max(freq_scale, 1.0))
    lhs = abs(val) + quad_err

    def absdpsi(r):
        return np.abs(np.asarray(dpsi(r), dtype=float))

    tv, _ = integrate(absdpsi, a, b, tol=1e-11)
    pa = abs(float(np.asarray(psi(np.array([a + 1e-15 * (b - a)]))).ravel()[0]))
    pb = abs(float(np.asarray(psi(np.array([b - 1e-15 * (b - a)]))).ravel()[0]))
    ck = vdc_constant(k)
    rhs = ck * lam ** (-1.0 / k) * (min(pa, pb) + tv)
    return VdcResult(lhs=float(lhs), rhs=float(rhs), c_k=ck, lam=lam, k=k,
                     min_kth=min_kth, passed=bool(lhs <= rhs))
