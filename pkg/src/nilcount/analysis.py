"""Discrepancy experiments: predicted exponents, count sweeps with envelope
slope fits, and the truncated dual-lattice (Poisson) estimator."""

from __future__ import annotations

import dataclasses
import math
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import numpy as np

from . import lattices, spectral
from .counting.core import count_ball, unit_volume_of_plan
from .counting.plan import plan_ball
from .envelope import EnvelopeFit, fit_envelope
from .lattices import LatticeSpec, ReducedSpec
from .norms import NormParams
from .spectral import sigma


@dataclasses.dataclass(frozen=True)
class ExponentTable:
    q: int
    m: int
    alpha: float
    sigma: float
    beta1: float
    beta2: float
    gamma1: float
    gamma2: float
    case: str
    candidates: tuple  # every applicable (case, gamma1, gamma2)

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["candidates"] = [list(c) for c in self.candidates]
        return d


def _close(x, y):
    return abs(x - y) < 1e-12


def predicted_exponents(q: int, m: int, alpha: float) -> ExponentTable:
    """Predicted relative-discrepancy bound P(R) <~ R^-gamma1 log^gamma2 R.

    Every clause whose hypotheses hold contributes a candidate; conditions
    overlap with different results, and the best bound (largest gamma1, then
    smallest gamma2) wins.
    """
    if q < 2 or m < 1 or alpha <= 0:
        raise ValueError("need q >= 2, m >= 1, alpha > 0")
    a = float(alpha)
    Q = q + 2 * m
    sig = sigma(a)
    cands: list[tuple[str, float, float]] = []
    if a >= 1:
        thr = 4 * m / a + 1
        if q / 2 + 1 >= a >= 3 - m:
            g1 = min(thr, m + 2 * sig, 2.0)
            g2 = 1.0 if (q == 2 and _close(thr, 2.0)) else 0.0
            cands.append(("thm1.i", g1, g2))
        if a > q / 2 + 1 and q <= thr + 1e-12:
            g2 = 0.0
            if m == 1 and q < thr - 1e-12:
                g2 += 2.0 / (Q + 4)
            if q == 2 and _close(thr, 2.0):
                g2 += 1.0
            cands.append(("thm1.ii", 2.0, g2))
        if a > q / 2 + 1 and q > thr + 1e-12:
            g1 = min(2 * q * a / (q * a + a - 4 * m), 2.0)
            g2 = 2.0 / Q if (a < 4 * m and m == 1) else 0.0
            cands.append(("thm1.iii", g1, g2))
        if _close(a, 1.0) and m == 1:
            cands.append(("thm1.iv", 2.0, 2.0 / (q + 2)))
        if 1 < a < 2 and m == 1:
            cands.append(("thm1.v", (6 * q + 14) / (3 * q + 10), 0.0))
    if 0 < a <= 1 and m >= 2:
        g1 = 2 * Q * a / (Q + 2 * a - 3 + (1 if m == 2 else 0))
        cands.append(("thm2", g1, 0.0))
    if m == 1:
        if q == 2:
            cands.append(("thm3.q2", 4.0 / 3.0, 0.0))
        elif q == 3:
            cands.append(("thm3.q3", 243.0 / 158.0, 0.0))
        elif q == 4:
            cands.append(("thm3.q4", 2.0, 1.0))
        else:
            cands.append(("thm3.q5plus", 2.0, 0.0))
    if not cands:
        raise ValueError(f"no clause covers (q={q}, m={m}, alpha={alpha})")
    case, g1, g2 = max(cands, key=lambda c: (c[1], -c[2]))
    beta1 = q / 2 + 0.5 * min(q + 2 * a, 4 * m / a + 1)
    beta2 = m / 2 + 0.5 * min(m + a, 2 * q / a + 1)
    return ExponentTable(q=q, m=m, alpha=a, sigma=sig, beta1=beta1, beta2=beta2,
                         gamma1=g1, gamma2=g2, case=case, candidates=tuple(cands))


def shell_exponents(q: int, m: int, alpha: float) -> tuple[float, float]:
    """(gamma1, gamma2) entering the shell bound max(R^(Q-1) d, R^(Q-g1) log^g2 R)."""
    t = predicted_exponents(q, m, alpha)
    return t.gamma1, t.gamma2


# ---------------------------------------------------------------------------
# sweeps


def dyadic_radii(rmin: float, rmax: float, n: int) -> list[Fraction]:
    """Geometric radii snapped to multiples of 1/32.

    Exact small-denominator radii keep the alpha = 2/4 kernels on the
    64/128-bit fast path; the snap is statistically irrelevant for slope fits.
    """
    vals = np.geomspace(float(rmin), float(rmax), n)
    out = []
    seen = set()
    for v in vals:
        f = Fraction(round(v * 32), 32)
        if f not in seen:
            seen.add(f)
            out.append(f)
    return out


@dataclasses.dataclass
class SweepResult:
    records: list  # counting.core.CountRecord
    fit: EnvelopeFit | None
    predicted: ExponentTable | None

    def to_json(self) -> dict:
        return {
            "records": [dataclasses.asdict(r) for r in self.records],
            "fit": self.fit.to_json() if self.fit else None,
            "predicted": self.predicted.to_json() if self.predicted else None,
        }


def _sweep_one(args):
    reduced, alpha, radius, backend = args
    return count_ball(reduced, alpha, radius, backend=backend).count


def sweep(p: NormParams, lat: LatticeSpec, radii, *, workers: int = 1,
          backend: str = "auto", fit: bool = True) -> SweepResult:
    """CountRecords over increasing radii plus the envelope slope of the
    absolute error |count - vol(B_1) R^Q / covol|."""
    from .counting.core import CountRecord

    rf = [float(r) for r in radii]
    if any(b <= a for a, b in zip(rf, rf[1:])):
        raise ValueError("radii must be strictly increasing")
    reduced = lattices.reduce(p, lat)
    vol_unit = unit_volume_of_plan(plan_ball(reduced, p.alpha, radii[0]))
    tasks = [(reduced, p.alpha, r, backend) for r in radii]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            counts = list(ex.map(_sweep_one, tasks))
    else:
        counts = [_sweep_one(t) for t in tasks]
    records = []
    for r, c in zip(rf, counts):
        vol = vol_unit * r ** p.Q
        abs_err = abs(c - vol)
        records.append(CountRecord(R=r, count=c, volume=vol, abs_error=abs_err,
                                   rel_discrepancy=abs_err / vol))
    table = None
    env = None
    if fit:
        try:
            table = predicted_exponents(p.q, p.m, p.alpha_f)
        except ValueError:
            table = None
        if len(records) > 1:
            env = fit_envelope(rf, [r.abs_error for r in records])
        else:
            env = EnvelopeFit(slope=float("nan"), intercept=float("nan"), window_x=(),
                              window_y=(), n_windows=0,
                              flagged="degenerate sweep (single radius)")
    return SweepResult(records=records, fit=env, predicted=table)


# ---------------------------------------------------------------------------
# truncated dual-sum (Poisson) estimator


class PoissonTruncationError(RuntimeError):
    pass


def _e_factor(eta1: float, eta2: float, eps: float) -> float:
    """The epsilon envelope: eps^-(eta1-eta2) / log(1/eps) / 1 by sign."""
    if eta1 > eta2:
        return eps ** -(eta1 - eta2)
    if eta1 == eta2:
        return math.log(1.0 / eps)
    return 1.0


@dataclasses.dataclass
class PoissonReport:
    R: float
    eps: float
    N: int
    cap1: int
    cap2: int
    s1: float
    s2: float
    s3: float
    volume_term: float
    combined: float
    envelope1: float
    envelope2: float
    envelope3: float
    tails: tuple
    n_quadrature: int
    n_envelope: int

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


def _layer_points(mat_inv_t: np.ndarray, cap: int, dim: int):
    """All nonzero integer points with |k| <= cap: (euclid |k|, transformed |k|)."""
    rng = np.arange(-cap, cap + 1)
    grids = np.meshgrid(*([rng] * dim), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1).astype(float)
    norms = np.linalg.norm(pts, axis=1)
    keep = (norms > 0) & (norms <= cap)
    pts = pts[keep]
    norms = norms[keep]
    transformed = np.linalg.norm(pts @ mat_inv_t.T, axis=1)
    return norms, transformed


_QUAD_LAMBDA_MAX = 600.0


def _chi_values(alpha, q, m, lam1_arr, lam2_arr, vol_i, memo):
    """|chi-hat_{B_1^alpha}| at unit-ball frequencies: quadrature below the
    frequency threshold, proven decay envelopes (constant vol(B_1)) above."""
    l1 = np.asarray(lam1_arr, dtype=float)
    l2 = np.asarray(lam2_arr, dtype=float)
    pw, _ = spectral.predicted_axis_exponent(alpha, q, m, "w-axis")
    ps, _ = spectral.predicted_axis_exponent(alpha, q, m, "s-axis")
    sig = sigma(alpha)
    improved = (3 - m) <= alpha <= (q / 2 + 1)
    wmag, smag = l1 / (2 * math.pi), l2 / (2 * math.pi)
    wm = np.maximum(wmag, 1e-300)
    sm = np.maximum(smag, 1e-300)
    if improved:
        mixed = (vol_i * wm ** (-(q - 1) / 2) * sm ** (-m / 2)
                 * np.hypot(wm, sm) ** (-sig - 0.5))
    else:
        mixed = vol_i * wm ** (-q / 2) * sm ** (-m / 2) * np.hypot(wm, sm) ** (-sig)
    out = np.where(
        smag == 0, vol_i * (1 + wmag) ** pw,
        np.where(wmag == 0, vol_i * (1 + smag) ** ps, mixed),
    )
    quad_idx = np.nonzero((np.maximum(l1, l2) <= _QUAD_LAMBDA_MAX).ravel())[0]
    for i in quad_idx:
        a, b = float(l1.flat[i]), float(l2.flat[i])
        key = (round(a, 9), round(b, 9))
        if key not in memo:
            memo[key] = abs(spectral.fourier_ball(alpha, q, m, a, b, tol=1e-9).value)
        out.flat[i] = memo[key]
    return out, int(quad_idx.size)


def poisson_estimate(p: NormParams, lat: LatticeSpec, R: float, eps: float = None, *,
                     N: int = None, cap1: int = None, cap2: int = None) -> PoissonReport:
    """Dual-sum pieces S1 (k'' = 0), S2 (k' = 0), S3 (both nonzero) with the
    weight (1 + eps|k'| + eps^2|k''|)^-N, normalized by vol(B_1^{alpha,Mt}).

    Terms use quadrature values of the transform below a frequency threshold
    and the proven decay envelopes above it, so the output is an envelope
    estimate (absolute constants uncalibrated).  Analytic tail estimates
    guard the truncation caps: a tail above 10% of its head raises.
    """
    q, m, alpha = p.q, p.m, p.alpha_f
    Rf = float(R)
    if eps is None:
        eps = 1.0 / Rf
    if not 0 < eps < 1:
        raise ValueError("need eps in (0,1)")
    if N is None:
        N = q + m + 1
    if cap1 is None:
        cap1 = min(int(6.0 / eps), 400 if q <= 3 else 40)
    if cap2 is None:
        cap2 = min(int(3.0 / eps**2), 6000 if m == 1 else 60)
    reduced = lattices.reduce(p, lat)
    mt1 = reduced.Mt1_float()
    mt2 = reduced.Mt2_float()
    inv1t = np.linalg.inv(mt1).T
    inv2t = np.linalg.inv(mt2).T
    vol_i = spectral.unit_ball_norm_volume(alpha, q, m)
    memo: dict = {}

    n1, t1 = _layer_points(inv1t, cap1, q)
    n2, t2 = _layer_points(inv2t, cap2, m)
    lam1 = 2 * math.pi * Rf * t1
    lam2 = 2 * math.pi * Rf * Rf * t2
    w1 = (1 + eps * n1) ** (-N)
    w2 = (1 + eps * eps * n2) ** (-N)

    chi1, nq1 = _chi_values(alpha, q, m, lam1, np.zeros_like(lam1), vol_i, memo)
    s1 = float(np.sum(chi1 * w1) / vol_i)
    chi2, nq2 = _chi_values(alpha, q, m, np.zeros_like(lam2), lam2, vol_i, memo)
    s2 = float(np.sum(chi2 * w2) / vol_i)

    # S3: group the k' layer by (transformed, euclid) pair to reuse values
    pairs = np.stack([np.round(t1, 9), np.round(n1, 9)], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    s3 = 0.0
    n_quad = nq1 + nq2
    n_env = 0
    for j in range(uniq.shape[0]):
        l1 = 2 * math.pi * Rf * float(uniq[j, 0])
        chi3, nq3 = _chi_values(alpha, q, m, np.full(lam2.shape, l1), lam2, vol_i, memo)
        n_quad += nq3
        n_env += lam2.size - nq3
        wj = (1 + eps * float(uniq[j, 1]) + eps * eps * n2) ** (-N)
        s3 += float(counts[j]) * float(np.sum(chi3 * wj))
    s3 /= vol_i

    tails = _tail_estimates(alpha, q, m, Rf, eps, N, cap1, cap2, vol_i,
                            float(np.min(np.linalg.svd(inv1t, compute_uv=False))),
                            float(np.min(np.linalg.svd(inv2t, compute_uv=False))))
    for name, head, tail in (("S1", s1, tails[0]), ("S2", s2, tails[1]), ("S3", s3, tails[2])):
        if tail > 0.1 * head:
            raise PoissonTruncationError(
                f"{name} truncation cap too small: tail estimate {tail:.3e} "
                f"exceeds 10% of head {head:.3e}"
            )

    t = predicted_exponents(q, m, alpha)
    e1 = Rf**-t.beta1 * _e_factor(q, t.beta1, eps)
    e2 = Rf ** (-2 * t.beta2) * _e_factor(2 * m, 2 * t.beta2, eps)
    sig = t.sigma
    Q = q + 2 * m
    if (3 - m) <= alpha <= (q / 2 + 1):
        e3 = Rf ** (-(Q + 1) / 2 - 2 * sig) * eps ** (-(q + 1) / 2) * _e_factor(m - 1, 2 * sig, eps)
    else:
        e3 = Rf ** (-Q / 2 - 2 * sig) * eps ** (-q / 2) * _e_factor(m, 2 * sig, eps)
    vterm = (1 + eps / Rf) ** Q - (1 - eps / Rf) ** Q
    return PoissonReport(
        R=Rf, eps=eps, N=N, cap1=cap1, cap2=cap2, s1=s1, s2=s2, s3=s3,
        volume_term=vterm, combined=s1 + s2 + s3 + vterm,
        envelope1=e1, envelope2=e2, envelope3=e3, tails=tails,
        n_quadrature=n_quad, n_envelope=n_env,
    )


def _tail_estimates(alpha, q, m, R, eps, N, cap1, cap2, vol_i, c1, c2):
    """Integral-comparison tails of the three sums past the caps, using the
    decay envelopes with the slowest transformed magnitude (min singular
    value of the inverse blocks)."""
    pw, _ = spectral.predicted_axis_exponent(alpha, q, m, "w-axis")
    ps, _ = spectral.predicted_axis_exponent(alpha, q, m, "s-axis")
    sig = sigma(alpha)
    surf_q = q * math.pi ** (q / 2) / math.gamma(q / 2 + 1)
    surf_m = m * math.pi ** (m / 2) / math.gamma(m / 2 + 1)

    def tail_1d(cap, dim, surf, decay, eps_pow):
        rr = np.geomspace(cap, cap * 1e4, 400)
        f = surf * rr ** (dim - 1) * decay(rr) * (1 + eps**eps_pow * rr) ** (-N)
        return float(np.trapezoid(f, rr))

    t1 = tail_1d(cap1, q, surf_q, lambda r: (1 + c1 * R * r) ** pw, 1)
    t2 = tail_1d(cap2, m, surf_m, lambda r: (1 + c2 * R * R * r) ** ps, 2)
    # S3 tail: either index beyond its cap; bound with the mixed envelope
    r1 = np.geomspace(1.0, cap1 * 1e3, 220)
    r2 = np.geomspace(1.0, cap2 * 1e3, 220)
    g1, g2 = np.meshgrid(r1, r2, indexing="ij")
    mixed = ((c1 * R * g1) ** (-q / 2) * (c2 * R * R * g2) ** (-m / 2)
             * (c1 * R * g1 + c2 * R * R * g2) ** (-sig))
    w = (1 + eps * g1 + eps**2 * g2) ** (-N)
    dens = surf_q * surf_m * g1 ** (q - 1) * g2 ** (m - 1) * mixed * w
    outside = (g1 > cap1) | (g2 > cap2)
    integrand = np.where(outside, dens, 0.0)
    t3 = float(np.trapezoid(np.trapezoid(integrand, r2, axis=1), r1))
    # the S-values carry 1/vol while the envelope constant is vol: they cancel
    return (t1, t2, t3)
