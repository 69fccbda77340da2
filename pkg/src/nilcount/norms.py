"""Anisotropic homogeneous norms N(x,t) = (|M1 x|^a + |M2 t|^(a/2))^(1/a).

Ball membership is decided exactly (rational arithmetic) for rational data
when a = 1 or a is an even integer; otherwise in doubles with a configurable
boundary tolerance.  Also: closed-form and Monte Carlo ball volumes, and the
explicit witnesses for the failure of subadditivity (a < 1) and of convexity
(a < 2).
"""

from __future__ import annotations

import dataclasses
import math
from fractions import Fraction

import numpy as np

from . import groups, ratlin
from .groups import GroupElement, GroupSpec


class NormValidationError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class NormParams:
    alpha: object  # Fraction for exact alpha, float otherwise
    M1: object  # ratlin.Mat or float ndarray
    M2: object

    @property
    def q(self) -> int:
        return len(self.M1)

    @property
    def m(self) -> int:
        return len(self.M2)

    @property
    def Q(self) -> int:
        return self.q + 2 * self.m

    @property
    def kind(self) -> str:
        return "float" if isinstance(self.M1, np.ndarray) else "exact"

    @property
    def alpha_f(self) -> float:
        return float(self.alpha)

    def M1_float(self) -> np.ndarray:
        return self.M1 if self.kind == "float" else ratlin.to_float(self.M1)

    def M2_float(self) -> np.ndarray:
        return self.M2 if self.kind == "float" else ratlin.to_float(self.M2)

    def det_abs(self) -> float:
        """|det M1 * det M2| as a float."""
        if self.kind == "exact":
            return abs(float(ratlin.det(self.M1) * ratlin.det(self.M2)))
        return abs(np.linalg.det(self.M1) * np.linalg.det(self.M2))


def norm_params(alpha, M1=None, M2=None, *, q: int | None = None, m: int | None = None) -> NormParams:
    """Validated constructor; omitted blocks default to identities (needs q, m)."""
    if M1 is None:
        if q is None:
            raise NormValidationError("M1 omitted: need q to build the identity block")
        M1 = ratlin.identity(q)
    if M2 is None:
        if m is None:
            raise NormValidationError("M2 omitted: need m to build the identity block")
        M2 = ratlin.identity(m)
    float_kind = isinstance(M1, np.ndarray) or isinstance(M2, np.ndarray)
    if float_kind:
        M1 = np.asarray(M1, dtype=float)
        M2 = np.asarray(M2, dtype=float)
        if abs(np.linalg.det(M1)) < 1e-300 or abs(np.linalg.det(M2)) < 1e-300:
            raise NormValidationError("singular M block")
    else:
        M1 = ratlin.mat(M1)
        M2 = ratlin.mat(M2)
        if ratlin.det(M1) == 0 or ratlin.det(M2) == 0:
            raise NormValidationError("singular M block")
    if isinstance(alpha, float):
        a = alpha
        if a <= 0:
            raise NormValidationError("alpha must be positive")
    else:
        a = ratlin.fr(alpha)
        if a <= 0:
            raise NormValidationError("alpha must be positive")
    return NormParams(alpha=a, M1=M1, M2=M2)


def norm(p: NormParams, g: GroupElement) -> float:
    """N(x, t) as a double (the value is generically irrational)."""
    gf = g.to_float()
    a = p.alpha_f
    nx = float(np.linalg.norm(p.M1_float() @ gf.x))
    nt = float(np.linalg.norm(p.M2_float() @ gf.t))
    return (nx**a + nt ** (a / 2)) ** (1.0 / a)


def _exact_alpha_int(p: NormParams):
    """Return alpha as int if it is a positive integer Fraction, else None."""
    if isinstance(p.alpha, Fraction) and p.alpha.denominator == 1:
        return int(p.alpha)
    return None


def contains_exact(alpha_int: int, u: Fraction, w: Fraction, ra: Fraction) -> bool:
    """Decide u^(a/2) + w^(a/4) <= ra exactly, with u = |M1 x|^2, w = |M2 t|^2
    and ra = R^a (the radius enters only through its a-th power, which stays
    rational even when R itself is a surd like sqrt(N)).

    Supports a = 1 and even a; the radicals are cleared by repeated squaring.
    """
    a = alpha_int
    if a == 1:
        # sqrt(u) + w^(1/4) <= R, with R = ra
        R = ra
        if R < 0 or u > R * R:
            return False
        W = R * R + u
        D = 2 * R
        # need sqrt(w) + D sqrt(u) <= W
        Z = W * W - w - D * D * u
        if Z < 0:
            return False
        return 4 * D * D * u * w <= Z * Z
    if a % 2:
        raise ValueError("exact membership implemented for alpha = 1 or even alpha")
    j = a // 2
    if j % 2 == 0:
        return u**j + w ** (j // 2) <= ra
    # w-term carries one radical: u^j + w^((j-1)/2) sqrt(w) <= ra
    s = ra - u**j
    if s < 0:
        return False
    c = w ** ((j - 1) // 2)
    return c * c * w <= s * s


def ball_contains(p: NormParams, R, g: GroupElement, *, tol: float = 0.0) -> bool:
    """Membership N(g) <= R; exact for rational data with a = 1 or even a."""
    a_int = _exact_alpha_int(p)
    exactable = (
        a_int is not None
        and (a_int == 1 or a_int % 2 == 0)
        and p.kind == "exact"
        and g.kind == "exact"
        and not isinstance(R, float)
    )
    if exactable:
        Rf = ratlin.fr(R)
        if Rf <= 0:
            raise ValueError("R must be positive")
        y = ratlin.matvec(p.M1, g.x)
        s = ratlin.matvec(p.M2, g.t)
        return contains_exact(a_int, ratlin.vdot(y, y), ratlin.vdot(s, s), Rf**a_int)
    Rf = float(R)
    if Rf <= 0:
        raise ValueError("R must be positive")
    return norm(p, g) <= Rf * (1.0 + tol)


def near_boundary(p: NormParams, R, g: GroupElement, band: float = 1e-9) -> bool:
    """Diagnostic: is N(g) within a relative band of the sphere of radius R."""
    return abs(norm(p, g) - float(R)) <= band * float(R)


def unit_ball_volume(n: int) -> float:
    """Volume of the Euclidean unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def _beta(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def ball_volume(p: NormParams, R: float = 1.0) -> float:
    """Closed-form vol = |det M|^-1 w_m q w_q a^-1 B(q/a, 2m/a + 1) R^Q."""
    if R <= 0:
        raise ValueError("R must be positive")
    q, m, a = p.q, p.m, p.alpha_f
    base = (
        unit_ball_volume(m)
        * q
        * unit_ball_volume(q)
        / a
        * _beta(q / a, 2 * m / a + 1)
        / p.det_abs()
    )
    return base * float(R) ** p.Q


def ball_volume_mc(p: NormParams, R: float = 1.0, n: int = 10**6, seed: int = 0):
    """Monte Carlo volume oracle: returns (estimate, standard_error).

    Samples y ~ Unif(q-ball), s ~ Unif(m-ball) and measures the acceptance
    fraction of |y|^a + |s|^(a/2) <= 1; M enters only through |det M|.
    """
    rng = np.random.default_rng(seed)
    q, m, a = p.q, p.m, p.alpha_f

    def ball_samples(dim, count):
        z = rng.standard_normal((count, dim))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        r = rng.random(count) ** (1.0 / dim)
        return z * r[:, None]

    accept = 0
    chunk = 2_000_000
    done = 0
    while done < n:
        c = min(chunk, n - done)
        y = ball_samples(q, c)
        s = ball_samples(m, c)
        vals = np.linalg.norm(y, axis=1) ** a + np.linalg.norm(s, axis=1) ** (a / 2)
        accept += int(np.count_nonzero(vals <= 1.0))
        done += c
    p_hat = accept / n
    box = unit_ball_volume(q) * unit_ball_volume(m) / p.det_abs()
    se = box * math.sqrt(max(p_hat * (1 - p_hat), 1e-300) / n)
    return box * p_hat * float(R) ** p.Q, se * float(R) ** p.Q


def euclid_add(g: GroupElement, h: GroupElement) -> GroupElement:
    """Componentwise (Euclidean) sum, the operation of the subadditivity law."""
    if g.kind != h.kind:
        raise TypeError("mixed exact/float elements")
    if g.kind == "float":
        return GroupElement(g.x + h.x, g.t + h.t)
    return GroupElement(ratlin.vadd(g.x, h.x), ratlin.vadd(g.t, h.t))


def subadditivity_witness(p: NormParams):
    """For alpha < 1: a pair with N(g + h) > N(g) + N(h).

    Uses g = (M1^-1 e_q, 0), h = (0, eps M2^-1 e_m), shrinking eps by factors
    of 10 from 1e-2 until the violation shows (capped at 1e-12).
    """
    a = p.alpha_f
    if a >= 1:
        raise ValueError("subadditive for alpha >= 1: no witness exists")
    q, m = p.q, p.m
    m1inv = np.linalg.inv(p.M1_float())
    m2inv = np.linalg.inv(p.M2_float())
    g = GroupElement(m1inv[:, q - 1].copy(), np.zeros(m))
    eps = 1e-2
    while eps >= 1e-12:
        h = GroupElement(np.zeros(q), eps * m2inv[:, m - 1])
        lhs = norm(p, euclid_add(g, h))
        rhs = norm(p, g) + norm(p, h)
        if lhs > rhs:
            return g, h
        eps /= 10
    raise ArithmeticError("no subadditivity violation found down to eps = 1e-12")


def convexity_breakpoint(alpha: float) -> float:
    """s0: the zero of a s^(a-1) [(1/s + 1)^(a-1) - 2^(a/2)] for 1 < a < 2, else 1/2."""
    if alpha >= 2:
        raise ValueError("ball is convex for alpha >= 2")
    if alpha <= 1:
        return 0.5
    target = 2 ** (alpha / 2)
    lo, hi = 1e-12, 1 - 1e-12

    def f(s):
        return (1 / s + 1) ** (alpha - 1) - target

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def convexity_witness(p: NormParams):
    """For alpha < 2: two boundary points whose midpoint leaves the unit ball."""
    a = p.alpha_f
    if a >= 2:
        raise ValueError("ball is convex for alpha >= 2: no witness exists")
    q, m = p.q, p.m
    s0 = convexity_breakpoint(a)
    m1inv = np.linalg.inv(p.M1_float())
    m2inv = np.linalg.inv(p.M2_float())
    p1 = GroupElement(m1inv[:, q - 1].copy(), np.zeros(m))
    for frac in (0.5, 0.75, 0.9, 0.99):
        s = s0 + frac * (1 - s0)
        sp = (1 - s**a) ** (2 / a)
        p2 = GroupElement(s * m1inv[:, q - 1], sp * m2inv[:, m - 1])
        mid = GroupElement(0.5 * (p1.x + p2.x), 0.5 * (p1.t + p2.t))
        if norm(p, mid) > 1:
            return p1, p2, mid
    raise ArithmeticError("midpoint stayed inside the ball for all trial points")


def measured_quasi_norm_constant(
    spec: GroupSpec, p: NormParams, n: int = 2000, seed: int = 0
) -> float:
    """Empirical C0 = max N(g o h) / (N(g) + N(h)) over random pairs.

    The scale sweep matters: the worst ratios occur when the commutator term
    dominates, so both tiny and large dilations are sampled.
    """
    rng = np.random.default_rng(seed)
    q, m = spec.q, spec.m
    worst = 0.0
    for _ in range(n):
        sg, sh = 10.0 ** rng.uniform(-2, 2, size=2)
        g = GroupElement(sg * rng.standard_normal(q), sg**2 * rng.standard_normal(m))
        h = GroupElement(sh * rng.standard_normal(q), sh**2 * rng.standard_normal(m))
        val = norm(p, groups.compose(spec, g, h)) / (norm(p, g) + norm(p, h))
        worst = max(worst, val)
    return worst
