"""Lattices Gamma_L = L Z^(q+m) for block-diagonal invertible L.

Covers the bilinear subgroup test with an exact certificate, the
dilation-adapted rationality scaling delta_c(A) = (c A1, c^2 A2), truncated
lattices, and the reduction Mt = M L that turns Gamma_L-counting into
Z^(q+m)-counting.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from fractions import Fraction

import numpy as np

from . import ratlin
from .groups import GroupElement, GroupSpec
from .norms import NormParams


class LatticeValidationError(ValueError):
    pass


@dataclasses.dataclass(frozen=True)
class LatticeSpec:
    L1: object  # ratlin.Mat or float ndarray
    L2: object

    @property
    def q(self) -> int:
        return len(self.L1)

    @property
    def m(self) -> int:
        return len(self.L2)

    @property
    def kind(self) -> str:
        return "float" if isinstance(self.L1, np.ndarray) else "exact"

    def L1_float(self) -> np.ndarray:
        return self.L1 if self.kind == "float" else ratlin.to_float(self.L1)

    def L2_float(self) -> np.ndarray:
        return self.L2 if self.kind == "float" else ratlin.to_float(self.L2)

    def covolume(self) -> float:
        if self.kind == "exact":
            return abs(float(ratlin.det(self.L1) * ratlin.det(self.L2)))
        return abs(np.linalg.det(self.L1) * np.linalg.det(self.L2))

    def covolume_exact(self) -> Fraction:
        if self.kind != "exact":
            raise TypeError("exact covolume needs an exact lattice")
        return abs(ratlin.det(self.L1) * ratlin.det(self.L2))

    def point(self, k) -> GroupElement:
        """The lattice point (L1 k', L2 k'') for integer coordinates k."""
        kp, kpp = tuple(k[: self.q]), tuple(k[self.q :])
        if self.kind == "exact":
            return GroupElement(
                ratlin.matvec(self.L1, ratlin.vec(kp)),
                ratlin.matvec(self.L2, ratlin.vec(kpp)),
            )
        return GroupElement(self.L1 @ np.asarray(kp, float), self.L2 @ np.asarray(kpp, float))


def lattice_spec(L1, L2) -> LatticeSpec:
    float_kind = isinstance(L1, np.ndarray) or isinstance(L2, np.ndarray)
    if float_kind:
        L1 = np.asarray(L1, dtype=float)
        L2 = np.asarray(L2, dtype=float)
        if abs(np.linalg.det(L1)) < 1e-300 or abs(np.linalg.det(L2)) < 1e-300:
            raise LatticeValidationError("singular lattice block")
    else:
        L1 = ratlin.mat(L1)
        L2 = ratlin.mat(L2)
        if ratlin.det(L1) == 0 or ratlin.det(L2) == 0:
            raise LatticeValidationError("singular lattice block")
    return LatticeSpec(L1=L1, L2=L2)


def identity_lattice(q: int, m: int) -> LatticeSpec:
    return LatticeSpec(L1=ratlin.identity(q), L2=ratlin.identity(m))


@dataclasses.dataclass(frozen=True)
class SubgroupCertificate:
    is_subgroup: bool
    approximate: bool  # True when decided in floating point
    violations: tuple  # tuples (i, j, l, value-as-string)
    checked_pairs: int

    def to_json(self) -> dict:
        return {
            "is_subgroup": self.is_subgroup,
            "approximate": self.approximate,
            "checked_pairs": self.checked_pairs,
            "violations": [
                {"i": i, "j": j, "center_index": l, "value": v}
                for (i, j, l, v) in self.violations
            ],
        }


def is_subgroup(spec: GroupSpec, lat: LatticeSpec) -> SubgroupCertificate:
    """Bilinear integrality test: Gamma_L is a subgroup iff for all basis
    pairs (i, j) the vector 1/2 L2^-1 <U L1 e_i, L1 e_j> is integral.

    Bilinearity extends the basis check to all integer vectors, giving closure
    under composition and inversion.  Exact data gives an exact verdict; float
    data is checked to 1e-9 and flagged approximate.
    """
    q, m = spec.q, spec.m
    if lat.q != q or lat.m != m:
        raise LatticeValidationError("lattice dimensions do not match the group")
    violations = []
    if spec.kind == "exact" and lat.kind == "exact":
        l2inv = ratlin.inv(lat.L2)
        cols = [tuple(lat.L1[r][i] for r in range(q)) for i in range(q)]
        half = Fraction(1, 2)
        for i in range(q):
            for j in range(q):
                br = tuple(
                    ratlin.vdot(ratlin.matvec(u, cols[i]), cols[j]) for u in spec.U
                )
                val = ratlin.matvec(l2inv, tuple(half * b for b in br))
                for l, v in enumerate(val):
                    if v.denominator != 1:
                        violations.append((i, j, l, str(v)))
        return SubgroupCertificate(
            is_subgroup=not violations,
            approximate=False,
            violations=tuple(violations),
            checked_pairs=q * q,
        )
    Uf = spec.U_float()
    L1f, L2f = lat.L1_float(), lat.L2_float()
    l2inv = np.linalg.inv(L2f)
    for i in range(q):
        for j in range(q):
            br = np.einsum("ljk,k,j->l", Uf, L1f[:, i], L1f[:, j])
            val = 0.5 * (l2inv @ br)
            off = np.abs(val - np.round(val))
            for l in range(m):
                if off[l] > 1e-9:
                    violations.append((i, j, l, repr(float(val[l]))))
    return SubgroupCertificate(
        is_subgroup=not violations,
        approximate=True,
        violations=tuple(violations),
        checked_pairs=q * q,
    )


def delta_rational(A1, A2) -> Fraction | None:
    """Least c > 0 with (c A1, c^2 A2) integral, or None when undecidable.

    Rational input always admits such a c: the admissible c for A1 alone form
    c_min N* with c_min = lcm(denominators) / gcd(scaled numerators), and the
    lcm of the denominators of c_min^2 A2 bounds the multiplier search.
    Irrational (float) entries return None ("unknown"): no finite certificate
    exists from floating data.
    """
    if isinstance(A1, np.ndarray) or isinstance(A2, np.ndarray):
        return None
    A1 = ratlin.mat(A1) if not isinstance(A1, tuple) else A1
    A2 = ratlin.mat(A2) if not isinstance(A2, tuple) else A2
    L = ratlin.denominator_lcm(A1)
    B = tuple(tuple(x * L for x in row) for row in A1)
    g = ratlin.entry_gcd(B)
    if g == 0:
        raise LatticeValidationError("zero A1 block in delta_rational")
    c_min = Fraction(L, g)
    a2_scaled = tuple(tuple(x * c_min * c_min for x in row) for row in A2)
    k0 = ratlin.denominator_lcm(a2_scaled)
    for k in range(1, k0 + 1):
        if all((x * k * k).denominator == 1 for row in a2_scaled for x in row):
            return k * c_min
    raise AssertionError("multiplier bound failed; unreachable for rational input")


def _box_radii(Linv_rows: np.ndarray, T: float) -> list[int]:
    return [int(math.floor(np.linalg.norm(row) * T + 1e-9)) for row in Linv_rows]


def truncated_lattice(lat: LatticeSpec, T, *, budget: int | None = None):
    """Yield the points of Gamma_L(T): |gamma'| <= T, |gamma''| <= T^2.

    The truncation norms are Euclidean norms of the lattice point itself.
    Membership is exact for exact lattices; the stream is recreatable, so
    parallel consumers each open their own.
    """
    Tf = float(T)
    if Tf <= 0:
        raise ValueError("T must be positive")
    exact = lat.kind == "exact" and not isinstance(T, float)
    T2 = ratlin.fr(T) ** 2 if exact else None
    L1f, L2f = lat.L1_float(), lat.L2_float()
    b1 = _box_radii(np.linalg.inv(L1f), Tf * (1 + 1e-12))
    b2 = _box_radii(np.linalg.inv(L2f), Tf * Tf * (1 + 1e-12))

    def layer_points(Lmat, Lf, bounds, bound_sq_exact, bound_sq_float):
        pts = []
        for k in itertools.product(*(range(-b, b + 1) for b in bounds)):
            if exact:
                v = ratlin.matvec(Lmat, ratlin.vec(k))
                if ratlin.vdot(v, v) <= bound_sq_exact:
                    pts.append(v)
            else:
                v = Lf @ np.asarray(k, float)
                if float(v @ v) <= bound_sq_float:
                    pts.append(v)
        return pts

    first = layer_points(lat.L1 if exact else None, L1f, b1, T2, Tf * Tf * (1 + 1e-12))
    second = layer_points(
        lat.L2 if exact else None, L2f, b2, T2 * T2 if exact else None, Tf**4 * (1 + 1e-12)
    )
    count = 0
    for v1 in first:
        for v2 in second:
            count += 1
            if budget is not None and count > budget:
                raise RuntimeError(f"truncated lattice exceeds budget of {budget} points")
            yield GroupElement(v1, v2)


def truncated_lattice_size(lat: LatticeSpec, T) -> int:
    return sum(1 for _ in truncated_lattice(lat, T))


@dataclasses.dataclass(frozen=True)
class ReducedSpec:
    """The block pair Mt = (M1 L1, M2 L2) governing integer-lattice counting."""

    Mt1: object
    Mt2: object

    @property
    def q(self) -> int:
        return len(self.Mt1)

    @property
    def m(self) -> int:
        return len(self.Mt2)

    @property
    def kind(self) -> str:
        return "float" if isinstance(self.Mt1, np.ndarray) else "exact"

    def Mt1_float(self) -> np.ndarray:
        return self.Mt1 if self.kind == "float" else ratlin.to_float(self.Mt1)

    def Mt2_float(self) -> np.ndarray:
        return self.Mt2 if self.kind == "float" else ratlin.to_float(self.Mt2)


def reduce(p: NormParams, lat: LatticeSpec) -> ReducedSpec:
    """Mt1 = M1 L1, Mt2 = M2 L2; counting in Gamma_L against M equals
    counting in Z^(q+m) against Mt."""
    if p.q != lat.q or p.m != lat.m:
        raise LatticeValidationError("norm/lattice dimension mismatch")
    if p.kind == "exact" and lat.kind == "exact":
        return ReducedSpec(Mt1=ratlin.matmul(p.M1, lat.L1), Mt2=ratlin.matmul(p.M2, lat.L2))
    return ReducedSpec(
        Mt1=p.M1_float() @ lat.L1_float(), Mt2=p.M2_float() @ lat.L2_float()
    )


def reduced_from_norm(p: NormParams) -> ReducedSpec:
    """ReducedSpec for the identity lattice (Mt = M)."""
    return ReducedSpec(Mt1=p.M1, Mt2=p.M2)


def lattice_coords(lat: LatticeSpec, g: GroupElement):
    """Integer coordinates k with L k = g, or None if g is not a lattice point.

    Exact for exact data; float data is matched to 1e-9.
    """
    if lat.kind == "exact" and g.kind == "exact":
        kp = ratlin.solve(lat.L1, g.x)
        kpp = ratlin.solve(lat.L2, g.t)
        if all(v.denominator == 1 for v in kp) and all(v.denominator == 1 for v in kpp):
            return tuple(int(v) for v in kp) + tuple(int(v) for v in kpp)
        return None
    gf = g.to_float()
    kp = np.linalg.solve(lat.L1_float(), gf.x)
    kpp = np.linalg.solve(lat.L2_float(), gf.t)
    k = np.concatenate([kp, kpp])
    if np.max(np.abs(k - np.round(k))) <= 1e-9:
        return tuple(int(round(v)) for v in k)
    return None
