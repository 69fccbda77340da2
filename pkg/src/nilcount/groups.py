"""Step-two nilpotent groups G(q, m) on R^q x R^m.

The product is (x,t) o (x',t') = (x+x', t+t'+ 1/2 <Ux,x'>) with
<Ux,x'>_l = <U^(l) x, x'> for m real q x q matrices U^(l).  Specs and elements
come in two arithmetic kinds, 'exact' (Fraction) and 'float' (numpy); kinds
never mix silently.
"""

from __future__ import annotations

import dataclasses
from fractions import Fraction

import numpy as np

from . import ratlin
from .ratlin import Fraction as _F  # noqa: F401  (re-export convenience)


class GroupValidationError(ValueError):
    pass


def _kind_of_matrix(u) -> str:
    if isinstance(u, np.ndarray):
        return "float"
    return "exact"


@dataclasses.dataclass(frozen=True)
class GroupSpec:
    """Immutable group data: first-layer dim q, center dim m, matrices U."""

    q: int
    m: int
    U: tuple  # tuple of m matrices; all ratlin.Mat or all float ndarrays
    kind: str  # 'exact' | 'float'

    @property
    def Q(self) -> int:
        """Homogeneous dimension q + 2m."""
        return self.q + 2 * self.m

    @property
    def dim(self) -> int:
        return self.q + self.m

    def U_float(self) -> np.ndarray:
        """Explicit float view of U, shape (m, q, q)."""
        if self.kind == "float":
            return np.stack(self.U)
        return np.stack([ratlin.to_float(u) for u in self.U])

    def identity(self) -> "GroupElement":
        if self.kind == "exact":
            return GroupElement(ratlin.zeros_vec(self.q), ratlin.zeros_vec(self.m))
        return GroupElement(np.zeros(self.q), np.zeros(self.m))


@dataclasses.dataclass(frozen=True)
class GroupElement:
    """A point (x, t) in R^q x R^m; tuples of Fraction or float ndarrays."""

    x: object
    t: object

    @property
    def kind(self) -> str:
        return "float" if isinstance(self.x, np.ndarray) else "exact"

    def to_float(self) -> "GroupElement":
        if self.kind == "float":
            return self
        return GroupElement(ratlin.to_float(self.x), ratlin.to_float(self.t))

    def __iter__(self):
        yield self.x
        yield self.t


def point(x, t) -> GroupElement:
    """Build an element; floats anywhere force the float kind."""
    xs, ts = list(x), list(t)
    if any(isinstance(v, float) for v in xs + ts):
        return GroupElement(np.asarray(xs, dtype=float), np.asarray(ts, dtype=float))
    return GroupElement(ratlin.vec(xs), ratlin.vec(ts))


def group_spec(q: int, m: int, U) -> GroupSpec:
    """Validated constructor: q >= 2, m >= 1, step-two condition on U."""
    if q < 2:
        raise GroupValidationError(f"q = {q} < 2 (nilpotency forces q >= 2)")
    if m < 1:
        raise GroupValidationError(f"m = {m} < 1")
    if len(U) != m:
        raise GroupValidationError(f"expected {m} matrices U, got {len(U)}")
    mats = []
    kinds = set()
    for j, u in enumerate(U):
        if isinstance(u, np.ndarray):
            u = np.asarray(u, dtype=float)
            if u.shape != (q, q):
                raise GroupValidationError(f"U[{j}] has shape {u.shape}, expected ({q}, {q})")
            kinds.add("float")
        else:
            u = ratlin.mat(u)
            if len(u) != q or any(len(r) != q for r in u):
                raise GroupValidationError(f"U[{j}] is not {q}x{q}")
            kinds.add("exact")
        mats.append(u)
    if len(kinds) > 1:
        raise GroupValidationError("U matrices mix exact and float entries")
    kind = kinds.pop()
    if not _has_skew_part(mats, kind):
        raise GroupValidationError("all U^(j) are symmetric: [g1, g1] = {0} is not step two")
    return GroupSpec(q=q, m=m, U=tuple(mats), kind=kind)


def _has_skew_part(mats, kind) -> bool:
    for u in mats:
        if kind == "float":
            if np.max(np.abs(u - u.T)) > 0:
                return True
        else:
            q = len(u)
            if any(u[i][j] != u[j][i] for i in range(q) for j in range(i)):
                return True
    return False


def _check_dims(spec: GroupSpec, g: GroupElement):
    if len(g.x) != spec.q or len(g.t) != spec.m:
        raise ValueError(
            f"element dims ({len(g.x)}, {len(g.t)}) do not match group ({spec.q}, {spec.m})"
        )


def bilinear_t(spec: GroupSpec, x, xp):
    """The m-vector <Ux, x'> = (<U^(1)x, x'>, ..., <U^(m)x, x'>)."""
    if isinstance(x, np.ndarray):
        Uf = spec.U_float()
        return np.einsum("ljk,k,j->l", Uf, x, xp)
    return tuple(ratlin.vdot(ratlin.matvec(u, x), xp) for u in spec.U)


def compose(spec: GroupSpec, g: GroupElement, h: GroupElement) -> GroupElement:
    """Group product (x,t) o (x',t')."""
    _check_dims(spec, g)
    _check_dims(spec, h)
    if g.kind != h.kind:
        raise TypeError("mixed exact/float elements; convert explicitly with .to_float()")
    if g.kind == "float":
        br = bilinear_t(spec, g.x, h.x)
        return GroupElement(g.x + h.x, g.t + h.t + 0.5 * br)
    br = bilinear_t(spec, g.x, h.x)
    half = Fraction(1, 2)
    t = tuple(gt + ht + half * b for gt, ht, b in zip(g.t, h.t, br))
    return GroupElement(ratlin.vadd(g.x, h.x), t)


def inverse(spec: GroupSpec, g: GroupElement) -> GroupElement:
    """(x,t)^-1 = (-x, -t + 1/2 <Ux,x>)."""
    _check_dims(spec, g)
    if g.kind == "float":
        br = bilinear_t(spec, g.x, g.x)
        return GroupElement(-g.x, -g.t + 0.5 * br)
    br = bilinear_t(spec, g.x, g.x)
    half = Fraction(1, 2)
    return GroupElement(
        tuple(-v for v in g.x), tuple(-v + half * b for v, b in zip(g.t, br))
    )


def dilate(spec: GroupSpec, r, g: GroupElement) -> GroupElement:
    """Parabolic dilation (rx, r^2 t); r > 0."""
    _check_dims(spec, g)
    if isinstance(r, float) or g.kind == "float":
        if g.kind == "exact":
            raise TypeError("float dilation of an exact element; use g.to_float()")
        r = float(r)
        if r <= 0:
            raise ValueError("dilation factor must be positive")
        return GroupElement(r * g.x, r * r * g.t)
    rf = ratlin.fr(r)
    if rf <= 0:
        raise ValueError("dilation factor must be positive")
    return GroupElement(ratlin.vscale(rf, g.x), ratlin.vscale(rf * rf, g.t))


def structure_constants(spec: GroupSpec):
    """Table c[k][i][j] = 1/2 (U^(k)_{j,i} - U^(k)_{i,j}); antisymmetric in (i, j)."""
    if spec.kind == "float":
        Uf = spec.U_float()
        return 0.5 * (np.transpose(Uf, (0, 2, 1)) - Uf)
    half = Fraction(1, 2)
    return tuple(
        tuple(tuple(half * (u[j][i] - u[i][j]) for j in range(spec.q)) for i in range(spec.q))
        for u in spec.U
    )


# ---------------------------------------------------------------------------
# builtin families


def heisenberg(d: int) -> GroupSpec:
    """H^d: q = 2d, m = 1, U = 2J with J = 2 [[0, I], [-I, 0]]."""
    if d < 1:
        raise GroupValidationError("heisenberg needs d >= 1")
    q = 2 * d
    u = [[0] * q for _ in range(q)]
    for i in range(d):
        u[i][d + i] = 4
        u[d + i][i] = -4
    return group_spec(q, 1, [u])


def polarized_heisenberg(d: int) -> GroupSpec:
    """H^d_pol: U = 2 [[0, 0], [I, 0]]."""
    if d < 1:
        raise GroupValidationError("polarized_heisenberg needs d >= 1")
    q = 2 * d
    u = [[0] * q for _ in range(q)]
    for i in range(d):
        u[d + i][i] = 2
    return group_spec(q, 1, [u])


def h_type(U) -> GroupSpec:
    """H-type group from user matrices; validates the defining conditions.

    Each U^(j) must be skew-symmetric and orthogonal, and distinct pairs must
    anticommute.  Exact inputs are checked exactly, float inputs to 1e-10.
    """
    if not U:
        raise GroupValidationError("h_type needs at least one matrix")
    probe = U[0]
    q = probe.shape[0] if isinstance(probe, np.ndarray) else len(probe)
    m = len(U)
    spec = group_spec(q, m, U)
    violations = []
    if spec.kind == "float":
        tol = 1e-10
        Uf = spec.U_float()
        eye = np.eye(q)
        for j, u in enumerate(Uf):
            if np.max(np.abs(u + u.T)) > tol:
                violations.append(f"U[{j}] is not skew-symmetric")
            if np.max(np.abs(u.T @ u - eye)) > tol:
                violations.append(f"U[{j}] is not orthogonal")
        for i in range(m):
            for j in range(i + 1, m):
                if np.max(np.abs(Uf[i] @ Uf[j] + Uf[j] @ Uf[i])) > tol:
                    violations.append(f"U[{i}] and U[{j}] do not anticommute")
    else:
        eye = ratlin.identity(q)
        zero = tuple((Fraction(0),) * q for _ in range(q))
        for j, u in enumerate(spec.U):
            ut = ratlin.transpose(u)
            if tuple(tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(u, ut)) != zero:
                violations.append(f"U[{j}] is not skew-symmetric")
            if ratlin.matmul(ut, u) != eye:
                violations.append(f"U[{j}] is not orthogonal")
        for i in range(m):
            for j in range(i + 1, m):
                ab = ratlin.matmul(spec.U[i], spec.U[j])
                ba = ratlin.matmul(spec.U[j], spec.U[i])
                if any(a + b for r1, r2 in zip(ab, ba) for a, b in zip(r1, r2)):
                    violations.append(f"U[{i}] and U[{j}] do not anticommute")
    if violations:
        raise GroupValidationError("not an H-type system: " + "; ".join(violations))
    return spec


def free_carnot(q: int) -> GroupSpec:
    """Free step-two Carnot group F_{q,2}: m = q(q-1)/2, U^(k) = S(i,j).

    S(i,j) (i > j) has -1 at (i,j), +1 at (j,i); pairs ordered
    (2,1), (3,1), (3,2), (4,1), ...
    """
    if q < 2:
        raise GroupValidationError("free_carnot needs q >= 2")
    mats = []
    for i in range(1, q):
        for j in range(i):
            s = [[0] * q for _ in range(q)]
            s[i][j] = -1
            s[j][i] = 1
            mats.append(s)
    return group_spec(q, q * (q - 1) // 2, mats)


def builtin(name: str, **params) -> GroupSpec:
    """Dispatch for the builtin families used by the JSON config."""
    table = {
        "heisenberg": lambda: heisenberg(int(params["d"])),
        "polarized_heisenberg": lambda: polarized_heisenberg(int(params["d"])),
        "h_type": lambda: h_type(params["U"]),
        "free_carnot": lambda: free_carnot(int(params["q"])),
    }
    if name not in table:
        raise GroupValidationError(f"unknown builtin group family: {name!r}")
    return table[name]()
