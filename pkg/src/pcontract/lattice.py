"""Compact open subgroups of F_p((t))^d and expansion in tidy bases.

Every compact open subgroup V is squeezed between ``t^K L`` and ``t^-K L``
where ``L = F_p[[t]]^d`` is the standard lattice, so V is recorded as a
subspace W of the finite quotient ``Q_K = t^-K L / t^K L`` (dimension 2Kd).
Coordinates in Q_D are indexed by ``(degree + D) * d + k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, MembershipError, NotTidy, PrecisionError
from .linalg import check_prime, in_rowspace, intersect_rowspaces, inverse, MatFp, rank, rref, row_basis
from .series import SeriesVector, shift


def to_quotient(z: SeriesVector, D: int) -> np.ndarray:
    """Coefficients of z on degrees [-D, D) as a flat vector.

    Raises PrecisionError when some of those degrees are not determined.
    """
    if z.prec is not None and z.prec < D:
        raise PrecisionError(f"need precision {D}, vector has {z.prec}")
    x = np.zeros(2 * D * z.d, dtype=np.int64)
    for n, v in z.coeffs.items():
        if -D <= n < D:
            x[(n + D) * z.d : (n + D + 1) * z.d] = v
    return x


def from_quotient(x: Sequence[int], p: int, d: int, D: int) -> SeriesVector:
    x = np.asarray(x, dtype=np.int64)
    coeffs = {}
    for i in range(2 * D):
        blk = x[i * d : (i + 1) * d]
        if blk.any():
            coeffs[i - D] = blk.tolist()
    return SeriesVector(p, d, coeffs)


def _layer_rows(d: int, D: int, start: int, stop: int) -> np.ndarray:
    """Rows e_k t^n for n in [start, stop) inside Q_D."""
    rows = []
    for n in range(max(start, -D), min(stop, D)):
        for k in range(d):
            r = np.zeros(2 * D * d, dtype=np.int64)
            r[(n + D) * d + k] = 1
            rows.append(r)
    return np.array(rows, dtype=np.int64).reshape(-1, 2 * D * d)


def _regrade(rows: np.ndarray, d: int, D_from: int, D_to: int, offset: int = 0) -> np.ndarray:
    """Move rows from Q_{D_from} to Q_{D_to}, shifting degrees by ``offset``.

    Degrees landing at or above D_to are dropped; degrees below -D_to must be zero.
    """
    out = np.zeros((rows.shape[0], 2 * D_to * d), dtype=np.int64)
    for i in range(2 * D_from):
        n = i - D_from + offset
        blk = rows[:, i * d : (i + 1) * d]
        if n >= D_to or not blk.any():
            continue
        if n < -D_to:
            raise ValueError(f"degree {n} falls below the quotient window")
        j = n + D_to
        out[:, j * d : (j + 1) * d] = blk
    return out


class CompactOpenSubgroup:
    """Compact open subgroup V with ``t^K L <= V <= t^-K L``."""

    def __init__(self, p: int, d: int, K: int, W):
        self.p = check_prime(p)
        self.d = int(d)
        if K < 1:
            raise ValueError(f"depth K must be >= 1, got {K}")
        self.K = int(K)
        n = 2 * self.K * self.d
        W = np.asarray(W, dtype=np.int64).reshape(-1, n)
        self.W = row_basis(W, self.p, n)
        self.W.setflags(write=False)

    # -- constructors -------------------------------------------------------

    @classmethod
    def standard(cls, p: int, d: int, m: int = 0) -> "CompactOpenSubgroup":
        """The lattice t^m F_p[[t]]^d."""
        K = max(1, abs(m))
        return cls(p, d, K, _layer_rows(d, K, m, K))

    @classmethod
    def from_vectors(cls, p: int, d: int, K: int, vectors: Iterable[SeriesVector]) -> "CompactOpenSubgroup":
        """Subgroup generated by t^K L and the given vectors (which must lie in t^-K L)."""
        rows = []
        for z in vectors:
            if z.coeffs and min(z.coeffs) < -K:
                raise MembershipError(f"vector has degree {min(z.coeffs)} below -{K}")
            rows.append(to_quotient(z, K))
        return cls(p, d, K, np.array(rows, dtype=np.int64).reshape(-1, 2 * K * d))

    # -- views --------------------------------------------------------------

    def embed(self, D: int) -> np.ndarray:
        """Basis of the image of V in Q_D, for D >= K."""
        if D < self.K:
            raise ValueError(f"cannot embed depth {self.K} into Q_{D}")
        lifted = _regrade(np.asarray(self.W), self.d, self.K, D)
        return row_basis(np.vstack([lifted, _layer_rows(self.d, D, self.K, D)]), self.p, 2 * D * self.d)

    def dim_in(self, D: int) -> int:
        return self.embed(D).shape[0]

    def at_depth(self, D: int) -> "CompactOpenSubgroup":
        return CompactOpenSubgroup(self.p, self.d, D, self.embed(D))

    def generators(self, D: int | None = None) -> list[SeriesVector]:
        """Exact vectors whose span together with t^D L is V."""
        D = self.K if D is None else D
        return [from_quotient(r, self.p, self.d, D) for r in self.embed(D)]

    def shifted(self, n: int) -> "CompactOpenSubgroup":
        """The subgroup t^n V."""
        K2 = self.K + abs(n)
        moved = _regrade(self.embed(K2), self.d, K2, K2, offset=n)
        return CompactOpenSubgroup(self.p, self.d, K2, np.vstack([moved, _layer_rows(self.d, K2, self.K + n, K2)]))

    # -- relations ----------------------------------------------------------

    def _common(self, other: "CompactOpenSubgroup") -> int:
        if (self.p, self.d) != (other.p, other.d):
            raise DimensionMismatch(f"(p, d) differ: {(self.p, self.d)} vs {(other.p, other.d)}")
        return max(self.K, other.K)

    def contains_subgroup(self, other: "CompactOpenSubgroup") -> bool:
        D = self._common(other)
        mine = self.embed(D)
        both = np.vstack([mine, other.embed(D)])
        return rank(both, self.p) == mine.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CompactOpenSubgroup):
            return NotImplemented
        return self.contains_subgroup(other) and other.contains_subgroup(self)

    def __hash__(self):  # pragma: no cover - mutable-looking value, not hashed
        raise TypeError("CompactOpenSubgroup is not hashable")

    def intersect(self, other: "CompactOpenSubgroup") -> "CompactOpenSubgroup":
        D = self._common(other)
        n = 2 * D * self.d
        return CompactOpenSubgroup(self.p, self.d, D, intersect_rowspaces(self.embed(D), other.embed(D), self.p, n))

    def is_tau_invariant(self) -> bool:
        return self.contains_subgroup(self.shifted(1))

    def contains(self, z: SeriesVector) -> bool:
        return subgroup_membership(self, z)

    def __repr__(self) -> str:
        return f"CompactOpenSubgroup(p={self.p}, d={self.d}, K={self.K}, dim W={self.W.shape[0]})"


def subgroup_membership(V: CompactOpenSubgroup, z: SeriesVector) -> bool:
    if (V.p, V.d) != (z.p, z.d):
        raise DimensionMismatch(f"(p, d) differ: {(V.p, V.d)} vs {(z.p, z.d)}")
    if z.prec is not None and z.prec < V.K:
        raise PrecisionError(f"membership needs precision {V.K}, vector has {z.prec}")
    if z.coeffs and min(z.coeffs) < -V.K:
        return False
    return in_rowspace(V.W, to_quotient(z, V.K), V.p)


def subgroup_index(V1: CompactOpenSubgroup, V2: CompactOpenSubgroup) -> int:
    """The index [V1 : V2] for V2 contained in V1."""
    D = V1._common(V2)
    if not V1.contains_subgroup(V2):
        raise MembershipError("second subgroup is not contained in the first")
    return V1.p ** (V1.dim_in(D) - V2.dim_in(D))


# ---------------------------------------------------------------------------
# Tidy bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TidyBasisData:
    """A shift-invariant V with d exact vectors spanning a complement of t V."""

    V: CompactOpenSubgroup
    b: tuple[SeriesVector, ...]

    def __post_init__(self):
        V = self.V
        if len(self.b) != V.d:
            raise DimensionMismatch(f"need {V.d} complement vectors, got {len(self.b)}")
        if not V.is_tau_invariant():
            raise NotTidy("subgroup is not invariant under t")
        D = V.K + 1
        tv = V.shifted(1).embed(D)
        rows = np.array([to_quotient(v, D) for v in self.b], dtype=np.int64)
        stacked = np.vstack([tv, rows])
        if rank(stacked, V.p) != tv.shape[0] + V.d or not all(V.contains(v) for v in self.b):
            raise ValueError("vectors do not span a complement of t V in V")

    @classmethod
    def standard(cls, p: int, d: int) -> "TidyBasisData":
        return cls(CompactOpenSubgroup.standard(p, d), tuple(SeriesVector.monomial(p, d, k, 0) for k in range(d)))


def _inverse_unit(u: list[int], n: int, p: int) -> list[int]:
    """First n coefficients of 1/u for a power series u with u[0] = 1."""
    inv = [0] * n
    inv[0] = 1
    for i in range(1, n):
        s = 0
        for j in range(1, min(i, len(u) - 1) + 1):
            s += u[j] * inv[i - j]
        inv[i] = (-s) % p
    return inv


def complement_basis(V: CompactOpenSubgroup) -> TidyBasisData:
    """Triangular complement of t V in V.

    b_k vanishes in coordinates after k and has the monomial t^{m_k} in
    coordinate k, with m_k the least valuation available there. The matrix
    with columns b_k is then upper triangular with monomial diagonal.
    """
    if not V.is_tau_invariant():
        raise NotTidy("subgroup is not invariant under t")
    p, d = V.p, V.d
    D = V.K + 1
    rows = V.embed(D)
    # columns ordered coordinate-major, last coordinate first, degrees ascending
    order = [(deg + D) * d + k for k in reversed(range(d)) for deg in range(-D, D)]
    red, pivots = rref(rows[:, order], p)
    chosen: dict[int, np.ndarray] = {}
    for r, pc in enumerate(pivots):
        k = d - 1 - pc // (2 * D)
        if k not in chosen:
            row = np.zeros(2 * D * d, dtype=np.int64)
            row[order] = red[r]
            chosen[k] = row
    if len(chosen) != d:  # pragma: no cover - V contains t^D L so every block pivots
        raise NotTidy("subgroup is not open")
    b = []
    for k in range(d):
        z = from_quotient(chosen[k], p, d, D)
        m = min(n for n, v in z.coeffs.items() if v[k])
        u = [z.coeffs.get(m + i, (0,) * d)[k] for i in range(D - m)]
        inv = _inverse_unit(u, D - m, p)
        coeffs: dict[int, list[int]] = {}
        for n, v in z.coeffs.items():
            for i, c in enumerate(inv):
                if c and n + i < D:
                    acc = coeffs.setdefault(n + i, [0] * d)
                    for kk in range(d):
                        acc[kk] += c * v[kk]
        b.append(SeriesVector(p, d, coeffs))
    return TidyBasisData(V, tuple(b))


class _LayerSolver:
    """Coordinates of u in V modulo t V relative to the complement basis."""

    def __init__(self, basis: TidyBasisData):
        V = basis.V
        self.p, self.d, self.D = V.p, V.d, V.K + 1
        tv = V.shifted(1).embed(self.D)
        brows = np.array([to_quotient(v, self.D) for v in basis.b], dtype=np.int64)
        self.S = np.vstack([brows, tv]) % self.p
        _, piv = rref(self.S, self.p)
        self.piv = piv
        self.Sinv = inverse(MatFp(self.p, self.S[:, piv])).a

    def solve(self, u: np.ndarray) -> np.ndarray | None:
        c = (u[self.piv] @ self.Sinv) % self.p
        if ((c @ self.S) % self.p != u % self.p).any():
            return None
        return c[: self.d]


def basis_expand(z: SeriesVector, basis: TidyBasisData, jmax: int) -> dict[tuple[int, int], int]:
    """Nonzero coefficients n[(j, k)] with z = sum n[(j,k)] t^j b_k + (element of t^{jmax+1} V).

    Coordinates k are 0-based. Layers are peeled off one at a time starting
    from a level j0 at which z is certainly in t^{j0} V.
    """
    V = basis.V
    if (z.p, z.d) != (V.p, V.d):
        raise DimensionMismatch(f"(p, d) differ: {(z.p, z.d)} vs {(V.p, V.d)}")
    solver = _LayerSolver(basis)
    K, D, d = V.K, solver.D, V.d
    out: dict[tuple[int, int], int] = {}
    if z.is_zero() and z.prec is None:
        return out
    start = (z.valuation() if z.coeffs else z.lo) - K
    r = z
    for j in range(start, jmax + 1):
        if r.prec is not None and r.prec < j + D:
            raise PrecisionError(f"level {j} needs precision {j + D}, vector has {r.prec}")
        if r.coeffs and min(r.coeffs) < j - K:
            raise MembershipError(f"residual not in t^{j} V")
        if r.prec is None and not r.coeffs:
            break
        u = to_quotient(shift(r, -j), D)
        c = solver.solve(u)
        if c is None:
            raise MembershipError(f"residual at level {j} is not in t^{j} V")
        if c.any():
            for k in range(d):
                if c[k]:
                    out[(j, k)] = int(c[k])
                    r = r - shift(basis.b[k], j).scale(int(c[k]))
    return out


def expansion_sum(coeffs: dict[tuple[int, int], int], basis: TidyBasisData) -> SeriesVector:
    """Direct summation of sum n[(j,k)] t^j b_k."""
    V = basis.V
    out = SeriesVector.zero(V.p, V.d)
    for (j, k), c in coeffs.items():
        out = out + shift(basis.b[k], j).scale(c)
    return out


# ---------------------------------------------------------------------------
# Coset enumeration and sampling
# ---------------------------------------------------------------------------


def enumerate_cosets(V1: CompactOpenSubgroup, V2: CompactOpenSubgroup, limit: int = 1 << 16) -> list[SeriesVector]:
    """Representatives of V1 / V2 found by closing {0} under adding generators.

    Cosets are compared through their reduced form modulo V2 in a common
    quotient, so the count is obtained by enumeration rather than dimensions.
    """
    D = V1._common(V2)
    if not V1.contains_subgroup(V2):
        raise MembershipError("second subgroup is not contained in the first")
    p, n = V1.p, 2 * D * V1.d
    red, pivots = rref(V2.embed(D), p)
    red = red[: len(pivots)]

    def canon(x: np.ndarray) -> bytes:
        x = x % p
        for row, c in zip(red, pivots):
            if x[c]:
                x = (x - x[c] * row) % p
        return x.tobytes()

    gens = [g % p for g in V1.embed(D)]
    zero = np.zeros(n, dtype=np.int64)
    seen = {canon(zero): zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = (x + g) % p
                key = canon(y)
                if key not in seen:
                    if len(seen) >= limit:
                        raise OverflowError(f"more than {limit} cosets")
                    seen[key] = y
                    nxt.append(y)
        frontier = nxt
    return [from_quotient(x, p, V1.d, D) for x in seen.values()]


def random_tidy(p: int, d: int, rng, K: int = 2, count: int = 2) -> CompactOpenSubgroup:
    """t-invariant V generated by t^K L and t-multiples of random vectors in t^-K L."""
    vectors = []
    for _ in range(count):
        coeffs = {n: [rng.randrange(p) for _ in range(d)] for n in range(-K, K)}
        z = SeriesVector(p, d, coeffs)
        vectors.extend(shift(z, m) for m in range(2 * K))
    return CompactOpenSubgroup.from_vectors(p, d, K, vectors)
