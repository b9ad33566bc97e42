"""Representations of F_p((t)) on F_p((t))^d given by one generator.

A valid representation is fixed by ``A0 = phi(1) - I``, a finitely supported
block matrix: phi(t^r) = I + A0^{(r)} with A0^{(r)} the shift-conjugate by
t^r, and phi(sum c_r t^r) is the product of the powers (I + A0^{(r)})^{c_r}.
The conditions making this a homomorphism are finite: A0^p = 0 and A0
commuting with each of its shifts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .blocks import (
    BlockMatrix,
    ChangeOfBasis,
    ZeroPattern,
    apply_precision,
    bm_apply,
    bm_compose,
    change_basis,
    conjugate_blocks,
    shift_conjugate,
)
from .errors import BranchError, DimensionMismatch, InvalidRep, PrecisionError, ResourceExhausted
from .lattice import CompactOpenSubgroup, subgroup_membership, to_quotient
from .linalg import SpanBasis, nullspace, row_basis
from .series import SeriesVector, min_prec, shift

UNCHECKED, VALID, INVALID = "unchecked", "valid", "invalid"


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    reason: str = ""
    failure: dict | None = None
    commute_range: tuple[int, int] | None = None


class Rep:
    """phi determined by the generator A0 = phi(t^0) - I."""

    def __init__(self, A0: BlockMatrix):
        self.A0 = A0
        self.p, self.d = A0.p, A0.d
        self._report: ValidationReport | None = None

    @classmethod
    def from_blocks(cls, p: int, d: int, blocks: Mapping) -> "Rep":
        return cls(BlockMatrix(p, d, blocks))

    @property
    def status(self) -> str:
        if self._report is None:
            return UNCHECKED
        return VALID if self._report.valid else INVALID

    @property
    def report(self) -> ValidationReport | None:
        return self._report

    def is_lower_triangular(self) -> bool:
        return all(i >= j for i, j in self.A0.blocks)

    def __eq__(self, other) -> bool:
        return isinstance(other, Rep) and self.A0 == other.A0

    def __hash__(self) -> int:
        return hash(self.A0)

    def __repr__(self) -> str:
        return f"Rep({self.A0!r}, {self.status})"


def commute_range(A0: BlockMatrix) -> tuple[int, int]:
    """Shifts r for which A0 A0^{(r)} or A0^{(r)} A0 can be nonzero (inclusive)."""
    if A0.is_zero():
        return (0, -1)
    lo = min(A0.jMin - A0.iMax, A0.iMin - A0.jMax)
    hi = max(A0.jMax - A0.iMin, A0.iMax - A0.jMin)
    return (lo, hi)


def bm_power(A: BlockMatrix, n: int) -> BlockMatrix:
    out = A
    for _ in range(n - 1):
        if out.is_zero():
            break
        out = bm_compose(out, A)
    return out


def validate(rep: Rep) -> ValidationReport:
    """Check A0^p = 0 (equivalently (I + A0)^p = I) and [A0, A0^{(r)}] = 0."""
    A0, p = rep.A0, rep.p
    lo, hi = commute_range(A0)
    report = None
    P = bm_power(A0, p)
    if not P.is_zero():
        key = P.support()[0]
        report = ValidationReport(False, f"(I + A0)^{p} != I: block {key} of A0^{p} is nonzero",
                                  {"check": "order", "block": key}, (lo, hi))
    else:
        for r in range(lo, hi + 1):
            S = shift_conjugate(A0, r)
            diff = bm_compose(A0, S) - bm_compose(S, A0)
            if not diff.is_zero():
                key = diff.support()[0]
                report = ValidationReport(
                    False, f"A0 does not commute with its shift by {r}: block {key} differs",
                    {"check": "commute", "r": r, "block": key}, (lo, hi))
                break
    if report is None:
        report = ValidationReport(True, "", None, (lo, hi))
    rep._report = report
    return report


def require_valid(rep: Rep) -> Rep:
    report = rep.report or validate(rep)
    if not report.valid:
        raise InvalidRep(report.reason)
    return rep


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def unipotent_mul(X: BlockMatrix, Y: BlockMatrix) -> BlockMatrix:
    """(I + X)(I + Y) - I."""
    return X + Y + bm_compose(X, Y)


def _scalar_terms(f) -> dict[int, int]:
    if isinstance(f, SeriesVector):
        if f.d != 1:
            raise DimensionMismatch("f must be a scalar series (d = 1)")
        return f.scalar_terms()
    return dict(f)


def phi_minus_id(rep: Rep, f) -> BlockMatrix:
    """phi(f) - I for an exact Laurent polynomial f (series or {deg: coeff})."""
    require_valid(rep)
    if isinstance(f, SeriesVector) and not f.is_exact:
        raise PrecisionError("phi_minus_id needs an exact Laurent polynomial")
    out = BlockMatrix.zero(rep.p, rep.d)
    if rep.A0.is_zero():
        return out
    for r, c in sorted(_scalar_terms(f).items()):
        c %= rep.p
        if not c:
            continue
        S = shift_conjugate(rep.A0, r)
        for _ in range(c):
            out = unipotent_mul(out, S)
    return out


def phi_apply(rep: Rep, f: SeriesVector, z: SeriesVector) -> SeriesVector:
    """phi(f) z, carrying only the coefficients f and z determine."""
    require_valid(rep)
    if f.p != rep.p or f.d != 1:
        raise DimensionMismatch("f must be a scalar series over the same field")
    known = SeriesVector.scalar(rep.p, f.scalar_terms())
    X = phi_minus_id(rep, known)
    out = z + bm_apply(X, z)
    bound = None
    if f.prec is not None and not rep.A0.is_zero():
        delta = min([0] + [i - j for i, j in X.blocks])
        bound = rep.A0.iMin + f.prec + delta
    prec = min_prec(z.prec, apply_precision(X, z), bound)
    if prec is not None:
        if prec <= z.lo + min([0] + [i - j for i, j in X.blocks]):
            raise PrecisionError("no coefficient of the output is determined")
        return out.truncate(prec)
    return out


# ---------------------------------------------------------------------------
# The algebra generated by shifted generators
# ---------------------------------------------------------------------------


def flatten(A: BlockMatrix) -> dict:
    out = {}
    for (i, j), m in A.blocks.items():
        rows, cols = np.nonzero(m.a)
        for a, b in zip(rows.tolist(), cols.tolist()):
            out[(i, j, a, b)] = int(m.a[a, b])
    return out


@dataclass
class AlgebraSpan:
    """Linear span of all nonempty products of A0^{(r)} for r in ``shifts``.

    ``elements`` are products (word, matrix) that together form a basis; a
    word lists the shifts of its factors. ``complete`` is False when a length
    budget stopped the closure before a zero layer was reached.
    """

    shifts: tuple[int, ...]
    elements: list[tuple[tuple[int, ...], BlockMatrix]]
    basis: SpanBasis
    layer_dims: list[int] = field(default_factory=list)
    complete: bool = True

    def support(self) -> set[tuple[int, int]]:
        return {(i, j) for _, M in self.elements for (i, j) in M.blocks}

    def contains(self, M: BlockMatrix) -> bool:
        return self.basis.contains(flatten(M))

    @property
    def nilpotency_length(self) -> int | None:
        """Least n with every product of n generators zero (None if unknown)."""
        return len(self.layer_dims) + 1 if self.complete else None


def algebra_span(
    A0: BlockMatrix, shifts: Iterable[int], max_len: int | None = None, max_elements: int = 20000
) -> AlgebraSpan:
    """Close {A0^{(r)} : r in shifts} under products, layer by layer.

    Layer k spans the products of exactly k generators; since the generators
    commute and are nilpotent, some layer is zero and the loop stops.
    """
    shifts = tuple(sorted(set(shifts)))
    p = A0.p
    gens = {r: shift_conjugate(A0, r) for r in shifts}
    total = SpanBasis(p)
    elements: list[tuple[tuple[int, ...], BlockMatrix]] = []
    dims: list[int] = []
    layer = [((r,), g) for r, g in gens.items()]
    while True:
        lb = SpanBasis(p)
        kept = []
        for word, M in layer:
            if M.is_zero():
                continue
            flat = flatten(M)
            if lb.add(flat):
                kept.append((word, M))
                if total.add(flat):
                    elements.append((word, M))
                    if len(elements) > max_elements:
                        raise ResourceExhausted("algebra span too large", "algebra", {"elements": len(elements)})
        if not kept:
            return AlgebraSpan(shifts, elements, total, dims, True)
        dims.append(len(kept))
        if max_len is not None and len(dims) >= max_len:
            return AlgebraSpan(shifts, elements, total, dims, False)
        layer = [(tuple(sorted((r,) + word)), bm_compose(g, M)) for word, M in kept for r, g in gens.items()]


def product_width(A0: BlockMatrix) -> int:
    """Nonzero products of shifted generators use shifts spanning at most this."""
    if A0.is_zero():
        return 0
    return min(A0.iMax - A0.iMin, A0.jMax - A0.jMin)


def word_matrix(A0: BlockMatrix, word: Iterable[int]) -> BlockMatrix:
    out = None
    for r in word:
        S = shift_conjugate(A0, r)
        out = S if out is None else bm_compose(out, S)
    return out if out is not None else BlockMatrix.zero(A0.p, A0.d)


def positive_shifts(A0: BlockMatrix, row_stop: int) -> range:
    """Shifts r >= 0 whose products can reach a row below ``row_stop``."""
    if A0.is_zero():
        return range(0)
    return range(0, max(0, row_stop - A0.iMin))


# ---------------------------------------------------------------------------
# Zero patterns
# ---------------------------------------------------------------------------


def zero_pattern(rep: Rep, window: range = range(-16, 16), max_m: int = 8) -> ZeroPattern:
    """Support envelope of the algebra of A(f), f in F_p[[t]], and monotone
    sequences (a_m), (b_i) certifying zeros within the window."""
    require_valid(rep)
    A0 = rep.A0
    alg = algebra_span(A0, positive_shifts(A0, window.stop))
    env = frozenset(k for k in alg.support() if k[0] in window)
    # a_0 = 0 says rows i < 0 vanish right of the diagonal, which is exactly
    # invariance of F_p[[t]]^d under phi(t^n f) for n >= 0
    broken = sorted(k for k in env if k[0] < 0 and k[1] > k[0])
    if broken:
        raise BranchError(f"phi(F_p[[t]]) does not preserve F_p[[t]]^d (block {broken[0]}); normalize first")
    rowmax: dict[int, int] = {}
    for i, j in env:
        rowmax[i] = max(rowmax.get(i, j - i), j - i)
    nonneg = [i for i in window if i >= 0]
    b: dict[int, int] = {}
    cur = None
    for i in nonneg:
        if i in rowmax:
            cur = rowmax[i] if cur is None else max(cur, rowmax[i])
        b[i] = cur
    first = next((b[i] for i in nonneg if b[i] is not None), -1)
    b = {i: (first if v is None else v) for i, v in b.items()}
    a = [0]
    for m in range(1, max_m + 1):
        rows = [i for i, j in env if j > i - m]
        a.append(min([a[-1]] + rows))
    return ZeroPattern(tuple(a), b, env, window)


# ---------------------------------------------------------------------------
# Invariant lattices
# ---------------------------------------------------------------------------


def _operator_matrix(apply, p: int, d: int, D: int) -> np.ndarray:
    """Matrix (columns = images) of a map on Q_D restricted to L / t^D L."""
    n = 2 * D * d
    G = np.zeros((n, n), dtype=np.int64)
    for m in range(0, D):
        for k in range(d):
            img = apply(SeriesVector.monomial(p, d, k, m))
            img = SeriesVector(p, d, {x: v for x, v in img.coeffs.items() if x < D})
            G[:, (m + D) * d + k] = to_quotient(img, D)
    return G


def _preimage(G: np.ndarray, V: np.ndarray, p: int, n: int) -> np.ndarray:
    """Rows x of V with G x in span(V)."""
    if V.shape[0] == 0:
        return V
    ann = nullspace(V, p, n)
    if ann.shape[0] == 0:
        return V
    # coordinates c over the rows of V: conditions ann . G . (c V)^T = 0
    M = (ann @ G @ V.T) % p
    ker = nullspace(M, p, V.shape[0])
    if ker.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64)
    return row_basis((ker @ V) % p, p, n)


def _verify_invariant(V: CompactOpenSubgroup, rep: Rep, shifts: range, bw: int) -> bool:
    if not V.is_tau_invariant():
        return False
    gens = V.generators() + [
        SeriesVector.monomial(V.p, V.d, k, m) for m in range(V.K, V.K + bw) for k in range(V.d)
    ]
    for r in shifts:
        S = shift_conjugate(rep.A0, r)
        for v in gens:
            if not subgroup_membership(V, v + bm_apply(S, v)):
                return False
    return True


def invariant_subgroup(rep: Rep, max_depth: int = 256) -> CompactOpenSubgroup:
    """Largest t-stable subgroup of F_p[[t]]^d stable under phi(F_p[[t]]).

    Works in L / t^D L for growing D, and accepts the result only after an
    exact check of every generator against every effective phi(t^r).
    """
    require_valid(rep)
    A0, p, d = rep.A0, rep.p, rep.d
    if A0.is_zero():
        return CompactOpenSubgroup.standard(p, d)
    bw = max(0, max(j - i for i, j in A0.blocks))
    D = max(1, -A0.iMin, bw + 1)
    tried = []
    while D <= max_depth:
        n = 2 * D * d
        shifts = range(0, D - A0.iMin)
        ops = []
        for r in shifts:
            S = shift_conjugate(A0, r)
            ops.append(_operator_matrix(lambda z, S=S: z + bm_apply(S, z), p, d, D))
        T = _operator_matrix(lambda z: shift(z, 1), p, d, D)
        V = CompactOpenSubgroup.standard(p, d).embed(D)
        while True:
            before = V.shape[0]
            for G in ops:
                V = _preimage(G, V, p, n)
            V = _preimage(T, V, p, n)
            if V.shape[0] == before:
                break
        cand = CompactOpenSubgroup(p, d, D, V)
        if _verify_invariant(cand, rep, shifts, bw):
            return cand
        tried.append(D)
        D *= 2
    raise ResourceExhausted("no invariant lattice found within the depth bound", "invariant_subgroup",
                            {"depths": tried})


def conjugate_rep(rep: Rep, cob: ChangeOfBasis) -> Rep:
    """The rep theta^{-1} phi theta."""
    return Rep(conjugate_blocks(rep.A0, cob))


@dataclass(frozen=True)
class Normalized:
    V: CompactOpenSubgroup
    cob: ChangeOfBasis
    rep: Rep


def normalize(rep: Rep) -> Normalized:
    """Conjugate so that phi(F_p[[t]]) preserves the standard lattice."""
    V = invariant_subgroup(rep)
    cob = change_basis(V)
    inner = conjugate_rep(rep, cob)
    require_valid(inner)
    return Normalized(V, cob, inner)


# ---------------------------------------------------------------------------
# Passing to a lower triangular subrepresentation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedRep:
    d_prime: int
    U0: CompactOpenSubgroup
    theta: ChangeOfBasis
    inner: Rep
    window: int
    shifts: tuple[int, ...] = ()


def u0_shifts(A0: BlockMatrix) -> range:
    """Shifts whose products can meet a row < 0 and a column >= 0."""
    if A0.is_zero():
        return range(0)
    return range(-A0.jMax, -A0.iMin)


def u0_depth(A0: BlockMatrix) -> int:
    """n with t^n F_p[[t]]^d inside U0: products only see columns below it."""
    if A0.is_zero():
        return 1
    return max(1, A0.jMax - A0.iMin)


def u0_subgroup(rep: Rep, window: int = 64) -> tuple[CompactOpenSubgroup, AlgebraSpan]:
    """U0 = {eta in F_p[[t]]^d : phi(f) eta in F_p[[t]]^d for every f}."""
    A0, p, d = rep.A0, rep.p, rep.d
    n = u0_depth(A0)
    if n > window:
        raise ResourceExhausted("window exhausted", "u0_reduce", {"needed": n, "window": window})
    alg = algebra_span(A0, u0_shifts(A0))
    rows = []
    for _, M in alg.elements:
        for (i, j), m in M.blocks.items():
            if i < 0 <= j < n:
                for a in range(d):
                    if m.a[a].any():
                        row = np.zeros(n * d, dtype=np.int64)
                        row[j * d:(j + 1) * d] = m.a[a]
                        rows.append(row)
    if rows:
        ker = nullspace(np.array(rows) % p, p, n * d)
    else:
        ker = np.eye(n * d, dtype=np.int64)
    if ker.shape[0] == 0:
        raise ResourceExhausted("window exhausted", "u0_reduce", {"window": window})
    W = np.zeros((ker.shape[0], 2 * n * d), dtype=np.int64)
    W[:, n * d:] = ker
    return CompactOpenSubgroup(p, d, n, W), alg


def u0_reduce(rep: Rep, window: int = 64) -> ReducedRep:
    """Conjugate phi restricted to U = union of t^{-n} U0 into lower triangular form."""
    require_valid(rep)
    p, d = rep.p, rep.d
    if rep.is_lower_triangular():
        std = CompactOpenSubgroup.standard(p, d)
        return ReducedRep(d, std, change_basis(std), rep, window)
    U0, alg = u0_subgroup(rep, window)
    cob = change_basis(U0)
    inner = conjugate_rep(rep, cob)
    require_valid(inner)
    if not inner.is_lower_triangular():  # pragma: no cover - guaranteed by the construction
        raise ArithmeticError("conjugated generator is not lower triangular")
    return ReducedRep(d, U0, cob, inner, window, alg.shifts)
