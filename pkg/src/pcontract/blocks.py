"""Block matrices over F_p((t))^d and lazily evaluated endomorphisms.

Block (i, j) of an endomorphism A is the d x d matrix sending the degree-j
coefficient of the input to the degree-i coefficient of the output. All
concrete block matrices have finite support; anything else is a
:class:`LazyEndo`, known through an evaluator and a block oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import CertificateError, DimensionMismatch, NotTidy, PrecisionError
from .lattice import (
    CompactOpenSubgroup,
    TidyBasisData,
    basis_expand,
    complement_basis,
)
from .linalg import MatFp, check_prime
from .series import DEGREE_BOUND, SeriesVector, _check_degree, shift, vec_sum

Key = tuple[int, int]


class BlockMatrix:
    """Finitely supported block matrix (A_{i,j}) with d x d blocks over F_p."""

    __slots__ = ("p", "d", "blocks")

    def __init__(self, p: int, d: int, blocks: Mapping[Key, MatFp | Iterable] | None = None):
        self.p = check_prime(p)
        self.d = int(d)
        clean: dict[Key, MatFp] = {}
        for (i, j), m in (blocks or {}).items():
            if not isinstance(m, MatFp):
                m = MatFp(p, m)
            if m.p != self.p or m.shape != (self.d, self.d):
                raise DimensionMismatch(f"block {(i, j)} has shape {m.shape} over F_{m.p}")
            if not m.is_zero():
                clean[(_check_degree(int(i)), _check_degree(int(j)))] = m
        self.blocks = clean

    @classmethod
    def zero(cls, p: int, d: int) -> "BlockMatrix":
        return cls(p, d)

    @classmethod
    def single(cls, p: int, d: int, i: int, j: int, m) -> "BlockMatrix":
        return cls(p, d, {(i, j): m})

    def block(self, i: int, j: int) -> MatFp:
        return self.blocks.get((i, j)) or MatFp.zeros(self.p, self.d)

    def is_zero(self) -> bool:
        return not self.blocks

    def support(self) -> list[Key]:
        return sorted(self.blocks)

    @property
    def iMin(self) -> int | None:
        return min((i for i, _ in self.blocks), default=None)

    @property
    def iMax(self) -> int | None:
        return max((i for i, _ in self.blocks), default=None)

    @property
    def jMin(self) -> int | None:
        return min((j for _, j in self.blocks), default=None)

    @property
    def jMax(self) -> int | None:
        return max((j for _, j in self.blocks), default=None)

    def _same(self, other: "BlockMatrix") -> None:
        if (self.p, self.d) != (other.p, other.d):
            raise DimensionMismatch(f"(p, d) differ: {(self.p, self.d)} vs {(other.p, other.d)}")

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        self._same(other)
        out = dict(self.blocks)
        for key, m in other.blocks.items():
            out[key] = out[key] + m if key in out else m
        return BlockMatrix(self.p, self.d, out)

    def __neg__(self) -> "BlockMatrix":
        return self.scale(-1)

    def __sub__(self, other: "BlockMatrix") -> "BlockMatrix":
        return self + other.scale(-1)

    def scale(self, c: int) -> "BlockMatrix":
        return BlockMatrix(self.p, self.d, {k: m.scale(c) for k, m in self.blocks.items()})

    def __matmul__(self, other: "BlockMatrix") -> "BlockMatrix":
        return bm_compose(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, BlockMatrix) and (self.p, self.d) == (other.p, other.d) and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash((self.p, self.d, tuple(sorted(self.blocks.items()))))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {m.tolist()}" for k, m in sorted(self.blocks.items()))
        return f"BlockMatrix(p={self.p}, d={self.d}, {{{inner}}})"


def identity_plus(A: BlockMatrix, c: int = 1) -> Callable[[SeriesVector], SeriesVector]:
    """The map z -> z + c A z."""
    return lambda z: z + bm_apply(A, z).scale(c)


def apply_precision(A: BlockMatrix, z: SeriesVector) -> int | None:
    """Least output degree that ``z`` does not determine under ``A``."""
    if z.prec is None:
        return None
    rows = [i for (i, j) in A.blocks if j >= z.prec]
    return min(rows) if rows else None


def bm_apply(A: BlockMatrix, z: SeriesVector) -> SeriesVector:
    """Evaluate A z; the output carries only the coefficients z determines."""
    if (A.p, A.d) != (z.p, z.d):
        raise DimensionMismatch(f"(p, d) differ: {(A.p, A.d)} vs {(z.p, z.d)}")
    prec = apply_precision(A, z)
    out: dict[int, np.ndarray] = {}
    for (i, j), m in A.blocks.items():
        v = z.coeffs.get(j)
        if v is None or (prec is not None and i >= prec):
            continue
        w = m.a @ np.asarray(v, dtype=np.int64)
        out[i] = out[i] + w if i in out else w
    coeffs = {i: (w % A.p).tolist() for i, w in out.items()}
    lo = None
    if prec is not None:
        lo = min([i for (i, j) in A.blocks if j >= z.lo] + [prec])
    return SeriesVector(A.p, A.d, coeffs, prec=prec, lo=lo)


def bm_compose(A: BlockMatrix, B: BlockMatrix) -> BlockMatrix:
    """(AB)_{i,k} = sum_j A_{i,j} B_{j,k}."""
    A._same(B)
    by_row: dict[int, list[tuple[int, MatFp]]] = {}
    for (j, k), m in B.blocks.items():
        by_row.setdefault(j, []).append((k, m))
    acc: dict[Key, np.ndarray] = {}
    for (i, j), a in A.blocks.items():
        for k, b in by_row.get(j, ()):
            prod = a.a @ b.a
            acc[(i, k)] = acc[(i, k)] + prod if (i, k) in acc else prod
    return BlockMatrix(A.p, A.d, {key: MatFp(A.p, v) for key, v in acc.items()})


def shift_conjugate(A: BlockMatrix, r: int) -> BlockMatrix:
    """t^r A t^{-r}: block (i, j) moves to (i + r, j + r)."""
    return BlockMatrix(A.p, A.d, {(i + r, j + r): m for (i, j), m in A.blocks.items()})


# ---------------------------------------------------------------------------
# Lazy endomorphisms
# ---------------------------------------------------------------------------


class LazyEndo:
    """An endomorphism known through an evaluator.

    ``evaluate(z, prec)`` returns A z truncated at degree ``prec``; it may
    raise :class:`PrecisionError` when z is not known far enough, and
    ``needs(prec)`` reports how far that is. ``exact`` optionally maps exact
    inputs to exact outputs. Blocks are read off from images of monomials.
    """

    def __init__(
        self,
        p: int,
        d: int,
        evaluate: Callable[[SeriesVector, int], SeriesVector],
        needs: Callable[[int], int],
        exact: Callable[[SeriesVector], SeriesVector] | None = None,
        tag: object = None,
    ):
        self.p, self.d = check_prime(p), int(d)
        self._evaluate = evaluate
        self.needs = needs
        self._exact = exact
        self.tag = tag
        self._columns: dict[int, tuple[int, list[SeriesVector]]] = {}

    @classmethod
    def from_blocks(cls, A: BlockMatrix) -> "LazyEndo":
        def needs(prec: int) -> int:
            return max([j + 1 for (i, j) in A.blocks if i < prec], default=-DEGREE_BOUND)

        return cls(A.p, A.d, lambda z, prec: bm_apply(A, z).truncate(prec), needs, lambda z: bm_apply(A, z), tag=A)

    @property
    def finite(self) -> BlockMatrix | None:
        return self.tag if isinstance(self.tag, BlockMatrix) else None

    def apply(self, z: SeriesVector, prec: int | None = None) -> SeriesVector:
        if (z.p, z.d) != (self.p, self.d):
            raise DimensionMismatch(f"(p, d) differ: {(z.p, z.d)} vs {(self.p, self.d)}")
        if prec is None:
            if z.is_exact and self._exact is not None:
                return self._exact(z)
            raise PrecisionError("an output precision is required for this endomorphism")
        return self._evaluate(z, prec)

    def column(self, j: int, prec: int) -> list[SeriesVector]:
        """Images of e_k t^j for every k, known below ``prec``."""
        cached = self._columns.get(j)
        if cached is None or cached[0] < prec:
            imgs = [self.apply(SeriesVector.monomial(self.p, self.d, k, j), prec) for k in range(self.d)]
            self._columns[j] = cached = (prec, imgs)
        return cached[1]

    def block(self, i: int, j: int) -> MatFp:
        if self.finite is not None:
            return self.finite.block(i, j)
        cols = self.column(j, i + 1)
        return MatFp(self.p, np.array([c.coefficient(i) for c in cols], dtype=np.int64).T)

    def window_blocks(self, rows: range, cols: range) -> BlockMatrix:
        """The blocks inside a rectangular window, as a finite matrix."""
        out = {}
        for j in cols:
            imgs = self.column(j, rows.stop)
            for i in rows:
                m = np.array([c.coefficient(i) for c in imgs], dtype=np.int64).T
                if m.any():
                    out[(i, j)] = m
        return BlockMatrix(self.p, self.d, out)

    def compose(self, other: "LazyEndo") -> "LazyEndo":
        """self after other."""
        if (self.p, self.d) != (other.p, other.d):
            raise DimensionMismatch("(p, d) differ")
        if self.finite is not None and other.finite is not None:
            return LazyEndo.from_blocks(bm_compose(self.finite, other.finite))

        def evaluate(z, prec):
            return self.apply(other.apply(z, self.needs(prec)), prec)

        exact = None
        if self._exact is not None and other._exact is not None:
            exact = lambda z: self._exact(other._exact(z))  # noqa: E731
        return LazyEndo(self.p, self.d, evaluate, lambda prec: other.needs(self.needs(prec)), exact, ("compose", self, other))


# ---------------------------------------------------------------------------
# The M conditions
# ---------------------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "PASS", "FAIL", "INCONCLUSIVE"


@dataclass
class MReport:
    """Outcome per condition: M1 (rows bounded on the right), M2 (columns
    bounded below), M3 (no mass in the upper-right corner)."""

    status: dict[str, str]
    counterexample: dict[str, Key | None] = field(default_factory=dict)
    window: tuple[range, range] | None = None

    @property
    def ok(self) -> bool:
        return all(s == PASS for s in self.status.values())


def _witness(w, x):
    if w is None:
        return None
    if callable(w):
        return w(x)
    return w.get(x)


def check_m_conditions(
    A: BlockMatrix | LazyEndo,
    rows: range | None = None,
    cols: range | None = None,
    J=None,
    I=None,
    corner: tuple[int, int] | None = None,
) -> MReport:
    """Check the three tail conditions on a window.

    ``J`` maps a row i to J_i (A_{i,j} = 0 for j > J_i), ``I`` maps a column
    j to I_j (A_{i,j} = 0 for i < I_j) and ``corner = (I, J)`` claims
    A_{i,j} = 0 whenever i < I and j > J. Finite support passes outright.
    A condition whose witnesses are missing or test no cell of the window is
    INCONCLUSIVE.
    """
    finite = A if isinstance(A, BlockMatrix) else A.finite
    if finite is not None:
        return MReport({c: PASS for c in ("M1", "M2", "M3")}, {c: None for c in ("M1", "M2", "M3")})
    if rows is None or cols is None:
        return MReport({c: INCONCLUSIVE for c in ("M1", "M2", "M3")}, {c: None for c in ("M1", "M2", "M3")})
    W = A.window_blocks(rows, cols)

    def run(cells):
        tested = 0
        for i, j in cells:
            tested += 1
            if (i, j) in W.blocks:
                return FAIL, (i, j)
        return (PASS if tested else INCONCLUSIVE), None

    status, cex = {}, {}
    if J is None or any(_witness(J, i) is None for i in rows):
        status["M1"], cex["M1"] = INCONCLUSIVE, None
    else:
        status["M1"], cex["M1"] = run((i, j) for i in rows for j in cols if j > _witness(J, i))
    if I is None or any(_witness(I, j) is None for j in cols):
        status["M2"], cex["M2"] = INCONCLUSIVE, None
    else:
        status["M2"], cex["M2"] = run((i, j) for j in cols for i in rows if i < _witness(I, j))
    if corner is None:
        status["M3"], cex["M3"] = INCONCLUSIVE, None
    else:
        ci, cj = corner
        status["M3"], cex["M3"] = run((i, j) for i in rows for j in cols if i < ci and j > cj)
    return MReport(status, cex, (rows, cols))


# ---------------------------------------------------------------------------
# Endomorphisms from images of a tidy basis
# ---------------------------------------------------------------------------


def make_endo(
    basis: TidyBasisData,
    w: Callable[[int], SeriesVector],
    n0: Callable[[int], int] | None,
    exact: Callable[[SeriesVector], SeriesVector] | None = None,
    tag: object = None,
) -> LazyEndo:
    """The endomorphism sending t^j b_k to w(k + j d).

    ``n0(D)`` certifies convergence: every w(n) with n >= n0(D) vanishes in
    degrees <= D. The certificate is spot-checked on the d indices right
    after each cut-off used.
    """
    if n0 is None:
        raise CertificateError("a convergence certificate n0(D) is required")
    V = basis.V
    p, d, K = V.p, V.d, V.K

    def jmax(prec: int) -> int:
        return (n0(prec - 1) - 1) // d

    def needs(prec: int) -> int:
        return jmax(prec) + K + 1

    def evaluate(z: SeriesVector, prec: int) -> SeriesVector:
        cut = n0(prec - 1)
        for n in range(cut, cut + d):
            v = w(n).valuation()
            if v is not None and v < prec:
                raise CertificateError(f"w({n}) has a nonzero coefficient at degree {v} < {prec}")
        coeffs = basis_expand(z, basis, jmax(prec))
        terms = []
        for (j, k), c in coeffs.items():
            n = k + j * d
            if n < cut:
                terms.append(w(n).scale(c))
        out = vec_sum(terms, p, d, prec)
        return out.truncate(prec)

    return LazyEndo(p, d, evaluate, needs, exact, tag)


# ---------------------------------------------------------------------------
# Change of basis
# ---------------------------------------------------------------------------


def triangular_apply(b: tuple[SeriesVector, ...], z: SeriesVector) -> SeriesVector:
    """sum_k z_k(t) b_k for an exact z, with z_k the k-th coordinate series."""
    p, d = z.p, z.d
    terms = [shift(b[k], n).scale(v[k]) for n, v in z.coeffs.items() for k in range(d) if v[k]]
    return vec_sum(terms, p, d)


def triangular_solve(b: tuple[SeriesVector, ...], z: SeriesVector) -> SeriesVector:
    """Exact coordinates x with sum_k x_k(t) b_k = z.

    Requires b_k to vanish in coordinates after k and to equal a monomial
    t^{m_k} in coordinate k, so back-substitution divides only by monomials.
    """
    if not z.is_exact:
        raise PrecisionError("triangular_solve needs an exact vector")
    p, d = z.p, z.d
    diag = []
    for k, v in enumerate(b):
        lead = [n for n, c in v.coeffs.items() if c[k]]
        if len(lead) != 1 or v.coeffs[lead[0]][k] != 1 or any(c[kk] for c in v.coeffs.values() for kk in range(k + 1, d)):
            raise NotTidy("basis is not triangular with monomial diagonal")
        diag.append(lead[0])
    r = z
    x: dict[int, list[int]] = {}
    for k in reversed(range(d)):
        xk = {n - diag[k]: c[k] for n, c in r.coeffs.items() if c[k]}
        for n, c in xk.items():
            x.setdefault(n, [0] * d)[k] = c
        r = r - vec_sum([shift(b[k], n).scale(c) for n, c in xk.items()], p, d)
    if not r.is_zero():  # pragma: no cover - guarded by the triangular shape
        raise ArithmeticError("back-substitution left a residual")
    return SeriesVector(p, d, x)


@dataclass(frozen=True)
class ChangeOfBasis:
    """theta maps t^j e_k to t^j b_k; inverse undoes it."""

    basis: TidyBasisData
    theta: LazyEndo
    inverse: LazyEndo


def change_basis(V: CompactOpenSubgroup | TidyBasisData) -> ChangeOfBasis:
    """The shift-commuting automorphism carrying the standard lattice onto V."""
    basis = V if isinstance(V, TidyBasisData) else complement_basis(V)
    V = basis.V
    p, d = V.p, V.d
    b = basis.b
    vmin = min(v.valuation() for v in b)
    std = TidyBasisData.standard(p, d)
    theta = make_endo(
        std,
        lambda n: shift(b[n % d], n // d),
        lambda D: (D - vmin + 1) * d,
        exact=lambda z: triangular_apply(b, z),
        tag=("theta", basis),
    )
    inv = make_endo(
        basis,
        lambda n: SeriesVector.monomial(p, d, n % d, n // d),
        lambda D: (D + 1) * d,
        exact=lambda z: triangular_solve(b, z),
        tag=("theta_inverse", basis),
    )
    return ChangeOfBasis(basis, theta, inv)


def conjugate_blocks(A: BlockMatrix, cob: ChangeOfBasis) -> BlockMatrix:
    """theta^{-1} A theta as a finite block matrix (exact)."""
    if A.is_zero():
        return A
    p, d = A.p, A.d
    b = cob.basis.b
    lo_b = min(v.valuation() for v in b)
    hi_b = max(v.max_degree() for v in b)
    out: dict[Key, list] = {}
    # theta(t^j e_k) has degrees in [j + lo_b, j + hi_b]; it meets A only if that hits a column of A
    for j in range(A.jMin - hi_b, A.jMax - lo_b + 1):
        for k in range(d):
            img = triangular_solve(b, bm_apply(A, shift(b[k], j)))
            for i, v in img.coeffs.items():
                blk = out.setdefault((i, j), np.zeros((d, d), dtype=np.int64))
                blk[:, k] = v
    return BlockMatrix(p, d, out)


# ---------------------------------------------------------------------------
# Zero patterns
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroPattern:
    """Monotone description of where the algebra may be nonzero.

    A block (i, j) is certified zero when i < a[m] and j > i - m for some m,
    or when i >= 0 and j > i + b[i]. Only the rows in ``rows`` were examined.
    """

    a: tuple[int, ...]
    b: dict[int, int]
    envelope: frozenset[Key]
    rows: range

    def __post_init__(self):
        if self.a and self.a[0] != 0:
            raise ValueError("a_0 must be 0")
        if any(x < y for x, y in zip(self.a, self.a[1:])):
            raise ValueError("a must be non-increasing")
        bs = [self.b[i] for i in sorted(self.b)]
        if any(x > y for x, y in zip(bs, bs[1:])):
            raise ValueError("b must be non-decreasing")

    def certifies_zero(self, i: int, j: int) -> bool:
        if i >= 0 and i in self.b and j > i + self.b[i]:
            return True
        return any(i < am and j > i - m for m, am in enumerate(self.a))

    def violations(self) -> list[Key]:
        """Envelope cells the pattern claims are zero (should be empty)."""
        return sorted(k for k in self.envelope if k[0] in self.rows and self.certifies_zero(*k))
