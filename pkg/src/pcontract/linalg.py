"""Exact linear algebra over the prime field F_p.

Dense work uses ``int64`` numpy arrays reduced after every operation; with
``p < 2**16`` no intermediate product overflows for the matrix sizes this
package builds. :class:`SpanBasis` handles sparse vectors keyed by arbitrary
sortable tuples, which is how block-matrix algebras are spanned.
"""

from __future__ import annotations

import heapq
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, NotCommuting, NotNilpotent

MAX_PRIME = 1 << 16


@lru_cache(maxsize=None)
def check_prime(p: int) -> int:
    if not isinstance(p, (int, np.integer)) or not 2 <= p < MAX_PRIME:
        raise ValueError(f"modulus must be a prime in [2, 2^16), got {p!r}")
    p = int(p)
    if any(p % q == 0 for q in range(2, int(p**0.5) + 1)):
        raise ValueError(f"modulus {p} is not prime")
    return p


def inv_mod(x: int, p: int) -> int:
    return pow(int(x) % p, -1, p)


class MatFp:
    """Immutable matrix over F_p."""

    __slots__ = ("p", "a", "_hash")

    def __init__(self, p: int, entries):
        self.p = check_prime(p)
        a = np.array(entries, dtype=np.int64)
        if a.ndim != 2 or a.shape[0] == 0 or a.shape[1] == 0:
            raise DimensionMismatch(f"expected a non-empty 2-d grid, got shape {a.shape}")
        a %= self.p
        a.setflags(write=False)
        self.a = a
        self._hash = None

    @classmethod
    def identity(cls, p: int, n: int) -> "MatFp":
        return cls(p, np.eye(n, dtype=np.int64))

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int | None = None) -> "MatFp":
        return cls(p, np.zeros((rows, rows if cols is None else cols), dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.a.shape[0]

    @property
    def cols(self) -> int:
        return self.a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.a.shape

    def is_zero(self) -> bool:
        return not self.a.any()

    def tolist(self) -> list[list[int]]:
        return self.a.tolist()

    def _check(self, other: "MatFp") -> None:
        if not isinstance(other, MatFp):
            raise TypeError(f"expected MatFp, got {type(other).__name__}")
        if other.p != self.p:
            raise DimensionMismatch(f"moduli differ: {self.p} vs {other.p}")

    def __matmul__(self, other: "MatFp") -> "MatFp":
        return mat_mul(self, other)

    def __add__(self, other: "MatFp") -> "MatFp":
        self._check(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"shapes differ: {self.shape} vs {other.shape}")
        return MatFp(self.p, self.a + other.a)

    def __sub__(self, other: "MatFp") -> "MatFp":
        self._check(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"shapes differ: {self.shape} vs {other.shape}")
        return MatFp(self.p, self.a - other.a)

    def __neg__(self) -> "MatFp":
        return MatFp(self.p, -self.a)

    def scale(self, c: int) -> "MatFp":
        return MatFp(self.p, self.a * (int(c) % self.p))

    def __pow__(self, n: int) -> "MatFp":
        if self.rows != self.cols:
            raise DimensionMismatch("power of a non-square matrix")
        out = MatFp.identity(self.p, self.rows)
        base = self
        while n:
            if n & 1:
                out = out @ base
            base = base @ base
            n >>= 1
        return out

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(x) for x in (self.a @ np.asarray(v, dtype=np.int64)) % self.p)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatFp)
            and self.p == other.p
            and self.shape == other.shape
            and bool((self.a == other.a).all())
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.p, self.shape, self.a.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"MatFp(p={self.p}, {self.tolist()})"


def mat_mul(a: MatFp, b: MatFp) -> MatFp:
    a._check(b)
    if a.cols != b.rows:
        raise DimensionMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return MatFp(a.p, (a.a @ b.a) % a.p)


# ---------------------------------------------------------------------------
# Dense elimination on raw arrays
# ---------------------------------------------------------------------------


def rref(m, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p with first-nonzero pivoting.

    Returns the reduced matrix (zero rows kept at the bottom) and the pivot
    columns in order.
    """
    a = np.array(m, dtype=np.int64) % p
    if a.ndim != 2:
        raise DimensionMismatch("rref expects a 2-d array")
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = (a[r] * inv_mod(a[r, c], p)) % p
        col = a[:, c].copy()
        col[r] = 0
        if col.any():
            a = (a - np.outer(col, a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(m, p: int) -> int:
    m = np.asarray(m)
    if m.size == 0:
        return 0
    return len(rref(m, p)[1])


def nullspace(m, p: int, ncols: int | None = None) -> np.ndarray:
    """Basis of the right kernel, one vector per row."""
    m = np.asarray(m, dtype=np.int64)
    if m.size == 0:
        n = ncols if ncols is not None else (m.shape[1] if m.ndim == 2 else 0)
        return np.eye(n, dtype=np.int64)
    r, pivots = rref(m, p)
    n = m.shape[1]
    free = [c for c in range(n) if c not in set(pivots)]
    out = np.zeros((len(free), n), dtype=np.int64)
    for t, f in enumerate(free):
        out[t, f] = 1
        for i, c in enumerate(pivots):
            out[t, c] = (-r[i, f]) % p
    return out


def row_basis(m, p: int, ncols: int | None = None) -> np.ndarray:
    """Reduced basis of the row space (RREF with zero rows dropped)."""
    m = np.asarray(m, dtype=np.int64)
    if m.size == 0:
        n = ncols if ncols is not None else (m.shape[1] if m.ndim == 2 else 0)
        return np.zeros((0, n), dtype=np.int64)
    r, pivots = rref(m, p)
    return r[: len(pivots)]


def annihilator(basis, p: int, n: int) -> np.ndarray:
    """Rows h with h.x = 0 exactly for x in the row space of ``basis``."""
    basis = np.asarray(basis, dtype=np.int64).reshape(-1, n)
    if basis.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    return nullspace(basis, p)


def in_rowspace(basis, x, p: int) -> bool:
    basis = np.asarray(basis, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64).reshape(1, -1)
    if basis.size == 0:
        return not (x % p).any()
    return rank(np.vstack([basis, x]), p) == rank(basis, p)


def intersect_rowspaces(u, w, p: int, n: int) -> np.ndarray:
    u = np.asarray(u, dtype=np.int64).reshape(-1, n)
    w = np.asarray(w, dtype=np.int64).reshape(-1, n)
    if u.shape[0] == 0 or w.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64)
    # x in both  <=>  x annihilated by both annihilators
    h = np.vstack([annihilator(u, p, n), annihilator(w, p, n)])
    if h.shape[0] == 0:
        return row_basis(np.eye(n, dtype=np.int64), p)
    return row_basis(nullspace(h, p), p, n)


def express(basis, x, p: int) -> np.ndarray | None:
    """Coefficients c with c @ basis == x, or None if x is outside the span.

    ``basis`` must have independent rows.
    """
    basis = np.asarray(basis, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64) % p
    k = basis.shape[0]
    aug = np.hstack([basis.T % p, x.reshape(-1, 1)])
    r, pivots = rref(aug, p)
    if k in pivots:
        return None
    c = np.zeros(k, dtype=np.int64)
    for i, col in enumerate(pivots):
        c[col] = r[i, k]
    return c


# ---------------------------------------------------------------------------
# Operations on MatFp
# ---------------------------------------------------------------------------


def kernel_basis(a: MatFp) -> list[tuple[int, ...]]:
    """Basis of the right kernel of ``a``; empty iff ``a`` is injective."""
    return [tuple(int(x) for x in row) for row in nullspace(a.a, a.p)]


def mat_rank(a: MatFp) -> int:
    return rank(a.a, a.p)


def is_nilpotent(a: MatFp) -> bool:
    if a.rows != a.cols:
        raise DimensionMismatch("nilpotence of a non-square matrix")
    return (a ** a.rows).is_zero()


def is_unipotent(a: MatFp, d: int | None = None) -> bool:
    """True iff (a - I)^d = 0."""
    if a.rows != a.cols:
        raise DimensionMismatch("unipotence of a non-square matrix")
    d = a.rows if d is None else d
    if d != a.rows:
        raise DimensionMismatch(f"matrix is {a.rows}x{a.rows}, dimension given as {d}")
    return ((a - MatFp.identity(a.p, d)) ** d).is_zero()


def joint_strict_triangularize(mats: Sequence[MatFp], n: int | None = None, p: int | None = None) -> MatFp:
    """Change of basis making a commuting nilpotent family strictly upper triangular.

    Builds the flag 0 < V_1 < V_2 < ... where V_{k+1} is the set of x with
    M x in V_k for every member M. The returned matrix P has the flag basis as
    columns, so ``P^-1 M P`` is strictly upper triangular for every M.
    """
    mats = list(mats)
    if not mats:
        if n is None or p is None:
            raise ValueError("empty family needs explicit n and p")
        return MatFp.identity(p, n)
    p, n = mats[0].p, mats[0].rows
    for k, m in enumerate(mats):
        if m.p != p or m.shape != (n, n):
            raise DimensionMismatch(f"member {k} has shape {m.shape} mod {m.p}")
        if not is_nilpotent(m):
            raise NotNilpotent(f"member {k} is not nilpotent")
    for s in range(len(mats)):
        for t in range(s + 1, len(mats)):
            if mats[s] @ mats[t] != mats[t] @ mats[s]:
                raise NotCommuting(f"members {s} and {t} do not commute", (s, t))

    flag = np.zeros((0, n), dtype=np.int64)
    while flag.shape[0] < n:
        h = annihilator(flag, p, n)
        cond = np.vstack([(h @ m.a) % p for m in mats])
        nxt = row_basis(nullspace(cond, p), p, n)
        before = flag.shape[0]
        for row in nxt:
            if not in_rowspace(flag, row, p):
                flag = np.vstack([flag, row])
        if flag.shape[0] == before:  # pragma: no cover - excluded by the nilpotence check
            raise NotNilpotent("flag construction stalled")
    return MatFp(p, flag.T)


def inverse(a: MatFp) -> MatFp:
    n = a.rows
    if a.cols != n:
        raise DimensionMismatch("inverse of a non-square matrix")
    r, pivots = rref(np.hstack([a.a, np.eye(n, dtype=np.int64)]), a.p)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return MatFp(a.p, r[:, n:])


# ---------------------------------------------------------------------------
# Sparse incremental span
# ---------------------------------------------------------------------------

SparseVec = Mapping[Hashable, int]


class SpanBasis:
    """Incrementally built echelon basis of sparse vectors over F_p.

    Keys must be mutually comparable; the pivot of a stored row is its least
    key, with coefficient normalized to 1.
    """

    def __init__(self, p: int):
        self.p = check_prime(p)
        self.rows: dict = {}

    def __len__(self) -> int:
        return len(self.rows)

    def reduce(self, v: SparseVec) -> dict:
        p = self.p
        w = {k: c % p for k, c in v.items() if c % p}
        heap = list(w)
        heapq.heapify(heap)
        seen = set()
        while heap:
            k = heapq.heappop(heap)
            if k in seen:
                continue
            seen.add(k)
            c = w.get(k, 0)
            if not c or k not in self.rows:
                continue
            for kk, cc in self.rows[k].items():
                nv = (w.get(kk, 0) - c * cc) % p
                if nv:
                    if kk not in w:
                        heapq.heappush(heap, kk)
                    w[kk] = nv
                else:
                    w.pop(kk, None)
        return w

    def add(self, v: SparseVec) -> bool:
        """Insert ``v``; return True iff it enlarged the span."""
        w = self.reduce(v)
        if not w:
            return False
        piv = min(w)
        inv = inv_mod(w[piv], self.p)
        self.rows[piv] = {k: (c * inv) % self.p for k, c in w.items()}
        return True

    def contains(self, v: SparseVec) -> bool:
        return not self.reduce(v)

    def support(self) -> set:
        out: set = set()
        for row in self.rows.values():
            out.update(row)
        return out


def sparse_from_iter(items: Iterable[tuple[Hashable, int]], p: int) -> dict:
    out: dict = {}
    for k, c in items:
        c = (out.get(k, 0) + c) % p
        if c:
            out[k] = c
        else:
            out.pop(k, None)
    return out
