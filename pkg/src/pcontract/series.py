"""Vectors in F_p((t))^d known on a degree window.

A :class:`SeriesVector` is a partial description: coefficients are known for
every degree below ``prec`` (all degrees when the vector is exact) and are
zero below ``lo``. Operations never invent coefficients past the precision
they can justify.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

from .errors import DimensionMismatch, PrecisionError, WindowOverflow
from .linalg import check_prime

EXACT = None
DEGREE_BOUND = 1 << 20


def _check_degree(n: int) -> int:
    if not -DEGREE_BOUND <= n <= DEGREE_BOUND:
        raise WindowOverflow(f"degree {n} outside [-2^20, 2^20]")
    return n


class SeriesVector:
    """Element of F_p((t))^d with exact-or-truncated semantics.

    ``prec is None`` means exact with finite support. Equality compares the
    known information (modulus, dimension, precision, coefficients); ``lo`` is
    only a bound.
    """

    __slots__ = ("p", "d", "lo", "prec", "coeffs")

    def __init__(
        self,
        p: int,
        d: int,
        coeffs: Mapping[int, Sequence[int]] | None = None,
        prec: int | None = EXACT,
        lo: int | None = None,
    ):
        self.p = check_prime(p)
        if d < 1:
            raise DimensionMismatch(f"dimension must be positive, got {d}")
        self.d = int(d)
        if prec is not None:
            prec = _check_degree(int(prec))
        clean: dict[int, tuple[int, ...]] = {}
        for n, v in (coeffs or {}).items():
            n = int(n)
            if len(v) != d:
                raise DimensionMismatch(f"coefficient at degree {n} has length {len(v)}, expected {d}")
            if prec is not None and n >= prec:
                continue
            t = tuple(int(x) % self.p for x in v)
            if any(t):
                clean[_check_degree(n)] = t
        if lo is None:
            lo = min(clean) if clean else (prec if prec is not None else 0)
        lo = _check_degree(int(lo))
        if clean and min(clean) < lo:
            raise ValueError(f"nonzero coefficient at degree {min(clean)} below lo={lo}")
        if prec is not None and lo > prec:
            lo = prec
        self.lo = lo
        self.prec = prec
        self.coeffs = clean

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, p: int, d: int, prec: int | None = EXACT) -> "SeriesVector":
        return cls(p, d, {}, prec=prec)

    @classmethod
    def monomial(cls, p: int, d: int, k: int, degree: int, c: int = 1) -> "SeriesVector":
        """``c * e_k * t^degree`` with 0-based coordinate ``k``."""
        v = [0] * d
        v[k] = c
        return cls(p, d, {degree: v})

    @classmethod
    def scalar(cls, p: int, terms: Mapping[int, int], prec: int | None = EXACT) -> "SeriesVector":
        """Scalar Laurent series (d = 1) from ``{degree: coefficient}``."""
        return cls(p, 1, {n: (c,) for n, c in terms.items()}, prec=prec)

    # -- queries ------------------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.prec is None

    def degrees(self) -> list[int]:
        return sorted(self.coeffs)

    def is_zero(self) -> bool:
        """True if every known coefficient vanishes."""
        return not self.coeffs

    def valuation(self) -> int | None:
        return min(self.coeffs) if self.coeffs else None

    def max_degree(self) -> int | None:
        return max(self.coeffs) if self.coeffs else None

    def coefficient(self, n: int) -> tuple[int, ...]:
        return project(self, n)

    def scalar_terms(self) -> dict[int, int]:
        if self.d != 1:
            raise DimensionMismatch("scalar_terms on a vector of dimension > 1")
        return {n: v[0] for n, v in self.coeffs.items()}

    def truncate(self, prec: int) -> "SeriesVector":
        new = prec if self.prec is None else min(prec, self.prec)
        return SeriesVector(self.p, self.d, self.coeffs, prec=new, lo=min(self.lo, new))

    def with_lo(self, lo: int) -> "SeriesVector":
        return SeriesVector(self.p, self.d, self.coeffs, prec=self.prec, lo=lo)

    def agrees_below(self, other: "SeriesVector", n: int) -> bool:
        """Coefficients below degree ``n`` are known in both and equal."""
        _same_space(self, other)
        for v in (self, other):
            if v.prec is not None and v.prec < n:
                raise PrecisionError(f"degree {n} exceeds precision {v.prec}")
        a = {k: c for k, c in self.coeffs.items() if k < n}
        b = {k: c for k, c in other.coeffs.items() if k < n}
        return a == b

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other: "SeriesVector") -> "SeriesVector":
        return vec_add(self, other)

    def __neg__(self) -> "SeriesVector":
        return self.scale(-1)

    def __sub__(self, other: "SeriesVector") -> "SeriesVector":
        return vec_add(self, other.scale(-1))

    def scale(self, c: int) -> "SeriesVector":
        c %= self.p
        return SeriesVector(
            self.p, self.d, {n: [c * x for x in v] for n, v in self.coeffs.items()}, prec=self.prec, lo=self.lo
        )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, SeriesVector)
            and (self.p, self.d, self.prec) == (other.p, other.d, other.prec)
            and self.coeffs == other.coeffs
        )

    def __hash__(self) -> int:
        return hash((self.p, self.d, self.prec, tuple(sorted(self.coeffs.items()))))

    def __repr__(self) -> str:
        terms = " + ".join(f"{list(v)}t^{n}" for n, v in sorted(self.coeffs.items())) or "0"
        tail = "" if self.prec is None else f" + O(t^{self.prec})"
        return f"SeriesVector(p={self.p}, d={self.d}: {terms}{tail})"


def _same_space(a: SeriesVector, b: SeriesVector) -> None:
    if a.p != b.p or a.d != b.d:
        raise DimensionMismatch(f"(p, d) differ: {(a.p, a.d)} vs {(b.p, b.d)}")


def min_prec(*precs: int | None) -> int | None:
    finite = [x for x in precs if x is not None]
    return min(finite) if finite else None


def shift(z: SeriesVector, n: int) -> SeriesVector:
    """Apply the n-th power of coordinatewise multiplication by t."""
    return SeriesVector(
        z.p,
        z.d,
        {k + n: v for k, v in z.coeffs.items()},
        prec=None if z.prec is None else z.prec + n,
        lo=z.lo + n,
    )


def project(z: SeriesVector, n: int) -> tuple[int, ...]:
    """The degree-n coefficient vector."""
    if z.prec is not None and n >= z.prec:
        raise PrecisionError(f"degree {n} is not determined (precision {z.prec})")
    return z.coeffs.get(n, (0,) * z.d)


def vec_add(a: SeriesVector, b: SeriesVector) -> SeriesVector:
    _same_space(a, b)
    out = dict(a.coeffs)
    for n, v in b.coeffs.items():
        w = out.get(n)
        out[n] = v if w is None else tuple(x + y for x, y in zip(w, v))
    return SeriesVector(a.p, a.d, out, prec=min_prec(a.prec, b.prec), lo=min(a.lo, b.lo))


def vec_sum(vectors: Iterable[SeriesVector], p: int, d: int, prec: int | None = EXACT) -> SeriesVector:
    out: dict[int, list[int]] = {}
    lo = None
    for z in vectors:
        if z.p != p or z.d != d:
            raise DimensionMismatch(f"(p, d) differ: {(z.p, z.d)} vs {(p, d)}")
        prec = min_prec(prec, z.prec)
        lo = z.lo if lo is None else min(lo, z.lo)
        for n, v in z.coeffs.items():
            acc = out.setdefault(n, [0] * d)
            for k, x in enumerate(v):
                acc[k] += x
    if lo is not None and prec is not None:
        lo = min(lo, prec)
    return SeriesVector(p, d, out, prec=prec, lo=lo)


_TERM = re.compile(r"^(?:(\d+)\*?)?(?:t(?:\^\(?(-?\d+)\)?)?)?$")


def parse_poly(text: str, p: int) -> SeriesVector:
    """Parse ``"c*t^r + ..."`` into an exact scalar Laurent polynomial mod p.

    Accepts bare constants, ``t``, ``t^-2``, ``3t^4`` and leading minus signs.
    """
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty polynomial")
    s = re.sub(r"(?<![\^(])-", "+-", s)
    terms: dict[int, int] = {}
    for raw in filter(None, s.split("+")):
        sign = 1
        if raw.startswith("-"):
            sign, raw = -1, raw[1:]
        m = _TERM.match(raw)
        if not m or not raw:
            raise ValueError(f"cannot parse term {raw!r}")
        coeff, exp = m.groups()
        has_t = "t" in raw
        c = int(coeff) if coeff is not None else 1
        n = (int(exp) if exp is not None else 1) if has_t else 0
        terms[n] = terms.get(n, 0) + sign * c
    return SeriesVector.scalar(p, terms)
