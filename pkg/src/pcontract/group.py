"""The semidirect product F_p((t))^d x_phi F_p((t)).

Elements are pairs (z, f) multiplied by (z1, f1)(z2, f2) = (z1 + phi(f1) z2,
f1 + f2). The pair of shifts (t z, t f) is a contractive automorphism; a
vector fixed by phi gives a central element of the normal part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .blocks import bm_apply, shift_conjugate
from .errors import DimensionMismatch, InvalidRep
from .linalg import row_basis
from .rep import Rep, normalize, phi_apply, require_valid, u0_reduce
from .series import SeriesVector, shift
from .solver import effective_shifts

PASS, FAIL = "PASS", "FAIL"


@dataclass(frozen=True)
class SDElement:
    z: SeriesVector
    f: SeriesVector
    rep: Rep = field(compare=False, repr=False)

    def __post_init__(self):
        if self.z.p != self.rep.p or self.z.d != self.rep.d:
            raise DimensionMismatch("normal component does not match the representation")
        if self.f.p != self.rep.p or self.f.d != 1:
            raise DimensionMismatch("twist component must be a scalar series over the same field")

    @classmethod
    def identity(cls, rep: Rep) -> "SDElement":
        return cls(SeriesVector.zero(rep.p, rep.d), SeriesVector.zero(rep.p, 1), rep)

    @classmethod
    def normal(cls, rep: Rep, z: SeriesVector) -> "SDElement":
        return cls(z, SeriesVector.zero(rep.p, 1), rep)

    @classmethod
    def twist(cls, rep: Rep, f: SeriesVector) -> "SDElement":
        return cls(SeriesVector.zero(rep.p, rep.d), f, rep)

    def is_identity(self) -> bool:
        """Every known coefficient of both components vanishes."""
        return self.z.is_zero() and self.f.is_zero()

    def truncate(self, n: int) -> "SDElement":
        return SDElement(self.z.truncate(n), self.f.truncate(n), self.rep)

    def __mul__(self, other: "SDElement") -> "SDElement":
        return sd_mul(self, other)


def _same(x: SDElement, y: SDElement) -> None:
    if x.rep is not y.rep and x.rep != y.rep:
        raise DimensionMismatch("elements belong to different representations")


def sd_mul(x: SDElement, y: SDElement) -> SDElement:
    _same(x, y)
    return SDElement(x.z + phi_apply(x.rep, x.f, y.z), x.f + y.f, x.rep)


def sd_inv(x: SDElement) -> SDElement:
    return SDElement(-phi_apply(x.rep, -x.f, x.z), -x.f, x.rep)


def sd_commutator(x: SDElement, y: SDElement) -> SDElement:
    """x y x^-1 y^-1."""
    return sd_mul(sd_mul(sd_mul(x, y), sd_inv(x)), sd_inv(y))


def contraction_auto(x: SDElement, n: int = 1) -> SDElement:
    """(t^n z, t^n f)."""
    return SDElement(shift(x.z, n), shift(x.f, n), x.rep)


# ---------------------------------------------------------------------------
# Central elements
# ---------------------------------------------------------------------------


@dataclass
class CentralReport:
    status: str
    checked: list[int]
    witness: int | None = None

    @property
    def ok(self) -> bool:
        return self.status == PASS


def central_certificate(rep: Rep, xi: SeriesVector, extra: range = range(-4, 5)) -> CentralReport:
    """Check that (xi, 0) commutes with every (0, t^r).

    Commutators with normal elements vanish since the normal part is abelian;
    [(0, t^r), (xi, 0)] = ((phi(t^r) - I) xi, 0), so only effective r matter.
    """
    require_valid(rep)
    if xi.is_zero():
        raise ValueError("xi must be nonzero")
    rs = sorted(set(effective_shifts(rep.A0, xi)) | set(extra))
    if xi.prec is not None and not rep.A0.is_zero():
        rs = sorted(set(rs) | set(range(xi.lo - rep.A0.jMax, xi.prec - rep.A0.jMin)))
    checked = []
    for r in rs:
        if rep.A0.is_zero():
            checked.append(r)
            continue
        comm = sd_commutator(SDElement.twist(rep, SeriesVector.scalar(rep.p, {r: 1})), SDElement.normal(rep, xi))
        checked.append(r)
        if not comm.is_identity():
            return CentralReport(FAIL, checked, r)
    return CentralReport(PASS, checked)


# ---------------------------------------------------------------------------
# Lower central series
# ---------------------------------------------------------------------------


@dataclass
class ClassReport:
    cls: int | None
    precision: int
    max_class: int
    dims: list[int]
    twist_precision: int

    @property
    def exceeded(self) -> bool:
        return self.cls is None

    def describe(self) -> str:
        if self.cls is None:
            return f"class >= {self.max_class + 1} at precision {self.precision}"
        return f"class <= {self.cls} at precision {self.precision}"


def lower_triangular_form(rep: Rep) -> Rep:
    """An isomorphic representation whose generator is lower triangular."""
    require_valid(rep)
    if rep.is_lower_triangular():
        return rep
    norm = normalize(rep)
    return u0_reduce(norm.rep).inner


def nilpotency_class(rep: Rep, precision: int = 16, max_class: int = 8) -> ClassReport:
    """Lower central series of H = F_p[[t]]^d x F_p[[t]] modulo congruence tails.

    With a lower triangular generator every phi(f) preserves each t^n L, so
    the pair (t^N L, t^{N'} F_p[[t]]) with N' = N + max(0, -iMin) is normal
    in H. gamma_2 and later terms lie in the normal part, where
    gamma_{k+1} is spanned by A0^{(r)} v for v in gamma_k and r >= 0.
    """
    R = lower_triangular_form(rep)
    A0, p, d, N = R.A0, R.p, R.d, precision
    if A0.is_zero():
        return ClassReport(1, N, max_class, [0], N)
    Nt = N + max(0, -A0.iMin)
    n = N * d
    mats = []
    for r in range(0, Nt):
        S = shift_conjugate(A0, r)
        M = np.zeros((n, n), dtype=np.int64)
        for j in range(N):
            for k in range(d):
                img = bm_apply(S, SeriesVector.monomial(p, d, k, j))
                for deg, v in img.coeffs.items():
                    if deg < 0:  # pragma: no cover - lower triangular keeps L
                        raise InvalidRep("generator does not preserve the lattice")
                    if deg < N:
                        M[deg * d:(deg + 1) * d, j * d + k] = v
        if M.any():
            mats.append(M % p)
    gamma = np.eye(n, dtype=np.int64)
    dims = []
    for k in range(1, max_class + 1):
        imgs = [(gamma @ M.T) % p for M in mats]
        nxt = row_basis(np.vstack(imgs), p, n) if imgs else np.zeros((0, n), dtype=np.int64)
        dims.append(nxt.shape[0])
        if nxt.shape[0] == 0:
            return ClassReport(k, N, max_class, dims, Nt)
        gamma = nxt
    return ClassReport(None, N, max_class, dims, Nt)
