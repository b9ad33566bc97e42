"""Joint fixed vectors of phi(F_p((t))).

The pipeline conjugates the representation until the standard lattice is
invariant, passes to a lower triangular subrepresentation, and then builds a
vector killed by every phi(t^r) - I. Every result is re-checked from scratch
against the original generator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

import numpy as np

from .blocks import BlockMatrix, LazyEndo, bm_apply, shift_conjugate
from .errors import BranchError, InvalidRep, ResourceExhausted
from .errors import NotCommuting, NotNilpotent
from .linalg import MatFp, is_unipotent, joint_strict_triangularize, nullspace, rref
from .rep import (
    ReducedRep,
    Rep,
    algebra_span,
    normalize,
    positive_shifts,
    product_width,
    require_valid,
    u0_reduce,
    validate,
    zero_pattern,
)
from .series import SeriesVector, shift

PASS, FAIL = "PASS", "FAIL"


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Residual:
    r: int
    max_degree: int | None
    ok: bool


@dataclass
class FixedVectorResult:
    xi: SeriesVector
    exact: bool
    residuals: list[Residual]
    trace: dict = field(default_factory=dict)
    oracle: SeriesVector | None = None
    oracle_agrees: bool | None = None

    @property
    def ok(self) -> bool:
        return not self.xi.is_zero() and all(res.ok for res in self.residuals)


def effective_shifts(A0: BlockMatrix, xi: SeriesVector) -> range:
    """Shifts r for which A0^{(r)} can touch a coefficient of xi."""
    if A0.is_zero() or not xi.coeffs:
        return range(0)
    return range(min(xi.coeffs) - A0.jMax, max(xi.coeffs) - A0.jMin + 1)


def residuals(rep: Rep, xi: SeriesVector, extra: Iterable[int] = ()) -> list[Residual]:
    """(phi(t^r) - I) xi for every effective r, recomputed from the generator."""
    A0 = rep.A0
    rs = sorted(set(effective_shifts(A0, xi)) | set(extra))
    if xi.prec is not None and not A0.is_zero():
        rs = sorted(set(rs) | set(range(xi.lo - A0.jMax, xi.prec - A0.jMin)))
    out = []
    for r in rs:
        if A0.is_zero():
            out.append(Residual(r, None, True))
            continue
        img = bm_apply(shift_conjugate(A0, r), xi)
        top = A0.iMax + r if img.prec is None else img.prec - 1
        out.append(Residual(r, top, img.is_zero()))
    return out


def is_fixed_exact(A0: BlockMatrix, xi: SeriesVector) -> bool:
    return all(bm_apply(shift_conjugate(A0, r), xi).is_zero() for r in effective_shifts(A0, xi))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------


def _stacked_constraints(A0: BlockMatrix, L: int, T: int) -> np.ndarray:
    d, p = A0.d, A0.p
    n = (T - L) * d
    rows = []
    for r in range(L - A0.jMax, T - A0.jMin):
        for (i, j), m in A0.blocks.items():
            jj = j + r
            if L <= jj < T:
                block = np.zeros((d, n), dtype=np.int64)
                block[:, (jj - L) * d:(jj - L + 1) * d] = m.a
                rows.append(((i + r), block))
    if not rows:
        return np.zeros((0, n), dtype=np.int64)
    # sum contributions landing on the same output degree
    acc: dict[int, np.ndarray] = {}
    for deg, block in rows:
        acc[deg] = acc[deg] + block if deg in acc else block
    return np.vstack([acc[k] for k in sorted(acc)]) % p


def oracle_fixed_vector(rep: Rep, L: int = -8, R: int = 8) -> SeriesVector | None:
    """Least-degree exact xi supported in [L, R) killed by every A0^{(r)}.

    The support is grown one degree at a time; the first nonzero kernel is
    put in reduced echelon form and its first row is returned.
    """
    require_valid(rep)
    p, d, A0 = rep.p, rep.d, rep.A0
    if A0.is_zero():
        return SeriesVector.monomial(p, d, 0, L)
    for T in range(L + 1, R + 1):
        C = _stacked_constraints(A0, L, T)
        ker = nullspace(C, p, (T - L) * d) if C.shape[0] else np.eye((T - L) * d, dtype=np.int64)
        if ker.shape[0] == 0:
            continue
        # prefer vectors whose top degree is T-1: put high degrees first
        order = [x for deg in reversed(range(T - L)) for x in range(deg * d, (deg + 1) * d)]
        red, piv = rref(ker[:, order], p)
        row = np.zeros((T - L) * d, dtype=np.int64)
        row[order] = red[0]
        vec = SeriesVector(p, d, {L + k: row[k * d:(k + 1) * d].tolist() for k in range(T - L)})
        if not vec.is_zero():
            return vec
    return None


# ---------------------------------------------------------------------------
# Above the diagonal
# ---------------------------------------------------------------------------


@dataclass
class EtaAbove:
    eta: SeriesVector
    i_star: int
    j_star: int
    a: int
    b: int
    word: tuple[int, ...]
    z: int
    c: int
    checked: int


def _lattice_envelope(A0: BlockMatrix, row_stop: int, max_len: int | None = None):
    alg = algebra_span(A0, positive_shifts(A0, row_stop), max_len=max_len)
    return alg


def eta_above(rep: Rep, c: int, max_len: int | None = None) -> EtaAbove | None:
    """A vector eta in F_p[[t]]^d with eta_0 != 0 meeting the level-c conditions
    (A(f) t^n eta)_m = 0 for f in F_p[[t]], n <= c and m < n.

    Returns None when every A(f), f in F_p[[t]], is lower triangular.
    """
    require_valid(rep)
    if c < 1:
        raise ValueError("c must be positive")
    A0, p, d = rep.A0, rep.p, rep.d
    above = [i for i, j in A0.blocks if j > i]
    if not above:
        return None
    stop = min(above) + 1
    alg = _lattice_envelope(A0, stop, max_len)
    env = {k for k in alg.support() if k[0] < stop}
    ups = [(i, j) for i, j in env if j > i]
    i_star = min(i for i, _ in ups)
    j_star = max(j for i, j in ups if i == i_star)
    cand = [(i, j) for i, j in env if j >= i - c]
    a = min(i for i, _ in cand)
    b = max(j for i, j in cand if i == a)
    word, W = next((w, M) for w, M in alg.elements if (a, b) in M.blocks)
    blk = W.blocks[(a, b)]
    z = next(k for k in range(d) if blk.a[:, k].any())
    eta = shift(bm_apply(W, SeriesVector.monomial(p, d, z, b)), -a)
    if eta.valuation() != 0 or not any(eta.coefficient(0)):
        raise ArithmeticError("eta_0 vanished; the lattice is not invariant")
    checked = _check_above_conditions(A0, eta, c, max_len)
    return EtaAbove(eta, i_star, j_star, a, b, word, z, c, checked)


def _check_above_conditions(A0: BlockMatrix, eta: SeriesVector, c: int, max_len: int | None) -> int:
    """Verify (W t^n eta)_m = 0 for every product W of A0^{(r)}, r >= 0,
    n <= c and m < n. Returns the number of products examined."""
    lo = min(eta.coeffs)
    count = 0
    for n in range(A0.iMin + 1, c + 1):
        shifts = range(max(0, n + lo - A0.jMax), n - A0.iMin)
        if not len(shifts):
            continue
        alg = algebra_span(A0, shifts, max_len=max_len)
        v = shift(eta, n)
        for _, W in alg.elements:
            count += 1
            img = bm_apply(W, v)
            bad = [m for m in img.coeffs if m < n]
            if bad:
                raise ArithmeticError(f"condition fails at n={n}, m={bad[0]}")
    return count


# ---------------------------------------------------------------------------
# Constraint families and the limit step
# ---------------------------------------------------------------------------


@dataclass
class ConstraintFamily:
    """Increasing family E_n of functionals eta -> ((A t^j eta)_m)[a].

    ``level(n)`` lists the triples (j, m, a) of E_n; every operator in ``ops``
    is applied with each triple.
    """

    ops: list[BlockMatrix]
    level: Callable[[int], list[tuple[int, int, int]]]

    def functionals(self, n: int) -> list[tuple[int, int, int]]:
        return self.level(n)

    def violations(self, eta: SeriesVector, n: int) -> list[tuple[int, int, int]]:
        """Determined functionals of E_n that eta does not annihilate."""
        bad = []
        cache: dict[tuple[int, int], SeriesVector] = {}
        for j, m, a in self.functionals(n):
            for k, A in enumerate(self.ops):
                img = cache.get((k, j))
                if img is None:
                    img = cache[(k, j)] = bm_apply(A, shift(eta, j))
                if img.prec is not None and m >= img.prec:
                    continue
                if img.coefficient(m)[a]:
                    bad.append((j, m, a))
                    break
        return bad


def general_family(A0: BlockMatrix) -> ConstraintFamily:
    """E_r: (A t^j eta)_i = 0 for -r < i < r and i - r < j <= i."""

    def level(r: int) -> list[tuple[int, int, int]]:
        return [(j, i, a) for i in range(-r + 1, r) for j in range(i - r + 1, i + 1) for a in range(A0.d)]

    return ConstraintFamily([A0], level)


def refine_limit(
    family: ConstraintFamily, candidates: Mapping[int, SeriesVector], N: int, repeat: int = 2
) -> SeriesVector:
    """A vector known mod t^N with eta_0 != 0 agreeing with infinitely many
    candidates in the pigeonhole sense.

    Prefix lengths grow one degree at a time; at each step the least prefix
    (lexicographically) shared by at least ``repeat`` surviving candidates is
    kept. The result is checked against every level not exceeding the largest
    surviving index.
    """
    if not candidates:
        raise ResourceExhausted("no candidates supplied", "refine_limit")
    items = sorted(candidates.items())
    p, d = items[0][1].p, items[0][1].d
    for n, eta in items:
        if eta.coeffs and min(eta.coeffs) < 0 or not any(eta.coefficient(0)):
            raise ValueError(f"candidate {n} is not in F_p[[t]]^d with nonzero constant term")
    pool = items
    if len(pool) < repeat:
        repeat = len(pool)
    for length in range(1, N + 1):
        groups: dict[tuple, list] = {}
        for n, eta in pool:
            key = tuple(eta.coefficient(k) for k in range(length))
            groups.setdefault(key, []).append((n, eta))
        ok = sorted(k for k, g in groups.items() if len(g) >= repeat)
        if not ok:
            raise ResourceExhausted(
                f"no coefficient prefix of length {length} repeats; supply more candidates",
                "refine_limit", {"length": length, "candidates": len(pool)})
        pool = groups[ok[0]]
    eta = pool[0][1].truncate(N)
    top = max(n for n, _ in pool)
    for n in range(1, top + 1):
        bad = family.violations(eta, n)
        if bad:
            raise ArithmeticError(f"limit violates level {n} at {bad[0]}")
    return SeriesVector(p, d, eta.coeffs, prec=N, lo=0)


# ---------------------------------------------------------------------------
# Lower triangular case
# ---------------------------------------------------------------------------


def _as_rep(rep: Rep | ReducedRep) -> Rep:
    return rep.inner if isinstance(rep, ReducedRep) else rep


@dataclass
class DiagonalReport:
    status: str
    unipotent: bool
    generators: list[MatFp]
    products_checked: int
    triangularizer: MatFp | None = None
    reason: str = ""


def diagonal_check(rep: Rep | ReducedRep, exhaustive_up_to: int = 3) -> DiagonalReport:
    """Diagonal blocks of I + A0 are unipotent and d-fold products of
    A0_{i,i} vanish.

    Does not require a validated rep, so corrupted inputs produce FAIL.
    """
    R = _as_rep(rep)
    A0, p, d = R.A0, R.p, R.d
    if any(i < j for i, j in A0.blocks):
        raise BranchError("diagonal_check needs a lower triangular generator")
    gens = [A0.blocks[(i, j)] for i, j in sorted(A0.blocks) if i == j]
    eye = MatFp.identity(p, d)
    for g in gens:
        if not is_unipotent(eye + g):
            return DiagonalReport(FAIL, False, gens, 0, None, "a diagonal block of I + A0 is not unipotent")
    try:
        P = joint_strict_triangularize(gens, d, p)
    except (NotNilpotent, NotCommuting) as exc:
        return DiagonalReport(FAIL, True, gens, 0, None, str(exc))
    count = 0
    if gens:
        if d <= exhaustive_up_to:
            tuples = itertools.product(gens, repeat=d)
        else:
            tuples = (tuple(gens[(s + k) % len(gens)] for k in range(d)) for s in range(len(gens)))
        for tup in tuples:
            prod = tup[0]
            for g in tup[1:]:
                prod = prod @ g
            count += 1
            if not prod.is_zero():
                return DiagonalReport(FAIL, True, gens, count, P, "a d-fold diagonal product is nonzero")
    return DiagonalReport(PASS, True, gens, count, P)


NILPOTENT, NOT_NILPOTENT, INCONCLUSIVE = "nilpotent", "not_nilpotent_within_bounds", "inconclusive"


@dataclass
class NilpotencyReport:
    status: str
    N: int | None
    layer_dims: list[int]
    shifts: tuple[int, ...]

    @property
    def nilpotent_in_window(self) -> bool:
        return self.status == NILPOTENT


def algebra_nilpotency(rep: Rep | ReducedRep, max_len: int | None = None, max_elements: int = 20000) -> NilpotencyReport:
    """Least N with every product of N generators A0^{(r)} zero.

    Nonzero products only involve shifts within ``product_width`` of each
    other, so shifts [0, width] represent every product up to translation.
    """
    R = _as_rep(rep)
    A0 = R.A0
    if A0.is_zero():
        return NilpotencyReport(NILPOTENT, 1, [], ())
    shifts = range(0, product_width(A0) + 1)
    try:
        alg = algebra_span(A0, shifts, max_len=max_len, max_elements=max_elements)
    except ResourceExhausted:
        return NilpotencyReport(INCONCLUSIVE, None, [], tuple(shifts))
    if alg.complete:
        return NilpotencyReport(NILPOTENT, alg.nilpotency_length, alg.layer_dims, alg.shifts)
    return NilpotencyReport(NOT_NILPOTENT, None, alg.layer_dims, alg.shifts)


def fixed_vector_nilpotent(rep: Rep | ReducedRep, N: int) -> SeriesVector:
    """xi = B eta with B a nonzero product of N - 1 generators."""
    R = _as_rep(rep)
    A0, p, d = R.A0, R.p, R.d
    if N == 1:
        return SeriesVector.monomial(p, d, 0, 0)
    alg = algebra_span(A0, range(0, product_width(A0) + 1))
    if alg.nilpotency_length != N:
        raise BranchError(f"products of length {N} do not all vanish, or shorter ones already do")
    word, B = next(((w, M) for w, M in alg.elements if len(w) == N - 1), (None, None))
    if B is None:
        raise ArithmeticError("no nonzero product of length N - 1")
    for j in range(B.jMin, B.jMax + 1):
        for k in range(d):
            xi = bm_apply(B, SeriesVector.monomial(p, d, k, j))
            if not xi.is_zero():
                if not is_fixed_exact(A0, xi):  # pragma: no cover - A xi lies in A^N = 0
                    raise ArithmeticError("B eta is not fixed")
                return xi
    raise ArithmeticError("B annihilates every monomial")  # pragma: no cover


def general_eta(rep: Rep | ReducedRep, r: int, max_len: int | None = None, a_r: int | None = None) -> dict:
    """eta with eta_0 != 0 and (A t^j eta)_i = 0 for -r < i < r, i - r < j.

    Searches products B of at least N = (r + a_r) d generators with
    B_{0,-q} != 0 and B vanishing on offsets above -q, q >= r + a_r, and
    returns eta = B(z t^{-q}). When no such product exists within the budget
    the first basis monomial e_k meeting the conditions is used instead.
    """
    R = _as_rep(rep)
    A0, p, d = R.A0, R.p, R.d
    if a_r is None:
        zp = zero_pattern(R, range(-(r + 4) - product_width(A0), r + 4), r)
        a_r = -zp.a[r]
    N = (r + a_r) * d
    family = general_family(A0)
    alg = algebra_span(A0, range(0, product_width(A0) + 1), max_len=max_len)
    for word, W in alg.elements:
        if len(word) < N:
            continue
        top = max(j - i for i, j in W.blocks)
        q = -top
        if q < r + a_r:
            continue
        i0 = min(i for i, j in W.blocks if j - i == top)
        B = shift_conjugate(W, -i0)
        blk = B.blocks[(0, -q)]
        z = next(k for k in range(d) if blk.a[:, k].any())
        eta = bm_apply(B, SeriesVector.monomial(p, d, z, -q))
        if not family.violations(eta, r):
            return {"eta": eta, "q": q, "N": N, "a_r": a_r, "word": word, "z": z, "route": "product"}
    for k in range(d):
        eta = SeriesVector.monomial(p, d, k, 0)
        if not family.violations(eta, r):
            return {"eta": eta, "q": None, "N": N, "a_r": a_r, "word": (), "z": k, "route": "monomial"}
    raise ResourceExhausted(
        f"no product of length >= {N} reaching offset -{r + a_r} within the budget",
        "fixed_vector_general",
        {"r": r, "N": N, "deepest_vanishing": _deepest_vanishing(alg)})


def _deepest_vanishing(alg) -> int:
    """Largest q with some product of maximal length zero on the first q - 1 sub-diagonals."""
    best = 0
    for word, W in alg.elements:
        if W.blocks:
            best = max(best, -max(j - i for i, j in W.blocks))
    return best


def fixed_vector_general(rep: Rep | ReducedRep, r: int, max_len: int | None = None) -> SeriesVector:
    """The level-r vector of the non-nilpotent construction.

    Refuses when the generated algebra is already known to be nilpotent
    under the same budget; that case belongs to the nilpotent branch.
    """
    R = _as_rep(rep)
    if algebra_nilpotency(R, max_len=max_len).status == NILPOTENT:
        raise BranchError("the algebra is nilpotent; use fixed_vector_nilpotent")
    return general_eta(R, r, max_len)["eta"]


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


@dataclass
class SolveOptions:
    precision: int = 16
    oracle_window: tuple[int, int] = (-8, 8)
    residual_range: tuple[int, int] = (-4, 4)
    max_len: int | None = None
    levels: int = 8
    u0_window: int = 64
    eta_c: int = 2


def _map_back(theta: LazyEndo, xi: SeriesVector) -> SeriesVector:
    if xi.is_exact:
        return theta.apply(xi)
    P = xi.prec
    while theta.needs(P) > xi.prec:
        P -= 1
    return theta.apply(xi, P)


def solve(rep: Rep, options: SolveOptions | None = None) -> FixedVectorResult:
    """A nonzero xi with phi(f) xi = xi for every f."""
    opts = options or SolveOptions()
    report = validate(rep)
    if not report.valid:
        raise InvalidRep(report.reason)
    trace: dict = {"phases": ["validate"]}

    def stage(name, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ResourceExhausted as exc:
            raise ResourceExhausted(f"{name}: {exc}", exc.stage or name, exc.diagnostics) from exc

    norm = stage("invariant_subgroup", normalize, rep)
    trace["phases"].append("invariant_subgroup")
    trace["lattice_depth"] = norm.V.K
    trace["lattice_standard"] = norm.V == norm.V.standard(rep.p, rep.d)
    rep1 = norm.rep

    eta = stage("eta_above", eta_above, rep1, opts.eta_c)
    if eta is not None:
        trace["phases"].append("eta_above")
        trace.update({"i_star": eta.i_star, "j_star": eta.j_star, "a": eta.a, "b": eta.b})
    red = stage("u0_reduce", u0_reduce, rep1, opts.u0_window)
    trace["phases"].append("u0_reduce")
    trace["d_prime"] = red.d_prime
    rep2 = red.inner

    diag = diagonal_check(rep2)
    trace["phases"].append("diagonal_check")
    trace["diagonal"] = diag.status
    if diag.status != PASS:  # pragma: no cover - valid reps always pass
        raise InvalidRep(f"diagonal check failed: {diag.reason}")

    nil = algebra_nilpotency(rep2, opts.max_len)
    trace["nilpotency"] = nil.status
    trace["N"] = nil.N
    xi2 = None
    if nil.status == NILPOTENT:
        xi2 = fixed_vector_nilpotent(rep2, nil.N)
        trace["phases"].append("nilpotent")
    else:
        trace["phases"].append("general")
        cands, qs = {}, []
        for r in range(1, opts.levels + 1):
            res = stage("fixed_vector_general", general_eta, rep2, r, opts.max_len)
            cands[r] = res["eta"]
            qs.append(res["q"])
        trace["q"] = qs
        xi2 = stage("refine_limit", refine_limit, general_family(rep2.A0), cands, opts.precision)

    xi1 = _map_back(red.theta.theta, xi2)
    xi = _map_back(norm.cob.theta, xi1)
    lo, hi = opts.residual_range
    res = residuals(rep, xi, range(lo, hi + 1))
    out = FixedVectorResult(xi, xi.is_exact, res, trace)
    if xi.is_zero() or not out.ok:  # pragma: no cover - guarded by the constructions
        raise ArithmeticError("constructed vector failed the residual check")
    oracle = oracle_fixed_vector(rep, *opts.oracle_window)
    out.oracle = oracle
    if oracle is not None:
        out.oracle_agrees = is_fixed_exact(rep.A0, oracle) and out.ok
    return out
