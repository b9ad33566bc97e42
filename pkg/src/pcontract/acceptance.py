"""Acceptance checks shared by ``pcontract selftest`` and the test suite.

Each check is exact and returns a :class:`Check`; a check that finishes
correctly but over its time limit still fails.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Callable

from .blocks import BlockMatrix, bm_apply, bm_compose, change_basis, shift_conjugate
from .errors import PrecisionError
from .group import SDElement, central_certificate, lower_triangular_form, nilpotency_class, sd_mul
from .io import shipped_instances
from .lattice import (
    CompactOpenSubgroup,
    basis_expand,
    complement_basis,
    enumerate_cosets,
    expansion_sum,
    random_tidy,
)
from .rep import Rep, phi_apply, phi_minus_id, validate, word_matrix
from .series import SeriesVector, shift
from .solver import SolveOptions, solve


@dataclass
class Check:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float
    limit: float

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number}. {self.name}: {self.detail} ({self.seconds:.2f}s, limit {self.limit:g}s)"


def _rand_vec(rng: random.Random, p: int, d: int, lo: int, hi: int, prec: int | None = None) -> SeriesVector:
    coeffs = {n: [rng.randrange(p) for _ in range(d)] for n in range(lo, hi)}
    return SeriesVector(p, d, coeffs, prec=prec)


def _rand_bm(rng: random.Random, p: int, d: int, w: int = 8, nblocks: int = 3) -> BlockMatrix:
    blocks = {}
    for _ in range(rng.randint(1, nblocks)):
        blocks[(rng.randint(-w, w), rng.randint(-w, w))] = [[rng.randrange(p) for _ in range(d)] for _ in range(d)]
    return BlockMatrix(p, d, {k: m for k, m in blocks.items() if any(any(r) for r in m)})


def _valid_reps() -> dict[str, Rep]:
    return {n: i.rep for n, i in shipped_instances().items() if validate(i.rep).valid}


# ---------------------------------------------------------------------------


def check_ring_homomorphism(seed: int = 1, trials: int = 200) -> tuple[bool, str]:
    rng = random.Random(seed)
    for t in range(trials):
        p, d = rng.choice([2, 3, 5]), rng.choice([1, 2, 3])
        A, B = _rand_bm(rng, p, d), _rand_bm(rng, p, d)
        z = _rand_vec(rng, p, d, -8, 9)
        AB = bm_compose(A, B)
        if bm_apply(A, bm_apply(B, z)) != bm_apply(AB, z) or AB != A @ B:
            return False, f"trial {t}: composed evaluation differs (p={p}, d={d})"
        S = A + B
        if bm_apply(S, z) != bm_apply(A, z) + bm_apply(B, z):
            return False, f"trial {t}: sum evaluation differs (p={p}, d={d})"
    return True, f"{trials} random pairs agree"


def check_index_law(seed: int = 2, count: int = 20) -> tuple[bool, str]:
    rng = random.Random(seed)
    cases = [CompactOpenSubgroup.standard(p, d) for p in (2, 3) for d in (1, 2, 3)]
    cases += [random_tidy(rng.choice([2, 3]), rng.choice([1, 2, 3]), rng) for _ in range(count)]
    for n, V in enumerate(cases):
        got = len(enumerate_cosets(V, V.shifted(1)))
        if got != V.p ** V.d:
            return False, f"subgroup {n}: {got} cosets, expected {V.p ** V.d}"
    return True, f"{len(cases)} subgroups have exactly p^d cosets of tV"


def check_change_of_basis(seed: int = 3, count: int = 20, vectors: int = 50, N: int = 32) -> tuple[bool, str]:
    rng = random.Random(seed)
    for n in range(count):
        p, d = rng.choice([2, 3]), rng.choice([1, 2, 3])
        V = random_tidy(p, d, rng)
        cob = change_basis(V)
        for _ in range(vectors):
            x = _rand_vec(rng, p, d, 0, 6)
            y = cob.theta.apply(x)
            if not V.contains(y):
                return False, f"subgroup {n}: theta(x) not in V"
            if cob.inverse.apply(y) != x:
                return False, f"subgroup {n}: inverse(theta(x)) != x"
            if not cob.theta.apply(shift(x, 1)).agrees_below(shift(y, 1), N):
                return False, f"subgroup {n}: theta does not commute with t"
    return True, f"{count} subgroups x {vectors} vectors: membership, round trip, t-equivariance"


def check_shift_law(seed: int = 4, trials: int = 50) -> tuple[bool, str]:
    rng = random.Random(seed)
    reps = list(_valid_reps().values())
    for t in range(trials):
        rep = rng.choice(reps)
        f = _rand_vec(rng, rep.p, 1, -3, 4)
        r = rng.randint(-5, 5)
        lhs = phi_minus_id(rep, shift(f, r))
        rhs = shift_conjugate(phi_minus_id(rep, f), r)
        if lhs != rhs:
            return False, f"trial {t}: block tables differ at shift {r}"
    return True, f"{trials} (rep, f, r) triples agree blockwise"


def check_basis_expansion(seed: int = 5, trials: int = 100, jmax: int = 16) -> tuple[bool, str]:
    rng = random.Random(seed)
    for t in range(trials):
        p, d = rng.choice([2, 3]), rng.choice([1, 2, 3])
        V = random_tidy(p, d, rng) if t % 4 else CompactOpenSubgroup.standard(p, d)
        basis = complement_basis(V)
        gens = V.generators(V.K + 1)
        z = SeriesVector.zero(p, d)
        for g in gens:
            z = z + shift(g, rng.randint(0, 4)).scale(rng.randrange(p))
        coeffs = basis_expand(z, basis, jmax)
        rest = z - expansion_sum(coeffs, basis)
        if not V.contains(shift(rest, -(jmax + 1))):
            return False, f"trial {t}: remainder not in t^{jmax + 1} V"
        if basis_expand(expansion_sum(coeffs, basis), basis, jmax) != coeffs:
            return False, f"trial {t}: re-expansion changed the coefficients"
    return True, f"{trials} vectors reconstruct through level {jmax}"


def check_solver(name: str, rep: Rep, N: int = 32) -> tuple[bool, str]:
    res = solve(rep, SolveOptions(precision=N, oracle_window=(-8, 8)))
    if res.xi.is_zero():
        return False, f"{name}: zero vector"
    if not res.ok:
        return False, f"{name}: residual failure"
    if not res.exact and res.xi.prec < N:
        return False, f"{name}: precision {res.xi.prec} < {N}"
    if res.oracle is None or not res.oracle_agrees:
        return False, f"{name}: oracle found no fixed vector in [-8, 8)"
    return True, f"{name}: xi ok"


def check_diagonal(rep: Rep, w: int = 8) -> tuple[bool, str]:
    A0 = rep.A0
    if A0.is_zero():
        return True, "zero generator"
    gens = [r for r in range(-w, w + 1) if not shift_conjugate(A0, r).is_zero()]
    # the generators commute, so multisets of shifts suffice
    words = list(combinations_with_replacement(gens, rep.d))
    for word in words:
        B = word_matrix(A0, word)
        for i in range(-w, w + 1):
            if not B.block(i, i).is_zero():
                return False, f"word {word} has a nonzero diagonal block at {i}"
    return True, f"{len(words)} products"


def check_nilpotency(name: str, rep: Rep) -> tuple[bool, str]:
    rep_class = nilpotency_class(rep, precision=16)
    if rep_class.cls is None or rep_class.cls > rep.d + 1:
        return False, f"{name}: {rep_class.describe()} exceeds d + 1 = {rep.d + 1}"
    if name.startswith("e2_") and rep_class.cls != 2:
        return False, f"{name}: class {rep_class.cls}, expected 2"
    xi = solve(rep).xi
    cert = central_certificate(rep, xi)
    if not cert.ok:
        return False, f"{name}: central certificate failed at r = {cert.witness}"
    return True, f"{name}: {rep_class.describe()}"


def _perturb(rng: random.Random, z: SeriesVector, width: int = 6) -> SeriesVector:
    """An exact vector agreeing with z below its precision, random above."""
    tail = {n: [rng.randrange(z.p) for _ in range(z.d)] for n in range(z.prec, z.prec + width)}
    head = {n: v for n, v in z.coeffs.items()}
    return SeriesVector(z.p, z.d, {**head, **tail})


def check_precision(seed: int = 9, trials: int = 200) -> tuple[bool, str]:
    rng = random.Random(seed)
    reps = list(_valid_reps().values())
    ran = [trials, 0, 0]
    for t in range(trials):
        p, d = rng.choice([2, 3, 5]), rng.choice([1, 2, 3])
        A = _rand_bm(rng, p, d, w=4)
        P = rng.randint(0, 8)
        z = _rand_vec(rng, p, d, -3, P, prec=P)
        out = bm_apply(A, z)
        Q = out.prec if out.prec is not None else P + 64
        if not out.agrees_below(bm_apply(A, _perturb(rng, z)), Q):
            return False, f"bm_apply trial {t}: output changed below {Q}"
    for t in range(trials):
        rep = rng.choice(reps)
        P, Pf = rng.randint(2, 10), rng.randint(1, 6)
        f = _rand_vec(rng, rep.p, 1, 0, Pf, prec=Pf)
        z = _rand_vec(rng, rep.p, rep.d, -2, P, prec=P)
        try:
            out = phi_apply(rep, f, z)
        except PrecisionError:
            continue
        ran[1] += 1
        if not out.agrees_below(phi_apply(rep, _perturb(rng, f), _perturb(rng, z)), out.prec):
            return False, f"phi_apply trial {t}: output changed below {out.prec}"
    for t in range(trials):
        rep = rng.choice(reps)
        P = rng.randint(3, 10)
        x = SDElement(_rand_vec(rng, rep.p, rep.d, -1, P, prec=P), _rand_vec(rng, rep.p, 1, 0, P, prec=P), rep)
        y = SDElement(_rand_vec(rng, rep.p, rep.d, -1, P, prec=P), _rand_vec(rng, rep.p, 1, 0, P, prec=P), rep)
        try:
            xy = sd_mul(x, y)
        except PrecisionError:
            continue
        ran[2] += 1
        xp = SDElement(_perturb(rng, x.z), _perturb(rng, x.f), rep)
        yp = SDElement(_perturb(rng, y.z), _perturb(rng, y.f), rep)
        xyp = sd_mul(xp, yp)
        if not (xy.z.agrees_below(xyp.z, xy.z.prec) and xy.f.agrees_below(xyp.f, xy.f.prec)):
            return False, f"sd_mul trial {t}: output changed below its precision"
    if min(ran) < trials:
        return False, f"only {ran} of {trials} trials had a determined output"
    return True, f"{trials} trials each for bm_apply, phi_apply, sd_mul"


# ---------------------------------------------------------------------------


def _timed(number: int, name: str, limit: float, fn: Callable[[], tuple[bool, str]]) -> Check:
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # a crash is a failure with a readable reason
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    secs = time.perf_counter() - start
    if ok and secs > limit:
        ok, detail = False, detail + "; over time limit"
    return Check(number, name, ok, detail, secs, limit)


def _per_instance(check: Callable[[str, Rep], tuple[bool, str]], reps: dict[str, Rep], limit: float):
    """Run a per-instance check, enforcing the limit on each instance."""

    def run():
        worst, notes = 0.0, []
        for name, rep in reps.items():
            start = time.perf_counter()
            ok, detail = check(name, rep)
            secs = time.perf_counter() - start
            worst = max(worst, secs)
            if not ok:
                return False, detail
            if secs > limit:
                return False, f"{name} took {secs:.2f}s"
            notes.append(detail)
        return True, f"{len(reps)} instances, slowest {worst:.2f}s"

    return run


def run_acceptance() -> list[Check]:
    reps = _valid_reps()
    lower = {n: lower_triangular_form(r) for n, r in reps.items()}
    checks = [
        _timed(1, "ring homomorphism", 5, check_ring_homomorphism),
        _timed(2, "index law", 2, check_index_law),
        _timed(3, "change of basis", 10, check_change_of_basis),
        _timed(4, "shift law", 2, check_shift_law),
        _timed(5, "basis expansion", 2, check_basis_expansion),
        _timed(6, "solver vs oracle", 10 * len(reps), _per_instance(check_solver, reps, 10)),
        _timed(7, "diagonal products vanish", 5, _per_instance(lambda n, r: check_diagonal(r), lower, 5)),
        _timed(8, "nilpotency class", 20 * len(reps), _per_instance(check_nilpotency, reps, 20)),
        _timed(9, "precision soundness", 10, check_precision),
    ]
    return checks
