import random

import pytest
from hypothesis import given, strategies as st

from conftest import E, rand_vec
from pcontract.blocks import BlockMatrix, bm_apply, shift_conjugate
from pcontract.errors import BranchError, InvalidRep, PrecisionError
from pcontract.lattice import CompactOpenSubgroup
from pcontract.rep import (
    Rep,
    algebra_span,
    bm_power,
    commute_range,
    invariant_subgroup,
    normalize,
    phi_apply,
    phi_minus_id,
    positive_shifts,
    u0_reduce,
    unipotent_mul,
    validate,
    zero_pattern,
)
from pcontract.series import SeriesVector, shift

E2 = Rep.from_blocks(2, 2, {(1, 0): E})
ABOVE = Rep.from_blocks(2, 2, {(0, 1): E})
BREAK = Rep.from_blocks(2, 2, {(-1, 0): E})
ZERO = Rep.from_blocks(3, 2, {})


def rand_poly(rng, p, lo, hi):
    return SeriesVector.scalar(p, {n: rng.randrange(p) for n in range(lo, hi)})


def test_validate_examples():
    assert validate(ZERO).valid
    assert validate(E2).valid
    bad = validate(Rep.from_blocks(2, 1, {(1, 0): [[1]]}))
    assert not bad.valid
    assert bad.failure["check"] == "commute" and bad.failure["r"] == -1
    assert bad.failure["block"] == (1, -1)


def test_validate_order_condition():
    # (I + A)^2 = I + A^2 != I for A = identity block at (0, 0)
    r = validate(Rep.from_blocks(2, 1, {(0, 0): [[1]]}))
    assert not r.valid and r.failure["check"] == "order"


def test_commute_range_covers_both_orders():
    # the range reported must include r = 1 and r = -1 for a block at (1, 0)
    lo, hi = commute_range(BlockMatrix(2, 1, {(1, 0): [[1]]}))
    assert lo <= -1 and hi >= 1


def test_invalid_rep_is_refused():
    with pytest.raises(InvalidRep):
        phi_minus_id(Rep.from_blocks(2, 1, {(1, 0): [[1]]}), {0: 1})


def test_phi_minus_id_examples():
    assert phi_minus_id(E2, {}).is_zero()
    assert phi_minus_id(E2, {0: 1}) == E2.A0
    got = phi_minus_id(E2, SeriesVector.scalar(2, {0: 1, 1: 1}))
    assert got == BlockMatrix(2, 2, {(1, 0): E, (2, 1): E})


@given(st.integers(0, 10**6))
def test_homomorphism_order_and_shift_law(seed):
    from pcontract.io import shipped_instances

    rng = random.Random(seed)
    reps = [i.rep for i in shipped_instances().values() if validate(i.rep).valid]
    rep = rng.choice(reps)
    p = rep.p
    f, g = rand_poly(rng, p, -2, 3), rand_poly(rng, p, -2, 3)
    X, Y = phi_minus_id(rep, f), phi_minus_id(rep, g)
    assert phi_minus_id(rep, f + g) == unipotent_mul(X, Y) == unipotent_mul(Y, X)
    acc = BlockMatrix.zero(p, rep.d)
    for _ in range(p):
        acc = unipotent_mul(acc, X)
    assert acc.is_zero()
    r = rng.randint(-4, 4)
    assert phi_minus_id(rep, SeriesVector.scalar(p, {r: 1})) == shift_conjugate(rep.A0, r)
    assert phi_minus_id(rep, shift(f, 1)) == shift_conjugate(X, 1)
    z = rand_vec(rng, p, rep.d, -3, 4)
    assert phi_apply(rep, shift(f, 1), z) == shift(phi_apply(rep, f, shift(z, -1)), 1)


def test_phi_apply_examples():
    z = SeriesVector(3, 2, {0: [1, 2]}, prec=6)
    assert phi_apply(ZERO, SeriesVector.scalar(3, {0: 1}, prec=1), z) == z
    f = SeriesVector.scalar(2, {0: 1, 2: 1})
    w = SeriesVector(2, 2, {0: [0, 1], 2: [1, 1]})
    assert phi_apply(E2, f, w) == w + bm_apply(phi_minus_id(E2, f), w)


@given(st.integers(0, 10**6))
def test_phi_apply_ignores_tails(seed):
    rng = random.Random(seed)
    rep = rng.choice([E2, ABOVE, BREAK, Rep.from_blocks(3, 3, {(0, 0): [[0, 1, 0], [0, 0, 1], [0, 0, 0]]})])
    p, d = rep.p, rep.d
    Pf, Pz = rng.randint(1, 6), rng.randint(2, 8)
    f = rand_poly(rng, p, 0, Pf).truncate(Pf)
    z = rand_vec(rng, p, d, -2, Pz, prec=Pz)
    try:
        out = phi_apply(rep, f, z)
    except PrecisionError:
        return
    f2 = f.truncate(Pf).__class__.scalar(p, {**f.scalar_terms(), **{n: rng.randrange(p) for n in range(Pf, Pf + 5)}})
    z2 = SeriesVector(p, d, {**rand_vec(rng, p, d, Pz, Pz + 5).coeffs, **z.coeffs})
    assert out.agrees_below(phi_apply(rep, f2, z2), out.prec)


def test_phi_apply_underflow():
    f = SeriesVector.scalar(2, {0: 1}, prec=0)
    with pytest.raises(PrecisionError):
        phi_apply(BREAK, f, SeriesVector.zero(2, 2, prec=0))


def test_bm_power_matches_repeated_compose():
    A = Rep.from_blocks(3, 3, {(0, 0): [[0, 1, 0], [0, 0, 1], [0, 0, 0]]}).A0
    assert not bm_power(A, 2).is_zero()
    assert bm_power(A, 3).is_zero()


# ---------------------------------------------------------------------------


def test_zero_pattern_examples():
    zp = zero_pattern(ZERO)
    assert zp.envelope == frozenset()
    zp = zero_pattern(E2, range(-4, 8))
    assert zp.envelope == frozenset((r + 1, r) for r in range(-1, 7) if r + 1 in range(-4, 8) and r >= 0)
    assert all(zp.b[i] == -1 for i in zp.b)
    zp = zero_pattern(ABOVE, range(-4, 8))
    assert zp.envelope == frozenset((r, r + 1) for r in range(0, 8))
    assert all(zp.b[i] == 1 for i in zp.b)


@given(st.integers(0, 10**6))
def test_zero_pattern_is_sound(seed):
    from pcontract.io import shipped_instances

    rng = random.Random(seed)
    reps = [i.rep for i in shipped_instances().values() if validate(i.rep).valid and not i.rep.A0.is_zero()]
    rep = normalize(rng.choice(reps)).rep
    window = range(-6, 10)
    zp = zero_pattern(rep, window)
    assert zp.violations() == []
    f = rand_poly(rng, rep.p, 0, 5)
    for (i, j) in phi_minus_id(rep, f).support():
        if i in window:
            assert (i, j) in zp.envelope
            assert not zp.certifies_zero(i, j)


def test_zero_pattern_needs_invariant_lattice():
    with pytest.raises(BranchError):
        zero_pattern(BREAK)
    assert zero_pattern(normalize(BREAK).rep).violations() == []


def test_algebra_of_e2_is_one_layer():
    alg = algebra_span(E2.A0, positive_shifts(E2.A0, 6))
    assert alg.complete and alg.nilpotency_length == 2


# ---------------------------------------------------------------------------


def test_invariant_subgroup_examples():
    assert invariant_subgroup(ZERO) == CompactOpenSubgroup.standard(3, 2)
    assert invariant_subgroup(E2) == CompactOpenSubgroup.standard(2, 2)
    # E at (0, 1) already maps F_p[[t]]^d into itself
    assert invariant_subgroup(ABOVE) == CompactOpenSubgroup.standard(2, 2)


def test_invariant_subgroup_breaks_lattice_when_needed():
    V = invariant_subgroup(BREAK)
    assert V != CompactOpenSubgroup.standard(2, 2)
    assert V.is_tau_invariant() and V.contains_subgroup(V.shifted(1))
    rng = random.Random(0)
    gens = V.generators(V.K + 1)
    for _ in range(20):
        f = rand_poly(rng, 2, 0, 4)
        for g in gens:
            assert V.contains(phi_apply(BREAK, f, g))
    # expected: {x : x_0 in span e1} + tL, which is the exhaustive answer at p = 2
    expect = CompactOpenSubgroup.from_vectors(2, 2, 1, [SeriesVector.monomial(2, 2, 0, 0)])
    assert V == expect


def test_u0_reduce_examples():
    red = u0_reduce(E2)
    assert red.d_prime == 2 and red.inner == E2
    red = u0_reduce(ZERO)
    assert red.inner == ZERO
    red = u0_reduce(ABOVE)
    assert red.d_prime == 2
    assert red.U0 == CompactOpenSubgroup.from_vectors(2, 2, 1, [SeriesVector.monomial(2, 2, 0, 0)])
    assert red.inner.A0 == BlockMatrix(2, 2, {(0, 0): E})
    assert red.inner.is_lower_triangular()
