import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import rand_vec
from pcontract.errors import MembershipError, NotTidy, PrecisionError
from pcontract.lattice import (
    CompactOpenSubgroup,
    TidyBasisData,
    basis_expand,
    complement_basis,
    enumerate_cosets,
    expansion_sum,
    random_tidy,
    subgroup_index,
    subgroup_membership,
    to_quotient,
)
from pcontract.linalg import rank
from pcontract.series import SeriesVector, shift

std = CompactOpenSubgroup.standard


def test_membership_standard():
    V = std(2, 2)
    assert subgroup_membership(V, SeriesVector.monomial(2, 2, 0, 0))
    assert not subgroup_membership(V, SeriesVector.monomial(2, 2, 0, -1))
    assert subgroup_membership(V, SeriesVector.monomial(2, 2, 1, 7))


def test_membership_needs_precision():
    with pytest.raises(PrecisionError):
        subgroup_membership(std(2, 1, 0).at_depth(3), SeriesVector.zero(2, 1, prec=1))


def test_membership_matches_enumeration_p2_d1_k2():
    rng = random.Random(0)
    for _ in range(20):
        W = np.array([[rng.randrange(2) for _ in range(4)] for _ in range(rng.randint(0, 3))]).reshape(-1, 4)
        V = CompactOpenSubgroup(2, 1, 2, W)
        span = {tuple(np.array(c) @ W % 2) if len(W) else (0,) * 4 for c in itertools.product(range(2), repeat=len(W))}
        for flat in itertools.product(range(2), repeat=4):
            z = SeriesVector(2, 1, {n - 2: [flat[n]] for n in range(4)})
            assert V.contains(z) == (tuple(to_quotient(z, 2)) in span)


def test_index_examples():
    assert subgroup_index(std(2, 2), std(2, 2, 1)) == 4
    V = std(3, 2)
    assert subgroup_index(V, V) == 1
    assert subgroup_index(std(2, 1), std(2, 1, 2)) == 4
    assert len(enumerate_cosets(std(2, 1), std(2, 1, 2))) == 4
    with pytest.raises(MembershipError):
        subgroup_index(std(2, 1, 1), std(2, 1))


@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(0, 10**6))
def test_random_tidy_index_is_p_to_the_d(p, d, seed):
    V = random_tidy(p, d, random.Random(seed))
    assert V.is_tau_invariant()
    tV = V.shifted(1)
    assert subgroup_index(V, tV) == p ** d
    reps = enumerate_cosets(V, tV)
    assert len(reps) == p ** d
    assert all(V.contains(r) for r in reps)


def test_complement_basis_examples():
    b = complement_basis(std(3, 3)).b
    assert b == tuple(SeriesVector.monomial(3, 3, k, 0) for k in range(3))
    b = complement_basis(std(2, 2, 3)).b
    assert b == tuple(SeriesVector.monomial(2, 2, k, 3) for k in range(2))


@given(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(0, 10**6))
def test_complement_spans_v_mod_tv(p, d, seed):
    V = random_tidy(p, d, random.Random(seed), K=3)
    basis = complement_basis(V)
    D = V.K + 2
    tV = V.shifted(1).embed(D)
    rows = np.vstack([tV] + [to_quotient(b, D) for b in basis.b])
    assert rank(rows, p) == tV.shape[0] + d == V.dim_in(D)


def test_complement_basis_rejects_non_tidy():
    # t * (e1 t^-1) = e1 t^0 is not in V
    V = CompactOpenSubgroup.from_vectors(2, 2, 2, [SeriesVector.monomial(2, 2, 0, -1), SeriesVector.monomial(2, 2, 0, 1), SeriesVector.monomial(2, 2, 1, 1)])
    assert not V.is_tau_invariant()
    with pytest.raises(NotTidy):
        complement_basis(V)


def test_basis_expand_examples():
    basis = TidyBasisData.standard(2, 2)
    z = SeriesVector(2, 2, {0: [1, 0], 1: [0, 1]})
    assert basis_expand(z, basis, 5) == {(0, 0): 1, (1, 1): 1}
    assert basis_expand(SeriesVector.zero(2, 2), basis, 5) == {}


@given(st.sampled_from([2, 3]), st.integers(1, 2), st.integers(0, 10**6), st.integers(0, 3))
def test_basis_expand_round_trip_and_vanishing_below_level(p, d, seed, m):
    rng = random.Random(seed)
    V = random_tidy(p, d, rng)
    basis = complement_basis(V)
    z = SeriesVector.zero(p, d)
    for g in V.generators(V.K + 1):
        z = z + g.scale(rng.randrange(p))
    z = shift(z, m)  # z in t^m V
    coeffs = basis_expand(z, basis, 10)
    assert all(j >= m for j, _ in coeffs)
    assert V.contains(shift(z - expansion_sum(coeffs, basis), -11))
    # uniqueness: an equal vector built differently expands identically
    assert basis_expand(expansion_sum(coeffs, basis) + (z - expansion_sum(coeffs, basis)), basis, 10) == coeffs


def test_basis_expand_rejects_non_member():
    basis = TidyBasisData.standard(2, 1)
    with pytest.raises(PrecisionError):
        basis_expand(SeriesVector(2, 1, {0: [1]}, prec=3), basis, 8)


def test_random_vectors_round_trip_standard():
    rng = random.Random(3)
    basis = TidyBasisData.standard(3, 2)
    for _ in range(20):
        z = rand_vec(rng, 3, 2, -2, 5)
        coeffs = basis_expand(z, basis, 6)
        assert expansion_sum(coeffs, basis) == z
