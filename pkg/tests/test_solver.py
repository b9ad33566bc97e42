import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import E
from pcontract.blocks import BlockMatrix
from pcontract.errors import BranchError, InvalidRep, ResourceExhausted
from pcontract.families import generate
from pcontract.rep import Rep, phi_apply, u0_reduce, validate
from pcontract.series import SeriesVector
from pcontract.solver import (
    FAIL,
    INCONCLUSIVE,
    NOT_NILPOTENT,
    PASS,
    ConstraintFamily,
    SolveOptions,
    algebra_nilpotency,
    diagonal_check,
    eta_above,
    fixed_vector_general,
    fixed_vector_nilpotent,
    general_eta,
    general_family,
    oracle_fixed_vector,
    refine_limit,
    residuals,
    solve,
)

E2 = Rep.from_blocks(2, 2, {(1, 0): E})
ABOVE = Rep.from_blocks(2, 2, {(0, 1): E})
ZERO = Rep.from_blocks(3, 2, {})
J3 = Rep.from_blocks(3, 3, {(0, 0): [[0, 1, 0], [0, 0, 1], [0, 0, 0]]})


def e(p, d, k, n):
    return SeriesVector.monomial(p, d, k, n)


def fixed_by_phi(rep, xi, rs=range(-6, 7)):
    """Recompute phi(t^r) xi from scratch through phi_apply."""
    return all(phi_apply(rep, SeriesVector.scalar(rep.p, {r: 1}), xi) == xi for r in rs)


def test_oracle_examples():
    assert oracle_fixed_vector(ZERO, -3, 3) == e(3, 2, 0, -3)
    assert oracle_fixed_vector(E2, 0, 4) == e(2, 2, 0, 0)
    assert oracle_fixed_vector(ABOVE, 0, 4) == e(2, 2, 0, 0)


def test_oracle_agrees_with_exhaustive_search():
    # every vector supported in [0, 2) at p = 2, d = 2
    for rep in (E2, ABOVE, Rep.from_blocks(2, 2, {(0, 0): E, (1, 0): E})):
        found = []
        for flat in itertools.product(range(2), repeat=4):
            xi = SeriesVector(2, 2, {0: flat[:2], 1: flat[2:]})
            if not xi.is_zero() and fixed_by_phi(rep, xi):
                found.append(xi)
        got = oracle_fixed_vector(rep, 0, 2)
        assert (got is not None) == bool(found)
        if got is not None:
            assert got in found


def test_eta_above_examples():
    assert eta_above(E2, 2) is None
    res = eta_above(ABOVE, 2)
    assert (res.i_star, res.j_star) == (0, 1)
    assert res.word == (0,) and res.z == 1
    assert res.eta.coefficient(0) == (1, 0)


def test_refine_limit_examples():
    fam = ConstraintFamily([BlockMatrix.zero(2, 2)], lambda n: [])
    c = SeriesVector(2, 2, {0: [1, 0], 5: [0, 1]})
    out = refine_limit(fam, {n: c for n in range(1, 5)}, 8)
    assert out == c.truncate(8)
    cands = {n: SeriesVector(2, 2, {0: [1, 1], 1: [0, 1], 2: [1, 0], 3 + n % 2: [1, 1]}) for n in range(1, 7)}
    assert refine_limit(fam, cands, 3) == SeriesVector(2, 2, {0: [1, 1], 1: [0, 1], 2: [1, 0]}, prec=3)
    with pytest.raises(ResourceExhausted):
        refine_limit(fam, {1: e(2, 2, 0, 0), 2: e(2, 2, 1, 0)}, 2)


def test_refine_limit_on_e2_family_checks_every_level():
    fam = general_family(E2.A0)
    cands = {c: e(2, 2, 0, 0) for c in range(1, 9)}
    eta = refine_limit(fam, cands, 4)
    assert all(not fam.violations(eta, n) for n in range(1, 9))
    assert eta.coefficient(0) == (1, 0)


def test_diagonal_check_examples():
    assert diagonal_check(E2).status == PASS
    rep = diagonal_check(Rep.from_blocks(2, 2, {(0, 0): E}))
    assert rep.status == PASS and rep.products_checked == 1
    # I + A0 has a diagonal block of multiplicative order 2 mod 3
    bad = diagonal_check(Rep.from_blocks(3, 1, {(0, 0): [[1]]}))
    assert bad.status == FAIL and not bad.unipotent
    with pytest.raises(BranchError):
        diagonal_check(ABOVE)


def test_diagonal_products_vanish_on_shipped_suite(valid_reps):
    from pcontract.group import lower_triangular_form

    for name, rep in valid_reps.items():
        assert diagonal_check(lower_triangular_form(rep)).status == PASS, name


def test_algebra_nilpotency_examples():
    assert algebra_nilpotency(ZERO).N == 1
    assert algebra_nilpotency(E2).N == 2
    assert algebra_nilpotency(J3).N == 3
    assert algebra_nilpotency(E2, max_len=1).status == NOT_NILPOTENT
    assert algebra_nilpotency(J3, max_elements=1).status == INCONCLUSIVE


def test_fixed_vector_nilpotent_examples():
    assert fixed_vector_nilpotent(ZERO, 1) == e(3, 2, 0, 0)
    assert fixed_vector_nilpotent(E2, 2) == e(2, 2, 0, 1)
    xi = fixed_vector_nilpotent(J3, 3)
    assert xi == e(3, 3, 0, 0) and fixed_by_phi(J3, xi)
    with pytest.raises(BranchError):
        fixed_vector_nilpotent(J3, 2)


def test_general_branch_refuses_nilpotent_algebra():
    with pytest.raises(BranchError):
        fixed_vector_general(E2, 1)


def test_general_branch_under_a_budget():
    eta = fixed_vector_general(E2, 1, max_len=1)
    assert eta.coefficient(0) != (0, 0)
    out = general_eta(E2, 3, max_len=1)
    assert out["route"] == "monomial"
    assert not general_family(E2.A0).violations(out["eta"], 3)


def test_general_eta_trivial_case():
    out = general_eta(ZERO, 1, a_r=0)
    assert out["eta"] == e(3, 2, 0, 0)


def test_general_eta_reports_diagnostics():
    # both basis monomials violate level 1 and no product is long enough
    J = [[1, 1], [1, 1]]
    rep = Rep.from_blocks(2, 2, {(-1, -1): J, (0, 0): J})
    assert validate(rep).valid
    with pytest.raises(ResourceExhausted) as exc:
        general_eta(rep, 1, max_len=1, a_r=0)
    assert exc.value.diagnostics["N"] == 2
    assert "deepest_vanishing" in exc.value.diagnostics


# ---------------------------------------------------------------------------


def test_solve_examples():
    res = solve(ZERO)
    assert res.xi == e(3, 2, 0, 0) and res.exact and res.ok
    res = solve(E2)
    assert res.xi == e(2, 2, 0, 1) and res.oracle_agrees
    assert [x.r for x in res.residuals][:1] == [-4] and all(x.ok for x in res.residuals)
    res = solve(ABOVE)
    assert "u0_reduce" in res.trace["phases"] and res.trace["phases"][-1] == "nilpotent"
    assert res.xi == e(2, 2, 0, 0) and res.oracle_agrees


def test_solve_general_branch_is_truncated():
    res = solve(E2, SolveOptions(max_len=1, precision=12))
    assert res.trace["phases"][-1] == "general"
    assert not res.exact and res.xi.prec >= 10
    assert res.xi.coefficient(0) == (1, 0)
    assert all(x.ok for x in res.residuals)


def test_solve_refuses_invalid():
    with pytest.raises(InvalidRep):
        solve(Rep.from_blocks(2, 1, {(1, 0): [[1]]}))


@settings(max_examples=40)
@given(st.sampled_from(["toeplitz", "single-block", "random"]), st.sampled_from([2, 3, 5]), st.integers(1, 3), st.integers(0, 500))
def test_solve_output_is_fixed_and_matches_oracle(family, p, d, seed):
    rep = generate(family, p, d, seed).rep
    res = solve(rep)
    assert res.ok and not res.xi.is_zero()
    assert fixed_by_phi(rep, res.xi)
    if res.oracle is not None:
        assert fixed_by_phi(rep, res.oracle)


def test_residual_table_covers_effective_range():
    xi = e(2, 2, 1, 0)  # not fixed by E2
    table = residuals(E2, xi, range(-2, 3))
    assert any(not r.ok for r in table)
    assert {r.r for r in table} >= set(range(-2, 3))


def test_u0_reduce_feeds_a_lower_triangular_rep():
    assert u0_reduce(ABOVE).inner.is_lower_triangular()
