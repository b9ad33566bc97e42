import pytest
from hypothesis import given, settings, strategies as st

from pcontract.families import FAMILIES, generate
from pcontract.io import dumps, instance_to_dict
from pcontract.rep import validate


@settings(max_examples=60)
@given(st.sampled_from(FAMILIES), st.sampled_from([2, 3, 5, 7]), st.integers(1, 4), st.integers(0, 10_000))
def test_generated_instances_are_valid(family, p, d, seed):
    inst = generate(family, p, d, seed)
    assert validate(inst.rep).valid
    assert inst.metadata["family"] == family and inst.metadata["seed"] == seed


@pytest.mark.parametrize("family", FAMILIES)
def test_generation_is_deterministic(family):
    for seed in range(5):
        a = dumps(instance_to_dict(generate(family, 3, 2, seed)))
        b = dumps(instance_to_dict(generate(family, 3, 2, seed)))
        assert a == b


@pytest.mark.parametrize("family", FAMILIES)
def test_seeds_vary_the_output(family):
    outs = {dumps(instance_to_dict(generate(family, 5, 3, s))) for s in range(12)}
    assert len(outs) > 3


def test_families_are_nonzero_for_d_above_one():
    for family in FAMILIES:
        for seed in range(20):
            assert not generate(family, 2, 2, seed).rep.A0.is_zero()


def test_unknown_family():
    with pytest.raises(ValueError, match="unknown family"):
        generate("lattice", 2, 2, 0)
