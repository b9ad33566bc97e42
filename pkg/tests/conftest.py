import random
import sys

import pytest
from hypothesis import settings, strategies as st

from pcontract.blocks import BlockMatrix
from pcontract.io import shipped_instances
from pcontract.rep import validate
from pcontract.series import SeriesVector

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

PRIMES = [2, 3, 5]
E = [[0, 1], [0, 0]]


@pytest.fixture(scope="session")
def suite():
    return shipped_instances()


@pytest.fixture(scope="session")
def valid_reps(suite):
    return {n: i.rep for n, i in suite.items() if validate(i.rep).valid}


@st.composite
def fields(draw, dims=(1, 2, 3)):
    return draw(st.sampled_from(PRIMES)), draw(st.sampled_from(dims))


@st.composite
def vectors(draw, p, d, lo=-6, hi=6, prec=None):
    n = draw(st.integers(0, 5))
    coeffs = {draw(st.integers(lo, hi - 1)): [draw(st.integers(0, p - 1)) for _ in range(d)] for _ in range(n)}
    return SeriesVector(p, d, coeffs, prec=prec)


@st.composite
def block_matrices(draw, p, d, w=6, max_blocks=3):
    blocks = {}
    for _ in range(draw(st.integers(0, max_blocks))):
        key = (draw(st.integers(-w, w)), draw(st.integers(-w, w)))
        blocks[key] = [[draw(st.integers(0, p - 1)) for _ in range(d)] for _ in range(d)]
    return BlockMatrix(p, d, {k: m for k, m in blocks.items() if any(any(r) for r in m)})


def rand_vec(rng: random.Random, p, d, lo, hi, prec=None):
    return SeriesVector(p, d, {n: [rng.randrange(p) for _ in range(d)] for n in range(lo, hi)}, prec=prec)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORTED:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORTED:
            terminalreporter.write_line(line)
