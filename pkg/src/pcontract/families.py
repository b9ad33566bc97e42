"""Deterministic generators of valid representations.

All families place their blocks in a single column j, say at (j + s, j). Two
such blocks C_s, C_s' compose only when s' = 0, so validity reduces to
C_s C_s' = 0 for s' != 0, C_s C_0^(p-1) = 0 and C_0^p = 0. Off-diagonal
blocks of the form e_1 * row with row[0] = 0 square to zero and annihilate
each other, which gives a construction that never needs retrying.
"""

from __future__ import annotations

import random

from .blocks import BlockMatrix
from .io import Instance
from .rep import Rep, validate

FAMILIES = ("toeplitz", "single-block", "random")


def _nonzero_row(rng: random.Random, p: int, d: int) -> list[int]:
    """A nonzero row with leading entry 0, or zeros when d = 1."""
    if d == 1:
        return [0]
    while True:
        row = [0] + [rng.randrange(p) for _ in range(d - 1)]
        if any(row):
            return row


def _e1_times(row: list[int]) -> list[list[int]]:
    d = len(row)
    return [list(row)] + [[0] * d for _ in range(d - 1)]


def _strict_upper(rng: random.Random, p: int, d: int) -> list[list[int]]:
    return [[rng.randrange(p) if c > r else 0 for c in range(d)] for r in range(d)]


def _column_rep(p: int, d: int, j: int, blocks: dict[int, list[list[int]]]) -> Rep:
    return Rep(BlockMatrix(p, d, {(j + s, j): m for s, m in blocks.items() if any(any(r) for r in m)}))


def toeplitz(p: int, d: int, seed: int, width: int = 2) -> Instance:
    """A column of blocks C_s at offsets s in [-width, width].

    C_0 is strictly upper triangular and the other C_s are e_1 * row. If the
    mixed condition C_s C_0^(p-1) = 0 fails the diagonal symbol is dropped.
    """
    rng = random.Random(f"toeplitz:{p}:{d}:{seed}")
    j = rng.randrange(-1, 2)
    off = {s: _e1_times(_nonzero_row(rng, p, d)) for s in range(-width, width + 1) if s and rng.random() < 0.6}
    if not off and d > 1:
        off[rng.choice([-1, 1])] = _e1_times(_nonzero_row(rng, p, d))
    rep = _column_rep(p, d, j, {**off, 0: _strict_upper(rng, p, d)})
    if not validate(rep).valid:
        rep = _column_rep(p, d, j, off)
    return Instance(rep, {"family": "toeplitz", "seed": seed})


def single_block(p: int, d: int, seed: int) -> Instance:
    """One block C at (j + s, j): square-zero off the diagonal, C^p = 0 on it."""
    rng = random.Random(f"single-block:{p}:{d}:{seed}")
    j = rng.randrange(-2, 3)
    s = rng.randrange(-2, 3)
    if s == 0 and d > 1:
        m = _strict_upper(rng, p, d)
        if any(any(r) for r in m) and validate(_column_rep(p, d, j, {0: m})).valid:
            return Instance(_column_rep(p, d, j, {0: m}), {"family": "single-block", "seed": seed})
    m = _e1_times(_nonzero_row(rng, p, d))
    if d > 1:
        # conjugate by a random unitriangular matrix to vary the shape
        u = [[1 if r == c else (rng.randrange(p) if c > r else 0) for c in range(d)] for r in range(d)]
        m = _conj_unitri(m, u, p)
    return Instance(_column_rep(p, d, j, {s: m}), {"family": "single-block", "seed": seed})


def _conj_unitri(m: list[list[int]], u: list[list[int]], p: int) -> list[list[int]]:
    """u m u^-1 for unit upper triangular u."""
    d = len(m)
    # back substitution for u^-1
    inv = [[0] * d for _ in range(d)]
    for c in range(d):
        for r in range(d - 1, -1, -1):
            v = (1 if r == c else 0) - sum(u[r][k] * inv[k][c] for k in range(r + 1, d))
            inv[r][c] = v % p
    um = [[sum(u[r][k] * m[k][c] for k in range(d)) % p for c in range(d)] for r in range(d)]
    return [[sum(um[r][k] * inv[k][c] for k in range(d)) % p for c in range(d)] for r in range(d)]


def random_valid(p: int, d: int, seed: int, tries: int = 400, window: int = 2) -> Instance:
    """Rejection-sample sparse supports; fall back to a column of e_1 * row blocks."""
    rng = random.Random(f"random:{p}:{d}:{seed}")
    for attempt in range(tries):
        blocks = {}
        for _ in range(rng.randint(1, 3)):
            i, j = rng.randint(-window, window), rng.randint(-window, window)
            m = [[rng.randrange(p) if rng.random() < 0.4 else 0 for _ in range(d)] for _ in range(d)]
            if any(any(r) for r in m):
                blocks[(i, j)] = m
        if not blocks:
            continue
        rep = Rep(BlockMatrix(p, d, blocks))
        if validate(rep).valid and (d == 1 or not rep.A0.is_zero()):
            return Instance(rep, {"family": "random", "seed": seed, "attempts": attempt + 1})
    j = rng.randint(-window, window)
    blocks = {s: _e1_times(_nonzero_row(rng, p, d)) for s in range(-window, window + 1) if rng.random() < 0.5}
    return Instance(_column_rep(p, d, j, blocks), {"family": "random", "seed": seed, "attempts": tries})


def generate(family: str, p: int, d: int, seed: int) -> Instance:
    if family == "toeplitz":
        return toeplitz(p, d, seed)
    if family == "single-block":
        return single_block(p, d, seed)
    if family == "random":
        return random_valid(p, d, seed)
    raise ValueError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
