"""Shared fixtures: counterexample matrices and random-law generators."""

from __future__ import annotations

import random
from fractions import Fraction as F

import pytest

from treedep.discrete import DiscreteBivariate


def mat(rows, den) -> DiscreteBivariate:
    return DiscreteBivariate.from_rows([[F(x, den) for x in r] for r in rows])


@pytest.fixture(scope="session")
def chain3_matrices():
    a01 = mat([[4, 4, 2], [3, 4, 3], [3, 2, 5]], 30)
    a12 = mat([[4, 4, 2], [4, 3, 3], [2, 3, 5]], 30)
    b12 = mat([[5, 4, 1], [3, 3, 4], [2, 3, 5]], 30)
    return a01, a12, a01, b12


@pytest.fixture(scope="session")
def star4_matrices():
    a01 = mat([[3, 3, 3, 1], [3, 3, 3, 1], [3, 3, 3, 1], [1, 1, 1, 7]], 40)
    b01 = mat([[4, 3, 2, 1], [5, 4, 1, 0], [1, 2, 5, 2], [0, 1, 2, 7]], 40)
    a02 = mat([[4, 3, 2, 1], [3, 3, 2, 2], [2, 3, 3, 2], [1, 1, 3, 5]], 40)
    b02 = mat([[6, 2, 2, 0], [3, 3, 1, 3], [1, 3, 4, 2], [0, 2, 3, 5]], 40)
    return a01, a02, b01, b02


@pytest.fixture(scope="session")
def block_matrices():
    a = mat([[5, 2, 3], [3, 7, 0], [2, 1, 7]], 30)
    b = mat([[6, 4, 0], [3, 4, 3], [1, 2, 7]], 30)
    return a, b


def random_bivariate(rng: random.Random, size: int, max_weight: int = 9) -> DiscreteBivariate:
    """Random exact law on a size x size grid (integer weights, normalized)."""
    while True:
        cells = [[rng.randint(0, max_weight) for _ in range(size)] for _ in range(size)]
        total = sum(sum(r) for r in cells)
        if total > 0:
            break
    return DiscreteBivariate.from_rows(
        [[F(x, total) for x in row] for row in cells]
    )


def random_coupling(rng: random.Random, row_marg, col_marg, moves: int = 12) -> DiscreteBivariate:
    """Random coupling with the given exact marginals.

    Starts from the product coupling and applies mass-preserving rectangle
    transfers (+d at two diagonal corners, -d off-diagonal), which leave
    both marginals untouched.
    """
    k, m = len(row_marg), len(col_marg)
    w = [[row_marg[r] * col_marg[c] for c in range(m)] for r in range(k)]
    for _ in range(moves):
        r1, r2 = sorted(rng.sample(range(k), 2))
        c1, c2 = sorted(rng.sample(range(m), 2))
        sign = rng.choice((1, -1))
        # shifting mass toward the diagonal corners if sign=+1, away if -1
        if sign > 0:
            room = min(w[r1][c2], w[r2][c1])
        else:
            room = min(w[r1][c1], w[r2][c2])
        if room == 0:
            continue
        delta = room * F(rng.randint(1, 4), 4)
        s = F(sign)
        w[r1][c1] += s * delta
        w[r2][c2] += s * delta
        w[r1][c2] -= s * delta
        w[r2][c1] -= s * delta
    return DiscreteBivariate.from_rows(w)


def random_marginal(rng: random.Random, size: int) -> tuple:
    weights = [rng.randint(1, 6) for _ in range(size)]
    total = sum(weights)
    return tuple(F(x, total) for x in weights)
