"""Shared oracles and fixtures: everything here is independent of the code under test."""

import itertools

import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from freespec.ncpoly import parse
from freespec.quadratic import CASE_POLYNOMIALS


def catalan_numbers(count):
    """First ``count`` Catalan numbers by the defining recurrence C_{n+1} = sum C_i C_{n-i}."""
    cat = [1]
    for n in range(count - 1):
        cat.append(sum(cat[i] * cat[n - i] for i in range(n + 1)))
    return cat


def count_noncrossing_pairings(n):
    """Brute-force count of non-crossing pair partitions of {1..2n} (grounds the recurrence)."""

    def pairings(points):
        if not points:
            yield []
            return
        first, rest = points[0], points[1:]
        for i, partner in enumerate(rest):
            left, right = rest[:i], rest[i + 1 :]
            for sub_left in pairings(left):
                for sub_right in pairings(right):
                    yield [(first, partner)] + sub_left + sub_right

    def crossing(pairs):
        for (a, b), (c, d) in itertools.combinations(pairs, 2):
            if a < c < b < d or c < a < d < b:
                return True
        return False

    return sum(1 for p in pairings(list(range(2 * n))) if not crossing(p))


def multiset_distance(a, b):
    """Max pairwise distance under the optimal matching of two complex multisets."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    assert a.size == b.size
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())


def random_quadratic_form(rng, with_constant=False):
    from freespec.ncpoly import QuadraticForm

    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=2) + 1j * rng.normal(size=2)
    c0 = complex(rng.normal(), rng.normal()) if with_constant else 0j
    return QuadraticForm(a=a, b=b, c0=c0)


@pytest.fixture(scope="session")
def catalan():
    return catalan_numbers(32)


@pytest.fixture(scope="session")
def case_forms():
    from freespec.ncpoly import extract_quadratic

    return {case: extract_quadratic(parse(text, d=2)) for case, text in CASE_POLYNOMIALS.items()}


@pytest.fixture(scope="session")
def case_polys():
    return {case: parse(text, d=2) for case, text in CASE_POLYNOMIALS.items()}
