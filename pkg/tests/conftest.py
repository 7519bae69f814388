import random
from fractions import Fraction

import pytest

from hitchin.fuchsian import genus2_surface
from hitchin.linalg import DegenerateError, Flag
from hitchin.tracer import PsiTracer


@pytest.fixture(scope="session")
def surface():
    return genus2_surface()


@pytest.fixture(scope="session")
def tracer2(surface):
    return PsiTracer(surface, n=2, depth_cap=64)


def random_flag(rng, n, span=6):
    """A random exact flag with small integer data."""
    while True:
        vecs = [
            [Fraction(rng.randint(-span, span)) for _ in range(n)] for _ in range(n)
        ]
        try:
            return Flag.from_basis(vecs)
        except DegenerateError:
            continue


def random_unimodular(rng, n, steps=6):
    """Random integer matrix of determinant one (product of shears)."""
    m = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        c = Fraction(rng.randint(-2, 2))
        for k in range(n):
            m[i][k] += c * m[j][k]
    return tuple(tuple(row) for row in m)


@pytest.fixture
def rng():
    return random.Random(20240809)
