import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitchin.linalg import (
    EXACT,
    BackendError,
    DegenerateError,
    Flag,
    Subspace,
    WeylChamberPoint,
    cartan_projection,
    is_generic_triple,
    jordan_projection,
    wedge_det,
)

from conftest import random_flag, random_unimodular


class TestWedgeDet:
    def test_identity(self):
        n = 4
        eye = [[int(i == j) for j in range(n)] for i in range(n)]
        assert wedge_det(eye) == 1

    def test_transposition_flips_sign(self):
        eye = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
        swapped = [eye[1], eye[0], eye[2]]
        assert wedge_det(swapped) == -1

    def test_two_by_two_cofactor(self):
        # expansion by hand: 1*4 - 2*3
        assert wedge_det([(1, 2), (3, 4)]) == -2

    def test_dimension_mismatch(self):
        with pytest.raises(BackendError):
            wedge_det([(1, 0, 0), (0, 1, 0)])

    def test_fraction_entries(self):
        assert wedge_det([(Fraction(1, 2), 0), (0, Fraction(2, 3))]) == Fraction(1, 3)

    @given(st.integers(-9, 9), st.integers(-9, 9), st.integers(-9, 9))
    @settings(max_examples=60, deadline=None)
    def test_multilinearity_first_slot(self, a, b, c):
        v = [(a, b), (c, 5)]
        scaled = [(3 * a, 3 * b), (c, 5)]
        assert wedge_det(scaled) == 3 * wedge_det(v)


class TestSubspaces:
    def test_sum_disjoint_coordinates(self):
        a = Subspace.span([(1, 0, 0)])
        b = Subspace.span([(0, 1, 0)])
        assert (a | b).dim == 2

    def test_sum_idempotent(self):
        a = Subspace.span([(1, 0, 0)])
        assert (a | a) == a

    def test_sum_fills_space(self):
        a = Subspace.span([(1, 0, 0), (0, 1, 0)])
        b = Subspace.span([(1, 1, 1)])
        assert (a | b).dim == 3

    def test_intersection_coordinate_planes(self):
        a = Subspace.span([(1, 0, 0), (0, 1, 0)])
        b = Subspace.span([(0, 1, 0), (0, 0, 1)])
        meet = a & b
        assert meet.dim == 1
        assert meet.contains((0, 1, 0))

    def test_intersection_idempotent(self):
        v = Subspace.span([(1, 2, 3), (0, 1, 1)])
        assert (v & v) == v

    def test_generic_hyperplane_intersection(self):
        # nullspace oracle: the intersection line satisfies both equations
        h1 = Subspace.span([(1, 0, 0), (0, 1, 1)])
        h2 = Subspace.span([(1, 1, 0), (0, 0, 1)])
        line = h1 & h2
        assert line.dim == 1
        assert h1.contains(line.line_vector())
        assert h2.contains(line.line_vector())

    def test_dimension_formula_random(self, rng):
        for _ in range(60):
            n = rng.randint(2, 6)
            a = Subspace.span(
                [
                    tuple(Fraction(rng.randint(-4, 4)) for _ in range(n))
                    for _ in range(rng.randint(0, n))
                ]
                or [],
                ambient=n,
                backend=EXACT,
            )
            b = Subspace.span(
                [
                    tuple(Fraction(rng.randint(-4, 4)) for _ in range(n))
                    for _ in range(rng.randint(0, n))
                ]
                or [],
                ambient=n,
                backend=EXACT,
            )
            assert (a | b).dim + (a & b).dim == a.dim + b.dim

    def test_canonical_equality(self):
        a = Subspace.span([(1, 1, 0), (0, 2, 2)])
        b = Subspace.span([(2, 2, 0), (1, 3, 2)])
        assert a == b
        assert a.basis == b.basis


class TestFlags:
    def test_nesting_enforced(self):
        good = Flag.from_basis([(1, 0, 0), (1, 1, 0), (0, 0, 1)])
        assert good.subspace(1).dim == 1
        with pytest.raises(DegenerateError):
            Flag.from_basis([(1, 0, 0), (2, 0, 0), (0, 0, 1)])

    def test_compatible_basis_spans_levels(self, rng):
        f = random_flag(rng, 5)
        basis = f.compatible_basis()
        for k in range(1, 5):
            sub = Subspace.span(basis[:k], ambient=5, backend=EXACT)
            assert sub == f.subspace(k)

    def test_apply_unimodular(self, rng):
        f = random_flag(rng, 4)
        g = random_unimodular(rng, 4)
        image = f.apply(g)
        assert image.subspace(2).dim == 2


class TestGenericTriple:
    def test_equal_flags_degenerate(self):
        f = Flag.standard(3)
        assert not is_generic_triple(f, f, Flag.reversed_standard(3))

    def test_standard_configuration(self):
        f = Flag.standard(3)
        h = Flag.reversed_standard(3)
        g = Flag.from_basis([(1, 1, 1), (1, 0, -2), (1, 0, 0)])
        assert is_generic_triple(f, g, h)

    def test_veronese_triples(self):
        from hitchin.flags import veronese_flag

        for n in (3, 4, 5):
            flags = [veronese_flag((Fraction(t), Fraction(1)), n) for t in (0, 1, 5)]
            assert is_generic_triple(*flags)


class TestProjections:
    def test_jordan_diagonal(self):
        wp = jordan_projection([[2, 0, 0], [0, 1, 0], [0, 0, 0.5]])
        assert wp.entries == pytest.approx((math.log(2), 0.0, -math.log(2)))

    def test_jordan_triangular(self):
        wp = jordan_projection([[2, 1], [0, 0.5]])
        assert wp.entries == pytest.approx((math.log(2), -math.log(2)))

    def test_jordan_similarity_invariance(self, rng):
        d = np.diag([2.0, 1.0, 0.5])
        for _ in range(10):
            p = np.random.RandomState(rng.randint(0, 10**6)).uniform(-1, 1, (3, 3))
            if abs(np.linalg.det(p)) < 0.1:
                continue
            m = p @ d @ np.linalg.inv(p)
            wp = jordan_projection(m)
            assert wp.entries == pytest.approx(
                (math.log(2), 0.0, -math.log(2)), abs=1e-8
            )

    def test_cartan_identity_and_rotation(self):
        assert cartan_projection(np.eye(3)).entries == pytest.approx((0, 0, 0))
        rot = [[0, -1], [1, 0]]
        assert cartan_projection(rot).entries == pytest.approx((0, 0))

    def test_cartan_diagonal(self):
        wp = cartan_projection([[3, 0], [0, 1 / 3]])
        assert wp.entries == pytest.approx((math.log(3), -math.log(3)))

    def test_cartan_power_approximates_jordan(self, rng):
        # entries of jordan(m) vs cartan(m^k)/k at k = 64; eigenvalue spread
        # kept mild so the 64th power stays within float64 SVD resolution
        state = np.random.RandomState(7)
        for _ in range(5):
            q, _ = np.linalg.qr(state.normal(size=(3, 3)))
            p = q + 0.15 * state.uniform(-1, 1, (3, 3))
            if abs(np.linalg.det(p)) < 0.1:
                continue
            m = p @ np.diag([1.25, 1.0, 0.8]) @ np.linalg.inv(p)
            jp = jordan_projection(m).entries
            mk = np.linalg.matrix_power(m, 64)
            cp = [x / 64 for x in cartan_projection(mk).entries]
            assert cp == pytest.approx(jp, abs=0.05)


class TestWeylChamberPoint:
    def test_from_gaps_round_trip(self):
        wp = WeylChamberPoint.from_gaps((1.0, 2.0, 0.5))
        assert wp.gaps() == pytest.approx((1.0, 2.0, 0.5))
        assert sum(wp.entries) == pytest.approx(0.0)

    def test_sorted_required(self):
        with pytest.raises(DegenerateError):
            WeylChamberPoint((0.0, 1.0))

    def test_strictness(self):
        assert WeylChamberPoint((1.0, 0.0, -1.0)).is_strict()
        assert not WeylChamberPoint((1.0, 1.0, -2.0)).is_strict()
