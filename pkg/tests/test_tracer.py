import math

import pytest

from hitchin.pants import standard_genus2
from hitchin.tracer import (
    CountPair,
    PsiEncoding,
    PsiTracer,
    PsiTuple,
    TraceError,
    compute_mesh,
    cyclic_equal,
    r_and_s,
    trace_psi,
    validate_psi,
)
from hitchin.linalg import DegenerateError


def conj(word, y):
    return y + word + y[::-1].swapcase()


class TestCounts:
    def test_r_and_s_formula(self):
        tuples = tuple(
            PsiTuple(pred=(0, "ab"), edge=(0, "ac"), succ=(0, "cb"), type="Z", t=t)
            for t in (3, -1, 0)
        )
        counts = r_and_s(PsiEncoding(tuples=tuples))
        assert counts == CountPair(r=3, s=1)

    def test_small_windings_contribute_nothing(self):
        tuples = tuple(
            PsiTuple(pred=(0, "ab"), edge=(0, "ac"), succ=(0, "cb"), type="S", t=t)
            for t in (2, -2, 1, 0)
        )
        assert r_and_s(PsiEncoding(tuples=tuples)).s == 0

    def test_single_tuple_large_t(self):
        tuples = (
            PsiTuple(pred=(0, "ab"), edge=(0, "ac"), succ=(0, "cb"), type="Z", t=5),
        )
        assert r_and_s(PsiEncoding(tuples=tuples)) == CountPair(r=1, s=3)

    def test_empty_encoding_rejected(self):
        with pytest.raises(DegenerateError):
            r_and_s(PsiEncoding(tuples=(), closed_leaf_curve=0))


class TestValidate:
    def test_traced_outputs_pass(self, tracer2):
        for word in ("ab", "bd", "abc"):
            psi = tracer2.trace(word)
            assert validate_psi(psi, tracer2.decomp) == []

    def test_cross_pants_pred_rejected(self):
        decomp = standard_genus2()
        bad = PsiEncoding(
            tuples=(
                PsiTuple(pred=(1, "ab"), edge=(0, "ac"), succ=(0, "cb"), type="Z", t=0),
            )
        )
        assert validate_psi(bad, decomp)

    def test_empty_list_is_a_violation(self):
        decomp = standard_genus2()
        assert validate_psi(PsiEncoding(tuples=()), decomp) == ["empty tuple list"]

    def test_unjoinable_pair_rejected(self):
        decomp = standard_genus2()
        # first tuple leaves through the waist curve (vertex c), second
        # claims to arrive through a handle curve
        bad = PsiEncoding(
            tuples=(
                PsiTuple(pred=(0, "ab"), edge=(0, "ac"), succ=(0, "cb"), type="Z", t=0),
                PsiTuple(pred=(1, "cb"), edge=(1, "ab"), succ=(1, "ac"), type="Z", t=0),
            )
        )
        assert any("joinable" in v for v in validate_psi(bad, decomp))


class TestMesh:
    @pytest.mark.parametrize("curve", [0, 1, 2])
    def test_defining_inequality(self, tracer2, curve):
        spec = tracer2.mesh(curve)
        assert 1.0 <= spec.g_value < math.exp(spec.width)

    def test_inequality_across_dimensions(self, surface):
        for n in (2, 3, 4):
            for curve in (0, 1, 2):
                spec = compute_mesh(surface, curve, n=n)
                assert spec.inequality_holds()

    def test_mesh_width_is_power_length(self, surface, tracer2):
        lens = surface.length_spectrum()
        for curve in (0, 1, 2):
            spec = tracer2.mesh(curve)
            assert spec.width == pytest.approx(lens[curve])


class TestClosedLeafDetection:
    @pytest.mark.parametrize(
        "word,curve", [("a", 0), ("aa", 0), ("AAA", 0), ("c", 1), ("abAB", 2), ("baBA", 2)]
    )
    def test_pants_powers(self, tracer2, word, curve):
        psi = tracer2.trace(word)
        assert psi.is_closed_leaf
        assert psi.closed_leaf_curve == curve

    def test_conjugated_pants_word(self, tracer2):
        psi = tracer2.trace(conj("a", "bd"))
        assert psi.is_closed_leaf and psi.closed_leaf_curve == 0

    def test_non_hyperbolic_rejected(self, tracer2):
        with pytest.raises(TraceError):
            tracer2.trace("aA")


class TestTrace:
    def test_transversal_crosses_once(self, tracer2):
        psi = tracer2.trace("b")
        counts = r_and_s(psi)
        assert counts.r == 1
        assert psi.tuples[0].edge == (0, "ab")

    def test_conjugation_invariance(self, tracer2):
        for word in ("ab", "bd", "abc"):
            base = tracer2.trace(word)
            for y in ("a", "cA", "db"):
                assert cyclic_equal(base, tracer2.trace(conj(word, y)))

    def test_cyclic_word_invariance(self, tracer2):
        for word in ("abc", "abd"):
            base = tracer2.trace(word)
            for k in (1, 2):
                assert cyclic_equal(base, tracer2.trace(word[k:] + word[:k]))

    def test_square_doubles(self, tracer2):
        for word in ("ab", "bd"):
            single = tracer2.trace(word)
            double = tracer2.trace(word + word)
            assert cyclic_equal(
                double, PsiEncoding(tuples=single.tuples + single.tuples)
            )

    def test_encoding_is_dimension_independent(self, surface, tracer2):
        tr3 = PsiTracer(surface, n=3, depth_cap=64)
        for word in ("ab", "abc"):
            assert cyclic_equal(tracer2.trace(word), tr3.trace(word))

    def test_binodal_count_is_conjugacy_function(self, tracer2):
        # r is constant on the conjugacy class, not on the word spelling
        base = r_and_s(tracer2.trace("abd"))
        for y in ("ba", "cd"):
            assert r_and_s(tracer2.trace(conj("abd", y))) == base

    def test_one_shot_helper(self, surface):
        psi = trace_psi(surface, "ab", n=2)
        assert r_and_s(psi).r == 1


class TestWindingValues:
    def test_reference_windings(self, tracer2):
        # frozen from the exact tracer; the full-scan and windowed search
        # must agree on these
        psi = tracer2.trace("abc")
        assert sorted(tp.t for tp in psi.tuples) == [0, 0, 1, 1, 2]
        psi = tracer2.trace("bd")
        assert sorted(tp.t for tp in psi.tuples) == [-1, 1, 1, 1]

    def test_winding_grows_with_twisting(self, tracer2):
        # multiplying by powers of "a" before closing winds around curve 0
        values = []
        for k in (1, 2, 3, 4):
            psi = tracer2.trace("a" * k + "b")
            counts = r_and_s(psi)
            assert counts.r == 1
            values.append(abs(psi.tuples[0].t))
        assert values == sorted(values)
        assert values[-1] > values[0]
