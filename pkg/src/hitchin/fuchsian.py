r"""Exact Fuchsian surface-group machinery on the upper half-plane boundary.

Boundary points are quadratic irrationals a + b sqrt(D) (or the point at
infinity), so every incidence and cyclic-order decision made by the curve
tracer is exact integer arithmetic -- fixed points of rational hyperbolic
matrices live in real quadratic fields and rational Moebius maps preserve
them.

The default genus-2 group doubles a one-holed torus group <a, b> with
tr[a, b] < -2 across its boundary axis: the half-turn psi about a rational
point of the axis conjugates [a, b] to its inverse, so (a, b, c, d) with
c = psi a psi^-1, d = psi b psi^-1 satisfies the genus-2 relation
[a, b][c, d] = 1 exactly in SL(2, Q).  The three pants curves are the two
handle curves and the waist [a, b].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .invariants import INFINITY, is_infinite
from .linalg import DegenerateError
from .pants import PantsDecomposition, standard_genus2

_SMALL_PRIMES = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]


class SurfaceError(ValueError):
    """Invalid surface-group input (non-hyperbolic words, broken relation)."""


def _reduce_square(n):
    """n = s^2 * d with d square-reduced over small primes; returns (s, d)."""
    s = 1
    for p in _SMALL_PRIMES:
        p2 = p * p
        while n % p2 == 0:
            n //= p2
            s *= p
    r = math.isqrt(n)
    if r * r == n:
        return s * r, 1
    return s, n


@dataclass(frozen=True)
class BPoint:
    """Boundary point a + b sqrt(d) with a, b rational and d a non-square."""

    a: Fraction
    b: Fraction
    d: int

    @classmethod
    def make(cls, a, b=Fraction(0), d=0):
        a, b = Fraction(a), Fraction(b)
        if b == 0 or d == 0:
            return cls(a, Fraction(0), 0)
        if d < 0:
            raise SurfaceError("boundary points are real")
        s, d = _reduce_square(d)
        if d == 1:
            return cls(a + b * s, Fraction(0), 0)
        return cls(a, b * s, d)

    @classmethod
    def rational(cls, x):
        return cls.make(Fraction(x))

    def is_rational(self):
        return self.d == 0

    def conjugate(self):
        return BPoint(self.a, -self.b, self.d)

    def sign(self):
        a, b = self.a, self.b
        if b == 0:
            return _sgn(a)
        if a == 0:
            return _sgn(b)
        if (a > 0) == (b > 0):
            return _sgn(a)
        s = _sgn(a * a - b * b * self.d)
        return s if a > 0 else -s

    def __float__(self):
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def __repr__(self):
        if self.b == 0:
            return f"BPoint({self.a})"
        return f"BPoint({self.a} + {self.b}*sqrt({self.d}))"


def _sgn(x):
    return (x > 0) - (x < 0)


def cmp_points(p, q):
    """Exact sign of p - q for finite boundary points."""
    if p.d == q.d:
        return BPoint(p.a - q.a, p.b - q.b, p.d).sign() if p.d else _sgn(p.a - q.a)
    # u single-radical, w pure radical in the other field
    u = BPoint(p.a - q.a, p.b, p.d)
    su, sw = u.sign(), _sgn(-q.b)
    if su == 0:
        return sw
    if sw == 0:
        return su
    if su == sw:
        return su
    diff2 = BPoint.make(
        (p.a - q.a) ** 2 + p.b * p.b * p.d - q.b * q.b * q.d,
        2 * (p.a - q.a) * p.b,
        p.d,
    )
    return su * diff2.sign()


def points_equal(p, q):
    pi, qi = is_infinite(p), is_infinite(q)
    if pi or qi:
        return pi and qi
    if p.a == q.a and p.b == q.b and p.d == q.d:
        return True
    return cmp_points(p, q) == 0


def _lt(p, q):
    """Linear order with the infinite point as maximum."""
    if is_infinite(p):
        return False
    if is_infinite(q):
        return True
    return cmp_points(p, q) < 0


def cyclic_order(p, q, r):
    """+1 if p, q, r are in positive cyclic order on R u {inf}, else -1.

    Raises on coincident points -- callers are responsible for the
    transversality preconditions.
    """
    if points_equal(p, q) or points_equal(q, r) or points_equal(p, r):
        raise DegenerateError("cyclic order of coincident boundary points")
    if _lt(p, q):
        return 1 if (_lt(q, r) or _lt(r, p)) else -1
    return 1 if (_lt(q, r) and _lt(r, p)) else -1


def in_arc(x, u, v):
    """x lies strictly inside the positively oriented arc from u to v."""
    return cyclic_order(u, x, v) == 1


def edges_cross(e1, e2):
    """Two boundary chords cross iff each separates the other's endpoints."""
    return separates(e1[0], e1[1], e2[0], e2[1]) and separates(
        e2[0], e2[1], e1[0], e1[1]
    )


def separates(u, v, x, y):
    """The chord {u, v} separates x from y on the circle."""
    return in_arc(x, u, v) != in_arc(y, u, v)


# ---------------------------------------------------------------------------
# 2x2 rational matrices and words


def mat2_mul(m, n):
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def mat2_inv(m):
    a, b = m[0]
    c, d = m[1]
    det = a * d - b * c
    if det == 0:
        raise SurfaceError("singular 2x2 matrix")
    return ((d / det, -b / det), (-c / det, a / det))


def mat2_det(m):
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat2_trace(m):
    return m[0][0] + m[1][1]


MAT2_ID = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))


def mat2_convert(rows):
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def mat2_eq_projective(m, n):
    return m == n or m == tuple(tuple(-x for x in row) for row in n)


def invert_word(word):
    return word[::-1].swapcase()


def is_hyperbolic(m):
    tr = mat2_trace(m)
    return tr * tr > 4 * mat2_det(m)


def mobius(m, p):
    """Image of a boundary point under a rational Moebius matrix."""
    (a, b), (c, d) = m
    if is_infinite(p):
        if c == 0:
            return INFINITY
        return BPoint.rational(a / c)
    na, nb = a * p.a + b, a * p.b
    da, db = c * p.a + d, c * p.b
    if da == 0 and db == 0:
        return INFINITY
    norm = da * da - db * db * p.d
    # d is a non-square, so the denominator norm vanishes only at zero
    return BPoint.make(
        (na * da - nb * db * p.d) / norm, (nb * da - na * db) / norm, p.d
    )


def fixed_points(m):
    """(repelling, attracting) fixed points of a hyperbolic matrix."""
    if not is_hyperbolic(m):
        raise SurfaceError("fixed points of a non-hyperbolic matrix")
    (a, b), (c, d) = m
    det = mat2_det(m)
    if c == 0:
        finite = BPoint.rational(b / (d - a))
        # infinity is attracting iff |a| > |d|
        if a * a > d * d:
            return finite, INFINITY
        return INFINITY, finite
    disc = (a - d) ** 2 + 4 * b * c
    q = disc.denominator
    d_int = disc.numerator * q
    coeff = Fraction(1, q)
    half = Fraction(a - d, 2 * c)
    rad = coeff / (2 * c)
    p1 = BPoint.make(half, rad, d_int)
    p2 = BPoint.make(half, -rad, d_int)

    def attracting(p):
        # |c p + d| > sqrt(det) at the attracting fixed point
        t = BPoint.make(c * p.a + d, c * p.b, p.d)
        t2 = BPoint.make(t.a * t.a + t.b * t.b * t.d, 2 * t.a * t.b, t.d)
        return BPoint.make(t2.a - det, t2.b, t2.d).sign() > 0

    if attracting(p1):
        return p2, p1
    if attracting(p2):
        return p1, p2
    raise SurfaceError("could not orient fixed points")  # pragma: no cover


def axis_center_radius2(m):
    """Center and squared radius of the axis semicircle (c != 0 case)."""
    (a, b), (c, d) = m
    if c == 0:
        raise SurfaceError("axis through infinity has no finite center")
    center = Fraction(a - d, 2 * c)
    radius2 = center * center + Fraction(b, c)
    if radius2 <= 0:
        raise SurfaceError("matrix has no real axis")
    return center, radius2


def translation_length(m):
    """Hyperbolic translation length 2 arccosh(|tr|/2) for det-1 input."""
    det = mat2_det(m)
    tr = abs(float(mat2_trace(m))) / math.sqrt(float(det))
    if tr <= 2:
        raise SurfaceError("translation length of a non-hyperbolic matrix")
    return 2.0 * math.acosh(tr / 2.0)


# ---------------------------------------------------------------------------
# the surface


@dataclass
class FuchsianSurfaceData:
    """A Fuchsian genus-g group with pants words and slot bookkeeping.

    ``generators`` maps lowercase letters to det-1 rational matrices;
    capital letters act as inverses in words.  ``slot_words[(j, s)]`` is the
    boundary word of pants j at slot s, equal as a matrix to
    delta * w^(+-1) * delta^(-1) where w is the curve word of the attached
    curve and delta = ``slot_conjugators[(j, s)]``.
    """

    genus: int
    generators: dict
    decomp: PantsDecomposition
    curve_words: dict
    slot_words: dict
    slot_conjugators: dict

    def __post_init__(self):
        self._matrix_cache = {}
        self._vertex_cache = {}
        self._validate()

    # -- word evaluation ----------------------------------------------------

    def matrix(self, word):
        if word in self._matrix_cache:
            return self._matrix_cache[word]
        m = MAT2_ID
        for ch in word:
            if ch.islower():
                g = self.generators[ch]
            else:
                g = mat2_inv(self.generators[ch.lower()])
            m = mat2_mul(m, g)
        self._matrix_cache[word] = m
        return m

    def slot_matrix(self, pants, slot):
        return self.matrix(self.slot_words[(pants, slot)])

    def fixed_pair(self, word):
        return fixed_points(self.matrix(word))

    # -- triangulation anchors ----------------------------------------------

    def base_vertex(self, pants, letter):
        """Repelling fixed point of the slot word: a_j^-, b_j^-, or c_j^-."""
        key = (pants, letter)
        if key not in self._vertex_cache:
            slot = letter.upper()
            rep, _ = self.fixed_pair(self.slot_words[(pants, slot)])
            self._vertex_cache[key] = rep
        return self._vertex_cache[key]

    def slot_vertex_attracting(self, pants, letter):
        _, att = self.fixed_pair(self.slot_words[(pants, letter.upper())])
        return att

    def length_spectrum(self):
        """Translation length of each pants curve, keyed by curve id."""
        return {
            cid: translation_length(self.matrix(w))
            for cid, w in self.curve_words.items()
        }

    # -- validation ----------------------------------------------------------

    def _validate(self):
        for letter, m in self.generators.items():
            self.generators[letter] = mat2_convert(m)
            if mat2_det(self.generators[letter]) != 1:
                raise SurfaceError(f"generator {letter!r} must have determinant 1")
        for (j, s), word in self.slot_words.items():
            if not is_hyperbolic(self.matrix(word)):
                raise SurfaceError(f"slot word {word!r} is not hyperbolic")
        # pants relation C = A^-1 B^-1 per pants, projectively
        for j in range(self.decomp.num_pants):
            a = self.matrix(self.slot_words[(j, "A")])
            b = self.matrix(self.slot_words[(j, "B")])
            c = self.matrix(self.slot_words[(j, "C")])
            if not mat2_eq_projective(mat2_mul(mat2_inv(a), mat2_inv(b)), c):
                raise SurfaceError(f"pants {j}: slot words violate C = A^-1 B^-1")
        # slot words must be the advertised conjugates of the curve words
        for (j, s), word in self.slot_words.items():
            cid, aligned = self.decomp.slot_curve(j, s)
            delta = self.matrix(self.slot_conjugators[(j, s)])
            w = self.matrix(self.curve_words[cid])
            if not aligned:
                w = mat2_inv(w)
            expect = mat2_mul(mat2_mul(delta, w), mat2_inv(delta))
            if not mat2_eq_projective(self.matrix(word), expect):
                raise SurfaceError(
                    f"slot ({j}, {s}): word is not the advertised conjugate"
                )
        self._validate_embedding()

    def _validate_embedding(self):
        """Cyclic-order sanity of the per-pants vertex pattern.

        Each pants must see its seven marked boundary points in a coherent
        circular pattern (the spinning-triangle picture); all pants must
        share the same chirality.
        """
        chirality = None
        for j in range(self.decomp.num_pants):
            a_m = self.base_vertex(j, "a")
            b_m = self.base_vertex(j, "b")
            c_m = self.base_vertex(j, "c")
            a_p = self.slot_vertex_attracting(j, "a")
            ac_m = mobius(self.matrix(self.slot_words[(j, "A")]), c_m)
            sign = cyclic_order(a_m, c_m, b_m)
            pattern = [a_m, c_m, b_m, ac_m, a_p]
            for i in range(len(pattern) - 2):
                if cyclic_order(pattern[i], pattern[i + 1], pattern[i + 2]) != sign:
                    raise SurfaceError(
                        f"pants {j}: boundary points out of cyclic pattern"
                    )
            if chirality is None:
                chirality = sign
            elif chirality != sign:
                raise SurfaceError("pants have inconsistent chirality")
        self.chirality = chirality


def fuchsian_invariants(surface, n):
    """Shear and triangle invariants of the n-dimensional Fuchsian point.

    Evaluates the defining cross and triple ratios on the osculating flags
    of the boundary circle.  Triangle invariants vanish identically on the
    Fuchsian locus; they are computed rather than assumed so that the test
    suite can check it.
    """
    import math

    from .flags import veronese_flag_float
    from .invariants import cross_ratio_flags, is_infinite, triple_ratio
    from .invariants import triple_index_set, shear_index_set
    from .pants import PantsInvariants

    flag_cache = {}

    def flag_at(point):
        key = "inf" if is_infinite(point) else (point.a, point.b, point.d)
        if key not in flag_cache:
            value = point if is_infinite(point) else float(point)
            flag_cache[key] = veronese_flag_float(value, n)
        return flag_cache[key]

    invariants = []
    for j in range(surface.decomp.num_pants):
        a_m = surface.base_vertex(j, "a")
        b_m = surface.base_vertex(j, "b")
        c_m = surface.base_vertex(j, "c")
        a_word = surface.slot_words[(j, "A")]
        b_word = surface.slot_words[(j, "B")]
        c_word = surface.slot_words[(j, "C")]
        ac_pt = mobius(surface.matrix(a_word), c_m)
        cb_pt = mobius(surface.matrix(c_word), b_m)
        ba_pt = mobius(surface.matrix(b_word), a_m)
        fa, fb, fc = flag_at(a_m), flag_at(b_m), flag_at(c_m)
        f_ac, f_cb, f_ba = flag_at(ac_pt), flag_at(cb_pt), flag_at(ba_pt)

        tau, taup = {}, {}
        for (x, y, z) in triple_index_set(n):
            tau[(x, y, z)] = math.log(float(triple_ratio(fa, fc, fb, (x, z, y))))
            taup[(x, y, z)] = math.log(float(triple_ratio(fa, fb, f_ac, (x, y, z))))
        sigma = {}
        for idx in shear_index_set(n):
            x, y, z = idx
            if z == 0:
                val = cross_ratio_flags(fa, fc, f_ac, fb, [(fa, x - 1), (fb, y - 1)])
            elif y == 0:
                val = cross_ratio_flags(fc, fb, f_cb, fa, [(fc, z - 1), (fa, x - 1)])
            else:
                val = cross_ratio_flags(fb, fa, f_ba, fc, [(fb, y - 1), (fc, z - 1)])
            if is_infinite(val) or val >= 0:
                raise SurfaceError(f"shear cross ratio at {idx} is not negative: {val}")
            sigma[idx] = math.log(-float(val))
        invariants.append(PantsInvariants(n=n, tau=tau, tau_prime=taup, sigma=sigma))
    return invariants


def genus2_surface(a1=None, b1=None, twist=Fraction(0)):
    """The documented genus-2 surface: a doubled one-holed torus.

    ``a1``, ``b1`` generate a one-holed torus group (tr[a1,b1] < -2 is
    required); the second handle is the conjugate of the first by the
    half-turn about the axis point of [a1,b1] at horizontal offset
    ``twist`` from the axis center.  All four generators are exact
    rational determinant-1 matrices and the genus-2 relation holds on the
    nose.
    """
    a1 = mat2_convert(a1 if a1 is not None else ((2, 1), (1, 1)))
    b1 = mat2_convert(b1 if b1 is not None else ((1, 2), (1, 3)))
    for name, m in (("a1", a1), ("b1", b1)):
        if mat2_det(m) != 1:
            raise SurfaceError(f"{name} must have determinant 1")
    comm = mat2_mul(
        mat2_mul(a1, b1), mat2_mul(mat2_inv(a1), mat2_inv(b1))
    )
    if mat2_trace(comm) >= -2:
        raise SurfaceError(
            f"tr[a1,b1] = {mat2_trace(comm)} >= -2: not a one-holed torus group"
        )
    center, radius2 = axis_center_radius2(comm)
    u = center + Fraction(twist)
    v2 = radius2 - (u - center) ** 2
    if v2 <= 0:
        raise SurfaceError("twist offset leaves the waist axis")
    psi = ((u, -(u * u + v2)), (Fraction(1), -u))
    psi_inv = mat2_inv(psi)

    def conj(m):
        return mat2_mul(mat2_mul(psi, m), psi_inv)

    a2, b2 = conj(a1), conj(b1)
    gens = {"a": a1, "b": b1, "c": a2, "d": b2}
    surface = FuchsianSurfaceData(
        genus=2,
        generators=gens,
        decomp=standard_genus2(),
        curve_words={0: "a", 1: "c", 2: "abAB"},
        slot_words={
            (0, "A"): "A",
            (0, "B"): "baB",
            (0, "C"): "abAB",
            (1, "A"): "C",
            (1, "B"): "dcD",
            (1, "C"): "cdCD",
        },
        slot_conjugators={
            (0, "A"): "",
            (0, "B"): "b",
            (0, "C"): "",
            (1, "A"): "",
            (1, "B"): "d",
            (1, "C"): "",
        },
    )
    relation = mat2_mul(surface.matrix("abAB"), surface.matrix("cdCD"))
    if not mat2_eq_projective(relation, MAT2_ID):
        raise SurfaceError("genus-2 relation failed")  # pragma: no cover
    return surface
