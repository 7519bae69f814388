r"""Degeneration functionals: per-edge crossing costs, K and L, the length
lower bound, orbit-counting bounds, and the entropy upper bound.

The crossing cost of a triangulation edge {a, b} with opposite triangle
vertices c, d is built from cross ratios of the four flags based at the
collections

    M_p(a, b, c) = { a^(p-r) + b^(n-p-1) + c^(r-1) : r = 1..p },

averaged over p and minimized over the two quadruple orderings; K is the
minimum over the six edge classes of the decomposition, L the minimal
boundary width over n.  Away from the Fuchsian locus the four flags are
reconstructed from the invariant data alone: the edge pair is normalized
to the standard and reversed coordinate flags, the triangle invariants
pin the two opposite flags (after the cyclic/transposition reindexing
that moves the unknown flag into the middle slot), and the shear values
pin the fourth line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .flags import (
    reconstruct_triple,
    recover_fourth_line_from_values,
)
from .invariants import (
    cross_ratio_flags,
    is_infinite,
    plane_cross_ratio,
    triple_index_set,
)
from .linalg import (
    DegenerateError,
    FLOAT64,
    Flag,
    Subspace,
    subspace_intersect,
)

#: reindexing that brings each edge's opposite flags into the middle slot;
#: tau' always enters inverted (the fourth vertex sits on the primed side)
_EDGE_RULES = {
    "ab": {
        "tau_perm": lambda p, q, r: (p, r, q),
        "taup_perm": lambda p, q, r: (p, r, q),
        "shear": lambda n, k: (k, n - k, 0),
    },
    "ac": {
        "tau_perm": lambda p, q, r: (r, q, p),
        "taup_perm": lambda p, q, r: (r, q, p),
        "shear": lambda n, k: (n - k, 0, k),
    },
    "cb": {
        "tau_perm": lambda p, q, r: (q, p, r),
        "taup_perm": lambda p, q, r: (q, p, r),
        "shear": lambda n, k: (0, k, n - k),
    },
}


@dataclass
class EdgeQuadruple:
    """Flags at the two edge endpoints and the two opposite vertices."""

    a: Flag
    b: Flag
    c: Flag
    d: Flag

    @property
    def n(self):
        return self.a.ambient


def m_collection(fa, fb, fc, p):
    """The subspaces a^(p-r) + b^(n-p-1) + c^(r-1), r = 1..p."""
    n = fa.ambient
    out = []
    for r in range(1, p + 1):
        base = [(fa, p - r), (fb, n - p - 1), (fc, r - 1)]
        out.append([(f, m) for f, m in base if m > 0])
    return out


def _log_cross(quad_flags, base):
    value = cross_ratio_flags(*quad_flags, base)
    if is_infinite(value) or value <= 0:
        raise DegenerateError(f"crossing cross ratio not positive: {value}")
    return math.log(float(value))


def k_edge(quad):
    """K[a, b] of one edge quadruple: min of the two branch averages."""
    fa, fb, fc, fd = quad.a, quad.b, quad.c, quad.d
    n = quad.n
    k_prime = {}
    k_second = {}
    for p in range(1, n - 1):
        k_prime[p] = max(
            _log_cross((fd, fa, fc, fb), m)
            for m in m_collection(fa, fb, fc, p) + m_collection(fb, fa, fd, n - p - 1)
        )
        k_second[p] = max(
            _log_cross((fb, fd, fa, fc), m)
            for m in m_collection(fa, fb, fd, p) + m_collection(fb, fa, fc, n - p - 1)
        )
    k_prime[0] = max(
        _log_cross((fd, fa, fc, fb), m) for m in m_collection(fb, fa, fd, n - 1)
    )
    k_second[0] = max(
        _log_cross((fb, fd, fa, fc), m) for m in m_collection(fb, fa, fc, n - 1)
    )
    k_prime[n - 1] = max(
        _log_cross((fd, fa, fc, fb), m) for m in m_collection(fa, fb, fc, n - 1)
    )
    k_second[n - 1] = max(
        _log_cross((fb, fd, fa, fc), m) for m in m_collection(fa, fb, fd, n - 1)
    )
    avg_prime = sum(k_prime.values()) / n
    avg_second = sum(k_second.values()) / n
    return min(avg_prime, avg_second)


def edge_quadruple_from_invariants(inv, kind):
    """Reconstruct the four flags of one edge class from invariant data.

    The edge endpoints are normalized to the standard and reversed
    coordinate flags; the triangle-side vertex carries the all-ones line
    and its flag comes from the tau data, the opposite vertex's line from
    the shear block and its flag from the tau' data.
    """
    n = inv.n
    rules = _EDGE_RULES[kind]
    fa = Flag.standard(n, backend=FLOAT64)
    fb = Flag.reversed_standard(n, backend=FLOAT64)
    ones = Subspace.span([tuple(1.0 for _ in range(n))], backend=FLOAT64)

    tau_ratios = {}
    taup_ratios = {}
    for idx in triple_index_set(n):
        tau_ratios[idx] = math.exp(float(inv.tau[rules["tau_perm"](*idx)]))
        taup_ratios[idx] = math.exp(-float(inv.tau_prime[rules["taup_perm"](*idx)]))
    fc = reconstruct_triple(fa, fb, ones, tau_ratios)
    shear_values = {
        k: -math.exp(float(inv.sigma[rules["shear"](n, k)])) for k in range(1, n)
    }
    d_line = recover_fourth_line_from_values(fa, fb, ones, shear_values)
    fd = reconstruct_triple(fa, fb, d_line, taup_ratios)
    return EdgeQuadruple(a=fa, b=fb, c=fc, d=fd)


def compute_K(decomp, invariants):
    """K and the per-edge crossing costs for a full invariant set."""
    per_edge = {}
    for j, inv in enumerate(invariants):
        for kind in ("ab", "ac", "cb"):
            quad = edge_quadruple_from_invariants(inv, kind)
            per_edge[(j, kind)] = k_edge(quad)
    k_min = min(per_edge.values())
    return k_min, per_edge


def compute_L(boundary_gaps, n):
    """Minimal boundary width over n: min over curves of (l_1 - l_n)/n."""
    if not boundary_gaps:
        raise DegenerateError("no boundary data")
    widths = {}
    for cid, gaps in boundary_gaps.items():
        if any(float(g) <= 0 for g in gaps):
            raise DegenerateError(f"curve {cid}: boundary gaps must be positive")
        widths[cid] = sum(float(g) for g in gaps)
    return min(w / n for w in widths.values())


def length_lower_bound(counts, k_val, l_val):
    """r K/11 + s L/11 for a traced curve with r >= 1."""
    if counts.r < 1:
        raise DegenerateError("length bound needs a curve with r >= 1")
    if k_val <= 0 or l_val <= 0:
        raise DegenerateError("length bound needs positive K and L")
    return counts.r * k_val / 11.0 + counts.s * l_val / 11.0


# ---------------------------------------------------------------------------
# counting bounds


@dataclass(frozen=True)
class CountBound:
    T: Fraction
    value: Fraction


def count_bound_gamma0(T, L, genus):
    """(6g-6) floor(T/L) + 1, exactly."""
    T, L = Fraction(T), Fraction(L)
    if T <= 0 or L <= 0 or genus < 2:
        raise DegenerateError("count bound needs positive T, L and genus >= 2")
    return CountBound(T=T, value=Fraction((6 * genus - 6) * math.floor(T / L) + 1))


def count_bound_gamma1(T, K, L, genus):
    """Exact evaluation of the binodal-count bound.

    sum over a = 1..floor(11T/K) of (120g-120)^a / a times
    binom(floor((11T - aK)/L) + a, a); exact rational output.
    """
    T, K, L = Fraction(T), Fraction(K), Fraction(L)
    if K <= 0 or L <= 0 or T <= 0:
        raise DegenerateError("count bound needs positive T, K, L")
    amax = math.floor(11 * T / K)
    total = Fraction(0)
    base = 120 * genus - 120
    for a in range(1, amax + 1):
        budget = math.floor((11 * T - a * K) / L)
        total += Fraction(base**a, a) * math.comb(budget + a, a)
    return CountBound(T=T, value=total)


# ---------------------------------------------------------------------------
# entropy bound


def _xlogx(t):
    return 0.0 if t <= 0 else t * math.log(t)


def binomial_growth_rate(K, L):
    """max over q in [0, 1/K] of the growth exponent of
    binom(floor((1-qK)/L T) + qT, qT).

    The exponent is (m+q)log(m+q) - m log m - q log q with m = (1-qK)/L,
    continuous up to the endpoints where it vanishes.  Golden-section
    search with deterministic restarts guards against flat stretches.
    """
    K, L = float(K), float(L)
    if K <= 0 or L <= 0:
        raise DegenerateError("growth rate needs positive K and L")

    def phi(q):
        m = (1.0 - q * K) / L
        if m < 0 or q < 0:
            return -math.inf
        return _xlogx(m + q) - _xlogx(m) - _xlogx(q)

    def golden(lo, hi, tol=1e-12):
        invphi = (math.sqrt(5.0) - 1.0) / 2.0
        a, b = lo, hi
        c = b - invphi * (b - a)
        d = a + invphi * (b - a)
        fc, fd = phi(c), phi(d)
        while b - a > tol:
            if fc >= fd:
                b, d, fd = d, c, fc
                c = b - invphi * (b - a)
                fc = phi(c)
            else:
                a, c, fc = c, d, fd
                d = a + invphi * (b - a)
                fd = phi(d)
        qm = (a + b) / 2.0
        return max(phi(qm), fc, fd)

    hi = 1.0 / K
    best = max(phi(0.0), phi(hi))
    windows = [(0.0, hi)]
    for i in range(1, 11):
        lo = hi * (i - 1) / 10.0
        windows.append((lo, hi * i / 10.0))
    for lo, up in windows:
        best = max(best, golden(lo, up))
    return best


def entropy_upper_bound(K, L, genus):
    """11 F(K, L) + 11 log(120g - 120)/K."""
    K = float(K)
    if K <= 0 or genus < 2:
        raise DegenerateError("entropy bound needs positive K and genus >= 2")
    return 11.0 * binomial_growth_rate(K, L) + 11.0 * math.log(120 * genus - 120) / K


# ---------------------------------------------------------------------------
# segment-length checks on the Fuchsian locus


def _neighbor_point(tracer, edge_lift, shared_point):
    p, q = tracer.edge_points(edge_lift)
    from .fuchsian import points_equal

    return q if points_equal(p, shared_point) else p


def _segment_endpoints(tracer, entry, xm, xp):
    """Boundary points (a, b, suc/pred data) of one traced binodal edge."""
    from .fuchsian import in_arc, points_equal

    pred_e, edge_e, succ_e, _pivot = entry
    p, q = tracer.edge_points(edge_e)
    a_pt, b_pt = (p, q) if in_arc(p, xm, xp) else (q, p)
    # succ shares exactly one endpoint of the edge; same for pred
    sp, sq = tracer.edge_points(succ_e)
    succ_shares_a = points_equal(sp, a_pt) or points_equal(sq, a_pt)
    succ_far = _neighbor_point(tracer, succ_e, a_pt if succ_shares_a else b_pt)
    pred_far = _neighbor_point(tracer, pred_e, b_pt if succ_shares_a else a_pt)
    return a_pt, b_pt, succ_shares_a, succ_far, pred_far


def crossing_segment_average(tracer, entry, xm, xp):
    """(1/n) sum over p of the crossing (p)-subsegment lengths of one edge."""
    n = tracer.n
    h_plane = tracer.flag(xm).subspace(1) | tracer.flag(xp).subspace(1)
    a_pt, b_pt, succ_shares_a, succ_far, pred_far = _segment_endpoints(
        tracer, entry, xm, xp
    )
    fa, fb = tracer.flag(a_pt), tracer.flag(b_pt)
    fsucc, fpred = tracer.flag(succ_far), tracer.flag(pred_far)
    if succ_shares_a:
        # succ pivots at a: the moving endpoint on the b side advances
        plus = lambda p: fa.subspace(p) | fsucc.subspace(n - p - 1)
        minus = lambda p: fpred.subspace(p) | fb.subspace(n - p - 1)
    else:
        plus = lambda p: fsucc.subspace(p) | fb.subspace(n - p - 1)
        minus = lambda p: fa.subspace(p) | fpred.subspace(n - p - 1)
    total = 0.0
    for p in range(n):
        lp_plus = subspace_intersect(plus(p), h_plane)
        lp_minus = subspace_intersect(minus(p), h_plane)
        if lp_plus.dim != 1 or lp_minus.dim != 1:
            raise DegenerateError("segment endpoints are not transverse")
        val = plane_cross_ratio(
            tracer.flag(xm).subspace(1) & h_plane,
            lp_minus,
            lp_plus,
            tracer.flag(xp).subspace(1) & h_plane,
            h_plane,
        )
        if is_infinite(val) or val <= 0:
            raise DegenerateError("segment cross ratio not positive")
        total += math.log(float(val))
    return total / n


def winding_segment_lengths(tracer, entry, next_entry, xm, xp):
    """Lengths l(w_p) of the winding subsegments between consecutive
    binodal edges, indexed by p = 0..n-1.

    The segment runs from the backward-moved point of the first edge to
    the forward-moved point of the second.
    """
    n = tracer.n
    h_plane = tracer.flag(xm).subspace(1) | tracer.flag(xp).subspace(1)
    a1, b1, shares_a1, _, pred_far1 = _segment_endpoints(tracer, entry, xm, xp)
    a2, b2, shares_a2, succ_far2, _ = _segment_endpoints(tracer, next_entry, xm, xp)
    fa1, fb1 = tracer.flag(a1), tracer.flag(b1)
    fa2, fb2 = tracer.flag(a2), tracer.flag(b2)
    fpred1, fsucc2 = tracer.flag(pred_far1), tracer.flag(succ_far2)
    out = []
    for p in range(n):
        if shares_a1:
            minus_span = fpred1.subspace(p) | fb1.subspace(n - p - 1)
        else:
            minus_span = fa1.subspace(p) | fpred1.subspace(n - p - 1)
        if shares_a2:
            plus_span = fa2.subspace(p) | fsucc2.subspace(n - p - 1)
        else:
            plus_span = fsucc2.subspace(p) | fb2.subspace(n - p - 1)
        lp_minus = subspace_intersect(minus_span, h_plane)
        lp_plus = subspace_intersect(plus_span, h_plane)
        if lp_plus.dim != 1 or lp_minus.dim != 1:
            raise DegenerateError("winding segment endpoints are not transverse")
        val = plane_cross_ratio(
            tracer.flag(xm).subspace(1),
            lp_minus,
            lp_plus,
            tracer.flag(xp).subspace(1),
            h_plane,
        )
        if is_infinite(val) or val <= 0:
            raise DegenerateError("winding cross ratio not positive")
        out.append(math.log(float(val)))
    return out


def segment_length_check(tracer, psi, index, x_mat, k_value, l_value):
    """(lhs, rhs) pairs for one binodal edge of a traced encoding.

    Returns the crossing inequality (average crossing length vs K) and the
    winding inequality toward the next binodal edge (same-type pairs
    average all p and compare against max(0, |t|-2) L; different-type
    pairs use the p = 1 and p = n-2 segments against max(0, |t|-1) L).
    The wrap-around pair translates the first edge by the deck matrix so
    the two lifts are genuinely consecutive along the axis.
    """
    from .fuchsian import fixed_points, mat2_mul
    from .tracer import EdgeLift

    xm, xp = fixed_points(x_mat)
    entry = psi.lifts[index]
    wrap = (index + 1) % len(psi.lifts)
    next_entry = psi.lifts[wrap]
    if wrap <= index:
        next_entry = tuple(
            EdgeLift(mat2_mul(x_mat, e.gamma), e.pants, e.kind)
            if isinstance(e, EdgeLift)
            else e
            for e in next_entry
        )
    crossing = (crossing_segment_average(tracer, entry, xm, xp), k_value)
    t_val = psi.tuples[index].t
    w_lengths = winding_segment_lengths(tracer, entry, next_entry, xm, xp)
    n = tracer.n
    same_type = psi.tuples[index].type == psi.tuples[wrap].type
    if same_type:
        winding = (sum(w_lengths) / n, max(0, abs(t_val) - 2) * l_value)
    else:
        winding = (
            w_lengths[1] + w_lengths[n - 2],
            max(0, abs(t_val) - 1) * l_value,
        )
    return crossing, winding


# ---------------------------------------------------------------------------
# internal-sequence scans


@dataclass
class DegenerationReport:
    step: int
    n: int
    genus: int
    K: float
    L: float
    entropy_bound: float
    min_edge: tuple
    flags_ok: bool
    per_edge: dict = field(default_factory=dict)
    error: str = ""

    def csv_row(self):
        return (
            self.step,
            self.n,
            self.genus,
            f"{self.K:.12g}" if self.flags_ok else "",
            f"{self.L:.12g}" if self.flags_ok else "",
            f"{self.entropy_bound:.12g}" if self.flags_ok else "",
            f"{self.min_edge[0]}:{self.min_edge[1]}" if self.flags_ok else "",
            int(self.flags_ok),
        )


CSV_COLUMNS = ("step", "n", "g", "K", "L", "entropy_bound", "min_edge_id", "flags_ok")


def shifted_params(base, direction, scale):
    """Base point plus scale * direction in the internal coordinates."""
    from .pants import HitchinParams

    internal = []
    for j, block in enumerate(base.internal):
        shift = direction[j] if isinstance(direction, (list, tuple)) else direction
        new = dict(block)
        for label, delta in shift.items():
            new[label] = new[label] + scale * delta
        internal.append(new)
    return HitchinParams(
        n=base.n,
        decomp=base.decomp,
        boundary=dict(base.boundary),
        internal=tuple(internal),
        gluing=dict(base.gluing),
    )


def internal_sequence_scan(base, direction, steps):
    """Reports along base + i*direction, i = 0..steps, boundary held fixed.

    Rows where reconstruction fails are flagged and the scan continues.
    """
    from .pants import xi_inverse

    genus = base.decomp.genus
    rows = []
    for i in range(steps + 1):
        try:
            params = shifted_params(base, direction, i)
            invariants, _ = xi_inverse(params)
            k_val, per_edge = compute_K(base.decomp, invariants)
            l_val = compute_L(params.boundary, base.n)
            ent = entropy_upper_bound(k_val, l_val, genus)
            min_edge = min(per_edge, key=per_edge.get)
            rows.append(
                DegenerationReport(
                    step=i,
                    n=base.n,
                    genus=genus,
                    K=k_val,
                    L=l_val,
                    entropy_bound=ent,
                    min_edge=min_edge,
                    flags_ok=True,
                    per_edge=per_edge,
                )
            )
        except (DegenerateError, ValueError, OverflowError) as exc:
            rows.append(
                DegenerationReport(
                    step=i,
                    n=base.n,
                    genus=genus,
                    K=float("nan"),
                    L=float("nan"),
                    entropy_bound=float("nan"),
                    min_edge=("", ""),
                    flags_ok=False,
                    error=str(exc),
                )
            )
    return rows
