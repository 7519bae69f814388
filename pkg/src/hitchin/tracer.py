r"""Combinatorial tracing of closed curves through the pants triangulation.

Every vertex of the triangulation is a fixed point of a pants-curve
conjugate, and the edges incident to it form a bi-infinite fan swept by
the powers of its stabilizer.  A closed word is traced by walking its
axis through the triangulation with exact circle arithmetic: ordinary
steps cross one triangle at a time, and when the axis crosses a closed
leaf (so the walk enters an infinite spiral) the fan is jumped
analytically by locating the extreme crossing fan edge on the far side.

The trace records the cyclic tuple sequence

    (pred edge class, edge class, succ edge class, Z/S type, winding count)

over the binodal edges (the pivot-switch edges), one period of the
deck action.  Winding counts are signed mesh-crossing numbers; the mesh
of each pants curve is built once from the first eigenline cross ratio
and transported equivariantly.  Z/S labels follow the package's fixed
positive orientation of the boundary circle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fuchsian import (
    cyclic_order,
    fixed_points,
    in_arc,
    is_hyperbolic,
    mat2_inv,
    mat2_mul,
    MAT2_ID,
    mobius,
    points_equal,
    separates,
    translation_length,
)
from .invariants import cross_ratio, is_infinite
from .flags import veronese_flag_float
from .linalg import DegenerateError, subspace_intersect

EDGE_ENDS = {"ab": ("a", "b"), "ac": ("a", "c"), "cb": ("c", "b")}
#: fan families at each vertex letter: the two edge kinds through it
VERTEX_FANS = {"a": ("ac", "ab"), "b": ("ab", "cb"), "c": ("ac", "cb")}
_SHARED_LETTER = {
    frozenset(("ab", "ac")): "a",
    frozenset(("ab", "cb")): "b",
    frozenset(("ac", "cb")): "c",
}


class TraceError(RuntimeError):
    """Tracer failure: non-hyperbolic word or exhausted search depth."""


class _ClosedLeafHit(Exception):
    """Internal: the walk ran into the axis being a closed-leaf lift."""

    def __init__(self, curve):
        self.curve = curve


@dataclass(frozen=True)
class VertexLift:
    gamma: tuple
    pants: int
    letter: str


@dataclass(frozen=True)
class EdgeLift:
    gamma: tuple
    pants: int
    kind: str

    @property
    def edge_class(self):
        return (self.pants, self.kind)


@dataclass(frozen=True)
class TriangleLift:
    gamma: tuple
    pants: int
    prime: bool


@dataclass(frozen=True)
class PsiTuple:
    pred: tuple
    edge: tuple
    succ: tuple
    type: str
    t: int


@dataclass
class PsiEncoding:
    """Cyclic combinatorial description of a closed curve."""

    tuples: tuple
    closed_leaf_curve: int = None
    lifts: tuple = ()

    @property
    def is_closed_leaf(self):
        return self.closed_leaf_curve is not None

    def rotated(self, k):
        m = len(self.tuples)
        return PsiEncoding(
            tuples=tuple(self.tuples[(i + k) % m] for i in range(m)),
            closed_leaf_curve=self.closed_leaf_curve,
        )


@dataclass(frozen=True)
class CountPair:
    r: int
    s: int


def r_and_s(psi):
    """r = number of binodal tuples, s = sum of max(0, |t|-2)."""
    if psi.is_closed_leaf or not psi.tuples:
        raise DegenerateError("empty encoding: the word is a closed-leaf power")
    r = len(psi.tuples)
    s = sum(max(0, abs(tp.t) - 2) for tp in psi.tuples)
    return CountPair(r=r, s=s)


def cyclic_equal(psi1, psi2):
    """Equality of encodings up to cyclic rotation."""
    t1, t2 = tuple(psi1.tuples), tuple(psi2.tuples)
    if psi1.is_closed_leaf or psi2.is_closed_leaf:
        return psi1.is_closed_leaf and psi2.is_closed_leaf
    if len(t1) != len(t2):
        return False
    return any(t1 == t2[k:] + t2[:k] for k in range(len(t2)))


def validate_psi(psi, decomp):
    """Necessary-condition checks; empty list means the encoding passes."""
    violations = []
    if psi.is_closed_leaf:
        return violations
    if not psi.tuples:
        violations.append("empty tuple list")
        return violations
    valid_ids = set(decomp.edge_ids())
    for i, tp in enumerate(psi.tuples):
        for label, ec in (("pred", tp.pred), ("edge", tp.edge), ("succ", tp.succ)):
            if ec not in valid_ids:
                violations.append(f"tuple {i}: {label} {ec} is not an edge class")
        if violations:
            continue
        if tp.pred[0] != tp.edge[0] or tp.succ[0] != tp.edge[0]:
            violations.append(f"tuple {i}: pred/succ leave the pants of the edge")
        if len({tp.pred[1], tp.edge[1], tp.succ[1]}) != 3:
            violations.append(f"tuple {i}: pred, edge, succ classes not distinct")
        if tp.type not in ("Z", "S"):
            violations.append(f"tuple {i}: unknown type {tp.type!r}")
    if violations:
        return violations
    m = len(psi.tuples)
    for i in range(m):
        cur, nxt = psi.tuples[i], psi.tuples[(i + 1) % m]
        out_letter = _SHARED_LETTER[frozenset((cur.edge[1], cur.succ[1]))]
        in_letter = _SHARED_LETTER[frozenset((nxt.pred[1], nxt.edge[1]))]
        out_curve = decomp.slot_curve(cur.edge[0], out_letter.upper())[0]
        in_curve = decomp.slot_curve(nxt.edge[0], in_letter.upper())[0]
        if out_curve != in_curve:
            violations.append(
                f"tuples {i}->{(i + 1) % m}: not joinable through a common curve"
            )
    return violations


@dataclass
class MeshSpec:
    """Anchor pair of one pants-curve mesh with its defining inequality."""

    curve: int
    word: str
    x_point: object
    y_point: object
    g_value: float
    width: float  # lambda_1 - lambda_n of the curve's holonomy
    n: int

    def inequality_holds(self):
        return 1.0 <= self.g_value < math.exp(self.width)


class PsiTracer:
    """Traces closed words on a Fuchsian surface through the triangulation."""

    def __init__(self, surface, n=2, depth_cap=64):
        self.surface = surface
        self.decomp = surface.decomp
        self.n = n
        self.depth_cap = depth_cap
        self._slot_mats = {}
        self._points = {}
        self._flags = {}
        self._partner = {}
        self._meshes = {}
        self._fan_pow = {}
        for j in range(self.decomp.num_pants):
            for s in "ABC":
                self._slot_mats[(j, s)] = surface.slot_matrix(j, s)

    # -- lift geometry -------------------------------------------------------

    def point(self, v):
        key = (v.gamma, v.pants, v.letter)
        if key not in self._points:
            base = self.surface.base_vertex(v.pants, v.letter)
            self._points[key] = mobius(v.gamma, base)
        return self._points[key]

    def slot_mat(self, pants, letter):
        return self._slot_mats[(pants, letter.upper())]

    def edge_vertices(self, e):
        l1, l2 = EDGE_ENDS[e.kind]
        return VertexLift(e.gamma, e.pants, l1), VertexLift(e.gamma, e.pants, l2)

    def edge_points(self, e):
        v1, v2 = self.edge_vertices(e)
        return self.point(v1), self.point(v2)

    def adjacent_triangles(self, e):
        g, j = e.gamma, e.pants
        if e.kind == "ab":
            return TriangleLift(g, j, False), TriangleLift(g, j, True)
        if e.kind == "ac":
            delta = mat2_mul(g, mat2_inv(self.slot_mat(j, "a")))
            return TriangleLift(g, j, False), TriangleLift(delta, j, True)
        delta = mat2_mul(g, self.slot_mat(j, "b"))
        return TriangleLift(g, j, False), TriangleLift(delta, j, True)

    def triangle_vertices(self, tri):
        g, j = tri.gamma, tri.pants
        if not tri.prime:
            return tuple(VertexLift(g, j, l) for l in "abc")
        ga = mat2_mul(g, self.slot_mat(j, "a"))
        return (VertexLift(g, j, "a"), VertexLift(g, j, "b"), VertexLift(ga, j, "c"))

    def triangle_edges(self, tri):
        g, j = tri.gamma, tri.pants
        if not tri.prime:
            return tuple(EdgeLift(g, j, k) for k in ("ab", "ac", "cb"))
        ga = mat2_mul(g, self.slot_mat(j, "a"))
        gb = mat2_mul(g, mat2_inv(self.slot_mat(j, "b")))
        return (EdgeLift(g, j, "ab"), EdgeLift(ga, j, "ac"), EdgeLift(gb, j, "cb"))

    def same_edge(self, e1, e2):
        if e1.edge_class != e2.edge_class:
            return False
        p1, q1 = self.edge_points(e1)
        p2, q2 = self.edge_points(e2)
        return (points_equal(p1, p2) and points_equal(q1, q2)) or (
            points_equal(p1, q2) and points_equal(q1, p2)
        )

    def fan_edge(self, v, kind, k):
        """k-th fan edge of the given family at vertex v."""
        key = (v.gamma, v.pants, v.letter)
        cache = self._fan_pow.setdefault(key, {0: v.gamma})
        if k not in cache:
            s = self.slot_mat(v.pants, v.letter)
            if k > 0:
                base = max(kk for kk in cache if 0 <= kk < k)
                g = cache[base]
                for kk in range(base + 1, k + 1):
                    g = mat2_mul(g, s)
                    cache[kk] = g
            else:
                base = min(kk for kk in cache if k < kk <= 0)
                sinv = mat2_inv(s)
                g = cache[base]
                for kk in range(base - 1, k - 1, -1):
                    g = mat2_mul(g, sinv)
                    cache[kk] = g
        return EdgeLift(cache[k], v.pants, kind)

    def leaf_endpoints(self, v):
        """The closed-leaf lift through vertex v: (v point, partner point)."""
        rep = self.point(v)
        att = mobius(v.gamma, self.surface.slot_vertex_attracting(v.pants, v.letter))
        return rep, att

    def partner_lift(self, v):
        """The vertex lift of the other pants sitting at the leaf partner."""
        key = (v.pants, v.letter)
        if key not in self._partner:
            cid, _ = self.decomp.slot_curve(v.pants, v.letter.upper())
            ref1, ref2 = self.decomp.curves[cid]
            other = ref2 if (ref1.pants, ref1.slot) == (v.pants, v.letter.upper()) else ref1
            d1 = self.surface.matrix(
                self.surface.slot_conjugators[(v.pants, v.letter.upper())]
            )
            d2 = self.surface.matrix(
                self.surface.slot_conjugators[(other.pants, other.slot)]
            )
            self._partner[key] = (
                mat2_mul(d1, mat2_inv(d2)),
                other.pants,
                other.slot.lower(),
            )
        transfer, p2, l2 = self._partner[key]
        return VertexLift(mat2_mul(v.gamma, transfer), p2, l2)

    def curve_of_vertex(self, v):
        return self.decomp.slot_curve(v.pants, v.letter.upper())[0]

    def mesh_anchor(self, v):
        """Conjugator eta with stabilizer(v leaf) = eta w eta^-1, w the curve word."""
        delta = self.surface.matrix(
            self.surface.slot_conjugators[(v.pants, v.letter.upper())]
        )
        return mat2_mul(v.gamma, delta)

    # -- flags along the boundary ---------------------------------------------

    def flag(self, point):
        key = "inf" if is_infinite(point) else (point.a, point.b, point.d)
        if key not in self._flags:
            value = point if is_infinite(point) else float(point)
            self._flags[key] = veronese_flag_float(value, self.n)
        return self._flags[key]

    # -- mesh ------------------------------------------------------------------

    def mesh(self, curve_id):
        if curve_id in self._meshes:
            return self._meshes[curve_id]
        word = self.surface.curve_words[curve_id]
        w_mat = self.surface.matrix(word)
        rep, att = fixed_points(w_mat)
        ref1, ref2 = self.decomp.curves[curve_id]
        aligned = ref1 if ref1.aligned else ref2
        anti = ref2 if ref1.aligned else ref1

        def endpoint_lift(ref):
            delta = self.surface.matrix(
                self.surface.slot_conjugators[(ref.pants, ref.slot)]
            )
            return VertexLift(mat2_inv(delta), ref.pants, ref.slot.lower())

        rep_lift = endpoint_lift(aligned)  # sits at rep(w)
        att_lift = endpoint_lift(anti)  # sits at att(w)
        assert points_equal(self.point(rep_lift), rep)
        assert points_equal(self.point(att_lift), att)

        width = (self.n - 1) * translation_length(w_mat)
        m_base = subspace_intersect(
            self.flag(att).subspace(self.n - 1), self.flag(rep).subspace(self.n - 1)
        )

        # x: deterministic family choice at the repelling-side fan
        kind_x = min(VERTEX_FANS[rep_lift.letter])
        x_edge = self.fan_edge(rep_lift, kind_x, 0)
        x_point = self._far_point(x_edge, rep_lift)

        def g_of(z_point):
            val = cross_ratio(
                [
                    self.flag(att).subspace(1).line_vector(),
                    self.flag(x_point).subspace(1).line_vector(),
                    self.flag(z_point).subspace(1).line_vector(),
                    self.flag(rep).subspace(1).line_vector(),
                ],
                m_base,
            )
            if is_infinite(val):
                return math.inf
            return abs(val)

        best = None
        for kind in VERTEX_FANS[att_lift.letter]:
            y = self._minimize_g(att_lift, kind, g_of)
            if y is not None and (best is None or y[1] < best[1]):
                best = y
        if best is None:
            raise TraceError(f"no mesh candidate with g >= 1 on curve {curve_id}")
        y_point, g_val = best
        spec = MeshSpec(
            curve=curve_id,
            word=word,
            x_point=x_point,
            y_point=y_point,
            g_value=g_val,
            width=width,
            n=self.n,
        )
        self._meshes[curve_id] = spec
        return spec

    def _far_point(self, edge, vertex):
        p, q = self.edge_points(edge)
        vp = self.point(vertex)
        return q if points_equal(p, vp) else p

    def _minimize_g(self, v, kind, g_of):
        """Smallest g >= 1 along one fan family; None if out of window."""
        pts = {}

        def far(k):
            if k not in pts:
                pts[k] = self._far_point(self.fan_edge(v, kind, k), v)
            return pts[k]

        g0, g1 = g_of(far(0)), g_of(far(1))
        if g0 == g1:
            raise TraceError("mesh cross ratio is not monotone along the fan")
        step = 1 if g1 > g0 else -1
        # g is monotone in k; hop toward the g = 1 crossing, then refine
        k = 0
        guard = 0
        while g_of(far(k)) >= 1.0 and guard < self.depth_cap:
            k -= step
            guard += 1
        while g_of(far(k)) < 1.0 and guard < 2 * self.depth_cap:
            k += step
            guard += 1
        if guard >= 2 * self.depth_cap:
            return None
        return far(k), g_of(far(k))

    # -- walking the axis -------------------------------------------------------

    def trace(self, word):
        """The cyclic encoding of the conjugacy class of ``word``."""
        x_mat = self.surface.matrix(word)
        if not is_hyperbolic(x_mat):
            raise TraceError(f"word {word!r} is not hyperbolic")
        xm, xp = fixed_points(x_mat)
        try:
            start = self._find_crossing_edge(xm, xp)
        except _ClosedLeafHit as hit:
            return PsiEncoding(tuples=(), closed_leaf_curve=hit.curve)
        if isinstance(start, int):
            return PsiEncoding(tuples=(), closed_leaf_curve=start)
        return self._walk_period(start, x_mat, xm, xp)

    # helper predicates ----------------------------------------------------

    def _edge_separates(self, e, xm, xp):
        p, q = self.edge_points(e)
        return separates(p, q, xm, xp)

    def _vertex_hits_axis(self, v, xm, xp):
        p = self.point(v)
        return points_equal(p, xm) or points_equal(p, xp)

    def _leaf_jump_target(self, v, xm, xp, other_point):
        """If the leaf at v separates both axis endpoints from our side,
        return the partner lift to jump to; else None."""
        rep, att = self.leaf_endpoints(v)
        if points_equal(att, xm) or points_equal(att, xp):
            # the axis IS this leaf
            return "closed"
        if separates(rep, att, xm, xp):
            return None
        if not separates(rep, att, xm, other_point):
            return None
        return self.partner_lift(v)

    def _find_crossing_edge(self, xm, xp):
        """Walk the dual graph toward the axis; return a separating edge.

        Returns the curve id instead when the axis is a closed-leaf lift.
        """
        tri = TriangleLift(MAT2_ID, 0, False)
        for _ in range(4 * self.depth_cap):
            verts = self.triangle_vertices(tri)
            for v in verts:
                if self._vertex_hits_axis(v, xm, xp):
                    return self.curve_of_vertex(v)
            pts = [self.point(v) for v in verts]
            if cyclic_order(pts[0], pts[1], pts[2]) < 0:
                verts = (verts[0], verts[2], verts[1])
                pts = [pts[0], pts[2], pts[1]]
            arc_m = arc_p = None
            for i in range(3):
                if in_arc(xm, pts[i], pts[(i + 1) % 3]):
                    arc_m = i
                if in_arc(xp, pts[i], pts[(i + 1) % 3]):
                    arc_p = i
            if arc_m is None or arc_p is None:
                raise TraceError("axis endpoint coincides with a vertex")
            if arc_m != arc_p:
                for e in self.triangle_edges(tri):
                    if self._edge_separates(e, xm, xp):
                        return e
                raise TraceError("straddling triangle without separating edge")
            # step across the edge subtending the common arc
            u, w = verts[arc_m], verts[(arc_m + 1) % 3]
            exit_edge = self._edge_between(tri, u, w)
            third = pts[(arc_m + 2) % 3]
            jumped = False
            for v in (u, w):
                target = self._leaf_jump_target(v, xm, xp, third)
                if target == "closed":
                    return self.curve_of_vertex(v)
                if target is not None:
                    res = self._fan_locate(target, xm, xp)
                    if isinstance(res, EdgeLift):
                        return res
                    tri = res
                    jumped = True
                    break
            if jumped:
                continue
            tri = self._other_triangle(exit_edge, tri)
        raise TraceError("axis search exceeded the configured depth")

    def _edge_between(self, tri, v1, v2):
        p1, p2 = self.point(v1), self.point(v2)
        for e in self.triangle_edges(tri):
            q1, q2 = self.edge_points(e)
            if (points_equal(p1, q1) and points_equal(p2, q2)) or (
                points_equal(p1, q2) and points_equal(p2, q1)
            ):
                return e
        raise TraceError("triangle edge lookup failed")  # pragma: no cover

    def _other_triangle(self, edge, tri):
        t1, t2 = self.adjacent_triangles(edge)
        if t1.gamma == tri.gamma and t1.prime == tri.prime and t1.pants == tri.pants:
            return t2
        return t1

    def _far_vertex(self, edge, vertex):
        v1, v2 = self.edge_vertices(edge)
        vp = self.point(vertex)
        return v2 if points_equal(self.point(v1), vp) else v1

    def _guard_vertex(self, v, xm, xp):
        if self._vertex_hits_axis(v, xm, xp):
            raise _ClosedLeafHit(self.curve_of_vertex(v))

    def _fan_locate(self, v, xm, xp):
        """A separating fan edge at v, or the sector triangle holding the axis."""
        kind1, kind2 = VERTEX_FANS[v.letter]
        vp = self.point(v)
        for radius in (8, self.depth_cap):
            for k in self._search_ks(radius):
                for kind in (kind1, kind2):
                    e = self.fan_edge(v, kind, k)
                    self._guard_vertex(self._far_vertex(e, v), xm, xp)
                    if self._edge_separates(e, xm, xp):
                        return e
            # no separating fan edge: the axis may sit inside one sector
            for k in self._search_ks(radius):
                for kind in (kind1, kind2):
                    e = self.fan_edge(v, kind, k)
                    tri1, tri2 = self.adjacent_triangles(e)
                    for tri in (tri1, tri2):
                        verts = self.triangle_vertices(tri)
                        for tv in verts:
                            self._guard_vertex(tv, xm, xp)
                        pts = [self.point(t) for t in verts]
                        if not any(points_equal(p, vp) for p in pts):
                            continue
                        if self._triangle_holds(pts, xm) and self._triangle_holds(
                            pts, xp
                        ):
                            return tri
        raise TraceError("fan search exceeded the configured depth")

    def _triangle_holds(self, pts, x):
        """x lies in the closed region cut off by one side arc of the triangle
        opposite the fan vertex -- used only to reseed the dual walk."""
        if cyclic_order(pts[0], pts[1], pts[2]) < 0:
            pts = [pts[0], pts[2], pts[1]]
        for i in range(3):
            if in_arc(x, pts[i], pts[(i + 1) % 3]):
                return True
        return False

    def _search_ks(self, radius=None):
        yield 0
        for k in range(1, radius if radius is not None else self.depth_cap):
            yield k
            yield -k

    # -- the period walk ----------------------------------------------------

    def _step(self, edge, xm, xp):
        """Next crossed edge and the pivot vertex shared with it."""
        tri = self._far_triangle(edge, xp)
        everts = self.edge_vertices(edge)
        epts = [self.point(v) for v in everts]
        for e in self.triangle_edges(tri):
            if self.same_edge(e, edge):
                continue
            if self._edge_separates(e, xm, xp):
                q1, q2 = self.edge_points(e)
                for v, p in zip(everts, epts):
                    if points_equal(p, q1) or points_equal(p, q2):
                        return e, v
        raise TraceError("walk lost the axis")  # pragma: no cover

    def _far_triangle(self, edge, xp):
        p, q = self.edge_points(edge)
        for tri in self.adjacent_triangles(edge):
            for v in self.triangle_vertices(tri):
                vp = self.point(v)
                if points_equal(vp, p) or points_equal(vp, q):
                    continue
                if in_arc(vp, p, q) == in_arc(xp, p, q):
                    return tri
        raise TraceError("no far triangle")  # pragma: no cover

    def _pivot_of(self, e1, e2):
        """The vertex lift of e1 shared with e2."""
        p2 = self.edge_points(e2)
        for v in self.edge_vertices(e1):
            if any(points_equal(self.point(v), q) for q in p2):
                return v
        return None

    def _walk_period(self, start, x_mat, xm, xp):
        import dataclasses

        edge = start
        prev_edge = None
        prev_pivot = None
        events = []
        lifts = []
        stop_points = None
        pending = None  # joining vertex lift of the open binodal stretch
        guard = 0
        while True:
            guard += 1
            if guard > 64 * self.depth_cap:
                raise TraceError("period walk exceeded the configured depth")
            nxt, pivot = self._step(edge, xm, xp)
            switched = prev_pivot is not None and not points_equal(
                self.point(pivot), self.point(prev_pivot)
            )
            if switched:
                if stop_points is None:
                    # first binodal edge anchors the period
                    p, q = self.edge_points(edge)
                    stop_points = (mobius(x_mat, p), mobius(x_mat, q))
                else:
                    p, q = self.edge_points(edge)
                    at_stop = (
                        points_equal(p, stop_points[0])
                        and points_equal(q, stop_points[1])
                    ) or (
                        points_equal(p, stop_points[1])
                        and points_equal(q, stop_points[0])
                    )
                    if at_stop:
                        # the closing stretch's winding belongs to the last tuple
                        events[-1] = dataclasses.replace(
                            events[-1], t=self._winding(pending, xm, xp)
                        )
                        return PsiEncoding(tuples=tuple(events), lifts=tuple(lifts))
                    events[-1] = dataclasses.replace(
                        events[-1], t=self._winding(pending, xm, xp)
                    )
                ztype = "Z" if in_arc(self.point(pivot), xp, xm) else "S"
                events.append(
                    PsiTuple(
                        pred=prev_edge.edge_class,
                        edge=edge.edge_class,
                        succ=nxt.edge_class,
                        type=ztype,
                        t=0,
                    )
                )
                lifts.append((prev_edge, edge, nxt, pivot))
                pending = pivot
            # spiral ahead?  jump the closed leaf at the current pivot, but
            # only when the crossing still lies ahead of the current edge
            rep, att = self.leaf_endpoints(pivot)
            if separates(rep, att, xm, xp):
                other = self._far_point(edge, pivot)
                if separates(rep, att, other, xp):
                    prev_edge, edge, prev_pivot = self._leaf_jump(pivot, xm, xp)
                    continue
            prev_edge, edge, prev_pivot = edge, nxt, pivot

    def _leaf_jump(self, pivot, xm, xp):
        """Cross the closed leaf at the pivot and land on the far fan.

        Returns (pred edge, exit binodal edge, their shared pivot lift) so
        the main walk resumes just before the exit binodal fires.
        """
        vp = self.partner_lift(pivot)
        vpp = self.point(vp)
        candidates = []
        for kind in VERTEX_FANS[vp.letter]:
            found = self._crossing_window_end(vp, kind, xm, xp)
            if found is not None:
                candidates.append(found)
        if not candidates:
            raise TraceError("leaf jump found no crossing fan edge")
        # the exit binodal is extreme across *both* interleaved families:
        # stepping from it must switch the pivot away from vp
        for k_exit, kind, leaf_dir in candidates:
            exit_edge = self.fan_edge(vp, kind, k_exit)
            _, piv = self._step(exit_edge, xm, xp)
            if not points_equal(self.point(piv), vpp):
                pred_edge = self._fan_neighbor_toward_leaf(
                    vp, kind, k_exit, leaf_dir, xm, xp
                )
                return pred_edge, exit_edge, vp
        raise TraceError("leaf jump could not identify the exit edge")

    def _crossing_window_end(self, vp, kind, xm, xp):
        """Extreme k of the one-sided crossing window of the fan family."""

        def crossing(k):
            return self._edge_separates(self.fan_edge(vp, kind, k), xm, xp)

        k0 = None
        for k in self._search_ks():
            if crossing(k):
                k0 = k
                break
        if k0 is None:
            return None
        # the window is infinite toward the leaf; find the finite end
        if crossing(k0 + 1) and crossing(k0 + 2):
            leaf_dir = 1
        elif crossing(k0 - 1) and crossing(k0 - 2):
            leaf_dir = -1
        else:
            # narrow window: probe further out
            up = sum(crossing(k0 + d) for d in (1, 2, 3, 4))
            leaf_dir = 1 if up >= 2 else -1
        k = k0
        guard = 0
        while crossing(k - leaf_dir):
            k -= leaf_dir
            guard += 1
            if guard > self.depth_cap:
                raise TraceError("crossing window end not found")
        return k, kind, leaf_dir

    def _fan_neighbor_toward_leaf(self, vp, kind, k_exit, leaf_dir, xm, xp):
        """The kept edge between the exit binodal edge and the closed leaf.

        The two fan families at vp alternate around the vertex, so exactly
        one member of the other family sits in the sweep sector between
        the exit edge and its same-family leafward neighbor.
        """
        kinds = VERTEX_FANS[vp.letter]
        other = kinds[0] if kind == kinds[1] else kinds[1]
        exit_far = self._far_point(self.fan_edge(vp, kind, k_exit), vp)
        leafward = self._far_point(self.fan_edge(vp, kind, k_exit + leaf_dir), vp)
        vpp = self.point(vp)
        if in_arc(vpp, exit_far, leafward):
            lo, hi = leafward, exit_far
        else:
            lo, hi = exit_far, leafward
        for k in (k_exit - 1, k_exit, k_exit + 1, k_exit - 2, k_exit + 2):
            e = self.fan_edge(vp, other, k)
            far = self._far_point(e, vp)
            if points_equal(far, exit_far) or points_equal(far, leafward):
                continue
            if in_arc(far, lo, hi):
                return e
        raise TraceError("fan neighbor toward the leaf not found")

    def _winding(self, pending, xm, xp):
        """Signed mesh-crossing count for the stretch joined by ``pending``."""
        v = pending
        cid = self.curve_of_vertex(v)
        spec = self.mesh(cid)
        eta = self.mesh_anchor(v)
        w_mat = self.surface.matrix(spec.word)
        w_inv = mat2_inv(w_mat)

        cache = {0: eta}

        def anchor(k):
            if k not in cache:
                if k > 0:
                    cache[k] = mat2_mul(anchor(k - 1), w_mat)
                else:
                    cache[k] = mat2_mul(anchor(k + 1), w_inv)
            return cache[k]

        def mesh_edge(k):
            g = anchor(k)
            return mobius(g, spec.x_point), mobius(g, spec.y_point)

        def side(k):
            """0 when edge k separates the axis endpoints, else +-1 by arc."""
            u, w = mesh_edge(k)
            su, sw = in_arc(u, xm, xp), in_arc(w, xm, xp)
            if su != sw:
                return 0
            return 1 if su else -1

        cap = self.depth_cap
        s_lo, s_hi = side(-cap), side(cap)
        if s_lo == 0 or s_hi == 0:
            raise TraceError("winding count exceeded the configured depth")
        if s_lo != s_hi:
            # the axis crosses the collar: ``side`` is monotone in k and the
            # crossing window is found by binary search on its boundaries
            def first_not(value, lo, hi):
                while hi - lo > 1:
                    mid = (lo + hi) // 2
                    if side(mid) == value:
                        lo = mid
                    else:
                        hi = mid
                return hi

            k1 = first_not(s_lo, -cap, cap)
            if side(k1) == s_hi:
                return 0
            k2 = first_not(0, k1, cap) - 1
            count = k2 - k1 + 1
        else:
            # the axis dips into the collar and leaves on the same side; the
            # window (if any) sits where the anchor orbit passes the axis
            # endpoints, located by the float translation coordinate and
            # verified exactly
            ell = translation_length(w_mat)
            u0 = mesh_edge(0)[0]
            rep_a, att_a = fixed_points(mat2_mul(mat2_mul(eta, w_mat), mat2_inv(eta)))
            guesses = []
            for z in (xm, xp):
                coord = _float_log_ratio(att_a, u0, z, rep_a)
                if coord is not None:
                    guesses.append(coord / ell)
            if not guesses:
                return 0
            lo = max(-cap, math.floor(min(guesses)) - 3)
            hi = min(cap, math.ceil(max(guesses)) + 3)
            while lo > -cap and side(lo) != s_lo:
                lo = max(-cap, lo - 4)
            while hi < cap and side(hi) != s_lo:
                hi = min(cap, hi + 4)
            ks = [k for k in range(lo, hi + 1) if side(k) == 0]
            if not ks:
                return 0
            if ks[0] == -cap or ks[-1] == cap:
                raise TraceError("winding count exceeded the configured depth")
            k1, count = ks[0], len(ks)
        # orientation: does increasing k move toward the attracting endpoint?
        u0, w0 = mesh_edge(k1)
        u1, w1 = mesh_edge(k1 + 1)
        forward = in_arc(u1, u0, w0) == in_arc(xp, u0, w0)
        return count if forward else -count


def _float_log_ratio(a, u0, z, r):
    """log of the classical 4-point cross ratio |(a, u0, z, r)| in floats.

    Used only to locate a search window; all decisions are re-verified with
    exact arithmetic.  Returns None when the configuration degenerates in
    float precision.
    """

    def f(p):
        return None if is_infinite(p) else float(p)

    fa, fu, fz, fr = f(a), f(u0), f(z), f(r)

    def diff(p, q):
        # (p - q) with infinity contributing a cancelling factor
        if p is None or q is None:
            return 1.0
        return p - q

    num = diff(fa, fz) * diff(fr, fu)
    den = diff(fa, fu) * diff(fr, fz)
    if den == 0 or num == 0:
        return None
    val = abs(num / den)
    if val <= 0 or math.isinf(val) or math.isnan(val):
        return None
    return math.log(val)


def trace_psi(surface, word, n=2, depth_cap=64):
    """One-shot trace of a word on a surface."""
    return PsiTracer(surface, n=n, depth_cap=depth_cap).trace(word)


def compute_mesh(surface, curve_id, n=2, depth_cap=64):
    """Mesh anchor of a pants curve for the dimension-n Fuchsian data."""
    return PsiTracer(surface, n=n, depth_cap=depth_cap).mesh(curve_id)
