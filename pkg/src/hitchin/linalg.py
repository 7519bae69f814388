r"""Exact-rational and float64 multilinear algebra on R^n for small n.

Everything downstream (cross ratios, triple ratios, flag reconstruction,
the degeneration functionals) reduces to wedge determinants, sums and
intersections of subspaces, and rank decisions.  All of it is implemented
twice over a shared code path: an exact backend over ``fractions.Fraction``
where identities hold on the nose, and a float64 backend with a relative
pivot threshold for rank decisions.  A computation never mixes backends.

Subspaces are stored with a canonical reduced-row-echelon basis, so two
subspaces are equal iff their representations are equal.  Matrices that
represent group elements are treated projectively: operations that care
about eigenvalue data normalize to determinant +-1 first.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np


class BackendError(ValueError):
    """Mixing backends, or input not convertible to the requested backend."""


class DegenerateError(ValueError):
    """A genericity/transversality precondition failed."""


class Backend:
    """Scalar arithmetic tag: exact rationals or float64."""

    def __init__(self, name):
        self.name = name
        self.exact = name == "exact"

    def __repr__(self):
        return f"Backend({self.name!r})"

    def convert(self, x):
        if self.exact:
            if isinstance(x, Fraction):
                return x
            if isinstance(x, int):
                return Fraction(x)
            if isinstance(x, str):
                return Fraction(x)
            if isinstance(x, float):
                if not x.is_integer():
                    raise BackendError(
                        f"refusing to coerce non-integral float {x!r} to exact"
                    )
                return Fraction(int(x))
            raise BackendError(f"cannot convert {x!r} to exact scalar")
        return float(x)

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def one(self):
        return Fraction(1) if self.exact else 1.0

    def is_zero(self, x, scale=None):
        if self.exact:
            return x == 0
        tol = PIVOT_RTOL * max(1.0, scale if scale else 1.0)
        return abs(x) <= tol


EXACT = Backend("exact")
FLOAT64 = Backend("float64")

#: relative pivot threshold for float-mode rank decisions
PIVOT_RTOL = 1e-10


def as_backend(name):
    if isinstance(name, Backend):
        return name
    if name == "exact":
        return EXACT
    if name in ("float64", "float"):
        return FLOAT64
    raise BackendError(f"unknown backend {name!r}")


def infer_backend(entries):
    """Guess the backend from raw scalar entries (float wins over int)."""
    for x in entries:
        if isinstance(x, float):
            return FLOAT64
        if isinstance(x, (Fraction, int)):
            continue
        raise BackendError(f"unsupported scalar {x!r}")
    return EXACT


def convert_vector(v, backend):
    return tuple(backend.convert(x) for x in v)


def convert_matrix(rows, backend):
    return tuple(convert_vector(r, backend) for r in rows)


# ---------------------------------------------------------------------------
# determinants


def _det_bareiss_int(rows):
    """Fraction-free determinant for integer matrices (exact, fast)."""
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def det(rows, backend=None):
    """Determinant of a square matrix, backend-aware."""
    n = len(rows)
    if any(len(r) != n for r in rows):
        raise BackendError("determinant of a non-square matrix")
    if n == 0:
        return 1
    if backend is None:
        backend = infer_backend([x for r in rows for x in r])
    if not backend.exact:
        if n == 1:
            return float(rows[0][0])
        return float(np.linalg.det(np.array(rows, dtype=float)))
    ints = all(
        isinstance(x, int) or (isinstance(x, Fraction) and x.denominator == 1)
        for r in rows
        for x in r
    )
    if ints:
        return Fraction(_det_bareiss_int([[int(x) for x in r] for r in rows]))
    # plain fraction Gaussian elimination
    a = [[Fraction(x) for x in r] for r in rows]
    sign = 1
    out = Fraction(1)
    for k in range(n):
        piv = None
        for i in range(k, n):
            if a[i][k] != 0:
                piv = i
                break
        if piv is None:
            return Fraction(0)
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            sign = -sign
        out *= a[k][k]
        inv = 1 / a[k][k]
        for i in range(k + 1, n):
            if a[i][k] == 0:
                continue
            f = a[i][k] * inv
            for j in range(k, n):
                a[i][j] -= f * a[k][j]
    return sign * out


def wedge_det(vectors, backend=None):
    """Evaluate v_1 ^ ... ^ v_n under the determinant identification.

    The input must be exactly n vectors of dimension n; the result is the
    determinant of the matrix whose columns are the inputs (equivalently
    rows -- the value is the same).
    """
    n = len(vectors)
    for v in vectors:
        if len(v) != n:
            raise BackendError(
                f"wedge of {n} vectors needs dimension {n}, got {len(v)}"
            )
    return det([tuple(v) for v in vectors], backend=backend)


# ---------------------------------------------------------------------------
# row reduction


def rref(rows, backend, ncols=None):
    """Reduced row echelon form.

    Returns (rows, pivot_columns); zero rows are dropped.  Float mode uses
    partial pivoting with a relative threshold, exact mode true rank.
    """
    a = [list(r) for r in rows]
    if not a:
        return (), ()
    m, n = len(a), ncols if ncols is not None else len(a[0])
    scale = None
    if not backend.exact:
        scale = max((abs(x) for r in a for x in r), default=0.0)
    piv_cols = []
    r = 0
    for c in range(n):
        if r == m:
            break
        if backend.exact:
            piv = next((i for i in range(r, m) if a[i][c] != 0), None)
        else:
            piv = max(range(r, m), key=lambda i: abs(a[i][c]))
            if backend.is_zero(a[piv][c], scale):
                piv = None
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = (
            Fraction(1) / a[r][c] if backend.exact else 1.0 / a[r][c]
        )
        a[r] = [x * inv for x in a[r]]
        a[r][c] = backend.one()
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
                a[i][c] = backend.zero()
        piv_cols.append(c)
        r += 1
    out = tuple(tuple(a[i]) for i in range(r))
    return out, tuple(piv_cols)


def matrix_rank(rows, backend):
    return len(rref(rows, backend)[0])


def nullspace(rows, backend, ncols):
    """Basis of the right kernel of the given row matrix."""
    red, piv = rref(rows, backend, ncols=ncols)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [backend.zero()] * ncols
        v[f] = backend.one()
        for i, c in enumerate(piv):
            v[c] = -red[i][f]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# subspaces and flags


class Subspace:
    """Linear subspace of R^n with a canonical reduced-echelon basis."""

    __slots__ = ("ambient", "backend", "basis")

    def __init__(self, ambient, basis, backend):
        self.ambient = ambient
        self.backend = backend
        self.basis = basis  # tuple of RREF rows, canonical

    @classmethod
    def span(cls, vectors, ambient=None, backend=None):
        vectors = [tuple(v) for v in vectors]
        if ambient is None:
            if not vectors:
                raise BackendError("empty span needs an explicit ambient dim")
            ambient = len(vectors[0])
        if backend is None:
            backend = infer_backend([x for v in vectors for x in v])
        vectors = [convert_vector(v, backend) for v in vectors]
        for v in vectors:
            if len(v) != ambient:
                raise BackendError("span of vectors of mixed dimension")
        red, _ = rref(vectors, backend, ncols=ambient)
        return cls(ambient, red, backend)

    @classmethod
    def zero(cls, ambient, backend):
        return cls(ambient, (), backend)

    @classmethod
    def full(cls, ambient, backend):
        rows = []
        for i in range(ambient):
            row = [backend.zero()] * ambient
            row[i] = backend.one()
            rows.append(tuple(row))
        return cls(ambient, tuple(rows), backend)

    @property
    def dim(self):
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if self.ambient != other.ambient or self.dim != other.dim:
            return False
        if self.backend.exact and other.backend.exact:
            return self.basis == other.basis
        a = np.array(self.basis, dtype=float).reshape(self.dim, self.ambient)
        b = np.array(other.basis, dtype=float).reshape(self.dim, self.ambient)
        return bool(np.allclose(a, b, atol=1e-9))

    def __hash__(self):
        if not self.backend.exact:
            raise TypeError("float subspaces are not hashable")
        return hash((self.ambient, self.basis))

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient={self.ambient})"

    def contains(self, vector):
        v = convert_vector(vector, self.backend)
        red, _ = rref(list(self.basis) + [v], self.backend, ncols=self.ambient)
        return len(red) == self.dim

    def contains_subspace(self, other):
        return all(self.contains(v) for v in other.basis)

    def __or__(self, other):
        """Span of the union (subspace sum)."""
        self._check(other)
        return Subspace.span(
            list(self.basis) + list(other.basis),
            ambient=self.ambient,
            backend=self.backend,
        )

    def __and__(self, other):
        """Exact intersection via a kernel computation."""
        self._check(other)
        if self.dim == 0 or other.dim == 0:
            return Subspace.zero(self.ambient, self.backend)
        # solve sum a_i u_i = sum b_j v_j; kernel of [U^t | -V^t]
        rows = []
        for k in range(self.ambient):
            row = [u[k] for u in self.basis] + [-v[k] for v in other.basis]
            rows.append(tuple(row))
        ker = nullspace(rows, self.backend, self.dim + other.dim)
        vecs = []
        for coeffs in ker:
            vec = [self.backend.zero()] * self.ambient
            for a, u in zip(coeffs[: self.dim], self.basis):
                vec = [x + a * y for x, y in zip(vec, u)]
            vecs.append(tuple(vec))
        return Subspace.span(vecs or [], ambient=self.ambient, backend=self.backend)

    def line_vector(self):
        if self.dim != 1:
            raise DegenerateError(f"expected a line, got dim {self.dim}")
        return self.basis[0]

    def _check(self, other):
        if self.ambient != other.ambient:
            raise BackendError("subspaces in different ambient dimensions")
        if self.backend is not other.backend:
            raise BackendError("subspaces on different backends")


def subspace_sum(a, b):
    return a | b


def subspace_intersect(a, b):
    return a & b


class Flag:
    """Complete flag F^(1) c F^(2) c ... c F^(n-1) in R^n.

    Stored as the chain of proper subspaces.  ``subspace(0)`` is the zero
    space and ``subspace(n)`` all of R^n, so indexing by 0..n always works.
    """

    __slots__ = ("ambient", "backend", "_chain", "_basis")

    def __init__(self, chain, backend=None):
        chain = tuple(chain)
        if not chain:
            raise DegenerateError("empty flag")
        ambient = chain[0].ambient
        backend = backend or chain[0].backend
        if len(chain) != ambient - 1:
            raise DegenerateError(
                f"flag in R^{ambient} needs {ambient - 1} subspaces, got {len(chain)}"
            )
        for k, sub in enumerate(chain, start=1):
            if sub.dim != k:
                raise DegenerateError(f"flag level {k} has dimension {sub.dim}")
            if k > 1 and not sub.contains_subspace(chain[k - 2]):
                raise DegenerateError(f"flag levels {k - 1} c {k} not nested")
        self.ambient = ambient
        self.backend = backend
        self._chain = chain
        self._basis = None

    @classmethod
    def from_basis(cls, vectors, backend=None):
        """Flag whose level k is the span of the first k input vectors."""
        vectors = [tuple(v) for v in vectors]
        n = len(vectors)
        if backend is None:
            backend = infer_backend([x for v in vectors for x in v])
        chain = [
            Subspace.span(vectors[:k], ambient=n, backend=backend)
            for k in range(1, n)
        ]
        flag = cls(chain, backend=backend)
        if Subspace.span(vectors, ambient=n, backend=backend).dim != n:
            raise DegenerateError("flag basis is not linearly independent")
        flag._basis = tuple(convert_vector(v, backend) for v in vectors)
        return flag

    @classmethod
    def standard(cls, n, backend=EXACT):
        eye = [[backend.one() if i == j else backend.zero() for j in range(n)] for i in range(n)]
        return cls.from_basis(eye, backend=backend)

    @classmethod
    def reversed_standard(cls, n, backend=EXACT):
        eye = [[backend.one() if i == j else backend.zero() for j in range(n)] for i in range(n)]
        return cls.from_basis(eye[::-1], backend=backend)

    def subspace(self, k):
        if k == 0:
            return Subspace.zero(self.ambient, self.backend)
        if k == self.ambient:
            return Subspace.full(self.ambient, self.backend)
        if not 0 < k < self.ambient:
            raise DegenerateError(f"flag level {k} out of range in R^{self.ambient}")
        return self._chain[k - 1]

    def line(self):
        return self._chain[0]

    def compatible_basis(self):
        """A basis v_1..v_n with F^(k) = span(v_1..v_k) for every k."""
        if self._basis is not None:
            return self._basis
        vecs = []
        span = Subspace.zero(self.ambient, self.backend)
        for k in range(1, self.ambient + 1):
            target = self.subspace(k)
            new = next(v for v in target.basis if not span.contains(v))
            vecs.append(new)
            span = span | Subspace.span([new], ambient=self.ambient, backend=self.backend)
        self._basis = tuple(vecs)
        return self._basis

    def apply(self, matrix):
        """Image flag under an invertible matrix (rows act on the left)."""
        m = convert_matrix(matrix, self.backend)
        vecs = [mat_vec(m, v) for v in self.compatible_basis()]
        return Flag.from_basis(vecs, backend=self.backend)

    def __eq__(self, other):
        if not isinstance(other, Flag):
            return NotImplemented
        return self.ambient == other.ambient and all(
            self.subspace(k) == other.subspace(k) for k in range(1, self.ambient)
        )

    def __hash__(self):
        return hash(self._chain)

    def __repr__(self):
        return f"Flag(ambient={self.ambient}, backend={self.backend.name})"


def mat_vec(m, v):
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in m)


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m))
        for i in range(n)
    )


def mat_inv(rows, backend):
    n = len(rows)
    aug = [list(convert_vector(r, backend)) + [backend.one() if i == j else backend.zero() for j in range(n)] for i, r in enumerate(rows)]
    red, piv = rref(aug, backend, ncols=2 * n)
    if list(piv[:n]) != list(range(n)):
        raise DegenerateError("matrix is singular")
    return tuple(tuple(row[n:]) for row in red)


def is_generic_triple(f, g, h):
    """Check sum-transversality F^(a)+G^(b)+H^(c) = R^n for all a+b+c = n."""
    n = f.ambient
    if g.ambient != n or h.ambient != n:
        raise BackendError("flags in different ambient dimensions")
    backend = f.backend
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = n - a - b
            rows = (
                list(f.subspace(a).basis)
                + list(g.subspace(b).basis)
                + list(h.subspace(c).basis)
            )
            if matrix_rank(rows, backend) != n:
                return False
    return True


# ---------------------------------------------------------------------------
# Cartan / Jordan projections


@dataclass(frozen=True)
class WeylChamberPoint:
    """Traceless diagonal data lambda_1 >= ... >= lambda_n, sum zero."""

    entries: tuple

    def __post_init__(self):
        ent = tuple(float(x) for x in self.entries)
        object.__setattr__(self, "entries", ent)
        if any(ent[i] < ent[i + 1] - 1e-12 for i in range(len(ent) - 1)):
            raise DegenerateError(f"entries not sorted decreasing: {ent}")

    @property
    def n(self):
        return len(self.entries)

    def gaps(self):
        e = self.entries
        return tuple(e[k] - e[k + 1] for k in range(len(e) - 1))

    def is_strict(self, tol=0.0):
        return all(g > tol for g in self.gaps())

    def width(self):
        """lambda_1 - lambda_n."""
        return self.entries[0] - self.entries[-1]

    @classmethod
    def from_gaps(cls, gaps):
        gaps = [float(g) for g in gaps]
        n = len(gaps) + 1
        lam = [0.0] * n
        for k in range(n - 2, -1, -1):
            lam[k] = lam[k + 1] + gaps[k]
        mean = sum(lam) / n
        return cls(tuple(x - mean for x in lam))


class EigenvalueError(RuntimeError):
    """Eigenvalue / singular value computation did not converge."""


def _normalize_logs(logs):
    logs = sorted((float(x) for x in logs), reverse=True)
    mean = sum(logs) / len(logs)
    return WeylChamberPoint(tuple(x - mean for x in logs))


def jordan_projection(matrix):
    """Sorted log-moduli of eigenvalues, normalized to sum zero.

    The normalization makes the value projective (insensitive to scaling
    the matrix), matching the determinant +-1 convention.
    """
    a = np.array(matrix, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise BackendError("jordan projection of a non-square matrix")
    if abs(np.linalg.det(a)) < 1e-300:
        raise DegenerateError("matrix is singular")
    try:
        eig = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy internal
        raise EigenvalueError(str(exc)) from exc
    mods = np.abs(eig)
    if np.any(mods <= 0):
        raise DegenerateError("zero eigenvalue on an invertible matrix")
    return _normalize_logs(np.log(mods))


def cartan_projection(matrix):
    """Sorted log singular values, normalized to sum zero."""
    a = np.array(matrix, dtype=float)
    if a.shape[0] != a.shape[1]:
        raise BackendError("cartan projection of a non-square matrix")
    try:
        sv = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - numpy internal
        raise EigenvalueError(str(exc)) from exc
    if sv[-1] <= 0:
        raise DegenerateError("matrix is singular")
    return _normalize_logs(np.log(sv))
