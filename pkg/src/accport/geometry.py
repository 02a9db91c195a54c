"""H-representation polytope algebra over the dense LP kernel.

Everything here is a pure function of immutable inputs: polytopes are
{x | A x <= b} with unit-norm facet rows, boxes are axis-aligned
intervals.  These are the set primitives the invariant-set iteration and
the containment checker are built from.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lp import (
    FEAS_TOL,
    LpDegeneracyError,
    LpSolution,
    min_violation,
    solve_lp_arrays,
)

RED_TOL = 1e-7  # redundancy / containment tolerance


class EmptySetError(ValueError):
    """Operation requires a nonempty set."""


class UnboundedSetError(ValueError):
    """Operation requires boundedness in the queried direction."""


class DimensionError(ValueError):
    """Operation not available in this dimension."""


class HPolytope:
    """Convex polyhedron {x | A x <= b} with unit-norm rows.

    Rows are normalized on construction; zero-norm rows are rejected
    (use :meth:`from_rows` to clean raw inequality systems that may
    contain vacuous or infeasible zero rows).  Degenerate, empty and
    unbounded sets are all legal values.
    """

    __slots__ = ("A", "b")

    def __init__(self, A, b, normalize=True):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if A.shape[0] != b.size:
            raise ValueError("row count of A must equal length of b")
        if normalize and A.shape[0] > 0:
            norms = np.linalg.norm(A, axis=1)
            if np.any(norms < 1e-12):
                raise ValueError("zero-norm facet row")
            A = A / norms[:, None]
            b = b / norms
        self.A = A
        self.b = b

    @classmethod
    def from_rows(cls, A, b, dim=None):
        """Build from raw rows, dropping vacuous zero rows.

        A zero row with a negative offset makes the system infeasible
        and yields the canonical empty polytope.
        """
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.asarray(b, dtype=float).ravel()
        if dim is None:
            dim = A.shape[1]
        if A.size == 0 and b.size == 0:
            return cls(np.zeros((0, dim)), np.zeros(0))
        norms = np.linalg.norm(A, axis=1) if A.shape[1] else np.zeros(A.shape[0])
        zero = norms < 1e-12
        if np.any(b[zero] < -1e-9):
            return cls.empty(dim)
        return cls(A[~zero], b[~zero])

    @classmethod
    def from_bounds(cls, lo, hi):
        return Box(lo, hi).to_polytope()

    @classmethod
    def empty(cls, dim):
        """Canonical empty polytope: x_1 <= -1/2 and x_1 >= 1/2."""
        if dim == 0:
            # zero-dimensional: a single unsatisfiable zero row
            return cls(np.zeros((1, 0)), np.array([-1.0]), normalize=False)
        A = np.zeros((2, dim))
        A[0, 0] = 1.0
        A[1, 0] = -1.0
        return cls(A, np.array([-0.5, -0.5]))

    @property
    def dim(self):
        return self.A.shape[1]

    @property
    def nrows(self):
        return self.A.shape[0]

    def contains_points(self, X, tol=FEAS_TOL):
        """Boolean membership for points stacked row-wise."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return (self.A @ X.T <= self.b[:, None] + tol).all(axis=0)

    def __repr__(self):
        return "HPolytope(dim=%d, rows=%d)" % (self.dim, self.nrows)


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box [lo, hi]; degenerate intervals are allowed."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float).ravel())
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float).ravel())
        if self.lo.size != self.hi.size:
            raise ValueError("lo and hi must have equal length")
        if np.any(self.lo > self.hi + 1e-12):
            raise ValueError("box requires lo <= hi componentwise")

    @property
    def dim(self):
        return self.lo.size

    def support(self, d):
        """max of d.x over the box, componentwise analytic."""
        d = np.asarray(d, dtype=float).ravel()
        return float(np.maximum(d * self.lo, d * self.hi).sum())

    def support_rows(self, D):
        """Vectorized support for every row of the matrix D."""
        D = np.atleast_2d(np.asarray(D, dtype=float))
        return np.maximum(D * self.lo, D * self.hi).sum(axis=1)

    def to_polytope(self):
        n = self.dim
        eye = np.eye(n)
        return HPolytope(np.vstack([eye, -eye]), np.concatenate([self.hi, -self.lo]))

    def vertices(self):
        cols = [np.array([lo, hi]) for lo, hi in zip(self.lo, self.hi)]
        mesh = np.meshgrid(*cols, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def contains_points(self, X, tol=FEAS_TOL):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return ((X >= self.lo - tol) & (X <= self.hi + tol)).all(axis=1)

    def sample(self, n, rng):
        return self.lo + rng.random((n, self.dim)) * (self.hi - self.lo)


# ---------------------------------------------------------------------------
# LP-backed set queries


def solve_lp(objective, P, sense="max"):
    """Optimize a linear objective over a polytope."""
    return solve_lp_arrays(objective, P.A, P.b, sense=sense)


def is_empty(P, tol=FEAS_TOL):
    """True iff no point satisfies all constraints within tolerance."""
    s, _ = min_violation(P.A, P.b)
    return s > tol


def feasible_point(P, tol=FEAS_TOL):
    """Some point of P (the minimum-violation point), or None if empty."""
    s, x = min_violation(P.A, P.b)
    return None if s > tol else x


def chebyshev_center(P):
    """Center and radius of the largest inscribed ball (one LP)."""
    m, n = P.A.shape
    A_ext = np.hstack([P.A, np.ones((m, 1))])
    A_ext = np.vstack([A_ext, np.zeros(n + 1)])
    A_ext[-1, -1] = -1.0
    b_ext = np.concatenate([P.b, [0.0]])
    c_ext = np.zeros(n + 1)
    c_ext[-1] = 1.0
    sol = solve_lp_arrays(c_ext, A_ext, b_ext)
    if sol.status == "infeasible":
        raise EmptySetError("chebyshev center of an empty polytope")
    if sol.status == "unbounded":
        raise UnboundedSetError("inscribed ball radius is unbounded")
    return sol.x[:-1], float(sol.x[-1])


def support(P, d):
    """Support function max d.x; analytic for boxes, one LP otherwise."""
    if isinstance(P, Box):
        return P.support(d)
    sol = solve_lp(d, P)
    if sol.status == "unbounded":
        raise UnboundedSetError("set is unbounded in the queried direction")
    if sol.status == "infeasible":
        raise EmptySetError("support of an empty set")
    return sol.value


def bounding_box(P):
    """Tight axis-aligned bounding box (2 * dim LPs)."""
    n = P.dim
    lo = np.empty(n)
    hi = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        hi[i] = support(P, e)
        lo[i] = -support(P, -e)
    return Box(lo, hi)


def contains(P, Q, tol=RED_TOL):
    """True iff Q is a subset of P, via one support LP per facet of P."""
    for i in range(P.nrows):
        try:
            sol = solve_lp_arrays(P.A[i], Q.A, Q.b)
        except LpDegeneracyError:
            return False  # cannot certify containment
        if sol.status == "infeasible":
            return True  # Q empty
        if sol.status == "unbounded" or sol.value > P.b[i] + tol:
            return False
    return True


# ---------------------------------------------------------------------------
# Set algebra


def intersect(P, Q):
    if P.dim != Q.dim:
        raise ValueError("dimension mismatch in intersection")
    return HPolytope(
        np.vstack([P.A, Q.A]), np.concatenate([P.b, Q.b]), normalize=False
    )


def pontryagin_diff(P, D):
    """Erosion {x | x + d in P for all d in D}.

    Row-wise offset shrink by the support of D.  Returns an empty
    polytope (detectable with is_empty) when the shrink removes
    everything.
    """
    if isinstance(D, Box):
        s = D.support_rows(P.A)
    else:
        s = np.array([support(D, row) for row in P.A])
    return HPolytope(P.A, P.b - s, normalize=False)


def affine_preimage(P, M, c=None):
    """{z | M z + c in P} with rows A M and offsets b - A c."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != P.dim:
        raise ValueError("map output dimension must match polytope dimension")
    A_new = P.A @ M
    b_new = P.b.copy()
    if c is not None:
        b_new = b_new - P.A @ np.asarray(c, dtype=float).ravel()
    return HPolytope.from_rows(A_new, b_new, dim=M.shape[1])


def embed(P, dim, offset=0):
    """Lift P into a higher-dimensional space on a coordinate block."""
    if offset + P.dim > dim:
        raise ValueError("embedded block exceeds target dimension")
    A = np.zeros((P.nrows, dim))
    A[:, offset : offset + P.dim] = P.A
    return HPolytope(A, P.b, normalize=False)


def _fourier_motzkin(A, b, idx, coef_tol=1e-12):
    """Raw single-coordinate projection; returns unnormalized rows.

    Pairs are combined in multiplied form, n_j * row_i + p_i * row_j,
    which spans the same halfspace as the divided form but keeps every
    entry bounded by the input scales (no 1/coef noise amplification).
    """
    col = A[:, idx]
    rest = np.delete(A, idx, axis=1)
    pos = col > coef_tol
    neg = col < -coef_tol
    zer = ~(pos | neg)
    rows = [rest[zer]]
    offs = [b[zer]]
    if pos.any() and neg.any():
        Ap, bp, p = rest[pos], b[pos], col[pos]
        An, bn, q = rest[neg], b[neg], -col[neg]
        # pairwise combinations, chunked over the rows with positive
        # coefficient to bound peak memory
        chunk = max(1, int(2e6 // max(1, An.shape[0])))
        for k in range(0, Ap.shape[0], chunk):
            Pc, bc, pc = Ap[k : k + chunk], bp[k : k + chunk], p[k : k + chunk]
            comb = q[None, :, None] * Pc[:, None, :] + pc[:, None, None] * An[None, :, :]
            rows.append(comb.reshape(-1, rest.shape[1]))
            offs.append((q[None, :] * bc[:, None] + pc[:, None] * bn[None, :]).ravel())
    return np.vstack(rows), np.concatenate(offs)


def eliminate(P, idx, reduce=True):
    """Exact orthogonal projection dropping coordinate ``idx``.

    Fourier-Motzkin pairing followed by redundancy removal; applied one
    coordinate at a time to keep the row blowup bounded.  Combinations
    of nearly antiparallel facets yield near-zero rows carrying only
    noise; they are vacuous for a feasible parent and are dropped.

    For bounded parents, the projection's exact bounding box (the
    parent's box with the coordinate dropped) prunes the pairing output
    before the LP-based redundancy loop: rows already implied by the box
    are discarded and the box facets join the system, which keeps the
    point set unchanged.
    """
    if P.dim < 2:
        raise DimensionError("cannot eliminate the last coordinate")
    A_new, b_new = _fourier_motzkin(P.A, P.b, idx)
    norms = np.linalg.norm(A_new, axis=1) if len(b_new) else np.zeros(0)
    tiny = norms < 1e-10
    if np.any(b_new[tiny] < -1e-8):
        return HPolytope.empty(P.dim - 1)
    A_new, b_new = A_new[~tiny], b_new[~tiny]
    if reduce and len(b_new) > 4 * (P.dim - 1):
        try:
            par = bounding_box(P)
        except (UnboundedSetError, EmptySetError):
            par = None
        if par is not None:
            keep_c = [j for j in range(P.dim) if j != idx]
            qbox = Box(par.lo[keep_c], par.hi[keep_c])
            slack = qbox.support_rows(A_new) <= b_new + 1e-9
            A_new = np.vstack([A_new[~slack], qbox.to_polytope().A])
            b_new = np.concatenate([b_new[~slack], qbox.to_polytope().b])
    Q = HPolytope.from_rows(A_new, b_new, dim=P.dim - 1)
    return remove_redundancy(Q) if reduce else Q


def _dedupe_rows(A, b, decimals=9):
    """Collapse duplicate facet normals, keeping the tightest offset."""
    key = np.round(A, decimals)
    order = np.lexsort(key.T[::-1])
    key = key[order]
    b_sorted = b[order]
    A_sorted = A[order]
    new_group = np.ones(len(b), dtype=bool)
    if len(b) > 1:
        new_group[1:] = (np.abs(np.diff(key, axis=0)) > 0).any(axis=1)
    group_id = np.cumsum(new_group) - 1
    n_groups = group_id[-1] + 1
    b_min = np.full(n_groups, np.inf)
    np.minimum.at(b_min, group_id, b_sorted)
    first = np.flatnonzero(new_group)
    A_out = A_sorted[first]
    return A_out, b_min


def remove_redundancy(P, tol=RED_TOL):
    """Minimal representation with the same point set.

    Every surviving row is irredundant: maximizing it over the other
    surviving rows exceeds its offset by more than ``tol``.
    """
    if P.nrows == 0:
        return P
    if is_empty(P):
        return HPolytope.empty(P.dim)
    A, b = _dedupe_rows(P.A, P.b)
    m = A.shape[0]
    keep = np.ones(m, dtype=bool)
    for i in range(m):
        keep[i] = False
        others = keep.copy()
        A_test = np.vstack([A[others], A[i]])
        b_test = np.concatenate([b[others], [b[i] + 1.0]])
        try:
            sol = solve_lp_arrays(A[i], A_test, b_test)
        except LpDegeneracyError:
            keep[i] = True  # cannot prove redundant; keeping is sound
            continue
        if sol.status == "optimal" and sol.value <= b[i] + tol:
            continue  # row i is implied by the others
        keep[i] = True
    return HPolytope(A[keep], b[keep], normalize=False)


def vertices(P, feas_tol=1e-7):
    """All vertices by brute-force facet-combination solves (dim <= 4).

    Test oracle only; cost grows combinatorially with the row count.
    """
    n = P.dim
    if n > 4:
        raise DimensionError("vertex enumeration restricted to dim <= 4")
    pts = []
    for comb in itertools.combinations(range(P.nrows), n):
        A_s = P.A[list(comb)]
        if abs(np.linalg.det(A_s)) < 1e-10:
            continue
        x = np.linalg.solve(A_s, P.b[list(comb)])
        if (P.A @ x <= P.b + feas_tol).all():
            pts.append(x)
    if not pts:
        return np.zeros((0, n))
    pts = np.asarray(pts)
    uniq = np.unique(np.round(pts, 7), axis=0)
    return uniq[np.lexsort(uniq.T[::-1])]


# ---------------------------------------------------------------------------
# Deterministic sampling


def sample_hit_and_run(P, n, rng, start=None, burn=10):
    """Hit-and-run chain of n points from the interior of P."""
    if start is None:
        start, _ = chebyshev_center(P)
    x = np.asarray(start, dtype=float).copy()
    out = np.empty((n, P.dim))
    total = n + burn
    for k in range(total):
        d = rng.standard_normal(P.dim)
        d /= np.linalg.norm(d)
        Ad = P.A @ d
        slack = P.b - P.A @ x
        t_hi = np.inf
        t_lo = -np.inf
        pos = Ad > 1e-12
        neg = Ad < -1e-12
        if pos.any():
            t_hi = (slack[pos] / Ad[pos]).min()
        if neg.any():
            t_lo = (slack[neg] / Ad[neg]).max()
        if np.isfinite(t_hi) and np.isfinite(t_lo) and t_hi > t_lo:
            x = x + (t_lo + rng.random() * (t_hi - t_lo)) * d
        if k >= burn:
            out[k - burn] = x
    return out


def sample_near_facets(P, n, rng, start=None):
    """Boundary-biased points: walk from interior points onto facets."""
    if start is None:
        start, _ = chebyshev_center(P)
    interior = sample_hit_and_run(P, n, rng, start=start)
    out = np.empty_like(interior)
    m = P.nrows
    for k in range(n):
        x = interior[k]
        d = P.A[k % m]
        Ad = P.A @ d
        slack = P.b - P.A @ x
        pos = Ad > 1e-12
        t_hi = (slack[pos] / Ad[pos]).min() if pos.any() else 0.0
        out[k] = x + max(t_hi, 0.0) * d
    return out
