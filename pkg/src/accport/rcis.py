"""Maximal robust controlled invariant set inside the augmented ODD.

The safe set is the fixpoint of the decreasing iteration

    S_0 = ODD,   S_{i+1} = robust_pre(S_i) /\\ S_i,

where robust_pre(S) is the set of states from which some admissible
control keeps the successor in S for every admissible front-object
acceleration and disturbance.  Convergence is certified by containment
within tolerance; only a converged set is invariant, so the containment
checker refuses unconverged results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    HPolytope,
    contains,
    eliminate,
    intersect,
    is_empty,
    remove_redundancy,
)

CONV_TOL = 1e-7


@dataclass
class SafeSet:
    """Converged (or capped) invariant-set iterate for one configuration."""

    poly: HPolytope
    vhc_name: str
    iterations_used: int
    converged: bool

    @property
    def facet_count(self):
        return self.poly.nrows

    @property
    def empty(self):
        return is_empty(self.poly)


def disturbance_support(A_rows, sys, D_box):
    """Per-facet support of the disturbance image {B_f a_T + E w}."""
    G = np.column_stack([A_rows @ sys.B_f_aug, A_rows @ sys.E_aug])
    return D_box.support_rows(G)


def _envelope_stable_rows(S, D_box, envelope, tol=1e-7):
    """Facets that are self-invariant under the conditioned disturbance.

    A pure v_T facet sitting at (or outside) the front-object speed
    envelope cannot be crossed by any admissible a_T, so it imposes no
    pre-constraint.  All other facets keep the conservative fixed-box
    erosion, which under-approximates the conditioned pre-set and
    preserves soundness.
    """
    from .model import IVT

    pure = np.ones(S.nrows, dtype=bool)
    for j in range(S.dim):
        if j == IVT:
            continue
        pure &= np.abs(S.A[:, j]) <= 1e-9
    up = pure & (np.abs(S.A[:, IVT] - 1.0) <= 1e-9) & (S.b >= envelope.v_T_max - tol)
    dn = pure & (np.abs(S.A[:, IVT] + 1.0) <= 1e-9) & (-S.b <= envelope.v_T_min + tol)
    return up | dn


def robust_pre(S, sys, U_a, D_box, envelope=None):
    """States robustly steerable into S in one step.

    Pipeline: erode S by the disturbance image, pull back through the
    control-augmented dynamics, intersect with the control bounds, then
    project out the control coordinate (with redundancy removal).  With
    an envelope, a_T is quantified over its state-conditioned admissible
    interval instead of the fixed box.
    """
    A_rows, b_rows = S.A, S.b
    if envelope is not None:
        keep = ~_envelope_stable_rows(S, D_box, envelope)
        A_rows, b_rows = A_rows[keep], b_rows[keep]
    b_shrunk = b_rows - disturbance_support(A_rows, sys, D_box)
    shrunk = HPolytope.from_rows(A_rows, b_shrunk, dim=S.dim)
    if is_empty(shrunk):
        return HPolytope.empty(sys.dim)
    M = np.hstack([sys.A_aug, sys.B_aug[:, None]])
    pre = intersect(
        HPolytope.from_rows(shrunk.A @ M, shrunk.b, dim=sys.dim + 1),
        _control_band(sys.dim, U_a),
    )
    return eliminate(pre, sys.dim)


def _control_band(dim, U_a):
    A = np.zeros((2, dim + 1))
    A[0, dim] = 1.0
    A[1, dim] = -1.0
    return HPolytope(A, np.array([U_a.hi[0], -U_a.lo[0]]), normalize=False)


def _same_rows(P, Q, tol=1e-9):
    if P.nrows != Q.nrows:
        return False
    return bool(
        np.allclose(P.A, Q.A, atol=tol) and np.allclose(P.b, Q.b, atol=tol)
    )


def compute_rcis(odd, sys, U_a, D_box, max_iter=100, name="", envelope=None):
    """Fixpoint iteration for the maximal RCIS inside the augmented ODD.

    The iterate is monotonically decreasing; the loop stops when the
    pre-set contains the current iterate (fixpoint) or at the iteration
    cap, in which case the result is flagged unconverged.  An empty
    result is a legal, flagged outcome.
    """
    if is_empty(odd):
        raise ValueError("augmented ODD is empty")
    S = remove_redundancy(odd)
    for it in range(1, max_iter + 1):
        pre = robust_pre(S, sys, U_a, D_box, envelope=envelope)
        if is_empty(pre):
            return SafeSet(HPolytope.empty(sys.dim), name, it, converged=True)
        if _same_rows(pre, S) or contains(pre, S, tol=CONV_TOL):
            return SafeSet(S, name, it, converged=True)
        S = remove_redundancy(intersect(pre, S))
        if is_empty(S):
            return SafeSet(HPolytope.empty(sys.dim), name, it, converged=True)
    return SafeSet(S, name, max_iter, converged=False)


def slice_set(S, fixed):
    """Substitute fixed coordinate values into every facet.

    ``fixed`` maps coordinate index to value; the result lives on the
    remaining coordinates (possibly zero-dimensional).  An empty slice
    is a legal outcome.
    """
    poly = S.poly if isinstance(S, SafeSet) else S
    if not fixed:
        return poly
    idx = sorted(fixed)
    if any(i < 0 or i >= poly.dim for i in idx):
        raise ValueError("fixed coordinate index out of range")
    vals = np.array([fixed[i] for i in idx], dtype=float)
    free = [i for i in range(poly.dim) if i not in fixed]
    b_new = poly.b - poly.A[:, idx] @ vals
    return HPolytope.from_rows(poly.A[:, free], b_new, dim=len(free))


def disturbance_support_at(A_rows, sys, D_box, X, envelope=None):
    """Worst-case disturbance term per (state, facet) pair.

    Plain box support when no envelope is given; otherwise the
    front-object acceleration range is conditioned on each state's v_T.
    Returns an (npts, nrows) array.
    """
    from .model import IVT

    X = np.atleast_2d(np.asarray(X, dtype=float))
    g1 = A_rows @ sys.B_f_aug
    g2 = A_rows @ sys.E_aug
    w_term = np.maximum(g2 * D_box.lo[1], g2 * D_box.hi[1])
    if envelope is None:
        at_term = np.maximum(g1 * D_box.lo[0], g1 * D_box.hi[0])
        return np.broadcast_to(at_term + w_term, (len(X), len(g1))).copy()
    lo_T, hi_T = envelope.a_T_bounds(X[:, IVT], D_box)
    at_term = np.maximum(np.outer(lo_T, g1), np.outer(hi_T, g1))
    return at_term + w_term[None, :]


def worst_disturbance_at(A_row, sys, D_box, x, envelope=None):
    """Arg-max disturbance vertex (a_T, w) for one facet at one state."""
    from .model import IVT

    g1 = float(A_row @ sys.B_f_aug)
    g2 = float(A_row @ sys.E_aug)
    lo_T, hi_T = D_box.lo[0], D_box.hi[0]
    if envelope is not None:
        lo_T, hi_T = envelope.a_T_bounds(float(x[IVT]), D_box)
        lo_T, hi_T = float(lo_T), float(hi_T)
    a_T = hi_T if g1 > 1e-12 else lo_T
    w = D_box.hi[1] if g2 > 1e-12 else D_box.lo[1]
    return np.array([a_T, w])


def robust_control_interval(poly, sys, U_a, D_box, X, envelope=None):
    """Admissible-control interval keeping each state robustly in the set.

    For states stacked row-wise in X, returns (lo, hi) per state such
    that every control in [lo, hi] (when nonempty) maps the state into
    ``poly`` for all admissible disturbances.  Used as the fixpoint
    certificate: a converged safe set must yield lo <= hi on all of its
    points.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    supp = disturbance_support_at(poly.A, sys, D_box, X, envelope=envelope)
    base = X @ (poly.A @ sys.A_aug).T  # (npts, nrows)
    coef = poly.A @ sys.B_aug
    slack = poly.b[None, :] - supp - base
    lo = np.full(len(X), U_a.lo[0])
    hi = np.full(len(X), U_a.hi[0])
    pos = coef > 1e-12
    neg = coef < -1e-12
    if pos.any():
        hi = np.minimum(hi, (slack[:, pos] / coef[pos]).min(axis=1))
    if neg.any():
        lo = np.maximum(lo, (slack[:, neg] / coef[neg]).max(axis=1))
    infeas_zero = (slack[:, ~(pos | neg)] < -1e-12).any(axis=1)
    lo = np.where(infeas_zero, np.inf, lo)
    return lo, hi
