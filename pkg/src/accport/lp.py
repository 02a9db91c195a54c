"""Dense linear-programming kernel.

Solves ``max c.x  s.t.  A x <= b`` (x free) for problems with a small
dimension and possibly many rows.  A two-phase revised simplex is run on
the dual

    min b.y   s.t.   A^T y = c,   y >= 0,

whose basis has exactly ``dim(x)`` members, so every iteration costs one
m-by-n matvec plus two tiny dense solves.  At dual optimality the simplex
multipliers of the equality constraints are the primal optimum, and the
termination test (all reduced costs nonnegative) is exactly primal
feasibility, so no separate recovery step is needed.

Pricing is Dantzig's rule with deterministic smallest-index tie-breaks;
after ``_BLAND_AFTER`` iterations the solver switches to Bland's rule to
break cycling.  Exceeding the hard iteration cap raises
:class:`LpDegeneracyError`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
_PIVOT_TOL = 1e-9
_RCOST_TOL = 1e-10
_BLAND_AFTER = 2000
_MAX_ITER = 50000

_lp_counter = [0]


class LpDegeneracyError(RuntimeError):
    """Simplex failed to terminate within the iteration cap."""


@dataclass
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    value: float | None
    x: np.ndarray | None


def lp_count() -> int:
    """Total LPs solved by this process (for statistics)."""
    return _lp_counter[0]


def _solve_dual(A, b, c):
    """Two-phase simplex on the dual of max c.x s.t. Ax <= b.

    Returns (status, x) where status is one of "optimal",
    "dual_infeasible" (primal unbounded or infeasible) or
    "dual_unbounded" (primal infeasible).  x is the primal optimum
    (the simplex multipliers at dual optimality) when status is optimal.

    A singular basis (pivoting drifted onto a degenerate facet bundle)
    triggers one full restart under Bland's rule before giving up.
    """
    try:
        return _solve_dual_once(A, b, c, bland_start=False)
    except LpDegeneracyError:
        return _solve_dual_once(A, b, c, bland_start=True)


def _solve_dual_once(A, b, c, bland_start=False):
    m, n = A.shape
    sign = np.where(c >= 0.0, 1.0, -1.0)
    # Dual variables 0..m-1 (columns = rows of A); m..m+n-1 are phase-1
    # artificials with columns sign[i] * e_i.
    basis = np.arange(m, m + n)
    nonbasic_real = np.ones(m, dtype=bool)

    def basis_matrix(bas):
        B = np.empty((n, n))
        for col, j in enumerate(bas):
            if j < m:
                B[:, col] = A[j]
            else:
                B[:, col] = 0.0
                B[j - m, col] = sign[j - m]
        return B

    def run_phase(cost_real, phase1):
        iters = 0
        while True:
            if iters > _MAX_ITER:
                raise LpDegeneracyError(
                    "simplex iteration cap exceeded (%d iterations)" % iters
                )
            bland = bland_start or iters > _BLAND_AFTER
            B = basis_matrix(basis)
            try:
                y_B = np.linalg.solve(B, c)
                if phase1:
                    cost_B = np.where(basis >= m, 1.0, 0.0)
                else:
                    cost_B = np.where(basis < m, cost_real[basis % m], 0.0)
                pi = np.linalg.solve(B.T, cost_B)
            except np.linalg.LinAlgError:
                raise LpDegeneracyError("singular basis in simplex")
            if not (np.isfinite(y_B).all() and np.isfinite(pi).all()):
                raise LpDegeneracyError("non-finite basis solution")
            red = cost_real - A @ pi
            red[~nonbasic_real] = np.inf
            cand = np.flatnonzero(red < -_RCOST_TOL)
            if cand.size == 0:
                return "optimal", y_B, pi
            if bland:
                enter = cand[0]
            else:
                enter = cand[np.argmin(red[cand])]
            d = np.linalg.solve(B, A[enter])
            # ratio test; artificials are pinned to zero outside phase 1
            ratios = np.full(n, np.inf)
            art_rows = basis >= m
            pos = d > _PIVOT_TOL
            ratios[pos] = np.maximum(y_B[pos], 0.0) / d[pos]
            if not phase1:
                pinned = art_rows & (np.abs(d) > _PIVOT_TOL)
                ratios[pinned] = 0.0
            if not np.isfinite(ratios).any():
                return "unbounded", y_B, pi
            theta = ratios.min()
            ties = np.flatnonzero(ratios <= theta + 1e-12 * (1.0 + theta))
            if bland:
                leave = ties[np.argmin(basis[ties])]
            else:
                # prefer kicking artificials out, then the largest pivot
                art_ties = ties[art_rows[ties]]
                if art_ties.size:
                    ties = art_ties
                leave = ties[np.argmax(np.abs(d[ties]))]
            out = basis[leave]
            if out < m:
                nonbasic_real[out] = True
            nonbasic_real[enter] = False
            basis[leave] = enter
            iters += 1

    # Phase 1: drive artificials to zero (cost 1 on artificials, 0 on
    # real columns, so a real column's reduced cost is -pi.A_j and the
    # artificials never need to re-enter).
    status, y_B, _ = run_phase(np.zeros(m), phase1=True)
    art_level = float(np.sum(np.abs(y_B[basis >= m])))
    if status != "optimal" or art_level > 1e-7 * (1.0 + float(np.abs(c).sum())):
        return "dual_infeasible", None
    # Phase 2: minimize b.y with remaining artificials pinned at zero.
    status, y_B, pi = run_phase(b.astype(float), phase1=False)
    if status == "unbounded":
        return "dual_unbounded", None
    return "optimal", pi


def solve_lp_arrays(c, A, b, sense="max"):
    """Solve max/min c.x over {x | A x <= b}.  Deterministic."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if A.ndim != 2 or A.shape[0] != b.size or A.shape[1] != c.size:
        raise ValueError("inconsistent LP dimensions")
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    _lp_counter[0] += 1
    obj = c if sense == "max" else -c
    m, n = A.shape
    if m == 0:
        if np.abs(obj).max(initial=0.0) <= _RCOST_TOL:
            return LpSolution("optimal", 0.0, np.zeros(n))
        return LpSolution("unbounded", None, None)
    status, x = _solve_dual(A, b, obj)
    if status == "dual_unbounded":
        return LpSolution("infeasible", None, None)
    if status == "dual_infeasible":
        s, _ = min_violation(A, b)
        if s > FEAS_TOL:
            return LpSolution("infeasible", None, None)
        return LpSolution("unbounded", None, None)
    return LpSolution("optimal", float(c @ x), x)


def min_violation(A, b):
    """Smallest s such that A x <= b + s is satisfiable (s floored at -1).

    Returns (s, x).  The set {x | A x <= b} is nonempty within tolerance
    ``tol`` iff s <= tol.  Always solvable.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    m, n = A.shape
    if m == 0:
        return -1.0, np.zeros(n)
    _lp_counter[0] += 1
    A_ext = np.hstack([A, -np.ones((m, 1))])
    A_ext = np.vstack([A_ext, np.zeros(n + 1)])
    A_ext[-1, -1] = -1.0
    b_ext = np.concatenate([b, [1.0]])
    c_ext = np.zeros(n + 1)
    c_ext[-1] = -1.0
    status, z = _solve_dual(A_ext, b_ext, c_ext)
    if status != "optimal":
        raise LpDegeneracyError("feasibility probe failed: %s" % status)
    return float(z[-1]), z[:-1]
