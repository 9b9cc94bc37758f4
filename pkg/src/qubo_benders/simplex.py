"""Exact LP solver for the continuous subproblem.

Two-phase dense primal simplex on the standard-form reformulation of

    min c @ w  s.t.  G w <= h,  A w = b,  w free.

Free variables are split into positive and negative parts, inequalities get
slack columns, and Phase I introduces artificials only where no slack can
serve as the initial basic variable.  Duals are recovered from the final
basis, converted to the convention mu <= 0 for ``<=`` rows under
minimization.  Anti-cycling: Dantzig pricing initially, switching to Bland's
rule after a fixed pivot budget so termination is guaranteed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .milp import SubproblemTemplate

__all__ = [
    "LpStatus",
    "LpSolution",
    "solve_linear_program",
    "solve_lp",
    "compute_sensitivities",
    "PivotLimitError",
]

PIVOT_TOL = 1e-9
REPORT_TOL = 1e-6
_MAX_PIVOTS = 20000


class PivotLimitError(RuntimeError):
    """Simplex exceeded its pivot budget (should not happen with Bland's rule)."""


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpSolution:
    """Primal/dual solution of one subproblem solve.

    ``ineq_duals`` (mu) are nonpositive, ``eq_duals`` (nu) free.  For
    non-optimal statuses the vectors and objective are None.
    """

    status: LpStatus
    y: np.ndarray | None = None
    objective: float | None = None
    ineq_duals: np.ndarray | None = None
    eq_duals: np.ndarray | None = None


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    colvals = T[:, col].copy()
    colvals[row] = 0.0
    T -= np.outer(colvals, T[row])
    T[:, col] = 0.0
    T[row, col] = 1.0
    basis[row] = col


def _run_phase(
    T: np.ndarray,
    basis: np.ndarray,
    cost: np.ndarray,
    allowed: np.ndarray,
    bland_after: int,
) -> str:
    """Pivot until optimality or unboundedness of the current phase objective."""
    ncols = cost.size
    for it in range(_MAX_PIVOTS):
        reduced = cost - cost[basis] @ T[:, :ncols]
        reduced[basis] = 0.0
        candidates = np.flatnonzero(allowed & (reduced < -PIVOT_TOL))
        if candidates.size == 0:
            return "optimal"
        if it < bland_after:
            col = candidates[np.argmin(reduced[candidates])]
        else:
            col = candidates[0]
        colvec = T[:, col]
        rows = np.flatnonzero(colvec > PIVOT_TOL)
        if rows.size == 0:
            return "unbounded"
        ratios = T[rows, -1] / colvec[rows]
        best = np.min(ratios)
        ties = rows[ratios <= best + PIVOT_TOL]
        row = ties[np.argmin(basis[ties])]
        _pivot(T, basis, row, col)
    raise PivotLimitError(f"no convergence within {_MAX_PIVOTS} pivots")


def solve_linear_program(
    c: np.ndarray,
    G: np.ndarray,
    h: np.ndarray,
    A: np.ndarray,
    b: np.ndarray,
) -> tuple[LpStatus, np.ndarray | None, np.ndarray | None, np.ndarray | None]:
    """Solve ``min c @ w  s.t.  G w <= h, A w = b`` with ``w`` free.

    Returns ``(status, w, mu, nu)`` where ``mu`` (<= rows) is nonpositive
    and ``nu`` (= rows) is free, satisfying ``G.T @ mu + A.T @ nu = c`` at
    optimality.
    """
    c = np.atleast_1d(np.asarray(c, dtype=float))
    m = c.size
    h = np.atleast_1d(np.asarray(h, dtype=float)) if np.size(h) else np.zeros(0)
    b = np.atleast_1d(np.asarray(b, dtype=float)) if np.size(b) else np.zeros(0)
    p, r = h.size, b.size
    nrows = p + r
    G = np.zeros((p, m)) if np.size(G) == 0 else np.asarray(G, dtype=float).reshape(p, m)
    A = np.zeros((r, m)) if np.size(A) == 0 else np.asarray(A, dtype=float).reshape(r, m)

    if m == 0:
        # no variables left: pure feasibility check of the fixed rows
        if (p == 0 or h.min() >= -REPORT_TOL) and (r == 0 or np.abs(b).max() <= REPORT_TOL):
            return LpStatus.OPTIMAL, np.zeros(0), np.zeros(p), np.zeros(r)
        return LpStatus.INFEASIBLE, None, None, None

    if nrows == 0:
        if m == 0 or np.all(np.abs(c) <= PIVOT_TOL):
            return LpStatus.OPTIMAL, np.zeros(m), np.zeros(0), np.zeros(0)
        return LpStatus.UNBOUNDED, None, None, None

    # Standard form over z = (w+, w-, s) >= 0.
    M = np.zeros((nrows, 2 * m + p))
    M[:p, :m] = G
    M[:p, m : 2 * m] = -G
    M[:p, 2 * m :] = np.eye(p)
    M[p:, :m] = A
    M[p:, m : 2 * m] = -A
    q = np.concatenate([h, b])

    sign = np.where(q < 0, -1.0, 1.0)
    M *= sign[:, None]
    q = q * sign

    # Slack columns of unflipped inequality rows start basic; all other rows
    # need an artificial.
    art_rows = [k for k in range(nrows) if k >= p or sign[k] < 0]
    n_core = 2 * m + p
    n_art = len(art_rows)
    ncols = n_core + n_art

    T = np.zeros((nrows, ncols + 1))
    T[:, :n_core] = M
    for j, k in enumerate(art_rows):
        T[k, n_core + j] = 1.0
    T[:, -1] = q

    basis = np.empty(nrows, dtype=int)
    for k in range(nrows):
        basis[k] = 2 * m + k if (k < p and sign[k] > 0) else 0
    for j, k in enumerate(art_rows):
        basis[k] = n_core + j

    allowed = np.ones(ncols, dtype=bool)
    allowed[n_core:] = False
    bland_after = 5 * (nrows + ncols)

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n_core:] = 1.0
        outcome = _run_phase(T, basis, cost1, allowed, bland_after)
        assert outcome == "optimal"  # phase-I objective is bounded below by 0
        residual = float(cost1[basis] @ T[:, -1])
        if residual > REPORT_TOL * (1.0 + float(np.max(np.abs(q), initial=0.0))):
            return LpStatus.INFEASIBLE, None, None, None
        # Drive degenerate artificials out of the basis where possible;
        # rows where none pivots are redundant and keep their zero artificial.
        for row in range(nrows):
            if basis[row] >= n_core:
                pivots = np.flatnonzero(np.abs(T[row, :n_core]) > PIVOT_TOL)
                if pivots.size:
                    _pivot(T, basis, row, pivots[0])

    cost2 = np.zeros(ncols)
    cost2[:m] = c
    cost2[m : 2 * m] = -c
    outcome = _run_phase(T, basis, cost2, allowed, bland_after)
    if outcome == "unbounded":
        return LpStatus.UNBOUNDED, None, None, None

    z = np.zeros(ncols)
    z[basis] = T[:, -1]
    w = z[:m] - z[m : 2 * m]

    # Duals from the final basis of the (sign-flipped) standard form.
    Borig = np.zeros((nrows, nrows))
    for i, col in enumerate(basis):
        if col < n_core:
            Borig[:, i] = M[:, col]
        else:
            Borig[art_rows[col - n_core], i] = 1.0
    pi = sign * np.linalg.solve(Borig.T, cost2[basis])
    mu = np.minimum(pi[:p], 0.0)
    nu = pi[p:]
    return LpStatus.OPTIMAL, w, mu, nu


def solve_lp(template: SubproblemTemplate, x_fixed: np.ndarray) -> LpSolution:
    """Solve the continuous subproblem with the binaries fixed to ``x_fixed``."""
    x = np.atleast_1d(np.asarray(x_fixed, dtype=float))
    if x.size != template.num_binary:
        raise ValueError(f"x_fixed must have length {template.num_binary}, got {x.size}")
    h_fixed = template.h - template.G @ x
    b_fixed = template.b - template.A @ x
    status, y, mu, nu = solve_linear_program(
        template.c_cont, template.G_cont, h_fixed, template.A_cont, b_fixed
    )
    if status is not LpStatus.OPTIMAL:
        return LpSolution(status=status)
    return LpSolution(
        status=status,
        y=y,
        objective=float(template.c_cont @ y),
        ineq_duals=mu,
        eq_duals=nu,
    )


def compute_sensitivities(template: SubproblemTemplate, sol: LpSolution) -> np.ndarray:
    """Dual sensitivity of the fixed binaries: ``lambda = -G.T mu - A.T nu``."""
    if sol.status is not LpStatus.OPTIMAL:
        raise ValueError(f"sensitivities require an optimal solution, got {sol.status}")
    return -(template.G.T @ sol.ineq_duals) - (template.A.T @ sol.eq_duals)
