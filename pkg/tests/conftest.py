"""Shared fixtures: the 2-bus expansion example and random program builders."""

import numpy as np
import pytest

from qubo_benders.milp import MixedBinaryProgram
from qubo_benders.simplex import LpStatus, solve_linear_program, solve_lp
from qubo_benders.tnep import TnepInstance, to_milp


def two_bus() -> TnepInstance:
    """One candidate line 0->1; all demand at bus 1, all generation at bus 0.

    Without the line the demand must be shed (cost 10*100 = 1000); with it,
    generation covers everything (cost 5 + 10*1 = 15).
    """
    return TnepInstance(
        buses=2,
        candidate_lines=[(0, 1, 10.0, 5.0)],
        demand=np.array([0.0, 10.0]),
        gen_cap=np.array([10.0, 0.0]),
        gen_cost=np.array([1.0, 1.0]),
        shed_cost=np.array([100.0, 100.0]),
    )


@pytest.fixture
def two_bus_instance() -> TnepInstance:
    return two_bus()


@pytest.fixture
def two_bus_program() -> MixedBinaryProgram:
    return to_milp(two_bus())


def random_program(rng, n=3, m=4, p=5, r=2, box=12.0):
    """Random mixed-binary program, feasible and bounded at a known x0.

    Feasibility at x0 comes from building h/b around an interior point y0;
    boundedness from box rows on every continuous variable.  Returns
    (program, x0).
    """
    x0 = rng.integers(0, 2, n).astype(float)
    y0 = np.clip(rng.normal(0.0, 2.0, m), -box + 2.0, box - 2.0)
    c = rng.normal(0.0, 3.0, n)
    c_cont = rng.normal(0.0, 3.0, m)
    G = rng.normal(0.0, 1.5, (p, n))
    G_cont = rng.normal(0.0, 1.5, (p, m))
    h = G @ x0 + G_cont @ y0 + rng.uniform(0.2, 2.0, p)
    A = rng.normal(0.0, 1.0, (r, n))
    A_cont = rng.normal(0.0, 1.0, (r, m))
    b = A @ x0 + A_cont @ y0
    G_all = np.concatenate([G, np.zeros((2 * m, n))])
    G_cont_all = np.concatenate([G_cont, np.eye(m), -np.eye(m)])
    h_all = np.concatenate([h, np.full(2 * m, box)])
    prog = MixedBinaryProgram(
        c=c, c_cont=c_cont, G=G_all, G_cont=G_cont_all, h=h_all, A=A, A_cont=A_cont, b=b
    )
    return prog, x0


def explicit_fixing_duals(template, x0):
    """Solve the same subproblem with x carried as continuous variables pinned
    by equality rows; the duals of the pinning rows are the sensitivities."""
    n = template.num_binary
    m = template.c_cont.size
    r = template.b.size
    c_full = np.concatenate([np.zeros(n), template.c_cont])
    G_full = np.hstack([template.G, template.G_cont])
    A_full = np.vstack(
        [
            np.hstack([template.A, template.A_cont]),
            np.hstack([np.eye(n), np.zeros((n, m))]),
        ]
    )
    b_full = np.concatenate([template.b, x0])
    status, w, mu, nu = solve_linear_program(c_full, G_full, template.h, A_full, b_full)
    assert status is LpStatus.OPTIMAL
    return float(c_full @ w), nu[r:]


def cut_is_valid(template, lam, obj0, x0, tol=1e-6):
    """Check v(x) >= obj0 + lam @ (x - x0) at every feasible binary point."""
    n = template.num_binary
    for code in range(1 << n):
        x = np.array([(code >> i) & 1 for i in range(n)], dtype=float)
        sol = solve_lp(template, x)
        if sol.status is not LpStatus.OPTIMAL:
            continue
        if sol.objective < obj0 + lam @ (x - x0) - tol:
            return False
    return True
