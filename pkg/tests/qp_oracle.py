"""Dense brute-force QP oracle for cross-checking the cone solver.

Solves min 1/2 x'Px + r'x s.t. Dx <= e (, Aeq x = beq) by enumerating
active sets and checking KKT multiplier signs; for convex P this visits the
global optimum.  Exponential in the inequality count, so only for small
instances.  Also provides the QP -> SOCP reformulation fed to the solver
under test; the two paths share no code.
"""

import itertools

import numpy as np

from momplan.conic import ProgramBuilder
from momplan.dc import AffExpr


def brute_force_qp(P, r, D, e, Aeq=None, beq=None):
    m_ineq, n = D.shape
    best_obj, best_x = np.inf, None
    for k in range(m_ineq + 1):
        for active in itertools.combinations(range(m_ineq), k):
            Da = D[list(active)]
            blocks = [Da] if active else []
            rhs_parts = [e[list(active)]] if active else []
            if Aeq is not None:
                blocks.append(Aeq)
                rhs_parts.append(beq)
            C = np.vstack(blocks) if blocks else np.zeros((0, n))
            rhs_c = np.concatenate(rhs_parts) if rhs_parts else np.zeros(0)
            kkt = np.block([[P, C.T], [C, np.zeros((C.shape[0],) * 2)]])
            rhs = np.concatenate([-r, rhs_c])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                continue
            x = sol[:n]
            lam = sol[n:n + len(active)]
            if np.any(lam < -1e-9):
                continue
            if np.any(D @ x - e > 1e-9):
                continue
            obj = 0.5 * x @ P @ x + r @ x
            if obj < best_obj - 1e-12:
                best_obj, best_x = obj, x
    return best_obj, best_x


def qp_as_program(P, r, D, e, Aeq=None, beq=None):
    n = P.shape[1]
    chol = np.linalg.cholesky(P).T
    b = ProgramBuilder(n)
    for i in range(n):
        if r[i]:
            b.add_cost(i, float(r[i]))
    rows = [AffExpr(tuple(range(n)), tuple(chol[i]), 0.0)
            for i in range(chol.shape[0])]
    b.add_sq_epigraph(rows, weight=0.5)
    for i in range(D.shape[0]):
        b.add_nonneg(AffExpr(tuple(range(n)), tuple(-D[i]), float(e[i])))
    if Aeq is not None:
        for i in range(Aeq.shape[0]):
            b.add_eq(AffExpr(tuple(range(n)), tuple(Aeq[i]), -float(beq[i])))
    return b.build()


def random_strictly_feasible_qp(rng, n_range=(4, 11), m_range=(3, 9),
                                with_eq=False):
    n = int(rng.integers(*n_range))
    m_ineq = int(rng.integers(*m_range))
    Q = rng.normal(size=(n, n))
    P = Q @ Q.T + n * np.eye(n)
    r = rng.normal(size=n)
    x_feas = rng.normal(size=n)
    D = rng.normal(size=(m_ineq, n))
    e = D @ x_feas + rng.uniform(0.1, 2.0, size=m_ineq)
    Aeq = beq = None
    if with_eq:
        Aeq = rng.normal(size=(2, n))
        beq = Aeq @ x_feas
    return P, r, D, e, Aeq, beq
