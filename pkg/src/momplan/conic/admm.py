"""First-order operator-splitting backend (projection + linear solve).

Splitting on the homogeneous self-dual embedding: one sparse factorization
of (I + Q) with the skew data matrix Q, then alternate the linear solve with
projections onto the cone product.  Simple and allocation-light, but being a
first-order method it needs many iterations for tight tolerances; the
interior-point backend is preferred for the accuracy this package's audits
demand.  Warm starting is supported and cheap.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cones import ConeWorkspace
from .program import ConicProgram, ConicSolution

OVER_RELAXATION = 1.5
CHECK_EVERY = 25


class SplittingSolver:
    def __init__(self, prog: ConicProgram, tol: float = 1e-6,
                 max_iter: int = 50_000):
        self.prog = prog
        self.tol = tol
        self.max_iter = max_iter
        self.ws = ConeWorkspace(prog.cones)
        n, p, m = prog.n_vars, prog.n_eq, prog.n_cone_rows
        self.n, self.p, self.m = n, p, m
        A, G = prog.A.tocoo(), prog.G.tocoo()
        c, b, h = prog.c, prog.b, prog.h
        N = n + p + m + 1
        rows = [A.row + n, A.col, G.row + n + p, G.col,
                np.full(n, N - 1), np.arange(n),
                np.full(p, N - 1), np.arange(n, n + p),
                np.full(m, N - 1), np.arange(n + p, n + p + m)]
        cols = [A.col, A.row + n, G.col, G.row + n + p,
                np.arange(n), np.full(n, N - 1),
                np.arange(n, n + p), np.full(p, N - 1),
                np.arange(n + p, n + p + m), np.full(m, N - 1)]
        vals = [-A.data, A.data, -G.data, G.data,
                -c, c, -b, b, -h, h]
        Q = sp.csc_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))
        self.lu = spla.splu((sp.identity(N, format="csc") + Q).tocsc())
        self.N = N

    def _project_u(self, u: np.ndarray) -> np.ndarray:
        out = u.copy()
        zpart = slice(self.n + self.p, self.n + self.p + self.m)
        out[zpart] = self.ws.project(u[zpart])
        out[-1] = max(u[-1], 0.0)
        return out

    def solve(self, warm: ConicSolution | None = None) -> ConicSolution:
        t0 = time.perf_counter()
        prog = self.prog
        n, p, m = self.n, self.p, self.m
        A, G, b, h, c = prog.A, prog.G, prog.b, prog.h, prog.c
        norm_b = 1.0 + np.linalg.norm(b)
        norm_h = 1.0 + np.linalg.norm(h)
        norm_c = 1.0 + np.linalg.norm(c)

        u = np.zeros(self.N)
        v = np.zeros(self.N)
        if warm is not None and warm.x is not None and np.all(np.isfinite(warm.x)):
            u[:n] = warm.x
            if warm.y is not None:
                u[n:n + p] = warm.y
            if warm.z is not None:
                u[n + p:n + p + m] = warm.z
            if warm.s is not None:
                v[n + p:n + p + m] = warm.s
        u[-1] = 1.0
        v[-1] = 0.0

        best = None
        status = "max_iter"
        it = 0
        for it in range(1, self.max_iter + 1):
            ut = self.lu.solve(u + v)
            ut = OVER_RELAXATION * ut + (1.0 - OVER_RELAXATION) * u
            u_new = self._project_u(ut - v)
            v = v - ut + u_new
            u = u_new

            if it % CHECK_EVERY != 0 and it != self.max_iter:
                continue
            tau = u[-1]
            if tau > 1e-10:
                x = u[:n] / tau
                y = u[n:n + p] / tau
                z = u[n + p:n + p + m] / tau
                s = v[n + p:n + p + m] / tau
                pres = max(np.linalg.norm(A @ x - b) / norm_b,
                           np.linalg.norm(G @ x + s - h) / norm_h)
                dres = np.linalg.norm(A.T @ y + G.T @ z + c) / norm_c
                pobj = c @ x
                dobj = -(b @ y) - (h @ z)
                gap = abs(pobj - dobj) / max(1.0, abs(pobj), abs(dobj))
                best = ConicSolution(
                    x=x.copy(), status="optimal", primal_residual=float(pres),
                    dual_residual=float(dres), gap=float(gap), iterations=it,
                    solve_time=0.0, objective=float(pobj), y=y.copy(),
                    z=z.copy(), s=s.copy())
                if pres <= self.tol and dres <= self.tol and gap <= self.tol:
                    status = "optimal"
                    break
            else:
                # tau collapsed: look for a certificate
                y = u[n:n + p]
                z = u[n + p:n + p + m]
                x = u[:n]
                s = v[n + p:n + p + m]
                hz_by = b @ y + h @ z
                if hz_by < -1e-12:
                    yi, zi = y / -hz_by, z / -hz_by
                    if np.linalg.norm(A.T @ yi + G.T @ zi) / norm_c <= self.tol:
                        best = ConicSolution(
                            x=np.full(n, np.nan), status="primal_infeasible",
                            primal_residual=0.0, dual_residual=np.inf,
                            gap=np.inf, iterations=it, solve_time=0.0,
                            objective=np.nan, y=yi, z=zi, s=None)
                        status = "primal_infeasible"
                        break
                cx = c @ x
                if cx < -1e-12:
                    xi, si = x / -cx, s / -cx
                    dinf = max(np.linalg.norm(A @ xi) / norm_b,
                               np.linalg.norm(G @ xi + si) / norm_h)
                    if dinf <= self.tol:
                        best = ConicSolution(
                            x=xi, status="dual_infeasible",
                            primal_residual=np.inf, dual_residual=0.0,
                            gap=np.inf, iterations=it, solve_time=0.0,
                            objective=-1.0, y=None, z=None, s=si)
                        status = "dual_infeasible"
                        break

        solve_time = time.perf_counter() - t0
        if best is None:
            return ConicSolution(
                x=np.full(n, np.nan), status="numerical_failure",
                primal_residual=np.inf, dual_residual=np.inf, gap=np.inf,
                iterations=it, solve_time=solve_time, objective=np.nan)
        final_status = best.status if status == best.status else status
        return ConicSolution(
            x=best.x, status=final_status, primal_residual=best.primal_residual,
            dual_residual=best.dual_residual, gap=best.gap, iterations=it,
            solve_time=solve_time, objective=best.objective, y=best.y,
            z=best.z, s=best.s)
