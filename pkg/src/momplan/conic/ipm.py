"""Primal-dual interior-point solver on the homogeneous self-dual embedding.

Mehrotra predictor-corrector with Nesterov-Todd scaling over the nonnegative
orthant and second-order cones.  Each iteration factors the quasi-definite
Newton matrix

    [ 0   A'   G'  ]
    [ A   0    0   ]
    [ G   0   -W^2 ]

once (scipy SuperLU) and reuses the factorization for the predictor and
corrector right-hand sides.  The embedding produces certificates of primal
or dual infeasibility instead of failing when the program has no solution.
"""

from __future__ import annotations

import time

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .cones import ConeWorkspace, NTScaling
from .program import ConicProgram, ConicSolution

STEP_FRACTION = 0.99


def _row_scales(prog: ConicProgram) -> tuple[np.ndarray, np.ndarray]:
    """Equilibration scales: per equality row, and per cone block (uniform
    within each block so scaling preserves cone membership)."""
    def row_norms(mat, rhs):
        out = np.zeros(mat.shape[0])
        sq = mat.multiply(mat)
        out = np.sqrt(np.asarray(sq.sum(axis=1)).ravel())
        return np.maximum(out, np.abs(rhs))

    da = 1.0 / np.maximum(row_norms(prog.A, prog.b), 1e-8)
    gnorm = row_norms(prog.G, prog.h)
    dg = np.ones(prog.n_cone_rows)
    l = prog.cones.nonneg
    dg[:l] = 1.0 / np.maximum(gnorm[:l], 1e-8)
    off = l
    for d in prog.cones.soc_dims:
        blk = max(np.max(gnorm[off:off + d]), 1e-8)
        dg[off:off + d] = 1.0 / blk
        off += d
    return da, dg


class _KktSystem:
    """Newton-matrix assembly with a fixed sparsity pattern."""

    def __init__(self, prog: ConicProgram):
        n, p, m = prog.n_vars, prog.n_eq, prog.n_cone_rows
        self.n, self.p, self.m = n, p, m
        acoo = prog.A.tocoo()
        gcoo = prog.G.tocoo()
        rows = [acoo.row + n, acoo.col, gcoo.row + n + p, gcoo.col]
        cols = [acoo.col, acoo.row + n, gcoo.col, gcoo.row + n + p]
        vals = [acoo.data, acoo.data, gcoo.data, gcoo.data]
        self._fixed_rows = np.concatenate(rows) if rows else np.empty(0, int)
        self._fixed_cols = np.concatenate(cols)
        self._fixed_vals = np.concatenate(vals)
        self.size = n + p + m
        self._reg_idx = np.arange(self.size)
        self._reg_sign = np.concatenate(
            [np.ones(n), -np.ones(p), -np.ones(m)])

    def factor(self, scaling: NTScaling, reg: float):
        wr, wc, wv = scaling.wtw_triplets()
        rows = np.concatenate([self._fixed_rows, wr + self.n + self.p,
                               self._reg_idx])
        cols = np.concatenate([self._fixed_cols, wc + self.n + self.p,
                               self._reg_idx])
        vals = np.concatenate([self._fixed_vals, -wv, reg * self._reg_sign])
        kkt = sp.csc_matrix((vals, (rows, cols)),
                            shape=(self.size, self.size))
        return spla.splu(kkt, permc_spec="COLAMD")


class InteriorPointSolver:
    def __init__(self, prog: ConicProgram, tol: float = 1e-8,
                 max_iter: int = 100):
        self.orig = prog
        self.da, self.dg = _row_scales(prog)
        self.prog = ConicProgram(
            c=prog.c,
            A=sp.diags(self.da) @ prog.A if prog.n_eq else prog.A,
            b=self.da * prog.b,
            G=sp.diags(self.dg) @ prog.G if prog.n_cone_rows else prog.G,
            h=self.dg * prog.h,
            cones=prog.cones, var_names=prog.var_names)
        self.tol = tol
        self.max_iter = max_iter
        self.ws = ConeWorkspace(prog.cones)
        self.kkt = _KktSystem(self.prog)
        self._iter_refine = 1

    def _unscale(self, sol: ConicSolution) -> ConicSolution:
        """Map duals/slacks back to the original row scaling and recompute
        the reported residuals against the unscaled data."""
        o = self.orig
        y = self.da * sol.y if sol.y is not None else None
        z = self.dg * sol.z if sol.z is not None else None
        s = sol.s / self.dg if sol.s is not None else None
        fields = dict(x=sol.x, status=sol.status,
                      primal_residual=sol.primal_residual,
                      dual_residual=sol.dual_residual, gap=sol.gap,
                      iterations=sol.iterations, solve_time=sol.solve_time,
                      objective=sol.objective, y=y, z=z, s=s)
        if sol.status == "optimal" and np.all(np.isfinite(sol.x)):
            pres = max(
                np.linalg.norm(o.A @ sol.x - o.b) / (1 + np.linalg.norm(o.b)),
                np.linalg.norm(o.G @ sol.x + s - o.h)
                / (1 + np.linalg.norm(o.h)))
            dres = np.linalg.norm(o.A.T @ y + o.G.T @ z + o.c) \
                / (1 + np.linalg.norm(o.c))
            gap_c = max(float(s @ z), 0.0)
            relgap = gap_c / max(1.0, abs(sol.objective))
            fields.update(primal_residual=float(pres),
                          dual_residual=float(dres), gap=float(relgap))
        return ConicSolution(**fields)

    # -- residuals --------------------------------------------------------

    def _apply_kkt(self, scaling: NTScaling, sol: np.ndarray) -> np.ndarray:
        prog = self.prog
        n, p = prog.n_vars, prog.n_eq
        dx, dy, dz = sol[:n], sol[n:n + p], sol[n + p:]
        out = np.empty_like(sol)
        out[:n] = prog.A.T @ dy + prog.G.T @ dz
        out[n:n + p] = prog.A @ dx
        out[n + p:] = prog.G @ dx - scaling.apply_w(scaling.apply_w(dz))
        return out

    def _solve_kkt(self, lu, scaling: NTScaling, rhs: np.ndarray) -> np.ndarray:
        sol = lu.solve(rhs)
        for _ in range(self._iter_refine):
            resid = rhs - self._apply_kkt(scaling, sol)
            sol = sol + lu.solve(resid)
        return sol

    def solve(self) -> ConicSolution:
        prog = self.prog
        t0 = time.perf_counter()
        n, p, m = prog.n_vars, prog.n_eq, prog.n_cone_rows
        if n == 0:
            return ConicSolution(
                x=np.zeros(0), status="optimal", primal_residual=0.0,
                dual_residual=0.0, gap=0.0, iterations=0,
                solve_time=time.perf_counter() - t0, objective=0.0,
                y=np.zeros(p), z=np.zeros(m), s=np.zeros(m))
        A, b, G, h, c = prog.A, prog.b, prog.G, prog.h, prog.c
        ws = self.ws
        e = ws.identity()
        degree = prog.cones.degree + 1

        norm_b = 1.0 + np.linalg.norm(b)
        norm_h = 1.0 + np.linalg.norm(h)
        norm_c = 1.0 + np.linalg.norm(c)

        # -- initial point (identity scaling) ------------------------------
        try:
            eye = _IdentityScaling(ws)
            lu = self.kkt.factor(eye, reg=0.0)
            rhs = np.concatenate([np.zeros(n), b, h])
            sol = lu.solve(rhs)
            x = sol[:n]
            s = -sol[n + p:]
            rhs = np.concatenate([-c, np.zeros(p), np.zeros(m)])
            sol = lu.solve(rhs)
            y = sol[n:n + p]
            z = sol[n + p:]
        except RuntimeError:
            x, y = np.zeros(n), np.zeros(p)
            s, z = e.copy(), e.copy()
        for vec in (s, z):
            margin = ws.margin(vec)
            if not np.isfinite(margin):
                vec[:] = e
            elif margin < 1e-8:
                vec += (1.0 - margin) * e
        tau, kappa = 1.0, 1.0

        best = None
        best_merit = np.inf
        best_cert = None
        best_cert_res = np.inf
        stall = 0
        status = "max_iter"
        iterations = 0
        for it in range(self.max_iter):
            iterations = it
            # residuals of the embedding
            rx = A.T @ y + G.T @ z + c * tau
            ry = -(A @ x) + b * tau
            rz = -(G @ x) - s + h * tau
            rtau = -(c @ x) - (b @ y) - (h @ z) - kappa

            # convergence / certificates on the de-homogenized candidate
            xc, yc, zc, sc = x / tau, y / tau, z / tau, s / tau
            pres = max(np.linalg.norm(A @ xc - b) / norm_b,
                       np.linalg.norm(G @ xc + sc - h) / norm_h)
            dres = np.linalg.norm(A.T @ yc + G.T @ zc + c) / norm_c
            pobj = c @ xc
            dobj = -(b @ yc) - (h @ zc)
            gap_c = max(sc @ zc, 0.0)
            relgap = gap_c / max(1.0, abs(pobj), abs(dobj))
            merit = max(pres, dres, min(relgap, gap_c))
            improved = np.isfinite(merit) and merit < best_merit
            if improved:
                best_merit = merit
                best = ConicSolution(
                    x=xc.copy(), status="optimal", primal_residual=float(pres),
                    dual_residual=float(dres), gap=float(relgap),
                    iterations=it, solve_time=0.0, objective=float(pobj),
                    y=yc.copy(), z=zc.copy(), s=sc.copy())
            if pres <= self.tol and dres <= self.tol and \
                    (relgap <= self.tol or gap_c <= self.tol ** 1.5):
                status = "optimal"
                break

            # infeasibility certificates (Farkas witnesses); valid on their
            # own residuals, with tau << kappa confirming the embedding ray
            ray_mode = tau <= 1e-3 * max(1.0, kappa)
            hz_by = b @ y + h @ z
            if hz_by < 0:
                yi, zi = y / -hz_by, z / -hz_by
                pinf = np.linalg.norm(A.T @ yi + G.T @ zi) / norm_c
                if pinf < best_cert_res:
                    best_cert_res = pinf
                    improved = True
                    best_cert = ConicSolution(
                        x=np.full(n, np.nan), status="primal_infeasible",
                        primal_residual=float(pinf), dual_residual=np.inf,
                        gap=np.inf, iterations=it, solve_time=0.0,
                        objective=np.nan, y=yi.copy(), z=zi.copy(), s=None)
                if pinf <= self.tol and ray_mode:
                    status = "primal_infeasible"
                    best = best_cert
                    break
            cx = c @ x
            if cx < 0:
                xi, si = x / -cx, s / -cx
                dinf = max(np.linalg.norm(A @ xi) / norm_b,
                           np.linalg.norm(G @ xi + si) / norm_h)
                if dinf < best_cert_res:
                    best_cert_res = dinf
                    improved = True
                    best_cert = ConicSolution(
                        x=xi.copy(), status="dual_infeasible",
                        primal_residual=np.inf, dual_residual=float(dinf),
                        gap=np.inf, iterations=it, solve_time=0.0,
                        objective=-1.0, y=None, z=None, s=si.copy())
                if dinf <= self.tol and ray_mode:
                    status = "dual_infeasible"
                    best = best_cert
                    break
            stall = 0 if improved else stall + 1
            if stall >= 8:
                # numerical floor reached; fall back to the best iterate
                break

            # -- Newton directions ----------------------------------------
            if ws.margin(s) <= 0 or ws.margin(z) <= 0:
                status = "numerical_failure"
                break
            scaling = NTScaling(ws, s, z)
            lam = scaling.lam
            mu = (s @ z + tau * kappa) / degree
            lu = None
            for reg in (0.0, 1e-10, 1e-8):
                try:
                    lu = self.kkt.factor(scaling, reg)
                    break
                except RuntimeError:
                    continue
            if lu is None:
                status = "numerical_failure"
                break

            rhs_w = np.concatenate([-c, b, h])
            w_dir = self._solve_kkt(lu, scaling, rhs_w)
            wx, wy, wz = w_dir[:n], w_dir[n:n + p], w_dir[n + p:]
            denom_w = kappa / tau - (c @ wx + b @ wy + h @ wz)

            def newton(eta: float, ds: np.ndarray, dkappa: float):
                dsl = scaling.lambda_jsolve(ds)
                rhs = np.concatenate([
                    -eta * rx,
                    eta * ry,
                    eta * rz - scaling.apply_w(dsl)])
                u = self._solve_kkt(lu, scaling, rhs)
                ux, uy, uz = u[:n], u[n:n + p], u[n + p:]
                num = (-eta * rtau + dkappa / tau
                       + c @ ux + b @ uy + h @ uz)
                dtau = num / denom_w
                dx = ux + dtau * wx
                dy = uy + dtau * wy
                dz = uz + dtau * wz
                dsvec = scaling.apply_w(dsl - scaling.apply_w(dz))
                dk = (dkappa - kappa * dtau) / tau
                return dx, dy, dz, dsvec, dtau, dk

            # predictor
            ds_aff = -scaling.lambda_jprod(lam, lam)
            dxa, dya, dza, dsa, dta, dka = newton(1.0, ds_aff, -tau * kappa)
            alpha_aff = self._max_step(s, z, tau, kappa, dsa, dza, dta, dka)
            alpha_aff = min(1.0, alpha_aff)
            sigma = (1.0 - alpha_aff) ** 3

            # corrector
            corr = scaling.lambda_jprod(scaling.apply_winv(dsa),
                                        scaling.apply_w(dza))
            ds_comb = ds_aff - corr + sigma * mu * e
            dk_comb = -tau * kappa - dta * dka + sigma * mu
            dx, dy, dz, dsvec, dtau, dk = newton(1.0 - sigma, ds_comb, dk_comb)
            alpha = self._max_step(s, z, tau, kappa, dsvec, dz, dtau, dk)
            alpha = min(1.0, STEP_FRACTION * alpha)
            if not np.isfinite(alpha) or alpha <= 1e-14:
                status = "numerical_failure"
                break

            x += alpha * dx
            y += alpha * dy
            z += alpha * dz
            s += alpha * dsvec
            tau += alpha * dtau
            kappa += alpha * dk
            if tau <= 0 or kappa < 0:
                status = "numerical_failure"
                break

        solve_time = time.perf_counter() - t0
        if status in ("max_iter", "numerical_failure") and \
                best_cert is not None and best_cert_res <= 10 * self.tol \
                and best_merit > best_cert_res:
            # never reached optimality but holds a proof-grade Farkas ray
            best = best_cert
            status = best_cert.status
        sol = best if best is not None else ConicSolution(
            x=np.full(n, np.nan), status="numerical_failure",
            primal_residual=np.inf, dual_residual=np.inf, gap=np.inf,
            iterations=iterations, solve_time=solve_time, objective=np.nan)
        if sol.status == "optimal" and status != "optimal":
            # loop ended early; the best iterate may still meet tolerances
            if not (sol.primal_residual <= self.tol
                    and sol.dual_residual <= self.tol
                    and sol.gap <= self.tol):
                sol = _with(sol, status=status)
        return self._unscale(_with(sol, solve_time=solve_time,
                                   iterations=iterations))

    def _max_step(self, s, z, tau, kappa, ds, dz, dtau, dkappa) -> float:
        alpha = min(self.ws.max_step(s, ds), self.ws.max_step(z, dz))
        if dtau < 0:
            alpha = min(alpha, -tau / dtau)
        if dkappa < 0:
            alpha = min(alpha, -kappa / dkappa)
        return alpha


class _IdentityScaling:
    """Stand-in scaling (W = I) for the initialization solve."""

    def __init__(self, ws: ConeWorkspace):
        self.ws = ws

    def wtw_triplets(self):
        idx = np.arange(self.ws.m)
        return idx, idx, np.ones(self.ws.m)

    def apply_w(self, u):
        return u


def _with(sol: ConicSolution, **kw) -> ConicSolution:
    data = {
        "x": sol.x, "status": sol.status,
        "primal_residual": sol.primal_residual,
        "dual_residual": sol.dual_residual, "gap": sol.gap,
        "iterations": sol.iterations, "solve_time": sol.solve_time,
        "objective": sol.objective, "y": sol.y, "z": sol.z, "s": sol.s,
    }
    data.update(kw)
    return ConicSolution(**data)
