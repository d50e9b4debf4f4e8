"""Standard-form cone program container, assembly helpers and statistics.

Programs are stored as

    minimize    c'x
    subject to  A x = b
                G x + s = h,   s in K

with K a product of a nonnegative orthant (first ``nonneg`` rows of G) and
second-order cones (one block of rows per cone, in order).  Quadratic costs
are already reformulated as SOC epigraphs by the layer that builds the
program, so the objective is always linear here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..dc import AffExpr


@dataclass(frozen=True)
class ConeLayout:
    """Row layout of K: ``nonneg`` scalar rows then SOC blocks."""

    nonneg: int
    soc_dims: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "soc_dims", tuple(int(d) for d in self.soc_dims))
        if self.nonneg < 0:
            raise ValueError("nonneg count must be >= 0")
        for d in self.soc_dims:
            if d < 2:
                raise ValueError(f"SOC dimension must be >= 2, got {d}")

    @property
    def total_rows(self) -> int:
        return self.nonneg + sum(self.soc_dims)

    @property
    def degree(self) -> int:
        # barrier degree: 1 per nonneg row, 1 per second-order cone
        return self.nonneg + len(self.soc_dims)


@dataclass(frozen=True)
class ConicProgram:
    c: np.ndarray
    A: sp.csr_matrix
    b: np.ndarray
    G: sp.csr_matrix
    h: np.ndarray
    cones: ConeLayout
    var_names: tuple[str, ...] = ()

    def __post_init__(self):
        n = self.c.shape[0]
        if self.A.shape[1] != n or self.G.shape[1] != n:
            raise ValueError("A/G column count disagrees with c")
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A row count disagrees with b")
        if self.G.shape[0] != self.h.shape[0]:
            raise ValueError("G row count disagrees with h")
        if self.cones.total_rows != self.G.shape[0]:
            raise ValueError("cone layout does not cover the rows of G")
        if self.var_names and len(self.var_names) != n:
            raise ValueError("variable name table length disagrees with c")

    @property
    def n_vars(self) -> int:
        return int(self.c.shape[0])

    @property
    def n_eq(self) -> int:
        return int(self.A.shape[0])

    @property
    def n_cone_rows(self) -> int:
        return int(self.G.shape[0])

    def objective(self, x: np.ndarray) -> float:
        return float(self.c @ x)


@dataclass(frozen=True)
class ConicSolution:
    x: np.ndarray
    status: str  # optimal | primal_infeasible | dual_infeasible | max_iter | numerical_failure
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    solve_time: float
    objective: float
    y: np.ndarray | None = None  # equality duals (certificate on infeasibility)
    z: np.ndarray | None = None  # cone duals
    s: np.ndarray | None = None  # cone slacks

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class _TripletBuffer:
    def __init__(self):
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.rhs: list[float] = []

    def add_row(self, expr: AffExpr, rhs: float, negate: bool):
        """Append one row; with ``negate`` the row stores -coeffs (cone rows
        encode s = h - Gx, so the slack equals the expression value)."""
        r = len(self.rhs)
        sign = -1.0 if negate else 1.0
        for i, cval in zip(expr.ids, expr.coeffs):
            if cval != 0.0:
                self.rows.append(r)
                self.cols.append(i)
                self.vals.append(sign * cval)
        self.rhs.append(rhs)

    def copy(self) -> "_TripletBuffer":
        out = _TripletBuffer()
        out.rows = list(self.rows)
        out.cols = list(self.cols)
        out.vals = list(self.vals)
        out.rhs = list(self.rhs)
        return out

    def matrix(self, n_cols: int) -> tuple[sp.csr_matrix, np.ndarray]:
        mat = sp.coo_matrix(
            (self.vals, (self.rows, self.cols)),
            shape=(len(self.rhs), n_cols)).tocsr()
        mat.sum_duplicates()
        mat.eliminate_zeros()
        return mat, np.array(self.rhs, dtype=float)


class ProgramBuilder:
    """Incremental assembly of a ConicProgram from affine expressions.

    Equality rows are ``expr == 0`` (constants move to b), nonneg rows are
    ``expr >= 0`` and SOC blocks are ``(expr_0, expr_1, ...) in Q`` i.e.
    ``expr_0 >= ||rest||_2``.  Objective terms are linear; quadratic costs go
    through :meth:`add_sq_epigraph`.
    """

    def __init__(self, n_vars: int, var_names: Sequence[str] | None = None):
        self.n_vars = n_vars
        self.var_names = list(var_names) if var_names is not None else [
            f"x{i}" for i in range(n_vars)]
        self._cost = np.zeros(n_vars)
        self._eq = _TripletBuffer()
        self._nonneg = _TripletBuffer()
        self._soc = _TripletBuffer()
        self._soc_dims: list[int] = []

    def copy(self) -> "ProgramBuilder":
        out = ProgramBuilder(self.n_vars, self.var_names)
        out._cost = self._cost.copy()
        out._eq = self._eq.copy()
        out._nonneg = self._nonneg.copy()
        out._soc = self._soc.copy()
        out._soc_dims = list(self._soc_dims)
        return out

    def new_var(self, name: str) -> int:
        self.var_names.append(name)
        self.n_vars += 1
        self._cost = np.append(self._cost, 0.0)
        return self.n_vars - 1

    def add_cost(self, var: int, coeff: float):
        self._cost[var] += coeff

    def add_eq(self, expr: AffExpr):
        """expr == 0 (the constant moves to the b side)."""
        self._eq.add_row(expr, -expr.const, negate=False)

    def add_nonneg(self, expr: AffExpr):
        """expr >= 0."""
        self._nonneg.add_row(expr, expr.const, negate=True)

    def add_soc(self, exprs: Sequence[AffExpr]):
        """(exprs[0]; exprs[1:]) in a second-order cone."""
        if len(exprs) < 2:
            raise ValueError("SOC block needs at least 2 rows")
        for e in exprs:
            self._soc.add_row(e, e.const, negate=True)
        self._soc_dims.append(len(exprs))

    def add_sq_epigraph(self, exprs: Sequence[AffExpr], weight: float = 1.0,
                        name: str = "epi") -> int:
        """Add variable t with ``sum_i exprs[i]^2 <= t`` and cost weight*t.

        Returns the id of t.  Uses the rotated-cone encoding
        ``||(2u, t-1)|| <= t+1``.
        """
        t = self.new_var(name)
        tvar = AffExpr.var(t)
        block = [tvar + 1.0]
        block.extend(2.0 * e for e in exprs)
        block.append(tvar - 1.0)
        self.add_soc(block)
        self.add_cost(t, weight)
        return t

    @property
    def n_eq_rows(self) -> int:
        return len(self._eq.rhs)

    def build(self) -> ConicProgram:
        A, b = self._eq.matrix(self.n_vars)
        Gn, hn = self._nonneg.matrix(self.n_vars)
        Gs, hs = self._soc.matrix(self.n_vars)
        G = sp.vstack([Gn, Gs], format="csr") if Gs.shape[0] else Gn
        h = np.concatenate([hn, hs])
        return ConicProgram(
            c=self._cost.copy(), A=A, b=b, G=G, h=h,
            cones=ConeLayout(nonneg=len(hn), soc_dims=tuple(self._soc_dims)),
            var_names=tuple(self.var_names))


def append_nonneg_rows(prog: ConicProgram,
                       exprs: Sequence[AffExpr]) -> ConicProgram:
    """New program with extra ``expr >= 0`` rows spliced into the nonneg block."""
    buf = _TripletBuffer()
    for e in exprs:
        buf.add_row(e, e.const, negate=True)
    Gx, hx = buf.matrix(prog.n_vars)
    l = prog.cones.nonneg
    G = sp.vstack([prog.G[:l], Gx, prog.G[l:]], format="csr")
    h = np.concatenate([prog.h[:l], hx, prog.h[l:]])
    return ConicProgram(
        c=prog.c, A=prog.A, b=prog.b, G=G, h=h,
        cones=ConeLayout(prog.cones.nonneg + len(hx), prog.cones.soc_dims),
        var_names=prog.var_names)


def extend_with_epigraphs(prog: ConicProgram,
                          groups: Sequence[Sequence[AffExpr]],
                          weights: Sequence[float],
                          name: str = "penalty") -> ConicProgram:
    """New program with one epigraph variable per expression group.

    For each group adds a fresh variable t with ``sum_i group[i]^2 <= t`` and
    objective weight ``weights[g]``.  Used for iteration-specific penalty
    terms that must not disturb the base program's layout.
    """
    if not groups:
        return prog
    n = prog.n_vars
    n_new = len(groups)
    buf = _TripletBuffer()
    for g, exprs in enumerate(groups):
        tcol = n + g
        row0 = len(buf.rhs)
        buf.rows.append(row0)
        buf.cols.append(tcol)
        buf.vals.append(-1.0)
        buf.rhs.append(1.0)
        for e in exprs:
            buf.add_row(2.0 * e, 2.0 * e.const, negate=True)
        rowN = len(buf.rhs)
        buf.rows.append(rowN)
        buf.cols.append(tcol)
        buf.vals.append(-1.0)
        buf.rhs.append(-1.0)
    Gx, hx = buf.matrix(n + n_new)
    pad_eq = sp.csr_matrix((prog.n_eq, n_new))
    pad_g = sp.csr_matrix((prog.n_cone_rows, n_new))
    G = sp.vstack([sp.hstack([prog.G, pad_g], format="csr"), Gx], format="csr")
    h = np.concatenate([prog.h, hx])
    A = sp.hstack([prog.A, pad_eq], format="csr")
    c = np.concatenate([prog.c, np.asarray(weights, dtype=float)])
    dims = prog.cones.soc_dims + tuple(2 + len(g) for g in groups)
    names = prog.var_names + tuple(
        f"{name}[{g}]" for g in range(n_new)) if prog.var_names else ()
    return ConicProgram(c=c, A=A, b=prog.b, G=G, h=h,
                        cones=ConeLayout(prog.cones.nonneg, dims),
                        var_names=names)


def kkt_stats(prog: ConicProgram) -> dict[str, int]:
    """Problem-size statistics under this package's counting convention.

    ``kkt_size`` is the order of the Newton system (variables + equality +
    cone rows); ``kkt_nnz`` counts the off-diagonal A/G blocks twice, the
    static diagonal, and dense d^2 scaling blocks per second-order cone.
    """
    n, p = prog.n_vars, prog.n_eq
    l = prog.cones.nonneg
    soc = prog.cones.soc_dims
    m = prog.n_cone_rows
    return {
        "variables": n,
        "lin_eq": p,
        "lin_ineq": l,
        "soc_count": len(soc),
        "soc_rows": m - l,
        "kkt_size": n + p + m,
        "kkt_nnz": (n + p + 2 * int(prog.A.nnz) + 2 * int(prog.G.nnz)
                    + l + sum(d * d for d in soc)),
    }


# --------------------------------------------------------------------------
# sparse text dump (for cross-checking against external solvers)
# --------------------------------------------------------------------------

def dump_program(prog: ConicProgram) -> str:
    out = ["momplan-conic 1", f"n {prog.n_vars}"]
    for i, v in enumerate(prog.c):
        if v != 0.0:
            out.append(f"c {i} {float(v)!r}")
    acoo = prog.A.tocoo()
    for i, j, v in zip(acoo.row, acoo.col, acoo.data):
        out.append(f"A {i} {j} {float(v)!r}")
    for i, v in enumerate(prog.b):
        if v != 0.0:
            out.append(f"b {i} {float(v)!r}")
    gcoo = prog.G.tocoo()
    for i, j, v in zip(gcoo.row, gcoo.col, gcoo.data):
        out.append(f"G {i} {j} {float(v)!r}")
    for i, v in enumerate(prog.h):
        if v != 0.0:
            out.append(f"h {i} {float(v)!r}")
    out.append(f"eqrows {prog.n_eq}")
    out.append(f"nonneg {prog.cones.nonneg}")
    for d in prog.cones.soc_dims:
        out.append(f"soc {d}")
    out.append("end")
    return "\n".join(out) + "\n"


def load_program(text: str) -> ConicProgram:
    n = None
    eqrows = 0
    nonneg = 0
    soc: list[int] = []
    centries: list[tuple[int, float]] = []
    a_trip: list[tuple[int, int, float]] = []
    b_entries: list[tuple[int, float]] = []
    g_trip: list[tuple[int, int, float]] = []
    h_entries: list[tuple[int, float]] = []
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "momplan-conic 1":
        raise ValueError("not a momplan-conic v1 dump")
    for ln in lines[1:]:
        parts = ln.split()
        tag = parts[0]
        if tag == "n":
            n = int(parts[1])
        elif tag == "c":
            centries.append((int(parts[1]), float(parts[2])))
        elif tag == "A":
            a_trip.append((int(parts[1]), int(parts[2]), float(parts[3])))
        elif tag == "b":
            b_entries.append((int(parts[1]), float(parts[2])))
        elif tag == "G":
            g_trip.append((int(parts[1]), int(parts[2]), float(parts[3])))
        elif tag == "h":
            h_entries.append((int(parts[1]), float(parts[2])))
        elif tag == "eqrows":
            eqrows = int(parts[1])
        elif tag == "nonneg":
            nonneg = int(parts[1])
        elif tag == "soc":
            soc.append(int(parts[1]))
        elif tag == "end":
            break
        else:
            raise ValueError(f"unknown dump line {ln!r}")
    if n is None:
        raise ValueError("dump missing variable count")
    m = nonneg + sum(soc)
    c = np.zeros(n)
    for i, v in centries:
        c[i] = v
    b = np.zeros(eqrows)
    for i, v in b_entries:
        b[i] = v
    h = np.zeros(m)
    for i, v in h_entries:
        h[i] = v
    A = sp.coo_matrix(
        ([v for _, _, v in a_trip],
         ([i for i, _, _ in a_trip], [j for _, j, _ in a_trip])),
        shape=(eqrows, n)).tocsr()
    G = sp.coo_matrix(
        ([v for _, _, v in g_trip],
         ([i for i, _, _ in g_trip], [j for _, j, _ in g_trip])),
        shape=(m, n)).tocsr()
    return ConicProgram(c=c, A=A, b=b, G=G, h=h,
                        cones=ConeLayout(nonneg, tuple(soc)))
