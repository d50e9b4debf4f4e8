"""Self-contained cone programming: standard form, solvers, statistics.

Two interchangeable backends sit behind :func:`solve`: a primal-dual
interior-point method (default; fast to tight tolerances) and a first-order
operator-splitting method (simple, warm-startable).  Both report the same
:class:`ConicSolution` contract, including infeasibility certificates.
"""

from __future__ import annotations

from .admm import SplittingSolver
from .ipm import InteriorPointSolver
from .program import (ConeLayout, ConicProgram, ConicSolution, ProgramBuilder,
                      append_nonneg_rows, dump_program, extend_with_epigraphs,
                      kkt_stats, load_program)

BACKENDS = ("ipm", "splitting")


def solve(prog: ConicProgram, tol: float = 1e-8, max_iter: int = 100,
          backend: str = "ipm",
          warm_start: ConicSolution | None = None) -> ConicSolution:
    """Solve a cone program with the selected backend.

    ``max_iter`` is interpreted per backend (Newton steps for the
    interior-point method; the splitting backend multiplies it by 500 since
    its iterations are far cheaper).  ``warm_start`` is used when the backend
    supports it and is otherwise ignored; results may differ only within the
    solve tolerance.
    """
    if backend == "ipm":
        return InteriorPointSolver(prog, tol=tol, max_iter=max_iter).solve()
    if backend == "splitting":
        return SplittingSolver(prog, tol=tol,
                               max_iter=max_iter * 500).solve(warm=warm_start)
    raise ValueError(f"unknown backend {backend!r} (expected one of {BACKENDS})")


__all__ = [
    "BACKENDS", "ConeLayout", "ConicProgram", "ConicSolution",
    "InteriorPointSolver", "ProgramBuilder", "SplittingSolver",
    "append_nonneg_rows", "dump_program", "extend_with_epigraphs",
    "kkt_stats", "load_program", "solve",
]
