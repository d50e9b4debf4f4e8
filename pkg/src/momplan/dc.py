"""Difference-of-convex splitting of bilinear terms.

Every bilinear expression in the dynamics (cross products of the angular
momentum rate, and products with the timestep duration) is rewritten as
``x'y = 1/4 (pbar - qbar)`` with ``pbar = ||x+y||^2`` and ``qbar = ||x-y||^2``.
Both squared norms are convex by construction, so after introducing the
nonnegative scalars pbar/qbar the only nonconvexity left is the pair of
quadratic equalities ``pbar = p'p`` and ``qbar = q'q`` with known (positive)
curvature.  The pbar/qbar bookkeeping here is purely symbolic; the relaxation
layer decides how the equalities are approximated.

Only the fixed decomposition patterns the dynamics needs are provided; this
is not a general bilinear-expression compiler.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class AffExpr:
    """Affine combination ``const + sum_i coeff_i * x[id_i]`` of variables."""

    ids: tuple[int, ...] = ()
    coeffs: tuple[float, ...] = ()
    const: float = 0.0

    @staticmethod
    def var(i: int) -> "AffExpr":
        return AffExpr((i,), (1.0,), 0.0)

    @staticmethod
    def constant(c: float) -> "AffExpr":
        return AffExpr((), (), float(c))

    def _combine(self, other: "AffExpr", sign: float) -> "AffExpr":
        acc: dict[int, float] = dict(zip(self.ids, self.coeffs))
        for i, c in zip(other.ids, other.coeffs):
            acc[i] = acc.get(i, 0.0) + sign * c
        items = [(i, c) for i, c in acc.items() if c != 0.0]
        return AffExpr(tuple(i for i, _ in items), tuple(c for _, c in items),
                       self.const + sign * other.const)

    def __add__(self, other):
        return self._combine(_as_expr(other), 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(_as_expr(other), -1.0)

    def __rsub__(self, other):
        return _as_expr(other)._combine(self, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, scale: float):
        return AffExpr(self.ids, tuple(c * scale for c in self.coeffs),
                       self.const * scale)

    __rmul__ = __mul__

    def value(self, x) -> float:
        """Evaluate under a dense assignment vector (or id->value mapping)."""
        if isinstance(x, dict):
            return self.const + sum(c * x[i] for i, c in zip(self.ids, self.coeffs))
        return self.const + sum(c * x[i] for i, c in zip(self.ids, self.coeffs))


def _as_expr(x) -> AffExpr:
    if isinstance(x, AffExpr):
        return x
    return AffExpr.constant(float(x))


class VariablePool:
    """Allocator of scalar decision-variable ids with debug names."""

    def __init__(self):
        self.names: list[str] = []

    def new(self, name: str) -> int:
        self.names.append(name)
        return len(self.names) - 1

    def new_vec(self, name: str, dim: int) -> list[int]:
        return [self.new(f"{name}[{i}]") for i in range(dim)]

    @property
    def n_vars(self) -> int:
        return len(self.names)


@dataclass(frozen=True)
class DcPair:
    """One decomposed bilinear term.

    ``plus_expr``/``minus_expr`` are the affine vectors p = x + y and
    q = x - y; ``pbar_var``/``qbar_var`` are the ids of the auxiliary scalars
    standing in for ||p||^2 and ||q||^2.  The reconstructed bilinear value is
    ``1/4 (pbar - qbar)``.  ``kind`` tags the origin ("cross" or "time") so
    the refinement driver can treat time-related terms separately.
    """

    plus_expr: tuple[AffExpr, ...]
    minus_expr: tuple[AffExpr, ...]
    pbar_var: int
    qbar_var: int
    kind: str = "generic"
    label: str = ""

    def __post_init__(self):
        if len(self.plus_expr) != len(self.minus_expr):
            raise ValueError("plus/minus descriptors must have equal dimension")

    @property
    def dim(self) -> int:
        return len(self.plus_expr)

    def plus_value(self, x) -> np.ndarray:
        return np.array([e.value(x) for e in self.plus_expr])

    def minus_value(self, x) -> np.ndarray:
        return np.array([e.value(x) for e in self.minus_expr])

    def bilinear_value(self, x) -> float:
        """Exact bilinear value 1/4 (||p||^2 - ||q||^2) at an assignment."""
        p = self.plus_value(x)
        q = self.minus_value(x)
        return 0.25 * (float(p @ p) - float(q @ q))

    def reconstruct(self, pbar: float, qbar: float) -> float:
        return 0.25 * (pbar - qbar)


def split_scalar_product(x: Sequence[AffExpr], y: Sequence[AffExpr],
                         pool: VariablePool | None = None,
                         kind: str = "generic", label: str = "") -> DcPair:
    """Decompose the scalar product x'y of two affine vectors."""
    x = tuple(_as_expr(e) for e in x)
    y = tuple(_as_expr(e) for e in y)
    if len(x) != len(y):
        raise ValueError(f"dimension mismatch: {len(x)} vs {len(y)}")
    if pool is None:
        pool = VariablePool()
    return DcPair(
        plus_expr=tuple(a + b for a, b in zip(x, y)),
        minus_expr=tuple(a - b for a, b in zip(x, y)),
        pbar_var=pool.new(f"pbar:{label or kind}"),
        qbar_var=pool.new(f"qbar:{label or kind}"),
        kind=kind, label=label)


def decompose_cross_product(ell: Sequence[AffExpr], f: Sequence[AffExpr],
                            pool: VariablePool | None = None,
                            label: str = "") -> tuple[DcPair, DcPair, DcPair]:
    """Decompose ``ell x f`` componentwise into three scalar products.

    Component pairings: x uses (-ell_z, ell_y).(f_y, f_z), y uses
    (ell_z, -ell_x).(f_x, f_z) and z uses (-ell_y, ell_x).(f_x, f_y).
    """
    if len(ell) != 3 or len(f) != 3:
        raise ValueError("cross product needs 3-dimensional expressions")
    ex, ey, ez = (_as_expr(e) for e in ell)
    fx, fy, fz = (_as_expr(e) for e in f)
    if pool is None:
        pool = VariablePool()
    return (
        split_scalar_product((-ez, ey), (fy, fz), pool, "cross", f"{label}.x"),
        split_scalar_product((ez, -ex), (fx, fz), pool, "cross", f"{label}.y"),
        split_scalar_product((-ey, ex), (fx, fy), pool, "cross", f"{label}.z"),
    )


def decompose_time_bilinear(v: Sequence[AffExpr], dt: AffExpr,
                            pool: VariablePool | None = None,
                            label: str = "") -> tuple[DcPair, DcPair, DcPair]:
    """Decompose ``v * dt`` componentwise, dt scalar, v a 3-vector."""
    if len(v) != 3:
        raise ValueError("time bilinear expects a 3-dimensional expression")
    dt = _as_expr(dt)
    if pool is None:
        pool = VariablePool()
    return tuple(
        split_scalar_product((_as_expr(v[i]),), (dt,), pool, "time",
                             f"{label}[{i}]")
        for i in range(3)
    )


def total_auxiliaries(pairs: Iterable[DcPair]) -> int:
    """Number of auxiliary scalars introduced (two per pair)."""
    return 2 * sum(1 for _ in pairs)
