"""Cone operations for the nonnegative orthant and second-order cones.

Second-order cone blocks are grouped by dimension so all per-cone work runs
as batched numpy operations; with thousands of small cones this keeps the
python overhead at the number of distinct dimensions, not the number of
cones.

The Nesterov-Todd scaling for an SOC block is represented by the pair
(eta, v) with ``W = eta (2 v v' - J)``, ``J = diag(1, -I)``, ``v'Jv = 1``.
That form gives closed expressions for W u, W^{-1} u (via J v) and the dense
W^2 blocks assembled into the Newton system.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .program import ConeLayout


@dataclass(frozen=True)
class SocGroup:
    dim: int
    starts: np.ndarray  # row offsets of each cone of this dimension

    def gather(self, vec: np.ndarray) -> np.ndarray:
        """(count, dim) view of the cones of this group."""
        return vec[self.starts[:, None] + np.arange(self.dim)[None, :]]

    def scatter(self, vec: np.ndarray, block: np.ndarray) -> None:
        vec[self.starts[:, None] + np.arange(self.dim)[None, :]] = block


class ConeWorkspace:
    """Precomputed index structure for one cone layout."""

    def __init__(self, layout: ConeLayout):
        self.layout = layout
        self.l = layout.nonneg
        self.m = layout.total_rows
        groups: dict[int, list[int]] = {}
        offset = self.l
        for d in layout.soc_dims:
            groups.setdefault(d, []).append(offset)
            offset += d
        self.groups = [SocGroup(d, np.array(starts, dtype=int))
                       for d, starts in sorted(groups.items())]

    def identity(self) -> np.ndarray:
        e = np.zeros(self.m)
        e[:self.l] = 1.0
        for g in self.groups:
            e[g.starts] = 1.0
        return e

    def margin(self, u: np.ndarray) -> float:
        """Distance-like interior margin: min over cones of the slack."""
        vals = [np.min(u[:self.l])] if self.l else []
        for g in self.groups:
            blk = g.gather(u)
            vals.append(np.min(blk[:, 0] - np.linalg.norm(blk[:, 1:], axis=1)))
        return float(min(vals)) if vals else np.inf

    def project(self, u: np.ndarray) -> np.ndarray:
        """Euclidean projection onto the cone."""
        out = u.copy()
        out[:self.l] = np.maximum(u[:self.l], 0.0)
        for g in self.groups:
            blk = g.gather(u)
            t = blk[:, 0]
            norms = np.linalg.norm(blk[:, 1:], axis=1)
            inside = t >= norms
            below = norms <= -t
            boundary = ~inside & ~below
            proj = blk.copy()
            proj[below] = 0.0
            if np.any(boundary):
                alpha = 0.5 * (1.0 + t[boundary] / norms[boundary])
                proj[boundary, 0] = alpha * norms[boundary]
                proj[boundary, 1:] = alpha[:, None] * blk[boundary, 1:]
            g.scatter(out, proj)
        return out

    def max_step(self, u: np.ndarray, du: np.ndarray) -> float:
        """Largest alpha >= 0 with u + alpha du still in the cone.

        u must be in the cone interior; returns np.inf when unbounded.
        """
        alpha = np.inf
        if self.l:
            neg = du[:self.l] < 0
            if np.any(neg):
                alpha = min(alpha, float(
                    np.min(-u[:self.l][neg] / du[:self.l][neg])))
        for g in self.groups:
            ub = g.gather(u)
            db = g.gather(du)
            # exit at the first positive root of the boundary quadratic
            # (u0 + a d0)^2 - ||u1 + a d1||^2, or of the plane u0 + a d0 = 0
            a = db[:, 0] ** 2 - np.einsum("ij,ij->i", db[:, 1:], db[:, 1:])
            bq = 2.0 * (ub[:, 0] * db[:, 0]
                        - np.einsum("ij,ij->i", ub[:, 1:], db[:, 1:]))
            cq = np.maximum(jdot(ub), 0.0)
            cand = np.full(a.shape, np.inf)
            with np.errstate(divide="ignore", invalid="ignore"):
                lin = a == 0.0
                linneg = lin & (bq < 0)
                cand[linneg] = -cq[linneg] / bq[linneg]
                disc = bq * bq - 4.0 * a * cq
                quad = ~lin & (disc >= 0)
                if np.any(quad):
                    sq = np.sqrt(disc[quad])
                    roots = np.stack([(-bq[quad] - sq) / (2.0 * a[quad]),
                                      (-bq[quad] + sq) / (2.0 * a[quad])])
                    roots[~(roots > 0)] = np.inf
                    cand[quad] = roots.min(axis=0)
                plane = db[:, 0] < 0
                hp = np.full(a.shape, np.inf)
                hp[plane] = -ub[plane, 0] / db[plane, 0]
            cand = np.minimum(cand, hp)
            if cand.size:
                alpha = min(alpha, float(cand.min()))
        return alpha


def jdot(u: np.ndarray) -> np.ndarray:
    """Rowwise hyperbolic norm u0^2 - ||u1||^2 for an (count, d) block."""
    return u[:, 0] ** 2 - np.einsum("ij,ij->i", u[:, 1:], u[:, 1:])


def jprod(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Rowwise Jordan product (u'w; u0 w1 + w0 u1)."""
    out = np.empty_like(u)
    out[:, 0] = np.einsum("ij,ij->i", u, w)
    out[:, 1:] = u[:, 0:1] * w[:, 1:] + w[:, 0:1] * u[:, 1:]
    return out


def jsolve(lam: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Rowwise arrow-matrix solve of lam o x = d."""
    det = jdot(lam)
    l0 = lam[:, 0]
    lt = lam[:, 1:]
    d0 = d[:, 0]
    dt = d[:, 1:]
    ltd = np.einsum("ij,ij->i", lt, dt)
    x = np.empty_like(d)
    x[:, 0] = (l0 * d0 - ltd) / det
    x[:, 1:] = (dt - x[:, 0:1] * lt) / l0[:, None]
    return x


class NTScaling:
    """Nesterov-Todd scaling point for a (s, z) pair in the cone interior."""

    def __init__(self, ws: ConeWorkspace, s: np.ndarray, z: np.ndarray):
        self.ws = ws
        l = ws.l
        self.w_lin = np.sqrt(s[:l] / z[:l]) if l else np.empty(0)
        self.eta: list[np.ndarray] = []
        self.v: list[np.ndarray] = []
        for g in ws.groups:
            sb = g.gather(s)
            zb = g.gather(z)
            # cone margins are checked upstream; clamp so that boundary
            # underflow degrades to a detectable breakdown, not a warning
            snorm = np.sqrt(np.maximum(jdot(sb), 1e-280))
            znorm = np.sqrt(np.maximum(jdot(zb), 1e-280))
            sbar = sb / snorm[:, None]
            zbar = zb / znorm[:, None]
            gamma = np.sqrt((1.0 + np.einsum("ij,ij->i", sbar, zbar)) / 2.0)
            wbar = np.empty_like(sb)
            wbar[:, 0] = (sbar[:, 0] + zbar[:, 0]) / (2.0 * gamma)
            wbar[:, 1:] = (sbar[:, 1:] - zbar[:, 1:]) / (2.0 * gamma[:, None])
            v = wbar.copy()
            v[:, 0] += 1.0
            v /= np.sqrt(2.0 * (wbar[:, 0] + 1.0))[:, None]
            self.eta.append(np.sqrt(snorm / znorm))
            self.v.append(v)
        self.lam = self.apply_w(z)

    def apply_w(self, u: np.ndarray) -> np.ndarray:
        """W u with W = eta (2 v v' - J)."""
        out = np.empty_like(u)
        l = self.ws.l
        out[:l] = self.w_lin * u[:l]
        for g, eta, v in zip(self.ws.groups, self.eta, self.v):
            ub = g.gather(u)
            vu = np.einsum("ij,ij->i", v, ub)
            res = 2.0 * v * vu[:, None]
            res[:, 0] -= ub[:, 0]
            res[:, 1:] += ub[:, 1:]
            g.scatter(out, eta[:, None] * res)
        return out

    def apply_winv(self, u: np.ndarray) -> np.ndarray:
        """W^{-1} u; uses (2vv'-J)^{-1} = 2(Jv)(Jv)' - J."""
        out = np.empty_like(u)
        l = self.ws.l
        out[:l] = u[:l] / self.w_lin
        for g, eta, v in zip(self.ws.groups, self.eta, self.v):
            ub = g.gather(u)
            jv = v.copy()
            jv[:, 1:] *= -1.0
            vu = np.einsum("ij,ij->i", jv, ub)
            res = 2.0 * jv * vu[:, None]
            res[:, 0] -= ub[:, 0]
            res[:, 1:] += ub[:, 1:]
            g.scatter(out, res / eta[:, None])
        return out

    def wtw_triplets(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """COO triplets of the symmetric matrix W'W = W^2."""
        rows = [np.arange(self.ws.l)]
        cols = [np.arange(self.ws.l)]
        vals = [self.w_lin ** 2]
        for g, eta, v in zip(self.ws.groups, self.eta, self.v):
            d = g.dim
            count = v.shape[0]
            jv = v.copy()
            jv[:, 1:] *= -1.0
            vv = np.einsum("ik,il->ikl", v, v)
            vjv = np.einsum("ik,il->ikl", v, jv)
            blocks = (4.0 * np.einsum("ij,ij->i", v, v)[:, None, None] * vv
                      - 2.0 * (vjv + np.transpose(vjv, (0, 2, 1))))
            blocks[:, np.arange(d), np.arange(d)] += 1.0
            blocks *= (eta ** 2)[:, None, None]
            rr = (g.starts[:, None, None]
                  + np.arange(d)[None, :, None]).repeat(d, axis=2)
            cc = (g.starts[:, None, None]
                  + np.arange(d)[None, None, :]).repeat(d, axis=1)
            rows.append(rr.ravel())
            cols.append(cc.ravel())
            vals.append(blocks.ravel())
        return (np.concatenate(rows), np.concatenate(cols),
                np.concatenate(vals))

    def lambda_jsolve(self, dvec: np.ndarray) -> np.ndarray:
        """Solve lam o x = d blockwise against the scaled point."""
        out = np.empty_like(dvec)
        l = self.ws.l
        out[:l] = dvec[:l] / self.lam[:l]
        for g in self.ws.groups:
            out_blk = jsolve(g.gather(self.lam), g.gather(dvec))
            g.scatter(out, out_blk)
        return out

    def lambda_jprod(self, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Jordan product u o w blockwise (for Mehrotra correction)."""
        out = np.empty_like(u)
        l = self.ws.l
        out[:l] = u[:l] * w[:l]
        for g in self.ws.groups:
            g.scatter(out, jprod(g.gather(u), g.gather(w)))
        return out
