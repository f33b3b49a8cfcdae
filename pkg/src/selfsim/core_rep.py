"""Matrix model of the core: D^{gamma^n}, block-diagonal embeddings and Pi^(n).

A graded element ``T = T_0 + T_1 + ... + T_n`` stores one matrix field per
level; ``pi`` sends it to the level-n matrix field ``sum_r embed(T_r, n)``.
Block ``(i_{r+1}, ..., i_n)`` of ``embed(T_r, n)`` at ``x`` is
``T_r(gamma_{i_{r+1}} o ... o gamma_{i_n}(x))``, with ``i_n`` the slowest index.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .bimodule import (POINT_TOL, _collision_groups, fiber_basis, fiber_basis_from_groups,
                       random_scalar, random_z_member, rank_one)
from .fields import CHUNK, LowRankField, MatrixField, ScalarField, branch_images, as_points, evaluate_chunked, memo
from .ifs import SelfSimilarSystem
from .singularity import branch_points

__all__ = [
    "d_membership",
    "d_defect",
    "FiberAlgebra",
    "fiber_algebra",
    "EmbeddedField",
    "embed",
    "GradedCoreElement",
    "pi",
    "sup_norm",
    "compact_absorption",
    "random_graded_element",
    "random_compact",
    "frobenius_sup",
    "refined_sup_norms",
]


# ------------------------------------------------------------ D membership

def d_defect(M: MatrixField) -> float:
    """Largest row/column identification violation at the branch values of gamma^n."""
    worst = 0.0
    for c, groups in _collision_groups(M.system, M.level):
        v = M(M.system.to_float([c]))[0]
        scale = 1.0 + float(np.max(np.abs(v)))
        for g in groups:
            rows = v[g, :]
            cols = v[:, g]
            worst = max(worst,
                        float(np.max(np.abs(rows - rows[:1]))) / scale,
                        float(np.max(np.abs(cols - cols[:, :1]))) / scale)
    return worst


def d_membership(M: MatrixField, tol: float = POINT_TOL) -> bool:
    return d_defect(M) <= tol


@dataclass(frozen=True)
class FiberAlgebra:
    dimension: int
    units: np.ndarray  # (w, w, k, k) matrix units theta_{u_i, u_j}

    @property
    def matrix_size(self) -> int:
        return self.units.shape[0]


def fiber_algebra(system: SelfSimilarSystem | None = None, c=None, n: int = 1, *,
                  groups=None, size: int | None = None) -> FiberAlgebra:
    """Fiber of D^{gamma^n} at ``c``, isomorphic to M_{w_c}.

    Either pass a system and an exact point, or an explicit index partition
    ``groups`` of ``range(size)`` describing a local collision pattern.
    """
    if groups is not None:
        basis = fiber_basis_from_groups(size, groups)
    else:
        basis = fiber_basis(system, c, n)
    w = basis.dimension
    return FiberAlgebra(w * w, basis.matrix_units())


# ------------------------------------------------------------ embeddings

class EmbeddedField(MatrixField):
    """``embed(T_r, n)``: block diagonal with ``N^(n-r)`` pulled-back copies of ``T_r``."""

    def __init__(self, base: MatrixField, level: int):
        self.base = base
        super().__init__(base.system, level, self._dense, in_d=False)

    def blocks(self, X):
        return _embedded_blocks(self.base, self.level - self.base.level, X)

    def _dense(self, X):
        return _blockdiag(self.blocks(X))


def _embedded_blocks(base: MatrixField, steps: int, X) -> np.ndarray:
    X = as_points(X)
    if steps == 0:
        return base(X)[:, None]
    N, P = base.system.N, X.shape[0]
    sub = _embedded_blocks(base, steps - 1, branch_images(base.system, X))  # (N*P, B', m, m)
    Bp, m = sub.shape[1], sub.shape[2]
    return sub.reshape(N, P, Bp, m, m).transpose(1, 0, 2, 3, 4).reshape(P, N * Bp, m, m)


def _blockdiag(blocks: np.ndarray) -> np.ndarray:
    return kernels.blockdiag_lowrank(blocks.transpose(1, 0, 2, 3))


def embed(T: MatrixField, n: int) -> MatrixField:
    if T.level > n:
        raise ValueError(f"cannot embed a level-{T.level} field at level {n}")
    if T.level == n:
        return T
    return EmbeddedField(T, n)


def _embed_once(M: MatrixField) -> MatrixField:
    """``x -> diag_j M(gamma_j x)``, the one-step embedding of any matrix field."""
    return EmbeddedField(M, M.level + 1)


def _left_apply(A: MatrixField, F: np.ndarray, X) -> np.ndarray:
    """``A(X) @ F`` for a ``(P, k, t)`` array, using block structure when present."""
    blk = A.blocks(X)
    if blk is not None:
        return kernels.block_matmul(blk, F)
    if isinstance(A, LowRankField):
        FA, GA = A.factors(X)
        return np.matmul(FA, np.matmul(np.conj(np.swapaxes(GA, -1, -2)), F))
    return np.matmul(A(X), F)


def _adjoint_apply(A: MatrixField, G: np.ndarray, X) -> np.ndarray:
    """``A(X)^* @ G``."""
    blk = A.blocks(X)
    if blk is not None:
        return kernels.block_matmul(np.conj(np.swapaxes(blk, -1, -2)), G)
    if isinstance(A, LowRankField):
        FA, GA = A.factors(X)
        return np.matmul(GA, np.matmul(np.conj(np.swapaxes(FA, -1, -2)), G))
    return np.matmul(np.conj(np.swapaxes(A(X), -1, -2)), G)


def _matmul(A: MatrixField, B: MatrixField) -> MatrixField:
    """Product that exploits low-rank and block-diagonal factors."""
    in_d = A.in_d or B.in_d
    if isinstance(B, LowRankField):
        def factors(X):
            F, G = B.factors(X)
            return _left_apply(A, F, X), G

        return LowRankField(A.system, A.level, factors, B.rank, in_d=in_d)
    if isinstance(A, LowRankField):
        def factors(X):
            F, G = A.factors(X)
            return F, _adjoint_apply(B, G, X)

        return LowRankField(A.system, A.level, factors, A.rank, in_d=in_d)

    def fn(X):
        ba = A.blocks(X)
        if ba is not None:
            return kernels.block_matmul(ba, B(X))
        bb = B.blocks(X)
        if bb is not None:
            dense = A(X)
            P, k, _ = dense.shape
            Bn, m = bb.shape[1], bb.shape[2]
            out = np.matmul(dense.reshape(P, k, Bn, m).transpose(0, 2, 1, 3), bb)
            return out.transpose(0, 2, 1, 3).reshape(P, k, k)
        return np.matmul(A(X), B(X))

    return MatrixField(A.system, A.level, fn, in_d=in_d)


# ------------------------------------------------------------ graded elements

class GradedCoreElement:
    """``T = sum_r T_r`` with ``T_r`` a level-r matrix field (``None`` for zero)."""

    def __init__(self, system: SelfSimilarSystem, components):
        self.system = system
        comps = list(components)
        if not comps:
            raise ValueError("a graded element needs at least the level-0 slot")
        for r, T in enumerate(comps):
            if T is not None and (T.level != r or T.system is not system):
                raise ValueError(f"component {r} has level {T.level}")
        self.components = tuple(comps)

    @property
    def level(self) -> int:
        return len(self.components) - 1

    @classmethod
    def unit(cls, system, level: int = 0) -> "GradedCoreElement":
        return cls(system, [MatrixField.identity(system, 0)] + [None] * level)

    @classmethod
    def zero(cls, system, level: int = 0) -> "GradedCoreElement":
        return cls(system, [None] * (level + 1))

    @classmethod
    def single(cls, T: MatrixField, level: int | None = None) -> "GradedCoreElement":
        level = T.level if level is None else level
        comps = [None] * (level + 1)
        comps[T.level] = T
        return cls(T.system, comps)

    @classmethod
    def scalar(cls, a: ScalarField, system, level: int = 0) -> "GradedCoreElement":
        return cls(system, [a.as_matrix(system)] + [None] * level)

    def pad(self, n: int) -> "GradedCoreElement":
        if n < self.level:
            raise ValueError("pad cannot lower the level")
        return GradedCoreElement(self.system, list(self.components) + [None] * (n - self.level))

    def truncate(self, n: int) -> "GradedCoreElement":
        """Keep components ``0..n``; higher levels are dropped (or zero-padded)."""
        if n >= self.level:
            return self.pad(n)
        return GradedCoreElement(self.system, self.components[: n + 1])

    def _align(self, other):
        if other.system is not self.system:
            raise ValueError("graded elements over different systems")
        n = max(self.level, other.level)
        return self.pad(n), other.pad(n), n

    def __add__(self, other: "GradedCoreElement") -> "GradedCoreElement":
        a, b, _ = self._align(other)
        comps = []
        for x, y in zip(a.components, b.components):
            comps.append(x if y is None else y if x is None else x + y)
        return GradedCoreElement(self.system, comps)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s: complex) -> "GradedCoreElement":
        return GradedCoreElement(self.system,
                                 [None if T is None else T.scale(s) for T in self.components])

    def adjoint(self) -> "GradedCoreElement":
        return GradedCoreElement(self.system,
                                 [None if T is None else T.adjoint() for T in self.components])

    def __matmul__(self, other: "GradedCoreElement") -> "GradedCoreElement":
        """Graded product: ``T_r S_s`` lands at level ``max(r, s)``.

        Level ``k`` collects ``pi_k(T_0..T_k) S_k + T_k pi_k(S_0..S_{k-1})``,
        which is the same sum grouped into two products.
        """
        a, b, n = self._align(other)
        comps: list = [None] * (n + 1)
        for k in range(n + 1):
            Tk, Sk = a.components[k], b.components[k]
            term = None
            if Sk is not None:
                left = _partial_pi(a.components[: k + 1])
                if left is not None:
                    term = _matmul(left, Sk)
            if Tk is not None:
                right = _partial_pi(b.components[:k])
                if right is not None:
                    t2 = _matmul(Tk, embed(right, k))
                    term = t2 if term is None else term + t2
            comps[k] = term
        return GradedCoreElement(self.system, comps)

    def times_scalar(self, v: ScalarField) -> "GradedCoreElement":
        """Right multiplication by ``v`` acting on the base point."""
        return GradedCoreElement(self.system,
                                 [None if T is None else T.times_scalar(v) for T in self.components])


class PiField(MatrixField):
    """``pi(T)`` evaluated by ``pi_n(x) = T_n(x) + diag_j pi_{n-1}(gamma_j x)``."""

    def __init__(self, T: GradedCoreElement):
        self.element = T
        super().__init__(T.system, T.level, self._eval, in_d=False)

    def _eval(self, X):
        return _pi_eval(self.element.components, X, self.system)


def _pi_eval(components, X, system):
    return memo(tuple(components), X, lambda: _pi_eval_uncached(components, X, system))


def _pi_eval_uncached(components, X, system):
    n = len(components) - 1
    top = components[-1]
    k = system.N ** n
    if n == 0:
        if top is None:
            return np.zeros((X.shape[0], 1, 1), dtype=np.complex128)
        return top(X)
    lower = components[:-1]
    if all(T is None for T in lower):
        if top is None:
            return np.zeros((X.shape[0], k, k), dtype=np.complex128)
        return top(X)
    N, P = system.N, X.shape[0]
    sub = _pi_eval(lower, branch_images(system, X), system)
    m = sub.shape[-1]
    sub = sub.reshape(N, P, m, m)
    if isinstance(top, LowRankField):
        return kernels.blockdiag_lowrank(sub, *top.factors(X))
    out = kernels.blockdiag_lowrank(sub)
    if top is not None:
        out += top(X)
    return out


def _partial_pi(components):
    """``pi`` of the given leading components at their top level, or ``None`` if all vanish."""
    if all(T is None for T in components):
        return None
    nonzero = [r for r, T in enumerate(components) if T is not None]
    if nonzero == [len(components) - 1]:
        return components[-1]
    if len(nonzero) == 1:
        return embed(components[nonzero[0]], len(components) - 1)
    system = components[nonzero[0]].system
    return PiField(GradedCoreElement(system, components))


def pi(T: GradedCoreElement, n: int | None = None) -> MatrixField:
    """``Pi^(n)(T) = sum_r embed(T_r, n)``; ``n`` defaults to the element's level."""
    if n is not None:
        T = T.truncate(n) if n < T.level else T.pad(n)
    return PiField(T)


# ------------------------------------------------------------ norms

def sup_norm(M: MatrixField, X: np.ndarray, chunk: int = CHUNK) -> float:
    """Max over the rows of ``X`` of the spectral norm of ``M``.

    Exact, but only points whose Frobenius norm (an upper bound) beats the
    running maximum get a singular value computation.
    """
    fro = np.empty(X.shape[0])
    for sl, vals in evaluate_chunked(M, X, chunk):
        fro[sl] = np.sqrt(np.sum(vals.real ** 2 + vals.imag ** 2, axis=(1, 2)))
    order = np.argsort(-fro, kind="stable")
    best = 0.0
    batch = 256
    for start in range(0, order.size, batch):
        idx = order[start:start + batch]
        if fro[idx[0]] <= best:
            break
        norms = kernels.spectral_norms(M(X[np.sort(idx)]))
        best = max(best, float(np.max(norms)))
    return best


def refined_sup_norms(M: MatrixField, system: SelfSimilarSystem, start: int, stop: int,
                      keep: int = 256) -> list[float]:
    """Sup norms of ``M`` along nested grids, refining only the best cells.

    Depth ``start`` is searched exhaustively.  Each later depth evaluates the
    sub-cell points of the ``keep`` best points found so far: row ``r`` of the
    depth-m grid has children ``N r + j`` one level down, and child 0 is the
    point itself, so the sequence is monotone and each entry is a lower bound
    for the full-grid sup at its depth.
    """
    from .attractor import float_grid

    X = float_grid(system, start)
    vals = kernels.spectral_norms(M(X)) if X.shape[0] <= CHUNK else np.concatenate(
        [kernels.spectral_norms(v) for _, v in evaluate_chunked(M, X)])
    norms = [float(np.max(vals))]
    rows = np.argsort(-vals, kind="stable")[:keep]
    best = vals[rows]
    N = system.N
    for depth in range(start + 1, stop + 1):
        children = (N * rows[:, None] + np.arange(N)[None, :]).ravel()
        pts = _grid_points(system, depth, children)
        cv = kernels.spectral_norms(M(pts))
        order = np.argsort(-cv, kind="stable")[:keep]
        rows, best = children[order], cv[order]
        norms.append(max(norms[-1], float(best[0])))
    return norms


def _grid_points(system: SelfSimilarSystem, depth: int, rows: np.ndarray) -> np.ndarray:
    """Rows of ``float_grid(system, depth)`` computed directly from their words."""
    N = system.N
    mats, offs = system.float_mats, system.float_offsets
    digits = np.empty((rows.size, depth), dtype=np.int64)
    r = rows.copy()
    for t in range(depth):
        digits[:, t] = r % N
        r //= N
    pts = np.tile(system.to_float([system.seed]), (rows.size, 1))
    # the first letter is applied first
    for t in range(depth):
        j = digits[:, t]
        pts = np.einsum("pij,pj->pi", mats[j], pts) + offs[j]
    return pts


def frobenius_sup(M: MatrixField, X: np.ndarray, chunk: int = CHUNK) -> float:
    """Max over the rows of ``X`` of the Frobenius norm (an upper bound on the spectral one)."""
    best = 0.0
    for _, vals in evaluate_chunked(M, X, chunk):
        best = max(best, float(np.sqrt(np.max(np.sum(vals.real ** 2 + vals.imag ** 2, axis=(1, 2))))))
    return best


# ------------------------------------------------------------ absorption

def compact_absorption(T: GradedCoreElement, v: ScalarField, tol: float = POINT_TOL) -> GradedCoreElement:
    """Re-express ``T v`` (v vanishing on the branch points) one level higher.

    Component ``r`` becomes ``embed(T_r v, r + 1)``, which lies in D^{gamma^(r+1)};
    the result has level ``T.level + 1`` and an empty level-0 slot.
    """
    system = T.system
    B = branch_points(system).branch_points
    if B:
        vals = v(system.to_float(B))
        if np.max(np.abs(vals)) > tol:
            raise ValueError("the multiplier does not vanish on the branch points")
    comps: list = [None] * (T.level + 2)
    for r, Tr in enumerate(T.components):
        if Tr is None:
            continue
        up = _embed_once(Tr.times_scalar(v))
        up.in_d = True
        comps[r + 1] = up
    return GradedCoreElement(system, comps)


# ------------------------------------------------------------ random elements

def random_compact(system: SelfSimilarSystem, r: int, rng: np.random.Generator,
                   terms: int = 2, degree: int = 2) -> MatrixField:
    """Sum of ``terms`` rank-one operators of random Z-members at level ``r``."""
    if r == 0:
        return random_scalar(system, rng, degree).as_matrix(system)
    out = None
    for _ in range(terms):
        th = rank_one(random_z_member(system, r, rng, degree), random_z_member(system, r, rng, degree))
        out = th if out is None else out + th
    return out


def random_graded_element(system: SelfSimilarSystem, level: int, rng: np.random.Generator,
                          terms: int = 2, degree: int = 2) -> GradedCoreElement:
    """Random element with every component ``0..level`` populated."""
    return GradedCoreElement(system, [random_compact(system, r, rng, terms, degree)
                                      for r in range(level + 1)])

