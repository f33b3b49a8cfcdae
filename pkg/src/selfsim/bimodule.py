"""The correspondence Z_{gamma^n} inside C(K, C^{N^n}).

A vector field ``f`` lies in Z_{gamma^n} when, at every branch value ``c`` of
gamma^n, the components whose composites send ``c`` to the same point agree.
Index groups come from :func:`selfsim.singularity.level_structure`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fields import LowRankField, MatrixField, Polynomial, PolynomialVector, ScalarField, VectorField, word_points
from .ifs import SelfSimilarSystem
from .singularity import iterated_branch_values, level_structure

POINT_TOL = 1e-12

__all__ = [
    "FiberBasis",
    "inner_product",
    "module_actions",
    "fiber_basis",
    "fiber_basis_from_groups",
    "rank_one",
    "check_membership",
    "membership_defect",
    "lift",
    "random_z_member",
    "distinguished_points",
    "constant_vector",
    "project_to_z",
    "random_vector_field",
    "random_scalar",
    "POINT_TOL",
]


@lru_cache(maxsize=None)
def distinguished_points(system: SelfSimilarSystem, n: int) -> tuple:
    """C_{gamma^n}: where identification equations are imposed at level ``n``."""
    if n < 1:
        return ()
    return tuple(iterated_branch_values(system, n))


def _collision_groups(system, n):
    """``[(c, [group, ...]), ...]`` with only the groups of size >= 2."""
    return [(c, [list(ks) for _, ks in level_structure(system, c, n).collisions])
            for c in distinguished_points(system, n)]


def inner_product(f: VectorField, g: VectorField) -> ScalarField:
    """``(f|g)(y) = sum_i conj(f_i(y)) g_i(y)``."""
    if f.level != g.level or f.system is not g.system:
        raise ValueError("inner product of fields at different levels")
    return ScalarField(lambda X: np.sum(np.conj(f(X)) * g(X), axis=1), "(f|g)")


def _pullbacks(a: ScalarField, system, X, n):
    """``a(gamma_i(X))`` for every level-n multi-index, as ``(P, N^n)``."""
    pts = word_points(system, X, n)
    K, P, d = pts.shape
    return a(pts.reshape(K * P, d)).reshape(K, P).T


def module_actions(a: ScalarField | None, f: VectorField, a_right: ScalarField | None = None) -> VectorField:
    """``(a . f . a')_i(y) = a(gamma_i(y)) f_i(y) a'(y)``; ``None`` means the unit."""
    system, n = f.system, f.level

    def fn(X):
        out = f(X)
        if a is not None:
            out = _pullbacks(a, system, X, n) * out
        if a_right is not None:
            out = out * a_right(X)[:, None]
        return out

    return VectorField(system, n, fn, in_z=f.in_z)


@dataclass(frozen=True)
class FiberBasis:
    point: tuple | None
    size: int
    groups: tuple  # index groups, one per basis vector
    vectors: np.ndarray  # (w, size)

    @property
    def dimension(self) -> int:
        return len(self.groups)

    def matrix_units(self) -> np.ndarray:
        """``theta_{u_i, u_j} = u_i u_j^*`` as a ``(w, w, size, size)`` array."""
        u = self.vectors
        return np.einsum("ia,jb->ijab", u, np.conj(u))


def fiber_basis_from_groups(size: int, groups, point=None) -> FiberBasis:
    """Orthonormal basis of ``{v : v constant on each group}``.

    Groups must partition ``range(size)``; vector ``i`` is ``1/sqrt(|G_i|)`` on ``G_i``.
    """
    groups = tuple(tuple(sorted(g)) for g in groups)
    flat = sorted(i for g in groups for i in g)
    if flat != list(range(size)):
        raise ValueError("index groups must partition the index set")
    vecs = np.zeros((len(groups), size))
    for r, g in enumerate(groups):
        vecs[r, list(g)] = 1.0 / np.sqrt(len(g))
    return FiberBasis(point, size, groups, vecs)


def fiber_basis(system: SelfSimilarSystem, c, n: int = 1) -> FiberBasis:
    """Basis of the fiber of Z_{gamma^n} at the exact point ``c``.

    One vector per distinct point of ``h^-n(c)`` (the images of ``c``).
    """
    ls = level_structure(system, tuple(c), n)
    return fiber_basis_from_groups(system.N ** n, [ks for _, ks in ls.groups], tuple(c))


def rank_one(f: VectorField, g: VectorField) -> MatrixField:
    """``theta_{f,g}(y) = f(y) g(y)^*``."""
    if not (f.in_z and g.in_z):
        raise ValueError("rank-one operators need Z-members (build them with random_z_member or lift)")
    if f.level != g.level or f.system is not g.system:
        raise ValueError("rank-one operator of fields at different levels")
    return LowRankField(f.system, f.level, lambda X: (f(X)[:, :, None], g(X)[:, :, None]), 1,
                        in_d=True)


def _group_spread(values: np.ndarray, group) -> float:
    sub = values[..., group]
    return float(np.max(np.abs(sub - sub[..., :1]))) if len(group) > 1 else 0.0


def membership_defect(f: VectorField) -> float:
    """Largest violation of the Z identification equations, scaled by ``1 + max|f|``."""
    worst = 0.0
    for c, groups in _collision_groups(f.system, f.level):
        v = f(f.system.to_float([c]))[0]
        scale = 1.0 + float(np.max(np.abs(v)))
        for g in groups:
            worst = max(worst, _group_spread(v, g) / scale)
    return worst


def check_membership(f: VectorField, tol: float = POINT_TOL) -> bool:
    return membership_defect(f) <= tol


def lift(f: VectorField, g: VectorField) -> VectorField:
    """Interior tensor product in the concrete picture (levels m, k -> m + k).

    Component ``(i, j)`` at ``y`` is ``f_i(gamma_j(y)) g_j(y)``, stored at flat
    index ``flat(i) + N^m flat(j)``.
    """
    if f.system is not g.system:
        raise ValueError("fields over different systems")
    system, m, k = f.system, f.level, g.level
    Nm, Nk = system.N ** m, system.N ** k

    def fn(X):
        pts = word_points(system, X, k)  # (Nk, P, d)
        P = X.shape[0]
        fv = f(pts.reshape(Nk * P, -1)).reshape(Nk, P, Nm)
        gv = g(X)  # (P, Nk)
        out = fv.transpose(1, 0, 2) * gv[:, :, None]  # (P, Nk, Nm)
        return out.reshape(P, Nk * Nm)

    return VectorField(system, m + k, fn, in_z=f.in_z and g.in_z)


def constant_vector(system: SelfSimilarSystem, level: int, value, in_z: bool | None = None) -> VectorField:
    value = np.asarray(value, dtype=np.complex128)
    if value.shape != (system.N ** level,):
        raise ValueError("constant vector has the wrong length")
    f = VectorField(system, level, lambda X: np.broadcast_to(value, (X.shape[0], value.size)).copy())
    if in_z is None:
        in_z = check_membership(f)
    f.in_z = in_z
    return f


def _bump_weights(points: np.ndarray):
    """Lagrange-type weights ``phi_c(x) = prod_{c' != c} |x - c'|^2 / |c - c'|^2``."""
    k = len(points)
    denom = np.array([np.prod([np.sum((points[i] - points[j]) ** 2) for j in range(k) if j != i])
                      for i in range(k)])

    def phi(X):
        sq = np.zeros((X.shape[0], k))
        for r in range(X.shape[1]):
            sq += (X[:, r, None] - points[None, :, r]) ** 2
        # product over j != i from prefix and suffix products
        pre = np.ones_like(sq)
        suf = np.ones_like(sq)
        for i in range(1, k):
            pre[:, i] = pre[:, i - 1] * sq[:, i - 1]
            suf[:, k - 1 - i] = suf[:, k - i] * sq[:, k - i]
        return pre * suf / denom

    return phi


def project_to_z(f: VectorField) -> VectorField:
    """Correct ``f`` near each branch value so that its groups agree there.

    At ``c`` the components of a group are replaced by their average; the
    correction is spread by weights equal to 1 at ``c`` and 0 at the other
    branch values.
    """
    system, n = f.system, f.level
    cg = _collision_groups(system, n)
    if not cg:
        f.in_z = True
        return f
    cs = system.to_float([c for c, _ in cg])
    vals = f(cs)
    deltas = np.zeros_like(vals)
    for r, (_, groups) in enumerate(cg):
        for g in groups:
            deltas[r, g] = vals[r, g].mean() - vals[r, g]
    phi = _bump_weights(cs)
    return VectorField(system, n, lambda X: f(X) + phi(X) @ deltas, in_z=True)


def random_vector_field(system: SelfSimilarSystem, n: int, rng: np.random.Generator,
                        degree: int = 2) -> VectorField:
    return VectorField(system, n, PolynomialVector.random(rng, system.dimension, system.N ** n, degree))


def random_z_member(system: SelfSimilarSystem, n: int, rng: np.random.Generator,
                    degree: int = 2) -> VectorField:
    """Random polynomial vector field projected onto Z_{gamma^n}."""
    return project_to_z(random_vector_field(system, n, rng, degree))


def random_scalar(system: SelfSimilarSystem, rng: np.random.Generator, degree: int = 2) -> ScalarField:
    return ScalarField.polynomial(Polynomial.random(rng, system.dimension, degree))
