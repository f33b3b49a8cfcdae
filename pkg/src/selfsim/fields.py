"""Lazy closed-form fields on K: scalar, vector (C^{N^n}) and matrix (M_{N^n}) valued.

A field is a callable taking a ``(P, d)`` float array of points and returning
``(P,)``, ``(P, N^n)`` or ``(P, N^n, N^n)`` complex values.  Fields are built
from polynomials and combined symbolically, so pullbacks along branch maps
never interpolate: they just evaluate the generator at the mapped points.

Branch maps are applied to float points with a fixed elementwise formula
(:func:`branch_images`) so that two routes through the same composite give
bitwise identical points.
"""
from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .ifs import SelfSimilarSystem

CHUNK = 1024

__all__ = [
    "Polynomial",
    "PolynomialVector",
    "ScalarField",
    "VectorField",
    "MatrixField",
    "LowRankField",
    "branch_images",
    "word_points",
    "evaluate_chunked",
    "evaluation_scope",
    "CHUNK",
]

# Within an evaluation scope, values are memoized per (object, point array).
# Entries keep both alive so that ids cannot be recycled mid-scope.
_cache: dict | None = None


@contextmanager
def evaluation_scope():
    """Share field values across one batch of evaluations on the same points."""
    global _cache
    if _cache is not None:
        yield
        return
    _cache = {}
    try:
        yield
    finally:
        _cache = None


def as_points(X) -> np.ndarray:
    """``(P, d)`` float64 view of ``X``, returning ``X`` itself when it already is one.

    Identity matters: the evaluation cache keys on the point array object.
    """
    if isinstance(X, np.ndarray) and X.dtype == np.float64 and X.ndim == 2:
        return X
    return np.atleast_2d(np.asarray(X, dtype=np.float64))


def memo(owner, X, compute):
    """``compute()``, memoized on ``(owner, X)`` inside a scope.

    ``owner`` is any object, or a tuple of objects compared by identity.
    """
    if _cache is None:
        return compute()
    oid = tuple(map(id, owner)) if isinstance(owner, tuple) else id(owner)
    key = (oid, id(X))
    hit = _cache.get(key)
    if hit is not None:
        return hit[2]
    val = compute()
    _cache[key] = (owner, X, val)
    return val


def branch_images(system: SelfSimilarSystem, X: np.ndarray) -> np.ndarray:
    """``concat_j gamma_j(X)`` as ``(N*P, d)``, branch index slowest."""
    X = as_points(X)
    return memo(system, X, lambda: _branch_images(system, X))


def _branch_images(system, X):
    mats, offs = system.float_mats, system.float_offsets
    N, d = offs.shape
    out = np.empty((N, X.shape[0], d))
    for j in range(N):
        for r in range(d):
            acc = np.full(X.shape[0], offs[j, r])
            for c in range(d):
                acc = acc + mats[j, r, c] * X[:, c]
            out[j, :, r] = acc
    return out.reshape(N * X.shape[0], d)


def word_points(system: SelfSimilarSystem, X: np.ndarray, n: int) -> np.ndarray:
    """``gamma_{i_1} o ... o gamma_{i_n}(X)`` for every multi-index, shape ``(N^n, P, d)``.

    The leading axis is the flat index ``sum_k (i_k - 1) N^(k-1)``.
    """
    X = np.asarray(X, dtype=np.float64)
    if n == 0:
        return X[None]
    N, P, d = system.N, X.shape[0], X.shape[1]
    sub = word_points(system, branch_images(system, X), n - 1)
    sub = sub.reshape(N ** (n - 1), N, P, d)
    return sub.transpose(1, 0, 2, 3).reshape(N ** n, P, d)


def evaluate_chunked(fn: Callable, X: np.ndarray, chunk: int = CHUNK):
    """Yield ``(slice, fn(X[slice]))`` over row chunks of ``X``."""
    for start in range(0, X.shape[0], chunk):
        sl = slice(start, min(start + chunk, X.shape[0]))
        with evaluation_scope():
            val = fn(X[sl])
        yield sl, val


def monomial_exponents(d: int, degree: int) -> tuple:
    return tuple(e for e in itertools.product(range(degree + 1), repeat=d) if sum(e) <= degree)


def monomials(X: np.ndarray, exponents) -> np.ndarray:
    """``(P, M)`` real array of ``prod_k x_k^e_k`` for each exponent tuple."""
    out = np.ones((X.shape[0], len(exponents)))
    for m, exps in enumerate(exponents):
        for k, e in enumerate(exps):
            if e:
                out[:, m] *= X[:, k] ** e
    return out


@dataclass(frozen=True)
class Polynomial:
    """``sum coef * prod_k x_k^e_k`` with complex coefficients."""

    terms: tuple  # ((coef, (e_1, ..., e_d)), ...)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        exps = tuple(e for _, e in self.terms)
        coefs = np.array([c for c, _ in self.terms], dtype=np.complex128)
        return monomials(X, exps) @ coefs

    @classmethod
    def constant(cls, value: complex, d: int) -> "Polynomial":
        return cls(((complex(value), (0,) * d),))

    @classmethod
    def random(cls, rng: np.random.Generator, d: int, degree: int = 2) -> "Polynomial":
        return cls(tuple((complex(rng.normal(), rng.normal()), e)
                         for e in monomial_exponents(d, degree)))


class PolynomialVector:
    """Vector of polynomials sharing one monomial basis: ``coefs`` is ``(K, M)``."""

    def __init__(self, exponents, coefs):
        self.exponents = tuple(tuple(e) for e in exponents)
        self.coefs = np.asarray(coefs, dtype=np.complex128)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return monomials(np.asarray(X, dtype=np.float64), self.exponents) @ self.coefs.T

    @classmethod
    def random(cls, rng: np.random.Generator, d: int, size: int, degree: int = 2) -> "PolynomialVector":
        exps = monomial_exponents(d, degree)
        coefs = rng.normal(size=(size, len(exps))) + 1j * rng.normal(size=(size, len(exps)))
        return cls(exps, coefs)


class ScalarField:
    """An element of C(K) given by a closed-form evaluator."""

    def __init__(self, fn: Callable, label: str = "a"):
        self.fn = fn
        self.label = label

    def __call__(self, X) -> np.ndarray:
        X = as_points(X)
        return memo(self, X, lambda: np.asarray(self.fn(X), dtype=np.complex128)
                    .reshape(X.shape[0]))

    @classmethod
    def polynomial(cls, poly: Polynomial) -> "ScalarField":
        return cls(poly, "poly")

    @classmethod
    def constant(cls, value: complex) -> "ScalarField":
        return cls(lambda X: np.full(X.shape[0], value, dtype=np.complex128), f"const({value})")

    def __mul__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(lambda X: self(X) * other(X), f"({self.label}*{other.label})")

    def __add__(self, other: "ScalarField") -> "ScalarField":
        return ScalarField(lambda X: self(X) + other(X), f"({self.label}+{other.label})")

    def conj(self) -> "ScalarField":
        return ScalarField(lambda X: np.conj(self(X)), f"conj({self.label})")

    def as_matrix(self, system: SelfSimilarSystem) -> "MatrixField":
        """The level-0 matrix field (1x1) carrying this function."""
        return MatrixField(system, 0, lambda X: self(X)[:, None, None], in_d=True)


class VectorField:
    """Element of C(K, C^{N^n}); ``in_z`` marks fields built to lie in Z_{gamma^n}."""

    def __init__(self, system: SelfSimilarSystem, level: int, fn: Callable, in_z: bool = False):
        if level < 1:
            raise ValueError("vector fields start at level 1")
        self.system = system
        self.level = level
        self.fn = fn
        self.in_z = in_z

    @property
    def size(self) -> int:
        return self.system.N ** self.level

    def __call__(self, X) -> np.ndarray:
        X = as_points(X)
        return memo(self, X, lambda: np.asarray(self.fn(X), dtype=np.complex128)
                    .reshape(X.shape[0], self.size))


class MatrixField:
    """Element of C(K, M_{N^n}); ``in_d`` marks fields built to lie in D^{gamma^n}.

    Subclasses may provide :meth:`blocks` when the value is block diagonal.
    """

    def __init__(self, system: SelfSimilarSystem, level: int, fn: Callable, in_d: bool = False):
        self.system = system
        self.level = level
        self.fn = fn
        self.in_d = in_d

    @property
    def size(self) -> int:
        return self.system.N ** self.level

    def __call__(self, X) -> np.ndarray:
        X = as_points(X)
        k = self.size
        return memo(self, X, lambda: np.asarray(self.fn(X), dtype=np.complex128)
                    .reshape(X.shape[0], k, k))

    def blocks(self, X):
        """``(P, B, m, m)`` block-diagonal view, or ``None`` if not block structured."""
        return None

    def _check(self, other):
        if other.system is not self.system or other.level != self.level:
            raise ValueError("matrix fields live at different levels or systems")

    def __add__(self, other: "MatrixField") -> "MatrixField":
        self._check(other)
        return MatrixField(self.system, self.level, lambda X: self(X) + other(X),
                           in_d=self.in_d and other.in_d)

    def __sub__(self, other: "MatrixField") -> "MatrixField":
        self._check(other)
        return MatrixField(self.system, self.level, lambda X: self(X) - other(X),
                           in_d=self.in_d and other.in_d)

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        self._check(other)

        def fn(X):
            blk = self.blocks(X)
            if blk is not None:
                return kernels.block_matmul(blk, other(X))
            return np.matmul(self(X), other(X))

        return MatrixField(self.system, self.level, fn, in_d=self.in_d and other.in_d)

    def scale(self, s: complex) -> "MatrixField":
        return MatrixField(self.system, self.level, lambda X: s * self(X), in_d=self.in_d)

    def times_scalar(self, a: ScalarField) -> "MatrixField":
        """Pointwise product with a function of the base point."""
        return MatrixField(self.system, self.level, lambda X: a(X)[:, None, None] * self(X),
                           in_d=self.in_d)

    def adjoint(self) -> "MatrixField":
        return MatrixField(self.system, self.level,
                           lambda X: np.conj(np.swapaxes(self(X), -1, -2)), in_d=self.in_d)

    def apply(self, f: VectorField) -> VectorField:
        if f.level != self.level or f.system is not self.system:
            raise ValueError("vector and matrix fields live at different levels")
        return VectorField(self.system, self.level,
                           lambda X: np.matmul(self(X), f(X)[:, :, None])[:, :, 0])

    @classmethod
    def identity(cls, system: SelfSimilarSystem, level: int) -> "MatrixField":
        k = system.N ** level
        return cls(system, level, lambda X: np.broadcast_to(np.eye(k, dtype=np.complex128),
                                                            (X.shape[0], k, k)).copy(), in_d=True)

    @classmethod
    def zero(cls, system: SelfSimilarSystem, level: int) -> "MatrixField":
        k = system.N ** level
        return cls(system, level, lambda X: np.zeros((X.shape[0], k, k), dtype=np.complex128),
                   in_d=True)

    @classmethod
    def constant(cls, system: SelfSimilarSystem, level: int, value, in_d: bool = False) -> "MatrixField":
        value = np.asarray(value, dtype=np.complex128)
        k = system.N ** level
        if value.shape != (k, k):
            raise ValueError(f"expected a {k}x{k} matrix")
        return cls(system, level, lambda X: np.broadcast_to(value, (X.shape[0], k, k)).copy(),
                   in_d=in_d)


class LowRankField(MatrixField):
    """``F(x) G(x)^*`` with factor fields of shape ``(P, k, t)``.

    Sums of rank-one operators stay in this form, so products against them
    cost ``O(k^2 t)`` instead of ``O(k^3)`` per point.
    """

    def __init__(self, system, level: int, factors: Callable, rank: int, in_d: bool = False):
        self.factor_fn = factors
        self.rank = rank
        super().__init__(system, level, self._dense, in_d=in_d)

    def factors(self, X):
        X = as_points(X)
        return memo((self, "factors"), X, lambda: self.factor_fn(X))

    def _dense(self, X):
        F, G = self.factors(X)
        return kernels.lowrank_dense(F, G)

    def __add__(self, other):
        if isinstance(other, LowRankField):
            self._check(other)

            def factors(X):
                F1, G1 = self.factors(X)
                F2, G2 = other.factors(X)
                return np.concatenate([F1, F2], axis=2), np.concatenate([G1, G2], axis=2)

            return LowRankField(self.system, self.level, factors, self.rank + other.rank,
                                in_d=self.in_d and other.in_d)
        return MatrixField.__add__(self, other)

    def scale(self, s: complex) -> "LowRankField":
        def factors(X):
            F, G = self.factors(X)
            return s * F, G

        return LowRankField(self.system, self.level, factors, self.rank, in_d=self.in_d)

    def times_scalar(self, a: ScalarField) -> "LowRankField":
        def factors(X):
            F, G = self.factors(X)
            return a(X)[:, None, None] * F, G

        return LowRankField(self.system, self.level, factors, self.rank, in_d=self.in_d)

    def adjoint(self) -> "LowRankField":
        def factors(X):
            F, G = self.factors(X)
            return G, F

        return LowRankField(self.system, self.level, factors, self.rank, in_d=self.in_d)
