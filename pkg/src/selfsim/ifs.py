"""Exact affine contraction families and their common left inverse ``h``."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .exact import QSqrt3, SQRT3, Scalar, as_scalar, solve_affine

Point = tuple  # tuple of exact scalars
Word = tuple  # tuple of 1-based branch labels

__all__ = [
    "AffineMap",
    "SelfSimilarSystem",
    "SystemError",
    "evaluate",
    "compose",
    "tensor_map",
    "multi_indices",
    "flat_index",
    "left_inverse",
    "left_inverse_many",
    "preimages_in_attractor",
    "left_inverse_float",
    "builtin",
    "load_system",
    "BUILTINS",
]


class SystemError(ValueError):
    """Invalid system definition (dimension mismatch, non-contraction, ...)."""


def _gershgorin(m: Sequence[Sequence[Scalar]]) -> Scalar:
    return max(sum(abs(v) for v in row) for row in m)


def _gram(m: Sequence[Sequence[Scalar]]) -> list:
    d = len(m)
    return [[sum(m[k][i] * m[k][j] for k in range(d)) for j in range(d)] for i in range(d)]


@dataclass(frozen=True)
class AffineMap:
    """``x -> matrix @ x + offset`` over an exact field."""

    matrix: tuple
    offset: tuple

    @property
    def dim(self) -> int:
        return len(self.offset)

    def __call__(self, point: Sequence[Scalar]) -> Point:
        if len(point) != self.dim:
            raise SystemError(f"point of dimension {len(point)} for a {self.dim}-d map")
        return tuple(
            sum((a * x for a, x in zip(row, point)), b) for row, b in zip(self.matrix, self.offset)
        )

    def after(self, inner: "AffineMap") -> "AffineMap":
        """The composite ``self o inner``."""
        d = self.dim
        mat = tuple(
            tuple(sum(self.matrix[i][k] * inner.matrix[k][j] for k in range(d)) for j in range(d))
            for i in range(d)
        )
        return AffineMap(mat, self(inner.offset))

    def inverse(self) -> "AffineMap":
        d = self.dim
        cols = []
        for j in range(d):
            e = [self.offset[0] * 0 + (1 if i == j else 0) for i in range(d)]
            res = solve_affine(self.matrix, e)
            if res.kind != "unique":
                raise SystemError("affine map is not invertible")
            cols.append(res.solution)
        inv = tuple(tuple(cols[j][i] for j in range(d)) for i in range(d))
        off = tuple(-sum(inv[i][k] * self.offset[k] for k in range(d)) for i in range(d))
        return AffineMap(inv, off)

    def determinant(self) -> Scalar:
        m = self.matrix
        if self.dim == 1:
            return m[0][0]
        if self.dim == 2:
            return m[0][0] * m[1][1] - m[0][1] * m[1][0]
        # cofactor expansion is fine at desk-scale dimensions
        return sum(
            (-1) ** j * m[0][j] * AffineMap(tuple(tuple(r[:j] + r[j + 1:]) for r in m[1:]),
                                            self.offset[1:]).determinant()
            for j in range(self.dim)
        )

    def contraction_sq_bound(self) -> Scalar:
        """Exact upper bound on ``||matrix||_2^2`` (Gershgorin on the Gram matrix)."""
        return _gershgorin(_gram(self.matrix))

    def expansion_sq_bound(self) -> Scalar:
        """Exact upper bound on ``||matrix^-1||_2^2``; its reciprocal bounds c'^2 from below."""
        return _gershgorin(_gram(self.inverse().matrix))

    def float_matrix(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix])

    def float_offset(self) -> np.ndarray:
        return np.array([float(v) for v in self.offset])


def _round_up_sqrt(x: Scalar) -> float:
    return math.sqrt(float(x)) * (1 + 1e-12)


@dataclass(frozen=True, eq=False)
class SelfSimilarSystem:
    """N >= 2 exact affine proper contractions on R^d, plus a seed point in K."""

    name: str
    branches: tuple
    seed: Point
    scalar: str = "rational"
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.branches) < 2:
            raise SystemError("a self-similar map needs at least two branches")
        d = self.dimension
        for j, g in enumerate(self.branches, 1):
            if g.dim != d or any(len(r) != d for r in g.matrix):
                raise SystemError(f"branch {j} has the wrong dimension")
            if g.determinant() == 0:
                raise SystemError(f"branch {j} is not injective")
            if not g.contraction_sq_bound() < 1:
                raise SystemError(f"branch {j} is not certified as a proper contraction")
        if len(self.seed) != d:
            raise SystemError("seed has the wrong dimension")

    @property
    def dimension(self) -> int:
        return len(self.seed)

    @property
    def N(self) -> int:
        return len(self.branches)

    @cached_property
    def contraction(self) -> float:
        """Certified upper contraction constant c (max over branches)."""
        return max(_round_up_sqrt(g.contraction_sq_bound()) for g in self.branches)

    @cached_property
    def lower_contraction(self) -> float:
        """Certified lower constant c' > 0 (min over branches); not used downstream."""
        return min(1.0 / _round_up_sqrt(g.expansion_sq_bound()) for g in self.branches)

    @cached_property
    def inverses(self) -> tuple:
        return tuple(g.inverse() for g in self.branches)

    @cached_property
    def float_mats(self) -> np.ndarray:
        return np.stack([g.float_matrix() for g in self.branches])

    @cached_property
    def float_offsets(self) -> np.ndarray:
        return np.stack([g.float_offset() for g in self.branches])

    def to_float(self, points: Iterable[Sequence[Scalar]]) -> np.ndarray:
        arr = np.array([[float(c) for c in p] for p in points], dtype=np.float64)
        return arr.reshape(-1, self.dimension)

    def apply_float(self, j: int, X: np.ndarray) -> np.ndarray:
        """Apply branch ``j`` (0-based) to a ``(P, d)`` float array."""
        return X @ self.float_mats[j].T + self.float_offsets[j]

    def __repr__(self):
        return f"SelfSimilarSystem({self.name!r}, N={self.N}, d={self.dimension})"


def evaluate(g: AffineMap, point: Sequence[Scalar]) -> Point:
    return g(point)


def compose(system: SelfSimilarSystem, word: Sequence[int]) -> AffineMap:
    """``gamma_w = gamma_{w_n} o ... o gamma_{w_1}``: the first letter is applied first."""
    if len(word) == 0:
        raise ValueError("compose needs a nonempty word")
    return _compose_cached(system, tuple(word))


@lru_cache(maxsize=None)
def _compose_cached(system: SelfSimilarSystem, word: Word) -> AffineMap:
    for j in word:
        if not 1 <= j <= system.N:
            raise ValueError(f"branch label {j} outside 1..{system.N}")
    if len(word) == 1:
        return system.branches[word[0] - 1]
    return system.branches[word[-1] - 1].after(_compose_cached(system, word[:-1]))


def multi_indices(N: int, n: int) -> list:
    """All of Sigma^n in flat order: ``flat = sum_k (i_k - 1) N^(k-1)`` (i_n slowest)."""
    return [tuple(reversed(t)) for t in itertools.product(range(1, N + 1), repeat=n)]


def flat_index(idx: Sequence[int], N: int) -> int:
    return sum((i - 1) * N ** k for k, i in enumerate(idx))


def tensor_map(system: SelfSimilarSystem, idx: Sequence[int]) -> AffineMap:
    """Branch of gamma^n attached to tensor slot ``(i_1, ..., i_n)``: ``gamma_{i_1} o ... o gamma_{i_n}``."""
    return compose(system, tuple(reversed(idx)))


def preimages_in_attractor(system: SelfSimilarSystem, points, depth: int = 12) -> list:
    """For each exact point, the list of ``(j, gamma_j^-1(point))`` whose preimage lies in K.

    Membership is certified by the distance to the depth-``depth`` word grid;
    every point of K is within :func:`membership_tolerance` of that grid.
    """
    from .attractor import distance_to_attractor, membership_tolerance

    points = [tuple(p) for p in points]
    if not points:
        return []
    cands = [[g(p) for g in system.inverses] for p in points]
    flat = system.to_float([c for row in cands for c in row])
    dists = distance_to_attractor(system, flat, depth).reshape(len(points), system.N)
    tol = membership_tolerance(system, depth)
    return [[(j + 1, c) for j, (c, dist) in enumerate(zip(row, drow)) if dist <= tol]
            for row, drow in zip(cands, dists)]


def left_inverse(system: SelfSimilarSystem, point: Sequence[Scalar], depth: int = 12) -> Point:
    """Exact ``h(point)``: the preimage under a branch whose image contains the point.

    Raises ``ValueError`` when no branch preimage lies in K.
    """
    return left_inverse_many(system, [point], depth)[0]


def left_inverse_many(system: SelfSimilarSystem, points, depth: int = 12) -> list:
    out = []
    for p, found in zip(points, preimages_in_attractor(system, points, depth)):
        if not found:
            raise ValueError(f"point {tuple(p)} is not in the image of any branch")
        values = {c for _, c in found}
        if len(values) > 1:
            raise ValueError(f"branch preimages of {tuple(p)} disagree; h is not well defined there")
        out.append(found[0][1])
    return out


def left_inverse_float(system: SelfSimilarSystem, X: np.ndarray, depth: int = 10) -> np.ndarray:
    """``h`` on float points by nearest branch image (plotting only)."""
    from .attractor import distance_to_attractor

    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    inv_m = np.stack([np.linalg.inv(m) for m in system.float_mats])
    pre = np.stack([(X - system.float_offsets[j]) @ inv_m[j].T for j in range(system.N)])
    dists = np.stack([distance_to_attractor(system, pre[j], depth) for j in range(system.N)])
    best = np.argmin(dists, axis=0)
    return pre[best, np.arange(X.shape[0])]


# ---------------------------------------------------------------- built-ins

def _amap(matrix, offset, field="rational") -> AffineMap:
    return AffineMap(tuple(tuple(as_scalar(v, field) for v in row) for row in matrix),
                     tuple(as_scalar(v, field) for v in offset))


def _tent() -> SelfSimilarSystem:
    h = Fraction(1, 2)
    return SelfSimilarSystem(
        "tent",
        (_amap([[h]], [0]), _amap([[-h]], [1])),
        seed=(Fraction(0),),
        meta={"description": "inverse branches of the tent map on [0, 1]"},
    )


def _cantor() -> SelfSimilarSystem:
    t = Fraction(1, 3)
    return SelfSimilarSystem(
        "cantor",
        (_amap([[t]], [0]), _amap([[t]], [Fraction(2, 3)])),
        seed=(Fraction(0),),
        meta={"description": "middle-thirds Cantor set"},
    )


def _rotation_about(theta_sign: int, centre: Point) -> AffineMap:
    # rotation by theta_sign * 2pi/3 about ``centre``
    c = QSqrt3(Fraction(-1, 2))
    s = SQRT3 * Fraction(theta_sign, 2)
    rot = ((c, -s), (s, c))
    off = tuple(centre[i] - (rot[i][0] * centre[0] + rot[i][1] * centre[1]) for i in range(2))
    return AffineMap(rot, off)


def sierpinski_points() -> dict:
    """The named vertices and edge midpoints of the gasket, exact in Q(sqrt 3)."""
    q = lambda x, y=0: QSqrt3(Fraction(x), Fraction(y))  # noqa: E731
    return {
        "P": (q(Fraction(1, 2)), q(0, Fraction(1, 2))),
        "Q": (q(0), q(0)),
        "R": (q(1), q(0)),
        "S": (q(Fraction(1, 4)), q(0, Fraction(1, 4))),
        "T": (q(Fraction(1, 2)), q(0)),
        "U": (q(Fraction(3, 4)), q(0, Fraction(1, 4))),
    }


def _centroid(*pts) -> Point:
    return tuple(sum((p[i] for p in pts), QSqrt3()) / 3 for i in range(2))


def _sierpinski() -> SelfSimilarSystem:
    f = "quadratic-sqrt3"
    h = Fraction(1, 2)
    V = sierpinski_points()
    g1 = _amap([[h, 0], [0, h]], [Fraction(1, 4), QSqrt3(0, Fraction(1, 4))], f)
    g2t = _amap([[h, 0], [0, h]], [0, 0], f)
    g3t = _amap([[h, 0], [0, h]], [h, 0], f)
    g2 = _rotation_about(-1, _centroid(V["T"], V["S"], V["Q"])).after(g2t)
    g3 = _rotation_about(+1, _centroid(V["T"], V["R"], V["U"])).after(g3t)
    return SelfSimilarSystem(
        "sierpinski",
        (g1, g2, g3),
        seed=V["P"],
        scalar=f,
        meta={"description": "Sierpinski gasket with rotated outer branches", "points": V},
    )


BUILTINS = {"tent": _tent, "cantor": _cantor, "sierpinski": _sierpinski}


@lru_cache(maxsize=None)
def builtin(name: str) -> SelfSimilarSystem:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise SystemError(f"unknown built-in system {name!r}; choose from {sorted(BUILTINS)}") from None


def _fixed_point(g: AffineMap) -> Point:
    d = g.dim
    one = g.offset[0] * 0 + 1
    m = [[(one if i == j else 0) - g.matrix[i][j] for j in range(d)] for i in range(d)]
    res = solve_affine(m, list(g.offset))
    if res.kind != "unique":
        raise SystemError("branch 1 has no unique fixed point")
    return res.solution


def system_from_dict(data: dict, name: str = "custom") -> SelfSimilarSystem:
    """Build a system from the parsed TOML schema.

    Keys: ``dimension``, ``scalar`` (``rational`` | ``quadratic-sqrt3``),
    ``branches = [[matrix rows], offset]`` entries, optional ``seed``, ``name``.
    """
    try:
        field_ = data.get("scalar", "rational")
        if field_ not in ("rational", "quadratic-sqrt3"):
            raise SystemError(f"unknown scalar field {field_!r}")
        d = int(data["dimension"])
        branches = []
        for entry in data["branches"]:
            rows, off = entry
            if len(rows) != d or len(off) != d:
                raise SystemError("branch matrix/offset does not match dimension")
            branches.append(_amap(rows, off, field_))
        branches = tuple(branches)
        seed = data.get("seed")
        if seed is None:
            seed = _fixed_point(branches[0])
        else:
            seed = tuple(as_scalar(v if not isinstance(v, int) else str(v), field_) for v in seed)
        return SelfSimilarSystem(data.get("name", name), branches, tuple(seed), scalar=field_)
    except (KeyError, TypeError) as exc:
        raise SystemError(f"malformed system definition: {exc}") from exc


def load_system(source: str) -> SelfSimilarSystem:
    """A built-in name or a path to a TOML system definition."""
    if source in BUILTINS:
        return builtin(source)
    path = Path(source)
    if not path.exists():
        raise SystemError(f"{source!r} is neither a built-in system nor a file")
    import tomli

    try:
        data = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as exc:
        raise SystemError(f"cannot parse {source}: {exc}") from exc
    return system_from_dict(data, name=path.stem)
