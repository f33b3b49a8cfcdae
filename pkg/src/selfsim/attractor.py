"""Finite approximations of the attractor K and of its uniform self-similar measure.

Two flavours of grid are kept apart on purpose:

* :class:`AttractorGrid` holds exact points and is used for all combinatorics;
* :func:`float_grid` holds the same word images in double precision, ordered by
  word, and feeds the numeric side (field evaluation, distance queries).
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import kernels
from .ifs import SelfSimilarSystem, multi_indices

__all__ = [
    "AttractorGrid",
    "DiscreteMeasure",
    "generate_grid",
    "hutchinson_measure",
    "float_grid",
    "distance_to_attractor",
    "membership_tolerance",
    "diameter_bound",
    "point_key",
]


def point_key(p):
    """Canonical sort key for exact points (lexicographic, exact comparison)."""
    return tuple(p)


@dataclass(frozen=True)
class AttractorGrid:
    depth: int
    points: tuple  # canonically sorted, deduplicated
    index: dict  # word -> point

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return tuple(p) in self._set

    @property
    def _set(self):
        s = self.__dict__.get("_pts_set")
        if s is None:
            s = frozenset(self.points)
            object.__setattr__(self, "_pts_set", s)
        return s


@dataclass(frozen=True)
class DiscreteMeasure:
    support: tuple
    weights: tuple

    def total(self) -> Fraction:
        return sum(self.weights, Fraction(0))

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.weights))

    def integrate(self, fn) -> float:
        """``sum_x w(x) fn(x)`` with ``fn`` taking an exact point."""
        return sum(float(w) * fn(p) for p, w in zip(self.support, self.weights))


def _word_images_exact(system: SelfSimilarSystem, depth: int) -> dict:
    """Map word ``(w_1..w_m)`` (w_1 applied first) to its exact image of the seed."""
    level = {(): tuple(system.seed)}
    for _ in range(depth):
        nxt = {}
        for w, p in level.items():
            for j, g in enumerate(system.branches, 1):
                nxt[w + (j,)] = g(p)
        level = nxt
    return level


def generate_grid(system: SelfSimilarSystem, depth: int) -> AttractorGrid:
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    return _grid_cached(system, depth)


@lru_cache(maxsize=64)
def _grid_cached(system, depth):
    index = _word_images_exact(system, depth)
    pts = tuple(sorted(set(index.values()), key=point_key))
    return AttractorGrid(depth, pts, index)


def hutchinson_measure(system: SelfSimilarSystem, depth: int) -> DiscreteMeasure:
    """Uniform weights ``N^-m`` per word image, accumulated over coinciding points."""
    grid = generate_grid(system, depth)
    w = Fraction(1, system.N ** depth)
    acc = defaultdict(Fraction)
    for p in grid.index.values():
        acc[p] += w
    support = tuple(sorted(acc, key=point_key))
    return DiscreteMeasure(support, tuple(acc[p] for p in support))


@lru_cache(maxsize=32)
def float_grid(system: SelfSimilarSystem, depth: int) -> np.ndarray:
    """All ``N^depth`` word images of the seed as a ``(N^depth, d)`` array.

    Row ``k`` is the image under the word with ``k = sum_t (w_t - 1) N^(t-1)``;
    duplicates are kept so that row weights are uniform.
    """
    pts = kernels.word_images(system.float_mats, system.float_offsets,
                              system.to_float([system.seed])[0], depth)
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=None)
def diameter_bound(system: SelfSimilarSystem, depth: int = 8) -> float:
    """Upper bound on diam(K) from a depth-``depth`` grid.

    Every point of K is within ``c^m diam(K)`` of the grid, so
    ``diam(K) <= diam(grid) + 2 c^m diam(K)``.
    """
    pts = float_grid(system, depth)
    box = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    cm = system.contraction ** depth
    if 2 * cm >= 1:
        raise ValueError("grid too shallow for a diameter bound")
    return box / (1 - 2 * cm)


def membership_tolerance(system: SelfSimilarSystem, depth: int) -> float:
    """Any point of K lies within this distance of ``float_grid(system, depth)``."""
    return system.contraction ** depth * diameter_bound(system) + 1e-12


def distance_to_attractor(system: SelfSimilarSystem, X: np.ndarray, depth: int = 12) -> np.ndarray:
    """Distance from each row of ``X`` to the depth-``depth`` word grid."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.sqrt(kernels.min_sq_dist(float_grid(system, depth), X))


def words(system: SelfSimilarSystem, depth: int) -> list:
    """Words in float-grid row order (first letter varies fastest)."""
    return multi_indices(system.N, depth)
