"""Branch structure of a self-similar map, solved exactly.

Branch values are the points where two branches collide; branch points are
the collision images.  Everything is computed from the exact affine collision
equations, with K-membership of the solutions certified numerically against a
deep word grid (see :func:`in_attractor`).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

from .attractor import distance_to_attractor, generate_grid, membership_tolerance, point_key
from .exact import solve_affine
from .ifs import SelfSimilarSystem, SystemError, left_inverse_many, preimages_in_attractor, tensor_map

__all__ = [
    "DegenerateCollision",
    "SingularityReport",
    "AssumptionBVerdict",
    "OrbitSet",
    "LevelStructure",
    "in_attractor",
    "branch_values",
    "branch_points",
    "orbit_set",
    "postcritical_points",
    "iterated_branch_points",
    "iterated_branch_values",
    "iterated_branch_points_direct",
    "check_assumption_b",
    "level_structure",
]

MEMBERSHIP_DEPTH = 12


class DegenerateCollision(SystemError):
    """Two branches agree on a positive-dimensional affine subspace."""


def _sorted(points) -> list:
    return sorted(set(points), key=point_key)


def in_attractor(system: SelfSimilarSystem, points, depth: int = MEMBERSHIP_DEPTH) -> list:
    """Certify ``p in K`` for each exact point.

    Exact hits on a shallow exact grid are accepted outright; otherwise the
    float distance to the depth-``depth`` grid must be within the cell bound.
    """
    points = [tuple(p) for p in points]
    if not points:
        return []
    shallow = generate_grid(system, min(depth, _shallow_depth(system)))
    out = [p in shallow for p in points]
    rest = [i for i, ok in enumerate(out) if not ok]
    if rest:
        d = distance_to_attractor(system, system.to_float([points[i] for i in rest]), depth)
        tol = membership_tolerance(system, depth)
        for i, dist in zip(rest, d):
            out[i] = bool(dist <= tol)
    return out


def _shallow_depth(system: SelfSimilarSystem) -> int:
    return 6 if system.N <= 3 else 4


def _collision_candidates(system: SelfSimilarSystem, maps) -> list:
    """Exact solutions ``a`` of ``g_i(a) = g_j(a)`` over pairs ``i < j`` of ``maps``.

    Returns ``(a, i, j)`` triples before the K-membership filter.
    """
    out = []
    d = system.dimension
    for i, j in itertools.combinations(range(len(maps)), 2):
        gi, gj = maps[i], maps[j]
        lhs = [[gi.matrix[r][k] - gj.matrix[r][k] for k in range(d)] for r in range(d)]
        rhs = [gj.offset[r] - gi.offset[r] for r in range(d)]
        res = solve_affine(lhs, rhs)
        if res.kind == "none":
            continue
        if res.kind == "subspace":
            what = "identical" if all(v == 0 for row in lhs for v in row) else "overlapping"
            raise DegenerateCollision(
                f"maps {i + 1} and {j + 1} are {what}: they agree on an affine subspace of "
                f"dimension {res.nullity}, so the branch set is not finite"
            )
        out.append((res.solution, i, j))
    return out


@lru_cache(maxsize=None)
def _branch_values_cached(system: SelfSimilarSystem) -> tuple:
    cands = _collision_candidates(system, system.branches)
    pts = _sorted(a for a, _, _ in cands)
    keep = in_attractor(system, pts)
    return tuple(p for p, ok in zip(pts, keep) if ok)


def branch_values(system: SelfSimilarSystem) -> list:
    """C_gamma, canonically sorted.  Raises :class:`DegenerateCollision` if infinite."""
    return list(_branch_values_cached(system))


@dataclass(frozen=True)
class OrbitSet:
    base: tuple
    level: int
    points: tuple

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)


@dataclass
class AssumptionBVerdict:
    passed: bool
    clauses: dict  # clause name -> {"pass": bool, "evidence": ...}

    def failures(self) -> list:
        return [k for k, v in self.clauses.items() if not v["pass"]]


@dataclass
class SingularityReport:
    system: SelfSimilarSystem
    branch_points: list
    branch_values: list
    branch_index: dict  # b -> e_b
    labels: dict  # b -> tuple of 1-based labels
    h_of: dict  # b -> h(b)
    postcritical: list = field(default_factory=list)
    postcritical_checked_depth: int = 0
    assumption_b: AssumptionBVerdict | None = None


def _groups_at(system: SelfSimilarSystem, c) -> dict:
    """Exact images ``gamma_j(c)`` grouped: image -> sorted labels."""
    groups: dict = {}
    for j, g in enumerate(system.branches, 1):
        groups.setdefault(g(c), []).append(j)
    return groups


@lru_cache(maxsize=None)
def _branch_structure(system: SelfSimilarSystem):
    C = branch_values(system)
    index, labels, h_of = {}, {}, {}
    for c in C:
        for b, js in _groups_at(system, c).items():
            if len(js) >= 2:
                index[b] = len(js)
                labels[b] = tuple(js)
                h_of[b] = c
    return _sorted(index), C, index, labels, h_of


def postcritical_points(system: SelfSimilarSystem, depth: int) -> list:
    """``{h^k(b) : b in B, 1 <= k <= depth}``: the part of P_gamma reached by words of length <= depth."""
    B = _branch_structure(system)[0]
    seen = set()
    frontier = list(B)
    for _ in range(depth):
        if not frontier:
            break
        frontier = left_inverse_many(system, frontier)
        frontier = [p for p in set(frontier) if p not in seen]
        seen.update(frontier)
    return _sorted(seen)


def branch_points(system: SelfSimilarSystem, postcritical_depth: int = 8) -> SingularityReport:
    """Full singularity report, including the Assumption B verdict."""
    B, C, index, labels, h_of = _branch_structure(system)
    verdict = check_assumption_b(system, postcritical_depth)
    post = verdict.clauses["postcritical_disjoint"]["evidence"].get("points", [])
    return SingularityReport(system, list(B), list(C), dict(index), dict(labels), dict(h_of),
                             post, postcritical_depth, verdict)


def _require_branch_point(system, b):
    b = tuple(b)
    if b not in _branch_structure(system)[2]:
        raise ValueError(f"{b} is not a branch point")
    return b


def orbit_set(system: SelfSimilarSystem, b, n: int) -> OrbitSet:
    """``O_{b,n} = {gamma_w(b) : |w| = n}``."""
    if n < 0:
        raise ValueError("level must be nonnegative")
    b = _require_branch_point(system, b)
    return OrbitSet(b, n, _orbit_points(system, b, n))


@lru_cache(maxsize=None)
def _orbit_points(system, b, n) -> tuple:
    level = {b}
    for _ in range(n):
        level = {g(p) for p in level for g in system.branches}
    return tuple(_sorted(level))


def iterated_branch_points(system: SelfSimilarSystem, n: int) -> list:
    """B_{gamma^n} from the orbit formula: images of B under words of length < n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    B = _branch_structure(system)[0]
    pts = set()
    for b in B:
        for k in range(n):
            pts.update(_orbit_points(system, b, k))
    return _sorted(pts)


def iterated_branch_values(system: SelfSimilarSystem, n: int) -> list:
    """C_{gamma^n} = union of h^j(C_gamma) for 0 <= j < n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    C = branch_values(system)
    pts = set(C)
    frontier = list(C)
    for _ in range(n - 1):
        frontier = left_inverse_many(system, frontier)
        pts.update(frontier)
    return _sorted(pts)


@dataclass(frozen=True)
class DirectCollisions:
    branch_points: list
    branch_values: list
    pairs: list  # (c, i, j) with flat multi-indices i < j

    def unique_slot(self, N: int, n: int) -> bool:
        """Every colliding pair differs in exactly one position."""
        from .ifs import multi_indices

        idx = multi_indices(N, n)
        return all(sum(a != b for a, b in zip(idx[i], idx[j])) == 1 for _, i, j in self.pairs)


def iterated_branch_points_direct(system: SelfSimilarSystem, n: int) -> DirectCollisions:
    """Brute force over all pairs of level-n composites (cost ~ N^(2n))."""
    if n < 1:
        raise ValueError("n must be at least 1")
    from .ifs import multi_indices

    maps = [tensor_map(system, idx) for idx in multi_indices(system.N, n)]
    cands = _collision_candidates(system, maps)
    uniq = _sorted(a for a, _, _ in cands)
    ok = dict(zip(uniq, in_attractor(system, uniq)))
    pairs = [(a, i, j) for a, i, j in cands if ok[a]]
    B = _sorted(maps[i](a) for a, i, _ in pairs)
    C = _sorted(a for a, _, _ in pairs)
    return DirectCollisions(B, C, pairs)


@dataclass(frozen=True)
class LevelStructure:
    """How the level-n composites hit a point ``c``.

    ``groups`` lists ``(b, flat_indices)`` for every distinct image ``b`` of ``c``;
    the identification equations live on groups with two or more indices.
    """

    point: tuple
    level: int
    groups: tuple

    @property
    def collisions(self) -> tuple:
        return tuple(g for g in self.groups if len(g[1]) >= 2)

    @property
    def fiber_dimension(self) -> int:
        return len(self.groups)


@lru_cache(maxsize=4096)
def level_structure(system: SelfSimilarSystem, c, n: int) -> LevelStructure:
    """Group the flat indices of Sigma^n by the exact image ``g_i(c)``."""
    c = tuple(c)
    imgs = [c]
    N = system.N
    for _ in range(n):
        # new flat index = (i_1 - 1) + N * old flat index
        imgs = [g(p) for p in imgs for g in system.branches]
    groups: dict = {}
    for k, p in enumerate(imgs):
        groups.setdefault(p, []).append(k)
    ordered = sorted(groups.items(), key=lambda kv: kv[1][0])
    assert len(imgs) == N ** n
    return LevelStructure(c, n, tuple((b, tuple(ks)) for b, ks in ordered))


@lru_cache(maxsize=256)
def check_assumption_b(system: SelfSimilarSystem, postcritical_depth: int = 8,
                       grid_depth: int | None = None, slot_level: int = 2) -> AssumptionBVerdict:
    """Check the three clauses plus the unique-collision-slot property.

    (1) ``h(gamma_j(y)) = y`` on an exact grid, with all in-K preimages agreeing;
    (2) every collision pair meets in a single point;
    (3) no branch point is reached by h^k, 1 <= k <= depth.
    """
    clauses = {}
    if grid_depth is None:
        grid_depth = 5 if system.N <= 3 else 3
    pts = generate_grid(system, grid_depth).points
    images = [g(y) for y in pts for g in system.branches]
    sources = [y for y in pts for _ in system.branches]
    found = preimages_in_attractor(system, images)
    bad = []
    for img, y, pre in zip(images, sources, found):
        values = {c for _, c in pre}
        if values != {y}:
            bad.append({"image": img, "expected": y, "preimages": sorted(values, key=point_key)})
    clauses["left_inverse"] = {"pass": not bad,
                               "evidence": {"grid_depth": grid_depth, "checked": len(images),
                                            "violations": bad[:5]}}
    try:
        B, C, *_ = _branch_structure(system)
        clauses["finite_branch_set"] = {"pass": True,
                                        "evidence": {"branch_points": len(B), "branch_values": len(C)}}
    except DegenerateCollision as exc:
        clauses["finite_branch_set"] = {"pass": False, "evidence": {"reason": str(exc)}}
        clauses["postcritical_disjoint"] = {"pass": False, "evidence": {"reason": "branch set not finite"}}
        clauses["unique_collision_slot"] = {"pass": False, "evidence": {"reason": "branch set not finite"}}
        return AssumptionBVerdict(False, clauses)

    if clauses["left_inverse"]["pass"]:
        post = postcritical_points(system, postcritical_depth)
        hit = [b for b in B if b in set(post)]
        clauses["postcritical_disjoint"] = {"pass": not hit,
                                            "evidence": {"depth": postcritical_depth,
                                                         "points": post, "intersection": hit}}
    else:
        clauses["postcritical_disjoint"] = {"pass": False,
                                            "evidence": {"reason": "h is not well defined"}}
    try:
        direct = iterated_branch_points_direct(system, slot_level)
        clauses["unique_collision_slot"] = {"pass": direct.unique_slot(system.N, slot_level),
                                            "evidence": {"level": slot_level, "pairs": len(direct.pairs)}}
    except DegenerateCollision as exc:
        clauses["unique_collision_slot"] = {"pass": False, "evidence": {"reason": str(exc)}}
    return AssumptionBVerdict(all(v["pass"] for v in clauses.values()), clauses)
