"""Ideals of the core, their closed sets, and the traces that detect them.

An ideal is described by the closed subset of K it cuts out of C(K): the
whole of K for the zero ideal, nothing for the full algebra, and finite unions
of orbit sets ``O_{b,n}`` in between.  Membership is tested through trace
kernels: ``T`` lies in the model primitive ideal of the tag ``(b, n)`` exactly
when ``tau^(b,n)(T*T) = 0``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .attractor import float_grid, point_key
from .core_rep import GradedCoreElement, frobenius_sup, pi
from .fields import ScalarField, evaluate_chunked
from .ifs import SelfSimilarSystem, left_inverse
from .singularity import branch_points, check_assumption_b, orbit_set

__all__ = [
    "IdealDescriptor",
    "ClosedSet",
    "Discrete",
    "Hutchinson",
    "AssumptionBError",
    "OrbitOverlapWarning",
    "orbit_union",
    "closed_set",
    "descent_levels",
    "descent_consistency",
    "primitive_ideals",
    "ideal_meet",
    "trace_eval",
    "ideal_membership",
    "quotient_dimension",
    "quotient_rank",
    "jacobson_closure",
    "separation_witness",
    "ideal_contains",
]


class AssumptionBError(ValueError):
    """The system fails Assumption B, so the classification does not apply."""


class OrbitOverlapWarning(UserWarning):
    pass


def _tag_key(tag):
    b, n = tag
    return (point_key(b), n)


@dataclass(frozen=True)
class IdealDescriptor:
    kind: str  # "zero" | "full" | "orbits"
    tags: tuple = ()  # sorted ((b, n), ...), only for "orbits"

    def __post_init__(self):
        if self.kind not in ("zero", "full", "orbits"):
            raise ValueError(f"unknown ideal kind {self.kind!r}")
        if self.kind != "orbits" and self.tags:
            raise ValueError("only orbit unions carry tags")
        if self.kind == "orbits" and not self.tags:
            raise ValueError("an orbit union needs at least one tag")

    @classmethod
    def zero(cls) -> "IdealDescriptor":
        return cls("zero")

    @classmethod
    def full(cls) -> "IdealDescriptor":
        return cls("full")

    @classmethod
    def orbits(cls, tags) -> "IdealDescriptor":
        """Canonical orbit union: tags as ``(tuple point, int level)``, deduplicated and sorted."""
        canon = {(tuple(b), int(n)) for b, n in tags}
        for _, n in canon:
            if n < 0:
                raise ValueError("orbit levels must be nonnegative")
        return cls("orbits", tuple(sorted(canon, key=_tag_key)))

    def __str__(self):
        if self.kind != "orbits":
            return self.kind.capitalize()
        return " & ".join(f"J({_fmt_point(b)}, {n})" for b, n in self.tags)


def _fmt_point(p) -> str:
    from .exact import format_scalar

    return "(" + ", ".join(format_scalar(x) for x in p) + ")"


@dataclass(frozen=True)
class ClosedSet:
    """A closed subset of K: either all of K or a finite exact point set."""

    whole: bool
    points: tuple = ()

    @classmethod
    def finite(cls, points) -> "ClosedSet":
        return cls(False, tuple(sorted(set(points), key=point_key)))

    def issubset(self, other: "ClosedSet") -> bool:
        if other.whole:
            return True
        if self.whole:
            return False
        return set(self.points) <= set(other.points)

    def __contains__(self, p):
        return self.whole or tuple(p) in set(self.points)

    def __len__(self):
        if self.whole:
            raise TypeError("K is not a finite set")
        return len(self.points)

    def __str__(self):
        if self.whole:
            return "K"
        return "{" + ", ".join(_fmt_point(p) for p in self.points) + "}"


K = ClosedSet(True)
EMPTY = ClosedSet(False)


def orbit_union(system: SelfSimilarSystem, tags) -> IdealDescriptor:
    """Validated orbit union; overlapping orbit sets raise a warning and are kept apart."""
    d = IdealDescriptor.orbits(tags)
    seen: dict = {}
    for b, n in d.tags:
        for p in orbit_set(system, b, n):
            if p in seen:
                warnings.warn(f"orbit sets of tags {seen[p]} and {(b, n)} share the point {p}",
                              OrbitOverlapWarning, stacklevel=2)
            seen.setdefault(p, (b, n))
    return d


def closed_set(system: SelfSimilarSystem, d: IdealDescriptor) -> ClosedSet:
    if d.kind == "zero":
        return K
    if d.kind == "full":
        return EMPTY
    pts = set()
    for b, n in d.tags:
        pts.update(orbit_set(system, b, n).points)
    return ClosedSet.finite(pts)


def descent_levels(system: SelfSimilarSystem, b, n: int) -> list[ClosedSet]:
    """``[F_0, ..., F_n, F_{n+1}]`` with ``F_k = O_{b, n-k}`` and ``F_{n+1}`` empty."""
    return [ClosedSet.finite(orbit_set(system, b, n - k).points) for k in range(n + 1)] + [EMPTY]


def descent_consistency(system: SelfSimilarSystem, b, n: int) -> dict:
    """Check ``h(F_k minus B) within F_{k+1}`` and ``gamma_j(F_{k+1}) within F_k``."""
    F = descent_levels(system, b, n)
    B = set(branch_points(system).branch_points)
    forward = backward = True
    for k in range(len(F) - 1):
        nxt = set(F[k + 1].points)
        for p in F[k].points:
            if p not in B and left_inverse(system, p) not in nxt:
                forward = False
        cur = set(F[k].points)
        for p in F[k + 1].points:
            if any(g(p) not in cur for g in system.branches):
                backward = False
    return {"h_forward": forward, "preimages_back": backward}


def primitive_ideals(system: SelfSimilarSystem, max_level: int, postcritical_depth: int = 8) -> list:
    """Zero plus one model primitive ideal per tag ``(b, n)``, ``n <= max_level``."""
    verdict = check_assumption_b(system, postcritical_depth)
    if not verdict.passed:
        raise AssumptionBError(f"Assumption B fails ({', '.join(verdict.failures())})")
    out = [IdealDescriptor.zero()]
    for b in branch_points(system, postcritical_depth).branch_points:
        for n in range(max_level + 1):
            out.append(IdealDescriptor.orbits([(b, n)]))
    return out


def ideal_meet(ds) -> IdealDescriptor:
    """Intersection of ideals: closed sets (tag families) unite; Zero absorbs, Full is neutral."""
    tags = []
    for d in ds:
        if d.kind == "zero":
            return IdealDescriptor.zero()
        if d.kind == "orbits":
            tags.extend(d.tags)
    return IdealDescriptor.orbits(tags) if tags else IdealDescriptor.full()


def ideal_contains(system: SelfSimilarSystem, big: IdealDescriptor, small: IdealDescriptor) -> bool:
    """``small`` within ``big``, read off the closed sets (they order the ideals in reverse)."""
    return closed_set(system, big).issubset(closed_set(system, small))


def jacobson_closure(system: SelfSimilarSystem, S, universe) -> list:
    """Hull-kernel closure of ``S`` inside the finite list ``universe`` of primitives."""
    meet = ideal_meet(list(S))
    return [P for P in universe if ideal_contains(system, P, meet)]


# ------------------------------------------------------------ traces

@dataclass(frozen=True)
class Discrete:
    """``tau^(b,n)(T) = N^-n Tr(pi_n(T)(b))``, components above level n dropped."""

    point: tuple
    level: int


@dataclass(frozen=True)
class Hutchinson:
    """Normalized trace integrated against the self-similar measure.

    ``depth`` is the total word length: a level-m element is averaged over the
    depth ``depth - m`` grid, so appending a zero component moves the same
    points one level down and leaves the value unchanged.
    """

    depth: int
    weights: tuple | None = None  # branch probabilities; uniform when None


def _validate_discrete(system, spec: Discrete):
    report = branch_points(system)
    b = tuple(spec.point)
    if b not in report.branch_index:
        raise ValueError(f"{b} is not a branch point")
    if spec.level < 0:
        raise ValueError("trace level must be nonnegative")
    return b


def _grid_weights(system, depth, weights):
    if weights is None:
        return None
    p = np.asarray(weights, dtype=np.float64)
    if p.shape != (system.N,) or np.any(p < 0) or abs(p.sum() - 1) > 1e-12:
        raise ValueError("Hutchinson weights must be a probability vector over the branches")
    w = np.ones(1)
    for _ in range(depth):
        # rows are word-ordered with the first letter fastest
        w = np.kron(p, w)
    return w


def trace_eval(system: SelfSimilarSystem, spec, T: GradedCoreElement) -> complex:
    if isinstance(spec, Discrete):
        b = _validate_discrete(system, spec)
        n = spec.level
        U = T.truncate(n) if T.level > n else T.pad(n)
        val = pi(U)(system.to_float([b]))[0]
        return complex(np.trace(val) / system.N ** n)
    if isinstance(spec, Hutchinson):
        m = T.level
        if spec.depth < m:
            raise ValueError(f"Hutchinson depth {spec.depth} is below the element level {m}")
        X = float_grid(system, spec.depth - m)
        w = _grid_weights(system, spec.depth - m, spec.weights)
        P = pi(T)
        total = 0j
        for sl, vals in evaluate_chunked(P, X):
            tr = np.trace(vals, axis1=1, axis2=2)
            total += np.sum(tr) if w is None else np.sum(w[sl] * tr)
        if w is None:
            total /= X.shape[0]
        return complex(total / system.N ** m)
    raise TypeError(f"unknown trace spec {spec!r}")


def ideal_membership(system: SelfSimilarSystem, d: IdealDescriptor, T: GradedCoreElement,
                     tol: float = 1e-9, grid_depth: int = 8) -> bool:
    if d.kind == "full":
        return True
    if d.kind == "zero":
        return frobenius_sup(pi(T), float_grid(system, grid_depth)) <= tol
    TT = T.adjoint() @ T
    return all(trace_eval(system, Discrete(b, n), TT).real <= tol for b, n in d.tags)


def quotient_dimension(system: SelfSimilarSystem, d: IdealDescriptor) -> int:
    """Dimension of the quotient by an orbit union: one matrix block M_{N^n} per tag."""
    if d.kind != "orbits":
        raise ValueError("quotient dimension is defined for orbit unions")
    return sum(system.N ** (2 * n) for _, n in d.tags)


def quotient_rank(system: SelfSimilarSystem, d: IdealDescriptor, rng: np.random.Generator,
                  samples: int | None = None, rtol: float = 1e-8) -> int:
    """Numerical rank of ``T -> (pi_n(T)(b))_{(b,n)}`` over random elements.

    Each tag contributes the block of its truncated representation at ``b``;
    the rank is the dimension of the image, i.e. of the quotient.
    """
    from .core_rep import random_graded_element

    top = max(n for _, n in d.tags)
    if samples is None:
        samples = quotient_dimension(system, d) + 8
    rows = []
    for _ in range(samples):
        T = random_graded_element(system, top, rng)
        parts = []
        for b, n in d.tags:
            U = T.truncate(n)
            parts.append(pi(U)(system.to_float([b]))[0].ravel())
        rows.append(np.concatenate(parts))
    A = np.array(rows)
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0


def separation_witness(system: SelfSimilarSystem, kill, keep) -> GradedCoreElement:
    """Scalar element in the kernel of ``tau^kill`` but not of ``tau^keep``.

    It is ``prod_{p in O_kill} |x - p|^2``, scaled to peak at 1 on ``O_keep``;
    its trace against ``keep`` is at least ``N^-n`` for the level ``n`` of ``keep``.
    """
    zeros = system.to_float(list(orbit_set(system, *kill)))
    target = system.to_float(list(orbit_set(system, *keep)))

    def raw(X):
        out = np.ones(X.shape[0])
        for p in zeros:
            out = out * np.sum((X - p) ** 2, axis=1)
        return out

    peak = float(np.max(raw(target)))
    if peak == 0.0:
        raise ValueError(f"orbit set of {keep} lies inside that of {kill}; no scalar witness")
    a = ScalarField(lambda X: (raw(X) / peak).astype(np.complex128), "witness")
    return GradedCoreElement.scalar(a, system)
