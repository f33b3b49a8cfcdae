"""Property batteries on random elements.

Each battery returns rows ``{"property", "max_defect", "tolerance", "pass"}``;
:func:`run_suite` dispatches on the suite name used by the ``verify`` command.
"""
from __future__ import annotations

import numpy as np

from .attractor import float_grid, generate_grid
from .bimodule import (_collision_groups, fiber_basis, inner_product, lift, membership_defect,
                       module_actions, random_scalar, random_z_member, rank_one)
from .core_rep import (GradedCoreElement, compact_absorption, d_defect, d_membership, pi, random_compact,
                       random_graded_element, refined_sup_norms, sup_norm)
from .fields import CHUNK, MatrixField, ScalarField, VectorField, branch_images, evaluate_chunked
from .ideals import (Discrete, Hutchinson, closed_set, descent_consistency, ideal_meet,
                     jacobson_closure, primitive_ideals, quotient_dimension, quotient_rank,
                     separation_witness, trace_eval)
from .ifs import SelfSimilarSystem, left_inverse_many
from .singularity import (branch_points, check_assumption_b, iterated_branch_points,
                          iterated_branch_points_direct, iterated_branch_values, level_structure,
                          orbit_set)

__all__ = [
    "Check",
    "SUITES",
    "run_suite",
    "representation_checks",
    "singularity_suite",
    "bimodule_suite",
    "d_membership_checks",
    "perturb_entry",
    "core_rep_suite",
    "ideals_suite",
    "pair_levels",
    "norm_refinement",
]

SUITES = ("all", "singularity", "bimodule", "core-rep", "ideals")


class Check:
    """Running maximum of a defect against a tolerance."""

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.max_defect = 0.0
        self.failed = False

    def record(self, defect: float, tolerance: float | None = None) -> None:
        tol = self.tolerance if tolerance is None else tolerance
        defect = float(defect)
        if not np.isfinite(defect) or defect > tol:
            self.failed = True
        self.max_defect = max(self.max_defect, defect)

    def row(self) -> dict:
        return {"property": self.name, "max_defect": self.max_defect,
                "tolerance": self.tolerance, "pass": not self.failed}


def _row(name: str, defect: float, tolerance: float) -> dict:
    c = Check(name, tolerance)
    c.record(defect)
    return c.row()


def _flag(name: str, ok: bool) -> dict:
    """A yes/no property reported as defect 0 or 1."""
    return _row(name, 0.0 if ok else 1.0, 0.0)


def _fro(a: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(a.real ** 2 + a.imag ** 2, axis=(-2, -1)))


# ------------------------------------------------------------ singularity

def singularity_suite(system: SelfSimilarSystem, postcritical_depth: int = 8,
                      max_level: int = 3, orbit_depth: int = 5) -> list[dict]:
    rows = []
    verdict = check_assumption_b(system, postcritical_depth)
    rows.append(_flag("assumption B", verdict.passed))
    if not system.N ** 2 <= 64 or not verdict.clauses["finite_branch_set"]["pass"]:
        return rows

    grid = generate_grid(system, 4 if system.N <= 3 else 2).points
    images = [g(y) for y in grid for g in system.branches]
    back = left_inverse_many(system, images)
    bad = sum(1 for y, z in zip((y for y in grid for _ in system.branches), back) if y != z)
    rows.append(_row("h(gamma_j(y)) = y on the grid", bad, 0))

    report = branch_points(system, postcritical_depth)
    bad = 0
    for b in report.branch_points:
        for n in range(orbit_depth):
            upper = orbit_set(system, b, n + 1).points
            if set(left_inverse_many(system, list(upper))) != set(orbit_set(system, b, n).points):
                bad += 1
    rows.append(_row("h(O_{b,n+1}) = O_{b,n}", bad, 0))

    bad = 0
    for n in range(1, max_level + 1):
        if set(iterated_branch_points(system, n)) != set(iterated_branch_points_direct(system, n).branch_points):
            bad += 1
    rows.append(_row("branch points of gamma^n: orbit formula = brute force", bad, 0))

    bad = 0
    for n in range(1, max(max_level, 2)):
        if not set(iterated_branch_values(system, n)) <= set(iterated_branch_values(system, n + 1)):
            bad += 1
    rows.append(_row("C_{gamma^n} within C_{gamma^(n+1)}", bad, 0))

    bad = 0
    for c in report.branch_values:
        labels = sorted(j for _, ks in level_structure(system, c, 1).groups for j in ks)
        if labels != list(range(system.N)) or any(report.branch_index[b] < 2 for b in report.branch_points):
            bad += 1
    rows.append(_row("label sets partition the branches", bad, 0))
    return rows


# ------------------------------------------------------------ bimodule

def bimodule_suite(system: SelfSimilarSystem, grid_depth: int = 8, max_level: int = 2,
                   count: int = 10, seed: int = 0, tolerance: float = 1e-12) -> list[dict]:
    rng = np.random.default_rng(seed)
    X = float_grid(system, grid_depth)
    pos = Check("(f|f) >= 0", tolerance)
    axiom = Check("(f a'|g a') = conj(a')(f|g)a'", tolerance)
    keep = Check("module actions preserve Z", tolerance)
    adj = Check("theta_{f,g}* = theta_{g,f}", 0.0)
    calc = Check("theta_{f,g} theta_{u,v} = theta_{f (g|u), v}", 1e-9)
    dmem = Check("theta_{f,g} in D", tolerance)
    lift_ip = Check("(f x g|f' x g') = (g|(f|f') . g')", 1e-9)
    assoc = Check("lift associativity", tolerance)
    for t in range(count):
        n = 1 + t % max_level
        f, g, u, v = (random_z_member(system, n, rng) for _ in range(4))
        a, ar = random_scalar(system, rng), random_scalar(system, rng)
        fg = inner_product(f, g)(X)
        pos.record(max(0.0, -float(np.min(inner_product(f, f)(X).real))))
        lhs = inner_product(module_actions(None, f, ar), module_actions(None, g, ar))(X)
        rhs = np.conj(ar(X)) * fg * ar(X)
        axiom.record(np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(rhs))))
        keep.record(membership_defect(module_actions(a, f, ar)))
        th = rank_one(f, g)
        adj.record(np.max(np.abs(th.adjoint()(X) - rank_one(g, f)(X))))
        fgu = VectorField(system, n, lambda Y, f=f, g=g, u=u: f(Y) * inner_product(g, u)(Y)[:, None],
                          in_z=True)
        prod = (th @ rank_one(u, v))(X)
        ref = rank_one(fgu, v)(X)
        calc.record(np.max(np.abs(prod - ref)) / (1 + np.max(np.abs(ref))))
        dmem.record(d_defect(th))
        f1, f2 = random_z_member(system, 1, rng), random_z_member(system, 1, rng)
        g1, g2 = random_z_member(system, n, rng), random_z_member(system, n, rng)
        lhs = inner_product(lift(f1, g1), lift(f2, g2))(X)
        rhs = inner_product(g1, module_actions(inner_product(f1, f2), g2))(X)
        lift_ip.record(np.max(np.abs(lhs - rhs)) / (1 + np.max(np.abs(rhs))))
        h1 = random_z_member(system, 1, rng)
        l1 = lift(lift(f1, g1), h1)(X)
        l2 = lift(f1, lift(g1, h1))(X)
        assoc.record(np.max(np.abs(l1 - l2)) / (1 + np.max(np.abs(l1))))

    law = 0
    report = branch_points(system)
    for n in range(1, max_level + 1):
        for c in iterated_branch_values(system, n):
            ls = level_structure(system, c, n)
            sizes = sum(len(ks) for _, ks in ls.groups)
            if sizes != system.N ** n or fiber_basis(system, c, n).dimension >= system.N ** n:
                law += 1
        for p in generate_grid(system, 2).points:
            if p not in set(iterated_branch_values(system, n)):
                if fiber_basis(system, p, n).dimension != system.N ** n:
                    law += 1
    orth = 0.0
    for c in report.branch_values:
        u = fiber_basis(system, c, 1).vectors
        orth = max(orth, float(np.max(np.abs(u @ u.T - np.eye(len(u))))))
    return [pos.row(), axiom.row(), keep.row(), adj.row(), calc.row(), dmem.row(), lift_ip.row(),
            assoc.row(), _row("fiber dimension law", law, 0), _row("fiber basis orthonormal", orth, tolerance)
            ] + d_membership_checks(system, max(count, 20), max_level, seed)


def perturb_entry(M: MatrixField, c, i: int, j: int, eps: float) -> MatrixField:
    """``M`` with entry ``(i, j)`` moved by ``eps`` at the exact point ``c`` only."""
    cf = M.system.to_float([c])[0]
    k = M.size

    def fn(X):
        out = M(X).copy()
        at = np.all(X == cf, axis=1)
        out[at, i, j] += eps
        return out.reshape(X.shape[0], k, k)

    return MatrixField(M.system, M.level, fn)


def d_membership_checks(system: SelfSimilarSystem, count: int = 20, max_level: int = 2,
                        seed: int = 0, eps: float = 1e-3) -> list[dict]:
    """Rank-ones of Z-members lie in D; moving one grouped entry at a branch value breaks it.

    The moved entry sits in a row of a collision group, so the identification
    equations at ``c`` see it whatever the column.
    """
    rng = np.random.default_rng(seed)
    ok = Check("rank-one of Z-members passes d_membership", 0.0)
    caught = Check("perturbed entries at C fail d_membership", 0.0)
    for t in range(count):
        n = 1 + t % max_level
        th = rank_one(random_z_member(system, n, rng), random_z_member(system, n, rng))
        ok.record(0.0 if d_membership(th) else 1.0)
        cg = _collision_groups(system, n)
        if not cg:
            continue
        c, groups = cg[rng.integers(len(cg))]
        g = groups[rng.integers(len(groups))]
        i = int(g[rng.integers(len(g))])
        j = int(rng.integers(system.N ** n))
        if rng.integers(2):
            i, j = j, i  # perturb a grouped column instead
        caught.record(0.0 if not d_membership(perturb_entry(th, c, i, j, eps)) else 1.0)
    rows = [ok.row()]
    if any(_collision_groups(system, n) for n in range(1, max_level + 1)):
        rows.append(caught.row())
    return rows


# ------------------------------------------------------------ core representation

def pair_levels(count: int, max_level: int) -> list[int]:
    """Levels for ``count`` elements multiplied in pairs ``(2i, 2i+1)``.

    The first factor cycles through ``0..max_level``; its partner steps through
    the levels not above it, so every ordered level combination shows up while
    only a quarter of the pairs sit at the top level.
    """
    L = max_level + 1
    out = []
    for i in range((count + 1) // 2):
        a = i % L
        b = (i // L) % (a + 1)
        out += [a, b]
    return out[:count]


def _diagram_defect(T: GradedCoreElement, X: np.ndarray, max_level: int) -> float:
    """``pi_{n+1}(U + 0)(x)`` against ``diag_j pi_n(U)(gamma_j x)`` entrywise.

    ``U`` is ``T`` itself, or ``T`` cut one level down when it already sits at
    ``max_level``, so the check never leaves the levels under test.
    """
    U = T if T.level < max_level else T.truncate(T.level - 1)
    system = T.system
    N, P = system.N, X.shape[0]
    big = pi(U.pad(U.level + 1))(X)
    small = pi(U)(branch_images(system, X))
    m = small.shape[-1]
    small = small.reshape(N, P, m, m)
    diff = big.reshape(P, N, m, N, m).copy()
    for j in range(N):
        diff[:, j, :, j, :] -= small[j]
    return float(np.max(np.abs(diff)))


def representation_checks(system: SelfSimilarSystem, count: int = 50, max_level: int = 3,
                          grid_depth: int = 10, seed: int = 0, norm_depth: int = 7,
                          tolerance: float = 1e-9, chunk: int = CHUNK) -> list[dict]:
    """Homomorphism, adjoint and embedding checks of ``pi`` on random elements.

    Elements are multiplied in disjoint pairs.  The homomorphism defect is
    measured in Frobenius norm, which bounds the operator norm from above.
    The norms ``||S||`` in the threshold are taken on the nested
    depth-``norm_depth`` grid, a lower bound for the sup over the full grid, so
    the threshold is never looser than the stated one.
    """
    rng = np.random.default_rng(seed)
    X = float_grid(system, grid_depth)
    Xn = float_grid(system, min(norm_depth, grid_depth))
    elements = [random_graded_element(system, lv, rng) for lv in pair_levels(count, max_level)]

    hom = Check("pi(ST) = pi(S)pi(T)", tolerance)
    adj = Check("pi(S*) = pi(S)*", 0.0)
    diag = Check("embedding diagram commutes", 0.0)

    for p in range(0, len(elements) - 1, 2):
        S, T = elements[p], elements[p + 1]
        thr = tolerance * (1 + sup_norm(pi(S), Xn, chunk) * sup_norm(pi(T), Xn, chunk))
        ST = S @ T
        PS, PT, PST = pi(S.pad(ST.level)), pi(T.pad(ST.level)), pi(ST)
        PSa, PTa = pi(S.adjoint()), pi(T.adjoint())
        PSs, PTs = pi(S), pi(T)

        def defects(Y):
            h = float(np.max(_fro(PST(Y) - PS(Y) @ PT(Y))))
            a = max(float(np.max(np.abs(PSa(Y) - np.conj(np.swapaxes(PSs(Y), -1, -2))))),
                    float(np.max(np.abs(PTa(Y) - np.conj(np.swapaxes(PTs(Y), -1, -2))))))
            d = max(_diagram_defect(S, Y, max_level), _diagram_defect(T, Y, max_level))
            return h, a, d

        for _, (h, a, d) in evaluate_chunked(defects, X, chunk):
            hom.record(h, thr)
            adj.record(a)
            diag.record(d)
    return [hom.row(), adj.row(), diag.row()]


def core_rep_suite(system: SelfSimilarSystem, grid_depth: int = 8, max_level: int = 3,
                   count: int = 12, seed: int = 0, tolerance: float = 1e-9) -> list[dict]:
    rows = representation_checks(system, count, max_level, grid_depth, seed, tolerance=tolerance)
    rng = np.random.default_rng(seed + 1)
    X = float_grid(system, min(grid_depth, 6))
    B = branch_points(system).branch_points
    Bx = system.to_float(B) if B else None

    epres = Check("pi(T) preserves Z", 1e-12)
    inter = Check("absorbed compacts vanish at branch points", tolerance)
    absorb = Check("compact absorption keeps pi and lands in D", tolerance)
    for t in range(count):
        n = 1 + t % max_level
        T = random_graded_element(system, n, rng)
        f = random_z_member(system, n, rng)
        epres.record(membership_defect(pi(T).apply(f)))
        if not B:
            continue
        # v vanishes on B; T_n v lies in the level-n and level-(n+1) compacts at once
        v = _vanishing_scalar(system, B, rng)
        Tn = GradedCoreElement.single(random_compact(system, n, rng))
        both = Tn.times_scalar(v)
        inter.record(float(np.max(np.abs(pi(both)(Bx)))))
        up = compact_absorption(T, v)
        before = pi(T.times_scalar(v).pad(up.level))(X)
        after = pi(up)(X)
        dd = max(d_defect(c) for c in up.components if c is not None)
        absorb.record(max(float(np.max(np.abs(before - after))), dd))
    rows += [epres.row(), inter.row(), absorb.row()]

    stab = Check("sup norm stabilizes under refinement", 1e-3)
    mono = True
    for t in range(3):
        T = random_graded_element(system, 1 + t % max_level, rng)
        norms = norm_refinement(pi(T), system, max(2, min(grid_depth, 8) - 2))
        mono &= all(b >= a for a, b in zip(norms, norms[1:]))
        stab.record(_stabilized(norms))
    rows += [stab.row(), _flag("sup norm monotone under refinement", mono)]
    return rows


def _stabilized(norms: list) -> float:
    """Smallest relative change between depths two apart seen along the refinement."""
    best = np.inf
    for a, b in zip(norms, norms[2:]):
        best = min(best, abs(b - a) / b if b else 0.0)
    return best


def norm_refinement(M, system: SelfSimilarSystem, start: int, rtol: float = 1e-3,
                    extra: int = 12) -> list[float]:
    """Locally refined sup norms from depth ``start`` until two depths two
    apart agree to ``rtol`` (at most ``extra`` refinements)."""
    norms = refined_sup_norms(M, system, start, start + 2)
    while abs(norms[-1] - norms[-3]) > rtol * norms[-1] and len(norms) < extra + 1:
        norms = refined_sup_norms(M, system, start, start + len(norms))
    return norms


def _vanishing_scalar(system, points, rng) -> ScalarField:
    """Random polynomial times ``prod |x - b|^2`` over the given exact points."""
    base = random_scalar(system, rng)
    P = system.to_float(points)

    def fn(X):
        out = base(X)
        for p in P:
            out = out * np.sum((X - p) ** 2, axis=1)
        return out

    return ScalarField(fn, "vanishing")


# ------------------------------------------------------------ ideals and traces

def _trace_specs(system, max_level, depth):
    specs = [Hutchinson(depth)]
    for b in branch_points(system).branch_points:
        specs += [Discrete(b, n) for n in range(max_level + 1)]
    return specs


def ideals_suite(system: SelfSimilarSystem, max_level: int = 3, max_ideal_level: int = 2,
                 count: int = 6, seed: int = 0, hutchinson_depth: int = 8,
                 postcritical_depth: int = 8) -> list[dict]:
    rng = np.random.default_rng(seed)
    lin = Check("trace linearity", 1e-12)
    positive = Check("trace positivity", 1e-9)
    tracial = Check("trace tracial", 1e-9)
    norm = Check("trace normalization", 1e-12)
    vanish = Check("tau^(b,n) vanishes above level n", 0.0)
    consist = Check("Hutchinson level consistency", 1e-9)
    specs = _trace_specs(system, max_ideal_level, hutchinson_depth)
    one = GradedCoreElement.unit(system)
    for spec in specs:
        norm.record(abs(trace_eval(system, spec, one) - 1))
    for t in range(count):
        lv = t % (max_level + 1)
        S = random_graded_element(system, lv, rng)
        T = random_graded_element(system, (lv + 1) % (max_level + 1), rng)
        a, b = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        comb = S.scale(a) + T.scale(b)
        ST, TS = S @ T, T @ S
        SS = S.adjoint() @ S
        for spec in specs:
            tS, tT = trace_eval(system, spec, S), trace_eval(system, spec, T)
            scale = 1 + abs(a * tS) + abs(b * tT)
            lin.record(abs(trace_eval(system, spec, comb) - a * tS - b * tT) / scale)
            positive.record(max(0.0, -trace_eval(system, spec, SS).real))
            x, y = trace_eval(system, spec, ST), trace_eval(system, spec, TS)
            tracial.record(abs(x - y) / (1 + abs(x)))
        consist.record(abs(trace_eval(system, specs[0], S)
                           - trace_eval(system, specs[0], S.pad(S.level + 1))))
        for spec in specs[1:]:
            top = GradedCoreElement.single(random_compact(system, spec.level + 1, rng))
            vanish.record(abs(trace_eval(system, spec, top)))
    rows = [lin.row(), positive.row(), tracial.row(), norm.row(), vanish.row(), consist.row()]

    B = branch_points(system, postcritical_depth).branch_points
    try:
        prim = primitive_ideals(system, max_ideal_level, postcritical_depth)
    except ValueError:
        return rows + [_flag("primitive ideals (Assumption B)", False)]
    sets = [closed_set(system, d) for d in prim]
    distinct = len({(s.whole, s.points) for s in sets}) == len(sets)
    rows.append(_flag("distinct primitives have distinct closed sets", distinct))
    rows.append(_flag("descent consistency",
                      all(all(descent_consistency(system, b, n).values())
                          for b in B for n in range(max_ideal_level + 1))))
    bad = 0
    for d in prim[1:]:
        if quotient_rank(system, d, rng) != quotient_dimension(system, d):
            bad += 1
    rows.append(_row("quotient rank = sum N^(2n)", bad, 0))
    margin = np.inf
    tags = [d.tags[0] for d in prim[1:]]
    for s in tags:
        for k in tags:
            if s == k:
                continue
            w = separation_witness(system, s, k)
            ww = w.adjoint() @ w
            killed = abs(trace_eval(system, Discrete(*s), ww))
            kept = trace_eval(system, Discrete(*k), ww).real
            margin = min(margin, kept - killed * 1e12)
    if tags:
        rows.append(_row("kernel separation margin below 1e-3", max(0.0, 1e-3 - margin), 0.0))
    closure_ok = jacobson_closure(system, [prim[0]], prim) == prim
    closure_ok &= all(jacobson_closure(system, [d], prim) == [d] for d in prim[1:])
    closure_ok &= ideal_meet([]).kind == "full" and jacobson_closure(system, prim, prim) == prim
    rows.append(_flag("Jacobson closure", closure_ok))
    return rows


# ------------------------------------------------------------ dispatch

def run_suite(system: SelfSimilarSystem, suite: str = "all", grid_depth: int = 8, max_level: int = 3,
              max_ideal_level: int = 2, postcritical_depth: int = 8, seed: int = 0,
              tolerance: float = 1e-9) -> list[dict]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    rows: list[dict] = []
    if suite in ("all", "singularity"):
        rows += [dict(r, suite="singularity")
                 for r in singularity_suite(system, postcritical_depth, max_level)]
    if suite in ("all", "bimodule"):
        rows += [dict(r, suite="bimodule")
                 for r in bimodule_suite(system, grid_depth, max(1, min(max_level, 2)), seed=seed)]
    if suite in ("all", "core-rep"):
        rows += [dict(r, suite="core-rep")
                 for r in core_rep_suite(system, grid_depth, max_level, seed=seed, tolerance=tolerance)]
    if suite in ("all", "ideals"):
        rows += [dict(r, suite="ideals")
                 for r in ideals_suite(system, max_level, max_ideal_level, seed=seed,
                                       postcritical_depth=postcritical_depth)]
    return rows
