"""Acceptance run: one printed pass/fail line per criterion.

Run under pytest, or directly with ``python tests/test_acceptance.py``.
"""
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from selfsim import builtin
from selfsim.cli import analyze_data
from selfsim.core_rep import fiber_algebra, random_graded_element
from selfsim.bimodule import fiber_basis_from_groups
from selfsim.exact import QSqrt3
from selfsim.ideals import (Discrete, Hutchinson, IdealDescriptor, closed_set, jacobson_closure,
                            primitive_ideals, quotient_dimension, quotient_rank, separation_witness,
                            trace_eval)
from selfsim.ifs import sierpinski_points
from selfsim.singularity import branch_points, iterated_branch_points, iterated_branch_points_direct
from selfsim.verify import d_membership_checks, ideals_suite, representation_checks

q = Fraction
HALF = (q(1, 2),)
SYSTEMS = ("tent", "sierpinski", "cantor")


def criterion_1():
    data = analyze_data(builtin("tent"), 8)
    (b,) = data["branch_data"]
    ok = (data["branch_points"] == [HALF] and data["branch_values"] == [(q(1),)]
          and b["index"] == 2 and b["labels"] == [1, 2]
          and set(data["postcritical"]["points"]) == {(q(0),), (q(1),)}
          and data["assumption_b"]["pass"])
    return ok, "B={1/2}, C={1}, e=2, labels (1,2), P-evidence {0,1}, Assumption B pass"


def criterion_2():
    tent = builtin("tent")
    bad = []
    for n in range(1, 6):
        got = set(closed_set(tent, IdealDescriptor.orbits([(HALF, n - 1)])).points)
        ref = {(q(2 * k - 1, 2 ** n),) for k in range(1, 2 ** (n - 1) + 1)}
        if got != ref:
            bad.append(n)
    return not bad, f"closed sets exact for n=1..5 (mismatches: {bad or 'none'})"


def criterion_3():
    cantor = builtin("cantor")
    B = branch_points(cantor).branch_points
    prim = primitive_ideals(cantor, 3)
    return B == [] and prim == [IdealDescriptor.zero()], f"B={B}, primitives={[str(d) for d in prim]}"


def criterion_4():
    s = builtin("sierpinski")
    V = sierpinski_points()
    rep = branch_points(s)
    expected = {(QSqrt3(q(1, 4)), QSqrt3(0, q(1, 4))), (QSqrt3(q(1, 2)), QSqrt3(0)),
                (QSqrt3(q(3, 4)), QSqrt3(0, q(1, 4)))}
    ok = (set(rep.branch_points) == expected == {V["S"], V["T"], V["U"]}
          and set(rep.branch_values) == {V["P"], V["Q"], V["R"]})
    return ok, "B={S,T,U}, C={P,Q,R} exact in Q(sqrt3)"


def criterion_5():
    bad = []
    for name in SYSTEMS:
        s = builtin(name)
        for n in (1, 2, 3):
            if set(iterated_branch_points(s, n)) != set(iterated_branch_points_direct(s, n).branch_points):
                bad.append((name, n))
    tent2 = set(iterated_branch_points(builtin("tent"), 2)) == {HALF, (q(1, 4),), (q(3, 4),)}
    return not bad and tent2, f"orbit formula = brute force for n<=3 (mismatches: {bad or 'none'}); tent n=2 ok={tent2}"


def criterion_6():
    groups = [(0, 1), (2, 3, 4)]
    fa = fiber_algebra(groups=groups, size=5)
    u = fiber_basis_from_groups(5, groups).vectors
    ok = (fa.matrix_size == 2 and fa.dimension == 4
          and np.allclose(u[0], [2 ** -0.5] * 2 + [0] * 3, rtol=0, atol=1e-15)
          and np.allclose(u[1], [0] * 2 + [3 ** -0.5] * 3, rtol=0, atol=1e-15))
    return ok, f"w_c={fa.matrix_size}, dim={fa.dimension}, entries 1/sqrt2 and 1/sqrt3"


def criterion_7():
    parts, ok = [], True
    for name in SYSTEMS:
        rows = representation_checks(builtin(name), count=50, max_level=3, grid_depth=10,
                                     tolerance=1e-9)
        ok &= all(r["pass"] for r in rows)
        parts.append(f"{name}: hom {rows[0]['max_defect']:.1e}, adj {rows[1]['max_defect']:.0e}, "
                     f"diagram {rows[2]['max_defect']:.0e}")
    return ok, "; ".join(parts)


def criterion_8():
    parts, ok = [], True
    for name in ("tent", "sierpinski"):
        rows = d_membership_checks(builtin(name), count=20)
        ok &= len(rows) == 2 and all(r["pass"] for r in rows)
        parts.append(f"{name}: {'ok' if ok else 'fail'}")
    return ok, "rank-ones in D, 20 perturbations by 1e-3 at C rejected (" + ", ".join(parts) + ")"


def criterion_9():
    tent = builtin("tent")
    rows = ideals_suite(tent, max_level=3, max_ideal_level=3, count=8)
    want = {"trace linearity": 1e-12, "trace positivity": 1e-9, "trace tracial": 1e-9,
            "trace normalization": 1e-12, "tau^(b,n) vanishes above level n": 0.0}
    by_name = {r["property"]: r for r in rows}
    ok = all(by_name[k]["pass"] and by_name[k]["tolerance"] <= v for k, v in want.items())
    rng = np.random.default_rng(0)
    dims = []
    for n in range(4):
        d = IdealDescriptor.orbits([(HALF, n)])
        dims.append((quotient_dimension(tent, d), quotient_rank(tent, d, rng)))
    ok &= dims == [(4 ** n, 4 ** n) for n in range(4)]
    return ok, f"trace axioms pass; quotient dims/ranks {dims}"


def criterion_10():
    tent = builtin("tent")
    a, b = (HALF, 0), (HALF, 1)
    margins = []
    for kill, keep in ((a, b), (b, a)):
        w = separation_witness(tent, kill, keep)
        ww = w.adjoint() @ w
        killed = abs(trace_eval(tent, Discrete(*kill), ww))
        kept = trace_eval(tent, Discrete(*keep), ww).real
        margins.append(kept - killed)
        if killed != 0:
            margins[-1] = -1.0
    return min(margins) > 1e-3, f"margins {[f'{m:.3f}' for m in margins]}"


def criterion_11():
    worst, rng = 0.0, np.random.default_rng(11)
    for name in SYSTEMS:
        s = builtin(name)
        for t in range(20):
            T = random_graded_element(s, t % 4, rng)
            # the depth counts whole words, so tau at level m and at level m + 1 share it
            spec = Hutchinson(8)
            diff = abs(trace_eval(s, spec, T) - trace_eval(s, spec, T.pad(T.level + 1)))
            worst = max(worst, diff)
    return worst <= 1e-9, f"max |tau_m(T) - tau_(m+1)(T+0)| = {worst:.1e}"


def criterion_12():
    ok = True
    for name in SYSTEMS:
        s = builtin(name)
        prim = primitive_ideals(s, 3)
        ok &= jacobson_closure(s, [IdealDescriptor.zero()], prim) == prim
        ok &= all(jacobson_closure(s, [d], prim) == [d] for d in prim[1:])
    return ok, "closure({Zero}) = everything; singletons closed"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


def _report(k, fn):
    t0 = time.perf_counter()
    ok, detail = fn()
    line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f}s) {detail}"
    return ok, line


@pytest.mark.parametrize("k", range(1, 13))
def test_criterion(k, capsys):
    ok, line = _report(k, CRITERIA[k - 1])
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    from selfsim._alloc import keep_heap

    keep_heap()
    results = [_report(k, fn) for k, fn in enumerate(CRITERIA, 1)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
