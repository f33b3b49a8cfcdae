import warnings
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from selfsim import builtin
from selfsim.attractor import hutchinson_measure
from selfsim.core_rep import GradedCoreElement, random_compact, random_graded_element
from selfsim.fields import Polynomial, ScalarField
from selfsim.ideals import (EMPTY, K, AssumptionBError, ClosedSet, Discrete, Hutchinson, IdealDescriptor,
                            OrbitOverlapWarning, closed_set, descent_consistency, descent_levels,
                            ideal_contains, ideal_meet, ideal_membership, jacobson_closure, orbit_union,
                            primitive_ideals, quotient_dimension, quotient_rank, separation_witness,
                            trace_eval)
from selfsim.ifs import sierpinski_points, system_from_dict
from selfsim.verify import ideals_suite

from oracles import orbit, tent_closed_set

q = Fraction
HALF = (q(1, 2),)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_tent_closed_sets(tent, n):
    F = closed_set(tent, IdealDescriptor.orbits([(HALF, n - 1)]))
    assert set(F.points) == tent_closed_set(n)


def test_tent_primitives(tent):
    prim = primitive_ideals(tent, 3)
    assert [str(d) for d in prim] == ["Zero"] + [f"J((1/2), {n})" for n in range(4)]


def test_cantor_is_simple(cantor):
    assert primitive_ideals(cantor, 3) == [IdealDescriptor.zero()]


def test_sierpinski_primitives(sierpinski):
    prim = primitive_ideals(sierpinski, 1)
    assert len(prim) == 1 + 3 * 2
    sets = [closed_set(sierpinski, d) for d in prim]
    assert len({(s.whole, s.points) for s in sets}) == len(sets)


def test_assumption_b_failure_raises():
    # two identical branches collide on all of K: no finite branch set
    bad = system_from_dict({"dimension": 1, "branches": [[[["1/2"]], ["0"]], [[["1/2"]], ["0"]],
                                                         [[["1/2"]], ["1/2"]]]})
    with pytest.raises(AssumptionBError):
        primitive_ideals(bad, 1)


def test_descriptor_canonical():
    a = IdealDescriptor.orbits([(HALF, 1), ((q(1, 2),), 0), (HALF, 1)])
    assert a.tags == ((HALF, 0), (HALF, 1))
    with pytest.raises(ValueError):
        IdealDescriptor("orbits")
    with pytest.raises(ValueError):
        IdealDescriptor.orbits([(HALF, -1)])


def test_orbit_overlap_warns(sierpinski):
    V = sierpinski_points()
    # the warning fires exactly when two orbit sets share a point
    tags = [(V["S"], 1), (V["T"], 1), (V["U"], 1)]
    pts = [orbit(sierpinski, b, n) for b, n in tags]
    overlap = any(pts[i] & pts[j] for i in range(3) for j in range(i + 1, 3))
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        orbit_union(sierpinski, tags)
    assert overlap == any(issubclass(x.category, OrbitOverlapWarning) for x in w)


def test_closed_set_order(tent):
    big = IdealDescriptor.orbits([(HALF, 0)])
    both = IdealDescriptor.orbits([(HALF, 0), (HALF, 1)])
    assert ideal_contains(tent, big, both)
    assert not ideal_contains(tent, both, big)
    assert ideal_contains(tent, IdealDescriptor.full(), big)
    assert ideal_contains(tent, big, IdealDescriptor.zero())
    assert K.issubset(K) and EMPTY.issubset(K) and not K.issubset(EMPTY)
    assert ClosedSet.finite([HALF]).issubset(ClosedSet.finite([HALF, (q(1),)]))


def test_meet_rules():
    a = IdealDescriptor.orbits([(HALF, 0)])
    assert ideal_meet([]) == IdealDescriptor.full()
    assert ideal_meet([a, IdealDescriptor.zero()]) == IdealDescriptor.zero()
    assert ideal_meet([a, IdealDescriptor.full()]) == a


def test_jacobson_closure(system):
    prim = primitive_ideals(system, 2)
    assert jacobson_closure(system, [prim[0]], prim) == prim
    for d in prim[1:]:
        assert jacobson_closure(system, [d], prim) == [d]


def test_descent(system):
    from selfsim.singularity import branch_points

    for b in branch_points(system).branch_points:
        for n in range(3):
            F = descent_levels(system, b, n)
            assert F[-1] == EMPTY and len(F) == n + 2
            assert all(descent_consistency(system, b, n).values())


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_tent_quotient(tent, n):
    d = IdealDescriptor.orbits([(HALF, n)])
    assert quotient_dimension(tent, d) == 4 ** n
    assert quotient_rank(tent, d, np.random.default_rng(n)) == 4 ** n


def test_quotient_of_union(tent):
    d = IdealDescriptor.orbits([(HALF, 0), (HALF, 1)])
    assert quotient_dimension(tent, d) == 5
    assert quotient_rank(tent, d, np.random.default_rng(0)) == 5


def test_discrete_trace_of_scalar_oracle(tent):
    # tau^(b,n)(a) averages a over the N^n word images of b
    poly = Polynomial(((1.0, (2,)), (0.5j, (1,)), (-1.0, (0,))))
    a = GradedCoreElement.scalar(ScalarField.polynomial(poly), tent)
    for n in range(4):
        pts = [x for (x,) in _word_images(tent, HALF, n)]
        ref = np.mean([poly(np.array([[float(x)]]))[0] for x in pts])
        assert trace_eval(tent, Discrete(HALF, n), a) == pytest.approx(ref, abs=1e-14)


def _word_images(system, b, n):
    pts = [tuple(b)]
    for _ in range(n):
        pts = [g(p) for p in pts for g in system.branches]
    return pts


def test_hutchinson_of_scalar_oracle(system):
    poly = Polynomial(((1.0, (1,) + (0,) * (system.dimension - 1)), (2.0, (0,) * system.dimension)))
    a = GradedCoreElement.scalar(ScalarField.polynomial(poly), system)
    mu = hutchinson_measure(system, 5)
    ref = mu.integrate(lambda p: poly(system.to_float([p]))[0].real)
    assert trace_eval(system, Hutchinson(5), a).real == pytest.approx(ref, abs=1e-12)


def test_trace_normalized(system):
    one = GradedCoreElement.unit(system)
    assert trace_eval(system, Hutchinson(6), one) == pytest.approx(1, abs=1e-12)
    from selfsim.singularity import branch_points

    for b in branch_points(system).branch_points:
        for n in range(3):
            assert trace_eval(system, Discrete(b, n), one) == pytest.approx(1, abs=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2))
def test_discrete_trace_tracial_and_positive(seed, n):
    s = builtin("tent")
    rng = np.random.default_rng(seed)
    S, T = random_graded_element(s, 2, rng), random_graded_element(s, 1, rng)
    spec = Discrete(HALF, n)
    x, y = trace_eval(s, spec, S @ T), trace_eval(s, spec, T @ S)
    assert abs(x - y) <= 1e-9 * (1 + abs(x))
    assert trace_eval(s, spec, S.adjoint() @ S).real >= -1e-12


@pytest.mark.parametrize("n", [0, 1, 2])
def test_discrete_trace_vanishes_above_level(tent, n):
    top = GradedCoreElement.single(random_compact(tent, n + 1, np.random.default_rng(n)))
    assert trace_eval(tent, Discrete(HALF, n), top) == 0


def test_hutchinson_level_consistency(system):
    rng = np.random.default_rng(11)
    for lv in range(3):
        T = random_graded_element(system, lv, rng)
        a = trace_eval(system, Hutchinson(6), T)
        b = trace_eval(system, Hutchinson(6), T.pad(lv + 1))
        assert abs(a - b) <= 1e-9


def test_hutchinson_weights(tent):
    one = GradedCoreElement.unit(tent)
    assert trace_eval(tent, Hutchinson(4, (0.25, 0.75)), one) == pytest.approx(1)
    with pytest.raises(ValueError):
        trace_eval(tent, Hutchinson(4, (0.5, 0.6)), one)


def test_trace_rejects_bad_specs(tent):
    one = GradedCoreElement.unit(tent)
    with pytest.raises(ValueError):
        trace_eval(tent, Discrete((q(1, 3),), 0), one)
    with pytest.raises(ValueError):
        trace_eval(tent, Hutchinson(0), GradedCoreElement.unit(tent, 2))
    with pytest.raises(TypeError):
        trace_eval(tent, "tau", one)


def test_separation_witness(tent):
    w = separation_witness(tent, (HALF, 0), (HALF, 1))
    ww = w.adjoint() @ w
    assert abs(trace_eval(tent, Discrete(HALF, 0), ww)) == 0
    assert trace_eval(tent, Discrete(HALF, 1), ww).real > 1e-3
    J0 = IdealDescriptor.orbits([(HALF, 0)])
    J1 = IdealDescriptor.orbits([(HALF, 1)])
    assert ideal_membership(tent, J0, w) and not ideal_membership(tent, J1, w)


def test_membership_extremes(tent):
    one = GradedCoreElement.unit(tent)
    assert ideal_membership(tent, IdealDescriptor.full(), one)
    assert not ideal_membership(tent, IdealDescriptor.zero(), one)
    assert ideal_membership(tent, IdealDescriptor.zero(), GradedCoreElement.zero(tent))


def test_ideals_suite(system):
    rows = ideals_suite(system, max_level=2, max_ideal_level=1, count=3, hutchinson_depth=6)
    assert all(r["pass"] for r in rows), [r for r in rows if not r["pass"]]
