from fractions import Fraction

import pytest

from selfsim.exact import QSqrt3
from selfsim.ifs import sierpinski_points
from selfsim.singularity import (branch_points, branch_values, check_assumption_b, iterated_branch_points,
                                 iterated_branch_points_direct, iterated_branch_values, level_structure,
                                 orbit_set, postcritical_points)

from oracles import collisions, orbit

q = Fraction


def test_branch_sets_match_collision_oracle(system):
    B, C = collisions(system, 2)
    rep = branch_points(system)
    assert set(rep.branch_points) == B
    assert set(rep.branch_values) == C


def test_tent_report(tent):
    rep = branch_points(tent)
    assert rep.branch_points == [(q(1, 2),)]
    assert rep.branch_values == [(q(1),)]
    assert rep.branch_index == {(q(1, 2),): 2}
    assert rep.labels == {(q(1, 2),): (1, 2)}
    assert set(rep.postcritical) == {(q(0),), (q(1),)}
    assert rep.assumption_b.passed


def test_sierpinski_report(sierpinski):
    V = sierpinski_points()
    rep = branch_points(sierpinski)
    assert set(rep.branch_points) == {V["S"], V["T"], V["U"]}
    assert set(rep.branch_values) == {V["P"], V["Q"], V["R"]}
    assert V["S"] == (QSqrt3(q(1, 4)), QSqrt3(0, q(1, 4)))
    assert all(e == 2 for e in rep.branch_index.values())
    assert rep.assumption_b.passed


def test_cantor_has_no_branch_points(cantor):
    rep = branch_points(cantor)
    assert rep.branch_points == [] and rep.branch_values == []
    assert rep.assumption_b.passed


@pytest.mark.parametrize("n", [1, 2, 3])
def test_orbit_formula_matches_brute_force(system, n):
    assert set(iterated_branch_points(system, n)) == set(iterated_branch_points_direct(system, n).branch_points)


def test_tent_level_two_branch_points(tent):
    assert set(iterated_branch_points(tent, 2)) == {(q(1, 2),), (q(1, 4),), (q(3, 4),)}


@pytest.mark.parametrize("n", [1, 2, 3])
def test_unique_collision_slot(system, n):
    assert iterated_branch_points_direct(system, n).unique_slot(system.N, n)


def test_branch_values_grow(system):
    for n in (1, 2):
        assert set(iterated_branch_values(system, n)) <= set(iterated_branch_values(system, n + 1))


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_orbit_sets_match_oracle(system, n):
    for b in branch_points(system).branch_points:
        assert set(orbit_set(system, b, n).points) == orbit(system, b, n)


def test_orbit_set_size_bound(sierpinski):
    S = sierpinski_points()["S"]
    assert len(orbit_set(sierpinski, S, 2)) == 9


def test_orbit_set_rejects_non_branch_points(tent):
    with pytest.raises(ValueError):
        orbit_set(tent, (q(1, 3),), 1)
    with pytest.raises(ValueError):
        orbit_set(tent, (q(1, 2),), -1)


def test_postcritical_orbit(tent):
    assert set(postcritical_points(tent, 5)) == {(q(0),), (q(1),)}


def test_level_structure_groups(tent):
    ls = level_structure(tent, (q(1),), 1)
    assert ls.collisions == (((q(1, 2),), (0, 1)),)
    assert ls.fiber_dimension == 1
    generic = level_structure(tent, (q(1, 3),), 2)
    assert generic.fiber_dimension == 4 and not generic.collisions


def test_assumption_b_clauses(system):
    v = check_assumption_b(system)
    assert v.passed and v.failures() == []
    assert set(v.clauses) == {"left_inverse", "finite_branch_set", "postcritical_disjoint",
                              "unique_collision_slot"}


def test_branch_values_are_left_inverse_images(system):
    rep = branch_points(system)
    assert set(branch_values(system)) == set(rep.h_of.values())
