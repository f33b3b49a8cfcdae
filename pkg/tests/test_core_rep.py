import numpy as np
import pytest
from hypothesis import given, strategies as st

from selfsim import builtin
from selfsim.attractor import float_grid
from selfsim.bimodule import membership_defect, random_scalar, random_z_member, rank_one
from selfsim.core_rep import (GradedCoreElement, compact_absorption, d_membership, embed, pi,
                              random_compact, random_graded_element, refined_sup_norms, sup_norm)
from selfsim.fields import LowRankField, MatrixField, branch_images
from selfsim.verify import core_rep_suite, pair_levels, representation_checks

from oracles import pi_dense


@pytest.mark.parametrize("level", [0, 1, 2, 3])
def test_pi_matches_blockwise_oracle(system, level):
    rng = np.random.default_rng(level)
    T = random_graded_element(system, level, rng)
    X = float_grid(system, 3)[::5]
    got = pi(T)(X)
    for k in range(X.shape[0]):
        assert np.allclose(got[k], pi_dense(T, X[k]), rtol=0, atol=1e-12)


def test_embed_matches_oracle(sierpinski):
    rng = np.random.default_rng(1)
    T1 = random_compact(sierpinski, 1, rng)
    X = float_grid(sierpinski, 2)
    E = embed(T1, 3)(X)
    ref = GradedCoreElement(sierpinski, [None, T1, None, None])
    for k in range(X.shape[0]):
        assert np.allclose(E[k], pi_dense(ref, X[k]), atol=1e-12)


@given(st.integers(0, 2 ** 32 - 1), st.integers(0, 2), st.integers(0, 2))
def test_homomorphism_small(seed, a, b):
    s = builtin("tent")
    rng = np.random.default_rng(seed)
    S, T = random_graded_element(s, a, rng), random_graded_element(s, b, rng)
    X = float_grid(s, 5)
    n = max(a, b)
    lhs = pi(S @ T)(X)
    rhs = pi(S.pad(n))(X) @ pi(T.pad(n))(X)
    assert np.max(np.abs(lhs - rhs)) <= 1e-9 * (1 + np.max(np.abs(rhs)))


def test_product_associative(sierpinski):
    rng = np.random.default_rng(2)
    A, B, C = (random_graded_element(sierpinski, k, rng) for k in (1, 2, 0))
    X = float_grid(sierpinski, 3)
    assert np.allclose(pi((A @ B) @ C)(X), pi(A @ (B @ C))(X), atol=1e-9)


def test_adjoint_bitwise(system):
    rng = np.random.default_rng(3)
    T = random_graded_element(system, 3, rng)
    X = float_grid(system, 5)
    P = pi(T)(X)
    assert np.array_equal(pi(T.adjoint())(X), np.conj(np.swapaxes(P, 1, 2)))


def test_padding_is_block_diagonal_embedding(system):
    rng = np.random.default_rng(4)
    T = random_graded_element(system, 2, rng)
    X = float_grid(system, 4)
    big = pi(T.pad(3))(X)
    N, m = system.N, system.N ** 2
    for j in range(N):
        small = pi(T)(branch_images(system, X)[j * X.shape[0]:(j + 1) * X.shape[0]])
        assert np.array_equal(big[:, j * m:(j + 1) * m, j * m:(j + 1) * m], small)
    off = big.copy()
    for j in range(N):
        off[:, j * m:(j + 1) * m, j * m:(j + 1) * m] = 0
    assert not np.any(off)


def test_pi_preserves_z(system):
    rng = np.random.default_rng(5)
    T = random_graded_element(system, 2, rng)
    f = random_z_member(system, 2, rng)
    assert membership_defect(pi(T).apply(f)) <= 1e-10


def test_unit_and_zero(system):
    X = float_grid(system, 3)
    assert np.array_equal(pi(GradedCoreElement.unit(system, 2))(X),
                          np.broadcast_to(np.eye(system.N ** 2), (X.shape[0],) + (system.N ** 2,) * 2))
    assert not np.any(pi(GradedCoreElement.zero(system, 2))(X))


def test_lowrank_field_agrees_with_dense(sierpinski):
    rng = np.random.default_rng(6)
    f, g, u, v = (random_z_member(sierpinski, 2, rng) for _ in range(4))
    A, B = rank_one(f, g), rank_one(u, v)
    assert isinstance(A + B, LowRankField)
    X = float_grid(sierpinski, 3)
    dense = MatrixField(sierpinski, 2, lambda Y: A(Y) + B(Y))
    assert np.allclose((A + B)(X), dense(X), atol=1e-14)
    assert np.allclose((A @ B)(X), A(X) @ B(X), atol=1e-12)


def test_compact_absorption(tent):
    rng = np.random.default_rng(7)
    T = random_graded_element(tent, 1, rng)
    base = random_scalar(tent, rng)
    from selfsim.fields import ScalarField

    v = ScalarField(lambda X: base(X) * (X[:, 0] - 0.5) ** 2)
    up = compact_absorption(T, v)
    X = float_grid(tent, 6)
    assert up.level == 2 and up.components[0] is None
    assert np.allclose(pi(up)(X), pi(T.times_scalar(v).pad(2))(X), atol=1e-12)
    assert all(d_membership(c) for c in up.components if c is not None)
    with pytest.raises(ValueError):
        compact_absorption(T, random_scalar(tent, rng))


def test_sup_norm_exact_on_grid(system):
    rng = np.random.default_rng(8)
    M = pi(random_graded_element(system, 2, rng))
    X = float_grid(system, 5)
    ref = max(np.linalg.norm(a, 2) for a in M(X))
    assert sup_norm(M, X) == pytest.approx(ref, rel=1e-12)


def test_refined_norms_bound_full_grid(tent):
    rng = np.random.default_rng(9)
    M = pi(random_graded_element(tent, 1, rng))
    norms = refined_sup_norms(M, tent, 4, 9)
    full = [sup_norm(M, float_grid(tent, d)) for d in range(4, 10)]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, full))
    assert all(b >= a for a, b in zip(norms, norms[1:]))


def test_pair_levels_cover_combinations():
    lv = pair_levels(50, 3)
    assert len(lv) == 50 and max(lv) == 3
    pairs = {(lv[2 * i], lv[2 * i + 1]) for i in range(25)}
    assert {(a, b) for a in range(4) for b in range(a + 1)} <= pairs


def test_graded_element_validation(tent):
    with pytest.raises(ValueError):
        GradedCoreElement(tent, [])
    with pytest.raises(ValueError):
        GradedCoreElement(tent, [None, MatrixField.identity(tent, 0)])
    with pytest.raises(ValueError):
        GradedCoreElement.unit(tent, 2).pad(1)


def test_representation_checks_small(system):
    rows = representation_checks(system, count=8, max_level=2, grid_depth=6)
    assert all(r["pass"] for r in rows), rows


def test_core_rep_suite(system):
    rows = core_rep_suite(system, grid_depth=6, max_level=2, count=4)
    assert all(r["pass"] for r in rows), [r for r in rows if not r["pass"]]
