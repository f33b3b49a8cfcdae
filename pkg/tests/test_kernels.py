import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from selfsim import builtin
from selfsim.kernels import _numba, _numpy

BACKENDS = [_numpy, _numba]


def _cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.mark.parametrize("name", ["tent", "cantor", "sierpinski"])
def test_word_images_agree(name):
    s = builtin(name)
    seed = s.to_float([s.seed])[0]
    a = _numpy.word_images(s.float_mats, s.float_offsets, seed, 6)
    b = _numba.word_images(s.float_mats, s.float_offsets, seed, 6)
    assert np.allclose(a, b, atol=1e-14)


@given(st.integers(0, 2 ** 32 - 1))
def test_min_sq_dist_agree(seed):
    rng = np.random.default_rng(seed)
    grid, queries = rng.standard_normal((50, 2)), rng.standard_normal((7, 2))
    ref = np.min(((queries[:, None] - grid[None]) ** 2).sum(-1), axis=1)
    for k in BACKENDS:
        assert np.allclose(k.min_sq_dist(grid, queries), ref)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([1, 2, 5]))
def test_spectral_norms_agree(seed, k):
    rng = np.random.default_rng(seed)
    mats = _cplx(rng, 6, k, k)
    ref = np.array([np.linalg.norm(m, 2) for m in mats])
    for b in BACKENDS:
        assert np.allclose(b.spectral_norms(mats), ref, rtol=1e-10)


@given(st.integers(0, 2 ** 32 - 1))
def test_block_matmul_agree(seed):
    rng = np.random.default_rng(seed)
    blocks, dense = _cplx(rng, 3, 2, 4, 4), _cplx(rng, 3, 8, 5)
    z = np.zeros((4, 4))
    ref = np.stack([np.block([[blocks[p, 0], z], [z, blocks[p, 1]]]) @ dense[p] for p in range(3)])
    for b in BACKENDS:
        assert np.allclose(b.block_matmul(blocks, dense), ref)


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 3))
def test_lowrank_dense_exact_adjoint(seed, t):
    rng = np.random.default_rng(seed)
    F, G = _cplx(rng, 4, 6, t), _cplx(rng, 4, 6, t)
    ref = F @ np.conj(np.swapaxes(G, 1, 2))
    for b in BACKENDS:
        M = b.lowrank_dense(F, G)
        assert np.allclose(M, ref)
        # swapping the factors gives the conjugate transpose bit for bit
        assert np.array_equal(b.lowrank_dense(G, F), np.conj(np.swapaxes(M, 1, 2)))


@given(st.integers(0, 2 ** 32 - 1))
def test_blockdiag_lowrank_agree(seed):
    rng = np.random.default_rng(seed)
    sub = _cplx(rng, 3, 2, 2, 2)
    F, G = _cplx(rng, 2, 6, 1), _cplx(rng, 2, 6, 1)
    ref = np.zeros((2, 6, 6), complex)
    for j in range(3):
        ref[:, 2 * j:2 * j + 2, 2 * j:2 * j + 2] = sub[j]
    ref += F @ np.conj(np.swapaxes(G, 1, 2))
    for b in BACKENDS:
        assert np.allclose(b.blockdiag_lowrank(sub, F, G), ref)
        plain = b.blockdiag_lowrank(sub)
        assert np.allclose(plain, ref - F @ np.conj(np.swapaxes(G, 1, 2)))


def test_numpy_backend_selected_by_env():
    env = dict(os.environ, SELFSIM_KERNELS="numpy")
    out = subprocess.run([sys.executable, "-c", "from selfsim import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_numpy_backend_end_to_end():
    env = dict(os.environ, SELFSIM_KERNELS="numpy")
    code = ("from selfsim import builtin; from selfsim.verify import representation_checks;"
            "rows = representation_checks(builtin('tent'), count=6, max_level=2, grid_depth=6);"
            "print(all(r['pass'] for r in rows))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "True"
