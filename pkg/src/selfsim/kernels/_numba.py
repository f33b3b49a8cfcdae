"""numba versions of the kernels in :mod:`selfsim.kernels._numpy`."""
import numpy as np
from numba import njit, prange

from . import _numpy

_OPTS = {"cache": True, "nogil": True}


@njit(**_OPTS)
def _word_images(mats, offs, seed, depth):
    N, d = offs.shape
    total = N ** depth
    out = np.empty((total, d))
    out[0, :] = seed
    size = 1
    for _ in range(depth):
        # block j of the next level is gamma_j applied to the current level
        # j = 0 last, since it overwrites the source rows in place
        tmp = np.empty(d)
        for j in range(N - 1, -1, -1):
            base = j * size
            for k in range(size):
                for r in range(d):
                    acc = offs[j, r]
                    for c in range(d):
                        acc += mats[j, r, c] * out[k, c]
                    tmp[r] = acc
                out[base + k, :] = tmp
        size *= N
    return out


def word_images(mats, offs, seed, depth):
    """Images of ``seed`` under every word of length ``depth`` (see numpy twin)."""
    return _word_images(np.ascontiguousarray(mats, dtype=np.float64),
                        np.ascontiguousarray(offs, dtype=np.float64),
                        np.ascontiguousarray(seed, dtype=np.float64), int(depth))


@njit(parallel=True, **_OPTS)
def _min_sq_dist(grid, queries):
    Q = queries.shape[0]
    G, d = grid.shape
    out = np.empty(Q)
    for q in prange(Q):
        best = np.inf
        for g in range(G):
            s = 0.0
            for r in range(d):
                t = grid[g, r] - queries[q, r]
                s += t * t
            if s < best:
                best = s
        out[q] = best
    return out


def min_sq_dist(grid, queries):
    """Squared distance from each query point to its nearest grid point."""
    return _min_sq_dist(np.ascontiguousarray(grid, dtype=np.float64),
                        np.ascontiguousarray(queries, dtype=np.float64))


@njit(parallel=True, **_OPTS)
def _spectral_norms(mats):
    P = mats.shape[0]
    out = np.empty(P)
    for p in prange(P):
        # numba's svd has no compute_uv switch; the top eigenvalue of A^H A is enough
        a = mats[p]
        g = a.conj().T @ a
        out[p] = np.sqrt(max(np.linalg.eigvalsh(g)[-1], 0.0))
    return out


def spectral_norms(mats):
    """Largest singular value of each matrix in a ``(P, k, k)`` stack."""
    mats = np.ascontiguousarray(mats, dtype=np.complex128)
    if mats.shape[-1] == 1:
        return np.abs(mats[:, 0, 0])
    return _spectral_norms(mats)


# batched BLAS matmul beats a compiled loop here at every shape we use
# (see benchmarks/bench_kernels.py), so both backends share it
block_matmul = _numpy.block_matmul


@njit(parallel=True, **_OPTS)
def _lowrank_dense(F, G):
    P, k, t = F.shape
    out = np.empty((P, k, k), dtype=np.complex128)
    for p in prange(P):
        for i in range(k):
            for j in range(k):
                re = 0.0
                im = 0.0
                for s in range(t):
                    a = F[p, i, s]
                    b = G[p, j, s]
                    re += a.real * b.real + a.imag * b.imag
                    im += a.imag * b.real - a.real * b.imag
                out[p, i, j] = complex(re, im)
    return out


def lowrank_dense(F, G):
    """``F @ G^*`` for ``(P, k, t)`` factors, exactly conjugation-symmetric."""
    return _lowrank_dense(np.ascontiguousarray(F, dtype=np.complex128),
                          np.ascontiguousarray(G, dtype=np.complex128))


@njit(parallel=True, **_OPTS)
def _blockdiag_lowrank(sub, F, G):
    N, P, m, _ = sub.shape
    k = N * m
    t = F.shape[2]
    out = np.zeros((P, k, k), dtype=np.complex128)
    for p in prange(P):
        for b in range(N):
            for i in range(m):
                for j in range(m):
                    out[p, b * m + i, b * m + j] = sub[b, p, i, j]
        if t > 0:
            for i in range(k):
                for j in range(k):
                    re = 0.0
                    im = 0.0
                    for s in range(t):
                        a = F[p, i, s]
                        c = G[p, j, s]
                        re += a.real * c.real + a.imag * c.imag
                        im += a.imag * c.real - a.real * c.imag
                    out[p, i, j] += complex(re, im)
    return out


def blockdiag_lowrank(sub, F=None, G=None):
    """``blockdiag_j sub[j] + F @ G^*``; ``sub`` is ``(N, P, m, m)``."""
    sub = np.ascontiguousarray(sub, dtype=np.complex128)
    N, P, m, _ = sub.shape
    if F is None:
        F = G = np.zeros((P, N * m, 0), dtype=np.complex128)
    return _blockdiag_lowrank(sub, np.ascontiguousarray(F, dtype=np.complex128),
                              np.ascontiguousarray(G, dtype=np.complex128))
