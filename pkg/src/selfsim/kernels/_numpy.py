"""Reference implementations in plain numpy."""
import numpy as np


def word_images(mats, offs, seed, depth):
    """Images of ``seed`` under every word of length ``depth``.

    Row ``k`` holds ``gamma_{w_m} o ... o gamma_{w_1}(seed)`` where
    ``k = sum_t (w_t - 1) N^(t-1)``, so the last applied map varies slowest.
    """
    pts = np.asarray(seed, dtype=np.float64)[None, :]
    for _ in range(depth):
        pts = np.concatenate([pts @ mats[j].T + offs[j] for j in range(mats.shape[0])])
    return pts


def min_sq_dist(grid, queries):
    """Squared distance from each query point to its nearest grid point."""
    out = np.empty(queries.shape[0])
    for q in range(queries.shape[0]):
        diff = grid - queries[q]
        out[q] = np.min(np.einsum("ij,ij->i", diff, diff))
    return out


def spectral_norms(mats):
    """Largest singular value of each matrix in a ``(P, k, k)`` stack."""
    if mats.shape[-1] == 1:
        return np.abs(mats[:, 0, 0])
    return np.linalg.svd(mats, compute_uv=False)[:, 0]


def block_matmul(blocks, dense):
    """``blockdiag(blocks) @ dense`` without forming the block diagonal.

    ``blocks`` is ``(P, B, m, m)``, ``dense`` is ``(P, B*m, K)``; block ``b``
    occupies rows ``b*m .. (b+1)*m``.
    """
    P, B, m, _ = blocks.shape
    d = dense.reshape(P, B, m, dense.shape[-1])
    return np.matmul(blocks, d).reshape(P, B * m, dense.shape[-1])


def lowrank_dense(F, G):
    """``F @ G^*`` for ``(P, k, t)`` factors.

    Written in real arithmetic, one rank term at a time, so that swapping the
    factors yields the exact conjugate transpose.
    """
    Fr, Fi = F.real, F.imag
    Gr, Gi = G.real, G.imag
    P, k, t = F.shape
    re = np.zeros((P, k, k))
    im = np.zeros((P, k, k))
    for s in range(t):
        a_r, a_i = Fr[:, :, None, s], Fi[:, :, None, s]
        b_r, b_i = Gr[:, None, :, s], Gi[:, None, :, s]
        re += a_r * b_r + a_i * b_i
        im += a_i * b_r - a_r * b_i
    return re + 1j * im


def blockdiag_lowrank(sub, F=None, G=None):
    """``blockdiag_j sub[j] + F @ G^*``; ``sub`` is ``(N, P, m, m)``."""
    N, P, m, _ = sub.shape
    out = np.zeros((P, N * m, N * m), dtype=np.complex128)
    for b in range(N):
        out[:, b * m:(b + 1) * m, b * m:(b + 1) * m] = sub[b]
    if F is not None and F.shape[2]:
        out += lowrank_dense(F, G)
    return out
