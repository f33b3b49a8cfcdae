"""Brute-force reference computations, written independently of the package internals."""
from fractions import Fraction
import itertools

import numpy as np


def exact_words(system, depth):
    """Every word of length ``depth`` mapped to the image of the seed, first letter applied first."""
    out = {}
    for word in itertools.product(range(1, system.N + 1), repeat=depth):
        p = tuple(system.seed)
        for j in word:
            p = system.branches[j - 1](p)
        out[word] = p
    return out


def fixed_point(system, word):
    from selfsim.exact import solve_affine
    from selfsim.ifs import compose

    g = compose(system, word)
    d = g.dim
    one = g.offset[0] * 0 + 1
    m = [[(one if i == j else 0) - g.matrix[i][j] for j in range(d)] for i in range(d)]
    return solve_affine(m, list(g.offset)).solution


def seeded_grid(system, depth, word_len=2):
    """Images, under words of length ``depth``, of every fixed point of a word of length <= word_len."""
    seeds = {fixed_point(system, w) for k in range(1, word_len + 1)
             for w in itertools.product(range(1, system.N + 1), repeat=k)}
    pts = set(seeds)
    for _ in range(depth):
        pts |= {g(p) for p in pts for g in system.branches}
    return pts


def collisions(system, depth):
    """Branch points and values found by applying every pair of branches to a rich exact grid."""
    B, C = set(), set()
    for y in seeded_grid(system, depth):
        imgs = [g(y) for g in system.branches]
        for i in range(system.N):
            for j in range(i + 1, system.N):
                if imgs[i] == imgs[j]:
                    B.add(imgs[i])
                    C.add(y)
    return B, C


def orbit(system, b, n):
    pts = {tuple(b)}
    for _ in range(n):
        pts = {g(p) for p in pts for g in system.branches}
    return pts


def tent_closed_set(n):
    """``{(2k - 1) / 2^n : k = 1..2^(n-1)}`` as 1-tuples."""
    return {(Fraction(2 * k - 1, 2 ** n),) for k in range(1, 2 ** (n - 1) + 1)}


def float_map(system, j, x):
    return system.float_mats[j - 1] @ x + system.float_offsets[j - 1]


def pi_dense(T, x):
    """``pi_n(T)(x)`` assembled entry block by entry block from its defining formula.

    Block ``(i_{r+1}, ..., i_n)`` of the level-r term is
    ``T_r(gamma_{i_{r+1}} o ... o gamma_{i_n}(x))``, flat block index with
    ``i_{r+1}`` fastest.
    """
    system, n = T.system, T.level
    N = system.N
    out = np.zeros((N ** n, N ** n), dtype=complex)
    for r, comp in enumerate(T.components):
        if comp is None:
            continue
        m = N ** r
        for k, idx in enumerate(itertools.product(range(1, N + 1), repeat=n - r)):
            idx = tuple(reversed(idx))  # idx[0] = i_{r+1} varies fastest
            y = np.array(x, dtype=float)
            for j in reversed(idx):
                y = float_map(system, j, y)
            out[k * m:(k + 1) * m, k * m:(k + 1) * m] += comp(y[None])[0]
    return out


def svd_rank(A, rtol=1e-9):
    s = np.linalg.svd(A, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
