"""Orthonormal multilevel Haar transform on 8x8 blocks.

The 1-d transform recursively splits a signal into pairwise averages and
differences (each scaled by 1/sqrt(2)) and recurses on the averages, so
the full matrix is orthonormal.  The 2-d block transform applies it to
rows and columns; as a 64x64 operator on flattened blocks it is the
Kronecker square of the 1-d matrix.
"""

from functools import lru_cache

import numpy as np

from .linalg import top_indices

__all__ = [
    "BLOCK",
    "haar_matrix",
    "haar_basis",
    "haar2d",
    "haar2d_inverse",
    "sparsify_blocks",
    "block_sparsity",
]

BLOCK = 8


@lru_cache(maxsize=None)
def haar_matrix(size=BLOCK):
    """Orthonormal 1-d multilevel Haar matrix of the given power-of-two size."""
    if size < 1 or size & (size - 1):
        raise ValueError("size must be a positive power of two")
    w = np.array([[1.0]])
    while w.shape[0] < size:
        n = w.shape[0]
        avg = np.zeros((n, 2 * n))
        diff = np.zeros((n, 2 * n))
        for i in range(n):
            avg[i, 2 * i] = avg[i, 2 * i + 1] = 1.0 / np.sqrt(2.0)
            diff[i, 2 * i] = 1.0 / np.sqrt(2.0)
            diff[i, 2 * i + 1] = -1.0 / np.sqrt(2.0)
        w = np.vstack([w @ avg, diff])
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def haar_basis(size=BLOCK):
    """The 2-d transform as an orthonormal (size^2, size^2) matrix.

    coeffs = haar_basis() @ block.ravel() and block pixels are recovered
    with the transpose.
    """
    w = haar_matrix(size)
    psi = np.kron(w, w)
    psi.setflags(write=False)
    return psi


def haar2d(block):
    """All 64 transform coefficients of one 8x8 block, row-major order."""
    block = np.asarray(block, dtype=float)
    if block.shape != (BLOCK, BLOCK):
        raise ValueError("block must be 8x8")
    w = haar_matrix(BLOCK)
    return (w @ block @ w.T).ravel()


def haar2d_inverse(coeffs):
    """Exact inverse of haar2d."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (BLOCK * BLOCK,):
        raise ValueError("expected %d coefficients" % (BLOCK * BLOCK))
    w = haar_matrix(BLOCK)
    c = coeffs.reshape(BLOCK, BLOCK)
    return w.T @ c @ w


def sparsify_blocks(image, k):
    """Keep only the k largest-magnitude transform coefficients per block.

    Magnitude ties are resolved by ascending coefficient index.  The
    returned image is float and exactly k-sparse in the block transform;
    no rounding or clamping is applied, otherwise the sparsity would be
    destroyed.
    """
    image = np.asarray(image, dtype=float)
    if image.ndim != 2 or image.shape[0] % BLOCK or image.shape[1] % BLOCK:
        raise ValueError("image dimensions must be multiples of %d" % BLOCK)
    if not 1 <= k <= BLOCK * BLOCK:
        raise ValueError("k must satisfy 1 <= k <= %d" % (BLOCK * BLOCK))
    out = np.empty_like(image)
    for i in range(0, image.shape[0], BLOCK):
        for j in range(0, image.shape[1], BLOCK):
            coeffs = haar2d(image[i : i + BLOCK, j : j + BLOCK])
            keep = top_indices(np.abs(coeffs), k)
            sparse = np.zeros_like(coeffs)
            sparse[keep] = coeffs[keep]
            out[i : i + BLOCK, j : j + BLOCK] = haar2d_inverse(sparse)
    return out


def block_sparsity(image):
    """Largest per-block count of nonzero transform coefficients."""
    image = np.asarray(image, dtype=float)
    worst = 0
    for i in range(0, image.shape[0], BLOCK):
        for j in range(0, image.shape[1], BLOCK):
            coeffs = haar2d(image[i : i + BLOCK, j : j + BLOCK])
            worst = max(worst, int(np.sum(np.abs(coeffs) > 1e-9)))
    return worst
