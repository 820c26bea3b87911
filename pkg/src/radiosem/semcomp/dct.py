"""Orthonormal 8x8 type-II DCT and its inverse."""
import numpy as np

BLOCK = 8


def dct_matrix(n: int = BLOCK) -> np.ndarray:
    k = np.arange(n)
    c = np.sqrt(2.0 / n) * np.cos(np.pi * (2 * k[None, :] + 1) * k[:, None] / (2 * n))
    c[0] /= np.sqrt(2.0)
    return c


_C = dct_matrix()


def dct_block_forward(block: np.ndarray) -> np.ndarray:
    block = np.asarray(block, dtype=np.float64)
    if block.shape[-2:] != (BLOCK, BLOCK):
        raise ValueError(f"expected 8x8 blocks, got {block.shape}")
    return _C @ block @ _C.T


def dct_block_inverse(coefs: np.ndarray) -> np.ndarray:
    coefs = np.asarray(coefs, dtype=np.float64)
    if coefs.shape[-2:] != (BLOCK, BLOCK):
        raise ValueError(f"expected 8x8 blocks, got {coefs.shape}")
    return _C.T @ coefs @ _C
