"""Pure-Python line-of-sight kernels (reference and fallback backend)."""
from __future__ import annotations

import numpy as np


def bresenham(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    """Pixels from ``a`` to ``b`` inclusive.

    The trace always starts at the lexicographically smaller endpoint so the
    pixel set is the same in both directions; the result is reversed when
    needed so it still runs from ``a`` to ``b``.
    """
    flip = (b[0], b[1]) < (a[0], a[1])
    x0, y0 = (b if flip else a)
    x1, y1 = (a if flip else b)
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    path = []
    while True:
        path.append((x0, y0))
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    if flip:
        path.reverse()
    return path


def los_ratio_field(buildings: np.ndarray, tx: int, ty: int) -> np.ndarray:
    """Fraction of non-building pixels on the path from every pixel to ``(tx, ty)``."""
    h, w = buildings.shape
    grid = buildings.tolist()
    out = np.empty((h, w))
    for y in range(h):
        for x in range(w):
            path = bresenham((x, y), (tx, ty))
            blocked = 0
            for px, py in path:
                blocked += grid[py][px]
            out[y, x] = (len(path) - blocked) / len(path)
    return out
