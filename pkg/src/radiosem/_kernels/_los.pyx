# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled line-of-sight kernels; must match ``_pylos`` bit for bit."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def bresenham(a, b):
    cdef int x0, y0, x1, y1, dx, dy, sx, sy, err, e2
    flip = (b[0], b[1]) < (a[0], a[1])
    if flip:
        x0, y0 = b[0], b[1]
        x1, y1 = a[0], a[1]
    else:
        x0, y0 = a[0], a[1]
        x1, y1 = b[0], b[1]
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


cdef inline double _ratio(const unsigned char[:, ::1] grid, int ax, int ay, int bx, int by) noexcept nogil:
    cdef int x0, y0, x1, y1, dx, dy, sx, sy, err, e2
    cdef long n = 0, blocked = 0
    if bx < ax or (bx == ax and by < ay):
        x0 = bx; y0 = by; x1 = ax; y1 = ay
    else:
        x0 = ax; y0 = ay; x1 = bx; y1 = by
    dx = x1 - x0 if x1 > x0 else x0 - x1
    dy = -(y1 - y0 if y1 > y0 else y0 - y1)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        n += 1
        blocked += grid[y0, x0]
        if x0 == x1 and y0 == y1:
            break
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy
    return <double>(n - blocked) / <double>n


def los_ratio_field(buildings, int tx, int ty):
    cdef const unsigned char[:, ::1] grid = np.ascontiguousarray(buildings, dtype=np.uint8)
    cdef Py_ssize_t h = grid.shape[0], w = grid.shape[1]
    out = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef int x, y
    with nogil:
        for y in range(h):
            for x in range(w):
                o[y, x] = _ratio(grid, x, y, tx, ty)
    return out
