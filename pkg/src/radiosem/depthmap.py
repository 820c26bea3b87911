"""Line-of-sight obstruction ratios and the radio depth map."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import _kernels
from .core import GridMap, MapKind, max_normalize
from .ldpl import LdplParams, predict_freespace_map


def _in_bounds(p: tuple[int, int], width: int, height: int) -> None:
    if not (0 <= p[0] < width and 0 <= p[1] < height):
        raise ValueError(f"pixel {p} outside {width}x{height}")


def los_path(a: tuple[int, int], b: tuple[int, int]) -> list[tuple[int, int]]:
    """Bresenham pixels from ``a`` to ``b``, endpoints included."""
    return _kernels.bresenham((int(a[0]), int(a[1])), (int(b[0]), int(b[1])))


def _building_mask(buildings: GridMap) -> np.ndarray:
    if buildings.kind is not MapKind.BINARY:
        raise ValueError("building segmentation must be a binary map")
    return buildings.values.astype(np.uint8)


def los_ratio(buildings: GridMap, target: tuple[int, int], tx: tuple[int, int]) -> float:
    """Share of non-building pixels on the line of sight between ``target`` and ``tx``."""
    _in_bounds(target, buildings.width, buildings.height)
    _in_bounds(tx, buildings.width, buildings.height)
    path = los_path(target, tx)
    vals = buildings.values
    blocked = sum(vals[y, x] for x, y in path)
    return (len(path) - blocked) / len(path)


def los_ratio_field(buildings: GridMap, tx: tuple[int, int]) -> np.ndarray:
    """``los_ratio`` for every pixel of the grid at once."""
    _in_bounds(tx, buildings.width, buildings.height)
    return _kernels.los_ratio_field(_building_mask(buildings), tx[0], tx[1])


def radio_depth_map(
    buildings: GridMap,
    bs_list: Sequence[tuple[int, int]],
    params_list: Sequence[LdplParams],
    d_min: float = 1.0,
) -> GridMap:
    """Max-normalized sum over transmitters of path loss times LOS ratio."""
    if len(bs_list) != len(params_list) or not bs_list:
        raise ValueError("need one LDPL parameter set per BS and at least one BS")
    dims = buildings.dims
    total = np.zeros((buildings.height, buildings.width))
    for bs, params in zip(bs_list, params_list):
        pl = predict_freespace_map(params, bs, dims, d_min).values
        total += pl * los_ratio_field(buildings, bs)
    return max_normalize(GridMap(total, MapKind.POWER_DBM), MapKind.DEPTH)
