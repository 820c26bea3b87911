"""No-learning reference reconstructor built from the transmitted semantics."""
from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..core import GridMap, MapKind, max_normalize
from ..depthmap import los_ratio_field
from ..ldpl import LdplParams, predict_freespace_map


def physics_baseline(
    depth: Optional[GridMap],
    params_list: Sequence[LdplParams],
    bs_list: Sequence[tuple[int, int]],
    dims: tuple[int, int],
    buildings: Optional[GridMap] = None,
    d_min: float = 1.0,
) -> GridMap:
    """Invert the depth-map physics into a normalized power estimate.

    Each transmitter contributes ``(P_max - PL_t) * B_t`` where ``P_max`` is
    the largest path loss any transmitter reaches on the grid, so every
    contribution is non-negative; the strongest transmitter wins per pixel
    and the field is max-normalized. Building pixels are set to zero. The
    depth map itself is only used for its dimensions when ``dims`` is None.
    """
    if dims is None:
        dims = depth.dims
    width, height = dims
    if buildings is None:
        buildings = GridMap.zeros(width, height)
    pls = [predict_freespace_map(p, bs, dims, d_min).values for p, bs in zip(params_list, bs_list)]
    p_max = max(float(pl.max()) for pl in pls)
    best = np.zeros((height, width))
    for pl, bs in zip(pls, bs_list):
        best = np.maximum(best, (p_max - pl) * los_ratio_field(buildings, bs))
    best[buildings.values == 1.0] = 0.0
    if best.max() <= 0.0:
        return GridMap(np.zeros((height, width)), MapKind.NORMALIZED)
    return max_normalize(GridMap(best, MapKind.POWER_DBM), MapKind.NORMALIZED)
