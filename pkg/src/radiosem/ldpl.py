"""Log-distance path loss: evaluation, least-squares fitting and free-space fields.

Distances are in pixels with the reference distance fixed at one pixel, so the
model reduces to ``PL(d) = pl0 + theta_tilde * log10(d)``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import GridMap, MapKind, SparseObservationSet
from .errors import DegenerateGeometry, NonPositiveDistance, TooFewSamples

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LdplParams:
    pl0: float
    theta_tilde: float

    def __post_init__(self):
        if not (math.isfinite(self.pl0) and math.isfinite(self.theta_tilde)):
            raise ValueError(f"non-finite LDPL parameters {self}")

    def to_dict(self) -> dict:
        return {"pl0": float(self.pl0), "theta_tilde": float(self.theta_tilde)}

    @classmethod
    def from_dict(cls, d: dict) -> "LdplParams":
        return cls(float(d["pl0"]), float(d["theta_tilde"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "LdplParams":
        return cls.from_dict(json.loads(s))


@dataclass(frozen=True)
class FitConfig:
    """``radius=None`` means a quarter of the grid diagonal."""

    radius: Optional[float] = None
    d_min: float = 1.0
    min_samples: int = 3

    def __post_init__(self):
        if self.d_min <= 0:
            raise ValueError("d_min must be positive")
        if self.radius is not None and not self.radius > self.d_min:
            raise ValueError("radius must exceed d_min")
        if self.min_samples < 2:
            raise ValueError("min_samples must be at least 2")

    def radius_for(self, width: int, height: int) -> float:
        if self.radius is not None:
            return float(self.radius)
        return 0.25 * math.hypot(width, height)


def eval_path_loss(params: LdplParams, d):
    """Path loss in dB at distance ``d`` (scalar or array, pixels)."""
    d_arr = np.asarray(d, dtype=np.float64)
    if np.any(d_arr <= 0):
        raise NonPositiveDistance("path loss needs d > 0; clamp to d_min first")
    out = params.pl0 + params.theta_tilde * np.log10(d_arr)
    return float(out) if out.ndim == 0 else out


def _distances(xs: np.ndarray, ys: np.ndarray, bs: tuple[int, int]) -> np.ndarray:
    return np.hypot(xs - bs[0], ys - bs[1])


def fit_ldpl(
    samples: SparseObservationSet,
    bs: tuple[int, int],
    tx_power: float = 0.0,
    config: FitConfig = FitConfig(),
) -> LdplParams:
    """Ordinary least squares of ``tx_power - psd`` on ``log10(d)``.

    Only samples with ``d_min <= d <= radius`` take part.
    """
    xs, ys, psd = samples.arrays()
    d = _distances(xs, ys, bs)
    radius = config.radius_for(samples.width, samples.height)
    keep = (d >= config.d_min) & (d <= radius)
    if int(keep.sum()) < config.min_samples:
        raise TooFewSamples(
            f"{int(keep.sum())} samples within radius {radius:.2f} of {bs}, need {config.min_samples}"
        )
    x = np.log10(d[keep])
    y = tx_power - psd[keep]
    x_mean = x.mean()
    y_mean = y.mean()
    xc = x - x_mean
    sxx = float(np.dot(xc, xc))
    if sxx <= 1e-12 * max(1.0, float(np.dot(x, x))):
        raise DegenerateGeometry("all retained samples lie at the same distance")
    slope = float(np.dot(xc, y - y_mean)) / sxx
    intercept = float(y_mean - slope * x_mean)
    if slope < 0:
        log.warning("fitted negative path-loss slope %.3f dB/decade at BS %s", slope, bs)
    return LdplParams(intercept, slope)


def assign_nearest_bs(samples: SparseObservationSet, bs_list: Sequence[tuple[int, int]]) -> np.ndarray:
    """Index of the closest BS for every sample (ties go to the lower index)."""
    xs, ys, _ = samples.arrays()
    if len(bs_list) == 0:
        raise ValueError("empty BS list")
    dists = np.stack([_distances(xs, ys, bs) for bs in bs_list])
    return np.argmin(dists, axis=0) if len(xs) else np.zeros(0, dtype=np.int64)


def fit_all(
    samples: SparseObservationSet,
    bs_list: Sequence[tuple[int, int]],
    tx_power: float = 0.0,
    config: FitConfig = FitConfig(),
) -> list[LdplParams]:
    """Fit every BS independently from the samples nearest to it."""
    owner = assign_nearest_bs(samples, bs_list)
    return [
        fit_ldpl(samples.subset(owner == t), bs, tx_power, config) for t, bs in enumerate(bs_list)
    ]


def distance_field(bs: tuple[int, int], width: int, height: int, d_min: float = 1.0) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    return np.maximum(np.hypot(xs - bs[0], ys - bs[1]), d_min)


def predict_freespace_map(
    params: LdplParams, bs: tuple[int, int], dims: tuple[int, int], d_min: float = 1.0
) -> GridMap:
    """Path loss (dB) at every pixel of a ``dims = (width, height)`` grid."""
    width, height = dims
    if not (0 <= bs[0] < width and 0 <= bs[1] < height):
        raise ValueError(f"BS {bs} outside {width}x{height}")
    d = distance_field(bs, width, height, d_min)
    return GridMap(params.pl0 + params.theta_tilde * np.log10(d), MapKind.POWER_DBM)
