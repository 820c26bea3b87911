"""Dense grid types, evaluation metrics and the outage-map task.

Grids are addressed row-major with ``x`` the column and ``y`` the row, so a
pixel ``(x, y)`` lives at ``values[y, x]``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateField, DimensionMismatch, KindMismatch, ZeroReference


class MapKind(str, enum.Enum):
    POWER_DBM = "power-dBm"
    NORMALIZED = "normalized-power"
    BINARY = "binary"
    DEPTH = "depth"


@dataclass(frozen=True, eq=False)
class GridMap:
    """Immutable 2-D scalar field.

    ``dynamic_range`` is the ``(p_min, p_max)`` dBm interval a normalized
    power map was scaled from; it is ``None`` for every other kind.
    """

    values: np.ndarray
    kind: MapKind = MapKind.NORMALIZED
    dynamic_range: Optional[tuple[float, float]] = None

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatch(f"GridMap needs a 2-D array, got shape {arr.shape}")
        kind = MapKind(self.kind)
        if kind is MapKind.BINARY:
            if not np.all((arr == 0.0) | (arr == 1.0)):
                raise ValueError("binary map holds values outside {0, 1}")
        elif kind in (MapKind.NORMALIZED, MapKind.DEPTH):
            if not np.all((arr >= 0.0) & (arr <= 1.0)):
                raise ValueError(f"{kind.value} map holds values outside [0, 1]")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "kind", kind)
        if self.dynamic_range is not None:
            lo, hi = self.dynamic_range
            object.__setattr__(self, "dynamic_range", (float(lo), float(hi)))

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        """``(width, height)``."""
        return self.width, self.height

    def __eq__(self, other):
        if not isinstance(other, GridMap):
            return NotImplemented
        return (
            self.kind is other.kind
            and self.dynamic_range == other.dynamic_range
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None

    @classmethod
    def zeros(cls, width: int, height: int, kind: MapKind = MapKind.BINARY) -> "GridMap":
        return cls(np.zeros((height, width)), kind)

    def with_values(self, values: np.ndarray, kind: Optional[MapKind] = None) -> "GridMap":
        return GridMap(values, self.kind if kind is None else kind, self.dynamic_range)

    def to_dbm(self) -> np.ndarray:
        """Map normalized power back to dBm through the declared dynamic range."""
        if self.kind is not MapKind.NORMALIZED or self.dynamic_range is None:
            raise KindMismatch("dBm conversion needs a normalized map with a dynamic range")
        lo, hi = self.dynamic_range
        return lo + self.values * (hi - lo)


def normalize_dbm(power_dbm: np.ndarray, p_min: float, p_max: float) -> GridMap:
    """Min-max scale a dBm field over ``[p_min, p_max]`` into a normalized map."""
    if not p_max > p_min:
        raise DegenerateField(f"empty dynamic range [{p_min}, {p_max}]")
    vals = (np.asarray(power_dbm, dtype=np.float64) - p_min) / (p_max - p_min)
    return GridMap(np.clip(vals, 0.0, 1.0), MapKind.NORMALIZED, (p_min, p_max))


@dataclass(frozen=True)
class Observation:
    x: int
    y: int
    psd: float


@dataclass(frozen=True)
class SparseObservationSet:
    width: int
    height: int
    samples: tuple[Observation, ...] = field(default_factory=tuple)

    def __post_init__(self):
        samples = tuple(
            s if isinstance(s, Observation) else Observation(int(s[0]), int(s[1]), float(s[2]))
            for s in self.samples
        )
        seen = set()
        for s in samples:
            if not (0 <= s.x < self.width and 0 <= s.y < self.height):
                raise ValueError(f"observation ({s.x}, {s.y}) outside {self.width}x{self.height}")
            if (s.x, s.y) in seen:
                raise ValueError(f"duplicate observation at ({s.x}, {s.y})")
            seen.add((s.x, s.y))
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(xs, ys, psd)`` as numpy arrays."""
        if not self.samples:
            empty = np.zeros(0)
            return empty.astype(np.int64), empty.astype(np.int64), empty
        xs = np.array([s.x for s in self.samples], dtype=np.int64)
        ys = np.array([s.y for s in self.samples], dtype=np.int64)
        psd = np.array([s.psd for s in self.samples], dtype=np.float64)
        return xs, ys, psd

    def subset(self, keep: Iterable[bool]) -> "SparseObservationSet":
        chosen = tuple(s for s, k in zip(self.samples, keep) if k)
        return SparseObservationSet(self.width, self.height, chosen)


@dataclass(frozen=True)
class MetricReport:
    mse: float
    nmse: float
    outage_accuracy: Optional[float] = None


def _check_dims(a: GridMap, b: GridMap) -> None:
    if a.values.shape != b.values.shape:
        raise DimensionMismatch(f"{a.width}x{a.height} vs {b.width}x{b.height}")


def mse(a: GridMap, b: GridMap) -> float:
    _check_dims(a, b)
    if a.kind is not b.kind:
        raise KindMismatch(f"{a.kind.value} vs {b.kind.value}")
    diff = a.values - b.values
    return float(np.mean(diff * diff))


def nmse(estimate: GridMap, reference: GridMap) -> float:
    _check_dims(estimate, reference)
    power = float(np.mean(reference.values * reference.values))
    if power == 0.0:
        raise ZeroReference("reference map is identically zero")
    diff = estimate.values - reference.values
    return float(np.mean(diff * diff)) / power


def max_normalize(g: GridMap, kind: Optional[MapKind] = None) -> GridMap:
    """Scale so the largest value is exactly 1.

    The output kind defaults to ``DEPTH`` for non-binary inputs since the
    result always lies in ``[0, 1]`` when the input is non-negative.
    """
    vals = g.values
    if not np.all(np.isfinite(vals)):
        raise DegenerateField("field contains non-finite values")
    peak = float(vals.max())
    if peak <= 0.0:
        raise DegenerateField("field has no positive value")
    out = vals / peak
    # x / x is exactly 1 in IEEE arithmetic; guard against a non-finite quotient anyway
    out[vals == peak] = 1.0
    if kind is None:
        kind = MapKind.DEPTH if out.min() >= 0.0 else MapKind.POWER_DBM
    return GridMap(out, kind)


def outage_map(radiomap: GridMap, threshold: float) -> GridMap:
    """Binary map with 1 where the power falls below ``threshold``."""
    return GridMap((radiomap.values < threshold).astype(np.float64), MapKind.BINARY)


def outage_agreement(predicted: GridMap, truth: GridMap) -> float:
    _check_dims(predicted, truth)
    if predicted.kind is not MapKind.BINARY or truth.kind is not MapKind.BINARY:
        raise KindMismatch("outage agreement compares binary maps")
    return float(np.mean(predicted.values == truth.values))


def evaluate(estimate: GridMap, truth: GridMap, outage_threshold: Optional[float] = None) -> MetricReport:
    acc = None
    if outage_threshold is not None:
        acc = outage_agreement(outage_map(estimate, outage_threshold), outage_map(truth, outage_threshold))
    return MetricReport(mse(estimate, truth), nmse(estimate, truth), acc)


def downsample(g: GridMap, factor: int) -> GridMap:
    """Integer-factor block-mean downsampling; binary maps are re-thresholded at 0.5."""
    if factor == 1:
        return g
    h, w = g.values.shape
    if h % factor or w % factor:
        raise DimensionMismatch(f"{w}x{h} not divisible by {factor}")
    pooled = g.values.reshape(h // factor, factor, w // factor, factor).mean(axis=(1, 3))
    if g.kind is MapKind.BINARY:
        pooled = (pooled >= 0.5).astype(np.float64)
    return GridMap(pooled, g.kind, g.dynamic_range)


def bs_map(bs_list: Sequence[tuple[int, int]], width: int, height: int) -> GridMap:
    """One-hot transmitter map: 1 at every base-station pixel."""
    vals = np.zeros((height, width))
    for x, y in bs_list:
        vals[y, x] = 1.0
    return GridMap(vals, MapKind.BINARY)
