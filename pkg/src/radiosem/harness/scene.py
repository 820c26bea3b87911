"""Synthetic scene oracle: rectangular buildings, LDPL transmitters and LOS shadowing."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ..core import GridMap, MapKind, SparseObservationSet, bs_map, normalize_dbm
from ..depthmap import los_ratio_field, radio_depth_map
from ..errors import PlacementFailure
from ..genmodel.train import FeatureStack
from ..ldpl import FitConfig, LdplParams, fit_all, predict_freespace_map


@dataclass(frozen=True)
class SceneConfig:
    width: int = 64
    height: int = 64
    n_buildings: int = 5
    building_size: tuple[int, int] = (6, 18)
    n_bs: int = 1
    pl0_range: tuple[float, float] = (30.0, 50.0)
    theta_range: tuple[float, float] = (20.0, 35.0)
    shadow_penalty: float = 20.0
    noise_sigma: float = 1.0
    sample_ratio: float = 0.05
    tx_power: float = 0.0
    combine: str = "max"  # or "sum": sum of linear powers
    seed: int = 0

    def __post_init__(self):
        for name in ("building_size", "pl0_range", "theta_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} is empty: {lo} > {hi}")
        if self.n_bs < 1:
            raise ValueError("need at least one BS")
        if not 0.0 <= self.sample_ratio <= 1.0:
            raise ValueError("sample_ratio must be in [0, 1]")
        if self.combine not in ("max", "sum"):
            raise ValueError(f"unknown combining rule {self.combine!r}")

    @classmethod
    def full_scale(cls, **overrides) -> "SceneConfig":
        """256x256 preset with building sizes scaled to match the desk default."""
        base = dict(width=256, height=256, n_buildings=8, building_size=(16, 48))
        base.update(overrides)
        return cls(**base)


@dataclass(frozen=True)
class Scene:
    buildings: GridMap
    bs_list: tuple
    true_params: tuple
    truth: GridMap
    observations: SparseObservationSet
    config: SceneConfig = field(default_factory=SceneConfig)

    @property
    def dims(self) -> tuple[int, int]:
        return self.buildings.dims


def place_buildings(cfg: SceneConfig, rng: np.random.Generator) -> np.ndarray:
    mask = np.zeros((cfg.height, cfg.width))
    lo, hi = cfg.building_size
    for _ in range(cfg.n_buildings):
        bw, bh = (int(v) for v in rng.integers(lo, hi + 1, size=2))
        bw, bh = min(bw, cfg.width), min(bh, cfg.height)
        x = int(rng.integers(0, cfg.width - bw + 1))
        y = int(rng.integers(0, cfg.height - bh + 1))
        mask[y : y + bh, x : x + bw] = 1.0
    return mask


def place_bs(mask: np.ndarray, n_bs: int, rng: np.random.Generator, retries: int = 1000) -> list:
    free = np.flatnonzero(mask.ravel() == 0.0)
    if len(free) < n_bs:
        raise PlacementFailure(f"{len(free)} free pixels for {n_bs} base stations")
    chosen: list = []
    for _ in range(retries):
        idx = int(free[rng.integers(len(free))])
        if idx not in chosen:
            chosen.append(idx)
        if len(chosen) == n_bs:
            w = mask.shape[1]
            return [(i % w, i // w) for i in chosen]
    raise PlacementFailure(f"could not place {n_bs} base stations after {retries} tries")


def received_power_dbm(
    buildings: GridMap,
    bs_list: Sequence[tuple[int, int]],
    params_list: Sequence[LdplParams],
    tx_power: float = 0.0,
    shadow_penalty: float = 20.0,
    noise: Optional[Sequence[np.ndarray]] = None,
    combine: str = "max",
) -> np.ndarray:
    """Per-pixel power before building masking and normalization.

    Each transmitter gives ``tx_power - PL_t - shadow_penalty * (1 - B_t) + X_t``;
    transmitters combine by the strongest one or by summing linear power.
    """
    per_tx = []
    for t, (bs, params) in enumerate(zip(bs_list, params_list)):
        pl = predict_freespace_map(params, bs, buildings.dims).values
        b = los_ratio_field(buildings, bs)
        p = tx_power - pl - shadow_penalty * (1.0 - b)
        if noise is not None:
            p = p + noise[t]
        per_tx.append(p)
    if combine == "max":
        return np.max(per_tx, axis=0)
    return 10.0 * np.log10(np.sum([10.0 ** (p / 10.0) for p in per_tx], axis=0))


def ground_truth_radiomap(
    buildings: GridMap,
    bs_list: Sequence[tuple[int, int]],
    params_list: Sequence[LdplParams],
    cfg: SceneConfig,
    rng: Optional[np.random.Generator] = None,
) -> GridMap:
    """Normalized radiomap with building interiors at the minimum.

    The dynamic range is the scene's own ``[min over open pixels, max]`` in dBm
    and is recorded on the returned map.
    """
    noise = None
    if cfg.noise_sigma > 0:
        rng = np.random.default_rng(cfg.seed) if rng is None else rng
        noise = [rng.normal(0.0, cfg.noise_sigma, size=(buildings.height, buildings.width)) for _ in bs_list]
    power = received_power_dbm(
        buildings, bs_list, params_list, cfg.tx_power, cfg.shadow_penalty, noise, cfg.combine
    )
    open_px = buildings.values == 0.0
    p_min = float(power[open_px].min())
    p_max = float(power[open_px].max())
    power = np.where(open_px, power, p_min)
    return normalize_dbm(power, p_min, p_max)


def sample_observations(
    truth: GridMap, buildings: GridMap, ratio: float, seed: int
) -> SparseObservationSet:
    """``floor(ratio * open pixels)`` distinct open pixels with their dBm power."""
    if not 0.0 <= ratio <= 1.0:
        raise ValueError("ratio must be in [0, 1]")
    open_idx = np.flatnonzero(buildings.values.ravel() == 0.0)
    count = int(np.floor(ratio * len(open_idx)))
    rng = np.random.default_rng([seed, 104729])
    picked = np.sort(rng.choice(open_idx, size=count, replace=False)) if count else np.zeros(0, int)
    dbm = truth.to_dbm().ravel()
    w = truth.width
    samples = tuple((int(i % w), int(i // w), float(dbm[i])) for i in picked)
    return SparseObservationSet(truth.width, truth.height, samples)


def generate_scene(cfg: SceneConfig) -> Scene:
    rng = np.random.default_rng(cfg.seed)
    mask = place_buildings(cfg, rng)
    bs_list = place_bs(mask, cfg.n_bs, rng)
    params = [
        LdplParams(float(rng.uniform(*cfg.pl0_range)), float(rng.uniform(*cfg.theta_range)))
        for _ in bs_list
    ]
    buildings = GridMap(mask, MapKind.BINARY)
    truth = ground_truth_radiomap(buildings, bs_list, params, cfg, rng)
    obs = sample_observations(truth, buildings, cfg.sample_ratio, cfg.seed)
    return Scene(buildings, tuple(bs_list), tuple(params), truth, obs, cfg)


def generate_scenes(cfg: SceneConfig, count: int, first_seed: Optional[int] = None) -> list:
    start = cfg.seed if first_seed is None else first_seed
    return [generate_scene(replace(cfg, seed=start + i)) for i in range(count)]


def build_features(
    buildings: GridMap, bs_list: Sequence[tuple[int, int]], params_list: Sequence[LdplParams]
) -> FeatureStack:
    depth = radio_depth_map(buildings, bs_list, params_list)
    return FeatureStack(buildings, bs_map(bs_list, buildings.width, buildings.height), depth)


def scene_params(scene: Scene, fit_config: FitConfig = FitConfig(), source: str = "fitted") -> list:
    """LDPL parameters as the transmitter would send them.

    ``source="fitted"`` regresses the scene's observations and falls back to the
    true parameters only when ``source="fitted-or-true"`` is asked for.
    """
    if source == "true":
        return list(scene.true_params)
    try:
        return fit_all(scene.observations, scene.bs_list, scene.config.tx_power, fit_config)
    except ValueError:
        if source == "fitted-or-true":
            return list(scene.true_params)
        raise


def scene_example(scene: Scene, fit_config: FitConfig = FitConfig(), source: str = "fitted-or-true"):
    """``(FeatureStack, truth)`` training pair for a scene."""
    params = scene_params(scene, fit_config, source)
    return build_features(scene.buildings, scene.bs_list, params), scene.truth
