"""Transmitter -> channel -> receiver orchestration for one scene."""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core import GridMap, MapKind, MetricReport, bs_map, downsample, evaluate
from ..depthmap import radio_depth_map
from ..errors import PipelineError, RadiosemError
from ..genmodel.baseline import physics_baseline
from ..genmodel.networks import ModelParams
from ..genmodel.train import FeatureStack, generator_forward
from ..ldpl import FitConfig, LdplParams, fit_all
from ..payload import (
    ChannelConfig,
    Scheme,
    SemanticPayload,
    apply_channel,
    deserialize,
    measure_bandwidth,
    serialize,
)
from ..semcomp import jpeg_decode_binary, jpeg_encode_binary
from ..semcomp.vq import Codebook, encode_map, pack_indices, patchify, train_codebook, unpack_indices, vq_decode
from .scene import Scene, SceneConfig, place_buildings

OUTAGE_THRESHOLD = 0.3


@dataclass(frozen=True)
class PipelineResult:
    reconstruction: GridMap
    report: MetricReport
    bandwidth_kbit: float
    sent: SemanticPayload
    received: SemanticPayload
    decoded_buildings: GridMap
    wire: bytes


class _Stage:
    """Re-raise library errors as ``PipelineError`` tagged with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and isinstance(exc, (RadiosemError, ValueError)) and not isinstance(exc, PipelineError):
            raise PipelineError(self.name, exc) from exc
        return False


@functools.lru_cache(maxsize=8)
def default_codebook(
    width: int = 64, height: int = 64, patch: int = 8, n: int = 256, scenes: int = 400, seed: int = 0
) -> Codebook:
    """Codebook shared in advance by both ends, trained on synthetic building layouts."""
    cfg = SceneConfig(width=width, height=height) if width <= 64 else SceneConfig.full_scale(width=width, height=height)
    rng = np.random.default_rng([seed, 31337])
    vecs = [patchify(GridMap(place_buildings(cfg, rng), MapKind.BINARY), patch).vectors for _ in range(scenes)]
    return train_codebook(np.concatenate(vecs), n=n, seed=seed)


def compress_buildings(buildings: GridMap, scheme: Scheme, codebook: Optional[Codebook], quality: int) -> bytes:
    if scheme is Scheme.VQ:
        return pack_indices(encode_map(buildings, codebook))
    return jpeg_encode_binary(buildings, quality)


def decompress_buildings(blob: bytes, scheme: Scheme, dims, codebook: Optional[Codebook], quality: int) -> GridMap:
    if scheme is Scheme.VQ:
        return vq_decode(unpack_indices(blob, dims, codebook), codebook)
    return jpeg_decode_binary(blob, dims)


def work_factor(width: int, work_resolution: Optional[int]) -> int:
    """Downsampling factor for a working resolution; scenes already at or below it are left as is."""
    if work_resolution is None:
        return 1
    return max(1, width // work_resolution)


def receiver_features(
    buildings: GridMap, bs_list, params_list, work_resolution: Optional[int] = None
) -> FeatureStack:
    """Rebuild ``{M_U, M_T, M_D}`` at the receiver, optionally downsampled."""
    depth = radio_depth_map(buildings, bs_list, params_list)
    tx_map = bs_map(bs_list, buildings.width, buildings.height)
    factor = work_factor(buildings.width, work_resolution)
    if factor > 1:
        scaled_bs = [(x // factor, y // factor) for x, y in bs_list]
        small = downsample(buildings, factor)
        tx_map = bs_map(scaled_bs, small.width, small.height)
        return FeatureStack(small, tx_map, downsample(depth, factor))
    return FeatureStack(buildings, tx_map, depth)


def run_pipeline(
    scene: Scene,
    scheme: Scheme = Scheme.VQ,
    channel_cfg: ChannelConfig = ChannelConfig(),
    model_params: Optional[ModelParams] = None,
    *,
    codebook: Optional[Codebook] = None,
    quality: int = 50,
    fit_config: FitConfig = FitConfig(),
    outage_threshold: float = OUTAGE_THRESHOLD,
    work_resolution: Optional[int] = None,
) -> PipelineResult:
    """Fit, compress and serialize at the transmitter; corrupt; decode and reconstruct at the receiver.

    Without ``model_params`` the receiver falls back to ``physics_baseline``.
    """
    scheme = Scheme(scheme)
    dims = scene.dims
    if scheme is Scheme.VQ and codebook is None:
        codebook = default_codebook(*dims)

    with _Stage("fit"):
        params = fit_all(scene.observations, scene.bs_list, scene.config.tx_power, fit_config)
    with _Stage("compress"):
        blob = compress_buildings(scene.buildings, scheme, codebook, quality)
    with _Stage("serialize"):
        sent = SemanticPayload(scheme, dims[0], dims[1], scene.bs_list, tuple(params), blob)
        wire = serialize(sent)
    with _Stage("channel"):
        noisy = apply_channel(wire, channel_cfg)
    with _Stage("deserialize"):
        received = deserialize(noisy)
    with _Stage("decode"):
        buildings = decompress_buildings(received.seg_blob, received.scheme, received.dims, codebook, quality)
    with _Stage("depthmap"):
        features = receiver_features(buildings, received.bs_list, received.ldpl_list, work_resolution)
    truth = scene.truth
    factor = work_factor(truth.width, work_resolution)
    if factor > 1:
        truth = downsample(truth, factor)
    with _Stage("generate"):
        if model_params is None:
            factor = dims[0] // features.depth.width
            # distances shrink by the downsampling factor; fold it into the intercept
            scaled = [LdplParams(p.pl0 + p.theta_tilde * np.log10(factor), p.theta_tilde) for p in received.ldpl_list]
            bs_small = [(x // factor, y // factor) for x, y in received.bs_list]
            recon = physics_baseline(features.depth, scaled, bs_small, features.depth.dims, buildings=features.buildings)
        else:
            recon = generator_forward(model_params, features)
    with _Stage("evaluate"):
        report = evaluate(recon, truth, outage_threshold)
    return PipelineResult(recon, report, measure_bandwidth(noisy), sent, received, buildings, noisy)
