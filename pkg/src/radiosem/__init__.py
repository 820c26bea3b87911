"""Physics-enhanced semantic transmission of radiomaps."""
from ._kernels import BACKEND as KERNEL_BACKEND
from .core import (
    GridMap,
    MapKind,
    MetricReport,
    Observation,
    SparseObservationSet,
    max_normalize,
    mse,
    nmse,
    outage_agreement,
    outage_map,
)
from .depthmap import los_path, los_ratio, radio_depth_map
from .ldpl import FitConfig, LdplParams, eval_path_loss, fit_ldpl, predict_freespace_map
from .payload import ChannelConfig, Scheme, SemanticPayload, apply_channel, deserialize, serialize

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "ChannelConfig",
    "FitConfig",
    "GridMap",
    "LdplParams",
    "MapKind",
    "MetricReport",
    "Observation",
    "Scheme",
    "SemanticPayload",
    "SparseObservationSet",
    "apply_channel",
    "deserialize",
    "eval_path_loss",
    "fit_ldpl",
    "los_path",
    "los_ratio",
    "max_normalize",
    "mse",
    "nmse",
    "outage_agreement",
    "outage_map",
    "predict_freespace_map",
    "radio_depth_map",
    "serialize",
]
