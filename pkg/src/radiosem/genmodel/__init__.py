"""Conditional generative reconstructor with hand-written differentiation."""
from .baseline import physics_baseline
from .gradcheck import GradCheckResult, gradient_check
from .io import load_params, params_from_bytes, params_to_bytes, save_params, write_history_csv
from .losses import discriminator_loss, generator_loss
from .networks import (
    Layout,
    ModelParams,
    backward,
    discriminator_layout,
    forward,
    generator_layout,
    init_params,
)
from .optim import AdamState, adam_step
from .train import (
    FeatureStack,
    TrainConfig,
    TrainResult,
    TrainState,
    dataset_mse,
    discriminator_forward,
    generator_forward,
    predict,
    stack_dataset,
    train,
)

__all__ = [
    "AdamState",
    "FeatureStack",
    "GradCheckResult",
    "gradient_check",
    "Layout",
    "ModelParams",
    "TrainConfig",
    "TrainResult",
    "TrainState",
    "adam_step",
    "backward",
    "dataset_mse",
    "discriminator_forward",
    "discriminator_layout",
    "discriminator_loss",
    "forward",
    "generator_forward",
    "generator_layout",
    "generator_loss",
    "init_params",
    "load_params",
    "params_from_bytes",
    "params_to_bytes",
    "physics_baseline",
    "predict",
    "save_params",
    "stack_dataset",
    "train",
    "write_history_csv",
]
