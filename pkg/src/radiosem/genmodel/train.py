"""Feature stacks, the single-example forward APIs and the cGAN training loop."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from ..core import GridMap, MapKind
from ..errors import EmptyDataset, LayoutMismatch, ShapeMismatch
from . import losses
from .networks import (
    ModelParams,
    backward,
    discriminator_layout,
    forward,
    generator_layout,
    init_params,
)
from .optim import AdamState, adam_step


@dataclass(frozen=True)
class FeatureStack:
    """Receiver-side conditioning: buildings, BS one-hot map, depth map and side info."""

    buildings: GridMap
    bs_map: GridMap
    depth: GridMap
    side_info: tuple = ()

    def __post_init__(self):
        dims = self.buildings.values.shape
        if self.bs_map.values.shape != dims or self.depth.values.shape != dims:
            raise ShapeMismatch("feature channels must share dimensions")
        if self.buildings.kind is not MapKind.BINARY or self.bs_map.kind is not MapKind.BINARY:
            raise ValueError("building and BS channels must be binary")
        if self.depth.kind not in (MapKind.DEPTH, MapKind.NORMALIZED):
            raise ValueError("depth channel must lie in [0, 1]")
        object.__setattr__(self, "side_info", tuple(float(v) for v in self.side_info))

    @property
    def channels(self) -> int:
        return 3 + len(self.side_info)

    def to_array(self) -> np.ndarray:
        """``(C, H, W)`` with side information broadcast as constant planes."""
        planes = [self.buildings.values, self.bs_map.values, self.depth.values]
        planes += [np.full(self.buildings.values.shape, v) for v in self.side_info]
        return np.stack(planes)


@dataclass(frozen=True)
class TrainConfig:
    alpha: float = 0.01
    lr: float = 1e-4
    batch: int = 32
    epochs: int = 1
    seed: int = 0
    work_resolution: int = 64
    max_steps: Optional[int] = None
    warmup: int = 0  # linear lr ramp over the first optimizer steps
    adversarial: bool = True  # False trains G on MSE alone and never touches D
    augment: bool = True  # random flips/quarter turns per example; the physics is invariant to both

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if not self.lr > 0:
            raise ValueError("learning rate must be positive")
        if self.batch < 1:
            raise ValueError("batch size must be at least 1")
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")

    def lr_at(self, t: int) -> float:
        """Learning rate for optimizer step ``t`` (0-based, counted by the Adam state)."""
        if self.warmup and t < self.warmup:
            return self.lr * (t + 1) / self.warmup
        return self.lr


@dataclass(frozen=True)
class TrainState:
    """Everything needed to resume training: parameters, optimizer moments, epoch count."""

    generator: ModelParams
    discriminator: ModelParams
    opt_g: AdamState
    opt_d: AdamState
    epochs_done: int = 0

    @classmethod
    def initial(cls, in_channels: int, seed: int) -> "TrainState":
        g = init_params(generator_layout(in_channels), [seed, 1])
        d = init_params(discriminator_layout(in_channels + 1), [seed, 2])
        return cls(g, d, AdamState.zeros(g.layout.n_params), AdamState.zeros(d.layout.n_params))

    def with_params(self, generator: ModelParams, discriminator: ModelParams) -> "TrainState":
        if generator.layout != self.generator.layout or discriminator.layout != self.discriminator.layout:
            raise LayoutMismatch("parameter layouts differ from the training state")
        return replace(self, generator=generator, discriminator=discriminator)


@dataclass(frozen=True)
class StepStats:
    loss_d: float
    loss_g: float
    loss_mse: float


@dataclass
class TrainResult:
    state: TrainState
    history: list = field(default_factory=list)  # per epoch: (epoch, L_D, L_G, L_MSE)
    steps: list = field(default_factory=list)  # per step: StepStats

    @property
    def generator(self) -> ModelParams:
        return self.state.generator

    @property
    def discriminator(self) -> ModelParams:
        return self.state.discriminator


def stack_dataset(dataset: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """``(features (N, C, H, W), targets (N, 1, H, W))`` from ``(FeatureStack, GridMap)`` pairs."""
    if len(dataset) == 0:
        raise EmptyDataset("no training examples")
    shapes = {f.buildings.values.shape for f, _ in dataset} | {y.values.shape for _, y in dataset}
    if len(shapes) != 1:
        raise ShapeMismatch(f"mixed example dimensions {sorted(shapes)}")
    x = np.stack([f.to_array() for f, _ in dataset])
    y = np.stack([t.values[None] for _, t in dataset])
    return x, y


def _disc_input(y: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.concatenate([y, x], axis=1)


def generator_forward(params: ModelParams, f: FeatureStack) -> GridMap:
    if params.layout.name != "generator":
        raise LayoutMismatch(f"expected a generator layout, got {params.layout.name}")
    out, _ = forward(params, f.to_array()[None])
    return GridMap(out[0, 0], MapKind.NORMALIZED)


def predict(params: ModelParams, x: np.ndarray, chunk: int = 64) -> np.ndarray:
    """Generator outputs ``(N, 1, H, W)`` for a feature batch."""
    return np.concatenate([forward(params, x[i : i + chunk])[0] for i in range(0, len(x), chunk)])


def discriminator_forward(params: ModelParams, y, f) -> np.ndarray | float:
    """Probability that ``y`` is a real radiomap given the features.

    Accepts a single ``(GridMap, FeatureStack)`` pair or batched arrays
    ``y (N, 1, H, W)``, ``f (N, C, H, W)``.
    """
    if params.layout.name != "discriminator":
        raise LayoutMismatch(f"expected a discriminator layout, got {params.layout.name}")
    if isinstance(y, GridMap):
        if y.values.shape != f.buildings.values.shape:
            raise ShapeMismatch("radiomap and features differ in size")
        out, _ = forward(params, _disc_input(y.values[None, None], f.to_array()[None]))
        return float(out[0, 0])
    out, _ = forward(params, _disc_input(y, f))
    return out[:, 0]


def _epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    return np.random.default_rng([seed, 7919, epoch]).permutation(n)


def _dihedral(a: np.ndarray, code: int) -> np.ndarray:
    """One of the 8 square symmetries of a ``(C, H, W)`` array."""
    if code & 4:
        a = a[:, :, ::-1]
    return np.rot90(a, code & 3, axes=(1, 2))


def _augment(xb: np.ndarray, yb: np.ndarray, rng: np.random.Generator):
    codes = rng.integers(0, 8, size=len(xb))
    xs = np.stack([_dihedral(x, c) for x, c in zip(xb, codes)])
    ys = np.stack([_dihedral(y, c) for y, c in zip(yb, codes)])
    return np.ascontiguousarray(xs), np.ascontiguousarray(ys)


def train(dataset: Sequence, cfg: TrainConfig, state: Optional[TrainState] = None) -> TrainResult:
    """Alternate a discriminator step on ``L_D`` and a generator step on ``alpha*L_G + L_MSE``.

    ``state`` resumes from earlier training (parameters, Adam moments and the
    epoch counter that seeds the shuffle); otherwise networks are initialised
    from ``cfg.seed``.
    """
    x_all, y_all = stack_dataset(dataset)
    if state is None:
        state = TrainState.initial(x_all.shape[1], cfg.seed)
    if state.generator.layout.in_channels != x_all.shape[1]:
        raise LayoutMismatch("feature channel count does not match the generator layout")
    g, d = state.generator, state.discriminator
    opt_g, opt_d = state.opt_g, state.opt_d
    result = TrainResult(state)
    n = len(x_all)
    steps_per_epoch = math.ceil(n / cfg.batch)
    epoch = state.epochs_done

    for _ in range(cfg.epochs):
        if cfg.max_steps is not None and len(result.steps) >= cfg.max_steps:
            break
        order = _epoch_order(cfg.seed, epoch, n)
        aug_rng = np.random.default_rng([cfg.seed, 7927, epoch])
        epoch_stats = []
        for b in range(steps_per_epoch):
            if cfg.max_steps is not None and len(result.steps) >= cfg.max_steps:
                break
            idx = order[b * cfg.batch : (b + 1) * cfg.batch]
            xb, yb = x_all[idx], y_all[idx]
            if cfg.augment:
                if xb.shape[2] != xb.shape[3]:
                    raise ShapeMismatch("augmentation needs square examples")
                xb, yb = _augment(xb, yb, aug_rng)
            loss_d = loss_g = float("nan")

            # G is unchanged by the D step, so one forward pass serves both steps
            fake, g_cache = forward(g, xb)
            if cfg.adversarial:
                probs, cache = forward(d, np.concatenate([_disc_input(yb, xb), _disc_input(fake, xb)]))
                d_real, d_fake = probs[: len(xb)], probs[len(xb) :]
                loss_d = losses.discriminator_loss(d_real, d_fake)
                g_real, g_fake = losses.discriminator_grads(d_real, d_fake)
                grad_d, _ = backward(d, cache, np.concatenate([g_real, g_fake]))
                vec, opt_d = adam_step(d.vector, grad_d, opt_d, cfg.lr_at(opt_d.t))
                d = d.with_vector(vec)

            loss_mse = losses.mse_loss(fake, yb)
            dfake = losses.mse_grad(fake, yb)
            if cfg.adversarial:
                probs, d_cache = forward(d, _disc_input(fake, xb))
                loss_g = losses.adversarial_term(probs)
                if cfg.alpha != 0.0:
                    _, dx = backward(d, d_cache, cfg.alpha * losses.adversarial_grad(probs))
                    dfake = dfake + dx[:, :1]
            grad_g, _ = backward(g, g_cache, dfake)
            vec, opt_g = adam_step(g.vector, grad_g, opt_g, cfg.lr_at(opt_g.t))
            g = g.with_vector(vec)

            stats = StepStats(loss_d, loss_g, loss_mse)
            result.steps.append(stats)
            epoch_stats.append(stats)
        result.history.append(
            (
                epoch,
                float(np.mean([s.loss_d for s in epoch_stats])),
                float(np.mean([s.loss_g for s in epoch_stats])),
                float(np.mean([s.loss_mse for s in epoch_stats])),
            )
        )
        epoch += 1

    result.state = TrainState(g, d, opt_g, opt_d, epoch)
    return result


def dataset_mse(params: ModelParams, dataset: Sequence) -> float:
    """Pixel MSE of the generator over a whole dataset."""
    x, y = stack_dataset(dataset)
    return losses.mse_loss(predict(params, x), y)
