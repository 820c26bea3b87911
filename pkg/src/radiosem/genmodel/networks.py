"""Generator and discriminator networks over a flat parameter vector.

A network is a ``Layout`` (a versioned tuple of ``LayerSpec``) plus a flat
float64 vector. ``forward`` caches what ``backward`` needs, so gradients are
exact reverse-mode derivatives of the same arithmetic.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import LayoutMismatch, NumericOverflow, ShapeMismatch
from . import layers as L

LAYOUT_VERSION = 2
# sigmoid heads start near 0.5 so early updates are not lost to saturation
OUTPUT_INIT_SCALE = 0.1


class LayerKind(enum.IntEnum):
    CONV = 1
    UP = 2
    GMEAN = 3
    DENSE = 4
    CAT = 5  # append an earlier activation's channels; ``k`` names the source


class Act(enum.IntEnum):
    NONE = 0
    LRELU = 1
    SIGMOID = 2


@dataclass(frozen=True)
class LayerSpec:
    kind: LayerKind
    cin: int = 0
    cout: int = 0
    k: int = 0
    stride: int = 1
    act: Act = Act.NONE
    dilation: int = 1

    @property
    def weight_shape(self) -> tuple:
        if self.kind is LayerKind.CONV:
            return (self.cout, self.cin, self.k, self.k)
        if self.kind is LayerKind.DENSE:
            return (self.cout, self.cin)
        return ()

    @property
    def n_params(self) -> int:
        if self.kind in (LayerKind.CONV, LayerKind.DENSE):
            return int(np.prod(self.weight_shape)) + self.cout
        return 0


@dataclass(frozen=True)
class Layout:
    name: str
    layers: tuple
    version: int = LAYOUT_VERSION

    @property
    def n_params(self) -> int:
        return sum(spec.n_params for spec in self.layers)

    @property
    def in_channels(self) -> int:
        return self.layers[0].cin

    def slices(self):
        """``(weight_slice, bias_slice)`` per parameterised layer, ``None`` otherwise."""
        out, off = [], 0
        for spec in self.layers:
            if spec.n_params:
                nw = int(np.prod(spec.weight_shape))
                out.append((slice(off, off + nw), slice(off + nw, off + spec.n_params)))
                off += spec.n_params
            else:
                out.append(None)
        return out


def generator_layout(in_channels: int = 3) -> Layout:
    """Encoder-decoder with skip connections from the half-resolution encoder and the input.

    Activation ``j`` is the output of the first ``j`` layers, so ``k=0`` is the input.
    """
    conv = lambda cin, cout, s, act=Act.LRELU, dil=1: LayerSpec(LayerKind.CONV, cin, cout, 3, s, act, dil)
    return Layout(
        "generator",
        (
            conv(in_channels, 16, 2),
            conv(16, 32, 2),
            conv(32, 32, 1, dil=1),
            conv(32, 32, 1, dil=2),
            conv(32, 32, 1, dil=4),
            LayerSpec(LayerKind.UP),
            LayerSpec(LayerKind.CAT, 32, 48, k=1),
            conv(48, 16, 1),
            LayerSpec(LayerKind.UP),
            LayerSpec(LayerKind.CAT, 16, 16 + in_channels, k=0),
            conv(16 + in_channels, 16, 1),
            conv(16, 1, 1, Act.SIGMOID),
        ),
    )


def discriminator_layout(in_channels: int = 4) -> Layout:
    return Layout(
        "discriminator",
        (
            LayerSpec(LayerKind.CONV, in_channels, 16, 3, 2, Act.LRELU),
            LayerSpec(LayerKind.CONV, 16, 32, 3, 2, Act.LRELU),
            LayerSpec(LayerKind.GMEAN),
            LayerSpec(LayerKind.DENSE, 32, 1, act=Act.SIGMOID),
        ),
    )


@dataclass(frozen=True, eq=False)
class ModelParams:
    layout: Layout
    vector: np.ndarray

    def __post_init__(self):
        vec = np.array(self.vector, dtype=np.float64, copy=True)
        if vec.shape != (self.layout.n_params,):
            raise LayoutMismatch(f"vector of {vec.size} values for a layout of {self.layout.n_params}")
        vec.setflags(write=False)
        object.__setattr__(self, "vector", vec)

    def with_vector(self, vector: np.ndarray) -> "ModelParams":
        return ModelParams(self.layout, vector)

    def __eq__(self, other):
        if not isinstance(other, ModelParams):
            return NotImplemented
        return self.layout == other.layout and np.array_equal(self.vector, other.vector)

    __hash__ = None


def init_params(layout: Layout, seed) -> ModelParams:
    """He-normal weights (leaky-ReLU gain, scaled down on sigmoid heads), zero biases."""
    rng = np.random.default_rng(seed)
    vec = np.zeros(layout.n_params)
    for spec, sl in zip(layout.layers, layout.slices()):
        if sl is None:
            continue
        fan_in = int(np.prod(spec.weight_shape[1:]))
        std = np.sqrt(2.0 / ((1.0 + L.LEAK**2) * fan_in))
        if spec.act is Act.SIGMOID:
            std *= OUTPUT_INIT_SCALE
        vec[sl[0]] = rng.normal(0.0, std, size=sl[0].stop - sl[0].start)
    return ModelParams(layout, vec)


def _check_finite(arr: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericOverflow(f"non-finite values in {where}")


def forward(params: ModelParams, x: np.ndarray):
    """Run the network on an ``(N, C, H, W)`` batch; returns ``(output, cache)``.

    Image outputs come back as ``(N, C, H, W)``, dense outputs as ``(N, C)``.
    """
    layout = params.layout
    if x.ndim != 4 or x.shape[1] != layout.in_channels:
        raise ShapeMismatch(f"{layout.name} expects (N, {layout.in_channels}, H, W), got {x.shape}")
    vec = params.vector
    cache = []
    h = np.ascontiguousarray(x.transpose(1, 0, 2, 3), dtype=np.float64)
    acts = [h]
    for spec, sl in zip(layout.layers, layout.slices()):
        if spec.kind is LayerKind.CAT:
            src = acts[spec.k]
            if src.shape[1:] != h.shape[1:]:
                raise ShapeMismatch(f"cannot join {src.shape} onto {h.shape}")
            z = np.concatenate([h, src])
            saved = h.shape[0]
        elif spec.kind is LayerKind.CONV:
            if h.shape[2] % spec.stride or h.shape[3] % spec.stride:
                raise ShapeMismatch(f"{h.shape[2]}x{h.shape[3]} activations do not divide by stride {spec.stride}")
            w = vec[sl[0]].reshape(spec.weight_shape)
            z, cols = L.conv2d_forward(h, w, vec[sl[1]], spec.stride, spec.dilation)
            saved = (h.shape, cols)
        elif spec.kind is LayerKind.DENSE:
            w = vec[sl[0]].reshape(spec.weight_shape)
            z = h @ w.T + vec[sl[1]]
            saved = h
        elif spec.kind is LayerKind.UP:
            z = L.upsample2_forward(h)
            saved = None
        else:
            z = h.mean(axis=(2, 3)).T
            saved = h.shape
        _check_finite(z, f"{layout.name} layer {len(cache)}")
        if spec.act is Act.LRELU:
            h = L.leaky_relu(z)
            cache.append((saved, z))
        elif spec.act is Act.SIGMOID:
            h = L.sigmoid(z)
            cache.append((saved, h))
        else:
            h = z
            cache.append((saved, None))
        acts.append(h)
    if h.ndim == 4:
        h = h.transpose(1, 0, 2, 3)
    return h, cache


def backward(params: ModelParams, cache, dout: np.ndarray):
    """Reverse pass; returns ``(grad_vector, grad_input)`` with ``grad_input`` as ``(N, C, H, W)``."""
    layout = params.layout
    vec = params.vector
    grad = np.zeros(layout.n_params)
    d = dout.transpose(1, 0, 2, 3) if dout.ndim == 4 else dout
    skip_grads: dict = {}
    slices = layout.slices()
    for i in reversed(range(len(layout.layers))):
        spec, sl, (saved, act_saved) = layout.layers[i], slices[i], cache[i]
        if i + 1 in skip_grads:
            d = d + skip_grads.pop(i + 1)
        if spec.act is Act.LRELU:
            d = d * L.leaky_relu_grad(act_saved)
        elif spec.act is Act.SIGMOID:
            d = d * act_saved * (1.0 - act_saved)
        if spec.kind is LayerKind.CONV:
            x_shape, cols = saved
            w = vec[sl[0]].reshape(spec.weight_shape)
            d, dw, db = L.conv2d_backward(d, cols, x_shape, w, spec.stride, spec.dilation)
            grad[sl[0]] = dw.ravel()
            grad[sl[1]] = db
        elif spec.kind is LayerKind.DENSE:
            w = vec[sl[0]].reshape(spec.weight_shape)
            grad[sl[0]] = (d.T @ saved).ravel()
            grad[sl[1]] = d.sum(axis=0)
            d = d @ w
        elif spec.kind is LayerKind.UP:
            d = L.upsample2_backward(d)
        elif spec.kind is LayerKind.CAT:
            d, d_src = d[:saved], d[saved:]
            skip_grads[spec.k] = skip_grads.get(spec.k, 0.0) + d_src
        else:
            c, n, hh, ww = saved
            d = np.broadcast_to(d.T[:, :, None, None] / (hh * ww), saved).copy()
    if 0 in skip_grads:
        d = d + skip_grads.pop(0)
    _check_finite(grad, f"{layout.name} gradient")
    _check_finite(d, f"{layout.name} input gradient")
    return grad, d.transpose(1, 0, 2, 3)


def check_layout(params: ModelParams, expected: Optional[Layout] = None, name: Optional[str] = None) -> None:
    if expected is not None and params.layout != expected:
        raise LayoutMismatch(f"layout {params.layout.name} does not match {expected.name}")
    if name is not None and params.layout.name != name:
        raise LayoutMismatch(f"expected a {name} layout, got {params.layout.name}")
