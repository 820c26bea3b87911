"""Layer primitives with explicit forward/backward passes.

Activations inside a network are kept channel-major, ``(C, N, H, W)``, so
every im2col tap is a contiguous block and the convolution output needs no
transpose. Weights keep the usual ``(C_out, C_in, k, k)`` shape.
"""
from __future__ import annotations

import numpy as np

LEAK = 0.2


def conv_out_size(n: int, stride: int, k: int = 3, pad: int = 1) -> int:
    return (n + 2 * pad - k) // stride + 1


def _tap(kh: int, kw: int, stride: int, ho: int, wo: int, dilation: int = 1):
    r, c = kh * dilation, kw * dilation
    return (slice(None), slice(None), slice(r, r + stride * ho, stride), slice(c, c + stride * wo, stride))


def _wmat(w: np.ndarray) -> np.ndarray:
    """``(C_out, k*k*C_in)`` with columns ordered (kh, kw, c) to match the im2col rows."""
    return w.transpose(0, 2, 3, 1).reshape(w.shape[0], -1)


def _flat_padded(x: np.ndarray, pad: int) -> np.ndarray:
    c, n, h, w = x.shape
    xp = np.zeros((c, n, h + 2 * pad, w + 2 * pad))
    xp[:, :, pad : pad + h, pad : pad + w] = x
    return xp.reshape(c, -1)


def conv2d_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int, dilation: int = 1):
    """Zero-padded, optionally dilated ``k x k`` convolution of a ``(C, N, H, W)`` batch.

    Returns the output and whatever the backward pass needs. Stride-1 layers
    run one GEMM per kernel tap on shifted views of the flattened padded
    input; strided layers build an im2col matrix.
    """
    if stride == 1:
        return _conv_shift_forward(x, w, b, dilation)
    c, n, h, wd = x.shape
    cout, _, k, _ = w.shape
    pad = dilation * (k // 2)
    span = dilation * (k - 1) + 1
    ho, wo = conv_out_size(h, stride, span, pad), conv_out_size(wd, stride, span, pad)
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    cols = np.empty((k * k, c, n, ho, wo))
    for kh in range(k):
        for kw in range(k):
            cols[kh * k + kw] = xp[_tap(kh, kw, stride, ho, wo, dilation)]
    cols = cols.reshape(k * k * c, n * ho * wo)
    out = _wmat(w) @ cols + b[:, None]
    return out.reshape(cout, n, ho, wo), cols


def conv2d_backward(dout: np.ndarray, cols: np.ndarray, x_shape, w: np.ndarray, stride: int, dilation: int = 1):
    """Gradients ``(dx, dw, db)`` of a ``conv2d_forward`` call."""
    if stride == 1:
        return _conv_shift_backward(dout, cols, x_shape, w, dilation)
    c, n, h, wd = x_shape
    cout, _, k, _ = w.shape
    pad = dilation * (k // 2)
    ho, wo = dout.shape[2], dout.shape[3]
    dflat = dout.reshape(cout, -1)
    dw = (dflat @ cols.T).reshape(cout, k, k, c).transpose(0, 3, 1, 2)
    db = dflat.sum(axis=1)
    dcols = (_wmat(w).T @ dflat).reshape(k * k, c, n, ho, wo)
    dxp = np.zeros((c, n, h + 2 * pad, wd + 2 * pad))
    for kh in range(k):
        for kw in range(k):
            dxp[_tap(kh, kw, stride, ho, wo, dilation)] += dcols[kh * k + kw]
    return dxp[:, :, pad : pad + h, pad : pad + wd], dw, db


def _taps(w: np.ndarray) -> np.ndarray:
    """``(k*k, C_out, C_in)`` contiguous per-tap weight matrices (BLAS needs a unit stride)."""
    return np.ascontiguousarray(w.transpose(2, 3, 0, 1).reshape(-1, w.shape[0], w.shape[1]))


def _shift_geometry(x_shape, k: int, dilation: int):
    c, n, h, wd = x_shape
    pad = dilation * (k // 2)
    hp, wp = h + 2 * pad, wd + 2 * pad
    offsets = [dilation * (kh * wp + kw) for kh in range(k) for kw in range(k)]
    # outputs live on the padded grid; the last valid one sits max(offsets) before the end
    m = n * hp * wp - offsets[-1]
    return pad, hp, wp, offsets, m


def _conv_shift_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, dilation: int):
    c, n, h, wd = x.shape
    cout, _, k, _ = w.shape
    pad, hp, wp, offsets, m = _shift_geometry(x.shape, k, dilation)
    xf = _flat_padded(x, pad)
    taps = _taps(w)
    acc = np.zeros((cout, n * hp * wp))
    for t, off in enumerate(offsets):
        acc[:, :m] += taps[t] @ xf[:, off : off + m]
    out = acc.reshape(cout, n, hp, wp)[:, :, :h, :wd] + b[:, None, None, None]
    return out, xf


def _conv_shift_backward(dout: np.ndarray, xf: np.ndarray, x_shape, w: np.ndarray, dilation: int):
    c, n, h, wd = x_shape
    cout, _, k, _ = w.shape
    pad, hp, wp, offsets, m = _shift_geometry(x_shape, k, dilation)
    dfull = np.zeros((cout, n, hp, wp))
    dfull[:, :, :h, :wd] = dout
    dfull = dfull.reshape(cout, -1)[:, :m]
    taps_t = np.ascontiguousarray(_taps(w).transpose(0, 2, 1))
    dw_taps = np.empty((k * k, cout, c))
    dxf = np.zeros((c, n * hp * wp))
    for t, off in enumerate(offsets):
        dw_taps[t] = dfull @ xf[:, off : off + m].T
        dxf[:, off : off + m] += taps_t[t] @ dfull
    dw = dw_taps.reshape(k, k, cout, c).transpose(2, 3, 0, 1)
    db = dout.sum(axis=(1, 2, 3))
    dx = dxf.reshape(c, n, hp, wp)[:, :, pad : pad + h, pad : pad + wd]
    return dx, dw, db


def upsample2_forward(x: np.ndarray) -> np.ndarray:
    return x.repeat(2, axis=2).repeat(2, axis=3)


def upsample2_backward(dout: np.ndarray) -> np.ndarray:
    c, n, h, w = dout.shape
    return dout.reshape(c, n, h // 2, 2, w // 2, 2).sum(axis=(3, 5))


def leaky_relu(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, z, LEAK * z)


def leaky_relu_grad(z: np.ndarray) -> np.ndarray:
    return np.where(z > 0, 1.0, LEAK)


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))
