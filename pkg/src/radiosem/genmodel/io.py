"""``RSMP`` parameter files and loss-history CSV.

Layout, little-endian::

    b"RSMP" | u8 version | u8 name_len | name | u16 layout_version | u16 n_layers
    n_layers * (u8 kind | u16 cin | u16 cout | u8 k | u8 stride | u8 act | u8 dilation)
    u64 n_params | n_params * f64
"""
from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from ..errors import BadMagic, LayoutMismatch, LengthMismatch, Truncated, UnsupportedVersion
from .networks import Act, LayerKind, LayerSpec, Layout, ModelParams

MAGIC = b"RSMP"
VERSION = 1
_LAYER = struct.Struct("<BHHBBBB")


def params_to_bytes(p: ModelParams) -> bytes:
    name = p.layout.name.encode()
    out = [MAGIC, struct.pack("<BB", VERSION, len(name)), name]
    out.append(struct.pack("<HH", p.layout.version, len(p.layout.layers)))
    for s in p.layout.layers:
        out.append(_LAYER.pack(int(s.kind), s.cin, s.cout, s.k, s.stride, int(s.act), s.dilation))
    out.append(struct.pack("<Q", p.vector.size))
    out.append(p.vector.astype("<f8").tobytes())
    return b"".join(out)


class _Cursor:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise Truncated("parameter file ends early")
        chunk = self.data[self.off : self.off + n]
        self.off += n
        return chunk

    def unpack(self, fmt: Union[str, struct.Struct]):
        s = fmt if isinstance(fmt, struct.Struct) else struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def params_from_bytes(data: bytes) -> ModelParams:
    cur = _Cursor(bytes(data))
    if cur.take(4) != MAGIC:
        raise BadMagic("not an RSMP parameter file")
    version, name_len = cur.unpack("<BB")
    if version != VERSION:
        raise UnsupportedVersion(f"RSMP version {version}")
    name = cur.take(name_len).decode()
    layout_version, n_layers = cur.unpack("<HH")
    layers = []
    for _ in range(n_layers):
        kind, cin, cout, k, stride, act, dilation = cur.unpack(_LAYER)
        try:
            layers.append(LayerSpec(LayerKind(kind), cin, cout, k, stride, Act(act), dilation))
        except ValueError as exc:
            raise LayoutMismatch(f"unknown layer descriptor: {exc}") from exc
    layout = Layout(name, tuple(layers), layout_version)
    (n,) = cur.unpack("<Q")
    if n != layout.n_params:
        raise LengthMismatch(f"{n} parameters stored for a layout of {layout.n_params}")
    vec = np.frombuffer(cur.take(8 * n), dtype="<f8").astype(np.float64)
    if cur.off != len(data):
        raise LengthMismatch("trailing bytes after the parameter vector")
    return ModelParams(layout, vec)


def save_params(p: ModelParams, path: Union[str, Path]) -> None:
    Path(path).write_bytes(params_to_bytes(p))


def load_params(path: Union[str, Path]) -> ModelParams:
    return params_from_bytes(Path(path).read_bytes())


def write_history_csv(history: Iterable, path: Union[str, Path]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "L_D", "L_G", "L_MSE"])
        for row in history:
            w.writerow([row[0], *(repr(float(v)) for v in row[1:])])
