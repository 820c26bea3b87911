"""8-bit grayscale PGM (P5) read/write for grid maps."""
from __future__ import annotations

import re
from pathlib import Path
from typing import Union

import numpy as np

from ..core import GridMap, MapKind
from ..errors import MalformedFile

_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def to_bytes8(values: np.ndarray) -> np.ndarray:
    """Round-half-up of ``value * 255``, clipped to ``[0, 255]``."""
    return np.clip(np.floor(np.asarray(values) * 255.0 + 0.5), 0, 255).astype(np.uint8)


def encode_pgm(g: GridMap) -> bytes:
    return f"P5\n{g.width} {g.height}\n255\n".encode() + to_bytes8(g.values).tobytes()


def decode_pgm(data: bytes, kind: MapKind = MapKind.NORMALIZED) -> GridMap:
    fields, pos = [], 0
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise MalformedFile("incomplete PGM header")
        fields.append(m.group(1))
        pos = m.end()
    if fields[0] != b"P5":
        raise MalformedFile(f"not a binary PGM (magic {fields[0][:8]!r})")
    try:
        width, height, maxval = (int(f) for f in fields[1:])
    except ValueError:
        raise MalformedFile("non-numeric PGM header field") from None
    if maxval != 255:
        raise MalformedFile(f"only 8-bit PGM is supported, maxval {maxval}")
    body = data[pos + 1 :]
    if len(body) != width * height:
        raise MalformedFile(f"PGM body has {len(body)} bytes, expected {width * height}")
    vals = np.frombuffer(body, dtype=np.uint8).reshape(height, width) / 255.0
    if kind is MapKind.BINARY:
        vals = (vals >= 0.5).astype(np.float64)
    return GridMap(vals, kind)


def save_map(path: Union[str, Path], g: GridMap) -> None:
    try:
        Path(path).write_bytes(encode_pgm(g))
    except OSError as exc:
        raise MalformedFile(f"cannot write {path}: {exc}") from exc


def load_map(path: Union[str, Path], kind: MapKind = MapKind.NORMALIZED) -> GridMap:
    return decode_pgm(Path(path).read_bytes(), kind)
