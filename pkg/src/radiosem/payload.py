"""Wire format for transmitted semantics, a bit-flip channel and bandwidth accounting.

``RSEM`` layout, all little-endian::

    b"RSEM" | u8 version | u8 scheme | u16 w | u16 h | u8 n_bs
    n_bs * (u16 x | u16 y | f32 pl0 | f32 theta_tilde)
    u32 blob_len | blob
"""
from __future__ import annotations

import enum
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import GridMap, SparseObservationSet
from .errors import (
    BadMagic,
    BlobTooLarge,
    LengthMismatch,
    TooManyBs,
    Truncated,
    UnsupportedVersion,
)
from .ldpl import LdplParams

MAGIC = b"RSEM"
VERSION = 1
_HEAD = struct.Struct("<4sBBHHB")
_BS = struct.Struct("<HHff")
_LEN = struct.Struct("<I")
HEADER_SIZE = _HEAD.size  # 11


class Scheme(enum.IntEnum):
    VQ = 0
    JPEG = 1


@dataclass(frozen=True)
class SemanticPayload:
    scheme: Scheme
    width: int
    height: int
    bs_list: tuple[tuple[int, int], ...]
    ldpl_list: tuple[LdplParams, ...]
    seg_blob: bytes

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        object.__setattr__(self, "bs_list", tuple((int(x), int(y)) for x, y in self.bs_list))
        object.__setattr__(self, "ldpl_list", tuple(self.ldpl_list))
        object.__setattr__(self, "seg_blob", bytes(self.seg_blob))
        if len(self.bs_list) != len(self.ldpl_list) or not self.bs_list:
            raise ValueError("need one LDPL parameter set per BS and at least one BS")
        for x, y in self.bs_list:
            if not (0 <= x < self.width and 0 <= y < self.height):
                raise ValueError(f"BS ({x}, {y}) outside {self.width}x{self.height}")
        if not self.seg_blob:
            raise ValueError("segmentation blob is empty")

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height


def f32(v: float) -> float:
    """Round a double to the nearest float32, as the wire format stores it."""
    return float(np.float32(v))


def serialize(p: SemanticPayload) -> bytes:
    if len(p.bs_list) > 255:
        raise TooManyBs(f"{len(p.bs_list)} base stations, the format holds 255")
    if len(p.seg_blob) > 0xFFFFFFFF:
        raise BlobTooLarge(f"blob of {len(p.seg_blob)} bytes")
    parts = [_HEAD.pack(MAGIC, VERSION, int(p.scheme), p.width, p.height, len(p.bs_list))]
    for (x, y), prm in zip(p.bs_list, p.ldpl_list):
        parts.append(_BS.pack(x, y, prm.pl0, prm.theta_tilde))
    parts.append(_LEN.pack(len(p.seg_blob)))
    parts.append(p.seg_blob)
    return b"".join(parts)


def deserialize(data: bytes) -> SemanticPayload:
    data = bytes(data)
    if len(data) < 4:
        raise Truncated("stream shorter than the magic")
    if data[:4] != MAGIC:
        raise BadMagic(f"expected {MAGIC!r}, got {data[:4]!r}")
    if len(data) < _HEAD.size:
        raise Truncated("stream shorter than the fixed header")
    _, version, scheme, width, height, n_bs = _HEAD.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersion(f"payload version {version}")
    try:
        scheme = Scheme(scheme)
    except ValueError:
        raise LengthMismatch(f"unknown scheme id {scheme}") from None
    off = _HEAD.size
    if len(data) < off + n_bs * _BS.size + _LEN.size:
        raise Truncated("stream ends inside the BS records")
    bs_list, ldpl_list = [], []
    for _ in range(n_bs):
        x, y, pl0, theta = _BS.unpack_from(data, off)
        off += _BS.size
        bs_list.append((x, y))
        ldpl_list.append(LdplParams(pl0, theta))
    (blob_len,) = _LEN.unpack_from(data, off)
    off += _LEN.size
    if len(data) < off + blob_len:
        raise Truncated(f"blob declares {blob_len} bytes, {len(data) - off} present")
    if len(data) > off + blob_len:
        raise LengthMismatch(f"{len(data) - off - blob_len} trailing bytes after the blob")
    try:
        return SemanticPayload(scheme, width, height, tuple(bs_list), tuple(ldpl_list), data[off:])
    except ValueError as exc:
        raise LengthMismatch(str(exc)) from exc


def protected_length(data: bytes) -> int:
    """Bytes covered by header protection: fixed header, BS records and the blob length."""
    if len(data) < _HEAD.size:
        return len(data)
    n_bs = data[_HEAD.size - 1]
    return min(len(data), _HEAD.size + n_bs * _BS.size + _LEN.size)


@dataclass(frozen=True)
class ChannelConfig:
    ber: float = 0.0
    seed: int = 0
    protect_header: bool = True

    def __post_init__(self):
        if not 0.0 <= self.ber < 1.0:
            raise ValueError(f"bit error rate must be in [0, 1), got {self.ber}")


def apply_channel(data: bytes, cfg: ChannelConfig) -> bytes:
    """Binary symmetric channel: every unprotected bit flips independently with prob ``ber``."""
    data = bytes(data)
    if cfg.ber == 0.0 or not data:
        return data
    start = protected_length(data) if cfg.protect_header else 0
    body = np.frombuffer(data[start:], dtype=np.uint8)
    rng = np.random.default_rng(cfg.seed)
    flips = rng.random(8 * body.size) < cfg.ber
    mask = np.packbits(flips)
    return data[:start] + (body ^ mask).tobytes()


def measure_bandwidth(data: bytes) -> float:
    """Size in kilobits."""
    return 8 * len(data) / 1000.0


def raw_baseline_bits(buildings: GridMap, samples: SparseObservationSet | Sequence) -> int:
    """1 bit per segmentation pixel plus 64 bits (u16 x, u16 y, f32 psd) per observation."""
    return buildings.width * buildings.height + 64 * len(samples)
