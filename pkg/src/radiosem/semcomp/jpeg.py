"""Self-contained JPEG-like codec for binary segmentation maps.

Stream layout (little-endian header)::

    b"RSJB" | u8 quality | u16 width | u16 height | bitstream

The bitstream covers every 8x8 block in raster order. Each block is level
coded (building = ``LEVEL``, shifted by ``LEVEL / 2``), transformed with the
orthonormal DCT, divided by the quality-scaled luminance table and rounded;
the DC term is replaced by its difference to the previous block's DC. The
zig-zag scans of all blocks are concatenated into one sequence which is
written as ``ue(run) se(value)`` pairs and closed by a final ``ue(run)``
reaching the end of the sequence, then zero-padded to a byte boundary.
"""
from __future__ import annotations

import struct

import numpy as np

from ..core import GridMap, MapKind
from ..errors import CorruptStream, IndivisibleDims
from .bits import BitReader, BitWriter
from .dct import BLOCK, dct_block_forward, dct_block_inverse

MAGIC = b"RSJB"
_HEADER = struct.Struct("<4sBHH")

# a binary source only needs to survive a 0.5 threshold, so a small pixel
# amplitude keeps coefficients (and the stream) small
LEVEL = 16.0
SHIFT = LEVEL / 2

LUMA_TABLE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.float64,
)


def quant_table(quality: int) -> np.ndarray:
    """IJG-style scaling of the luminance table; every step is at least 1."""
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in [1, 100], got {quality}")
    scale = 5000.0 / quality if quality < 50 else 200.0 - 2.0 * quality
    return np.maximum(np.floor((LUMA_TABLE * scale + 50.0) / 100.0), 1.0)


def _zigzag_order(n: int = BLOCK) -> np.ndarray:
    cells = sorted(
        ((i, j) for i in range(n) for j in range(n)),
        key=lambda p: (p[0] + p[1], p[1] if (p[0] + p[1]) % 2 == 0 else p[0]),
    )
    return np.array([i * n + j for i, j in cells])


ZIGZAG = _zigzag_order()


def _blocks(vals: np.ndarray) -> np.ndarray:
    h, w = vals.shape
    return vals.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK).swapaxes(1, 2).reshape(-1, BLOCK, BLOCK)


def _unblocks(blocks: np.ndarray, width: int, height: int) -> np.ndarray:
    return (
        blocks.reshape(height // BLOCK, width // BLOCK, BLOCK, BLOCK).swapaxes(1, 2).reshape(height, width)
    )


def quantized_coefficients(m: GridMap, quality: int) -> np.ndarray:
    """``(n_blocks, 64)`` integer coefficients in zig-zag order, before DC prediction."""
    if m.height % BLOCK or m.width % BLOCK:
        raise IndivisibleDims(f"{m.width}x{m.height} is not a multiple of {BLOCK}")
    coefs = dct_block_forward(_blocks(m.values * LEVEL - SHIFT))
    q = np.rint(coefs / quant_table(quality)).astype(np.int64)
    return q.reshape(-1, BLOCK * BLOCK)[:, ZIGZAG]


def jpeg_encode_binary(m: GridMap, quality: int = 50) -> bytes:
    if m.kind is not MapKind.BINARY:
        raise ValueError("the segmentation codec takes binary maps")
    zz = quantized_coefficients(m, quality)
    dc = zz[:, 0].copy()
    zz[1:, 0] = dc[1:] - dc[:-1]
    seq = zz.ravel()
    out = BitWriter()
    run = 0
    for v in seq.tolist():
        if v == 0:
            run += 1
            continue
        out.write_ue(run)
        out.write_se_nonzero(v)
        run = 0
    out.write_ue(run)
    return _HEADER.pack(MAGIC, quality, m.width, m.height) + out.getvalue()


def parse_header(data: bytes) -> tuple[int, int, int]:
    """``(quality, width, height)`` of a stream."""
    if len(data) < _HEADER.size:
        raise CorruptStream("stream shorter than its header")
    magic, quality, width, height = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptStream(f"bad magic {magic!r}")
    if not 1 <= quality <= 100:
        raise CorruptStream(f"invalid quality {quality}")
    if width % BLOCK or height % BLOCK:
        raise CorruptStream(f"dimensions {width}x{height} are not block aligned")
    return quality, width, height


def jpeg_decode_binary(data: bytes, dims=None, quality=None) -> GridMap:
    """Decode and threshold at 0.5.

    ``dims`` and ``quality`` are optional cross-checks against the header.
    """
    q, width, height = parse_header(data)
    if dims is not None and tuple(dims) != (width, height):
        raise CorruptStream(f"stream is {width}x{height}, expected {dims[0]}x{dims[1]}")
    if quality is not None and quality != q:
        raise CorruptStream(f"stream quality {q}, expected {quality}")
    total = (width // BLOCK) * (height // BLOCK) * BLOCK * BLOCK
    seq = np.zeros(total, dtype=np.int64)
    reader = BitReader(data[_HEADER.size :])
    pos = 0
    while True:
        pos += reader.read_ue()
        if pos == total:
            break
        if pos > total:
            raise CorruptStream("zero run overruns the block data")
        seq[pos] = reader.read_se_nonzero()
        pos += 1
    reader.check_padding()

    zz = seq.reshape(-1, BLOCK * BLOCK)
    zz[:, 0] = np.cumsum(zz[:, 0])
    coefs = np.empty_like(zz)
    coefs[:, ZIGZAG] = zz
    blocks = dct_block_inverse(coefs.reshape(-1, BLOCK, BLOCK) * quant_table(q))
    vals = (_unblocks(blocks, width, height) + SHIFT) / LEVEL
    return GridMap((vals >= 0.5).astype(np.float64), MapKind.BINARY)


def hamming_error(a: GridMap, b: GridMap) -> int:
    return int(np.count_nonzero(a.values != b.values))
