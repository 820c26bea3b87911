"""Vector quantization of segmentation patches against a shared codebook."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np

from ..core import GridMap, MapKind
from ..errors import (
    BadMagic,
    DimensionMismatch,
    IndexOutOfRange,
    IndivisibleDims,
    TooFewDistinctLatents,
    Truncated,
    UnsupportedVersion,
)

CODEBOOK_MAGIC = b"RSCB"
CODEBOOK_VERSION = 1
_CB_HEADER = struct.Struct("<4sBHH")


@dataclass(frozen=True)
class Latents:
    """``A*B`` row-major latent vectors of length ``L = patch**2``."""

    vectors: np.ndarray
    grid: tuple[int, int]
    patch: int

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def patchify(m: GridMap, patch: int = 8) -> Latents:
    h, w = m.values.shape
    if h % patch or w % patch:
        raise IndivisibleDims(f"{w}x{h} is not a multiple of patch size {patch}")
    a, b = h // patch, w // patch
    vecs = m.values.reshape(a, patch, b, patch).swapaxes(1, 2).reshape(a * b, patch * patch)
    return Latents(np.ascontiguousarray(vecs), (a, b), patch)


def unpatchify(vectors: np.ndarray, grid: tuple[int, int], patch: int) -> np.ndarray:
    a, b = grid
    return np.asarray(vectors).reshape(a, b, patch, patch).swapaxes(1, 2).reshape(a * patch, b * patch)


@dataclass(frozen=True, eq=False)
class Codebook:
    codewords: np.ndarray

    def __post_init__(self):
        cw = np.array(self.codewords, dtype=np.float64, copy=True)
        if cw.ndim != 2 or cw.shape[0] < 1:
            raise ValueError("codebook needs an (n, L) matrix with n >= 1")
        if not np.all(np.isfinite(cw)):
            raise ValueError("codebook holds non-finite values")
        if len(np.unique(cw, axis=0)) != len(cw):
            raise ValueError("codebook holds duplicate codewords")
        cw.setflags(write=False)
        object.__setattr__(self, "codewords", cw)

    @property
    def n(self) -> int:
        return self.codewords.shape[0]

    @property
    def dim(self) -> int:
        return self.codewords.shape[1]

    @property
    def patch(self) -> int:
        p = math.isqrt(self.dim)
        if p * p != self.dim:
            raise ValueError(f"codeword length {self.dim} is not a square patch")
        return p

    def __eq__(self, other):
        if not isinstance(other, Codebook):
            return NotImplemented
        return np.array_equal(self.codewords, other.codewords)

    __hash__ = None


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    sse_history: list = field(default_factory=list)


def _sq_dists(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    d = (points * points).sum(1)[:, None] - 2.0 * points @ centers.T + (centers * centers).sum(1)[None, :]
    return np.maximum(d, 0.0)


def kmeans(points: np.ndarray, n: int, iters: int = 25, seed: int = 0, weights=None) -> KMeansResult:
    """Weighted Lloyd's algorithm with k-means++ seeding.

    ``sse_history[k]`` is the weighted within-cluster SSE after the assignment
    step of iteration ``k``.
    """
    points = np.asarray(points, dtype=np.float64)
    w = np.ones(len(points)) if weights is None else np.asarray(weights, dtype=np.float64)
    rng = np.random.default_rng(seed)

    first = rng.choice(len(points), p=w / w.sum())
    centers = [points[first]]
    closest = _sq_dists(points, points[first : first + 1])[:, 0]
    for _ in range(1, n):
        prob = w * closest
        if prob.sum() <= 0:
            break
        idx = rng.choice(len(points), p=prob / prob.sum())
        centers.append(points[idx])
        closest = np.minimum(closest, _sq_dists(points, points[idx : idx + 1])[:, 0])
    centers = np.array(centers)

    history = []
    labels = np.zeros(len(points), dtype=np.int64)
    for _ in range(iters):
        d = _sq_dists(points, centers)
        labels = np.argmin(d, axis=1)
        history.append(float((w * d[np.arange(len(points)), labels]).sum()))
        mass = np.bincount(labels, weights=w, minlength=len(centers))
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, w[:, None] * points)
        filled = mass > 0
        new = centers.copy()
        new[filled] = sums[filled] / mass[filled, None]
        if np.array_equal(new, centers):
            break
        centers = new
    return KMeansResult(centers, labels, history)


def train_codebook(latents, n: int = 256, iters: int = 25, seed: int = 0) -> Codebook:
    """k-means codebook over (deduplicated, count-weighted) latent vectors."""
    vecs = latents.vectors if isinstance(latents, Latents) else np.asarray(latents, dtype=np.float64)
    uniq, counts = np.unique(vecs, axis=0, return_counts=True)
    if len(uniq) < n:
        raise TooFewDistinctLatents(f"{len(uniq)} distinct latents for a codebook of {n}")
    res = kmeans(uniq, n, iters, seed, weights=counts)
    _, keep = np.unique(res.centers, axis=0, return_index=True)
    return Codebook(res.centers[np.sort(keep)])


@dataclass(frozen=True)
class VqEncoding:
    indices: np.ndarray
    grid: tuple[int, int]
    patch: int
    n: int

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        a, b = self.grid
        if idx.shape != (a * b,):
            raise DimensionMismatch(f"{idx.shape[0]} indices for a {a}x{b} latent grid")
        object.__setattr__(self, "indices", idx)

    @property
    def dims(self) -> tuple[int, int]:
        """Map ``(width, height)`` the encoding covers."""
        a, b = self.grid
        return b * self.patch, a * self.patch


def nearest_codewords(vectors: np.ndarray, codewords: np.ndarray, chunk: int = 1024) -> np.ndarray:
    """Exact ``argmin_j ||z - w_j||^2``; ties go to the smallest index."""
    out = np.empty(len(vectors), dtype=np.int64)
    for start in range(0, len(vectors), chunk):
        z = vectors[start : start + chunk]
        diff = z[:, None, :] - codewords[None, :, :]
        out[start : start + chunk] = np.argmin(np.einsum("ijk,ijk->ij", diff, diff), axis=1)
    return out


def vq_encode(latents: Latents, cb: Codebook) -> VqEncoding:
    if latents.dim != cb.dim:
        raise DimensionMismatch(f"latent length {latents.dim} vs codeword length {cb.dim}")
    idx = nearest_codewords(latents.vectors, cb.codewords)
    return VqEncoding(idx, latents.grid, latents.patch, cb.n)


def vq_decode(enc: VqEncoding, cb: Codebook) -> GridMap:
    idx = enc.indices
    if idx.size and (idx.min() < 0 or idx.max() >= cb.n):
        raise IndexOutOfRange(f"index outside [0, {cb.n})")
    vals = unpatchify(cb.codewords[idx], enc.grid, enc.patch)
    return GridMap((vals >= 0.5).astype(np.float64), MapKind.BINARY)


def encode_map(m: GridMap, cb: Codebook) -> VqEncoding:
    return vq_encode(patchify(m, cb.patch), cb)


def bits_per_index(n: int) -> int:
    """``ceil(log2 n)``, but never below one bit."""
    return max(1, (n - 1).bit_length())


def pack_indices(enc: VqEncoding) -> bytes:
    k = bits_per_index(enc.n)
    bits = ((enc.indices[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    return np.packbits(bits.ravel()).tobytes()


def unpack_indices(blob: bytes, dims: tuple[int, int], cb: Codebook) -> VqEncoding:
    """Inverse of ``pack_indices`` for a map of ``dims = (width, height)``."""
    width, height = dims
    p = cb.patch
    if width % p or height % p:
        raise IndivisibleDims(f"{width}x{height} is not a multiple of patch size {p}")
    a, b = height // p, width // p
    k = bits_per_index(cb.n)
    need = a * b * k
    if 8 * len(blob) < need:
        raise Truncated(f"index blob holds {8 * len(blob)} bits, need {need}")
    bits = np.unpackbits(np.frombuffer(blob, dtype=np.uint8))[:need].reshape(a * b, k)
    idx = bits.astype(np.int64) @ (1 << np.arange(k - 1, -1, -1))
    # corrupted indices past the codebook end are clamped onto the last codeword
    return VqEncoding(np.minimum(idx, cb.n - 1), (a, b), p, cb.n)


def save_codebook(cb: Codebook, path: Union[str, Path]) -> None:
    Path(path).write_bytes(codebook_to_bytes(cb))


def codebook_to_bytes(cb: Codebook) -> bytes:
    return _CB_HEADER.pack(CODEBOOK_MAGIC, CODEBOOK_VERSION, cb.n, cb.dim) + cb.codewords.astype("<f4").tobytes()


def codebook_from_bytes(data: bytes) -> Codebook:
    if len(data) < _CB_HEADER.size:
        raise Truncated("codebook file shorter than its header")
    magic, version, n, dim = _CB_HEADER.unpack_from(data)
    if magic != CODEBOOK_MAGIC:
        raise BadMagic(f"expected {CODEBOOK_MAGIC!r}, got {magic!r}")
    if version != CODEBOOK_VERSION:
        raise UnsupportedVersion(f"codebook version {version}")
    body = data[_CB_HEADER.size :]
    if len(body) != 4 * n * dim:
        raise Truncated(f"codebook body holds {len(body)} bytes, expected {4 * n * dim}")
    return Codebook(np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(n, dim))


def load_codebook(path: Union[str, Path]) -> Codebook:
    return codebook_from_bytes(Path(path).read_bytes())


def payload_bits(enc: Union[VqEncoding, bytes, bytearray]) -> int:
    """Transmitted size: ``A*B*ceil(log2 n)`` for VQ indices, ``8*len`` for byte streams."""
    if isinstance(enc, VqEncoding):
        a, b = enc.grid
        return a * b * bits_per_index(enc.n)
    return 8 * len(enc)
