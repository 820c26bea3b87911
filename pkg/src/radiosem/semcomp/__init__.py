"""Semantic compression of binary building segmentations."""
from .dct import dct_block_forward, dct_block_inverse, dct_matrix
from .jpeg import hamming_error, jpeg_decode_binary, jpeg_encode_binary, quant_table
from .vq import (
    Codebook,
    Latents,
    VqEncoding,
    codebook_from_bytes,
    codebook_to_bytes,
    encode_map,
    kmeans,
    load_codebook,
    pack_indices,
    patchify,
    payload_bits,
    save_codebook,
    train_codebook,
    unpack_indices,
    unpatchify,
    vq_decode,
    vq_encode,
)

__all__ = [
    "Codebook",
    "Latents",
    "VqEncoding",
    "codebook_from_bytes",
    "codebook_to_bytes",
    "dct_block_forward",
    "dct_block_inverse",
    "dct_matrix",
    "encode_map",
    "hamming_error",
    "jpeg_decode_binary",
    "jpeg_encode_binary",
    "kmeans",
    "load_codebook",
    "pack_indices",
    "patchify",
    "payload_bits",
    "quant_table",
    "save_codebook",
    "train_codebook",
    "unpack_indices",
    "unpatchify",
    "vq_decode",
    "vq_encode",
]
