import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radiosem.core import GridMap, MapKind, SparseObservationSet
from radiosem.errors import BadMagic, LengthMismatch, TooManyBs, Truncated, UnsupportedVersion
from radiosem.ldpl import LdplParams
from radiosem.payload import (
    ChannelConfig,
    Scheme,
    SemanticPayload,
    apply_channel,
    deserialize,
    f32,
    measure_bandwidth,
    protected_length,
    raw_baseline_bits,
    serialize,
)

finite_f32 = st.floats(allow_nan=False, allow_infinity=False, width=32)


@st.composite
def payloads(draw):
    w = draw(st.integers(1, 65535))
    h = draw(st.integers(1, 65535))
    n = draw(st.integers(1, 6))
    bs = [(draw(st.integers(0, w - 1)), draw(st.integers(0, h - 1))) for _ in range(n)]
    prm = [LdplParams(draw(finite_f32), draw(finite_f32)) for _ in range(n)]
    blob = draw(st.binary(min_size=1, max_size=64))
    return SemanticPayload(draw(st.sampled_from(list(Scheme))), w, h, tuple(bs), tuple(prm), blob)


def minimal():
    return SemanticPayload(Scheme.VQ, 4, 4, ((1, 2),), (LdplParams(40.0, 20.0),), b"\x07")


@settings(max_examples=300, deadline=None)
@given(payloads())
def test_roundtrip_property(p):
    data = serialize(p)
    assert deserialize(data) == p
    assert serialize(deserialize(data)) == data


def test_minimal_payload_size_and_layout():
    data = serialize(minimal())
    assert len(data) == 4 + 1 + 1 + 2 + 2 + 1 + (2 + 2 + 4 + 4) + 4 + 1 == 28
    assert data[:4] == b"RSEM" and data[4] == 1 and data[5] == 0
    assert serialize(minimal()) == data


def test_deserialize_errors():
    data = serialize(minimal())
    with pytest.raises(BadMagic):
        deserialize(b"XSEM" + data[4:])
    with pytest.raises(UnsupportedVersion):
        deserialize(data[:4] + b"\x02" + data[5:])
    with pytest.raises(Truncated):
        deserialize(data[:-1])
    with pytest.raises(Truncated):
        deserialize(data[:15])
    with pytest.raises(LengthMismatch):
        deserialize(data + b"\x00")
    for cut in range(len(data)):
        with pytest.raises((Truncated, BadMagic)):
            deserialize(data[:cut])


def test_too_many_bs():
    n = 256
    p = SemanticPayload(Scheme.VQ, 300, 1, tuple((i, 0) for i in range(n)), (LdplParams(1, 1),) * n, b"x")
    with pytest.raises(TooManyBs):
        serialize(p)


def test_f32_quantization():
    p = SemanticPayload(Scheme.JPEG, 8, 8, ((0, 0),), (LdplParams(0.1, 1 / 3),), b"ab")
    back = deserialize(serialize(p)).ldpl_list[0]
    assert back.pl0 == f32(0.1) and back.theta_tilde == f32(1 / 3)


def test_channel_examples():
    data = bytes(range(256)) * 4
    assert apply_channel(data, ChannelConfig(0.0, 3)) == data
    cfg = ChannelConfig(0.05, 9, protect_header=False)
    assert apply_channel(data, cfg) == apply_channel(data, cfg)
    assert len(apply_channel(data, cfg)) == len(data)
    with pytest.raises(ValueError):
        ChannelConfig(1.0)


def test_channel_flip_statistics():
    n_bits = 10**6
    data = bytes(n_bits // 8)
    out = apply_channel(data, ChannelConfig(0.01, 2024, protect_header=False))
    flips = int(np.unpackbits(np.frombuffer(out, np.uint8)).sum())
    sigma = math.sqrt(n_bits * 0.01 * 0.99)
    assert abs(flips - 10**4) <= 3 * sigma


def test_protected_header_parses_identically(rng):
    p = SemanticPayload(Scheme.VQ, 64, 64, ((3, 4), (60, 1)), (LdplParams(40, 20), LdplParams(35, 30)), bytes(200))
    data = serialize(p)
    assert protected_length(data) == 11 + 2 * 12 + 4
    for seed in range(20):
        noisy = apply_channel(data, ChannelConfig(0.3, seed, protect_header=True))
        q = deserialize(noisy)
        assert (q.scheme, q.dims, q.bs_list, q.ldpl_list) == (p.scheme, p.dims, p.bs_list, p.ldpl_list)
        assert len(q.seg_blob) == len(p.seg_blob)


def test_bandwidth():
    assert measure_bandwidth(bytes(1024)) == pytest.approx(8.192)
    assert measure_bandwidth(b"") == 0
    a, b = bytes(17), bytes(40)
    assert measure_bandwidth(a + b) == pytest.approx(measure_bandwidth(a) + measure_bandwidth(b))


def test_raw_baseline():
    g = GridMap(np.zeros((256, 256)), MapKind.BINARY)
    assert raw_baseline_bits(g, SparseObservationSet(256, 256)) == 65536
    assert raw_baseline_bits(GridMap(np.zeros((0, 0)), MapKind.BINARY), [None] * 10) == 640
