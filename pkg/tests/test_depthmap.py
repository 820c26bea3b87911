import math

import numpy as np
import pytest

from radiosem import _kernels
from radiosem.core import GridMap, MapKind
from radiosem.depthmap import los_path, los_ratio, los_ratio_field, radio_depth_map
from radiosem.errors import DegenerateField
from radiosem.ldpl import LdplParams, predict_freespace_map

from conftest import binary
from oracles import bresenham_line, depth_map_bruteforce


def test_los_path_examples():
    assert los_path((2, 3), (2, 3)) == [(2, 3)]
    assert los_path((0, 0), (3, 0)) == [(0, 0), (1, 0), (2, 0), (3, 0)]
    assert los_path((0, 0), (2, 2)) == [(0, 0), (1, 1), (2, 2)]


def test_los_path_geometry(rng):
    for _ in range(300):
        a = tuple(int(v) for v in rng.integers(0, 20, 2))
        b = tuple(int(v) for v in rng.integers(0, 20, 2))
        path = los_path(a, b)
        assert path[0] == a and path[-1] == b
        assert len(path) == max(abs(a[0] - b[0]), abs(a[1] - b[1])) + 1
        for p, q in zip(path, path[1:]):
            assert max(abs(p[0] - q[0]), abs(p[1] - q[1])) == 1
        # every pixel stays within half a pixel of the ideal segment along the minor axis
        dx, dy = b[0] - a[0], b[1] - a[1]
        for x, y in path:
            if abs(dx) >= abs(dy) and dx:
                assert abs(a[1] + dy * (x - a[0]) / dx - y) <= 0.5 + 1e-12
            elif dy:
                assert abs(a[0] + dx * (y - a[1]) / dy - x) <= 0.5 + 1e-12
        assert los_path(b, a) == path[::-1]
        assert path == bresenham_line(a, b)


def test_los_ratio_examples():
    empty = binary(np.zeros((8, 8)))
    assert los_ratio(empty, (7, 3), (0, 0)) == 1.0
    full = binary(np.ones((8, 8)))
    assert los_ratio(full, (7, 3), (0, 0)) == 0.0
    walls = np.zeros((1, 10))
    walls[0, [2, 5, 7]] = 1
    assert los_ratio(binary(walls), (9, 0), (0, 0)) == pytest.approx(0.7, abs=1e-15)


def test_los_ratio_symmetric_and_monotone(rng):
    m = (rng.uniform(size=(12, 12)) < 0.2).astype(float)
    g = binary(m)
    for _ in range(100):
        p = tuple(int(v) for v in rng.integers(0, 12, 2))
        q = tuple(int(v) for v in rng.integers(0, 12, 2))
        r = los_ratio(g, p, q)
        assert 0.0 <= r <= 1.0
        assert r == los_ratio(g, q, p)
    tx = (3, 4)
    before = los_ratio_field(g, tx)
    m2 = m.copy()
    m2[6, 6] = 1.0
    after = los_ratio_field(binary(m2), tx)
    assert np.all(after <= before)


@pytest.mark.parametrize("name", sorted(_kernels.backends()))
def test_backends_agree_with_reference(name, rng):
    impl = _kernels.backends()[name]
    ref = _kernels.backends()["python"]
    for _ in range(5):
        h, w = (int(v) for v in rng.integers(3, 20, 2))
        mask = (rng.uniform(size=(h, w)) < 0.3).astype(np.uint8)
        tx, ty = int(rng.integers(0, w)), int(rng.integers(0, h))
        np.testing.assert_array_equal(impl.los_ratio_field(mask, tx, ty), ref.los_ratio_field(mask, tx, ty))
        assert impl.bresenham((0, 0), (w - 1, h - 1)) == ref.bresenham((0, 0), (w - 1, h - 1))


def test_field_matches_pointwise(rng):
    g = binary((rng.uniform(size=(9, 11)) < 0.25).astype(float))
    field = los_ratio_field(g, (4, 5))
    for y in range(9):
        for x in range(11):
            assert field[y, x] == los_ratio(g, (x, y), (4, 5))


def test_depth_map_hand_example():
    b = np.zeros((5, 5))
    b[2, 2] = 1
    p = LdplParams(40.0, 20.0)
    md = radio_depth_map(binary(b), [(0, 0)], [p])
    ref = depth_map_bruteforce(b.tolist(), [(0, 0)], [(40.0, 20.0)])
    np.testing.assert_allclose(md.values, ref, rtol=0, atol=1e-12)
    raw44 = (40 + 20 * math.log10(math.sqrt(32))) * 4 / 5
    pl = predict_freespace_map(p, (0, 0), (5, 5)).values
    raw = pl * los_ratio_field(binary(b), (0, 0))
    assert raw[4, 4] == pytest.approx(raw44, abs=1e-12)
    assert md.values[4, 4] == pytest.approx(raw44 / raw.max(), abs=1e-12)
    assert md.values.max() == 1.0 and md.kind is MapKind.DEPTH


def test_depth_map_no_buildings_is_normalized_path_loss():
    p = LdplParams(38.0, 25.0)
    md = radio_depth_map(binary(np.zeros((9, 9))), [(4, 4)], [p])
    pl = predict_freespace_map(p, (4, 4), (9, 9)).values
    np.testing.assert_array_equal(md.values, pl / pl.max())
    np.testing.assert_array_equal(md.values, np.rot90(md.values))
    assert md.values[0, 0] == 1.0


def test_depth_map_bruteforce_random(rng):
    for _ in range(10):
        h, w = (int(v) for v in rng.integers(2, 12, 2))
        b = (rng.uniform(size=(h, w)) < 0.3).astype(float)
        n_bs = int(rng.integers(1, 3))
        bs = [(int(rng.integers(0, w)), int(rng.integers(0, h))) for _ in range(n_bs)]
        params = [(float(rng.uniform(30, 50)), float(rng.uniform(15, 40))) for _ in range(n_bs)]
        md = radio_depth_map(binary(b), bs, [LdplParams(*p) for p in params])
        np.testing.assert_allclose(md.values, depth_map_bruteforce(b.tolist(), bs, params), rtol=0, atol=1e-12)
        assert md.values.max() == 1.0


def test_depth_map_errors():
    with pytest.raises(ValueError):
        radio_depth_map(binary(np.zeros((3, 3))), [(0, 0)], [])
    with pytest.raises(DegenerateField):
        radio_depth_map(binary(np.ones((3, 3))), [(1, 1)], [LdplParams(40.0, 20.0)])
