"""Shared fixtures: seeded scenes and small datasets."""
import numpy as np
import pytest

from radiosem.core import GridMap, MapKind
from radiosem.harness import SceneConfig, generate_scene, generate_scenes, scene_example


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_scene():
    return generate_scene(SceneConfig(width=32, height=32, n_buildings=3, building_size=(4, 10), seed=7))


@pytest.fixture(scope="session")
def small_dataset():
    cfg = SceneConfig(width=16, height=16, n_buildings=2, building_size=(3, 6), sample_ratio=0.2)
    return [scene_example(s) for s in generate_scenes(cfg, 6, first_seed=100)]


def binary(values) -> GridMap:
    return GridMap(np.asarray(values, dtype=float), MapKind.BINARY)
