"""Synthetic scenes, dataset I/O, the end-to-end pipeline and the CLI."""
from .dataset import SceneRecord, load_dataset_dir, load_scene_dir, save_scene_dir, split_records
from .mapio import load_map, save_map
from .pipeline import PipelineResult, default_codebook, receiver_features, run_pipeline
from .scene import (
    Scene,
    SceneConfig,
    build_features,
    generate_scene,
    generate_scenes,
    ground_truth_radiomap,
    received_power_dbm,
    sample_observations,
    scene_example,
)

__all__ = [
    "PipelineResult",
    "Scene",
    "SceneConfig",
    "SceneRecord",
    "build_features",
    "default_codebook",
    "generate_scene",
    "generate_scenes",
    "ground_truth_radiomap",
    "load_dataset_dir",
    "load_map",
    "load_scene_dir",
    "receiver_features",
    "received_power_dbm",
    "run_pipeline",
    "sample_observations",
    "save_map",
    "save_scene_dir",
    "scene_example",
    "split_records",
]
