"""Scene directories on disk.

Expected layout, one sub-directory per scene, read in lexicographic order::

    <root>/<scene>/buildings.pgm    binary building map (255 = building)
    <root>/<scene>/truth.pgm        normalized radiomap
    <root>/<scene>/bs.json          {"bs": [[x, y], ...],
                                     "dynamic_range": [p_min, p_max],   (optional)
                                     "params": [{"pl0": .., "theta_tilde": ..}, ...]}   (optional)
    <root>/<scene>/observations.csv x,y,psd rows (optional)
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

from ..core import GridMap, MapKind, SparseObservationSet
from ..errors import InconsistentDims, MissingFile
from ..ldpl import LdplParams
from .mapio import load_map, save_map


@dataclass(frozen=True)
class SceneRecord:
    name: str
    buildings: GridMap
    truth: GridMap
    bs_list: tuple
    params: Optional[tuple] = None
    observations: Optional[SparseObservationSet] = None


def _need(path: Path) -> Path:
    if not path.is_file():
        raise MissingFile(f"missing {path}")
    return path


def load_scene_dir(path: Union[str, Path]) -> SceneRecord:
    path = Path(path)
    meta = json.loads(_need(path / "bs.json").read_text())
    buildings = load_map(_need(path / "buildings.pgm"), MapKind.BINARY)
    truth = load_map(_need(path / "truth.pgm"), MapKind.NORMALIZED)
    if truth.dims != buildings.dims:
        raise InconsistentDims(f"{path.name}: truth {truth.dims} vs buildings {buildings.dims}")
    if meta.get("dynamic_range"):
        truth = GridMap(truth.values, MapKind.NORMALIZED, tuple(meta["dynamic_range"]))
    bs_list = tuple((int(x), int(y)) for x, y in meta["bs"])
    w, h = buildings.dims
    for x, y in bs_list:
        if not (0 <= x < w and 0 <= y < h):
            raise InconsistentDims(f"{path.name}: BS ({x}, {y}) outside {w}x{h}")
    params = tuple(LdplParams.from_dict(p) for p in meta["params"]) if meta.get("params") else None
    obs = None
    obs_path = path / "observations.csv"
    if obs_path.is_file():
        with open(obs_path, newline="") as fh:
            rows = [(int(r["x"]), int(r["y"]), float(r["psd"])) for r in csv.DictReader(fh)]
        obs = SparseObservationSet(w, h, tuple(rows))
    return SceneRecord(path.name, buildings, truth, bs_list, params, obs)


def load_dataset_dir(path: Union[str, Path]) -> list:
    root = Path(path)
    if not root.is_dir():
        raise MissingFile(f"no dataset directory at {root}")
    return [load_scene_dir(p) for p in sorted(root.iterdir()) if p.is_dir()]


def save_scene_dir(path: Union[str, Path], scene) -> None:
    """Write a ``Scene`` (or ``SceneRecord``) in the layout above."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    save_map(path / "buildings.pgm", scene.buildings)
    save_map(path / "truth.pgm", scene.truth)
    params = getattr(scene, "true_params", None) or getattr(scene, "params", None)
    meta = {"bs": [list(b) for b in scene.bs_list]}
    if scene.truth.dynamic_range is not None:
        meta["dynamic_range"] = list(scene.truth.dynamic_range)
    if params:
        meta["params"] = [p.to_dict() for p in params]
    (path / "bs.json").write_text(json.dumps(meta, indent=2))
    obs = scene.observations
    if obs is not None:
        with open(path / "observations.csv", "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "y", "psd"])
            for s in obs:
                wr.writerow([s.x, s.y, repr(s.psd)])


def split_records(records: Sequence, proportions: Sequence[int] = (400, 100, 100)) -> tuple:
    """Deterministic train/validation/test split by proportion; rounding leftovers go to train."""
    n = len(records)
    total = sum(proportions)
    sizes = [n * p // total for p in proportions]
    sizes[0] += n - sum(sizes)
    out, start = [], 0
    for s in sizes:
        out.append(list(records[start : start + s]))
        start += s
    return tuple(out)
