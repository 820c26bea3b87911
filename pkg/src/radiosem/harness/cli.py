"""``radiosem`` command line: synthesis, fitting, codecs, transmission, training and evaluation.

Every option can also come from a JSON or TOML file given with ``--config``.
Keys use the long option names with dashes or underscores; a table named after
the subcommand overrides top-level keys. Flags given on the command line win.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from ..core import MapKind, downsample, outage_map
from ..depthmap import radio_depth_map
from ..errors import PipelineError, RadiosemError
from ..fedtrain import ClientState, FedConfig, fed_train, write_round_csv
from ..genmodel import TrainConfig, load_params, save_params, train, write_history_csv
from ..genmodel.networks import ModelParams
from ..ldpl import FitConfig, fit_all
from ..payload import ChannelConfig, Scheme, raw_baseline_bits
from ..semcomp import load_codebook, save_codebook
from .dataset import SceneRecord, load_dataset_dir, load_scene_dir, save_scene_dir
from .mapio import load_map, save_map
from .pipeline import compress_buildings, decompress_buildings, default_codebook, receiver_features, run_pipeline
from .scene import Scene, SceneConfig, generate_scenes, sample_observations

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("radiosem")

# option name -> built-in default; None means "required or unused"
DEFAULTS = {
    "seed": 0,
    "width": None,
    "height": None,
    "count": 10,
    "n_buildings": None,
    "building_min": None,
    "building_max": None,
    "n_bs": 1,
    "noise_sigma": 1.0,
    "sample_ratio": 0.05,
    "full_scale": False,
    "radius": None,
    "scheme": "vq",
    "quality": 50,
    "codebook": None,
    "codebook_size": 256,
    "patch": 8,
    "codebook_scenes": 400,
    "ber": 0.0,
    "protect_header": True,
    "model": None,
    "work_resolution": 64,
    "outage_threshold": 0.3,
    "lr": 5e-3,
    "batch": 32,
    "alpha": 0.01,
    "epochs": 1,
    "steps": None,
    "warmup": 20,
    "augment": True,
    "clients": 2,
    "rounds": 5,
    "local_epochs": 2,
    "clients_per_round": None,
}


def _load_config(path: Optional[str], command: str) -> dict:
    if not path:
        return {}
    p = Path(path)
    text = p.read_bytes()
    data = tomllib.loads(text.decode()) if p.suffix.lower() == ".toml" else json.loads(text)
    merged = {k: v for k, v in data.items() if not isinstance(v, dict)}
    merged.update(data.get(command, {}))
    return {k.replace("-", "_"): v for k, v in merged.items()}


def _resolve(args: argparse.Namespace) -> argparse.Namespace:
    """Fill unset flags from the config file, then from ``DEFAULTS``."""
    cfg = _load_config(args.config, args.command)
    for key, value in vars(args).copy().items():
        if value is None:
            if key in cfg:
                setattr(args, key, cfg[key])
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
    return args


def _scene_config(args) -> SceneConfig:
    base = SceneConfig.full_scale() if args.full_scale else SceneConfig()
    over = dict(n_bs=args.n_bs, noise_sigma=args.noise_sigma, sample_ratio=args.sample_ratio, seed=args.seed)
    if args.width is not None:
        over["width"] = args.width
    if args.height is not None:
        over["height"] = args.height
    if args.n_buildings is not None:
        over["n_buildings"] = args.n_buildings
    if args.building_min is not None or args.building_max is not None:
        lo, hi = base.building_size
        over["building_size"] = (args.building_min or lo, args.building_max or hi)
    return replace(base, **over)


def _fit_config(args) -> FitConfig:
    return FitConfig() if args.radius is None else FitConfig(radius=float(args.radius))


def record_to_scene(rec: SceneRecord, sample_ratio: float, seed: int) -> Scene:
    """A loaded scene directory as a pipeline ``Scene``; missing observations are sampled from the truth."""
    obs = rec.observations
    if obs is None:
        obs = sample_observations(rec.truth, rec.buildings, sample_ratio, seed)
    cfg = SceneConfig(width=rec.buildings.width, height=rec.buildings.height, n_bs=len(rec.bs_list), seed=seed)
    return Scene(rec.buildings, rec.bs_list, rec.params or (), rec.truth, obs, cfg)


def record_params(rec: SceneRecord, fit_config: FitConfig) -> list:
    if rec.observations is not None and len(rec.observations):
        return fit_all(rec.observations, rec.bs_list, 0.0, fit_config)
    if rec.params:
        return list(rec.params)
    raise RadiosemError(f"scene {rec.name} has neither observations nor LDPL parameters")


def record_to_scene_record(rec: SceneRecord, args) -> SceneRecord:
    if rec.observations is not None or rec.params:
        return rec
    return replace(rec, observations=sample_observations(rec.truth, rec.buildings, args.sample_ratio, args.seed))


def record_example(rec: SceneRecord, fit_config: FitConfig, work_resolution: Optional[int]):
    """``(FeatureStack, truth)`` at the work resolution."""
    feats = receiver_features(rec.buildings, rec.bs_list, record_params(rec, fit_config), work_resolution)
    truth = rec.truth
    if feats.depth.width != truth.width:
        truth = downsample(truth, truth.width // feats.depth.width)
    return feats, truth


def _codebook_for(args, dims):
    if args.codebook:
        return load_codebook(args.codebook)
    return default_codebook(*dims, patch=args.patch, n=args.codebook_size, scenes=args.codebook_scenes, seed=args.seed)


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        alpha=float(args.alpha), lr=float(args.lr), batch=int(args.batch), epochs=int(args.epochs),
        seed=int(args.seed), work_resolution=int(args.work_resolution),
        max_steps=None if args.steps is None else int(args.steps), warmup=int(args.warmup),
        augment=bool(args.augment),
    )


def _model(args) -> Optional[ModelParams]:
    return load_params(args.model) if args.model else None


# -- subcommands -------------------------------------------------------------


def cmd_synth(args) -> int:
    out = Path(args.out)
    scenes = generate_scenes(_scene_config(args), int(args.count))
    for i, scene in enumerate(scenes):
        save_scene_dir(out / f"scene_{i:04d}", scene)
    print(f"wrote {len(scenes)} scenes to {out}")
    return 0


def cmd_fit(args) -> int:
    rec = load_scene_dir(args.scene)
    scene = record_to_scene(rec, args.sample_ratio, args.seed)
    params = fit_all(scene.observations, scene.bs_list, 0.0, _fit_config(args))
    text = json.dumps([{"bs": list(b), **p.to_dict()} for b, p in zip(scene.bs_list, params)], indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    print(text)
    return 0


def cmd_depthmap(args) -> int:
    rec = load_scene_dir(args.scene)
    params = record_params(record_to_scene_record(rec, args), _fit_config(args))
    depth = radio_depth_map(rec.buildings, rec.bs_list, params)
    save_map(args.out, depth)
    print(f"wrote {depth.width}x{depth.height} depth map to {args.out}")
    return 0


def cmd_encode(args) -> int:
    buildings = load_map(args.buildings, MapKind.BINARY) if args.buildings else load_scene_dir(args.scene).buildings
    scheme = Scheme[args.scheme.upper()]
    cb = _codebook_for(args, buildings.dims) if scheme is Scheme.VQ else None
    blob = compress_buildings(buildings, scheme, cb, int(args.quality))
    Path(args.out).write_bytes(blob)
    print(f"{scheme.name} blob: {8 * len(blob)} bits ({buildings.width}x{buildings.height})")
    return 0


def cmd_decode(args) -> int:
    scheme = Scheme[args.scheme.upper()]
    blob = Path(args.blob).read_bytes()
    dims = (int(args.width), int(args.height))
    cb = _codebook_for(args, dims) if scheme is Scheme.VQ else None
    m = decompress_buildings(blob, scheme, dims, cb, int(args.quality))
    save_map(args.out, m)
    print(f"decoded {m.width}x{m.height} segmentation to {args.out}")
    return 0


def cmd_codebook(args) -> int:
    cb = default_codebook(int(args.width or 64), int(args.height or 64), int(args.patch), int(args.codebook_size),
                          int(args.codebook_scenes), int(args.seed))
    save_codebook(cb, args.out)
    print(f"codebook of {cb.n} codewords ({cb.patch}x{cb.patch}) written to {args.out}")
    return 0


def cmd_transmit(args) -> int:
    rec = load_scene_dir(args.scene)
    scene = record_to_scene(rec, args.sample_ratio, args.seed)
    scheme = Scheme[args.scheme.upper()]
    model = _model(args)
    res = run_pipeline(
        scene, scheme, ChannelConfig(float(args.ber), int(args.seed), bool(args.protect_header)), model,
        codebook=_codebook_for(args, scene.dims) if scheme is Scheme.VQ else None,
        quality=int(args.quality), fit_config=_fit_config(args), outage_threshold=float(args.outage_threshold),
        work_resolution=int(args.work_resolution) if model is not None else None,
    )
    raw = raw_baseline_bits(scene.buildings, scene.observations) / 1000.0
    print(f"bandwidth_kbit {res.bandwidth_kbit:.3f}")
    print(f"raw_baseline_kbit {raw:.3f}")
    print(f"mse {res.report.mse:.6g}")
    print(f"nmse {res.report.nmse:.6g}")
    print(f"outage_agreement {res.report.outage_accuracy:.6f}")
    if args.out:
        save_map(args.out, res.reconstruction)
    return 0


def _examples(args, records):
    return [record_example(r, _fit_config(args), int(args.work_resolution)) for r in records]


def cmd_train(args) -> int:
    records = load_dataset_dir(args.data)
    data = _examples(args, records)
    result = train(data, _train_config(args))
    save_params(result.generator, args.out)
    if args.history:
        write_history_csv(result.history, args.history)
    last = result.steps[-1].loss_mse if result.steps else float("nan")
    print(f"trained {len(result.steps)} steps on {len(data)} scenes; final L_MSE {last:.6g}; saved {args.out}")
    return 0


def cmd_fedtrain(args) -> int:
    records = load_dataset_dir(args.data)
    data = _examples(args, records)
    k = int(args.clients)
    if k < 1 or k > len(data):
        raise RadiosemError(f"cannot shard {len(data)} scenes over {k} clients")
    shards = np.array_split(np.arange(len(data)), k)
    pool = [ClientState(i, [data[j] for j in idx], seed=int(args.seed) + i) for i, idx in enumerate(shards)]
    test = _examples(args, load_dataset_dir(args.test)) if args.test else None
    cfg = FedConfig(
        rounds=int(args.rounds), local_epochs=int(args.local_epochs),
        clients_per_round=None if args.clients_per_round is None else int(args.clients_per_round),
        seed=int(args.seed), train=_train_config(args),
    )
    result = fed_train(pool, cfg, test)
    save_params(result.params.generator, args.out)
    if args.history:
        write_round_csv(result.history, args.history)
    for r in result.history:
        local = " ".join(f"client{c} L_MSE {v[2]:.6g}" for c, v in sorted(r.client_losses.items()))
        glob = f"global mse {r.global_mse:.6g}; " if test is not None else ""
        print(f"round {r.round}: {glob}{local}")
    print(f"saved {args.out}")
    return 0


def cmd_eval(args) -> int:
    records = load_dataset_dir(args.data)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model = _model(args)
    scheme = Scheme[args.scheme.upper()]
    rows = []
    for i, rec in enumerate(records):
        scene = record_to_scene(rec, args.sample_ratio, int(args.seed) + i)
        res = run_pipeline(
            scene, scheme, ChannelConfig(float(args.ber), int(args.seed) + i, bool(args.protect_header)), model,
            codebook=_codebook_for(args, scene.dims) if scheme is Scheme.VQ else None,
            quality=int(args.quality), fit_config=_fit_config(args),
            outage_threshold=float(args.outage_threshold),
            work_resolution=int(args.work_resolution) if model is not None else None,
        )
        truth = scene.truth
        if truth.dims != res.reconstruction.dims:
            truth = downsample(truth, truth.width // res.reconstruction.width)
        save_map(out / f"{rec.name}_recon.pgm", res.reconstruction)
        save_map(out / f"{rec.name}_outage_pred.pgm", outage_map(res.reconstruction, float(args.outage_threshold)))
        save_map(out / f"{rec.name}_outage_true.pgm", outage_map(truth, float(args.outage_threshold)))
        rows.append((rec.name, res.report.mse, res.report.nmse, res.report.outage_accuracy, res.bandwidth_kbit))
    with open(out / "metrics.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scene", "mse", "nmse", "outage_agreement", "bandwidth_kbit"])
        for row in rows:
            w.writerow([row[0], *(repr(float(v)) for v in row[1:])])
    if rows:
        means = np.mean([r[1:] for r in rows], axis=0)
        print(f"scenes {len(rows)} mse {means[0]:.6g} nmse {means[1]:.6g} outage_agreement {means[2]:.6f} "
              f"bandwidth_kbit {means[3]:.3f}")
    return 0


# -- parser ------------------------------------------------------------------


def _bool(text: str) -> bool:
    low = str(text).lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="radiosem", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def command(name, func, help_text):
        sp = sub.add_parser(name, help=help_text)
        sp.set_defaults(func=func)
        sp.add_argument("--config", help="JSON or TOML file of option values")
        sp.add_argument("--seed", type=int)
        return sp

    def scene_opts(sp):
        sp.add_argument("--width", type=int)
        sp.add_argument("--height", type=int)
        sp.add_argument("--n-buildings", type=int)
        sp.add_argument("--building-min", type=int)
        sp.add_argument("--building-max", type=int)
        sp.add_argument("--n-bs", type=int)
        sp.add_argument("--noise-sigma", type=float)
        sp.add_argument("--sample-ratio", type=float)
        sp.add_argument("--full-scale", type=_bool, nargs="?", const=True)

    def codec_opts(sp):
        sp.add_argument("--scheme", choices=["vq", "jpeg"])
        sp.add_argument("--quality", type=int)
        sp.add_argument("--codebook", help="RSCB codebook file (default: the shared synthetic codebook)")
        sp.add_argument("--codebook-size", type=int)
        sp.add_argument("--patch", type=int)
        sp.add_argument("--codebook-scenes", type=int)

    def channel_opts(sp):
        sp.add_argument("--ber", type=float)
        sp.add_argument("--protect-header", type=_bool)
        sp.add_argument("--model", help="RSMP generator file (default: physics baseline)")
        sp.add_argument("--work-resolution", type=int)
        sp.add_argument("--outage-threshold", type=float)
        sp.add_argument("--sample-ratio", type=float)
        sp.add_argument("--radius", type=float)

    def train_opts(sp):
        for name, typ in [("lr", float), ("batch", int), ("alpha", float), ("epochs", int), ("steps", int),
                          ("warmup", int), ("work-resolution", int), ("radius", float)]:
            sp.add_argument(f"--{name}", type=typ)
        sp.add_argument("--augment", type=_bool)
        sp.add_argument("--history", help="CSV file for the loss history")

    sp = command("synth", cmd_synth, "generate synthetic scenes")
    sp.add_argument("--out", required=True)
    sp.add_argument("--count", type=int)
    scene_opts(sp)

    sp = command("fit", cmd_fit, "fit LDPL parameters of a scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out")
    sp.add_argument("--radius", type=float)
    sp.add_argument("--sample-ratio", type=float)

    sp = command("depthmap", cmd_depthmap, "write the radio depth map of a scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--radius", type=float)
    sp.add_argument("--sample-ratio", type=float)

    sp = command("encode", cmd_encode, "compress a building segmentation")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--scene")
    src.add_argument("--buildings")
    sp.add_argument("--out", required=True)
    codec_opts(sp)

    sp = command("decode", cmd_decode, "decompress a building segmentation")
    sp.add_argument("--blob", required=True)
    sp.add_argument("--width", type=int, required=True)
    sp.add_argument("--height", type=int, required=True)
    sp.add_argument("--out", required=True)
    codec_opts(sp)

    sp = command("codebook", cmd_codebook, "train and save the shared VQ codebook")
    sp.add_argument("--out", required=True)
    sp.add_argument("--width", type=int)
    sp.add_argument("--height", type=int)
    sp.add_argument("--patch", type=int)
    sp.add_argument("--codebook-size", type=int)
    sp.add_argument("--codebook-scenes", type=int)

    sp = command("transmit", cmd_transmit, "run the full pipeline on one scene")
    sp.add_argument("--scene", required=True)
    sp.add_argument("--out", help="PGM file for the reconstruction")
    codec_opts(sp)
    channel_opts(sp)

    sp = command("train", cmd_train, "train the generator on a scene directory")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    train_opts(sp)

    sp = command("fedtrain", cmd_fedtrain, "federated training over sharded scenes")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    sp.add_argument("--test", help="scene directory for per-round global evaluation")
    sp.add_argument("--clients", type=int)
    sp.add_argument("--rounds", type=int)
    sp.add_argument("--local-epochs", type=int)
    sp.add_argument("--clients-per-round", type=int)
    train_opts(sp)

    sp = command("eval", cmd_eval, "evaluate a model over a scene directory")
    sp.add_argument("--data", required=True)
    sp.add_argument("--out", required=True)
    codec_opts(sp)
    channel_opts(sp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        args = _resolve(args)
        return args.func(args)
    except PipelineError as exc:
        print(f"radiosem {args.command}: error in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return 2
    except (RadiosemError, ValueError, OSError, KeyError) as exc:
        print(f"radiosem {args.command}: error in stage '{args.command}': {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
