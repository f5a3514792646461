"""Command-line pipeline: simulate, adapt, split, evaluate, mask, spectrum.

Every subcommand resolves its options against an optional JSON config
file (``--config``, sections keyed by subcommand; explicit flags win),
writes the fully resolved configuration into the output directory, and
funnels all randomness through ``--seed``. Identical invocations produce
byte-identical outputs; no file carries a timestamp.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .dataset import (
    DatasetManifest,
    PairingPlan,
    SplitSpec,
    hash_file,
    resolve_pairing,
    split,
    write_manifest,
)
from .errors import ConfigurationError, EchoAdaptError, ManifestError
from .fda import FdaParams, adapt, build_mask
from .imgio import (
    list_image_files,
    read_image,
    write_binary_mask,
    write_float_raw,
    write_image,
)
from .metrics import DEFAULT_EPSILON, evaluate_batch
from .simulator import PhantomSpec, PsfParams, choose_masks, sample_seed, simulate_sample
from .spectral import forward_dft, shift_dc

_PSF_KEYS = (
    "center_frequency_hz",
    "fractional_bandwidth",
    "speed_of_sound_mps",
    "f_number",
    "sampling_frequency_hz",
)
_PHANTOM_KEYS = ("width_mm", "depth_mm", "n_scatterers")


def _load_config_section(config_path: str | None, section: str) -> dict:
    if not config_path:
        return {}
    path = Path(config_path)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigurationError(f"config file {path} must hold a JSON object")
    part = cfg.get(section, {})
    if not isinstance(part, dict):
        raise ConfigurationError(f"config section {section!r} must be a JSON object")
    return part


def _resolve(args: argparse.Namespace, command: str, defaults: dict, required: tuple[str, ...]) -> dict:
    """Merge CLI flags over config-file values over built-in defaults."""
    file_cfg = _load_config_section(getattr(args, "config", None), command)
    known = set(defaults) | set(required)
    unknown = sorted(set(file_cfg) - known)
    if unknown:
        raise ConfigurationError(f"unknown keys in config section {command!r}: {unknown}")
    resolved = {}
    for key in sorted(known):
        cli_value = getattr(args, key, None)
        if cli_value is not None:
            resolved[key] = cli_value
        elif key in file_cfg:
            resolved[key] = file_cfg[key]
        else:
            resolved[key] = defaults.get(key)
    missing = sorted(k for k in required if resolved.get(k) is None)
    if missing:
        raise ConfigurationError(f"missing required option(s) for {command}: {missing}")
    return resolved


def _emit_config(out_dir: Path, command: str, resolved: dict) -> None:
    payload = {"command": command, "version": __version__, **resolved}
    (out_dir / "config.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _ensure_out_dir(path_str: str) -> Path:
    out = Path(path_str)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _map_jobs(fn, items, jobs: int):
    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# ---------------------------------------------------------------- simulate

_SIM_DEFAULTS = {
    "count": 1,
    "seed": 0,
    "size": 256,
    "jobs": 1,
    "psf_config": None,
    "width_mm": 50.0,
    "depth_mm": 50.0,
    "n_scatterers": 100_000,
}


def _load_psf_config(path_str: str | None) -> dict:
    if not path_str:
        return {}
    path = Path(path_str)
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read psf config {path}: {exc}") from exc
    unknown = sorted(set(cfg) - set(_PSF_KEYS) - set(_PHANTOM_KEYS))
    if unknown:
        raise ConfigurationError(f"unknown keys in psf config {path}: {unknown}")
    return cfg


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve(args, "simulate", _SIM_DEFAULTS, required=("masks", "out"))
    psf_cfg = _load_psf_config(cfg["psf_config"])
    for key in _PHANTOM_KEYS:
        if key in psf_cfg:
            cfg[key] = psf_cfg.pop(key)
    psf = PsfParams(**psf_cfg)

    mask_dir = Path(cfg["masks"])
    count, seed, size = int(cfg["count"]), int(cfg["seed"]), int(cfg["size"])
    chosen = choose_masks(mask_dir, count, seed)
    out = _ensure_out_dir(cfg["out"])
    _emit_config(out, "simulate", cfg)

    from .imgio import read_binary_mask

    def build(i: int) -> dict:
        mask_name = chosen[i]
        mask = read_binary_mask(mask_dir / mask_name, strict=True)
        phantom = PhantomSpec(
            anechoic_mask=mask,
            width_mm=float(cfg["width_mm"]),
            depth_mm=float(cfg["depth_mm"]),
            n_scatterers=int(cfg["n_scatterers"]),
            seed=sample_seed(seed, i),
        )
        sample = simulate_sample(phantom, psf, size)
        sid = f"sample_{i:04d}"
        write_image(out / f"{sid}_bmode.png", sample.bmode)
        write_binary_mask(out / f"{sid}_gt.png", sample.ground_truth)
        write_float_raw(out / f"{sid}_envelope.f32", sample.envelope)
        provenance = {
            "sample_id": sid,
            "mask_file": mask_name,
            "mask_sha256": hash_file(mask_dir / mask_name),
            "width_mm": phantom.width_mm,
            "depth_mm": phantom.depth_mm,
            "n_scatterers": phantom.n_scatterers,
            "seed": phantom.seed,
            "out_size": size,
            "psf": {k: getattr(psf, k) for k in _PSF_KEYS},
        }
        (out / f"{sid}_provenance.json").write_text(
            json.dumps(provenance, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        return {"sample_id": sid, "mask_file": mask_name}

    records = _map_jobs(build, range(count), int(cfg["jobs"]))

    files = {
        p.name: hash_file(p)
        for p in sorted(out.iterdir())
        if p.is_file() and p.name not in ("manifest.json",)
    }
    manifest = DatasetManifest(
        version=__version__,
        files=files,
        simulator={
            "seed": seed,
            "count": count,
            "size": size,
            "masks": str(cfg["masks"]),
            "phantom": {k: cfg[k] for k in _PHANTOM_KEYS},
            "psf": {k: getattr(psf, k) for k in _PSF_KEYS},
            "assignments": {r["sample_id"]: r["mask_file"] for r in records},
        },
    )
    write_manifest(manifest, out / "manifest.json")
    print(f"simulated {count} sample(s) into {out}")
    return 0


# ------------------------------------------------------------------- adapt

_ADAPT_DEFAULTS = {
    "alpha": 0.014,
    "seed": 0,
    "pairing": "random",
    "iteration": 0,
    "manifest": None,
    "range": "clip",
    "jobs": 1,
}


def _fixed_assignments_from_file(path_str: str) -> dict[str, str]:
    path = Path(path_str)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ManifestError(f"cannot read pairing manifest {path}: {exc}") from exc
    if isinstance(data, dict) and isinstance(data.get("assignments"), dict):
        return dict(data["assignments"])
    if isinstance(data, dict) and "pairings" in data:
        plans = data["pairings"]
        name = "adapt" if "adapt" in plans else (sorted(plans)[0] if plans else None)
        if name is not None and isinstance(plans[name].get("assignments"), dict):
            return dict(plans[name]["assignments"])
    raise ManifestError(f"pairing manifest {path} holds no assignments object")


def cmd_adapt(args: argparse.Namespace) -> int:
    cfg = _resolve(args, "adapt", _ADAPT_DEFAULTS, required=("source", "target", "out"))
    source_dir, target_dir = Path(cfg["source"]), Path(cfg["target"])
    sources = list_image_files(source_dir)
    targets = list_image_files(target_dir)
    if not sources:
        raise ConfigurationError(f"no source images found in {source_dir}")
    if not targets:
        raise ConfigurationError(f"no target images found in {target_dir}")

    mode = {"random": "random_per_iteration", "fixed": "fixed"}.get(cfg["pairing"])
    if mode is None:
        raise ConfigurationError(f"pairing must be 'random' or 'fixed', got {cfg['pairing']!r}")
    assignments = None
    if mode == "fixed":
        if not cfg["manifest"]:
            raise ConfigurationError("fixed pairing requires --manifest")
        assignments = _fixed_assignments_from_file(cfg["manifest"])
    plan = PairingPlan(mode=mode, target_pool=targets, seed=int(cfg["seed"]), assignments=assignments)
    resolution = resolve_pairing(plan, sources, int(cfg["iteration"]))

    params = FdaParams(alpha=float(cfg["alpha"]), output_range_policy=cfg["range"])
    out = _ensure_out_dir(cfg["out"])
    _emit_config(out, "adapt", cfg)

    target_cache = {name: read_image(target_dir / name) for name in sorted(set(resolution.values()))}

    def one(name: str) -> None:
        adapted = adapt(read_image(source_dir / name), target_cache[resolution[name]], params)
        write_image(out / name, adapted)

    _map_jobs(one, sources, int(cfg["jobs"]))

    files = {name: hash_file(out / name) for name in sources}
    manifest = DatasetManifest(
        version=__version__,
        files=files,
        pairings={
            "adapt": PairingPlan(
                mode=mode, target_pool=targets, seed=int(cfg["seed"]),
                assignments=resolution if mode == "fixed" else None,
            )
        },
        fda={
            "alpha": float(cfg["alpha"]),
            "output_range_policy": cfg["range"],
            "iteration": int(cfg["iteration"]),
            "resolution": resolution,
        },
    )
    write_manifest(manifest, out / "manifest.json")
    print(f"adapted {len(sources)} image(s) into {out}")
    return 0


# ------------------------------------------------------------------- split

_SPLIT_DEFAULTS = {"dir": None, "ids": None, "train": 0, "val": 0, "test": 0, "seed": 0}


def cmd_split(args: argparse.Namespace) -> int:
    cfg = _resolve(args, "split", _SPLIT_DEFAULTS, required=("out",))
    if bool(cfg["dir"]) == bool(cfg["ids"]):
        raise ConfigurationError("exactly one of --dir or --ids is required")
    if cfg["dir"]:
        corpus = list_image_files(Path(cfg["dir"]))
    else:
        corpus = [
            line.strip()
            for line in Path(cfg["ids"]).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    spec = SplitSpec(
        train=int(cfg["train"]), val=int(cfg["val"]), test=int(cfg["test"]), seed=int(cfg["seed"])
    )
    result = split(corpus, spec)

    out = _ensure_out_dir(cfg["out"])
    _emit_config(out, "split", cfg)
    (out / "splits.json").write_text(
        json.dumps(result.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    manifest = DatasetManifest(version=__version__, split_spec=spec, splits=result)
    write_manifest(manifest, out / "manifest.json")
    print(
        f"split {len(corpus)} ids into {len(result.train)}/{len(result.val)}/{len(result.test)} "
        f"(+{len(result.unassigned)} unassigned) in {out}"
    )
    return 0


# ---------------------------------------------------------------- evaluate

_EVAL_DEFAULTS = {"epsilon": DEFAULT_EPSILON}


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _resolve(args, "evaluate", _EVAL_DEFAULTS, required=("pred", "gt", "out"))
    report = evaluate_batch(cfg["pred"], cfg["gt"], float(cfg["epsilon"]))
    out = _ensure_out_dir(cfg["out"])
    _emit_config(out, "evaluate", cfg)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "report.txt").write_text(report.to_table(), encoding="utf-8")
    print(f"evaluated {len(report.scores)} pair(s): mean dice {report.mean:.6f}")
    return 0


# -------------------------------------------------------------------- mask

_MASK_DEFAULTS = {"width": 256, "height": 256, "alpha": 0.014}


def cmd_mask(args: argparse.Namespace) -> int:
    cfg = _resolve(args, "mask", _MASK_DEFAULTS, required=("out",))
    mask = build_mask(int(cfg["width"]), int(cfg["height"]), float(cfg["alpha"]))
    out = _ensure_out_dir(cfg["out"])
    _emit_config(out, "mask", cfg)
    write_binary_mask(out / "mask.png", mask.data)
    print(f"wrote {mask.count}-pixel mask to {out / 'mask.png'}")
    return 0


# ---------------------------------------------------------------- spectrum

_SPECTRUM_DEFAULTS: dict = {}


def cmd_spectrum(args: argparse.Namespace) -> int:
    cfg = _resolve(args, "spectrum", _SPECTRUM_DEFAULTS, required=("image", "out"))
    img = read_image(cfg["image"])
    shifted = shift_dc(forward_dft(img))
    log_mag = np.log1p(np.abs(shifted.data))
    hi = float(log_mag.max())
    view = log_mag / hi if hi > 0 else log_mag
    out = _ensure_out_dir(cfg["out"])
    _emit_config(out, "spectrum", cfg)
    write_image(out / "spectrum.png", type(img)(view))
    print(f"wrote spectrum view to {out / 'spectrum.png'}")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="echoadapt",
        description="Speckle simulation, low-frequency spectral adaptation, "
        "dataset splitting, and Dice evaluation for grayscale images.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--json", action="store_true", help="machine-readable error output")

    p = sub.add_parser("simulate", help="render speckle samples from binary mask images")
    p.add_argument("--masks", help="directory of binary mask images")
    p.add_argument("--out", help="output directory")
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--size", type=int, help="output image side length (default 256)")
    p.add_argument("--psf-config", dest="psf_config", help="JSON with imaging/phantom parameters")
    p.add_argument("--jobs", type=int)
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("adapt", help="swap low-frequency magnitudes toward target images")
    p.add_argument("--source", help="directory of source images")
    p.add_argument("--target", help="directory of target images")
    p.add_argument("--out", help="output directory")
    p.add_argument("--alpha", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--pairing", choices=("random", "fixed"))
    p.add_argument("--iteration", type=int)
    p.add_argument("--manifest", help="JSON with fixed pairing assignments")
    p.add_argument("--range", choices=("clip", "rescale"))
    p.add_argument("--jobs", type=int)
    common(p)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("split", help="deterministically partition a corpus")
    p.add_argument("--dir", help="directory whose image files form the corpus")
    p.add_argument("--ids", help="text file with one id per line")
    p.add_argument("--out", help="output directory")
    p.add_argument("--train", type=int)
    p.add_argument("--val", type=int)
    p.add_argument("--test", type=int)
    p.add_argument("--seed", type=int)
    common(p)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("evaluate", help="Dice-score same-named mask pairs")
    p.add_argument("--pred", help="directory of predicted masks")
    p.add_argument("--gt", help="directory of ground-truth masks")
    p.add_argument("--out", help="output directory")
    p.add_argument("--epsilon", type=float)
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("mask", help="write the low-frequency selection mask as an image")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.add_argument("--alpha", type=float)
    p.add_argument("--out", help="output directory")
    common(p)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("spectrum", help="write a centered log-magnitude spectrum view")
    p.add_argument("--image", help="input grayscale image")
    p.add_argument("--out", help="output directory")
    common(p)
    p.set_defaults(func=cmd_spectrum)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EchoAdaptError as exc:
        if getattr(args, "json", False):
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
