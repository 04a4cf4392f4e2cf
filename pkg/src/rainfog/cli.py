"""Command line entry point: train, infer, synth, and eval subcommands."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np
import torch

from . import metrics, physics, trainer
from .checkpoint import CheckpointError
from .config import DEFAULTS, ConfigError, load_config, synth_specs_from, train_config_from
from .data import UnpairedDataset, from_tensor, list_images, load_image, save_image, to_tensor

OUT_ROOT_ENV = "RAINFOG_OUT"


def _config_help() -> str:
    lines = ["config keys (key = default):"]
    for key, (default, text) in DEFAULTS.items():
        lines.append(f"  {key} = {default!r}  -- {text}")
    return "\n".join(lines)


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ROOT_ENV, "runs"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rainfog", description="Unsupervised rain/fog removal toolkit."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser(
        "train",
        help="run the cycle training loop",
        epilog=_config_help(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p_train.add_argument("--config", type=Path, help="flat key=value config file")
    p_train.add_argument("--seed", type=int, help="override the config seed")
    p_train.add_argument("--out", type=Path, help=f"output dir (default ${OUT_ROOT_ENV} or ./runs)")
    p_train.add_argument(
        "--smoke",
        action="store_true",
        help="overfit one image pair for 200 steps at 64x64 (pipeline sanity mode)",
    )

    p_infer = sub.add_parser("infer", help="derain a directory of images")
    p_infer.add_argument("--checkpoint", type=Path, required=True)
    p_infer.add_argument("--input-dir", type=Path, required=True)
    p_infer.add_argument("--output-dir", type=Path, required=True)
    p_infer.add_argument(
        "--dump-feature",
        action="store_true",
        help="also write the extracted rain-fog feature as a false-color PNG",
    )
    p_infer.add_argument(
        "--dump-physics",
        action="store_true",
        help="also write decoded transmission/streak maps and the airlight vector",
    )

    p_synth = sub.add_parser("synth", help="synthesize a degraded dataset from clean images")
    p_synth.add_argument("--config", type=Path)
    p_synth.add_argument("--seed", type=int)
    p_synth.add_argument("--clean-dir", type=Path, required=True)
    p_synth.add_argument("--out", type=Path)

    p_eval = sub.add_parser("eval", help="PSNR/SSIM report over matching filenames")
    p_eval.add_argument("--pred-dir", type=Path, required=True)
    p_eval.add_argument("--gt-dir", type=Path, required=True)
    p_eval.add_argument("--report", type=Path, required=True)
    return parser


def _load_cfg(args):
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return load_config(getattr(args, "config", None), overrides)


def cmd_train(args) -> int:
    cfg = _load_cfg(args)
    if not cfg["data.root"]:
        print("error: config key 'data.root' is required for training", file=sys.stderr)
        return 2
    dataset = UnpairedDataset.from_root(cfg["data.root"])
    if args.smoke:
        tc = trainer.smoke_config(seed=cfg["seed"])
        tc.weights = train_config_from(cfg).weights
        tc.residual_blocks = cfg["model.residual_blocks"]
        tc.dense_growth = cfg["model.dense_growth"]
        dataset = dataset.head(1)
    else:
        tc = train_config_from(cfg)
    out_dir = args.out if args.out is not None else _default_out() / "train"
    try:
        trainer.fit(tc, dataset, out_dir=out_dir)
    except trainer.DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"training complete: {out_dir}")
    return 0


def _pad_to_multiple(t: torch.Tensor, multiple: int) -> tuple[torch.Tensor, int, int]:
    h, w = t.shape[-2:]
    pad_h = (-h) % multiple
    pad_w = (-w) % multiple
    if pad_h or pad_w:
        t = torch.nn.functional.pad(t, (0, pad_w, 0, pad_h), mode="reflect")
    return t, h, w


def _false_color(feature: torch.Tensor) -> np.ndarray:
    f = feature[0].detach().numpy()
    lo = f.min(axis=(1, 2), keepdims=True)
    hi = f.max(axis=(1, 2), keepdims=True)
    norm = (f - lo) / np.maximum(hi - lo, 1e-8)
    return (norm * 2.0 - 1.0).transpose(1, 2, 0).astype(np.float32)


def cmd_infer(args) -> int:
    try:
        derain = trainer.load_derain(args.checkpoint)
        extras = {}
        if args.dump_feature or args.dump_physics:
            names = ["feature"] + (["degrade"] if args.dump_physics else [])
            extras = trainer.load_models(args.checkpoint, names)
    except CheckpointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    inputs = list_images(args.input_dir)
    if not inputs:
        print(f"error: no images in {args.input_dir}", file=sys.stderr)
        return 2
    out_dir = Path(args.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with torch.no_grad():
        for path in inputs:
            x, h, w = _pad_to_multiple(to_tensor(load_image(path)), 16)
            result = derain(x)[:, :, :h, :w]
            save_image(from_tensor(result), out_dir / f"{path.stem}.png")
            if args.dump_feature or args.dump_physics:
                feat = extras["feature"](x)
            if args.dump_feature:
                save_image(_false_color(feat[:, :, :h, :w]), out_dir / f"{path.stem}_feature.png")
            if args.dump_physics:
                _, est = extras["degrade"](derain(x), feat)
                t_map = est.transmission[0, 0, :h, :w].numpy()
                save_image(
                    np.repeat((t_map * 2.0 - 1.0)[:, :, None], 3, axis=2).astype(np.float32),
                    out_dir / f"{path.stem}_transmission.png",
                )
                save_image(from_tensor(est.streaks[:, :, :h, :w]), out_dir / f"{path.stem}_streaks.png")
                airlight = est.airlight[0].numpy()
                (out_dir / f"{path.stem}_airlight.txt").write_text(
                    f"A.r = {airlight[0]!r}\nA.g = {airlight[1]!r}\nA.b = {airlight[2]!r}\n",
                    encoding="utf-8",
                )
    print(f"derained {len(inputs)} images into {out_dir}")
    return 0


def cmd_synth(args) -> int:
    cfg = _load_cfg(args)
    streaks, fog, mix = synth_specs_from(cfg)
    clean_paths = list_images(args.clean_dir)
    if not clean_paths:
        print(f"error: no clean images in {args.clean_dir}", file=sys.stderr)
        return 2
    out = args.out if args.out is not None else _default_out() / "synth"
    for sub in ("degraded", "clean", "params"):
        (Path(out) / sub).mkdir(parents=True, exist_ok=True)
    root_rng = np.random.default_rng(cfg["seed"])
    for path in clean_paths:
        clean = load_image(path)
        child_seed = int(root_rng.integers(0, 2**63))
        degraded, params, label = physics.make_rainfog_example(
            clean, streaks, fog, np.random.default_rng(child_seed), class_mix=mix
        )
        save_image(degraded, Path(out) / "degraded" / f"{path.stem}.png")
        save_image(clean, Path(out) / "clean" / f"{path.stem}.png")
        physics.write_sidecar(
            Path(out) / "params" / f"{path.stem}.txt",
            params=params,
            streaks=streaks,
            fog=fog,
            seed=child_seed,
            label=label,
        )
    print(f"synthesized {len(clean_paths)} triplets into {out}")
    return 0


def cmd_eval(args) -> int:
    try:
        report = metrics.evaluate_dir(args.pred_dir, args.gt_dir)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    metrics.write_report(report, args.report)
    print(f"mean psnr {report.psnr_db:.3f} dB, mean ssim {report.ssim:.4f} -> {args.report}")
    if report.missing:
        print(f"error: {len(report.missing)} files without counterparts", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "train":
            return cmd_train(args)
        if args.command == "infer":
            return cmd_infer(args)
        if args.command == "synth":
            return cmd_synth(args)
        if args.command == "eval":
            return cmd_eval(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
