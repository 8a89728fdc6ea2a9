"""Command-line front end: train, detect, eval, synth.

Flag values mirror the training configuration one-to-one. Detect and eval
take their configuration from the model file; passing a conflicting flag is
an error rather than an override, so a model file stays self-describing.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from .detector import detect, render_overlay, write_report
from .evaluation import (
    detection_rate,
    inject_defect,
    mask_to_ground_truth,
    synth_texture,
)
from .features import EnergyMode
from .imaging import load_image, save_image
from .model import DefectModel, TrainConfig, load_model, save_model, train

_IMAGE_SUFFIXES = (".png", ".pgm")


def _gather_images(paths: Sequence[str]) -> list[str]:
    """Expand files and directories into a sorted list of image paths."""
    found: list[str] = []
    for path in paths:
        if os.path.isdir(path):
            names = sorted(os.listdir(path))
            found.extend(
                os.path.join(path, n) for n in names if n.lower().endswith(_IMAGE_SUFFIXES)
            )
        else:
            found.append(path)
    if not found:
        raise ValueError("no training images found")
    return found


def _parse_rect(text: str) -> tuple[int, int, int, int]:
    """Parse 'rect=x,y,w,h' (or bare 'x,y,w,h') into a region tuple."""
    body = text[5:] if text.startswith("rect=") else text
    parts = body.split(",")
    if len(parts) != 4:
        raise ValueError(f"expected rect=x,y,w,h, got {text!r}")
    try:
        return tuple(int(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise ValueError(f"expected rect=x,y,w,h, got {text!r}") from None


def _reject_model_conflicts(args, model: DefectModel) -> None:
    """Detect/eval take config from the model; conflicting flags are errors."""
    cfg = model.config
    given = (
        ("--levels", args.levels, cfg.levels),
        ("--window", args.window, cfg.window),
        ("--mode", args.mode, cfg.energy_mode.value),
        ("--margin", args.margin, cfg.threshold_margin),
    )
    for flag, value, trained in given:
        if value is not None and value != trained:
            raise ValueError(f"{flag} {value} contradicts the model file ({flag[2:]}={trained})")


def _cmd_train(args) -> int:
    config = TrainConfig(
        levels=args.levels,
        window=args.window,
        energy_mode=EnergyMode(args.mode),
        threshold_margin=args.margin,
    )
    images = [load_image(p) for p in _gather_images(args.input)]
    model = train(images, config)
    save_model(model, args.out)
    print(f"windows={model.trained_windows} threshold={model.threshold}")
    return 0


def _cmd_detect(args) -> int:
    model = load_model(args.model)
    _reject_model_conflicts(args, model)
    image = load_image(args.image)
    defect_map = detect(image, model)
    write_report(defect_map, args.report)
    if args.overlay:
        render_overlay(image, defect_map, args.overlay)
    print(f"defective windows={defect_map.defective_count} of {defect_map.distances.size}")
    return 0


def _cmd_eval(args) -> int:
    model = load_model(args.model)
    _reject_model_conflicts(args, model)
    image = load_image(args.image)
    mask = load_image(args.mask)
    defect_map = detect(image, model)
    truth = mask_to_ground_truth(mask, model.config.window, args.coverage)
    print(f"DR={detection_rate(defect_map, truth):.2f}")
    return 0


def _derived_path(out: str, tag: str) -> str:
    stem, ext = os.path.splitext(out)
    return f"{stem}_{tag}{ext or '.png'}"


def _cmd_synth(args) -> int:
    image = synth_texture(args.texture, args.period, args.size, args.noise, args.seed)
    save_image(image, args.out)
    if args.defect is None:
        return 0
    region = _parse_rect(args.defect)
    defected, mask = inject_defect(image, region, args.kind, args.seed)
    save_image(defected, args.defect_out or _derived_path(args.out, "defect"))
    save_image(mask, args.mask_out or _derived_path(args.out, "mask"))
    return 0


def _add_model_config_flags(sub, with_defaults: bool) -> None:
    # Defaults only on train; detect/eval leave None so conflicts are visible.
    sub.add_argument("--levels", type=int, default=32 if with_defaults else None)
    sub.add_argument("--window", type=int, default=32 if with_defaults else None)
    sub.add_argument("--mode", choices=["asm", "histogram"], default="asm" if with_defaults else None)
    sub.add_argument("--margin", type=float, default=1.0 if with_defaults else None)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="defectscan",
        description="Train on defect-free textures and flag defective windows in test images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model from defect-free images")
    p_train.add_argument("--input", action="append", required=True, metavar="PATH",
                         help="training image or directory (repeatable)")
    p_train.add_argument("--out", required=True, help="model file to write")
    _add_model_config_flags(p_train, with_defaults=True)
    p_train.set_defaults(func=_cmd_train)

    p_detect = sub.add_parser("detect", help="scan an image with a trained model")
    p_detect.add_argument("--model", required=True)
    p_detect.add_argument("--image", required=True)
    p_detect.add_argument("--report", required=True, help="window report to write (JSON)")
    p_detect.add_argument("--overlay", help="also write the image with defects highlighted")
    _add_model_config_flags(p_detect, with_defaults=False)
    p_detect.set_defaults(func=_cmd_detect)

    p_eval = sub.add_parser("eval", help="score detection against a pixel mask")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--image", required=True)
    p_eval.add_argument("--mask", required=True, help="ground-truth mask (0/255)")
    p_eval.add_argument("--coverage", type=float, default=0.10,
                        help="defective-pixel fraction that labels a window defective")
    _add_model_config_flags(p_eval, with_defaults=False)
    p_eval.set_defaults(func=_cmd_eval)

    p_synth = sub.add_parser("synth", help="generate a synthetic texture, optionally defected")
    p_synth.add_argument("texture", choices=["stripes", "checker", "sinusoid"])
    p_synth.add_argument("--period", type=int, default=8)
    p_synth.add_argument("--size", type=int, default=256)
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="texture image to write")
    p_synth.add_argument("--defect", metavar="rect=X,Y,W,H",
                         help="also write a defected copy and its mask")
    p_synth.add_argument("--kind", choices=["rotate90", "blur", "level-shift"],
                         default="rotate90", help="defect kind for --defect")
    p_synth.add_argument("--defect-out", help="defected image path (default: <out>_defect)")
    p_synth.add_argument("--mask-out", help="mask image path (default: <out>_mask)")
    p_synth.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
