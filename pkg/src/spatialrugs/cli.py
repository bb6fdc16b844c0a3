"""Command-line entry point: ``spatialrugs <subcommand> ...``.

Exit codes: 0 success, 1 data or I/O error, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from .colormap2d import colormap_from_string, fit_to_extent
from .errors import ConfigError, SpatialRugsError
from .linearization import linearize_dataset
from .metrics import quality_report
from .movement_data import generate_boids, serialize_csv
from .pipeline import (
    ArtifactWriter,
    compare,
    comparison_csv,
    comparison_payload,
    config_from_mapping,
    dataset_hash,
    default_output_dir,
    dumps,
    feature_dataset,
    load_dataset,
    parse_gauss,
    parse_triple,
    read_config_file,
    run,
)
from .rug_render import BLUE_WHITE_RED, decode_png, encode_png, mask_to_image, render_motion_rug, render_spatial_rug, render_swatch
from .tacs import GaussianParams, difference_mask, gaussian_blur, tacs_smooth

log = logging.getLogger("spatialrugs")


def _add_data_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="CSV with columns frame,id,x,y[,feature...]; omit to generate boids")
    p.add_argument("--fill", choices=["none", "linear"], help="fill movers missing from frames")
    p.add_argument("--flip-y", dest="flip_y", action="store_const", const=True, help="negate y on ingest")
    p.add_argument("--frame-rate", dest="frame_rate", type=float, help="sampling rate in Hz (default 30)")
    p.add_argument("--seed", type=int, help="boids RNG seed (default 42)")
    p.add_argument("--movers", type=int, help="boids mover count (default 151)")
    p.add_argument("--frames", type=int, help="boids frame count (default 2700)")


def _add_render_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", help="hilbert[:order] | zorder[:order] | str[:capacity] | xsort")
    p.add_argument("--colormap", help="four-corner[:TL,TR,BR,BL] | cube-diagonal[:...] | radial[:exp]")
    p.add_argument("--scale", type=int, help="integer upscaling of output PNGs")


def _keys(args: argparse.Namespace, names) -> dict:
    return {n: getattr(args, n, None) for n in names}


DATA_KEYS = ("input", "fill", "flip_y", "frame_rate", "seed", "movers", "frames")
RENDER_KEYS = ("strategy", "colormap", "scale")


def _out_dir(args) -> Path:
    return Path(args.output_dir) if args.output_dir else default_output_dir()


def cmd_generate(args) -> int:
    values = {k: v for k, v in _keys(args, ("seed", "movers", "frames", "frame_rate")).items() if v is not None}
    cfg = config_from_mapping(values)
    d = generate_boids(cfg.boids)
    if args.speed:
        d = feature_dataset(d, "speed")
    data = serialize_csv(d)
    if args.out in (None, "-"):
        sys.stdout.buffer.write(data)
    else:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_bytes(data)
        log.info("wrote %s (%d frames x %d movers)", args.out, d.frame_count, d.mover_count)
    return 0


def cmd_render(args) -> int:
    values = _keys(args, DATA_KEYS + RENDER_KEYS + ("feature",))
    cfg = config_from_mapping(values)
    cfg.spatial = not args.no_spatial
    cfg.validate()
    d = load_dataset(cfg)
    order = linearize_dataset(d, cfg.strategy)
    sidecar = {"config": cfg.describe(), "dataset_hash": dataset_hash(d)}
    with ArtifactWriter(_out_dir(args)) as out:
        if cfg.spatial:
            rug = render_spatial_rug(d, order, fit_to_extent(cfg.colormap, d.extent))
            out.write("spatial_rug.png", encode_png(rug, cfg.scale))
        if cfg.feature:
            fd = feature_dataset(d, cfg.feature)
            motion = render_motion_rug(fd, order, cfg.feature, BLUE_WHITE_RED, invert=cfg.feature == "speed")
            out.write("motion_rug.png", encode_png(motion, cfg.scale))
        out.write("render.json", dumps(sidecar))
    return 0


def cmd_smooth(args) -> int:
    if (args.tacs is None) == (args.gauss is None):
        raise ConfigError("smooth needs exactly one of --tacs or --gauss")
    img = decode_png(Path(args.image).read_bytes())
    if args.tacs is not None:
        m = parse_triple(args.tacs)
        out_img = tacs_smooth(img, m)
        params = {"method": "tacs", **asdict(m), "border": "clip"}
    else:
        sigma, window = parse_gauss(args.gauss)
        gp = GaussianParams(sigma, window if window is not None else 5)
        out_img = gaussian_blur(img, gp)
        params = {"method": "gauss", **asdict(gp), "border": "replicate"}
    target = Path(args.out)
    with ArtifactWriter(target.parent) as out:
        out.write(target.name, encode_png(out_img, args.scale or 1))
        if args.diff_threshold is not None or args.mask:
            diff = difference_mask(img, out_img, args.diff_threshold or 0)
            mask_name = Path(args.mask).name if args.mask else target.stem + "_mask.png"
            out.write(mask_name, encode_png(mask_to_image(diff.mask), args.scale or 1))
            params["changed_fraction"] = diff.changed_fraction
            params["diff_threshold"] = args.diff_threshold or 0
        out.write(target.stem + ".json", dumps({"source": str(args.image), "params": params}))
    return 0


def cmd_metrics(args) -> int:
    a = decode_png(Path(args.reference).read_bytes())
    b = decode_png(Path(args.candidate).read_bytes())
    payload = dumps(quality_report(a, b).to_dict())
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


def cmd_compare(args) -> int:
    if args.tacs is None or args.gauss is None:
        raise ConfigError("compare needs both --tacs and --gauss")
    m = parse_triple(args.tacs)
    sigma, window = parse_gauss(args.gauss)
    if args.image:
        original = decode_png(Path(args.image).read_bytes())
        source = {"image": str(args.image)}
    else:
        cfg = config_from_mapping(_keys(args, DATA_KEYS + RENDER_KEYS))
        cfg.validate()
        d = load_dataset(cfg)
        original = render_spatial_rug(d, linearize_dataset(d, cfg.strategy), fit_to_extent(cfg.colormap, d.extent))
        source = {"config": cfg.describe(), "dataset_hash": dataset_hash(d)}
    rows = compare(original, m, sigma, window)
    with ArtifactWriter(_out_dir(args)) as out:
        out.write("compare.csv", comparison_csv(rows))
        out.write("compare.json", dumps({"source": source, "rows": comparison_payload(rows)}))
    sys.stdout.write(comparison_csv(rows).decode())
    return 0


def cmd_swatch(args) -> int:
    try:
        cm = colormap_from_string(args.colormap or "four-corner")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    data = encode_png(render_swatch(cm, args.size), args.scale or 1)
    target = Path(args.out) if args.out else _out_dir(args) / "swatch.png"
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_bytes(data)
    return 0


def cmd_run(args) -> int:
    values = read_config_file(args.config) if args.config else {}
    flags = _keys(args, DATA_KEYS + RENDER_KEYS + ("feature", "tacs", "gauss", "diff_threshold", "output_dir"))
    if args.no_spatial:
        flags["spatial"] = False
    values.update({k: v for k, v in flags.items() if v is not None})
    cfg = config_from_mapping(values)
    result = run(cfg)
    for name, path in sorted(result.artifacts.items()):
        print(f"{name}\t{path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spatialrugs", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded boids dataset as CSV")
    p.add_argument("--seed", type=int)
    p.add_argument("--movers", type=int)
    p.add_argument("--frames", type=int)
    p.add_argument("--frame-rate", dest="frame_rate", type=float)
    p.add_argument("--speed", action="store_true", help="include the derived speed column")
    p.add_argument("--out", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("render", help="render SpatialRug and/or MotionRug PNGs")
    _add_data_args(p)
    _add_render_args(p)
    p.add_argument("--feature", help="feature for a MotionRug, e.g. speed")
    p.add_argument("--no-spatial", action="store_true", help="skip the SpatialRug")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("smooth", help="apply TACS or Gaussian smoothing to a rug PNG")
    p.add_argument("image")
    p.add_argument("--tacs", metavar="N,F,S")
    p.add_argument("--gauss", metavar="SIGMA,WINDOW")
    p.add_argument("--diff-threshold", dest="diff_threshold", type=int)
    p.add_argument("--mask", help="difference mask PNG path (next to --out)")
    p.add_argument("--scale", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smooth)

    p = sub.add_parser("metrics", help="MSE / RMSE / SSIM between two PNGs")
    p.add_argument("reference")
    p.add_argument("candidate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", help="TACS vs Gaussian table against the original rug")
    p.add_argument("--image", help="rug PNG; omit to render from data")
    _add_data_args(p)
    _add_render_args(p)
    p.add_argument("--tacs", metavar="N,F,S")
    p.add_argument("--gauss", metavar="SIGMA[,WINDOW]")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("swatch", help="render a 2D colormap legend")
    p.add_argument("--colormap")
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--scale", type=int)
    p.add_argument("--out")
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_swatch)

    p = sub.add_parser("run", help="full pipeline from a config file and/or flags")
    p.add_argument("--config", help="flat key = value file; flags override it")
    _add_data_args(p)
    _add_render_args(p)
    p.add_argument("--feature")
    p.add_argument("--no-spatial", action="store_true")
    p.add_argument("--tacs", metavar="N,F,S")
    p.add_argument("--gauss", metavar="SIGMA[,WINDOW]")
    p.add_argument("--diff-threshold", dest="diff_threshold", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SpatialRugsError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
