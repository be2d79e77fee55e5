"""Command-line front end.

One subcommand per capability: shadowfree, invariant, gray, alpha,
simulate, eval, params, entropy-select. Image inputs may be single files
or directories (batch mode maps the subcommand over every image inside,
preserving filenames). Exit codes: 0 success, 1 usage error, 2 I/O or
file-format error, 3 domain error. Environment variables are never
consulted for processing parameters; everything comes from flags or the
optional config file (flags win).
"""

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import imgio, invariant, params as params_mod, pipeline, simeval
from .errors import DomainError, ImageFormatError, SpdParseError

IMAGE_SUFFIXES = (".ppm", ".pgm", ".pnm", ".png")

_SPD_FLAGS = ("day", "sky", "qr", "qg", "qb")


def _add_params_flags(sub):
    group = sub.add_argument_group("model parameters")
    group.add_argument("--preset", help="built-in parameter preset (e.g. mean, 40deg)")
    group.add_argument("--day", help="daylight spectrum file (wavelength,power)")
    group.add_argument("--sky", help="skylight spectrum file")
    group.add_argument("--qr", help="red matching-function spectrum file")
    group.add_argument("--qg", help="green matching-function spectrum file")
    group.add_argument("--qb", help="blue matching-function spectrum file")
    group.add_argument(
        "--entropy",
        nargs="?",
        const="",
        metavar="LABELS",
        help="pick the preset with minimal invariant-image entropy; optional "
        "comma-separated candidate labels (default: all presets)",
    )


def _add_pipeline_flags(sub):
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--epsilon", type=float, help="neutral-set radius")
    sub.add_argument("--kappa", type=float, help="correction falloff strength")
    sub.add_argument("--workers", type=int, help="row-band worker threads")
    sub.add_argument(
        "--jobs", type=int, default=1, help="parallel files in batch mode"
    )


def _config_values(args):
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            return pipeline.parse_config_text(fh.read())
    return {}


def _params_source(args, config):
    spd_paths = {name: getattr(args, name, None) for name in _SPD_FLAGS}
    given = {k: v for k, v in spd_paths.items() if v}
    if getattr(args, "preset", None):
        return ("preset", args.preset)
    if given:
        missing = [k for k in _SPD_FLAGS if not spd_paths[k]]
        if missing:
            raise ValueError(
                "spectrum estimation needs all of --day --sky --qr --qg --qb "
                f"(missing: {', '.join('--' + m for m in missing)})"
            )
        return ("spd", given)
    if getattr(args, "entropy", None) is not None:
        labels = tuple(filter(None, (s.strip() for s in args.entropy.split(","))))
        return ("entropy", labels)
    if "params_source" in config:
        return pipeline.parse_params_source(config["params_source"])
    return ("preset", "mean")


def _build_config(args, emit):
    config = _config_values(args)
    kwargs = {"params_source": _params_source(args, config), "emit": emit}
    for key in ("epsilon", "kappa", "workers"):
        flag = getattr(args, key, None)
        if flag is not None:
            kwargs[key] = flag
        elif key in config:
            kwargs[key] = float(config[key]) if key != "workers" else int(config[key])
    return pipeline.PipelineConfig(**kwargs)


def _print_warnings(result):
    for message in result.warnings:
        print(f"warning: {message}", file=sys.stderr)


def _batch(args, process):
    """Run `process(in_path, out_path)` over a file or a directory."""
    src = Path(args.input)
    if not src.is_dir():
        process(src, Path(args.output))
        return 0
    dst = Path(args.output)
    if dst.exists() and not dst.is_dir():
        raise ValueError("batch mode needs a directory output")
    dst.mkdir(parents=True, exist_ok=True)
    files = sorted(
        p for p in src.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not files:
        raise ValueError(f"no images found in {src}")
    jobs = max(1, args.jobs)
    if jobs == 1:
        for path in files:
            process(path, dst / path.name)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for _ in pool.map(lambda p: process(p, dst / p.name), files):
                pass
    return 0


def _derived_path(output, name):
    out = Path(output)
    return out.with_name(f"{out.stem}.{name}{out.suffix}")


def _cmd_shadowfree(args):
    extra = {}
    for item in args.emit or []:
        if "=" not in item:
            raise ValueError(f"bad --emit {item!r}; expected name=path")
        name, path = item.split("=", 1)
        extra[name.strip()] = path.strip()
    config_values = _config_values(args)
    config_emit = tuple(
        filter(None, (s.strip() for s in config_values.get("emit", "").split(",")))
    )
    emit = ("shadow_free",) + tuple(extra) + tuple(
        n for n in config_emit if n != "shadow_free" and n not in extra
    )
    cfg = _build_config(args, emit)
    if Path(args.input).is_dir() and extra:
        raise ValueError("--emit name=path is not supported in batch mode")

    def process(in_path, out_path):
        outputs, result = pipeline.shadow_free(imgio.read_rgb(in_path), cfg)
        imgio.write_image(out_path, outputs["shadow_free"])
        for name, raster in outputs.items():
            if name == "shadow_free":
                continue
            path = extra.get(name) or _derived_path(out_path, name)
            imgio.write_image(path, raster)
        _print_warnings(result)

    return _batch(args, process)


def _cmd_invariant(args):
    cfg = _build_config(args, ("invariant",))

    def process(in_path, out_path):
        outputs, result = pipeline.shadow_free(imgio.read_rgb(in_path), cfg)
        imgio.write_image(out_path, outputs["invariant"])
        if args.float_out:
            imgio.write_float_raster(args.float_out, result.up)
        _print_warnings(result)

    if Path(args.input).is_dir() and args.float_out:
        raise ValueError("--float-out is not supported in batch mode")
    return _batch(args, process)


def _cmd_gray(args):
    config = _config_values(args)
    source = _params_source(args, config)

    def process(in_path, out_path):
        image = imgio.read_rgb(in_path)
        model = pipeline.resolve_params(image, source)
        raster = invariant.gray_invariant_image(
            image, model, args.index, normalize=True
        )
        imgio.write_image(out_path, raster)
        if args.raw_out:
            imgio.write_float_raster(
                args.raw_out,
                invariant.gray_invariant_image(image, model, args.index),
            )

    if Path(args.input).is_dir() and args.raw_out:
        raise ValueError("--raw-out is not supported in batch mode")
    return _batch(args, process)


def _cmd_alpha(args):
    cfg = _build_config(args, ("alpha",))

    def process(in_path, out_path):
        outputs, result = pipeline.shadow_free(imgio.read_rgb(in_path), cfg)
        imgio.write_image(out_path, outputs["alpha"])
        if args.float_out:
            imgio.write_float_raster(args.float_out, result.alpha)
        _print_warnings(result)

    if Path(args.input).is_dir() and args.float_out:
        raise ValueError("--float-out is not supported in batch mode")
    return _batch(args, process)


def _parse_k(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"bad --k {text!r}; expected three values R,G,B")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise ValueError(f"bad --k {text!r}; values must be numeric") from None


def _cmd_simulate(args):
    k = _parse_k(args.k)

    def process(in_path, out_path):
        image = imgio.read_rgb(in_path)
        mask = imgio.read_mask(args.mask)
        spec = simeval.ShadowSpec(mask=mask, k=k, penumbra_width=args.penumbra)
        imgio.write_image(out_path, simeval.synthesize_shadow(image, spec))

    return _batch(args, process)


def _cmd_eval(args):
    base = imgio.read_rgb(args.base)
    mask = imgio.read_mask(args.mask)
    config = _config_values(args)
    model = pipeline.resolve_params(base, _params_source(args, config))
    specs = [
        simeval.ShadowSpec(
            mask=mask, k=_parse_k(text), penumbra_width=args.penumbra,
            label=f"v{i + 1}",
        )
        for i, text in enumerate(args.k)
    ]
    report = simeval.invariance_report(
        base, specs, model, epsilon=args.epsilon, kappa=args.kappa
    )
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv())
    if args.text:
        print(report.to_text(), end="")
    return 0


def _params_payload(model):
    payload = {
        "label": model.label,
        "beta": list(model.beta),
        "u0": [float(v) for v in model.u0],
        "identity_residual": params_mod.identity_residual(model.beta),
    }
    if model.k is not None:
        payload["k"] = list(model.k)
    return payload


def _print_params(model, as_json):
    if as_json:
        print(json.dumps(_params_payload(model), indent=2))
        return
    print(f"label: {model.label}")
    if model.k is not None:
        print("k:     " + "  ".join(f"{v:.4f}" for v in model.k))
    print("beta:  " + "  ".join(f"{v:.6f}" for v in model.beta))
    print("u0:    " + "  ".join(f"{v:.6f}" for v in model.u0))


def _cmd_params(args):
    if args.export_table:
        with open(args.export_table, "w", encoding="utf-8") as fh:
            fh.write(params_mod.format_preset_table())
        return 0
    if args.list:
        print(params_mod.format_preset_table(), end="")
        return 0
    if any(getattr(args, name) for name in _SPD_FLAGS):
        model = pipeline.resolve_params(None, _params_source(args, {}))
    elif args.preset:
        model = params_mod.preset(args.preset)
    else:
        raise ValueError("params needs --list, --preset, --export-table or spectra")
    _print_params(model, args.json)
    return 0


def _cmd_entropy_select(args):
    image = imgio.read_rgb(args.input)
    if args.candidates:
        labels = tuple(
            filter(None, (s.strip() for s in args.candidates.split(",")))
        )
    else:
        labels = params_mod.PRESET_LABELS
    candidates = [params_mod.preset(label) for label in labels]
    scores = [pipeline.invariant_entropy(image, c) for c in candidates]
    best = int(np.argmin(scores))
    if args.json:
        print(
            json.dumps(
                {
                    "selected": candidates[best].label,
                    "scores": {
                        c.label: s for c, s in zip(candidates, scores)
                    },
                },
                indent=2,
            )
        )
    else:
        for cand, score in zip(candidates, scores):
            marker = " *" if cand.label == candidates[best].label else ""
            print(f"{cand.label:8s} {score:.6f}{marker}")
        print(f"selected: {candidates[best].label}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="orthoshadow",
        description="Illumination-invariant and shadow-free images from "
        "single outdoor photos by pixel-wise orthogonal decomposition.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("shadowfree", help="produce a shadow-free image")
    sub.add_argument("input", help="input image or directory")
    sub.add_argument("-o", "--output", required=True, help="output image or directory")
    sub.add_argument(
        "--emit",
        action="append",
        metavar="NAME=PATH",
        help="also write an intermediate (invariant, alpha, gray1..3, mask)",
    )
    _add_params_flags(sub)
    _add_pipeline_flags(sub)
    sub.set_defaults(func=_cmd_shadowfree)

    sub = subs.add_parser("invariant", help="produce the color invariant image")
    sub.add_argument("input")
    sub.add_argument("-o", "--output", required=True)
    sub.add_argument("--float-out", help="also write the raw float raster (UPF1)")
    _add_params_flags(sub)
    _add_pipeline_flags(sub)
    sub.set_defaults(func=_cmd_invariant)

    sub = subs.add_parser("gray", help="produce one grayscale invariant image")
    sub.add_argument("input")
    sub.add_argument("-o", "--output", required=True)
    sub.add_argument("--index", type=int, choices=(1, 2, 3), default=1)
    sub.add_argument("--raw-out", help="also write the raw float raster (UPF1)")
    _add_params_flags(sub)
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--jobs", type=int, default=1)
    sub.set_defaults(func=_cmd_gray)

    sub = subs.add_parser("alpha", help="produce the illumination coordinate image")
    sub.add_argument("input")
    sub.add_argument("-o", "--output", required=True)
    sub.add_argument("--float-out", help="also write the raw float raster (UPF1)")
    _add_params_flags(sub)
    _add_pipeline_flags(sub)
    sub.set_defaults(func=_cmd_alpha)

    sub = subs.add_parser("simulate", help="synthesize a model shadow")
    sub.add_argument("input")
    sub.add_argument("-o", "--output", required=True)
    sub.add_argument("--mask", required=True, help="mask raster (nonzero = shadow)")
    sub.add_argument("--k", required=True, help="per-channel K as R,G,B")
    sub.add_argument("--penumbra", type=float, default=0.0)
    sub.add_argument("--jobs", type=int, default=1)
    sub.set_defaults(func=_cmd_simulate)

    sub = subs.add_parser("eval", help="invariance report on synthetic shadows")
    sub.add_argument("--base", required=True, help="reference image")
    sub.add_argument("--mask", required=True)
    sub.add_argument(
        "--k", action="append", required=True, help="per-channel K; repeatable"
    )
    sub.add_argument("--penumbra", type=float, default=0.0)
    sub.add_argument("-o", "--output", required=True, help="CSV report path")
    sub.add_argument("--text", action="store_true", help="print aligned table")
    sub.add_argument("--epsilon", type=float)
    sub.add_argument("--kappa", type=float)
    _add_params_flags(sub)
    sub.add_argument("--config", help="key = value config file")
    sub.set_defaults(func=_cmd_eval)

    sub = subs.add_parser("params", help="show, export or estimate parameters")
    sub.add_argument("--list", action="store_true", help="print the preset table")
    sub.add_argument("--export-table", help="write the preset table to a file")
    sub.add_argument("--json", action="store_true")
    sub.add_argument("--preset", help="built-in parameter preset (e.g. mean, 40deg)")
    for flag, text in (
        ("--day", "daylight spectrum file (wavelength,power)"),
        ("--sky", "skylight spectrum file"),
        ("--qr", "red matching-function spectrum file"),
        ("--qg", "green matching-function spectrum file"),
        ("--qb", "blue matching-function spectrum file"),
    ):
        sub.add_argument(flag, help=text)
    sub.set_defaults(func=_cmd_params)

    sub = subs.add_parser(
        "entropy-select", help="pick the best preset by invariant entropy"
    )
    sub.add_argument("input")
    sub.add_argument("--candidates", help="comma-separated preset labels")
    sub.add_argument("--json", action="store_true")
    sub.set_defaults(func=_cmd_entropy_select)

    return parser


def run(argv=None):
    """Parse argv and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (SpdParseError, ImageFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
