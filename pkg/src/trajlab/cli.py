"""Command-line entry points: make-data, train, eval, probe, serve, report.

Options layer as defaults < config file < explicit flags.  The config file
is flat ``key = value`` text with '#' comments.  Every run echoes its
resolved manifest into the output directory.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical abort.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .data import build_windows, load_trajectory_file, TrajectoryParseError
from .metrics import evaluate
from .model import ModelConfig, ConfigError
from .probe import predictor, probe_polylines, run_probe, write_plot_data
from .social import PartitionConfig, factors_from_codes
from .synth import avoidance_cases, cases_to_tracks, linear_cases, write_trajectory_text
from .training import TrainConfig, TrainingDivergedError, train, write_loss_curve

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(ValueError):
    pass


_CONFIG_TYPES = {
    "t_h": int,
    "t_f": int,
    "stride": int,
    "d": int,
    "d_sc": int,
    "n_layers": int,
    "n_heads": int,
    "d_ff": int,
    "noise_dim": int,
    "n_partitions": int,
    "neighbor_cap": int,
    "delta_t": float,
    "use_social": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "factors": str,
    "learning_rate": float,
    "epochs": int,
    "batch_size": int,
    "k": int,
    "seed": int,
    "unit": str,
    "frame_step": int,
}


def read_config_file(path) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" in line:
                key, _, value = line.partition("=")
            else:
                parts = line.split(None, 1)
                if len(parts) != 2:
                    raise UsageError(f"{path}:{lineno}: expected 'key = value'")
                key, value = parts
            key, value = key.strip(), value.strip()
            if key not in _CONFIG_TYPES:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _CONFIG_TYPES[key](value)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    return values


def _layer_options(args, keys) -> dict:
    """defaults < config file < explicit flags, for the given keys."""
    merged = {}
    if getattr(args, "config", None):
        file_values = read_config_file(args.config)
        merged.update({k: v for k, v in file_values.items() if k in keys})
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            merged[key] = flag
    return merged


_MODEL_KEYS = (
    "t_h", "t_f", "d", "d_sc", "n_layers", "n_heads", "d_ff", "noise_dim",
    "n_partitions", "factors", "neighbor_cap", "delta_t", "use_social",
)


def build_model_config(options: dict) -> ModelConfig:
    t_h = options.get("t_h", 8)
    partition = PartitionConfig(
        n_partitions=options.get("n_partitions", 8),
        factors=factors_from_codes(options["factors"]) if "factors" in options else PartitionConfig().factors,
        neighbor_cap=options.get("neighbor_cap", 50),
        t_h=t_h,
        delta_t=options.get("delta_t", 0.4),
    )
    return ModelConfig(
        d=options.get("d", 64),
        d_sc=options.get("d_sc", 64),
        n_layers=options.get("n_layers", 2),
        n_heads=options.get("n_heads", 4),
        d_ff=options.get("d_ff", 256),
        t_h=t_h,
        t_f=options.get("t_f", 12),
        use_social=options.get("use_social", True),
        noise_dim=options.get("noise_dim", 0),
        partition=partition,
    )


def _load_cases(args, options):
    if not args.data:
        raise UsageError("at least one --data file is required")
    cases = []
    for path in args.data:
        tracks = load_trajectory_file(path, unit_tag=options.get("unit", "meters"))
        cases.extend(
            build_windows(
                tracks,
                t_h=options.get("t_h", 8),
                t_f=options.get("t_f", 12),
                stride=options.get("stride", 1),
                scene_id=Path(path).stem,
                frame_step=options.get("frame_step"),
            )
        )
    if not cases:
        raise UsageError("no prediction cases could be assembled from the data files")
    return cases


def _prepare_out(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, args, options: dict):
    manifest = {
        "subcommand": args.command,
        "seed": getattr(args, "seed", None),
        "config_file": getattr(args, "config", None),
        "data": list(getattr(args, "data", []) or []),
        "output_dir": str(out),
        "options": {k: options[k] for k in sorted(options)},
    }
    with open(out / "run_manifest.json", "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)


def _parse_manual(spec: str):
    try:
        start_s, end_s = spec.split(":")
        start = [float(v) for v in start_s.split(",")]
        end = [float(v) for v in end_s.split(",")]
    except ValueError:
        raise UsageError(f"bad --manual spec {spec!r}, expected 'x0,y0:x1,y1'") from None
    if len(start) != 2 or len(end) != 2:
        raise UsageError(f"bad --manual spec {spec!r}, expected 2-d points")
    return start, end


def cmd_make_data(args) -> int:
    options = _layer_options(args, ("t_h", "t_f", "seed"))
    t_h, t_f = options.get("t_h", 8), options.get("t_f", 12)
    seed = options.get("seed", args.seed)
    if args.kind == "linear":
        cases = linear_cases(args.n, t_h=t_h, t_f=t_f, seed=seed)
    else:
        cases = avoidance_cases(args.n, t_h=t_h, t_f=t_f, seed=seed)
    text = write_trajectory_text(cases_to_tracks(cases))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"wrote {args.n} {args.kind} cases to {out}")
    return EXIT_OK


def cmd_train(args) -> int:
    options = _layer_options(args, _MODEL_KEYS + ("stride", "unit", "frame_step", "learning_rate", "epochs", "batch_size", "seed"))
    options.setdefault("seed", args.seed)
    model_config = build_model_config(options)
    train_config = TrainConfig(
        learning_rate=options.get("learning_rate", 1e-4),
        epochs=options.get("epochs", 200),
        batch_size=options.get("batch_size", 64),
        seed=options["seed"],
    )
    cases = _load_cases(args, options)
    out = _prepare_out(args)
    _write_manifest(out, args, options)

    hooks = None
    if args.checkpoint_every > 0:
        def hooks(epoch, loss, params):
            if (epoch + 1) % args.checkpoint_every == 0:
                save_checkpoint(out / f"checkpoint_epoch{epoch + 1}.json", params, model_config)

    params, curve = train(cases, model_config, train_config, on_epoch=hooks)
    save_checkpoint(out / "checkpoint.json", params, model_config)
    write_loss_curve(out / "loss_curve.txt", curve)
    print(f"trained {len(cases)} cases for {train_config.epochs} epochs; final loss {curve[-1]:.6g}")
    print(f"checkpoint: {out / 'checkpoint.json'}")
    return EXIT_OK


def cmd_eval(args) -> int:
    options = _layer_options(args, ("t_h", "t_f", "stride", "unit", "frame_step", "k", "seed"))
    options.setdefault("seed", args.seed)
    params, model_config, _ = load_checkpoint(args.checkpoint)
    options["t_h"], options["t_f"] = model_config.t_h, model_config.t_f
    cases = _load_cases(args, options)
    out = _prepare_out(args)
    _write_manifest(out, args, options)
    report = evaluate(predictor(params, model_config), cases, K=options.get("k", 1), seed=options["seed"])
    (out / "eval_report.txt").write_text(report.format_text(), encoding="utf-8")
    (out / "per_case.tsv").write_text(report.format_per_case_table(), encoding="utf-8")
    print(report.format_text(), end="")
    return EXIT_OK


def cmd_probe(args) -> int:
    options = _layer_options(args, ("t_h", "t_f", "stride", "unit", "frame_step", "k", "seed", "n_partitions", "factors"))
    options.setdefault("seed", args.seed)
    params, model_config, _ = load_checkpoint(args.checkpoint)
    load_opts = dict(options)
    load_opts["t_h"], load_opts["t_f"] = model_config.t_h, model_config.t_f
    cases = _load_cases(args, load_opts)
    by_id = {c.case_id: c for c in cases}
    if args.case is None:
        case = cases[0]
    elif args.case in by_id:
        case = by_id[args.case]
    else:
        raise UsageError(f"unknown case {args.case!r}; available: {', '.join(sorted(by_id)[:10])} ...")
    out = _prepare_out(args)
    _write_manifest(out, args, options)
    result = run_probe(
        case,
        params,
        model_config,
        manual_neighbors=[_parse_manual(s) for s in args.manual or []],
        K=options.get("k", 1),
        seed=options["seed"],
        n_partitions=options.get("n_partitions"),
        factor_codes=options.get("factors"),
    )
    with open(out / "probe_result.json", "w", encoding="utf-8") as f:
        json.dump(result, f, indent=2)
    plot_path = Path(args.plot_data) if args.plot_data else out / "plot_data.txt"
    write_plot_data(plot_path, probe_polylines(result))
    print(f"probed case {case.case_id} with {len(args.manual or [])} manual neighbor(s)")
    print(f"result: {out / 'probe_result.json'}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ModelRegistry, cases_by_id, create_app

    options = _layer_options(args, ("t_h", "t_f", "stride", "unit", "frame_step"))
    registry = ModelRegistry()
    if args.checkpoint:
        registry.load(args.checkpoint)
        _, config, _, _ = registry.snapshot()
        options.setdefault("t_h", config.t_h)
        options.setdefault("t_f", config.t_f)
    cases = _load_cases(args, options)
    app = create_app(cases_by_id(cases), registry)
    print(f"serving {len(cases)} cases on {args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_report(args) -> int:
    from .plotting import render_run

    run_dir = Path(args.run)
    if not run_dir.is_dir():
        raise FileNotFoundError(f"no such run directory: {run_dir}")
    written = render_run(run_dir)
    if not written:
        print(f"nothing to render in {run_dir}")
    for path in written:
        print(f"rendered {path}")
    return EXIT_OK


def _add_common(p, with_out=True):
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=0)
    if with_out:
        p.add_argument("--out", required=True, help="output directory")


def _add_model_flags(p):
    p.add_argument("--t-h", dest="t_h", type=int)
    p.add_argument("--t-f", dest="t_f", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--d-sc", dest="d_sc", type=int)
    p.add_argument("--n-layers", dest="n_layers", type=int)
    p.add_argument("--n-heads", dest="n_heads", type=int)
    p.add_argument("--d-ff", dest="d_ff", type=int)
    p.add_argument("--noise-dim", dest="noise_dim", type=int)
    p.add_argument("--n-partitions", dest="n_partitions", type=int)
    p.add_argument("--factors", help="factor subset string over 'vdrm'")
    p.add_argument("--neighbor-cap", dest="neighbor_cap", type=int)
    p.add_argument("--delta-t", dest="delta_t", type=float)
    p.add_argument("--no-social", dest="use_social", action="store_false", default=None,
                   help="disable the social-context branch (plain backbone)")


def _add_data_flags(p):
    p.add_argument("--data", action="append", help="trajectory text file (repeatable)")
    p.add_argument("--stride", type=int)
    p.add_argument("--unit", choices=("meters", "pixels"))
    p.add_argument("--frame-step", dest="frame_step", type=int)


def build_parser() -> _Parser:
    parser = _Parser(prog="trajlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-data", parents=[], help="generate a synthetic trajectory file")
    p.add_argument("--kind", choices=("linear", "avoidance"), default="linear")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out", required=True, help="output trajectory file")
    p.add_argument("--t-h", dest="t_h", type=int)
    p.add_argument("--t-f", dest="t_f", type=int)
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_make_data)

    p = sub.add_parser("train", help="train a forecaster and write a checkpoint")
    _add_common(p)
    _add_data_flags(p)
    _add_model_flags(p)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", dest="learning_rate", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--checkpoint-every", dest="checkpoint_every", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint (best-of-K ADE/FDE)")
    _add_common(p)
    _add_data_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--k", type=int)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("probe", help="what-if probe one case with manual neighbors")
    _add_common(p)
    _add_data_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--case", help="case id (defaults to the first case)")
    p.add_argument("--manual", action="append", help="manual neighbor 'x0,y0:x1,y1' (repeatable)")
    p.add_argument("--k", type=int)
    p.add_argument("--n-partitions", dest="n_partitions", type=int)
    p.add_argument("--factors", help="factor mask string over the checkpoint's factors")
    p.add_argument("--plot-data", dest="plot_data", help="plot-data output path (default <out>/plot_data.txt)")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("serve", help="start the probe HTTP service")
    p.add_argument("--config", help="flat key=value config file")
    p.add_argument("--seed", type=int, default=0)
    _add_data_flags(p)
    p.add_argument("--checkpoint", help="checkpoint to load at startup")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("report", help="render figures for a run directory")
    p.add_argument("--run", required=True, help="output directory of a previous run")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"trajlab: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TrajectoryParseError, CheckpointError, FileNotFoundError) as exc:
        print(f"trajlab: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingDivergedError as exc:
        print(f"trajlab: numerical abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
