"""Command-line interface.

Subcommands:
    cae run     cluster embedding files and write a JSON report
    cae synth   generate a seeded synthetic benchmark
    cae ablate  run a sweep grid from config + sweep files
    cae eval    score a prediction LBL1 against a truth LBL1

Exit codes: 0 success, 2 usage/config error, 3 data-format error,
4 numerical-stability error.
"""

from __future__ import annotations

import argparse
import sys


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cae", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="cluster embedding files")
    run.add_argument("--images", required=True, help="image EMB1 file")
    run.add_argument("--nouns", help="noun bank EMB1 file")
    run.add_argument("--captions", help="caption bank EMB1 file")
    run.add_argument("--labels", help="ground-truth LBL1 file (enables metrics)")
    run.add_argument("--clusters", type=int, help="number of clusters (defaults to label count)")
    run.add_argument("--topk", type=int, default=10)
    run.add_argument("--centers-divisor", type=int, default=300)
    run.add_argument("--epsilon", type=float, default=0.05)
    run.add_argument("--gamma", type=float, default=0.01)
    run.add_argument("--seed", type=int, default=42)
    run.add_argument(
        "--mode",
        default="cae",
        choices=["cae", "image_only", "noun_only", "caption_only", "concat", "sum", "softmax_cae"],
    )
    run.add_argument("--threads", type=int, default=1, help="1 = deterministic reference mode")
    run.add_argument("--out", required=True, help="output directory")

    synth = sub.add_parser("synth", help="generate a synthetic benchmark")
    synth.add_argument("--classes", type=int, required=True)
    synth.add_argument("--per-class", type=int, required=True)
    synth.add_argument("--dim", type=int, required=True)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--separation", type=float, default=1.0)
    synth.add_argument("--noise-sigma", type=float, default=None, help="defaults to SynthSpec default")
    synth.add_argument("--alignment", type=float, default=0.9)
    synth.add_argument("--noun-bank-size", type=int, default=256)
    synth.add_argument("--caption-bank-size", type=int, default=512)
    synth.add_argument("--out", required=True, help="output directory")

    ablate = sub.add_parser("ablate", help="run a sweep from config + sweep files")
    ablate.add_argument("--config", required=True, help="flat key=value base configuration")
    ablate.add_argument("--sweep", required=True, help="flat key=v1,v2,... sweep grid")
    ablate.add_argument("--out", required=True, help="output directory")

    ev = sub.add_parser("eval", help="score predictions against ground truth")
    ev.add_argument("--pred", required=True, help="predicted LBL1 file")
    ev.add_argument("--truth", required=True, help="ground-truth LBL1 file")
    return parser


def _cmd_run(args) -> int:
    from pathlib import Path

    from .pipeline import PipelineConfig, run_pipeline, write_report

    cfg = PipelineConfig(
        images=args.images,
        nouns=args.nouns,
        captions=args.captions,
        labels=args.labels,
        clusters=args.clusters,
        topk=args.topk,
        centers_divisor=args.centers_divisor,
        epsilon=args.epsilon,
        gamma=args.gamma,
        seed=args.seed,
        mode=args.mode,
        threads=args.threads,
        out=args.out,
    )
    result = run_pipeline(cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = write_report(result, out_dir / "report.json")
    if result.metrics is not None:
        from .metrics import format_report

        print(format_report(result.metrics))
    print(f"report written to {report_path}")
    return 0


def _cmd_synth(args) -> int:
    from .pipeline import write_synthetic
    from .synthetic import SynthSpec

    kwargs = dict(
        n_classes=args.classes,
        per_class=args.per_class,
        dim=args.dim,
        class_separation=args.separation,
        text_alignment=args.alignment,
        bank_sizes=(args.noun_bank_size, args.caption_bank_size),
        seed=args.seed,
    )
    if args.noise_sigma is not None:
        kwargs["noise_sigma"] = args.noise_sigma
    paths = write_synthetic(SynthSpec(**kwargs), args.out)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


def _cmd_ablate(args) -> int:
    from pathlib import Path

    from .pipeline import config_from_kv, parse_kv_file, parse_sweep_file, run_ablation_suite

    base = config_from_kv(parse_kv_file(args.config))
    sweep = parse_sweep_file(args.sweep)
    out_csv = Path(args.out) / "ablation.csv"
    rows = run_ablation_suite(base, sweep, out_csv)
    failures = sum(1 for row in rows if row["error"])
    print(f"{len(rows)} runs ({failures} failed); results in {out_csv}")
    return 0


def _cmd_eval(args) -> int:
    from .metrics import evaluate, format_report
    from .store import load_labels

    pred = load_labels(args.pred)
    truth = load_labels(args.truth)
    print(format_report(evaluate(truth, pred)))
    return 0


_COMMANDS = {"run": _cmd_run, "synth": _cmd_synth, "ablate": _cmd_ablate, "eval": _cmd_eval}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    from .errors import CAEError, ConfigError

    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CAEError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return getattr(type(exc), "exit_code", 1)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
