"""Command-line front end.

Subcommands: generate, preprocess, train, evaluate, export-weights.
Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import (
    ExperimentConfig,
    list_presets,
    load_config,
    load_preset,
)
from .engine import load_checkpoint
from .errors import ContractError, DataError
from .export import export_weight_records, records_to_tsv, write_export
from .runner import (
    evaluate_checkpoints,
    preprocess,
    run_experiment,
    write_generated,
)
from .synthetic import generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rulegnn", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset to disk")
    gen.add_argument("kind", help="longrings | evenoddrings | evenoddringscount | csl | snowflakes")
    gen.add_argument("--count", type=int, default=None)
    gen.add_argument("--seed", type=int, default=42)
    gen.add_argument("--out", default="data", help="parent directory for the dataset")

    def add_config_args(p):
        group = p.add_mutually_exclusive_group(required=True)
        group.add_argument("--config", help="experiment config file")
        group.add_argument(
            "--preset", help=f"packaged preset: {', '.join(list_presets())}"
        )
        p.add_argument("--cache", default="cache", help="preprocessing cache root")

    pre = sub.add_parser("preprocess", help="populate distance/label/layout caches")
    add_config_args(pre)

    tr = sub.add_parser("train", help="run the full cross-validation protocol")
    add_config_args(tr)
    tr.add_argument("--jobs", type=int, default=1, help="parallel fold workers")
    tr.add_argument("--out", default=None, help="override the output directory")
    tr.add_argument("--seed", type=int, default=None, help="override training seed")

    ev = sub.add_parser("evaluate", help="recompute the results table from checkpoints")
    add_config_args(ev)
    ev.add_argument("--results", required=True, help="experiment output directory")

    ex = sub.add_parser("export-weights", help="export learned weights for one graph")
    add_config_args(ex)
    ex.add_argument("--checkpoint", required=True)
    ex.add_argument("--graph", type=int, required=True, help="graph index")
    ex.add_argument("--top-k", type=int, default=None)
    ex.add_argument("--out", default=None, help="output path prefix (.tsv/.dot)")
    return parser


def _load(args) -> ExperimentConfig:
    if args.preset:
        return load_preset(args.preset)
    return load_config(args.config)


def _cmd_generate(args) -> int:
    kwargs = {"seed": args.seed}
    if args.count is not None:
        kwargs["count"] = args.count
    dataset = generate(args.kind, **kwargs)
    directory = Path(args.out) / dataset.name
    write_generated(dataset, directory)
    print(f"wrote {len(dataset)} graphs to {directory}")
    print((directory / f"{dataset.name}_stats.txt").read_text(), end="")
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    config = _load(args)
    timings = preprocess(config, args.cache)
    for stage, seconds in timings.items():
        print(f"{stage}: {seconds:.2f}s")
    return EXIT_OK


def _cmd_train(args) -> int:
    config = _load(args)
    if args.seed is not None:
        config.training.seed = args.seed
    result = run_experiment(
        config, cache_root=args.cache, n_jobs=args.jobs, out_dir=args.out
    )
    print(result.table_row())
    print(f"artifacts in {result.out_dir}")
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    config = _load(args)
    table, _ = evaluate_checkpoints(config, args.results, args.cache)
    print(table)
    return EXIT_OK


def _cmd_export(args) -> int:
    config = _load(args)
    dataset = config.dataset.load()
    params, _ = load_checkpoint(args.checkpoint)
    records = export_weight_records(
        dataset, config.model, params, args.graph, top_k=args.top_k
    )
    if args.out is None:
        print(records_to_tsv(records), end="")
    else:
        tsv, dot = write_export(records, args.out, graph_name=f"graph{args.graph}")
        print(f"wrote {tsv} and {dot}")
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "export-weights": _cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContractError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
