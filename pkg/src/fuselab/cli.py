"""Command-line front end.

Exit status: 0 on success, 1 on data or I/O errors, 2 on usage errors.

Options may also come from an INI-style config file given with ``--config``
(or named by ``$FUSELAB_CONFIG``). Keys are long option names without the
leading dashes; ``[DEFAULT]`` applies to every subcommand and a section
named after a subcommand applies to that subcommand only. Flags given on the
command line win over the file::

    [DEFAULT]
    depth = 1000

    [fuse]
    method = linear
    weights = 0.5,0.3,0.2
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from collections.abc import Sequence

from . import __version__
from .corpus_io import FILE_ENCODING, Run, read_qrels, read_run, write_qrels, write_run
from .errors import FuselabError, InvalidConfig, UsageError, WeightArityMismatch
from .fusion import METHODS, NORMALIZATIONS, FusionConfig, fuse_runs
from .metrics import evaluate, judged_at_k, parse_metric, parse_metrics
from .pooling import build_pool, collection_stats, condensed_eval, leave_one_out_bias, simulate_qrels
from .tuner import GridSpec, grid_search

CONFIG_ENV = "FUSELAB_CONFIG"
DEFAULT_METRICS = "mrr,ndcg@5,ndcg@10,recall@10,recall@100,map@1000"


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fuselab", description="Rank fusion, TREC-style evaluation and pooling analysis."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help=f"config file (default: ${CONFIG_ENV})")
    common.add_argument("-o", "--output", metavar="PATH", help="write to PATH instead of stdout")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    fusion_opts = argparse.ArgumentParser(add_help=False)
    fusion_opts.add_argument("--depth", type=_positive_int, default=1000, help="per-list depth (default 1000)")
    fusion_opts.add_argument("--normalization", choices=NORMALIZATIONS, default=None)

    p = sub.add_parser("fuse", parents=[common, fusion_opts], help="fuse run files")
    p.add_argument("runs", nargs="+", metavar="RUN")
    p.add_argument("--method", choices=METHODS, default="linear")
    p.add_argument("--weights", type=_float_list, default=None, help="comma-separated, one per run")
    p.add_argument("--rrf-k", type=float, default=60.0)
    p.add_argument("--output-depth", type=_positive_int, default=None)
    p.add_argument("--run-tag", default=None, help="tag for the fused run (default fused-METHOD)")

    p = sub.add_parser("eval", parents=[common], help="evaluate a run against qrels")
    p.add_argument("run", metavar="RUN")
    p.add_argument("qrels", metavar="QRELS")
    p.add_argument("--metrics", default=DEFAULT_METRICS, help=f"default {DEFAULT_METRICS}")
    p.add_argument("--percent", action="store_true", help="display values multiplied by 100")
    p.add_argument("--format", choices=("table", "lines"), default="table")
    p.add_argument("--condensed", action="store_true", help="drop unjudged documents first")

    p = sub.add_parser("tune", parents=[common, fusion_opts], help="grid-search linear fusion weights")
    p.add_argument("runs", nargs="+", metavar="RUN")
    p.add_argument("--qrels", required=True)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--objective", default="ndcg@5")

    p = sub.add_parser("pool", parents=[common], help="build a judgment pool")
    p.add_argument("runs", nargs="+", metavar="RUN")
    p.add_argument("--depth", type=_positive_int, default=10)
    p.add_argument("--oracle-qrels", help="also restrict these qrels to the pool")
    p.add_argument("--qrels-output", help="where to write the restricted qrels")

    p = sub.add_parser("judged", parents=[common], help="judged@k per query")
    p.add_argument("run", metavar="RUN")
    p.add_argument("qrels", metavar="QRELS")
    p.add_argument("-k", "--k", type=_int_list, default=(20,), help="comma-separated cutoffs (default 20)")

    p = sub.add_parser("bias", parents=[common], help="leave-one-run-out pooling bias")
    p.add_argument("runs", nargs="+", metavar="RUN")
    p.add_argument("--target", required=True, help="run tag to hold out")
    p.add_argument("--oracle-qrels", required=True)
    p.add_argument("--depth", type=_positive_int, default=20)
    p.add_argument("--objective", default=None, help="default recall@DEPTH")

    p = sub.add_parser("stats", parents=[common], help="collection statistics")
    p.add_argument("qrels", metavar="QRELS")
    p.add_argument("runs", nargs="*", metavar="RUN")
    p.add_argument("-k", "--k", type=_int_list, default=(10, 20, 100))
    return parser


def _subparsers(parser: argparse.ArgumentParser) -> dict[str, argparse.ArgumentParser]:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return dict(action.choices)
    return {}


def _apply_config(parser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    path = known.config or os.environ.get(CONFIG_ENV)
    if not path:
        return
    cfg = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            cfg.read_file(fh)
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise InvalidConfig(f"config file {path}: {exc}") from exc

    subparsers = _subparsers(parser)
    for section in cfg.sections():
        if section not in subparsers:
            raise InvalidConfig(f"config file {path}: unknown section [{section}]")
    for name, sp in subparsers.items():
        options = {
            a.dest: a for a in sp._actions if a.option_strings and a.dest not in ("help", "config")
        }
        section = cfg[name] if cfg.has_section(name) else cfg[cfg.default_section]
        explicit = set(cfg[name]) - set(cfg.defaults()) if cfg.has_section(name) else set()
        defaults = {}
        for key in section:
            dest = key.replace("-", "_")
            if dest not in options:
                if key in explicit:
                    raise InvalidConfig(f"config file {path}: unknown option {key!r} for {name}")
                continue  # a [DEFAULT] key meant for another subcommand
            action = options[dest]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[dest] = section.getboolean(key)
            else:
                defaults[dest] = section[key]
        sp.set_defaults(**defaults)


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding=FILE_ENCODING, newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _read_runs(paths: Sequence[str]) -> list[Run]:
    return [read_run(p) for p in paths]


def cmd_fuse(args) -> int:
    config = FusionConfig(
        method=args.method,
        weights=args.weights,
        depth=args.depth,
        normalization=args.normalization,
        rrf_k=args.rrf_k,
        output_depth=args.output_depth,
    )
    if args.method == "linear" and args.weights is not None and len(args.weights) != len(args.runs):
        raise WeightArityMismatch(len(args.weights), len(args.runs))
    fused = fuse_runs(_read_runs(args.runs), config)
    if args.run_tag:
        fused = Run(args.run_tag, fused.lists)
    _emit(write_run(fused), args.output)
    return 0


def cmd_eval(args) -> int:
    metrics = parse_metrics(args.metrics)
    run, qrels = read_run(args.run), read_qrels(args.qrels)
    report = (condensed_eval if args.condensed else evaluate)(run, qrels, metrics)
    if report.skipped_query_ids:
        print(f"fuselab: {len(report.skipped_query_ids)} queries skipped "
              "(absent from run or without relevant judgments)", file=sys.stderr)
    text = report.to_lines(args.percent) if args.format == "lines" else report.to_table(args.percent)
    _emit(text, args.output)
    return 0


def cmd_tune(args) -> int:
    grid = GridSpec(args.step, args.objective)
    base = FusionConfig(method="linear", depth=args.depth, normalization=args.normalization)
    report = grid_search(_read_runs(args.runs), read_qrels(args.qrels), grid, base)
    _emit(report.to_lines(), args.output)
    return 0


def cmd_pool(args) -> int:
    if args.qrels_output and not args.oracle_qrels:
        raise UsageError("--qrels-output requires --oracle-qrels")
    pool = build_pool(_read_runs(args.runs), args.depth)
    if args.oracle_qrels:
        restricted = simulate_qrels(pool, read_qrels(args.oracle_qrels))
        if args.qrels_output:
            _emit(write_qrels(restricted), args.qrels_output)
    _emit(pool.to_lines(), args.output)
    return 0


def cmd_judged(args) -> int:
    ks = args.k
    if not ks or min(ks) < 1:
        raise UsageError("cutoffs must be positive integers")
    run, qrels = read_run(args.run), read_qrels(args.qrels)
    lines = ["query\t" + "\t".join(f"judged_count@{k}\tjudged@{k}" for k in ks) + "\n"]
    totals = {k: [0, 0.0] for k in ks}
    qids = sorted(run.lists)
    for qid in qids:
        cells = []
        for k in ks:
            frac, count = judged_at_k(run.lists[qid], qrels, k)
            totals[k][0] += count
            totals[k][1] += frac
            cells += [str(count), f"{frac:.4f}"]
        lines.append(qid + "\t" + "\t".join(cells) + "\n")
    if qids:
        n = len(qids)
        lines.append("all\t" + "\t".join(f"{totals[k][0] / n:.4f}\t{totals[k][1] / n:.4f}" for k in ks) + "\n")
    _emit("".join(lines), args.output)
    return 0


def cmd_bias(args) -> int:
    objective = parse_metric(args.objective or f"recall@{args.depth}")
    report = leave_one_out_bias(
        _read_runs(args.runs), args.target, read_qrels(args.oracle_qrels), args.depth, objective
    )
    _emit(report.to_lines(), args.output)
    return 0


def cmd_stats(args) -> int:
    if not args.k or min(args.k) < 1:
        raise UsageError("cutoffs must be positive integers")
    stats = collection_stats(_read_runs(args.runs), read_qrels(args.qrels), args.k)
    _emit(stats.to_lines(), args.output)
    return 0


COMMANDS = {
    "fuse": cmd_fuse,
    "eval": cmd_eval,
    "tune": cmd_tune,
    "pool": cmd_pool,
    "judged": cmd_judged,
    "bias": cmd_bias,
    "stats": cmd_stats,
}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except UsageError as exc:
        print(f"fuselab: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"fuselab: error: {exc}", file=sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fuselab: error: {exc}", file=sys.stderr)
        return 2
    except (FuselabError, OSError) as exc:
        print(f"fuselab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
