"""Rank fusion and TREC-style evaluation toolkit."""

from .corpus_io import DocScore, Qrels, RankedList, Run, parse_qrels, parse_run, read_qrels, read_run, write_qrels, write_run
from .fusion import FusionConfig, fuse, fuse_runs, linear_fuse, normalize_scores
from .metrics import MetricReport, evaluate
from .pooling import Pool, build_pool, leave_one_out_bias, simulate_qrels
from .tuner import GridSpec, TuneReport, grid_search

__version__ = "0.1.0"

__all__ = [
    "DocScore",
    "FusionConfig",
    "GridSpec",
    "MetricReport",
    "Pool",
    "Qrels",
    "RankedList",
    "Run",
    "TuneReport",
    "build_pool",
    "evaluate",
    "fuse",
    "fuse_runs",
    "grid_search",
    "leave_one_out_bias",
    "linear_fuse",
    "normalize_scores",
    "parse_qrels",
    "parse_run",
    "read_qrels",
    "read_run",
    "simulate_qrels",
    "write_qrels",
    "write_run",
]
