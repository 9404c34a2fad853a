"""Command-line interface.

Subcommands: stats | graph | select | eval | bench.
Exit codes: 0 ok, 2 I/O failure, 3 solver failure, 4 usage error.
"""

import argparse
import json
import sys
from pathlib import Path

from . import bench, data, graph, metrics, solver
from .mlknn import MlKnn

EXIT_OK = 0
EXIT_IO = 2
EXIT_SOLVER = 3
EXIT_USAGE = 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def _add_dataset_args(sub):
    sub.add_argument("--data", required=True, help="dataset file")
    sub.add_argument("--format", choices=("csv", "arff"), default="csv")
    sub.add_argument("--labels", required=True,
                     help="trailing label column count (csv) or label-spec XML path (arff)")
    sub.add_argument("--header", action="store_true", help="csv file starts with a header row")


def _load_dataset(args):
    try:
        if args.format == "csv":
            try:
                count = int(args.labels)
            except ValueError:
                raise CliError(f"--labels must be an integer for csv, got {args.labels!r}",
                               EXIT_USAGE) from None
            return data.load_csv(args.data, count, header=args.header)
        return data.load_arff(args.data, args.labels)
    except data.LoadError as exc:
        raise CliError(str(exc), EXIT_IO) from exc


def _maybe_train_slice(ds, args):
    if getattr(args, "train", None) is None:
        return ds
    spec = data.SplitSpec(train_count=args.train, test_count=0,
                          seed=args.seed, mode=args.split_mode)
    try:
        train, _ = data.split(ds, spec)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    return train


def _sigma(value):
    if value == "median":
        return value
    try:
        width = float(value)
    except ValueError:
        raise CliError(f"--sigma must be 'median' or a positive number, got {value!r}",
                       EXIT_USAGE) from None
    if width <= 0:
        raise CliError("--sigma must be positive", EXIT_USAGE)
    return width


def cmd_stats(args):
    ds = _load_dataset(args)
    print(json.dumps(data.stats(ds).to_json_dict(), sort_keys=True))
    return EXIT_OK


def cmd_graph(args):
    ds = _load_dataset(args)
    ds = _maybe_train_slice(ds, args)
    cfg = graph.WalkConfig(steps=args.steps, mode=args.mode, seed=args.seed)
    neighborhood, diagnostics = graph.build_graph(ds.features, ds.labels, cfg,
                                                  sigma=_sigma(args.sigma))
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        graph.dump_edges(neighborhood, out / "graph.tsv")
        (out / "diagnostics.json").write_text(diagnostics.to_json() + "\n", encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write graph output: {exc}", EXIT_IO) from exc
    print(json.dumps({"edges": out.joinpath("graph.tsv").as_posix(),
                      "diagnostics": out.joinpath("diagnostics.json").as_posix()},
                     sort_keys=True))
    return EXIT_OK


def cmd_select(args):
    ds = _load_dataset(args)
    ds = _maybe_train_slice(ds, args)
    if args.graph is not None:
        try:
            neighborhood = graph.load_edges(args.graph, ds.n_instances)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load graph file: {exc}", EXIT_IO) from exc
    else:
        cfg = graph.WalkConfig(steps=args.steps, mode=args.mode, seed=args.seed)
        neighborhood, _ = graph.build_graph(ds.features, ds.labels, cfg,
                                            sigma=_sigma(args.sigma))
    params = solver.SolverParams(alpha=args.alpha, beta=args.beta, rho=args.rho,
                                 max_iters=args.max_iters, tol=args.tol)
    try:
        state = solver.fit(ds.features, ds.labels, neighborhood, params)
        ranking = solver.rank_features(state)
        selected = solver.select_top(ranking, args.count)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    except solver.SolverError as exc:
        raise CliError(f"solver failed: {exc}", EXIT_SOLVER) from exc
    payload = json.dumps(solver.selection_record(state, params, selected), sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    return EXIT_OK


def cmd_eval(args):
    ds = _load_dataset(args)
    try:
        with open(args.selection, encoding="utf-8") as fh:
            selection = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read selection file: {exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"selection file is not valid JSON: {exc}", EXIT_IO) from exc
    indices = selection["selected_indices"] if isinstance(selection, dict) else selection
    if (not isinstance(indices, list) or not indices
            or any(not isinstance(i, int) or i < 0 or i >= ds.n_features for i in indices)):
        raise CliError(f"selection indices must lie in [0, {ds.n_features})", EXIT_USAGE)

    spec = data.SplitSpec(train_count=args.train, test_count=args.test,
                          seed=args.seed, mode=args.split_mode)
    try:
        train, test = data.split(ds, spec)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    model = MlKnn(k=args.k, smooth=args.smooth)
    model.fit(train.features[:, indices], train.labels)
    prediction = model.predict(test.features[:, indices])
    report = metrics.compute_report(prediction.scores, prediction.binary, test.labels)
    print(json.dumps(report.to_json_dict(), sort_keys=True))
    return EXIT_OK


def cmd_bench(args):
    try:
        cfg = bench.load_config(args.config)
    except bench.ConfigError as exc:
        raise CliError(str(exc), EXIT_USAGE) from exc
    out_dir = args.out or cfg.output_dir
    if out_dir is None:
        raise CliError("no output directory: pass --out or set output_dir in the config",
                       EXIT_USAGE)
    try:
        cells = bench.run_bench(cfg, out_dir, jobs=args.jobs,
                                render_figures=not args.no_figures)
    except data.LoadError as exc:
        raise CliError(str(exc), EXIT_IO) from exc
    failed = sum(1 for c in cells if "error" in c)
    print(json.dumps({"out": str(out_dir), "cells": len(cells), "failed": failed,
                      "fingerprint": cfg.fingerprint()}, sort_keys=True))
    return EXIT_OK


def build_parser():
    parser = Parser(prog="mlfs",
                    description="Multi-label feature selection and evaluation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[], help="print dataset statistics as JSON")
    _add_dataset_args(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("graph", help="build the sampled neighborhood graph")
    _add_dataset_args(p)
    p.add_argument("--steps", type=int, default=80, help="random-walk length")
    p.add_argument("--mode", choices=("bfs", "dfs"), default="bfs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", default="median", help="'median' or a kernel width")
    p.add_argument("--train", type=int, default=None,
                   help="build the graph on the first N (or seeded-shuffle N) rows only")
    p.add_argument("--split-mode", choices=("first_n", "shuffled"), default="first_n")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("select", help="rank features and emit a selection")
    _add_dataset_args(p)
    p.add_argument("--alpha", type=float, default=0.1, help="manifold weight")
    p.add_argument("--beta", type=float, default=10.0, help="regularization weight")
    p.add_argument("--rho", type=float, default=0.5, help="row-sparsity mix in [0, 1]")
    p.add_argument("-l", "--count", type=int, required=True, help="number of features to keep")
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--steps", type=int, default=80)
    p.add_argument("--mode", choices=("bfs", "dfs"), default="bfs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", default="median")
    p.add_argument("--graph", default=None, help="reuse a graph dump instead of sampling")
    p.add_argument("--train", type=int, default=None, help="fit on the first N rows only")
    p.add_argument("--split-mode", choices=("first_n", "shuffled"), default="first_n")
    p.add_argument("--out", default=None, help="write the selection JSON here instead of stdout")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("eval", help="evaluate a selection with ML-KNN on a train/test split")
    _add_dataset_args(p)
    p.add_argument("--selection", required=True, help="selection JSON file")
    p.add_argument("--train", type=int, required=True)
    p.add_argument("--test", type=int, required=True)
    p.add_argument("--split-mode", choices=("first_n", "shuffled"), default="first_n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=7, help="ML-KNN neighbor count")
    p.add_argument("--smooth", type=float, default=1.0)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run a grid-search benchmark from a config file")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    p.add_argument("--jobs", type=int, default=1, help="parallel grid cells")
    p.add_argument("--no-figures", action="store_true", help="skip report figures")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mlfs: error: {exc}", file=sys.stderr)
        return exc.code
    except (FileNotFoundError, PermissionError) as exc:
        print(f"mlfs: error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
