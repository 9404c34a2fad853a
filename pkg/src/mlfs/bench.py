"""Grid-search benchmark harness.

A JSON config describes one dataset, a split, the solver grids and the
evaluation protocol; the runner materializes every
(alpha, beta, rho, feature count, repetition) cell as its own JSON file,
then assembles a sorted summary CSV, per-metric best rows and report
figures. Completed cells are skipped on re-runs, so interrupted
benchmarks resume where they stopped.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import hashlib
import json
import time
from pathlib import Path

from . import data, graph, metrics, solver
from .mlknn import MlKnn

DEFAULT_DECADES = [1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]
DEFAULT_RHOS = [round(0.1 * i, 1) for i in range(11)]
DEFAULT_FEATURE_COUNTS = list(range(5, 101, 5))

METRIC_FIELDS = ("hamming_loss", "ranking_loss", "one_error",
                 "coverage", "coverage_normalized", "average_precision")
# Direction of "better" per metric; only average precision grows upward.
HIGHER_IS_BETTER = {name: name == "average_precision" for name in METRIC_FIELDS}

SUMMARY_COLUMNS = ("dataset", "alpha", "beta", "rho", "l", "rep") + METRIC_FIELDS


class ConfigError(ValueError):
    """The benchmark config file is malformed."""


def derive_seed(master, stage, *indices):
    """Stable 64-bit seed for one stochastic stage of the pipeline."""
    text = f"{master}|{stage}|{','.join(str(i) for i in indices)}"
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass(frozen=True)
class ExperimentConfig:
    dataset_path: str
    dataset_format: str            # "csv" | "arff"
    labels: object                 # int column count (csv) or xml path (arff)
    header: bool = False
    name: str | None = None
    train_count: int = 0
    test_count: int = 0
    split_mode: str = "first_n"
    noise_ratio: float = 0.0
    walk_steps: int = 80
    walk_mode: str = "bfs"
    sigma: object = "median"
    alpha_list: tuple = (0.1,)
    beta_list: tuple = (10.0,)
    rho_list: tuple = tuple(DEFAULT_RHOS)
    feature_counts: tuple = tuple(DEFAULT_FEATURE_COUNTS)
    mlknn_k: int = 7
    mlknn_smooth: float = 1.0
    max_iters: int = 50
    tol: float = 1e-6
    epsilon: float = 1e-64
    repetitions: int = 1
    seed: int = 0
    output_dir: str | None = None

    def resolved(self):
        """Canonical dict of everything that affects results (no output path)."""
        d = {
            "dataset": {"path": self.dataset_path, "format": self.dataset_format,
                        "labels": self.labels, "header": self.header, "name": self.display_name},
            "split": {"train": self.train_count, "test": self.test_count, "mode": self.split_mode},
            "noise_ratio": self.noise_ratio,
            "walk": {"steps": self.walk_steps, "mode": self.walk_mode},
            "sigma": self.sigma,
            "alpha": list(self.alpha_list),
            "beta": list(self.beta_list),
            "rho": list(self.rho_list),
            "feature_counts": list(self.feature_counts),
            "mlknn": {"k": self.mlknn_k, "smooth": self.mlknn_smooth},
            "solver": {"max_iters": self.max_iters, "tol": self.tol, "epsilon": self.epsilon},
            "repetitions": self.repetitions,
            "seed": self.seed,
        }
        return d

    @property
    def display_name(self):
        return self.name if self.name else Path(self.dataset_path).stem

    def fingerprint(self):
        blob = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _require_keys(section, allowed, where):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown config keys in {where}: {sorted(unknown)}")


def load_config(path):
    """Parse and validate an experiment config file (unknown keys are rejected)."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw):
    _require_keys(raw, {"dataset", "split", "noise_ratio", "walk", "sigma", "alpha", "beta",
                        "rho", "feature_counts", "mlknn", "solver", "repetitions", "seed",
                        "output_dir"}, "config")
    for key in ("dataset", "split"):
        if key not in raw:
            raise ConfigError(f"config is missing the {key!r} section")

    ds = raw["dataset"]
    _require_keys(ds, {"path", "format", "labels", "header", "name"}, "dataset")
    if "path" not in ds or "format" not in ds or "labels" not in ds:
        raise ConfigError("dataset section needs path, format and labels")
    if ds["format"] not in ("csv", "arff"):
        raise ConfigError(f"dataset format must be csv or arff, got {ds['format']!r}")

    sp = raw["split"]
    _require_keys(sp, {"train", "test", "mode"}, "split")
    if "train" not in sp or "test" not in sp:
        raise ConfigError("split section needs train and test counts")

    walk = raw.get("walk", {})
    _require_keys(walk, {"steps", "mode"}, "walk")
    mlknn = raw.get("mlknn", {})
    _require_keys(mlknn, {"k", "smooth"}, "mlknn")
    solver_section = raw.get("solver", {})
    _require_keys(solver_section, {"max_iters", "tol", "epsilon"}, "solver")

    grids = {
        "alpha": raw.get("alpha", DEFAULT_DECADES),
        "beta": raw.get("beta", DEFAULT_DECADES),
        "rho": raw.get("rho", DEFAULT_RHOS),
        "feature_counts": raw.get("feature_counts", DEFAULT_FEATURE_COUNTS),
    }
    for name, values in grids.items():
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{name} must be a nonempty list")

    cfg = ExperimentConfig(
        dataset_path=ds["path"],
        dataset_format=ds["format"],
        labels=ds["labels"],
        header=bool(ds.get("header", False)),
        name=ds.get("name"),
        train_count=int(sp["train"]),
        test_count=int(sp["test"]),
        split_mode=sp.get("mode", "first_n"),
        noise_ratio=float(raw.get("noise_ratio", 0.0)),
        walk_steps=int(walk.get("steps", 80)),
        walk_mode=walk.get("mode", "bfs"),
        sigma=raw.get("sigma", "median"),
        alpha_list=tuple(float(v) for v in grids["alpha"]),
        beta_list=tuple(float(v) for v in grids["beta"]),
        rho_list=tuple(float(v) for v in grids["rho"]),
        feature_counts=tuple(int(v) for v in grids["feature_counts"]),
        mlknn_k=int(mlknn.get("k", 7)),
        mlknn_smooth=float(mlknn.get("smooth", 1.0)),
        max_iters=int(solver_section.get("max_iters", 50)),
        tol=float(solver_section.get("tol", 1e-6)),
        epsilon=float(solver_section.get("epsilon", 1e-64)),
        repetitions=int(raw.get("repetitions", 1)),
        seed=int(raw.get("seed", 0)),
        output_dir=raw.get("output_dir"),
    )
    if cfg.repetitions < 1:
        raise ConfigError("repetitions must be >= 1")
    if cfg.split_mode not in ("first_n", "shuffled"):
        raise ConfigError(f"split mode must be first_n or shuffled, got {cfg.split_mode!r}")
    return cfg


def load_dataset(cfg):
    if cfg.dataset_format == "csv":
        return data.load_csv(cfg.dataset_path, int(cfg.labels), header=cfg.header)
    return data.load_arff(cfg.dataset_path, str(cfg.labels))


@dataclass
class RunRecord:
    fingerprint: str
    config: dict
    seeds: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def write(self, path):
        payload = {"fingerprint": self.fingerprint, "config": self.config,
                   "seeds": self.seeds, "timings": self.timings, "notes": self.notes}
        Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")


def _cell_name(alpha, beta, rho, l, rep):
    return f"a{alpha!r}_b{beta!r}_r{rho!r}_l{l}_rep{rep}.json"


def _cell_key(cell):
    return (cell["dataset"], cell["alpha"], cell["beta"], cell["rho"], cell["l"], cell["rep"])


def _evaluate_combo(train, test, neighborhood, cfg, alpha, beta, rho, rep, seeds, cells_dir):
    """Fit once for a parameter triple, then evaluate every feature count."""
    pending = [l for l in cfg.feature_counts
               if not (cells_dir / _cell_name(alpha, beta, rho, l, rep)).exists()]
    if not pending:
        return
    base = {"dataset": cfg.display_name, "alpha": alpha, "beta": beta, "rho": rho,
            "rep": rep, "seeds": seeds}
    try:
        params = solver.SolverParams(alpha=alpha, beta=beta, rho=rho,
                                     max_iters=cfg.max_iters, tol=cfg.tol, epsilon=cfg.epsilon)
        started = time.perf_counter()
        state = solver.fit(train.features, train.labels, neighborhood, params)
        ranking = solver.rank_features(state)
        fit_seconds = time.perf_counter() - started
    except Exception as exc:  # a broken cell must not sink the whole grid
        for l in pending:
            cell = dict(base, l=l, error=f"{type(exc).__name__}: {exc}")
            _write_cell(cells_dir, cell)
        return
    for l in pending:
        cell = dict(base, l=l)
        try:
            if l > train.n_features:
                raise ValueError(f"feature count {l} exceeds dimensionality {train.n_features}")
            started = time.perf_counter()
            selected = solver.select_top(ranking, l)
            model = MlKnn(k=cfg.mlknn_k, smooth=cfg.mlknn_smooth)
            model.fit(train.features[:, selected], train.labels)
            prediction = model.predict(test.features[:, selected])
            report = metrics.compute_report(prediction.scores, prediction.binary, test.labels)
            cell["metrics"] = report.to_json_dict()
            cell["iterations"] = state.iterations
            cell["converged"] = state.converged
            cell["wall_clock"] = {"fit": fit_seconds, "eval": time.perf_counter() - started}
        except Exception as exc:
            cell["error"] = f"{type(exc).__name__}: {exc}"
        _write_cell(cells_dir, cell)


def _write_cell(cells_dir, cell):
    path = cells_dir / _cell_name(cell["alpha"], cell["beta"], cell["rho"], cell["l"], cell["rep"])
    path.write_text(json.dumps(cell, sort_keys=True) + "\n", encoding="utf-8")


def _format_value(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_summary_csv(cells, path):
    """Sorted summary of successful cells; byte-stable for a fixed cell set."""
    rows = sorted((c for c in cells if "metrics" in c), key=_cell_key)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for cell in rows:
            values = [cell["dataset"], _format_value(cell["alpha"]), _format_value(cell["beta"]),
                      _format_value(cell["rho"]), str(cell["l"]), str(cell["rep"])]
            values += [_format_value(cell["metrics"][name]) for name in METRIC_FIELDS]
            fh.write(",".join(values) + "\n")
    return rows


def aggregate_cells(cells):
    """Mean and std per (alpha, beta, rho, l) over repetitions, per metric."""
    groups = {}
    for cell in cells:
        if "metrics" not in cell:
            continue
        key = (cell["alpha"], cell["beta"], cell["rho"], cell["l"])
        groups.setdefault(key, []).append(cell["metrics"])
    aggregated = {}
    for key, reports in sorted(groups.items()):
        entry = {}
        for name in METRIC_FIELDS:
            values = [r[name] for r in reports]
            mean = sum(values) / len(values)
            var = sum((v - mean) ** 2 for v in values) / len(values)
            entry[name] = {"mean": mean, "std": var ** 0.5, "reps": len(values)}
        aggregated[key] = entry
    return aggregated


def best_rows(aggregated):
    """Best grid point per metric, honoring each metric's direction."""
    best = {}
    for name in METRIC_FIELDS:
        chosen, chosen_stats = None, None
        for key, entry in aggregated.items():
            stats_entry = entry[name]
            if chosen is None:
                chosen, chosen_stats = key, stats_entry
                continue
            if HIGHER_IS_BETTER[name]:
                if stats_entry["mean"] > chosen_stats["mean"]:
                    chosen, chosen_stats = key, stats_entry
            elif stats_entry["mean"] < chosen_stats["mean"]:
                chosen, chosen_stats = key, stats_entry
        if chosen is not None:
            alpha, beta, rho, l = chosen
            best[name] = {"alpha": alpha, "beta": beta, "rho": rho, "l": l,
                          "mean": chosen_stats["mean"], "std": chosen_stats["std"],
                          "direction": "max" if HIGHER_IS_BETTER[name] else "min"}
    return best


def run_bench(cfg, out_dir, jobs=1, render_figures=True):
    """Execute the grid, then write cells, summary CSV, best rows and figures.

    Returns the list of cell dicts (including any failed cells).
    """
    out = Path(out_dir)
    cells_dir = out / "cells"
    cells_dir.mkdir(parents=True, exist_ok=True)
    record = RunRecord(fingerprint=cfg.fingerprint(), config=cfg.resolved())
    record.notes["noise_protocol"] = ("gaussian noise is applied to the full dataset "
                                      "before splitting; repetitions redraw noise and "
                                      "walk seeds on the fixed split")

    started = time.perf_counter()
    ds = load_dataset(cfg)
    record.timings["load"] = time.perf_counter() - started

    split_seed = derive_seed(cfg.seed, "split")
    spec = data.SplitSpec(train_count=cfg.train_count, test_count=cfg.test_count,
                          seed=split_seed, mode=cfg.split_mode)
    record.seeds["split"] = split_seed

    graph_seconds = 0.0
    solve_seconds = time.perf_counter()
    for rep in range(cfg.repetitions):
        noise_seed = derive_seed(cfg.seed, "noise", rep)
        walk_seed = derive_seed(cfg.seed, "walk", rep)
        record.seeds[f"rep{rep}"] = {"noise": noise_seed, "walk": walk_seed}
        rep_cells = [(alpha, beta, rho, l)
                     for alpha in cfg.alpha_list for beta in cfg.beta_list
                     for rho in cfg.rho_list for l in cfg.feature_counts]
        if all((cells_dir / _cell_name(a, b, r, l, rep)).exists() for a, b, r, l in rep_cells):
            continue  # whole repetition already materialized

        noisy = data.add_gaussian_noise(ds, cfg.noise_ratio, noise_seed)
        train, test = data.split(noisy, spec)
        walk_cfg = graph.WalkConfig(steps=cfg.walk_steps, mode=cfg.walk_mode, seed=walk_seed)
        graph_started = time.perf_counter()
        neighborhood, diagnostics = graph.build_graph(train.features, train.labels,
                                                      walk_cfg, sigma=cfg.sigma)
        graph_seconds += time.perf_counter() - graph_started
        record.notes[f"rep{rep}_sigma"] = diagnostics.sigma
        seeds = {"noise": noise_seed, "walk": walk_seed, "split": split_seed}

        combos = [(alpha, beta, rho)
                  for alpha in cfg.alpha_list for beta in cfg.beta_list for rho in cfg.rho_list]
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(_evaluate_combo, train, test, neighborhood, cfg,
                                       alpha, beta, rho, rep, seeds, cells_dir)
                           for alpha, beta, rho in combos]
                for future in futures:
                    future.result()
        else:
            for alpha, beta, rho in combos:
                _evaluate_combo(train, test, neighborhood, cfg,
                                alpha, beta, rho, rep, seeds, cells_dir)
    record.timings["graph"] = graph_seconds
    record.timings["solve_eval"] = time.perf_counter() - solve_seconds - graph_seconds

    cells = [json.loads(path.read_text(encoding="utf-8"))
             for path in sorted(cells_dir.glob("*.json"))]
    write_summary_csv(cells, out / "summary.csv")
    aggregated = aggregate_cells(cells)
    best = best_rows(aggregated)
    (out / "best.json").write_text(json.dumps(best, indent=2, sort_keys=True) + "\n",
                                   encoding="utf-8")
    if render_figures:
        from . import figures
        figures.render_report_figures(cells, out / "figures")
    record.write(out / "run.json")
    return cells
