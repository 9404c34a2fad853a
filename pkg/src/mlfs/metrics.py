"""Multi-label ranking metrics and the rank-based method comparison.

Rank positions are 1-based in descending score order; equal scores rank
the lower label index first. Instances whose label set is empty or full
have no relevant/irrelevant contrast, so the rank-based metrics skip them
and report how many were skipped. Hamming loss uses every instance.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass(frozen=True)
class MetricReport:
    hamming_loss: float
    ranking_loss: float
    one_error: float
    coverage: float
    coverage_normalized: float
    average_precision: float
    skipped_instances: int

    def to_json_dict(self):
        return {
            "hamming_loss": self.hamming_loss,
            "ranking_loss": self.ranking_loss,
            "one_error": self.one_error,
            "coverage": self.coverage,
            "coverage_normalized": self.coverage_normalized,
            "average_precision": self.average_precision,
            "skipped_instances": self.skipped_instances,
        }


@dataclass(frozen=True)
class RankTable:
    methods: tuple
    datasets: tuple
    values: np.ndarray     # (k, N) metric values
    avg_ranks: np.ndarray  # (k,) mean rank per method, 1 = best


def _check_shapes(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"expected matching 2-D shapes, got {a.shape} and {b.shape}")
    return a, b


def degenerate_rows(truth):
    """Mask of instances whose label set is empty or full (no ranking contrast)."""
    truth = np.asarray(truth)
    row_sums = truth.sum(axis=1)
    return (row_sums == 0) | (row_sums == truth.shape[1])


def _evaluable(scores, truth):
    scores, truth = _check_shapes(scores, truth)
    keep = ~degenerate_rows(truth)
    if not keep.any():
        raise ValueError("no evaluable instances")
    return scores[keep], truth[keep], int((~keep).sum())


def label_ranks(score_row):
    """1-based rank of each label, descending score, lower index first on ties."""
    score_row = np.asarray(score_row)
    order = np.argsort(-score_row, kind="stable")
    ranks = np.empty(score_row.size, dtype=np.int64)
    ranks[order] = np.arange(1, score_row.size + 1)
    return ranks


def hamming_loss(pred_binary, truth):
    """Fraction of label slots predicted wrongly."""
    pred_binary, truth = _check_shapes(pred_binary, truth)
    return float(np.mean(pred_binary != truth))


def ranking_loss(scores, truth):
    """Average fraction of (relevant, irrelevant) pairs ordered wrongly; ties count 1/2."""
    scores, truth, _ = _evaluable(scores, truth)
    values = []
    for f, y in zip(scores, truth):
        rel = f[y == 1]
        irr = f[y == 0]
        wrong = np.sum(rel[:, None] < irr[None, :]) + 0.5 * np.sum(rel[:, None] == irr[None, :])
        values.append(wrong / (rel.size * irr.size))
    return float(np.mean(values))


def one_error(scores, truth):
    """Fraction of instances whose top-scored label is not relevant."""
    scores, truth, _ = _evaluable(scores, truth)
    top = np.argmax(scores, axis=1)  # ties: lowest index
    return float(np.mean(truth[np.arange(truth.shape[0]), top] == 0))


def coverage(scores, truth):
    """Mean depth down the ranking needed to cover every relevant label.

    Returns (raw, normalized); raw counts rank steps past the top position
    (so a single relevant label ranked first contributes 0), normalized
    divides by the label count.
    """
    scores, truth, _ = _evaluable(scores, truth)
    depths = []
    for f, y in zip(scores, truth):
        ranks = label_ranks(f)
        depths.append(ranks[y == 1].max() - 1)
    raw = float(np.mean(depths))
    return raw, raw / truth.shape[1]


def average_precision(scores, truth):
    """Mean over relevant labels of the precision at their rank position."""
    scores, truth, _ = _evaluable(scores, truth)
    values = []
    for f, y in zip(scores, truth):
        rel_ranks = label_ranks(f)[y == 1]
        counts = (rel_ranks[None, :] <= rel_ranks[:, None]).sum(axis=1)
        values.append(np.sum(counts / rel_ranks) / rel_ranks.size)
    return float(np.mean(values))


def compute_report(scores, pred_binary, truth):
    """All metrics for one prediction, plus the shared skipped-instance count."""
    _, _, skipped = _evaluable(scores, truth)
    raw, normalized = coverage(scores, truth)
    return MetricReport(
        hamming_loss=hamming_loss(pred_binary, truth),
        ranking_loss=ranking_loss(scores, truth),
        one_error=one_error(scores, truth),
        coverage=raw,
        coverage_normalized=normalized,
        average_precision=average_precision(scores, truth),
        skipped_instances=skipped,
    )


def friedman_ranks(values, methods=None, datasets=None, higher_is_better=False):
    """Rank methods 1..k per dataset (1 = best) and average across datasets.

    Ties receive midranks. ``higher_is_better`` flips the ranking direction
    for metrics where larger values win.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2:
        raise ValueError("expected a (methods x datasets) value matrix")
    if np.isnan(values).any():
        raise ValueError("rank table contains NaN cells")
    k, n = values.shape
    methods = tuple(methods) if methods is not None else tuple(f"m{i}" for i in range(k))
    datasets = tuple(datasets) if datasets is not None else tuple(f"d{i}" for i in range(n))
    if len(methods) != k or len(datasets) != n:
        raise ValueError("method/dataset name counts do not match the value matrix")
    signed = -values if higher_is_better else values
    ranks = np.column_stack([rankdata(signed[:, j]) for j in range(n)])
    return RankTable(methods=methods, datasets=datasets, values=values,
                     avg_ranks=ranks.mean(axis=1))


def critical_difference(k, n_datasets, q_alpha=2.690):
    """Minimum average-rank gap that is significant for k methods on N datasets."""
    if k < 2:
        raise ValueError("need at least two methods")
    if n_datasets < 1:
        raise ValueError("need at least one dataset")
    return q_alpha * np.sqrt(k * (k + 1) / (6.0 * n_datasets))


def rank_table_csv(table, path):
    """Write the value matrix with average ranks as CSV."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method," + ",".join(table.datasets) + ",avg_rank\n")
        for i, method in enumerate(table.methods):
            cells = ",".join(repr(float(v)) for v in table.values[i])
            fh.write(f"{method},{cells},{table.avg_ranks[i]!r}\n")


def cd_summary_lines(table, cd, control=None):
    """Pairwise significance lines comparing a control method against the rest."""
    control = control if control is not None else table.methods[0]
    if control not in table.methods:
        raise ValueError(f"unknown control method {control!r}")
    base = table.avg_ranks[table.methods.index(control)]
    lines = []
    for method, rank in zip(table.methods, table.avg_ranks):
        if method == control:
            continue
        delta = abs(base - rank)
        verdict = "significant" if delta > cd else "not"
        lines.append(f"method {control} vs {method}: |Δrank| = {delta:.4f} "
                     f"(CD = {cd:.4f}) → {verdict}")
    return lines
