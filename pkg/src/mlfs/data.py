"""Multi-label dataset loading, validation, splitting and perturbation.

A dataset is a dense feature matrix plus a binary label matrix. Loaders
accept plain CSV (labels in the trailing columns) and the Mulan ARFF
convention (an ARFF data file plus an XML file naming the label
attributes). Missing values are rejected outright.
"""

from dataclasses import dataclass
import csv
import xml.etree.ElementTree as ET

import numpy as np
from scipy.io import arff as scipy_arff


class LoadError(ValueError):
    """A dataset file could not be parsed or violates the data contract."""


def _freeze(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Immutable multi-label dataset.

    features : (n, p) float array, finite entries only
    labels   : (n, m) int array with entries in {0, 1}
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple
    label_names: tuple

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels)
        if features.ndim != 2 or labels.ndim != 2:
            raise ValueError("features and labels must both be 2-D")
        n, p = features.shape
        m = labels.shape[1]
        if n < 1 or p < 1 or m < 1:
            raise ValueError("dataset needs at least one row, feature and label")
        if labels.shape[0] != n:
            raise ValueError(f"row mismatch: {n} feature rows vs {labels.shape[0]} label rows")
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain NaN or Inf")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary (0/1)")
        if len(self.feature_names) != p:
            raise ValueError(f"expected {p} feature names, got {len(self.feature_names)}")
        if len(self.label_names) != m:
            raise ValueError(f"expected {m} label names, got {len(self.label_names)}")
        object.__setattr__(self, "features", _freeze(features))
        object.__setattr__(self, "labels", _freeze(labels.astype(np.int64)))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "label_names", tuple(self.label_names))

    @property
    def n_instances(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_labels(self):
        return self.labels.shape[1]

    def take(self, rows):
        """Dataset restricted to the given row indices (order preserved)."""
        rows = np.asarray(rows, dtype=np.intp)
        return Dataset(self.features[rows], self.labels[rows],
                       self.feature_names, self.label_names)

    def select_features(self, indices):
        """Dataset restricted to the given feature columns (order preserved)."""
        indices = np.asarray(indices, dtype=np.intp)
        if indices.size and (indices.min() < 0 or indices.max() >= self.n_features):
            raise IndexError(f"feature index out of range [0, {self.n_features})")
        names = tuple(self.feature_names[i] for i in indices)
        return Dataset(self.features[:, indices], self.labels, names, self.label_names)


@dataclass(frozen=True)
class DatasetStats:
    dim: int
    label_count: int
    size: int
    pmc: float
    anl: float
    dens: float

    def to_json_dict(self):
        return {"dim": self.dim, "labels": self.label_count, "size": self.size,
                "pmc": self.pmc, "anl": self.anl, "dens": self.dens}


@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    test_count: int
    seed: int = 0
    mode: str = "first_n"  # or "shuffled"

    def __post_init__(self):
        if self.mode not in ("first_n", "shuffled"):
            raise ValueError(f"unknown split mode {self.mode!r}")
        if self.train_count < 0 or self.test_count < 0:
            raise ValueError("split counts must be nonnegative")


def _parse_label_cell(text, row, col):
    text = text.strip()
    if text == "0":
        return 0
    if text == "1":
        return 1
    raise LoadError(f"row {row}, column {col}: label value {text!r} is not 0 or 1")


def load_csv(path, label_count, header=False):
    """Load a delimited dataset whose trailing ``label_count`` columns are binary labels.

    With ``header=True`` the first line supplies column names; otherwise
    names default to f0..f{p-1} / l0..l{m-1}. Every data row must have the
    same column count. Errors carry 1-based row/column locations.
    """
    if label_count < 1:
        raise LoadError("label_count must be >= 1")
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise LoadError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        raise LoadError(f"{path}: no data rows")

    names = None
    if header:
        names = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise LoadError(f"{path}: header but no data rows")

    width = len(rows[0])
    if label_count >= width:
        raise LoadError(f"label_count={label_count} leaves no feature columns (file has {width})")
    p = width - label_count

    features = np.empty((len(rows), p), dtype=np.float64)
    labels = np.empty((len(rows), label_count), dtype=np.int64)
    for i, row in enumerate(rows):
        rowno = i + 1 + (1 if header else 0)
        if len(row) != width:
            raise LoadError(f"row {rowno}: expected {width} columns, found {len(row)}")
        for j, cell in enumerate(row):
            if j < p:
                try:
                    features[i, j] = float(cell)
                except ValueError as exc:
                    raise LoadError(f"row {rowno}, column {j + 1}: cannot parse {cell!r} as a number") from exc
            else:
                labels[i, j - p] = _parse_label_cell(cell, rowno, j + 1)
    if not np.all(np.isfinite(features)):
        i, j = np.argwhere(~np.isfinite(features))[0]
        raise LoadError(f"row {int(i) + 1 + (1 if header else 0)}, column {int(j) + 1}: non-finite feature value")

    if names is None:
        feature_names = [f"f{j}" for j in range(p)]
        label_names = [f"l{j}" for j in range(label_count)]
    else:
        feature_names, label_names = names[:p], names[p:]
    return Dataset(features, labels, feature_names, label_names)


def read_label_spec(path):
    """Label attribute names from a Mulan XML label-spec file, in file order."""
    try:
        tree = ET.parse(path)
    except (ET.ParseError, OSError) as exc:
        raise LoadError(f"cannot parse label spec {path}: {exc}") from exc
    names = []
    for elem in tree.iter():
        if elem.tag.rsplit("}", 1)[-1] == "label" and "name" in elem.attrib:
            names.append(elem.attrib["name"])
    if not names:
        raise LoadError(f"{path}: no <label name=...> entries found")
    return names


def load_arff(data_path, label_spec_path):
    """Load a Mulan-style dataset: an ARFF file plus an XML file naming the labels.

    Attributes named in the spec become label columns (in spec order); the
    remaining attributes become features in header order. Numeric attributes
    and nominal {0,1} attributes are accepted; anything else is an error.
    """
    label_names = read_label_spec(label_spec_path)
    try:
        raw, meta = scipy_arff.loadarff(data_path)
    except (OSError, ValueError, StopIteration, scipy_arff.ParseArffError) as exc:
        raise LoadError(f"malformed ARFF file {data_path}: {exc}") from exc

    attr_names = list(meta.names())
    missing = [name for name in label_names if name not in attr_names]
    if missing:
        raise LoadError(f"label spec names absent from ARFF header: {missing}")

    label_set = set(label_names)
    feature_names = [name for name in attr_names if name not in label_set]
    if not feature_names:
        raise LoadError("ARFF file has no feature attributes left after removing labels")

    def column(name, as_label):
        kind, _ = meta[name]
        col = raw[name]
        if kind == "numeric":
            values = np.asarray(col, dtype=np.float64)
        elif kind == "nominal":
            allowed = set(meta[name][1])
            if not allowed <= {"0", "1"}:
                role = "label" if as_label else "feature"
                raise LoadError(f"{role} attribute {name!r} is nominal with values {sorted(allowed)}, "
                                "only {0,1} is supported")
            values = np.array([v.decode() if isinstance(v, bytes) else str(v) for v in col])
            bad = ~np.isin(values, ("0", "1"))
            if bad.any():
                raise LoadError(f"attribute {name!r}, row {int(np.argmax(bad)) + 1}: "
                                f"value {values[bad][0]!r} is not 0/1")
            values = values.astype(np.float64)
        else:
            raise LoadError(f"attribute {name!r} has unsupported type {kind!r}")
        if as_label:
            if np.isnan(values).any():
                raise LoadError(f"label attribute {name!r} has missing values")
            if not np.isin(values, (0.0, 1.0)).all():
                bad = int(np.argmax(~np.isin(values, (0.0, 1.0))))
                raise LoadError(f"label attribute {name!r}, row {bad + 1}: value {values[bad]!r} is not 0/1")
        return values

    features = np.column_stack([column(name, as_label=False) for name in feature_names])
    labels = np.column_stack([column(name, as_label=True) for name in label_names]).astype(np.int64)
    if np.isnan(features).any():
        raise LoadError(f"{data_path}: missing feature values are not supported")
    return Dataset(features, labels, feature_names, label_names)


def split(ds, spec):
    """Split into disjoint (train, test) row blocks.

    ``first_n`` takes rows [0, train) then [train, train+test) in file
    order; ``shuffled`` permutes rows with the seed first. Deterministic
    for a fixed spec.
    """
    total = spec.train_count + spec.test_count
    if total > ds.n_instances:
        raise ValueError(f"split needs {total} rows, dataset has {ds.n_instances}")
    if spec.mode == "shuffled":
        order = np.random.default_rng(spec.seed).permutation(ds.n_instances)
    else:
        order = np.arange(ds.n_instances)
    train_rows = order[:spec.train_count]
    test_rows = order[spec.train_count:total]
    return ds.take(train_rows), ds.take(test_rows)


def add_gaussian_noise(ds, ratio, seed):
    """Perturb each feature column with zero-mean Gaussian noise of scale ratio*std(column).

    Columns with zero spread are left untouched, as is the label matrix.
    ``ratio=0`` returns the features bitwise unchanged.
    """
    if ratio < 0:
        raise ValueError("noise ratio must be >= 0")
    if ratio == 0:
        return ds
    col_std = ds.features.std(axis=0, ddof=1) if ds.n_instances > 1 else np.zeros(ds.n_features)
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(ds.features.shape) * (ratio * col_std)
    features = ds.features.copy()
    live = col_std > 0
    features[:, live] += noise[:, live]
    return Dataset(features, ds.labels, ds.feature_names, ds.label_names)


def stats(ds):
    """Summary statistics: dimensionality, label cardinality and density."""
    row_sums = ds.labels.sum(axis=1)
    pmc = float(np.mean(row_sums >= 2))
    anl = float(np.mean(row_sums))
    return DatasetStats(dim=ds.n_features, label_count=ds.n_labels, size=ds.n_instances,
                        pmc=pmc, anl=anl, dens=anl / ds.n_labels)
