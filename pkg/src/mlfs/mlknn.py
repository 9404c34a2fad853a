"""ML-KNN: multi-label k-nearest-neighbor classification with Bayesian posteriors.

Training estimates, per label, a smoothed prior and the distribution of
"how many of an instance's k nearest neighbors carry this label",
separately for instances that do and do not carry it. Prediction counts
positive neighbors among the k nearest training instances and scores each
label with the posterior probability of membership.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist


@dataclass(frozen=True)
class RankingPrediction:
    scores: np.ndarray  # (n_test, m) posteriors in [0, 1]
    binary: np.ndarray  # (n_test, m) scores thresholded at 0.5


def _nearest(dist_rows, k):
    # Stable argsort: equal distances resolve to the lowest training index.
    order = np.argsort(dist_rows, axis=1, kind="stable")
    return order[:, :k]


class MlKnn:
    """k-nearest-neighbor multi-label classifier with Laplace-smoothed counts."""

    def __init__(self, k=7, smooth=1.0):
        if k < 1:
            raise ValueError("k must be >= 1")
        if smooth <= 0:
            raise ValueError("smooth must be positive")
        self.k = k
        self.smooth = smooth
        self.train_features = None
        self.train_labels = None
        self.priors = None
        self.cond = None      # (m, k+1) P(count | label present)
        self.cond_neg = None  # (m, k+1) P(count | label absent)

    def fit(self, features, labels):
        features = np.asarray(features, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        n, m = labels.shape
        if features.shape[0] != n:
            raise ValueError("feature and label row counts differ")
        if self.k >= n:
            raise ValueError(f"k={self.k} needs more than {n} training instances")
        s = self.smooth

        self.train_features = features
        self.train_labels = labels
        self.priors = (s + labels.sum(axis=0)) / (2.0 * s + n)

        dist = cdist(features, features)
        np.fill_diagonal(dist, np.inf)  # a training instance is not its own neighbor
        neighbor_counts = labels[_nearest(dist, self.k)].sum(axis=1)  # (n, m)

        pos = np.zeros((m, self.k + 1))
        neg = np.zeros((m, self.k + 1))
        for j in range(m):
            present = labels[:, j] == 1
            pos[j] = np.bincount(neighbor_counts[present, j], minlength=self.k + 1)
            neg[j] = np.bincount(neighbor_counts[~present, j], minlength=self.k + 1)
        self.cond = (s + pos) / (s * (self.k + 1) + pos.sum(axis=1, keepdims=True))
        self.cond_neg = (s + neg) / (s * (self.k + 1) + neg.sum(axis=1, keepdims=True))
        return self

    def predict(self, features):
        if self.train_features is None:
            raise RuntimeError("fit must be called before predict")
        features = np.asarray(features, dtype=np.float64)
        if features.shape[1] != self.train_features.shape[1]:
            raise ValueError(f"expected {self.train_features.shape[1]} features, "
                             f"got {features.shape[1]}")
        dist = cdist(features, self.train_features)
        neighbor_counts = self.train_labels[_nearest(dist, self.k)].sum(axis=1)

        m = self.train_labels.shape[1]
        cols = np.arange(m)
        like_pos = self.cond[cols, neighbor_counts] * self.priors
        like_neg = self.cond_neg[cols, neighbor_counts] * (1.0 - self.priors)
        scores = like_pos / (like_pos + like_neg)
        return RankingPrediction(scores=scores, binary=(scores >= 0.5).astype(np.int64))


def predictions_csv(prediction, label_names, path):
    """Write label scores as CSV, one row per instance."""
    header = ",".join(label_names)
    rows = [",".join(repr(float(v)) for v in row) for row in prediction.scores]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        fh.write("\n".join(rows) + "\n")
