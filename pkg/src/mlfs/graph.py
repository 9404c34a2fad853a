"""Joint similarity graph construction and random-walk neighborhood sampling.

The similarity between two instances is the product of a Gaussian kernel on
feature distance and the Jaccard overlap of their label sets; random walks
on the row-normalized similarity then produce a sparse, outlier-robust
neighborhood graph and its Laplacian.
"""

from dataclasses import dataclass, field
import json

import numpy as np
from scipy.spatial.distance import pdist, squareform


@dataclass(frozen=True)
class WalkConfig:
    """Random-walk sampling parameters.

    mode "dfs" runs one path of ``steps`` moves per origin with no-backtrack
    renormalization; mode "bfs" draws ``steps`` independent one-step moves
    from the origin's row.
    """

    steps: int = 80
    mode: str = "bfs"
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.mode not in ("dfs", "bfs"):
            raise ValueError(f"walk mode must be 'dfs' or 'bfs', got {self.mode!r}")


@dataclass(frozen=True)
class JointSimilarity:
    """Pairwise distance, kernel, label-overlap and combined similarity matrices."""

    dist: np.ndarray
    gauss: np.ndarray
    jaccard: np.ndarray
    joint: np.ndarray
    sigma: float


@dataclass(frozen=True)
class NeighborhoodGraph:
    """Symmetrized walk counts with degree vector and graph Laplacian.

    ``counts`` is None when the graph was reloaded from a dump and the raw
    walk counts are no longer available.
    """

    counts: np.ndarray | None
    s: np.ndarray
    degree: np.ndarray
    laplacian: np.ndarray


@dataclass
class WalkDiagnostics:
    sigma: float | None = None
    isolated: list = field(default_factory=list)
    early_terminations: list = field(default_factory=list)  # (origin, steps_taken)

    def to_json(self):
        return json.dumps({
            "sigma": self.sigma,
            "isolated_rows": [int(i) for i in self.isolated],
            "early_terminations": [{"origin": int(o), "steps_taken": int(s)}
                                   for o, s in self.early_terminations],
        }, sort_keys=True)


def pairwise_distances(X):
    """Euclidean distance matrix between rows of X (symmetric, zero diagonal)."""
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("feature matrix contains NaN or Inf")
    if X.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(X, metric="euclidean"))


def gaussian_weights(dist, sigma):
    """Gaussian kernel exp(-d^2 / sigma^2) applied elementwise."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    dist = np.asarray(dist, dtype=np.float64)
    return np.exp(-(dist ** 2) / sigma ** 2)


def jaccard_matrix(Y):
    """Pairwise Jaccard overlap of binary label rows; the diagonal is zero.

    Pairs where both label sets are empty get overlap 0.
    """
    Y = np.asarray(Y, dtype=np.float64)
    inner = Y @ Y.T
    sizes = np.diag(inner)
    union = sizes[:, None] + sizes[None, :] - inner
    with np.errstate(invalid="ignore", divide="ignore"):
        R = np.where(union > 0, inner / np.where(union > 0, union, 1.0), 0.0)
    np.fill_diagonal(R, 0.0)
    return R


def median_sigma(dist):
    """Median of the nonzero distances; 1.0 when every distance is zero."""
    nz = dist[dist > 0]
    return float(np.median(nz)) if nz.size else 1.0


def joint_similarity(X, Y, sigma="median"):
    """Combine feature and label similarity into one matrix.

    ``sigma`` is either the literal "median" (median nonzero pairwise
    distance) or a positive kernel width.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y)
    if X.shape[0] != Y.shape[0]:
        raise ValueError(f"row mismatch: {X.shape[0]} feature rows vs {Y.shape[0]} label rows")
    dist = pairwise_distances(X)
    sigma_value = median_sigma(dist) if sigma == "median" else float(sigma)
    gauss = gaussian_weights(dist, sigma_value)
    jac = jaccard_matrix(Y)
    return JointSimilarity(dist=dist, gauss=gauss, jaccard=jac,
                           joint=gauss * jac, sigma=sigma_value)


def transition_matrix(T, fallback=None):
    """Row-normalize a nonnegative similarity matrix into transition probabilities.

    Rows of T that sum to zero are flagged isolated; when ``fallback`` (for
    instance the Gaussian kernel matrix) is given, such a row is replaced by
    its normalized fallback row. Rows that stay zero leave the walker with
    nowhere to go.

    Returns (P, isolated) with ``isolated`` the flagged row indices.
    """
    T = np.asarray(T, dtype=np.float64)
    if (T < 0).any():
        raise ValueError("similarity matrix must be nonnegative")
    sums = T.sum(axis=1)
    isolated = np.flatnonzero(sums == 0)
    P = np.zeros_like(T)
    live = sums > 0
    P[live] = T[live] / sums[live, None]
    if fallback is not None:
        fallback = np.asarray(fallback, dtype=np.float64)
        for i in isolated:
            total = fallback[i].sum()
            if total > 0:
                P[i] = fallback[i] / total
    return P, isolated.tolist()


def _origin_rng(seed, origin):
    # Per-origin stream: walks stay identical whether origins run
    # sequentially or in parallel, and in any order.
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(origin,)))


def _draw(rng, cumulative, total, size=None):
    u = rng.random(size) * total
    return np.searchsorted(cumulative, u, side="right")


def random_walk_counts(P, cfg):
    """Visit counts of per-origin random walks over transition matrix P.

    counts[i, j] is how often a walk started at i landed on j. BFS draws
    every step from the origin's own row, so each non-degenerate origin
    contributes exactly ``cfg.steps`` counts. DFS follows a path, zeroing
    the probability of stepping straight back to the node it just left
    (on a per-origin working copy) and renormalizing; a walk whose current
    row empties out stops early.

    Returns (counts, early_terminations); the latter lists
    (origin, steps_taken) for walks that stopped before ``cfg.steps``.
    """
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    counts = np.zeros((n, n), dtype=np.int64)
    early = []
    for origin in range(n):
        rng = _origin_rng(cfg.seed, origin)
        row = P[origin]
        total = row.sum()
        if total <= 0:
            continue  # isolated origin: count row stays zero
        if cfg.mode == "bfs":
            landed = _draw(rng, np.cumsum(row), total, size=cfg.steps)
            counts[origin] = np.bincount(landed, minlength=n)
        else:
            overrides = {}
            current = origin
            for step in range(cfg.steps):
                row = overrides.get(current, P[current])
                total = row.sum()
                if total <= 0:
                    early.append((origin, step))
                    break
                nxt = int(_draw(rng, np.cumsum(row), total))
                counts[origin, nxt] += 1
                nxt_row = np.array(overrides.get(nxt, P[nxt]), copy=True)
                if nxt_row[current] != 0:
                    nxt_row[current] = 0.0
                    remaining = nxt_row.sum()
                    if remaining > 0:
                        nxt_row /= remaining
                overrides[nxt] = nxt_row
                current = nxt
    return counts, early


def neighborhood_graph(counts):
    """Symmetrize walk counts into a neighborhood graph with its Laplacian."""
    counts = np.asarray(counts)
    if (counts < 0).any():
        raise ValueError("walk counts must be nonnegative")
    s = (counts + counts.T) / 2.0
    degree = s.sum(axis=1)
    laplacian = np.diag(degree) - s
    return NeighborhoodGraph(counts=counts, s=s, degree=degree, laplacian=laplacian)


def build_graph(X, Y, cfg, sigma="median"):
    """Full pipeline: joint similarity -> transition matrix -> walks -> graph.

    Returns (NeighborhoodGraph, WalkDiagnostics).
    """
    sim = joint_similarity(X, Y, sigma=sigma)
    P, isolated = transition_matrix(sim.joint, fallback=sim.gauss)
    counts, early = random_walk_counts(P, cfg)
    graph = neighborhood_graph(counts)
    diag = WalkDiagnostics(sigma=sim.sigma, isolated=isolated, early_terminations=early)
    return graph, diag


def dump_edges(graph, path):
    """Write nonzero entries of S as tab-separated ``i j s_ij`` lines sorted by (i, j)."""
    with open(path, "w", encoding="utf-8") as fh:
        rows, cols = np.nonzero(graph.s)
        for i, j in zip(rows, cols):
            fh.write(f"{i}\t{j}\t{float(graph.s[i, j])!r}\n")


def load_edges(path, n):
    """Rebuild a NeighborhoodGraph from a dump written by :func:`dump_edges`."""
    s = np.zeros((n, n))
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'i j s_ij'")
            i, j, value = int(parts[0]), int(parts[1]), float(parts[2])
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"{path}:{lineno}: index out of range for n={n}")
            s[i, j] = value
    if not np.allclose(s, s.T):
        raise ValueError(f"{path}: stored graph is not symmetric")
    degree = s.sum(axis=1)
    return NeighborhoodGraph(counts=None, s=s, degree=degree, laplacian=np.diag(degree) - s)
