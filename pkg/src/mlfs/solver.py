"""Alternating closed-form solver for the jointly regularized selection objective.

Minimizes, over a coefficient matrix W (features x labels) and bias row b,

    1/2 ||X W + 1 b - Y||_F^2
    + alpha/2 * tr(W^T X^T L X W)
    + beta/2 * (rho * sum_i ||w_i||_2 + (1 - rho) * ||W||_F^2)

where L is a graph Laplacian over the training instances. The row-norm sum
is handled by iterative reweighting: each pass solves a symmetric positive
definite linear system for W, then refreshes the reweighting diagonal from
the new row norms. Features are ranked by the row norms of W.
"""

from dataclasses import dataclass
import re

import numpy as np
import scipy.linalg


class SolverError(RuntimeError):
    """The linear system could not be solved reliably."""


@dataclass(frozen=True)
class SolverParams:
    alpha: float = 0.1      # manifold weight
    beta: float = 10.0      # regularization weight
    rho: float = 0.5        # row-sparsity vs Frobenius mix
    max_iters: int = 50
    tol: float = 1e-6
    epsilon: float = 1e-64  # reweighting floor

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be > 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0 or self.epsilon <= 0:
            raise ValueError("tol and epsilon must be positive")

    def to_json_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "rho": self.rho,
                "max_iters": self.max_iters, "tol": self.tol, "epsilon": self.epsilon}


@dataclass
class SolverState:
    coef: np.ndarray           # (p, m)
    bias: np.ndarray           # (m,)
    reweight_diag: np.ndarray  # (p,) strictly positive
    objective_trace: list
    iterations: int
    converged: bool


@dataclass(frozen=True)
class FeatureRanking:
    scores: np.ndarray  # (p,) row norms of the coefficient matrix
    order: np.ndarray   # feature indices, descending score, ties by index


# Relative slack allowed on the (theoretically non-increasing) objective.
MONOTONE_SLACK = 1e-9


def objective(X, Y, laplacian, coef, bias, params):
    """Objective value using the true row-norm penalty (not its surrogate)."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    coef = np.asarray(coef, dtype=np.float64)
    if X.shape[1] != coef.shape[0] or Y.shape[1] != coef.shape[1] or X.shape[0] != Y.shape[0]:
        raise ValueError("inconsistent shapes for objective evaluation")
    residual = X @ coef + np.asarray(bias).reshape(1, -1) - Y
    value = 0.5 * float(np.sum(residual * residual))
    if params.alpha != 0:
        if laplacian is None:
            raise ValueError("alpha != 0 requires a graph Laplacian")
        projected = X @ coef
        value += 0.5 * params.alpha * float(np.sum(projected * (laplacian @ projected)))
    row_norms = np.linalg.norm(coef, axis=1)
    value += 0.5 * params.beta * (params.rho * float(row_norms.sum())
                                  + (1.0 - params.rho) * float(np.sum(coef * coef)))
    return value


def update_bias(X, Y, coef):
    """Bias that zeroes the residual column means: mean(Y - X W) per label."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    return Y.mean(axis=0) - X.mean(axis=0) @ np.asarray(coef, dtype=np.float64)


def update_reweight(coef, epsilon):
    """Reweighting diagonal 1 / max(2 ||w_i||_2, epsilon); strictly positive."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    row_norms = np.linalg.norm(np.asarray(coef, dtype=np.float64), axis=1)
    return 1.0 / np.maximum(2.0 * row_norms, epsilon)


def _spd_solve(A, B):
    if not np.all(np.isfinite(A)):
        raise SolverError("system matrix has non-finite entries")
    try:
        factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        match = re.search(r"(\d+)", str(exc))
        pivot = int(match.group(1)) if match else -1
        raise SolverError(f"factorization failed at pivot {pivot}: {exc}") from exc
    W = scipy.linalg.cho_solve(factor, B, check_finite=False)
    residual = np.linalg.norm(A @ W - B) / max(1.0, np.linalg.norm(B))
    if residual > 1e-8:
        raise SolverError(f"linear solve residual {residual:.3e} exceeds 1e-8")
    return W


def _system_pieces(X, Y, laplacian, params):
    # Centering absorbs the bias: with Xc = X - mean(X), X^T H X = Xc^T Xc
    # and X^T H Y = Xc^T Y.
    Xc = X - X.mean(axis=0)
    base = Xc.T @ Xc
    if params.alpha != 0:
        if laplacian is None:
            raise ValueError("alpha != 0 requires a graph Laplacian")
        M = X.T @ (laplacian @ X)
        base = base + 0.5 * params.alpha * (M + M.T)
    base = base + params.beta * (1.0 - params.rho) * np.eye(X.shape[1])
    return base, Xc.T @ Y


def update_coef(X, Y, laplacian, reweight_diag, params):
    """Coefficient matrix solving the reweighted normal equations.

    Solves (X^T (H + alpha L) X + beta (1-rho) I + beta rho U) W = X^T H Y
    with H the centering projection and U = diag(reweight_diag), via a
    Cholesky factorization with a residual check.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    base, rhs = _system_pieces(X, Y, laplacian, params)
    A = base
    if params.rho != 0:
        A = base + np.diag(params.beta * params.rho * np.asarray(reweight_diag, dtype=np.float64))
    return _spd_solve(A, rhs)


def fit(X, Y, graph, params):
    """Alternate coefficient solves and reweighting until the objective settles.

    ``graph`` is a NeighborhoodGraph (may be None when alpha is 0). The
    reweighting diagonal starts at the identity. Stops when the relative
    objective change drops below ``params.tol`` or after ``max_iters``
    passes; the objective trace is checked to be non-increasing up to a
    tiny relative slack on every call.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape[0] != Y.shape[0]:
        raise ValueError("feature and label row counts differ")
    laplacian = None
    if graph is not None:
        laplacian = graph.laplacian
        if laplacian.shape[0] != X.shape[0]:
            raise ValueError("graph size does not match the instance count")

    p = X.shape[1]
    base, rhs = _system_pieces(X, Y, laplacian, params)
    u = np.ones(p)
    trace = []
    converged = False
    coef = np.zeros((p, Y.shape[1]))
    bias = np.zeros(Y.shape[1])
    for _ in range(params.max_iters):
        A = base + np.diag(params.beta * params.rho * u) if params.rho != 0 else base
        coef = _spd_solve(A, rhs)
        bias = update_bias(X, Y, coef)
        value = objective(X, Y, laplacian, coef, bias, params)
        if trace:
            previous = trace[-1]
            if value > previous + MONOTONE_SLACK * max(1.0, abs(previous)):
                raise SolverError(f"objective increased from {previous!r} to {value!r}")
        trace.append(value)
        u = update_reweight(coef, params.epsilon)
        if len(trace) >= 2 and abs(trace[-2] - trace[-1]) / max(abs(trace[-2]), 1.0) < params.tol:
            converged = True
            break
    return SolverState(coef=coef, bias=bias, reweight_diag=u, objective_trace=trace,
                       iterations=len(trace), converged=converged)


def rank_features(state):
    """Features ordered by descending coefficient row norm, ties by ascending index."""
    scores = np.linalg.norm(state.coef, axis=1)
    order = np.argsort(-scores, kind="stable")
    return FeatureRanking(scores=scores, order=order)


def select_top(ranking, count):
    """First ``count`` feature indices of the ranking."""
    p = ranking.order.size
    if not 1 <= count <= p:
        raise ValueError(f"feature count must lie in [1, {p}], got {count}")
    return [int(i) for i in ranking.order[:count]]


def selection_record(state, params, selected):
    """JSON-ready summary of a fitted selection run."""
    ranking_scores = np.linalg.norm(state.coef, axis=1)
    return {
        "selected_indices": [int(i) for i in selected],
        "scores": [float(ranking_scores[i]) for i in selected],
        "objective_trace": [float(v) for v in state.objective_trace],
        "iterations": state.iterations,
        "converged": state.converged,
        "params": params.to_json_dict(),
    }
