"""Independent reference implementations used to cross-check the library.

Each oracle computes the same quantity as a library routine by a structurally
different method — direct joint-Gaussian conditioning for the smoother,
explicit enumeration of monotone warping paths for the aligner, exhaustive
path scoring for the state decoder — so agreement is evidence of correctness
rather than repetition of the same algorithm.
"""

from __future__ import annotations

import functools
import itertools
import math

import numpy as np


def joint_gaussian_smoothed_means(params, y) -> np.ndarray:
    """Posterior state means by conditioning the joint Gaussian directly.

    The model is X_0 ~ N(x0, p0), X_{t+1} = c X_t + w_t with w ~ N(0, q),
    Y_t = a X_t + v_t with v ~ N(0, r).  The joint of (X, Y) is Gaussian, so
    E[X | Y = y] follows from one linear solve against Cov(Y) — no forward or
    backward recursion involved.
    """
    y = np.asarray(y, dtype=np.float64)
    T = y.size
    mean_x = np.empty(T)
    mean_x[0] = params.x0
    for t in range(1, T):
        mean_x[t] = params.c * mean_x[t - 1]
    var_x = np.empty(T)
    var_x[0] = params.p0
    for t in range(1, T):
        var_x[t] = params.c * params.c * var_x[t - 1] + params.q
    cov = np.empty((T, T))
    for s in range(T):
        for t in range(s, T):
            cov[s, t] = cov[t, s] = var_x[s] * params.c ** (t - s)
    cov_yy = params.a * params.a * cov + params.r * np.eye(T)
    cov_xy = params.a * cov
    return mean_x + cov_xy @ np.linalg.solve(cov_yy, y - params.a * mean_x)


@functools.lru_cache(maxsize=None)
def monotone_path_arrays(m: int, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Every monotone path from (0,0) to (m-1,n-1), padded to equal length.

    Steps increment the first index, the second, or both.  Returns row/column
    index arrays of shape (n_paths, m+n-1) plus a validity mask; padded slots
    point at (0,0) and are masked out.
    """
    paths: list[list[tuple[int, int]]] = []
    acc: list[tuple[int, int]] = [(0, 0)]

    def walk(i: int, j: int) -> None:
        if i == m - 1 and j == n - 1:
            paths.append(acc.copy())
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < m and nj < n:
                acc.append((ni, nj))
                walk(ni, nj)
                acc.pop()

    walk(0, 0)
    length = m + n - 1
    rows = np.zeros((len(paths), length), dtype=np.int64)
    cols = np.zeros((len(paths), length), dtype=np.int64)
    mask = np.zeros((len(paths), length), dtype=bool)
    for p, path in enumerate(paths):
        for k, (i, j) in enumerate(path):
            rows[p, k] = i
            cols[p, k] = j
            mask[p, k] = True
    return rows, cols, mask


def brute_dtw_cost(a, b) -> float:
    """Minimum cumulative |a_i - b_j| over all enumerated monotone paths."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    rows, cols, mask = monotone_path_arrays(a.size, b.size)
    costs = (np.abs(a[rows] - b[cols]) * mask).sum(axis=1)
    return float(costs.min())


def brute_dtw_costs_batch(a, batch: np.ndarray) -> np.ndarray:
    """``brute_dtw_cost(a, row)`` for every row of ``batch`` at once."""
    a = np.asarray(a, dtype=np.float64)
    batch = np.asarray(batch, dtype=np.float64)
    rows, cols, mask = monotone_path_arrays(a.size, batch.shape[1])
    diffs = np.abs(a[rows][None, :, :] - batch[:, cols]) * mask[None, :, :]
    return diffs.sum(axis=2).min(axis=1)


def _emission_log_density(params, magnitudes: np.ndarray) -> np.ndarray:
    d = magnitudes[:, None] - params.emit_means[None, :]
    dens = np.exp(-0.5 * d * d / params.emit_vars[None, :]) / np.sqrt(
        2.0 * math.pi * params.emit_vars[None, :]
    )
    return np.log(np.maximum(dens, 1e-300))


def state_path_log_prob(params, z, path) -> float:
    """Joint log-probability of one state path for the magnitude model."""
    m = np.abs(np.asarray(z, dtype=np.float64))
    log_dens = _emission_log_density(params, m)
    log_trans = np.log(np.maximum(params.trans, 1e-300))
    log_pi = np.log(np.maximum(params.init_probs, 1e-300))
    path = list(path)
    total = log_pi[path[0]] + log_dens[0, path[0]]
    for t in range(1, len(path)):
        total += log_trans[path[t - 1], path[t]] + log_dens[t, path[t]]
    return float(total)


def brute_best_path_log_prob(params, z) -> float:
    """Max joint log-probability over every possible state path."""
    T = len(np.asarray(z))
    best = -math.inf
    for path in itertools.product(range(params.n_states), repeat=T):
        best = max(best, state_path_log_prob(params, z, path))
    return best
