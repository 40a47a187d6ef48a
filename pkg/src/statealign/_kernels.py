"""Numba-compiled dynamic-programming kernels for sequence alignment.

The kernels operate on 1-d float64 arrays and implement the classic warping
recursion with the symmetric step set {(1,0), (0,1), (1,1)} anchored at both
endpoints, using absolute difference as the pointwise distance.  They release
the GIL so pairwise work can run on a thread pool.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_INF = np.inf


@njit(cache=True, nogil=True)
def dtw_cost(a, b):  # pragma: no cover - exercised via align module
    """Minimal cumulative alignment cost between 1-d float arrays a and b."""
    la = a.shape[0]
    lb = b.shape[0]
    prev = np.empty(lb, dtype=np.float64)
    curr = np.empty(lb, dtype=np.float64)
    # first row: only horizontal moves from (0,0)
    acc = 0.0
    for j in range(lb):
        acc += abs(a[0] - b[j])
        prev[j] = acc
    for i in range(1, la):
        curr[0] = prev[0] + abs(a[i] - b[0])
        for j in range(1, lb):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if curr[j - 1] < best:
                best = curr[j - 1]
            curr[j] = best + abs(a[i] - b[j])
        prev, curr = curr, prev
    return prev[lb - 1]


@njit(cache=True, nogil=True)
def dtw_table(a, b):  # pragma: no cover - exercised via align module
    """Full cumulative-cost table for path backtracing."""
    la = a.shape[0]
    lb = b.shape[0]
    table = np.empty((la, lb), dtype=np.float64)
    acc = 0.0
    for j in range(lb):
        acc += abs(a[0] - b[j])
        table[0, j] = acc
    for i in range(1, la):
        table[i, 0] = table[i - 1, 0] + abs(a[i] - b[0])
        for j in range(1, lb):
            best = table[i - 1, j - 1]
            if table[i - 1, j] < best:
                best = table[i - 1, j]
            if table[i, j - 1] < best:
                best = table[i, j - 1]
            table[i, j] = best + abs(a[i] - b[j])
    return table


@njit(cache=True, nogil=True)
def shift_profile(a, b, tau_max):  # pragma: no cover - exercised via align
    """Alignment cost for every truncation shift in [-tau_max, tau_max].

    Entry k corresponds to tau = k - tau_max.  For tau >= 0 the first n-tau
    entries of a are aligned against the last n-tau entries of b; negative
    tau swaps the roles.
    """
    n = a.shape[0]
    out = np.empty(2 * tau_max + 1, dtype=np.float64)
    for k in range(2 * tau_max + 1):
        tau = k - tau_max
        if tau >= 0:
            out[k] = dtw_cost(a[: n - tau], b[tau:])
        else:
            out[k] = dtw_cost(a[-tau:], b[: n + tau])
    return out


def warm_up() -> None:
    """Trigger JIT compilation once so later calls run at full speed."""
    x = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 2.0])
    dtw_cost(x, y)
    dtw_table(x, y)
    shift_profile(x, np.array([1.0, 0.0, 2.0]), 1)
