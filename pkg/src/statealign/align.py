"""Alignment of discrete state sequences and shift-based causality scoring.

The alignment cost is the classic monotone warping distance over state ranks
(absolute rank difference, both endpoints anchored, steps right/down/diagonal).
Shifting one sequence against the other by a truncation lag ``tau`` and
comparing the best shifted cost against the unshifted cost yields a causality
index in [0, 1]: values near 0 mean one series replays the other's states
after a delay, values near 1 mean no shift explains the pair any better than
no shift at all.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .discretize import StateSequence
from .errors import (
    AlphabetMismatch,
    ContractViolation,
    EmptySequence,
    ShiftTooLarge,
)

WORKERS_ENV_VAR = "STATEALIGN_WORKERS"


def state_distance(rank_a: float, rank_b: float) -> float:
    """Pointwise distance between two state ranks (absolute difference)."""
    return float(abs(float(rank_a) - float(rank_b)))


@dataclass(frozen=True)
class WarpPath:
    """Monotone alignment path: pairs of indices into the two sequences."""

    points: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ContractViolation("warp path must contain at least one point")

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, idx: int) -> tuple[int, int]:
        return self.points[idx]


@dataclass(frozen=True)
class AlignmentResult:
    """Outcome of aligning two state sequences."""

    cost: float
    path: WarpPath


@dataclass(frozen=True)
class DCIResult:
    """Causality index between an ordered pair of state sequences."""

    dci: float
    best_tau: int
    d_opt_zero: float
    d_opt_best: float
    tau_profile: Mapping[int, float] = field(repr=False)


@dataclass(frozen=True)
class PairwiseMatrices:
    """Symmetric pairwise alignment products for a set of sequences."""

    series_ids: tuple[str, ...]
    d_opt_zero: np.ndarray
    d_opt_best: np.ndarray
    dci: np.ndarray
    best_tau: np.ndarray
    tau_max: int

    def index_of(self, series_id: str) -> int:
        try:
            return self.series_ids.index(series_id)
        except ValueError:
            raise KeyError(f"unknown series_id {series_id!r}") from None


# ---------------------------------------------------------------------------
# array-level internals (shared by the state pipeline and the raw baseline)
# ---------------------------------------------------------------------------


def _as_float_array(values: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ContractViolation("alignment expects 1-d sequences")
    return arr


def _backtrace(table: np.ndarray) -> tuple[tuple[int, int], ...]:
    """Optimal path through a cumulative-cost table.

    Prefers diagonal over vertical over horizontal predecessors, so ties
    resolve to the shortest (most diagonal) path.
    """
    i = table.shape[0] - 1
    j = table.shape[1] - 1
    rev: list[tuple[int, int]] = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag = table[i - 1, j - 1]
            vert = table[i - 1, j]
            horz = table[i, j - 1]
            if diag <= vert and diag <= horz:
                i -= 1
                j -= 1
            elif vert <= horz:
                i -= 1
            else:
                j -= 1
        rev.append((i, j))
    return tuple(reversed(rev))


def alignment_cost_arrays(
    a: np.ndarray, b: np.ndarray, normalize: bool = False
) -> float:
    """Alignment cost between two already-validated float arrays.

    With ``normalize`` the cost is divided by the length of the optimal
    path (the shortest one under the backtrace tie rules).
    """
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySequence("cannot align an empty sequence")
    if not normalize:
        return float(_kernels.dtw_cost(a, b))
    table = _kernels.dtw_table(a, b)
    return float(table[-1, -1]) / len(_backtrace(table))


def shifted_cost_arrays(
    a: np.ndarray, b: np.ndarray, tau: int, normalize: bool = False
) -> float:
    """Alignment cost after truncating by shift ``tau`` (positive: b lags a)."""
    n = min(a.shape[0], b.shape[0])
    if abs(tau) >= n:
        raise ShiftTooLarge(f"|tau|={abs(tau)} must be < sequence length {n}")
    if tau >= 0:
        return alignment_cost_arrays(a[: a.shape[0] - tau], b[tau:], normalize)
    return alignment_cost_arrays(a[-tau:], b[: b.shape[0] + tau], normalize)


def default_tau_max(n: int) -> int:
    """Default shift budget for sequences of length n."""
    return max(1, n // 4)


def _validate_tau_max(n: int, tau_max: int | None) -> int:
    if tau_max is None:
        return default_tau_max(n)
    tau_max = int(tau_max)
    upper = max(1, n // 3)
    if not 1 <= tau_max <= upper:
        raise ShiftTooLarge(
            f"tau_max={tau_max} outside valid range [1, {upper}] for length {n}"
        )
    return tau_max


def causality_profile_arrays(
    a: np.ndarray, b: np.ndarray, tau_max: int, normalize: bool = False
) -> tuple[dict[int, float], float, int, float]:
    """Shift profile plus (d_opt_zero, best_tau, d_opt_best) for two arrays.

    Ties between shifts are broken toward the smallest |tau|, and toward the
    negative shift when magnitudes tie.
    """
    if normalize:
        profile = {
            tau: shifted_cost_arrays(a, b, tau, normalize=True)
            for tau in range(-tau_max, tau_max + 1)
        }
    else:
        costs = _kernels.shift_profile(a, b, tau_max)
        profile = {
            tau: float(costs[tau + tau_max]) for tau in range(-tau_max, tau_max + 1)
        }
    d_zero = profile[0]
    best_tau = 0
    d_best = d_zero
    for mag in range(1, tau_max + 1):
        for tau in (-mag, mag):
            cost = profile[tau]
            if cost < d_best:
                d_best = cost
                best_tau = tau
    return profile, d_zero, best_tau, d_best


# ---------------------------------------------------------------------------
# public operations on state sequences
# ---------------------------------------------------------------------------


def _check_pair(a: StateSequence, b: StateSequence) -> tuple[np.ndarray, np.ndarray]:
    if len(a) == 0 or len(b) == 0:
        raise EmptySequence("cannot align an empty state sequence")
    if a.alphabet.labels != b.alphabet.labels:
        raise AlphabetMismatch(
            f"sequences use different alphabets: {a.alphabet.labels} vs {b.alphabet.labels}"
        )
    return (
        np.ascontiguousarray(a.states, dtype=np.float64),
        np.ascontiguousarray(b.states, dtype=np.float64),
    )


def dtw(a: StateSequence, b: StateSequence, normalize: bool = False) -> AlignmentResult:
    """Full alignment between two state sequences, with backtraced path.

    Backtracing prefers diagonal over vertical over horizontal predecessors,
    so ties resolve to the shortest (most diagonal) path.  With ``normalize``
    the cost is divided by the path length (off by default: the causality
    index is a ratio of costs, so path length cancels out of it anyway).
    """
    arr_a, arr_b = _check_pair(a, b)
    table = _kernels.dtw_table(arr_a, arr_b)
    path = WarpPath(_backtrace(table))
    cost = float(table[-1, -1])
    if normalize:
        cost /= len(path)
    return AlignmentResult(cost=cost, path=path)


def shifted_dtw(
    a: StateSequence,
    b: StateSequence,
    tau: int,
    tau_max: int | None = None,
    normalize: bool = False,
) -> float:
    """Alignment cost after shifting b behind a by ``tau`` steps.

    Positive tau drops the first tau entries of b and the last tau entries of
    a, so a low cost at positive tau means a's states happen first.
    """
    arr_a, arr_b = _check_pair(a, b)
    tau = int(tau)
    if tau_max is not None and abs(tau) > int(tau_max):
        raise ShiftTooLarge(f"|tau|={abs(tau)} exceeds tau_max={tau_max}")
    return shifted_cost_arrays(arr_a, arr_b, tau, normalize)


def causality_index(
    a: StateSequence,
    b: StateSequence,
    tau_max: int | None = None,
    normalize: bool = False,
) -> DCIResult:
    """Directional causality index between two state sequences.

    dci = (best shifted cost) / (unshifted cost); a zero unshifted cost means
    the sequences already align perfectly, so the pair is scored 1.0 (no lag
    explains anything better) with best_tau = 0.
    """
    arr_a, arr_b = _check_pair(a, b)
    n = min(arr_a.shape[0], arr_b.shape[0])
    tau_max = _validate_tau_max(n, tau_max)
    profile, d_zero, best_tau, d_best = causality_profile_arrays(
        arr_a, arr_b, tau_max, normalize
    )
    if d_zero == 0.0:
        return DCIResult(
            dci=1.0,
            best_tau=0,
            d_opt_zero=0.0,
            d_opt_best=0.0,
            tau_profile=profile,
        )
    return DCIResult(
        dci=float(d_best / d_zero),
        best_tau=int(best_tau),
        d_opt_zero=float(d_zero),
        d_opt_best=float(d_best),
        tau_profile=profile,
    )


def resolve_workers(workers: int | None = None) -> int:
    """Worker count for pairwise alignment (arg, else env var, else CPUs)."""
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR)
        if env is not None:
            try:
                workers = int(env)
            except ValueError:
                raise ContractViolation(
                    f"{WORKERS_ENV_VAR} must be an integer, got {env!r}"
                ) from None
        else:
            workers = min(os.cpu_count() or 1, 8)
    workers = int(workers)
    if workers < 1:
        raise ContractViolation("worker count must be >= 1")
    return workers


def pairwise_from_arrays(
    series_ids: Sequence[str],
    arrays: Sequence[np.ndarray],
    tau_max: int | None = None,
    workers: int | None = None,
    normalize: bool = False,
) -> PairwiseMatrices:
    """Pairwise shift/causality matrices over pre-validated float arrays.

    Each unordered pair is computed once; the mirrored direction follows from
    symmetry of the costs and antisymmetry of the best shift.  Results are
    identical regardless of worker count or scheduling order.
    """
    n_series = len(series_ids)
    if n_series != len(arrays):
        raise ContractViolation("series_ids and arrays must have equal length")
    if n_series == 0:
        raise EmptySequence("need at least one sequence")
    if len(set(series_ids)) != n_series:
        raise ContractViolation("series_ids must be unique")
    for arr in arrays:
        if arr.shape[0] == 0:
            raise EmptySequence("cannot align an empty sequence")
    n_min = min(arr.shape[0] for arr in arrays)
    tau_max = _validate_tau_max(n_min, tau_max)

    d_zero = np.zeros((n_series, n_series), dtype=np.float64)
    d_best = np.zeros((n_series, n_series), dtype=np.float64)
    dci = np.ones((n_series, n_series), dtype=np.float64)
    best_tau = np.zeros((n_series, n_series), dtype=np.int64)

    pairs = [(i, j) for i in range(n_series) for j in range(i + 1, n_series)]

    def compute(pair: tuple[int, int]) -> tuple[int, int, float, float, int, float]:
        i, j = pair
        profile, dz, bt, db = causality_profile_arrays(
            arrays[i], arrays[j], tau_max, normalize
        )
        if dz == 0.0:
            return i, j, 0.0, 0.0, 0, 1.0
        return i, j, dz, db, bt, db / dz

    n_workers = resolve_workers(workers)
    if n_workers == 1 or len(pairs) <= 1:
        results = [compute(p) for p in pairs]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(compute, pairs))

    for i, j, dz, db, bt, ratio in results:
        d_zero[i, j] = d_zero[j, i] = dz
        d_best[i, j] = d_best[j, i] = db
        dci[i, j] = dci[j, i] = ratio
        best_tau[i, j] = bt
        best_tau[j, i] = -bt

    return PairwiseMatrices(
        series_ids=tuple(series_ids),
        d_opt_zero=d_zero,
        d_opt_best=d_best,
        dci=dci,
        best_tau=best_tau,
        tau_max=tau_max,
    )


def pairwise_alignment(
    sequences: Sequence[StateSequence],
    tau_max: int | None = None,
    workers: int | None = None,
    normalize: bool = False,
) -> PairwiseMatrices:
    """Pairwise alignment matrices for a collection of state sequences."""
    if not sequences:
        raise EmptySequence("need at least one state sequence")
    first = sequences[0].alphabet.labels
    for seq in sequences[1:]:
        if seq.alphabet.labels != first:
            raise AlphabetMismatch("all sequences must share one alphabet")
    ids = [seq.series_id for seq in sequences]
    arrays = [np.ascontiguousarray(seq.states, dtype=np.float64) for seq in sequences]
    return pairwise_from_arrays(
        ids, arrays, tau_max=tau_max, workers=workers, normalize=normalize
    )
