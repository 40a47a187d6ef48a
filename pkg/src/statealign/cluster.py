"""Clustering of series by alignment cost, and root-cause ranking.

Series are grouped with a k-medoids (PAM) search over the pairwise alignment
cost matrix; the cluster count is selected by mean silhouette over a range of
candidate counts.  Each cluster then gets a causality score (the minimum
pairwise causality index among its members — low means some member leads the
others), and members of a suspect cluster are ranked by how often they lead
their peers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .align import PairwiseMatrices
from .discretize import StateSequence
from .errors import BadDistanceMatrix, ContractViolation, MissingLabels

_MAX_SWEEPS = 100
_SYMMETRY_TOL = 1e-9


@dataclass(frozen=True)
class ClusterResult:
    """Outcome of clustering series on the pairwise alignment cost matrix."""

    n_clusters: int
    assignments: Mapping[str, int]
    medoids: tuple[str, ...]
    within_cost: float
    causality_scores: Mapping[int, float]
    selection_curve: Mapping[int, Mapping[str, float]]

    def members(self, cluster_id: int) -> tuple[str, ...]:
        return tuple(sid for sid, c in self.assignments.items() if c == cluster_id)


@dataclass(frozen=True)
class RootCauseRanking:
    """Members of one cluster ordered from most likely origin downward."""

    entries: tuple[tuple[str, int], ...]

    @property
    def top(self) -> str:
        if not self.entries:
            raise ContractViolation("ranking is empty")
        return self.entries[0][0]


def _validate_square(mat: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise BadDistanceMatrix(f"{name} must be a square 2-d matrix, got shape {arr.shape}")
    return arr


def _validate_distance_matrix(dmat: np.ndarray) -> np.ndarray:
    arr = _validate_square(dmat, "distance matrix")
    if arr.shape[0] == 0:
        raise BadDistanceMatrix("distance matrix is empty")
    if not np.all(np.isfinite(arr)):
        raise BadDistanceMatrix("distance matrix contains non-finite entries")
    if np.any(arr < 0):
        raise BadDistanceMatrix("distance matrix contains negative entries")
    diag = np.abs(np.diagonal(arr))
    if diag.max(initial=0.0) > _SYMMETRY_TOL:
        raise BadDistanceMatrix("distance matrix has a nonzero diagonal")
    asym = np.abs(arr - arr.T).max(initial=0.0)
    if asym > _SYMMETRY_TOL:
        raise BadDistanceMatrix(f"distance matrix is asymmetric (max deviation {asym:g})")
    return arr


def _assign(dmat: np.ndarray, medoids: tuple[int, ...]) -> np.ndarray:
    """Nearest-medoid labels; ties go to the earlier medoid in sorted order."""
    sub = dmat[:, list(medoids)]
    return np.argmin(sub, axis=1)


def _within_cost(dmat: np.ndarray, medoids: tuple[int, ...], labels: np.ndarray) -> float:
    cols = np.fromiter((medoids[c] for c in labels), dtype=np.int64, count=labels.shape[0])
    return float(dmat[np.arange(labels.shape[0]), cols].sum())


def _update_medoids(
    dmat: np.ndarray, medoids: tuple[int, ...], labels: np.ndarray
) -> tuple[int, ...]:
    """One medoid-update step; deterministic under cost ties and duplicates."""
    n = dmat.shape[0]
    chosen: list[int] = []
    used: set[int] = set()
    for c, old in enumerate(medoids):
        members = np.flatnonzero(labels == c)
        if members.size == 0:
            candidate_order: list[int] = [old]
        else:
            costs = dmat[np.ix_(members, members)].sum(axis=1)
            order = np.lexsort((members, costs))
            candidate_order = [int(members[k]) for k in order]
        pick = next((m for m in candidate_order if m not in used), None)
        if pick is None:
            pick = next(i for i in range(n) if i not in used)
        chosen.append(pick)
        used.add(pick)
    return tuple(sorted(chosen))


def _pam(dmat: np.ndarray, init: tuple[int, ...]) -> tuple[float, tuple[int, ...], np.ndarray]:
    """Alternating assign/update sweeps from one initial medoid set.

    Returns the best (cost, medoids, labels) state seen, so the result never
    regresses even if a pathological tie cycle hits the sweep cap.
    """
    medoids = tuple(sorted(init))
    labels = _assign(dmat, medoids)
    best_cost = _within_cost(dmat, medoids, labels)
    best_medoids, best_labels = medoids, labels
    for _ in range(_MAX_SWEEPS):
        new_medoids = _update_medoids(dmat, medoids, labels)
        if new_medoids == medoids:
            break
        medoids = new_medoids
        labels = _assign(dmat, medoids)
        cost = _within_cost(dmat, medoids, labels)
        if cost < best_cost or (cost == best_cost and medoids < best_medoids):
            best_cost, best_medoids, best_labels = cost, medoids, labels
    return best_cost, best_medoids, best_labels


def _silhouette(dmat: np.ndarray, labels: np.ndarray, n_clusters: int) -> float:
    """Mean silhouette; singleton members and all-zero spreads score 0."""
    n = dmat.shape[0]
    if n_clusters < 2:
        return 0.0
    members = [np.flatnonzero(labels == c) for c in range(n_clusters)]
    total = 0.0
    for i in range(n):
        own = members[labels[i]]
        if own.size <= 1:
            continue
        a = dmat[i, own].sum() / (own.size - 1)
        b = np.inf
        for c in range(n_clusters):
            if c == labels[i] or members[c].size == 0:
                continue
            b = min(b, float(dmat[i, members[c]].mean()))
        if not np.isfinite(b):
            continue
        denom = max(a, b)
        if denom > 0.0:
            total += (b - a) / denom
    return total / n


def _farthest_member(dmat: np.ndarray, medoids: tuple[int, ...], labels: np.ndarray) -> int:
    """Point farthest from its medoid (first such on ties, skipping medoids)."""
    n = dmat.shape[0]
    cols = np.fromiter((medoids[c] for c in labels), dtype=np.int64, count=n)
    dist = dmat[np.arange(n), cols].copy()
    dist[list(medoids)] = -1.0
    pick = int(np.argmax(dist))
    if dist[pick] < 0.0:
        pick = next(i for i in range(n) if i not in medoids)
    return pick


def cluster_causality_score(members: Sequence[int], dci: np.ndarray) -> float:
    """Minimum pairwise causality index within one cluster (singletons: 1.0)."""
    arr = _validate_square(np.asarray(dci, dtype=np.float64), "dci matrix")
    idx = [int(m) for m in members]
    for m in idx:
        if not 0 <= m < arr.shape[0]:
            raise ContractViolation(f"member index {m} outside matrix of size {arr.shape[0]}")
    if len(idx) < 2:
        return 1.0
    best = np.inf
    for pos, i in enumerate(idx):
        for j in idx[pos + 1 :]:
            best = min(best, float(arr[i, j]))
    return best


def sac_dtw_cluster(
    dmat: np.ndarray,
    dci: np.ndarray,
    m_max: int,
    iter_max: int = 10,
    seed: int = 0,
    series_ids: Sequence[str] | None = None,
) -> ClusterResult:
    """Cluster series on the alignment cost matrix and score each cluster.

    For every candidate cluster count M in [2, min(m_max, n)], a PAM search
    runs from ``iter_max`` seeded random starts plus one warm start derived
    from the previous M's best medoids (its medoids plus the member farthest
    from them), which makes the within-cost curve non-increasing in M.  The
    final M maximises mean silhouette, breaking ties toward fewer clusters.
    """
    dist = _validate_distance_matrix(dmat)
    n = dist.shape[0]
    if n < 2:
        raise BadDistanceMatrix("need at least 2 series to cluster")
    dci_arr = _validate_square(np.asarray(dci, dtype=np.float64), "dci matrix")
    if dci_arr.shape[0] != n:
        raise BadDistanceMatrix(
            f"dci matrix shape {dci_arr.shape} does not match distance matrix size {n}"
        )
    if series_ids is None:
        ids = tuple(str(i) for i in range(n))
    else:
        if len(series_ids) != n:
            raise ContractViolation("series_ids length must match matrix size")
        ids = tuple(str(s) for s in series_ids)
        if len(set(ids)) != n:
            raise ContractViolation("series_ids must be unique")
    m_max = int(m_max)
    if not 2 <= m_max <= n:
        raise ContractViolation(f"m_max must be in [2, {n}], got {m_max}")
    iter_max = int(iter_max)
    if iter_max < 1:
        raise ContractViolation("iter_max must be >= 1")

    # Global medoid seeds the first warm start.
    row_sums = dist.sum(axis=1)
    global_medoid = int(np.argmin(row_sums))

    candidate_ms = range(2, m_max + 1)
    curve: dict[int, dict[str, float]] = {}
    results: dict[int, tuple[float, tuple[int, ...], np.ndarray, float]] = {}

    prev_medoids: tuple[int, ...] = (global_medoid,)
    prev_labels = np.zeros(n, dtype=np.int64)
    for m in candidate_ms:
        warm = tuple(sorted(set(prev_medoids) | {_farthest_member(dist, prev_medoids, prev_labels)}))
        inits = [warm]
        for restart in range(iter_max):
            rng = np.random.default_rng([seed, m, restart])
            inits.append(tuple(sorted(int(i) for i in rng.choice(n, size=m, replace=False))))
        best: tuple[float, tuple[int, ...], np.ndarray] | None = None
        for init in inits:
            cost, medoids, labels = _pam(dist, init)
            if best is None or (cost, medoids) < (best[0], best[1]):
                best = (cost, medoids, labels)
        assert best is not None
        cost, medoids, labels = best
        sil = _silhouette(dist, labels, m)
        curve[m] = {"within_cost": cost, "silhouette": sil}
        results[m] = (cost, medoids, labels, sil)
        prev_medoids, prev_labels = medoids, labels

    chosen_m = max(results, key=lambda m: (results[m][3], -m))
    cost, medoids, labels, _ = results[chosen_m]

    scores = {
        c: cluster_causality_score(np.flatnonzero(labels == c), dci_arr)
        for c in range(chosen_m)
    }
    return ClusterResult(
        n_clusters=chosen_m,
        assignments={ids[i]: int(labels[i]) for i in range(n)},
        medoids=tuple(ids[m] for m in medoids),
        within_cost=cost,
        causality_scores=scores,
        selection_curve=curve,
    )


def gini_impurity(
    assignments: Mapping[str, int], truth_labels: Mapping[str, str]
) -> tuple[dict[int, float], float]:
    """Gini impurity of true labels per cluster, plus size-weighted average.

    Each cluster's impurity is 1 minus the sum of squared truth-group
    proportions among its members; the second return value weights the
    per-cluster values by cluster size.
    """
    if not assignments:
        raise MissingLabels("no assignments to score")
    missing = sorted(set(assignments) - set(truth_labels))
    if missing:
        raise MissingLabels(f"no truth label for: {missing}")
    per_cluster: dict[int, float] = {}
    sizes: dict[int, int] = {}
    for c in sorted({int(c) for c in assignments.values()}):
        members = [truth_labels[sid] for sid, a in assignments.items() if int(a) == c]
        counts = [members.count(lbl) for lbl in sorted(set(members))]
        # Integer arithmetic with a single final division keeps simple
        # fractions (1/2, 2/3, ...) correctly rounded rather than drifting by
        # an ulp through per-group squares.
        size = len(members)
        per_cluster[c] = (size * size - sum(k * k for k in counts)) / (size * size)
        sizes[c] = size
    n = len(assignments)
    weighted = float(sum(per_cluster[c] * sizes[c] for c in per_cluster) / n)
    return per_cluster, weighted


def _first_extreme_entry(seq: StateSequence) -> int:
    """First time index whose state rank is extreme; len(seq) if none."""
    extreme = seq.alphabet.extreme_ranks
    for t, rank in enumerate(seq.states):
        if int(rank) in extreme:
            return t
    return len(seq)


def rank_root_causes(
    members: Sequence[str],
    matrices: PairwiseMatrices,
    sequences: Sequence[StateSequence],
) -> RootCauseRanking:
    """Order one cluster's members from most likely origin downward.

    Each member's score counts how many cluster peers it leads minus how many
    it trails (sign of the best shift against each peer).  Ties break toward
    the member that first entered an extreme state, then by series id.
    """
    ids = [str(m) for m in members]
    if len(ids) < 2:
        raise ContractViolation("need at least 2 cluster members to rank")
    if len(set(ids)) != len(ids):
        raise ContractViolation("member ids must be unique")
    by_id = {seq.series_id: seq for seq in sequences}
    missing = [m for m in ids if m not in by_id]
    if missing:
        raise MissingLabels(f"no state sequence for members: {missing}")

    indices = {m: matrices.index_of(m) for m in ids}
    scored: list[tuple[int, int, str]] = []
    for m in ids:
        i = indices[m]
        precedence = 0
        for other in ids:
            if other == m:
                continue
            precedence += int(np.sign(matrices.best_tau[i, indices[other]]))
        scored.append((precedence, _first_extreme_entry(by_id[m]), m))

    scored.sort(key=lambda item: (-item[0], item[1], item[2]))
    return RootCauseRanking(entries=tuple((m, p) for p, _, m in scored))
