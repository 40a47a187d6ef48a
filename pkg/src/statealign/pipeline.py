"""End-to-end analysis: CSV ingestion, pipeline orchestration, report emission.

``ingest_csv`` turns a long-format CSV export into validated
:class:`~statealign.model.TimeSeriesSegment` objects that share one sampling
stride and one time window.  ``run_pipeline`` drives the full chain — model
fit, residual extraction, standardization, discretization, pairwise
alignment, clustering, per-cluster scoring, root-cause ranking — and
assembles a :class:`CausalityReport`.  ``emit_outputs`` writes the report as
byte-stable machine-readable JSON plus a human-readable summary and
plot-ready CSV files.

Ingestion policy
----------------
Rows are grouped by ``series_id`` and sorted by timestamp.  Within a series,
gaps of at most 2 consecutive missing points on the sampling grid are filled
by linear interpolation (and flagged in the series metadata); a longer gap
drops the series with :class:`InsufficientOverlapWarning`.  Timestamp
differences that are not multiples of the series' own modal stride, or a
stride that differs from the corpus-wide modal stride, drop the series with
:class:`IrregularStrideWarning`.  Retained series are trimmed to the modal
(start, end) coverage so that every segment shares identical timestamps.
Window bounds, when given, are inclusive epoch-seconds applied before any of
the above.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import warnings
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .align import PairwiseMatrices, pairwise_alignment
from .cluster import (
    ClusterResult,
    gini_impurity,
    rank_root_causes,
    sac_dtw_cluster,
)
from .config import PipelineConfig
from .discretize import (
    StateSequence,
    hmm_decode,
    hmm_fit,
    standardize,
    threshold_discretize,
)
from .errors import (
    ContractViolation,
    DegenerateSeries,
    DegenerateSeriesWarning,
    InsufficientOverlapWarning,
    IrregularStrideWarning,
    ParseError,
    StateAlignError,
)
from .model import (
    SeriesMeta,
    TimeSeriesSegment,
    extract_residuals,
    fit_local_level,
    kalman_filter,
    kalman_smooth,
    smooth_view_of_filter,
)
from .simulate import classification_error

__all__ = [
    "PairRecord",
    "ClusterRecord",
    "SeriesTrace",
    "EvaluationBlock",
    "CausalityReport",
    "ingest_csv",
    "run_pipeline",
    "emit_outputs",
]

_REQUIRED_COLUMNS = ("timestamp", "series_id", "value")
_GROUP_LABEL_COLUMN = "group_label"
_INTERPOLATED_KEY = "interpolated_points"
_MAX_GAP_POINTS = 2
_OUTPUT_FORMATS = ("json", "summary", "plots")
_REPORT_SCHEMA = "statealign-report-v1"

# Cluster-call thresholds: a cluster whose minimum pairwise causality index
# sits below the low mark is annotated as shift-explainable ("C"); one above
# the high mark as not shift-explainable ("NC"); anything between is left
# open ("-").
_CALL_LOW = 0.2
_CALL_HIGH = 0.6


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------


def _parse_error(row: int, column: str | None, detail: str) -> ParseError:
    where = f"row {row}" if column is None else f"row {row}, column {column!r}"
    err = ParseError(f"{where}: {detail}")
    err.row = row
    err.column = column
    return err


@dataclass
class _RawSeries:
    """Accumulator for one series while scanning the file."""

    rows: list[tuple[int, float, int]] = field(default_factory=list)
    labels: dict[str, str] = field(default_factory=dict)
    group_label: str | None = None


def _modal(counter: Counter, prefer_large: bool = False) -> int:
    """Most common value; ties break toward the smallest (or largest) value."""
    sign = -1 if prefer_large else 1
    return sorted(counter.items(), key=lambda kv: (-kv[1], sign * kv[0]))[0][0]


def _scan_rows(
    reader, header: list[str], window: tuple[int, int] | None
) -> dict[str, _RawSeries]:
    col = {name: header.index(name) for name in header}
    extra = [h for h in header if h not in _REQUIRED_COLUMNS]
    series: dict[str, _RawSeries] = {}
    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        rownum = reader.line_num
        if len(row) != len(header):
            raise _parse_error(
                rownum, None, f"expected {len(header)} fields, got {len(row)}"
            )
        sid = row[col["series_id"]].strip()
        if not sid:
            raise _parse_error(rownum, "series_id", "empty series id")
        raw_ts = row[col["timestamp"]].strip()
        try:
            ts = int(raw_ts)
        except ValueError:
            raise _parse_error(
                rownum, "timestamp", f"not an integer epoch-second: {raw_ts!r}"
            ) from None
        raw_val = row[col["value"]].strip()
        try:
            val = float(raw_val)
        except ValueError:
            raise _parse_error(rownum, "value", f"not a number: {raw_val!r}") from None
        if not math.isfinite(val):
            raise _parse_error(rownum, "value", f"non-finite value: {raw_val!r}")
        if window is not None and not window[0] <= ts <= window[1]:
            continue
        rec = series.setdefault(sid, _RawSeries())
        rec.rows.append((ts, val, rownum))
        for name in extra:
            value = row[col[name]].strip()
            if not value:
                continue
            if name == _GROUP_LABEL_COLUMN:
                if rec.group_label is None:
                    rec.group_label = value
                elif rec.group_label != value:
                    raise _parse_error(
                        rownum,
                        name,
                        f"series {sid!r} has conflicting values "
                        f"{rec.group_label!r} and {value!r}",
                    )
            elif name not in rec.labels:
                rec.labels[name] = value
            elif rec.labels[name] != value:
                raise _parse_error(
                    rownum,
                    name,
                    f"series {sid!r} has conflicting values "
                    f"{rec.labels[name]!r} and {value!r}",
                )
    return series


def _regularize(
    sid: str, rec: _RawSeries
) -> tuple[np.ndarray, np.ndarray, int, int] | None:
    """Sort, de-gap, and validate one series; None means the series is dropped."""
    order = sorted(range(len(rec.rows)), key=lambda i: rec.rows[i][0])
    ts = np.array([rec.rows[i][0] for i in order], dtype=np.int64)
    vals = np.array([rec.rows[i][1] for i in order], dtype=np.float64)
    rownums = [rec.rows[i][2] for i in order]
    dup = np.flatnonzero(np.diff(ts) == 0)
    if dup.size:
        i = int(dup[0])
        raise _parse_error(
            max(rownums[i], rownums[i + 1]),
            "timestamp",
            f"duplicate timestamp {int(ts[i])} for series {sid!r}",
        )
    if ts.size < 2:
        warnings.warn(
            f"{sid}: fewer than 2 points in the window; series dropped",
            InsufficientOverlapWarning,
            stacklevel=3,
        )
        return None
    diffs = np.diff(ts)
    stride = _modal(Counter(int(d) for d in diffs))
    offbeat = sorted({int(d) for d in diffs if d % stride != 0})
    if offbeat:
        warnings.warn(
            f"{sid}: timestamp differences {offbeat} are not multiples of the "
            f"stride {stride}s; series dropped",
            IrregularStrideWarning,
            stacklevel=3,
        )
        return None
    gaps = [int(d) // stride - 1 for d in diffs if int(d) > stride]
    if gaps and max(gaps) > _MAX_GAP_POINTS:
        warnings.warn(
            f"{sid}: gap of {max(gaps)} consecutive missing points exceeds the "
            f"interpolation limit of {_MAX_GAP_POINTS}; series dropped",
            InsufficientOverlapWarning,
            stacklevel=3,
        )
        return None
    grid = np.arange(ts[0], ts[-1] + stride, stride, dtype=np.int64)
    values = np.interp(grid, ts, vals)
    return grid, values, stride, int(grid.size - ts.size)


def ingest_csv(
    path: str | Path, window: tuple[int, int] | None = None
) -> list[TimeSeriesSegment]:
    """Read a long-format CSV into segments sharing one stride and window.

    The file must have columns ``timestamp`` (integer epoch-seconds),
    ``series_id``, and ``value``; every additional column becomes a metadata
    label on the series, and a column named ``group_label`` populates the
    ground-truth grouping used for evaluation.  ``window`` is an inclusive
    (start, end) pair of epoch-seconds.  Series that cannot be reconciled
    with the corpus stride or coverage are dropped with a warning; the
    survivors come back in file order with identical timestamps.
    """
    path = Path(path)
    if window is not None:
        window = (int(window[0]), int(window[1]))
        if window[0] >= window[1]:
            raise ContractViolation(
                f"window start {window[0]} must be < end {window[1]}"
            )
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise _parse_error(1, None, "empty file") from None
        dup_headers = sorted({h for h in header if header.count(h) > 1})
        if dup_headers:
            raise _parse_error(1, dup_headers[0], "duplicate column name")
        missing = [c for c in _REQUIRED_COLUMNS if c not in header]
        if missing:
            raise _parse_error(1, missing[0], "required column missing")
        series = _scan_rows(reader, header, window)

    regular: dict[str, tuple[np.ndarray, np.ndarray, int, int]] = {}
    for sid, rec in series.items():
        out = _regularize(sid, rec)
        if out is not None:
            regular[sid] = out
    if not regular:
        return []

    corpus_stride = _modal(Counter(stride for _, _, stride, _ in regular.values()))
    on_stride = {
        sid: out for sid, out in regular.items() if out[2] == corpus_stride
    }
    for sid, out in regular.items():
        if out[2] != corpus_stride:
            warnings.warn(
                f"{sid}: stride {out[2]}s differs from the corpus stride "
                f"{corpus_stride}s; series dropped",
                IrregularStrideWarning,
                stacklevel=2,
            )

    t_start = _modal(Counter(int(g[0]) for g, _, _, _ in on_stride.values()))
    t_end = _modal(
        Counter(int(g[-1]) for g, _, _, _ in on_stride.values()), prefer_large=True
    )
    segments: list[TimeSeriesSegment] = []
    for sid, (grid, values, _, n_interp) in on_stride.items():
        if int(grid[0]) > t_start or int(grid[-1]) < t_end:
            warnings.warn(
                f"{sid}: covers [{int(grid[0])}, {int(grid[-1])}] but the corpus "
                f"window is [{t_start}, {t_end}]; series dropped",
                InsufficientOverlapWarning,
                stacklevel=2,
            )
            continue
        keep = (grid >= t_start) & (grid <= t_end)
        labels = dict(series[sid].labels)
        if n_interp > 0 and _INTERPOLATED_KEY not in labels:
            labels[_INTERPOLATED_KEY] = str(n_interp)
        meta = SeriesMeta(
            dimension_labels=tuple(sorted(labels.items())),
            group_label=series[sid].group_label,
        )
        segments.append(
            TimeSeriesSegment(
                series_id=sid,
                timestamps=grid[keep],
                values=values[keep],
                meta=meta,
            )
        )
    return segments


# ---------------------------------------------------------------------------
# report types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairRecord:
    """Alignment products for one unordered series pair (u before v)."""

    series_u: str
    series_v: str
    d_opt_zero: float
    d_opt_best: float
    dci: float
    best_tau: int


@dataclass(frozen=True)
class ClusterRecord:
    """One row of the cluster table."""

    cluster_id: int
    members: tuple[str, ...]
    causality_score: float
    raw_min_shifted_cost: float | None
    dci_avg: float
    call: str


@dataclass(frozen=True)
class SeriesTrace:
    """Per-series state sequence plus provenance flags, for plotting."""

    series_id: str
    timestamps: tuple[int, ...]
    states: tuple[int, ...]
    state_labels: tuple[str, ...]
    group_label: str | None
    degenerate: bool
    interpolated_points: int


@dataclass(frozen=True)
class EvaluationBlock:
    """Truth-label scoring, present only when every series carries a label."""

    gini_per_cluster: Mapping[int, float]
    gini_weighted: float
    classification_error: float
    error_by_m_max: Mapping[int, float]


@dataclass(frozen=True)
class CausalityReport:
    """Everything one analysis run decided, traceable to config and input.

    ``pairs`` holds the alignment products for every unordered series pair;
    ``clusters`` is the cluster table with per-cluster causality scores; and
    ``rankings`` maps each cluster with at least two members to its
    root-cause ordering as (series_id, precedence) entries.
    """

    config: Mapping[str, Any]
    input_digest: str
    series_ids: tuple[str, ...]
    tau_max: int
    pairs: tuple[PairRecord, ...]
    n_clusters: int
    medoids: tuple[str, ...]
    within_cost: float
    selection_curve: Mapping[int, Mapping[str, float]]
    clusters: tuple[ClusterRecord, ...]
    rankings: Mapping[int, tuple[tuple[str, int], ...]]
    traces: tuple[SeriesTrace, ...]
    evaluation: EvaluationBlock | None

    def to_mapping(self) -> dict[str, Any]:
        """JSON-serializable view of the full report."""
        out: dict[str, Any] = {
            "schema": _REPORT_SCHEMA,
            "config": dict(self.config),
            "input_digest": self.input_digest,
            "series_ids": list(self.series_ids),
            "tau_max": self.tau_max,
            "pairs": [
                {
                    "series_u": p.series_u,
                    "series_v": p.series_v,
                    "d_opt_zero": p.d_opt_zero,
                    "d_opt_best": p.d_opt_best,
                    "dci": p.dci,
                    "best_tau": p.best_tau,
                }
                for p in self.pairs
            ],
            "clustering": {
                "n_clusters": self.n_clusters,
                "medoids": list(self.medoids),
                "within_cost": self.within_cost,
                "selection_curve": {
                    str(m): dict(curve) for m, curve in self.selection_curve.items()
                },
            },
            "clusters": [
                {
                    "cluster_id": c.cluster_id,
                    "members": list(c.members),
                    "causality_score": c.causality_score,
                    "raw_min_shifted_cost": c.raw_min_shifted_cost,
                    "dci_avg": c.dci_avg,
                    "call": c.call,
                }
                for c in self.clusters
            ],
            "rankings": {
                str(cid): [[sid, prec] for sid, prec in entries]
                for cid, entries in self.rankings.items()
            },
            "traces": [
                {
                    "series_id": t.series_id,
                    "timestamps": list(t.timestamps),
                    "states": list(t.states),
                    "state_labels": list(t.state_labels),
                    "group_label": t.group_label,
                    "degenerate": t.degenerate,
                    "interpolated_points": t.interpolated_points,
                }
                for t in self.traces
            ],
            "evaluation": None,
        }
        if self.evaluation is not None:
            ev = self.evaluation
            out["evaluation"] = {
                "gini_per_cluster": {
                    str(c): g for c, g in ev.gini_per_cluster.items()
                },
                "gini_weighted": ev.gini_weighted,
                "classification_error": ev.classification_error,
                "error_by_m_max": {
                    str(m): e for m, e in ev.error_by_m_max.items()
                },
            }
        return out


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _input_digest(segments: Sequence[TimeSeriesSegment]) -> str:
    h = hashlib.sha256()
    for seg in segments:
        h.update(seg.series_id.encode())
        h.update(b"\x00")
        h.update(seg.timestamps.tobytes())
        h.update(seg.values.tobytes())
        h.update(repr(seg.meta.dimension_labels).encode())
        h.update(repr(seg.meta.group_label).encode())
        h.update(b"\x01")
    return f"sha256:{h.hexdigest()}"


def _reraise(exc: StateAlignError, stage: str, series_id: str | None = None):
    where = f"stage {stage}" if series_id is None else f"series {series_id!r}, stage {stage}"
    raise type(exc)(f"{where}: {exc}") from exc


def _standardized_residuals(
    segments: Sequence[TimeSeriesSegment], use_filter: bool
) -> tuple[list[np.ndarray | None], set[str]]:
    """Per-series z traces; None (plus a warning) marks a constant series."""
    z_traces: list[np.ndarray | None] = []
    degenerate: set[str] = set()
    for seg in segments:
        try:
            params = fit_local_level(seg)
        except DegenerateSeries:
            warnings.warn(
                f"{seg.series_id}: constant series; assigning the in-control "
                "state throughout",
                DegenerateSeriesWarning,
                stacklevel=3,
            )
            degenerate.add(seg.series_id)
            z_traces.append(None)
            continue
        except StateAlignError as exc:
            _reraise(exc, "fit", seg.series_id)
        try:
            filt = kalman_filter(params, seg)
        except StateAlignError as exc:
            _reraise(exc, "filter", seg.series_id)
        try:
            smooth = smooth_view_of_filter(filt) if use_filter else kalman_smooth(params, filt)
        except StateAlignError as exc:
            _reraise(exc, "smooth", seg.series_id)
        try:
            resid = extract_residuals(seg, smooth, params)
            z_traces.append(standardize(resid))
        except StateAlignError as exc:
            _reraise(exc, "residuals", seg.series_id)
    return z_traces, degenerate


def _discretize_all(
    segments: Sequence[TimeSeriesSegment],
    z_traces: Sequence[np.ndarray | None],
    config: PipelineConfig,
) -> list[StateSequence]:
    alphabet = config.state_alphabet()
    idle_rank = alphabet.size // 2 if alphabet.signed else 0

    def idle(seg: TimeSeriesSegment) -> StateSequence:
        ranks = np.full(len(seg), idle_rank, dtype=np.int64)
        return StateSequence(seg.series_id, ranks, alphabet)

    try:
        if config.state_method == "hmm":
            pool = [z for z in z_traces if z is not None]
            params = hmm_fit(pool, n_states=config.hmm_states) if pool else None
            return [
                idle(seg)
                if z is None
                else hmm_decode(params, z, series_id=seg.series_id, alphabet=alphabet)
                for seg, z in zip(segments, z_traces)
            ]
        return [
            idle(seg)
            if z is None
            else threshold_discretize(
                z, alphabet=alphabet, cuts=config.cuts, series_id=seg.series_id
            )
            for seg, z in zip(segments, z_traces)
        ]
    except StateAlignError as exc:
        _reraise(exc, "discretize")


def _cluster_table(
    result: ClusterResult, mats: PairwiseMatrices
) -> tuple[ClusterRecord, ...]:
    rows: list[ClusterRecord] = []
    for c in range(result.n_clusters):
        members = tuple(sorted(result.members(c)))
        idx = [mats.index_of(m) for m in members]
        if len(idx) >= 2:
            ii, jj = np.triu_indices(len(idx), k=1)
            sub = np.ix_(idx, idx)
            best = mats.d_opt_best[sub][ii, jj]
            dcis = mats.dci[sub][ii, jj]
            raw_min = float(best.min())
            dci_avg = float(dcis.mean())
        else:
            raw_min = None
            dci_avg = 1.0
        score = result.causality_scores[c]
        call = "C" if score < _CALL_LOW else ("NC" if score > _CALL_HIGH else "-")
        rows.append(
            ClusterRecord(
                cluster_id=c,
                members=members,
                causality_score=score,
                raw_min_shifted_cost=raw_min,
                dci_avg=dci_avg,
                call=call,
            )
        )
    return tuple(rows)


def _evaluate(
    result: ClusterResult,
    labels: Mapping[str, str],
    mats: PairwiseMatrices,
    config: PipelineConfig,
    m_eff: int,
) -> EvaluationBlock:
    gini_per, gini_weighted = gini_impurity(result.assignments, labels)
    error_by_m: dict[int, float] = {}
    for m in range(2, m_eff + 1):
        res_m = (
            result
            if m == m_eff
            else sac_dtw_cluster(
                mats.d_opt_zero,
                mats.dci,
                m_max=m,
                iter_max=config.iter_max,
                seed=config.seed,
                series_ids=mats.series_ids,
            )
        )
        error_by_m[m] = classification_error(res_m.assignments, labels)
    return EvaluationBlock(
        gini_per_cluster=dict(gini_per),
        gini_weighted=gini_weighted,
        classification_error=error_by_m[m_eff],
        error_by_m_max=error_by_m,
    )


def run_pipeline(
    config: PipelineConfig | None, segments: Sequence[TimeSeriesSegment]
) -> CausalityReport:
    """Run the full analysis over ingested segments.

    Per series: fit the local-level model, filter, smooth (unless the config
    selects the one-sided estimator), extract and standardize residuals, and
    discretize into states; a constant series skips the model and is assigned
    the in-control state throughout.  Then align all pairs under the shift
    budget, cluster on the zero-shift costs, score each cluster by its
    minimum pairwise causality index, and rank members of every cluster with
    at least two members.  Any error is re-raised with the series and stage
    named.  When every segment carries a ground-truth ``group_label``, the
    report gains an evaluation block (per-cluster Gini impurity,
    classification error, and the error curve over smaller cluster budgets).
    """
    config = config or PipelineConfig()
    segs = list(segments)
    if len(segs) < 2:
        raise ContractViolation(f"need at least 2 segments, got {len(segs)}")
    ids = [seg.series_id for seg in segs]
    dup = sorted({s for s in ids if ids.count(s) > 1})
    if dup:
        raise ContractViolation(f"duplicate series ids: {dup}")

    z_traces, degenerate = _standardized_residuals(
        segs, use_filter=config.estimator == "filter"
    )
    sequences = _discretize_all(segs, z_traces, config)

    min_len = min(len(seg) for seg in segs)
    try:
        mats = pairwise_alignment(
            sequences,
            tau_max=config.resolved_tau_max(min_len),
            normalize=config.path_normalize,
        )
    except StateAlignError as exc:
        _reraise(exc, "alignment")

    m_eff = min(config.m_max, len(segs))
    try:
        result = sac_dtw_cluster(
            mats.d_opt_zero,
            mats.dci,
            m_max=m_eff,
            iter_max=config.iter_max,
            seed=config.seed,
            series_ids=mats.series_ids,
        )
    except StateAlignError as exc:
        _reraise(exc, "clustering")

    pairs = tuple(
        PairRecord(
            series_u=ids[i],
            series_v=ids[j],
            d_opt_zero=float(mats.d_opt_zero[i, j]),
            d_opt_best=float(mats.d_opt_best[i, j]),
            dci=float(mats.dci[i, j]),
            best_tau=int(mats.best_tau[i, j]),
        )
        for i in range(len(ids))
        for j in range(i + 1, len(ids))
    )
    clusters = _cluster_table(result, mats)

    rankings: dict[int, tuple[tuple[str, int], ...]] = {}
    for record in clusters:
        if len(record.members) < 2:
            rankings[record.cluster_id] = ()
            continue
        try:
            ranking = rank_root_causes(record.members, mats, sequences)
        except StateAlignError as exc:
            _reraise(exc, f"ranking (cluster {record.cluster_id})")
        rankings[record.cluster_id] = ranking.entries

    labels = {seg.series_id: seg.meta.group_label for seg in segs}
    evaluation = None
    if all(labels.values()):
        try:
            evaluation = _evaluate(result, labels, mats, config, m_eff)
        except StateAlignError as exc:
            _reraise(exc, "evaluation")

    meta_by_id = {seg.series_id: seg.meta for seg in segs}
    traces = tuple(
        SeriesTrace(
            series_id=seg.series_id,
            timestamps=tuple(int(t) for t in seg.timestamps),
            states=tuple(int(s) for s in seq.states),
            state_labels=seq.labels,
            group_label=meta_by_id[seg.series_id].group_label,
            degenerate=seg.series_id in degenerate,
            interpolated_points=int(
                dict(meta_by_id[seg.series_id].dimension_labels).get(
                    _INTERPOLATED_KEY, "0"
                )
            ),
        )
        for seg, seq in zip(segs, sequences)
    )

    return CausalityReport(
        config=config.to_mapping(),
        input_digest=_input_digest(segs),
        series_ids=tuple(ids),
        tau_max=int(mats.tau_max),
        pairs=pairs,
        n_clusters=result.n_clusters,
        medoids=result.medoids,
        within_cost=result.within_cost,
        selection_curve={
            int(m): dict(curve) for m, curve in result.selection_curve.items()
        },
        clusters=clusters,
        rankings=rankings,
        traces=traces,
        evaluation=evaluation,
    )


# ---------------------------------------------------------------------------
# emission
# ---------------------------------------------------------------------------


def _round6(obj: Any) -> Any:
    """Round every float to 6 significant digits, recursively."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {k: _round6(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round6(v) for v in obj]
    return obj


def _fmt(x: Any) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _summary_text(report: CausalityReport) -> str:
    lines: list[str] = []
    lines.append("state-aligned causality analysis")
    lines.append("=" * 32)
    lines.append("")
    lines.append(f"series analyzed : {len(report.series_ids)}")
    lines.append(f"input digest    : {report.input_digest}")
    lines.append(f"shift budget    : {report.tau_max}")
    lines.append(
        f"clusters chosen : {report.n_clusters} "
        f"(m_max {report.config.get('m_max')}, within-cost {_fmt(report.within_cost)})"
    )
    lines.append(f"medoids         : {' '.join(report.medoids)}")
    lines.append("")
    lines.append("cluster table")
    lines.append("-" * 13)
    header = (
        f"{'cluster':>7}  {'size':>4}  {'score':>7}  {'dci-avg':>8}  "
        f"{'min-shift-cost':>14}  {'call':>4}  members"
    )
    lines.append(header)
    for rec in report.clusters:
        raw = "-" if rec.raw_min_shifted_cost is None else _fmt(rec.raw_min_shifted_cost)
        lines.append(
            f"{rec.cluster_id:>7}  {len(rec.members):>4}  "
            f"{_fmt(rec.causality_score):>7}  {_fmt(rec.dci_avg):>8}  "
            f"{raw:>14}  {rec.call:>4}  {' '.join(rec.members)}"
        )
    lines.append("")
    lines.append("root-cause ranking (clusters with at least 2 members)")
    lines.append("-" * 53)
    ranked_any = False
    for cid in sorted(report.rankings):
        entries = report.rankings[cid]
        if not entries:
            continue
        ranked_any = True
        ordered = " > ".join(f"{sid} ({prec:+d})" for sid, prec in entries)
        lines.append(f"cluster {cid}: {ordered}")
    if not ranked_any:
        lines.append("(no cluster has 2 or more members)")
    if report.evaluation is not None:
        ev = report.evaluation
        lines.append("")
        lines.append("evaluation (ground-truth labels present)")
        lines.append("-" * 40)
        lines.append(f"classification error : {_fmt(ev.classification_error)}")
        lines.append(f"weighted gini        : {_fmt(ev.gini_weighted)}")
        per = " ".join(
            f"{c}={_fmt(g)}" for c, g in sorted(ev.gini_per_cluster.items())
        )
        lines.append(f"per-cluster gini     : {per}")
        curve = " ".join(
            f"{m}={_fmt(e)}" for m, e in sorted(ev.error_by_m_max.items())
        )
        lines.append(f"error by m_max       : {curve}")
    lines.append("")
    return "\n".join(lines)


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])


def emit_outputs(
    report: CausalityReport,
    out_dir: str | Path,
    formats: Sequence[str] = _OUTPUT_FORMATS,
) -> tuple[Path, ...]:
    """Write the report to ``out_dir``; returns the paths written.

    ``formats`` selects among ``"json"`` (machine-readable report),
    ``"summary"`` (human-readable table), and ``"plots"`` (CSV files with the
    pairwise causality-index samples, per-cluster scores, per-series state
    traces, and — when the evaluation block is present — the classification
    error against the cluster budget).  All numbers are written with 6
    significant digits and the content depends only on the report, so
    repeated runs are byte-identical.
    """
    unknown = sorted(set(formats) - set(_OUTPUT_FORMATS))
    if unknown:
        raise ContractViolation(
            f"unknown output formats: {unknown}; expected subset of {_OUTPUT_FORMATS}"
        )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "json" in formats:
        path = out / "report.json"
        payload = json.dumps(
            _round6(report.to_mapping()), sort_keys=True, indent=2, allow_nan=False
        )
        _write_text(path, payload + "\n")
        written.append(path)

    if "summary" in formats:
        path = out / "summary.txt"
        _write_text(path, _summary_text(report))
        written.append(path)

    if "plots" in formats:
        plots = out / "plots"
        plots.mkdir(exist_ok=True)
        path = plots / "dci_pairs.csv"
        _write_csv(
            path,
            ["series_u", "series_v", "d_opt_zero", "d_opt_best", "dci", "best_tau"],
            [
                [p.series_u, p.series_v, p.d_opt_zero, p.d_opt_best, p.dci, p.best_tau]
                for p in report.pairs
            ],
        )
        written.append(path)
        path = plots / "cluster_scores.csv"
        _write_csv(
            path,
            ["cluster_id", "size", "causality_score", "dci_avg", "call"],
            [
                [c.cluster_id, len(c.members), c.causality_score, c.dci_avg, c.call]
                for c in report.clusters
            ],
        )
        written.append(path)
        path = plots / "state_traces.csv"
        _write_csv(
            path,
            ["series_id", "timestamp", "state_rank", "state_label"],
            [
                [t.series_id, ts, s, lab]
                for t in report.traces
                for ts, s, lab in zip(t.timestamps, t.states, t.state_labels)
            ],
        )
        written.append(path)
        if report.evaluation is not None:
            path = plots / "error_vs_m_max.csv"
            _write_csv(
                path,
                ["m_max", "classification_error"],
                sorted(report.evaluation.error_by_m_max.items()),
            )
            written.append(path)

    return tuple(written)
