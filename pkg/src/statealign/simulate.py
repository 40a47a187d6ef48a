"""Synthetic multi-series corpora with known anomaly propagation structure.

Each generated group shares one anomaly signature: a short train of additive
pulses with a chosen count, spacing and intensity, injected on top of a slow
random walk with bounded uniform observation noise.  In ``causal`` mode the
injection onset advances by a fixed lag from member to member, so the first
member of each group is the true origin.  Chains are packed toward the tail
of the window — the last member's final pulse lands one step before the last
index — because only trailing pulses sit inside the reach of an admissible
shift: clipping them is what lets a lagged pair explain itself better with a
shift than without one.  (Chains cannot be packed toward the head instead:
the state model initializes on the first observation, so a pulse at index
zero is absorbed into the initial level and never reaches the residuals; and
the final index is avoided because smoothing has only one-sided support
there, which inflates the local scale estimate and mutes a pulse placed on
it.)  In ``non_causal`` mode every member of a group is injected at the same
interior onset, far enough from both edges that no admissible shift explains
any pair better than no shift at all.

Group designs (cycled when there are more than five groups) differ in pulse
count and spacing so that groups remain distinguishable after
discretization, and each group's values are scaled by its own power of ten
to make raw-amplitude baselines struggle while state sequences do not.
Short-train designs emit at a higher gain: a group whose signature is one or
two beats has its whole identity riding on them, while a long train can
tolerate individually ambiguous beats.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, fields, replace
from typing import Any, Mapping, Sequence

import numpy as np

from .align import PairwiseMatrices, pairwise_alignment, pairwise_from_arrays
from .cluster import sac_dtw_cluster
from .config import PipelineConfig
from .discretize import StateSequence, hmm_decode, hmm_fit, standardize, threshold_discretize
from .errors import ContractViolation, DegenerateSeriesWarning, MissingLabels, SpecInvalid
from .model import SeriesMeta, TimeSeriesSegment, fit_and_smooth

_BASE_EPOCH = 1_700_000_000
_STRIDE_SECONDS = 60
_LEVEL_LOW, _LEVEL_HIGH = 80.0, 120.0
_NOISE_HALF_WIDTH = math.sqrt(3.0)  # unit-variance uniform observation noise
_WALK_STD = 0.4
_MIN_LENGTH = 24

EXPERIMENT_METHODS = ("sac_dtw_smoother", "sac_dtw_filter", "cdtw")


@dataclass(frozen=True)
class _GroupDesign:
    """One group's anomaly signature and injection placement.

    In causal mode the group's chain is packed toward the tail: the last
    member's final pulse lands one step before the last index, leaving every
    pulse two-sided smoothing support while keeping the trailing beats
    within reach of an admissible shift.  ``noncausal_frac`` positions the
    shared non-causal onset well inside the window so that no admissible
    shift can clip a pulse.  ``gain`` multiplies the injected amplitude;
    short trains carry it so their few beats never blur.
    """

    pulse_count: int
    pulse_spacing: int
    intensity_pick: int
    lag_pick: int
    noncausal_frac: float
    gain: float


_DESIGNS: tuple[_GroupDesign, ...] = (
    _GroupDesign(1, 4, 2, 0, 0.40, 1.5),
    _GroupDesign(2, 4, 2, 0, 0.56, 1.5),
    _GroupDesign(3, 8, 2, 0, 0.42, 1.0),
    _GroupDesign(4, 4, 2, 0, 0.30, 1.0),
    _GroupDesign(5, 6, 2, 0, 0.26, 1.0),
)


@dataclass(frozen=True)
class SimSpec:
    """Shape and randomness of one synthetic corpus."""

    n_groups: int = 5
    series_per_group: int = 10
    length: int = 50
    scale_exponents: tuple[float, ...] | None = None
    anomaly_intensities: tuple[float, ...] = (3.0, 5.0, 8.0)
    causal_lags: tuple[int, ...] = (1, 2, 3)
    mode: str = "causal"
    seed: int = 0

    def __post_init__(self) -> None:
        if not isinstance(self.n_groups, int) or self.n_groups < 1:
            raise SpecInvalid(f"n_groups: must be an integer >= 1, got {self.n_groups!r}")
        if not isinstance(self.series_per_group, int) or self.series_per_group < 2:
            raise SpecInvalid(
                f"series_per_group: must be an integer >= 2, got {self.series_per_group!r}"
            )
        if not isinstance(self.length, int) or self.length < _MIN_LENGTH:
            raise SpecInvalid(
                f"length: must be an integer >= {_MIN_LENGTH}, got {self.length!r}"
            )
        if self.mode not in ("causal", "non_causal"):
            raise SpecInvalid(f"mode: {self.mode!r} not one of ('causal', 'non_causal')")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise SpecInvalid(f"seed: must be a non-negative integer, got {self.seed!r}")
        try:
            intensities = tuple(float(v) for v in self.anomaly_intensities)
        except (TypeError, ValueError):
            raise SpecInvalid("anomaly_intensities: must be a sequence of numbers") from None
        if not intensities or any(not math.isfinite(v) or v <= 0 for v in intensities):
            raise SpecInvalid(
                f"anomaly_intensities: must be non-empty positive numbers, got {intensities}"
            )
        object.__setattr__(self, "anomaly_intensities", intensities)
        try:
            lags = tuple(int(v) for v in self.causal_lags)
        except (TypeError, ValueError):
            raise SpecInvalid("causal_lags: must be a sequence of integers") from None
        if not lags or any(v < 1 for v in lags):
            raise SpecInvalid(f"causal_lags: must be non-empty integers >= 1, got {lags}")
        object.__setattr__(self, "causal_lags", lags)
        if self.scale_exponents is None:
            derived = tuple(float(e) for e in np.linspace(0.0, 5.0, self.n_groups))
            object.__setattr__(self, "scale_exponents", derived)
        else:
            try:
                exps = tuple(float(e) for e in self.scale_exponents)
            except (TypeError, ValueError):
                raise SpecInvalid("scale_exponents: must be a sequence of numbers") from None
            if len(exps) != self.n_groups:
                raise SpecInvalid(
                    f"scale_exponents: need {self.n_groups} entries, got {len(exps)}"
                )
            if any(not math.isfinite(e) for e in exps):
                raise SpecInvalid("scale_exponents: entries must be finite")
            object.__setattr__(self, "scale_exponents", exps)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "SimSpec":
        """Build a spec from parsed JSON, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise SpecInvalid(f"unknown spec keys: {', '.join(unknown)}")
        kwargs: dict[str, Any] = dict(data)
        for name in ("scale_exponents", "anomaly_intensities", "causal_lags"):
            if kwargs.get(name) is not None:
                kwargs[name] = tuple(kwargs[name])
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, Any]:
        """JSON-serializable echo of this spec."""
        return {
            "n_groups": self.n_groups,
            "series_per_group": self.series_per_group,
            "length": self.length,
            "scale_exponents": list(self.scale_exponents),
            "anomaly_intensities": list(self.anomaly_intensities),
            "causal_lags": list(self.causal_lags),
            "mode": self.mode,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class InjectionRecord:
    """Ground truth for one series' injected anomaly."""

    series_id: str
    group_label: str
    onset: int
    lag: int
    intensity: float
    pulse_count: int
    pulse_spacing: int
    kept_cells: tuple[int, ...]
    scale_factor: float


@dataclass(frozen=True)
class SimDataset:
    """A generated corpus plus its injection ground truth."""

    segments: tuple[TimeSeriesSegment, ...]
    schedule: tuple[InjectionRecord, ...]
    spec: SimSpec

    @property
    def truth_labels(self) -> dict[str, str]:
        return {seg.series_id: seg.meta.group_label or "" for seg in self.segments}


def _train_span(design: _GroupDesign) -> int:
    return max(0, design.pulse_count - 1) * design.pulse_spacing


def _epicenters(spec: SimSpec) -> list[int]:
    """Per-group injection epicenters, guaranteed unique.

    In causal mode each group starts where its last member's final pulse
    lands one step before the last index.  Non-causal epicenters sit at an
    interior point clear of both edges by at least the default shift budget,
    so their trains cannot be clipped by any admissible shift.  Collisions
    (possible when designs cycle) are resolved by nudging within the window.
    """
    n = spec.length
    guard = max(1, n // 4)
    used: set[int] = set()
    out: list[int] = []
    for g in range(spec.n_groups):
        design = _DESIGNS[g % len(_DESIGNS)]
        span = _train_span(design)
        lag = spec.causal_lags[design.lag_pick % len(spec.causal_lags)]
        if spec.mode == "non_causal":
            lo = min(guard, max(0, n - 2 - span))
            hi = max(lo, n - 1 - guard - span)
            epicenter = min(max(int(round(design.noncausal_frac * n)), lo), hi)
        else:
            last = spec.series_per_group - 1
            lo, hi = 0, max(0, n - 2 - span)
            epicenter = min(max(n - 2 - span - last * lag, lo), hi)
        while epicenter in used and epicenter < hi:
            epicenter += 1
        while epicenter in used and epicenter > lo:
            epicenter -= 1
        if epicenter in used:
            raise SpecInvalid(
                f"cannot place a unique epicenter for group {g}; "
                f"length {n} is too small for {spec.n_groups} groups"
            )
        used.add(epicenter)
        out.append(epicenter)
    return out


def generate_dataset(spec: SimSpec) -> SimDataset:
    """Generate all series and the injection schedule for one spec.

    Every series draws from its own seeded generator keyed by
    (seed, group, member), so each series' values are independent of how many
    other groups or members exist.
    """
    segments: list[TimeSeriesSegment] = []
    schedule: list[InjectionRecord] = []
    n = spec.length
    timestamps = _BASE_EPOCH + _STRIDE_SECONDS * np.arange(n, dtype=np.int64)
    epicenters = _epicenters(spec)
    for g in range(spec.n_groups):
        design = _DESIGNS[g % len(_DESIGNS)]
        intensity = spec.anomaly_intensities[
            design.intensity_pick % len(spec.anomaly_intensities)
        ]
        lag = spec.causal_lags[design.lag_pick % len(spec.causal_lags)]
        scale = 10.0 ** spec.scale_exponents[g]
        group_label = f"g{g:02d}"
        for k in range(spec.series_per_group):
            rng = np.random.default_rng([spec.seed, g, k])
            level = rng.uniform(_LEVEL_LOW, _LEVEL_HIGH)
            noise = rng.uniform(-_NOISE_HALF_WIDTH, _NOISE_HALF_WIDTH, n)
            walk = np.cumsum(rng.normal(0.0, _WALK_STD, n))
            values = level + walk + noise
            onset = epicenters[g] + (k * lag if spec.mode == "causal" else 0)
            cells = tuple(
                onset + i * design.pulse_spacing
                for i in range(design.pulse_count)
                if 0 <= onset + i * design.pulse_spacing < n
            )
            for cell in cells:
                values[cell] += intensity * design.gain
            values *= scale
            series_id = f"g{g:02d}s{k:02d}"
            segments.append(
                TimeSeriesSegment(
                    series_id=series_id,
                    timestamps=timestamps,
                    values=values,
                    meta=SeriesMeta(group_label=group_label),
                )
            )
            schedule.append(
                InjectionRecord(
                    series_id=series_id,
                    group_label=group_label,
                    onset=onset,
                    lag=lag if spec.mode == "causal" else 0,
                    intensity=intensity * design.gain,
                    pulse_count=design.pulse_count,
                    pulse_spacing=design.pulse_spacing,
                    kept_cells=cells,
                    scale_factor=scale,
                )
            )
    return SimDataset(tuple(segments), tuple(schedule), spec)


def cdtw_baseline(
    segments: Sequence[TimeSeriesSegment], tau_max: int | None = None
) -> PairwiseMatrices:
    """Pairwise alignment matrices over min-max-normalized raw values.

    Each series is rescaled to [0, 1] before aligning; a constant series has
    no range, so it is mapped to a flat 0.5 and a warning is emitted.
    """
    if not segments:
        raise ContractViolation("need at least one segment")
    ids = [seg.series_id for seg in segments]
    arrays: list[np.ndarray] = []
    for seg in segments:
        values = np.asarray(seg.values, dtype=np.float64)
        lo = float(values.min())
        hi = float(values.max())
        if hi - lo == 0.0:
            warnings.warn(
                f"{seg.series_id}: constant series has no range; using flat 0.5",
                DegenerateSeriesWarning,
                stacklevel=2,
            )
            arrays.append(np.full(values.size, 0.5))
        else:
            arrays.append((values - lo) / (hi - lo))
    return pairwise_from_arrays(ids, arrays, tau_max=tau_max)


def classification_error(
    assignments: Mapping[str, int], labels: Mapping[str, str]
) -> float:
    """Fraction of series left unexplained by the best one-to-one matching.

    Clusters are greedily matched to true groups by overlap (largest first,
    ties toward the smaller cluster id then group label); the error is the
    fraction of series outside the matched overlaps, so 0 means the clusters
    reproduce the groups exactly.
    """
    if not assignments:
        raise MissingLabels("no assignments to score")
    missing = sorted(set(assignments) - set(labels))
    if missing:
        raise MissingLabels(f"no truth label for: {missing}")
    n = len(assignments)
    clusters = sorted({int(c) for c in assignments.values()})
    groups = sorted({str(labels[sid]) for sid in assignments})
    overlap = {
        (c, name): sum(
            1
            for sid, a in assignments.items()
            if int(a) == c and str(labels[sid]) == name
        )
        for c in clusters
        for name in groups
    }
    free_clusters = set(clusters)
    free_groups = set(groups)
    matched = 0
    while free_clusters and free_groups:
        best_pair = None
        best_count = 0
        for c in sorted(free_clusters):
            for name in sorted(free_groups):
                count = overlap[(c, name)]
                if count > best_count:
                    best_count = count
                    best_pair = (c, name)
        if best_pair is None:
            break
        matched += best_count
        free_clusters.discard(best_pair[0])
        free_groups.discard(best_pair[1])
    return 1.0 - matched / n


@dataclass(frozen=True)
class ExperimentResult:
    """Aggregated comparison of state-based alignment against the baseline."""

    classification_error: Mapping[tuple[str, int], float]
    dci_samples: Mapping[tuple[str, str], tuple[float, ...]]
    runtime_ms: Mapping[str, int]


def _state_sequences(
    segments: Sequence[TimeSeriesSegment],
    config: PipelineConfig,
    use_filter_estimates: bool,
) -> list[StateSequence]:
    z_by_series: list[tuple[str, np.ndarray]] = []
    for seg in segments:
        _, _, _, resid = fit_and_smooth(seg, use_filter_estimates=use_filter_estimates)
        z_by_series.append((seg.series_id, standardize(resid)))
    if config.state_method == "hmm":
        params = hmm_fit([z for _, z in z_by_series], n_states=config.hmm_states)
        return [hmm_decode(params, z, series_id=sid) for sid, z in z_by_series]
    alphabet = config.state_alphabet()
    return [
        threshold_discretize(z, alphabet=alphabet, cuts=config.cuts, series_id=sid)
        for sid, z in z_by_series
    ]


def method_matrices(
    segments: Sequence[TimeSeriesSegment],
    method: str,
    config: PipelineConfig | None = None,
) -> PairwiseMatrices:
    """Pairwise alignment matrices for one named method."""
    config = config or PipelineConfig()
    if method not in EXPERIMENT_METHODS:
        raise ContractViolation(f"method {method!r} not one of {EXPERIMENT_METHODS}")
    n = min(len(seg) for seg in segments)
    tau_max = config.resolved_tau_max(n)
    if method == "cdtw":
        return cdtw_baseline(segments, tau_max=tau_max)
    seqs = _state_sequences(segments, config, use_filter_estimates=method.endswith("_filter"))
    return pairwise_alignment(seqs, tau_max=tau_max, normalize=config.path_normalize)


def run_experiment(
    spec: SimSpec,
    config: PipelineConfig | None = None,
    m_max_values: Sequence[int] = (5, 6, 7, 8),
    n_seeds: int = 5,
) -> ExperimentResult:
    """Compare alignment methods over seeded replicates of one spec.

    For seeds spec.seed .. spec.seed + n_seeds - 1, both injection modes, and
    each anomaly intensity applied uniformly to all groups, each method
    produces pairwise matrices; clustering runs once per entry of
    ``m_max_values``.  Classification error against the true groups (causal
    mode) is averaged over seeds and intensities, and the per-cluster
    causality scores are pooled per (method, mode).  Timings cover each
    method's full matrix computation plus clustering.
    """
    config = config or PipelineConfig()
    m_values = tuple(int(m) for m in m_max_values)
    if not m_values or any(m < 2 for m in m_values):
        raise ContractViolation(f"m_max_values must be integers >= 2, got {m_max_values}")
    n_seeds = int(n_seeds)
    if n_seeds < 1:
        raise ContractViolation("n_seeds must be >= 1")

    errors: dict[tuple[str, int], list[float]] = {
        (method, m): [] for method in EXPERIMENT_METHODS for m in m_values
    }
    samples: dict[tuple[str, str], list[float]] = {
        (method, mode): []
        for method in EXPERIMENT_METHODS
        for mode in ("causal", "non_causal")
    }
    runtime_ns = {method: 0 for method in EXPERIMENT_METHODS}

    for offset in range(n_seeds):
        for mode in ("causal", "non_causal"):
            for intensity in spec.anomaly_intensities:
                sim = replace(
                    spec,
                    mode=mode,
                    seed=spec.seed + offset,
                    anomaly_intensities=(float(intensity),),
                )
                dataset = generate_dataset(sim)
                truth = dataset.truth_labels
                for method in EXPERIMENT_METHODS:
                    start = time.perf_counter_ns()
                    mats = method_matrices(dataset.segments, method, config)
                    for m in m_values:
                        result = sac_dtw_cluster(
                            mats.d_opt_zero,
                            mats.dci,
                            m_max=m,
                            iter_max=config.iter_max,
                            seed=sim.seed,
                            series_ids=mats.series_ids,
                        )
                        if mode == "causal":
                            errors[(method, m)].append(
                                classification_error(result.assignments, truth)
                            )
                        samples[(method, mode)].extend(
                            float(v) for v in result.causality_scores.values()
                        )
                    runtime_ns[method] += time.perf_counter_ns() - start

    return ExperimentResult(
        classification_error={
            key: float(np.mean(vals)) for key, vals in errors.items()
        },
        dci_samples={key: tuple(vals) for key, vals in samples.items()},
        runtime_ms={m: int(ns // 1_000_000) for m, ns in runtime_ns.items()},
    )
