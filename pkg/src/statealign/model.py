"""Scalar linear-Gaussian state-space modelling of single time series.

Each series segment is described by the local-level family

    X_{t+1} = c * X_t + w_t,      w_t ~ N(0, q)
    Y_t     = a * X_t + v_t,      v_t ~ N(0, r)

with prior X_1 ~ N(x0, p0).  The forward pass (`kalman_filter`) runs the
standard predict/correct recursion

    predict:  X^_{t+1|t} = c * X^_{t|t},        P_{t+1|t} = c^2 P_{t|t} + q
    correct:  K = P_{t+1|t} a / (a^2 P_{t+1|t} + r)
              X^_{t+1|t+1} = X^_{t+1|t} + K (Y_{t+1} - a X^_{t+1|t})
              P_{t+1|t+1} = P_{t+1|t} - K a P_{t+1|t}

and accumulates the Gaussian predictive log-likelihood.  The backward pass
(`kalman_smooth`) applies the Rauch-Tung-Striebel corrections

    L_t = P_{t|t} c / P_{t+1|t}
    X^_{t|T} = X^_{t|t} + L_t (X^_{t+1|T} - X^_{t+1|t})
    P_{t|T} = P_{t|t} + L_t^2 (P_{t+1|T} - P_{t+1|t})

`fit_local_level` estimates q and r by expectation-maximization with a and c
pinned to 1, and `extract_residuals` turns a smoothed fit into residuals with
their pointwise predictive scale, ready for standardization downstream.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ContractViolation,
    DegenerateSeries,
    NumericalBreakdown,
    SegmentTooShort,
    StabilityWarning,
)

_VARIANCE_FLOOR = 1e-12
_PRIOR_VAR_FLOOR = 1e-8
_MIN_SEGMENT_LENGTH = 8


@dataclass(frozen=True)
class SeriesMeta:
    """Descriptive labels attached to a series.

    ``dimension_labels`` is an ordered tuple of (key, value) pairs such as
    (("region", "emea"), ("platform", "ios")); ``group_label`` is an optional
    ground-truth grouping used only for evaluation.
    """

    dimension_labels: tuple[tuple[str, str], ...] = ()
    group_label: str | None = None

    def __post_init__(self):
        keys = [k for k, _ in self.dimension_labels]
        if len(keys) != len(set(keys)):
            raise ContractViolation("dimension_labels keys must be unique")


@dataclass(frozen=True)
class TimeSeriesSegment:
    """A single uniformly sampled series over the analysis window."""

    series_id: str
    timestamps: np.ndarray
    values: np.ndarray
    meta: SeriesMeta = field(default_factory=SeriesMeta)

    def __post_init__(self):
        ts = np.asarray(self.timestamps, dtype=np.int64)
        vals = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vals)
        if not self.series_id:
            raise ContractViolation("series_id must be non-empty")
        if ts.ndim != 1 or vals.ndim != 1:
            raise ContractViolation("timestamps and values must be 1-d")
        if ts.size != vals.size:
            raise ContractViolation(
                f"{self.series_id}: timestamps ({ts.size}) and values "
                f"({vals.size}) differ in length"
            )
        if ts.size < 2:
            raise ContractViolation(f"{self.series_id}: need at least 2 points")
        strides = np.diff(ts)
        if strides.min(initial=np.iinfo(np.int64).max) <= 0:
            raise ContractViolation(
                f"{self.series_id}: timestamps must be strictly increasing"
            )
        if np.unique(strides).size != 1:
            raise ContractViolation(f"{self.series_id}: sampling stride is not uniform")
        if not np.all(np.isfinite(vals)):
            raise ContractViolation(f"{self.series_id}: values must be finite")

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def stride(self) -> int:
        return int(self.timestamps[1] - self.timestamps[0])


@dataclass(frozen=True)
class ModelParams:
    """Parameters (a, c, q, r, x0, p0) of the scalar state-space model."""

    a: float = 1.0
    c: float = 1.0
    q: float = 1.0
    r: float = 1.0
    x0: float = 0.0
    p0: float = 1.0

    def __post_init__(self):
        for name in ("q", "r", "p0"):
            v = getattr(self, name)
            if not (v > 0.0) or not math.isfinite(v):
                raise ContractViolation(f"{name} must be finite and > 0, got {v!r}")
        for name in ("a", "c", "x0"):
            if not math.isfinite(getattr(self, name)):
                raise ContractViolation(f"{name} must be finite")
        if abs(self.c) > 1.0 + 1e-9:
            warnings.warn(
                f"|c| = {abs(self.c)} > 1 gives an unstable state recursion",
                StabilityWarning,
                stacklevel=2,
            )


@dataclass(frozen=True)
class FitOptions:
    """Knobs for the EM fit."""

    max_em_iters: int = 50
    loglik_tol: float = 1e-6

    def __post_init__(self):
        if self.max_em_iters < 1:
            raise ContractViolation("max_em_iters must be >= 1")
        if not (self.loglik_tol > 0.0):
            raise ContractViolation("loglik_tol must be > 0")


@dataclass(frozen=True)
class FilterResult:
    """Forward-pass quantities, one entry per observation."""

    pred_mean: np.ndarray
    pred_var: np.ndarray
    filt_mean: np.ndarray
    filt_var: np.ndarray
    gains: np.ndarray
    loglik: float


@dataclass(frozen=True)
class SmoothResult:
    """Backward-pass quantities; ``smoother_gain[T-1]`` is unused and zero."""

    smooth_mean: np.ndarray
    smooth_var: np.ndarray
    smoother_gain: np.ndarray


@dataclass(frozen=True)
class ResidualProcess:
    """Residuals with their pointwise predictive scale."""

    series_id: str
    residuals: np.ndarray
    scale: np.ndarray


def kalman_filter(params: ModelParams, segment: TimeSeriesSegment) -> FilterResult:
    """Run the forward predict/correct recursion over one segment.

    The prior (x0, p0) plays the role of the one-step-ahead prediction for
    the first observation.
    """
    y = segment.values
    n = y.size
    a, c, q, r = params.a, params.c, params.q, params.r
    pred_mean = np.empty(n)
    pred_var = np.empty(n)
    filt_mean = np.empty(n)
    filt_var = np.empty(n)
    gains = np.empty(n)
    loglik = 0.0
    mp, vp = params.x0, params.p0
    for t in range(n):
        if t > 0:
            mp = c * filt_mean[t - 1]
            vp = c * c * filt_var[t - 1] + q
        s = a * a * vp + r
        if not (s > 0.0) or not math.isfinite(s):
            raise NumericalBreakdown(f"innovation variance {s!r} at t={t}")
        innov = y[t] - a * mp
        k = vp * a / s
        pred_mean[t] = mp
        pred_var[t] = vp
        gains[t] = k
        filt_mean[t] = mp + k * innov
        filt_var[t] = vp - k * a * vp
        loglik += -0.5 * (math.log(2.0 * math.pi * s) + innov * innov / s)
    return FilterResult(pred_mean, pred_var, filt_mean, filt_var, gains, float(loglik))


def kalman_smooth(params: ModelParams, filt: FilterResult) -> SmoothResult:
    """Run the Rauch-Tung-Striebel backward corrections over a filter pass."""
    n = filt.filt_mean.size
    c = params.c
    smooth_mean = np.empty(n)
    smooth_var = np.empty(n)
    gain = np.zeros(n)
    smooth_mean[n - 1] = filt.filt_mean[n - 1]
    smooth_var[n - 1] = filt.filt_var[n - 1]
    for t in range(n - 2, -1, -1):
        vp_next = filt.pred_var[t + 1]
        if not (vp_next > 0.0):
            raise NumericalBreakdown(f"predicted variance {vp_next!r} at t={t + 1}")
        ell = filt.filt_var[t] * c / vp_next
        gain[t] = ell
        smooth_mean[t] = filt.filt_mean[t] + ell * (
            smooth_mean[t + 1] - filt.pred_mean[t + 1]
        )
        smooth_var[t] = filt.filt_var[t] + ell * ell * (
            smooth_var[t + 1] - vp_next
        )
    return SmoothResult(smooth_mean, smooth_var, gain)


def smooth_view_of_filter(filt: FilterResult) -> SmoothResult:
    """Repackage filtered moments in smoothed form.

    Lets the residual extraction run on one-sided (filtered) estimates when a
    caller prefers the causal variant over the two-sided smoother.
    """
    return SmoothResult(
        smooth_mean=filt.filt_mean.copy(),
        smooth_var=filt.filt_var.copy(),
        smoother_gain=np.zeros(filt.filt_mean.size),
    )


def extract_residuals(
    segment: TimeSeriesSegment, smooth: SmoothResult, params: ModelParams
) -> ResidualProcess:
    """Residuals Y_t - a * X^_{t|T} with scale sqrt(a^2 P_{t|T} + r)."""
    if smooth.smooth_mean.size != segment.values.size:
        raise ContractViolation(
            f"{segment.series_id}: smoother length {smooth.smooth_mean.size} "
            f"does not match segment length {segment.values.size}"
        )
    a = params.a
    residuals = segment.values - a * smooth.smooth_mean
    scale = np.sqrt(a * a * smooth.smooth_var + params.r)
    return ResidualProcess(segment.series_id, residuals, scale)


def _moment_init(y: np.ndarray) -> tuple[float, float]:
    """Method-of-moments starting point for (q, r) of a local-level model.

    First differences of a local-level series satisfy Var(d) = q + 2r and
    lag-one autocovariance -r, which pins both parameters up to noise.
    """
    d = np.diff(y)
    var_d = float(d.var())
    if var_d < _VARIANCE_FLOOR:
        var_d = _VARIANCE_FLOOR
    acov1 = float(np.mean(d[1:] * d[:-1])) if d.size > 1 else 0.0
    r0 = max(-acov1, 0.05 * var_d, _VARIANCE_FLOOR)
    q0 = max(var_d - 2.0 * r0, 0.05 * var_d, _VARIANCE_FLOOR)
    return q0, r0


def fit_local_level(
    segment: TimeSeriesSegment,
    opts: FitOptions | None = None,
    return_history: bool = False,
):
    """Fit a local-level model (a = c = 1) to one segment by EM.

    x0 is pinned to the first observation and p0 to the sample variance
    (floored); only q and r are re-estimated.  Returns the fitted
    ``ModelParams`` (and the per-iteration log-likelihood path when
    ``return_history`` is set).
    """
    opts = opts or FitOptions()
    y = segment.values
    if y.size < _MIN_SEGMENT_LENGTH:
        raise SegmentTooShort(
            f"{segment.series_id}: {y.size} points < {_MIN_SEGMENT_LENGTH}"
        )
    var_y = float(y.var())
    if var_y < _VARIANCE_FLOOR:
        raise DegenerateSeries(f"{segment.series_id}: sample variance {var_y!r}")
    x0 = float(y[0])
    p0 = max(var_y, _PRIOR_VAR_FLOOR)
    q, r = _moment_init(y)

    history: list[float] = []
    prev_ll = -math.inf
    params = ModelParams(a=1.0, c=1.0, q=q, r=r, x0=x0, p0=p0)
    for _ in range(opts.max_em_iters):
        filt = kalman_filter(params, segment)
        history.append(filt.loglik)
        if filt.loglik - prev_ll < opts.loglik_tol and history[:-1]:
            break
        prev_ll = filt.loglik
        smooth = kalman_smooth(params, filt)
        xs = smooth.smooth_mean
        ps = smooth.smooth_var
        # Cov(X_t, X_{t+1} | Y) = L_t * P_{t+1|T} for the scalar RTS smoother.
        cross = smooth.smoother_gain[:-1] * ps[1:]
        q_new = float(
            np.mean((xs[1:] - xs[:-1]) ** 2 + ps[1:] + ps[:-1] - 2.0 * cross)
        )
        r_new = float(np.mean((y - xs) ** 2 + ps))
        params = ModelParams(
            a=1.0,
            c=1.0,
            q=max(q_new, _VARIANCE_FLOOR),
            r=max(r_new, _VARIANCE_FLOOR),
            x0=x0,
            p0=p0,
        )
    if return_history:
        return params, history
    return params


def fit_and_smooth(
    segment: TimeSeriesSegment,
    opts: FitOptions | None = None,
    use_filter_estimates: bool = False,
) -> tuple[ModelParams, FilterResult, SmoothResult, ResidualProcess]:
    """Convenience composition: fit, filter, smooth, extract residuals."""
    params = fit_local_level(segment, opts)
    filt = kalman_filter(params, segment)
    smooth = (
        smooth_view_of_filter(filt)
        if use_filter_estimates
        else kalman_smooth(params, filt)
    )
    resid = extract_residuals(segment, smooth, params)
    return params, filt, smooth, resid
