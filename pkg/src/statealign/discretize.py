"""Standardize residuals and discretize them into ordered warning states.

Standardized residuals z_t = residual_t / scale_t are mapped to a small
ordered alphabet.  The default 3-state alphabet grades severity of the
magnitude |z_t|:

    alpha  (rank 0): |z| below the first cut     -- in-control
    beta   (rank 1): between the cuts            -- warning
    lambda (rank 2): above the last cut          -- alarm

Two discretizers are provided: a fixed-threshold rule (default cuts 2 and 3,
the familiar 2-sigma/3-sigma control limits) and a pooled Gaussian hidden
Markov model over |z| fitted by Baum-Welch and decoded with Viterbi, for data
whose excursion levels are not known in advance.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation, DegenerateFitWarning

_EMISSION_VAR_FLOOR = 1e-10
_HMM_MAX_ITERS = 100
_HMM_LOGLIK_TOL = 1e-6
_DENSITY_FLOOR = 1e-300

DEFAULT_CUTS = (2.0, 3.0)


@dataclass(frozen=True)
class StateAlphabet:
    """An ordered set of state labels; ranks run 0..K-1.

    For unsigned alphabets rank order is severity order.  A signed alphabet
    (``signed=True``) orders states by signed deviation instead, with the
    in-control state in the middle, e.g. lambda- beta- alpha beta+ lambda+.
    """

    labels: tuple[str, ...] = ("alpha", "beta", "lambda")
    signed: bool = False

    def __post_init__(self):
        if len(self.labels) < 2:
            raise ContractViolation("alphabet needs at least 2 states")
        if len(set(self.labels)) != len(self.labels):
            raise ContractViolation("alphabet labels must be unique")
        if self.signed and len(self.labels) % 2 == 0:
            raise ContractViolation("signed alphabet needs an odd state count")

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def ranks(self) -> tuple[int, ...]:
        return tuple(range(len(self.labels)))

    @property
    def extreme_ranks(self) -> tuple[int, ...]:
        """Ranks of the most severe state(s); both tails for signed alphabets."""
        if self.signed:
            return (0, len(self.labels) - 1)
        return (len(self.labels) - 1,)


THREE_STATE = StateAlphabet()
FIVE_STATE_SIGNED = StateAlphabet(
    ("lambda-", "beta-", "alpha", "beta+", "lambda+"), signed=True
)


@dataclass(frozen=True)
class StateSequence:
    """A per-series sequence of state ranks under a given alphabet."""

    series_id: str
    states: np.ndarray
    alphabet: StateAlphabet = field(default_factory=lambda: THREE_STATE)

    def __post_init__(self):
        st = np.asarray(self.states, dtype=np.int64)
        object.__setattr__(self, "states", st)
        if st.ndim != 1:
            raise ContractViolation("states must be 1-d")
        if st.size > 0 and (st.min() < 0 or st.max() >= self.alphabet.size):
            raise ContractViolation(
                f"{self.series_id}: state ranks outside 0..{self.alphabet.size - 1}"
            )

    def __len__(self) -> int:
        return int(self.states.size)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.alphabet.labels[s] for s in self.states)


@dataclass(frozen=True)
class HmmParams:
    """A fitted K-state magnitude HMM, states sorted by emission mean."""

    init_probs: np.ndarray
    trans: np.ndarray
    emit_means: np.ndarray
    emit_vars: np.ndarray

    def __post_init__(self):
        pi = np.asarray(self.init_probs, dtype=np.float64)
        tr = np.asarray(self.trans, dtype=np.float64)
        mu = np.asarray(self.emit_means, dtype=np.float64)
        var = np.asarray(self.emit_vars, dtype=np.float64)
        for name, arr in (("init_probs", pi), ("trans", tr), ("emit_means", mu), ("emit_vars", var)):
            object.__setattr__(self, name, arr)
        k = pi.size
        if tr.shape != (k, k) or mu.size != k or var.size != k:
            raise ContractViolation("inconsistent HMM parameter shapes")
        if abs(pi.sum() - 1.0) > 1e-9 or np.any(pi < -1e-12):
            raise ContractViolation("init_probs must form a distribution")
        if np.any(np.abs(tr.sum(axis=1) - 1.0) > 1e-9) or np.any(tr < -1e-12):
            raise ContractViolation("trans rows must form distributions")
        if np.any(np.diff(mu) <= 0):
            raise ContractViolation("emit_means must be strictly ascending")
        if np.any(var <= 0):
            raise ContractViolation("emit_vars must be positive")

    @property
    def n_states(self) -> int:
        return int(self.init_probs.size)


def standardize(residual) -> np.ndarray:
    """z_t = residual_t / scale_t, with a positivity check on the scale."""
    scale = np.asarray(residual.scale, dtype=np.float64)
    if np.any(~np.isfinite(scale)) or np.any(scale <= 0.0):
        raise ContractViolation(f"{residual.series_id}: scale must be finite and > 0")
    return np.asarray(residual.residuals, dtype=np.float64) / scale


def threshold_discretize(
    z: np.ndarray,
    alphabet: StateAlphabet | None = None,
    cuts: tuple[float, ...] = DEFAULT_CUTS,
    series_id: str = "",
) -> StateSequence:
    """Map standardized residuals to states by fixed magnitude cuts.

    The rank contribution is the number of cuts strictly below |z_t|, so a
    value exactly on a cut belongs to the lower (less severe) state.  For a
    signed alphabet the same magnitude rule is mirrored around the middle
    state using the sign of z_t.
    """
    alphabet = alphabet or THREE_STATE
    cuts_arr = np.asarray(cuts, dtype=np.float64)
    if cuts_arr.ndim != 1 or cuts_arr.size == 0:
        raise ContractViolation("cuts must be a non-empty 1-d sequence")
    if np.any(np.diff(cuts_arr) <= 0) or cuts_arr[0] <= 0:
        raise ContractViolation("cuts must be ascending and positive")
    expected = (alphabet.size - 1) // 2 if alphabet.signed else alphabet.size - 1
    if cuts_arr.size != expected:
        raise ContractViolation(
            f"alphabet of {alphabet.size} states needs {expected} cuts, "
            f"got {cuts_arr.size}"
        )
    z = np.asarray(z, dtype=np.float64)
    severity = (np.abs(z)[:, None] > cuts_arr[None, :]).sum(axis=1)
    if alphabet.signed:
        center = alphabet.size // 2
        ranks = center + np.sign(z).astype(np.int64) * severity
    else:
        ranks = severity
    return StateSequence(series_id, ranks, alphabet)


def _quantile_levels(k: int) -> np.ndarray:
    """Quantile levels for emission-mean init: 50th up to 99th percentile."""
    if k == 3:
        return np.array([0.50, 0.90, 0.99])
    # geometric interpolation of the tail mass from 0.5 down to 0.01
    frac = np.arange(k) / (k - 1)
    return 1.0 - 0.5 * (0.02**frac)


def hmm_fit(z_all: list[np.ndarray], n_states: int = 3) -> HmmParams:
    """Fit a pooled K-state Gaussian HMM on |z| by Baum-Welch.

    All sequences share one parameter set; transition statistics are
    accumulated within each sequence.  States are re-sorted by emission mean
    after every M-step so rank order tracks severity throughout.
    """
    if n_states < 2:
        raise ContractViolation("n_states must be >= 2")
    seqs = [np.abs(np.asarray(z, dtype=np.float64)) for z in z_all if len(z) > 0]
    if not seqs:
        raise ContractViolation("no non-empty sequences to fit")
    pooled = np.concatenate(seqs)
    if pooled.size < 10 * n_states:
        raise ContractViolation(
            f"need at least {10 * n_states} observations to fit {n_states} states, "
            f"got {pooled.size}"
        )

    k = n_states
    mu = np.quantile(pooled, _quantile_levels(k))
    # nudge apart any coincident initial means
    for i in range(1, k):
        if mu[i] <= mu[i - 1]:
            mu[i] = mu[i - 1] + 1e-6
    var = np.full(k, max(pooled.var() / k, _EMISSION_VAR_FLOOR))
    pi = np.full(k, 1.0 / k)
    trans = np.full((k, k), 0.2 / (k - 1))
    np.fill_diagonal(trans, 0.8)

    floored = False
    prev_ll = -math.inf
    for _ in range(_HMM_MAX_ITERS):
        ll = 0.0
        gamma0 = np.zeros(k)
        xi_sum = np.zeros((k, k))
        gamma_not_last = np.zeros(k)
        gamma_obs = np.zeros(k)
        gamma_obs_x = np.zeros(k)
        gamma_obs_x2 = np.zeros(k)
        for m in seqs:
            n = m.size
            dens = _gaussian_density(m, mu, var)  # (n, k)
            alpha = np.empty((n, k))
            scales = np.empty(n)
            alpha[0] = pi * dens[0]
            scales[0] = max(alpha[0].sum(), _DENSITY_FLOOR)
            alpha[0] /= scales[0]
            for t in range(1, n):
                alpha[t] = (alpha[t - 1] @ trans) * dens[t]
                scales[t] = max(alpha[t].sum(), _DENSITY_FLOOR)
                alpha[t] /= scales[t]
            beta = np.empty((n, k))
            beta[n - 1] = 1.0
            for t in range(n - 2, -1, -1):
                beta[t] = (trans @ (dens[t + 1] * beta[t + 1])) / scales[t + 1]
            gamma = alpha * beta
            gamma /= np.maximum(gamma.sum(axis=1, keepdims=True), _DENSITY_FLOOR)
            ll += float(np.log(scales).sum())
            gamma0 += gamma[0]
            if n > 1:
                # xi_sum[i, j] = expected transitions i -> j
                for t in range(n - 1):
                    mat = (
                        alpha[t][:, None]
                        * trans
                        * (dens[t + 1] * beta[t + 1])[None, :]
                        / scales[t + 1]
                    )
                    xi_sum += mat
                gamma_not_last += gamma[:-1].sum(axis=0)
            gamma_obs += gamma.sum(axis=0)
            gamma_obs_x += gamma.T @ m
            gamma_obs_x2 += gamma.T @ (m * m)

        pi = gamma0 / max(gamma0.sum(), _DENSITY_FLOOR)
        denom = np.maximum(gamma_not_last, _DENSITY_FLOOR)
        trans = xi_sum / denom[:, None]
        trans /= np.maximum(trans.sum(axis=1, keepdims=True), _DENSITY_FLOOR)
        w = np.maximum(gamma_obs, _DENSITY_FLOOR)
        mu = gamma_obs_x / w
        var = gamma_obs_x2 / w - mu * mu
        if np.any(var < _EMISSION_VAR_FLOOR):
            floored = True
            var = np.maximum(var, _EMISSION_VAR_FLOOR)

        order = np.argsort(mu, kind="stable")
        mu = mu[order]
        var = var[order]
        pi = pi[order]
        trans = trans[np.ix_(order, order)]

        if ll - prev_ll < _HMM_LOGLIK_TOL and prev_ll > -math.inf:
            prev_ll = ll
            break
        prev_ll = ll

    if floored:
        warnings.warn(
            "emission variance hit its floor during HMM fitting",
            DegenerateFitWarning,
            stacklevel=2,
        )
    for i in range(1, k):
        if mu[i] <= mu[i - 1]:
            mu[i] = mu[i - 1] + 1e-12
    return HmmParams(pi, trans, mu, var)


def _gaussian_density(x: np.ndarray, mu: np.ndarray, var: np.ndarray) -> np.ndarray:
    d = x[:, None] - mu[None, :]
    dens = np.exp(-0.5 * d * d / var[None, :]) / np.sqrt(2.0 * math.pi * var[None, :])
    return np.maximum(dens, _DENSITY_FLOOR)


def hmm_decode(
    params: HmmParams,
    z: np.ndarray,
    series_id: str = "",
    alphabet: StateAlphabet | None = None,
) -> StateSequence:
    """Viterbi-decode |z| into the most likely state-rank path (log-space)."""
    if alphabet is None:
        alphabet = (
            THREE_STATE
            if params.n_states == 3
            else StateAlphabet(tuple(f"state{i}" for i in range(params.n_states)))
        )
    if alphabet.size != params.n_states:
        raise ContractViolation(
            f"alphabet size {alphabet.size} != model states {params.n_states}"
        )
    m = np.abs(np.asarray(z, dtype=np.float64))
    n = m.size
    if n == 0:
        return StateSequence(series_id, np.empty(0, dtype=np.int64), alphabet)
    log_dens = np.log(_gaussian_density(m, params.emit_means, params.emit_vars))
    log_trans = np.log(np.maximum(params.trans, _DENSITY_FLOOR))
    log_pi = np.log(np.maximum(params.init_probs, _DENSITY_FLOOR))
    k = params.n_states
    score = log_pi + log_dens[0]
    back = np.empty((n, k), dtype=np.int64)
    for t in range(1, n):
        cand = score[:, None] + log_trans
        back[t] = np.argmax(cand, axis=0)
        score = cand[back[t], np.arange(k)] + log_dens[t]
    path = np.empty(n, dtype=np.int64)
    path[n - 1] = int(np.argmax(score))
    for t in range(n - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    return StateSequence(series_id, path, alphabet)
