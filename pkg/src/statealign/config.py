"""Validated configuration for the end-to-end analysis pipeline."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Mapping

from .discretize import FIVE_STATE_SIGNED, THREE_STATE, StateAlphabet
from .errors import ConfigError

STATE_METHODS = ("threshold", "hmm")
ESTIMATORS = ("filter", "smoother")
ALPHABETS = ("3-state", "5-state-signed")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings for one analysis run.

    ``alphabet`` selects the discretization alphabet for the threshold
    method; the hmm method always derives an unsigned alphabet from
    ``hmm_states`` (a signed alphabet cannot be decoded from magnitudes, so
    that combination is rejected).  ``tau_max`` may be the string ``"auto"``
    to derive the shift budget from the series length.  ``path_normalize``
    divides each alignment cost by its optimal path length; it is off by
    default because the causality index is a ratio of costs, so path length
    largely cancels out of it.
    """

    window: tuple[int, int] | None = None
    state_method: str = "threshold"
    estimator: str = "smoother"
    cuts: tuple[float, ...] = (2.0, 3.0)
    hmm_states: int = 3
    tau_max: int | str = "auto"
    m_max: int = 5
    iter_max: int = 10
    seed: int = 0
    alphabet: str = "3-state"
    path_normalize: bool = False

    def __post_init__(self) -> None:
        if self.window is not None:
            win = tuple(self.window)
            if len(win) != 2:
                raise ConfigError("window: expected [start, end]")
            try:
                win = (int(win[0]), int(win[1]))
            except (TypeError, ValueError):
                raise ConfigError("window: bounds must be integers") from None
            if win[0] >= win[1]:
                raise ConfigError(f"window: start {win[0]} must be < end {win[1]}")
            object.__setattr__(self, "window", win)
        if self.state_method not in STATE_METHODS:
            raise ConfigError(
                f"state_method: {self.state_method!r} not one of {STATE_METHODS}"
            )
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"estimator: {self.estimator!r} not one of {ESTIMATORS}")
        if self.alphabet not in ALPHABETS:
            raise ConfigError(f"alphabet: {self.alphabet!r} not one of {ALPHABETS}")
        try:
            cuts = tuple(float(c) for c in self.cuts)
        except (TypeError, ValueError):
            raise ConfigError("cuts: must be a sequence of numbers") from None
        if not cuts:
            raise ConfigError("cuts: must be non-empty")
        if cuts[0] <= 0 or any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ConfigError(f"cuts: must be positive and strictly ascending, got {cuts}")
        object.__setattr__(self, "cuts", cuts)
        if self.state_method == "threshold":
            expected = (self.state_alphabet().size - 1) // (
                2 if self.state_alphabet().signed else 1
            )
            if len(cuts) != expected:
                raise ConfigError(
                    f"cuts: alphabet {self.alphabet!r} needs {expected} cuts, got {len(cuts)}"
                )
        if not isinstance(self.hmm_states, int) or self.hmm_states < 2:
            raise ConfigError(f"hmm_states: must be an integer >= 2, got {self.hmm_states!r}")
        if self.state_method == "hmm" and self.alphabet == "5-state-signed":
            raise ConfigError(
                "alphabet: 5-state-signed requires state_method threshold "
                "(the hmm operates on magnitudes)"
            )
        if self.tau_max != "auto":
            if not isinstance(self.tau_max, int) or isinstance(self.tau_max, bool):
                raise ConfigError(f"tau_max: must be 'auto' or an integer, got {self.tau_max!r}")
            if self.tau_max < 1:
                raise ConfigError(f"tau_max: must be >= 1, got {self.tau_max}")
        if not isinstance(self.m_max, int) or self.m_max < 2:
            raise ConfigError(f"m_max: must be an integer >= 2, got {self.m_max!r}")
        if not isinstance(self.iter_max, int) or self.iter_max < 1:
            raise ConfigError(f"iter_max: must be an integer >= 1, got {self.iter_max!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed: must be a non-negative integer, got {self.seed!r}")
        if not isinstance(self.path_normalize, bool):
            raise ConfigError(
                f"path_normalize: must be a boolean, got {self.path_normalize!r}"
            )

    def state_alphabet(self) -> StateAlphabet:
        """The discretization alphabet implied by this config."""
        if self.state_method == "hmm":
            if self.hmm_states == 3:
                return THREE_STATE
            return StateAlphabet(tuple(f"state{i}" for i in range(self.hmm_states)))
        return FIVE_STATE_SIGNED if self.alphabet == "5-state-signed" else THREE_STATE

    def resolved_tau_max(self, n: int) -> int | None:
        """The explicit shift budget, or None to derive it from length n."""
        return None if self.tau_max == "auto" else int(self.tau_max)

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "PipelineConfig":
        """Build a config from parsed JSON, rejecting unknown keys."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        kwargs: dict[str, Any] = dict(data)
        if "cuts" in kwargs and kwargs["cuts"] is not None:
            kwargs["cuts"] = tuple(kwargs["cuts"])
        if "window" in kwargs and kwargs["window"] is not None:
            kwargs["window"] = tuple(kwargs["window"])
        return cls(**kwargs)

    def to_mapping(self) -> dict[str, Any]:
        """JSON-serializable echo of this config."""
        return {
            "window": list(self.window) if self.window is not None else None,
            "state_method": self.state_method,
            "estimator": self.estimator,
            "cuts": list(self.cuts),
            "hmm_states": self.hmm_states,
            "tau_max": self.tau_max,
            "m_max": self.m_max,
            "iter_max": self.iter_max,
            "seed": self.seed,
            "alphabet": self.alphabet,
            "path_normalize": self.path_normalize,
        }
