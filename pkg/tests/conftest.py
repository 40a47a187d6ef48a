"""Shared helpers for the test suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

from statealign import ModelParams, SeriesMeta, TimeSeriesSegment

BASE_EPOCH = 1_700_000_000
STRIDE = 60


def make_segment(
    values,
    series_id: str = "s",
    *,
    stride: int = STRIDE,
    group_label: str | None = None,
    start: int = BASE_EPOCH,
) -> TimeSeriesSegment:
    values = np.asarray(values, dtype=np.float64)
    timestamps = start + stride * np.arange(values.size, dtype=np.int64)
    meta = SeriesMeta(group_label=group_label)
    return TimeSeriesSegment(
        series_id=series_id, timestamps=timestamps, values=values, meta=meta
    )


def local_level_series(
    T: int, q: float, r: float, *, x0: float = 0.0, seed: int = 0
) -> np.ndarray:
    """Draw one path from the local-level model with known variances."""
    rng = np.random.default_rng(seed)
    x = x0 + np.concatenate(
        [[0.0], np.cumsum(rng.normal(0.0, math.sqrt(q), T - 1))]
    )
    return x + rng.normal(0.0, math.sqrt(r), T)


def random_model(rng: np.random.Generator) -> ModelParams:
    """A random valid scalar state-space model for oracle comparisons."""
    return ModelParams(
        a=rng.uniform(-2.0, 2.0),
        c=rng.uniform(-1.0, 1.0),
        q=float(10.0 ** rng.uniform(-4, 2)),
        r=float(10.0 ** rng.uniform(-4, 2)),
        x0=rng.uniform(-5.0, 5.0),
        p0=float(10.0 ** rng.uniform(-4, 2)),
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
