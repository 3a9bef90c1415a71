"""Regression evaluation metrics: RMSE and squared-error sums."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Metrics:
    """Scores of one prediction vector against actual targets.

    ``sse_over_sst`` is None when the actual targets are constant (SST = 0),
    keeping the undefined ratio an explicit flag rather than a NaN.
    """

    rmse: float
    sse: float
    sst: float
    sse_over_sst: float | None
    n: int


def evaluate(y: np.ndarray, y_hat: np.ndarray) -> Metrics:
    """Compute RMSE = sqrt(SSE / n), SSE, and SST about the mean of actual targets."""
    y = np.asarray(y, dtype=float).ravel()
    y_hat = np.asarray(y_hat, dtype=float).ravel()
    if y.shape[0] == 0:
        raise ValueError("cannot evaluate empty vectors")
    if y.shape != y_hat.shape:
        raise ValueError(f"length mismatch: {y.shape[0]} actual vs {y_hat.shape[0]} predicted")
    n = y.shape[0]
    sse = float(np.sum((y - y_hat) ** 2))
    sst = float(np.sum((y - np.mean(y)) ** 2))
    ratio = sse / sst if sst > 0.0 else None
    return Metrics(rmse=math.sqrt(sse / n), sse=sse, sst=sst, sse_over_sst=ratio, n=n)


def aggregate_mean(values) -> float:
    """Arithmetic mean of a non-empty list of scores."""
    vals = list(values)
    if not vals:
        raise ValueError("cannot average an empty list")
    return float(np.mean(np.asarray(vals, dtype=float)))
