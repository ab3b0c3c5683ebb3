"""Order statistics and the Hill estimator of a Pareto tail exponent."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTail, EmptySample, TooFewTailObs

DEFAULT_TAIL_FRACTION = 0.05
DEFAULT_NMIN = 500


@dataclass(frozen=True)
class TailSample:
    """Positive observations of one series, sorted in descending order."""

    values: np.ndarray
    n_raw: int
    n_pos: int

    def __len__(self):
        return self.n_pos

    def scaled(self, c: float) -> "TailSample":
        return TailSample(self.values * c, self.n_raw, self.n_pos)


@dataclass(frozen=True)
class HillEstimate:
    alpha: float
    se: float
    k: int
    threshold: float
    inverse_gamma: float


def clean_sample(raw) -> TailSample:
    """Drop missing and non-positive entries and sort the rest descending.

    ``raw`` may contain ``None`` or NaN for missing values.
    """
    x = np.asarray(raw, dtype=float).ravel()
    n_raw = x.size
    x = x[np.isfinite(x) & (x > 0)]
    if x.size == 0:
        raise EmptySample(f"no positive observations among {n_raw} entries")
    values = np.sort(x, kind="stable")[::-1].copy()
    return TailSample(values=values, n_raw=n_raw, n_pos=values.size)


def tail_count(n: int, fraction: float = DEFAULT_TAIL_FRACTION) -> int:
    """Number of tail observations, ``floor(fraction * n)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 < fraction < 1:
        raise ValueError("fraction must lie in (0, 1)")
    # guard against 0.05 * 1000 = 49.99999... style rounding
    k = math.floor(fraction * n + 1e-9)
    if k < 2:
        raise TooFewTailObs(f"floor({fraction} * {n}) = {k} < 2")
    return k


def hill(sample: TailSample, k: int) -> HillEstimate:
    """Hill estimate from the ``k`` largest observations.

    The threshold is the k-th largest value X_(k), and
    ``1/alpha = mean(log(X_(n) / X_(k)))`` over n = 1..k.
    """
    if k < 2:
        raise TooFewTailObs(f"k = {k} < 2")
    if k > sample.n_pos:
        raise ValueError(f"k = {k} exceeds sample size {sample.n_pos}")
    top = sample.values[:k]
    threshold = float(top[-1])
    inv = float(np.mean(np.log(top / threshold)))
    if inv <= 0.0:
        raise DegenerateTail(f"top {k} observations all equal {threshold}")
    alpha = 1.0 / inv
    return HillEstimate(alpha=alpha, se=alpha / math.sqrt(k), k=k,
                        threshold=threshold, inverse_gamma=inv)


def log_rank_points(sample: TailSample) -> np.ndarray:
    """Rows of ``(log X_(i), log i)`` for i = 1..N, largest first."""
    n = sample.n_pos
    if n == 0:
        raise EmptySample("empty sample")
    return np.column_stack([np.log(sample.values), np.log(np.arange(1, n + 1))])


def hill_default(sample: TailSample, fraction: float = DEFAULT_TAIL_FRACTION) -> HillEstimate:
    return hill(sample, tail_count(sample.n_pos, fraction))
