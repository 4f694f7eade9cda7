"""Break-location estimators and binary segmentation.

Each estimator maximizes the squared centered partial-sum objective over
candidate split days; ties go to the smallest index so detection is
deterministic and conservative. The pooled estimator blends the shape and
total-volatility estimates with cross-weights: the test with the smaller
p-value (stronger evidence) pulls the estimate toward its own location.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import cusum
from .errors import ConfigError
from .panels import (
    LogTotalQV,
    PricePanel,
    StdQVPanel,
    cidr_curves,
    log_total_qv,
    realized_qv,
    standardized_qv,
)
from .rng import stream

__all__ = [
    "ChangePointReport",
    "SegmentationResult",
    "BreakPoint",
    "shape_changepoint",
    "total_changepoint",
    "pooled_changepoint",
    "binary_segmentation",
    "changepoint_report",
    "shape_objective",
    "total_objective",
]

DEFAULT_MIN_SEGMENT = 30
# Each tested sub-segment must support the long-run variance estimator,
# which needs at least 10 observations.
_MIN_SEGMENT_FLOOR = 5


def _argmax_objective(ps: np.ndarray) -> int:
    """First index maximizing the centered partial-sum objective (0-based)."""
    return int(np.argmax(cusum._cusum_sq(ps)))


def shape_objective(f: StdQVPanel) -> np.ndarray:
    """Per-split CUSUM objective of the shape estimator (for plotting)."""
    return cusum._cusum_sq(np.cumsum(f.values, axis=0))


def total_objective(lq: LogTotalQV) -> np.ndarray:
    """Per-split CUSUM objective of the total-volatility estimator."""
    return cusum._cusum_sq(np.cumsum(lq.values))


def shape_changepoint(f: StdQVPanel) -> tuple[float, int]:
    """Break location from the standardized quadratic variation curves.

    Returns ``(theta, n)`` where n is the 1-based index of the last day of
    the first regime and theta = n / N. Under no change the objective is
    flat and the smallest-argmax rule returns n = 1; the estimate is only
    meaningful when the shape test rejects.
    """
    if f.n_days < 2:
        raise ConfigError(f"need at least 2 days, got {f.n_days}")
    n = _argmax_objective(np.cumsum(f.values, axis=0)) + 1
    return n / f.n_days, n


def total_changepoint(lq: LogTotalQV) -> tuple[float, int]:
    """Break location from the log total quadratic variation series."""
    if lq.n_days < 2:
        raise ConfigError(f"need at least 2 days, got {lq.n_days}")
    n = _argmax_objective(np.cumsum(lq.values)) + 1
    return n / lq.n_days, n


def pooled_changepoint(theta1: float, theta2: float, p1: float, p2: float) -> float:
    """Cross-weighted blend of the two estimators.

    theta = (p1 * theta2 + p2 * theta1) / (p1 + p2): the smaller p-value
    puts more weight on its own estimator.
    """
    if not (0.0 < p1 <= 1.0 and 0.0 < p2 <= 1.0):
        raise ConfigError(f"p-values must be in (0, 1], got {p1}, {p2}")
    return (p1 * theta2 + p2 * theta1) / (p1 + p2)


@dataclass(frozen=True)
class ChangePointReport:
    """All three break estimates for one panel, with their p-values.

    Indices are 1-based day positions (the last day of the pre-break
    regime for the argmax estimators, the rounded-up day for the pooled
    fraction); dates are the matching day labels.
    """

    theta_shape: float
    theta_total: float
    theta_pooled: float
    index_shape: int
    index_total: int
    index_pooled: int
    date_shape: str
    date_total: str
    date_pooled: str
    p_shape: float
    p_total: float
    p_global: float


def day_index(theta: float, n_days: int) -> int:
    """Resolve a break fraction to a 1-based day index, rounding up."""
    return min(max(int(math.ceil(theta * n_days)), 1), n_days)


def changepoint_report(
    f: StdQVPanel,
    lq: LogTotalQV,
    days: tuple[str, ...],
    p_shape: float,
    p_total: float,
    p_global: float,
) -> ChangePointReport:
    """Assemble the three estimators and resolve them to days and dates."""
    theta1, n1 = shape_changepoint(f)
    theta2, n2 = total_changepoint(lq)
    pooled = pooled_changepoint(theta1, theta2, p_shape, p_total)
    n_pooled = day_index(pooled, f.n_days)
    return ChangePointReport(
        theta_shape=theta1,
        theta_total=theta2,
        theta_pooled=pooled,
        index_shape=n1,
        index_total=n2,
        index_pooled=n_pooled,
        date_shape=days[n1 - 1],
        date_total=days[n2 - 1],
        date_pooled=days[n_pooled - 1],
        p_shape=p_shape,
        p_total=p_total,
        p_global=p_global,
    )


@dataclass(frozen=True)
class BreakPoint:
    """One detected break: 1-based index of the last pre-break day."""

    index: int
    date: str
    p_value: float


@dataclass(frozen=True)
class SegmentationResult:
    """Breaks found by binary segmentation, sorted by day index."""

    breaks: tuple[BreakPoint, ...]
    alpha: float
    min_segment: int


def binary_segmentation(
    prices: PricePanel,
    alpha: float = 0.05,
    min_segment: int = DEFAULT_MIN_SEGMENT,
    *,
    draws: int = cusum.DEFAULT_DRAWS,
    series_terms: int = cusum.DEFAULT_SERIES_TERMS,
    eigen_threshold: float = cusum.DEFAULT_EIGEN_THRESHOLD,
    seed: int = 0,
) -> SegmentationResult:
    """Recursive global-test segmentation of a price panel.

    Each segment is tested with the Fisher-combined global test; on
    rejection the pooled change point splits it and both halves are
    examined, stopping when a segment accepts or is shorter than twice the
    minimum segment length. The split day is clamped so every recorded
    break keeps both neighbors at least ``min_segment`` days away. Each
    segment's p-value simulation uses its own stream derived from
    (seed, segment bounds), so results do not depend on recursion order.
    """
    if not 0.0 < alpha < 1.0:
        raise ConfigError(f"alpha must be in (0, 1), got {alpha}")
    if min_segment < _MIN_SEGMENT_FLOOR:
        raise ConfigError(f"min_segment must be >= {_MIN_SEGMENT_FLOOR}, got {min_segment}")

    qv = realized_qv(cidr_curves(prices))
    f_all = standardized_qv(qv).values
    lq_all = log_total_qv(qv).values
    found: list[BreakPoint] = []

    def recurse(lo: int, hi: int) -> None:
        n_seg = hi - lo
        if n_seg < 2 * min_segment:
            return
        f = StdQVPanel(f_all[lo:hi])
        lq = LogTotalQV(lq_all[lo:hi])
        rng = stream(seed, lo, hi)
        shape_rep, total_rep, global_rep = cusum.run_tests(
            f, lq, rng, draws=draws, series_terms=series_terms, eigen_threshold=eigen_threshold
        )
        if global_rep.p_value > alpha:
            return
        theta1, _ = shape_changepoint(f)
        theta2, _ = total_changepoint(lq)
        pooled = pooled_changepoint(theta1, theta2, shape_rep.p_value, total_rep.p_value)
        rel = day_index(pooled, n_seg)
        rel = min(max(rel, min_segment), n_seg - min_segment)
        cut = lo + rel
        found.append(BreakPoint(index=cut, date=prices.days[cut - 1], p_value=global_rep.p_value))
        recurse(lo, cut)
        recurse(cut, hi)

    recurse(0, prices.n_days)
    found.sort(key=lambda b: b.index)
    return SegmentationResult(tuple(found), alpha, min_segment)
