"""Curve panels derived from intraday prices.

A trading day contributes one row. Prices are observed on the equidistant
grid t_k = k/K, k = 0..K, so a price panel has K+1 columns. Every derived
panel (cumulative returns, quadratic variation, standardized quadratic
variation) drops the identically-zero t=0 value and carries K columns for
k = 1..K, except the return panel which keeps the leading zero column for
readability of round trips.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataFormatError, DegenerateDataError

__all__ = [
    "PricePanel",
    "ReturnPanel",
    "QVPanel",
    "StdQVPanel",
    "LogTotalQV",
    "cidr_curves",
    "realized_qv",
    "standardized_qv",
    "log_total_qv",
]


def _as_matrix(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 2:
        raise DataFormatError(f"{name} must be a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        i, k = np.argwhere(~np.isfinite(arr))[0]
        raise DataFormatError(f"{name} has a non-finite entry at row {i}, column {k}")
    return arr


@dataclass(frozen=True)
class PricePanel:
    """N trading days of K+1 strictly positive intraday prices each.

    ``days`` are the day identifiers (ISO dates or integer indices, as
    strings), strictly increasing.
    """

    days: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = _as_matrix(self.prices, "prices")
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "days", tuple(str(d) for d in self.days))
        if len(self.days) != prices.shape[0]:
            raise DataFormatError(
                f"{len(self.days)} day labels for {prices.shape[0]} price rows"
            )
        nonpos = np.argwhere(prices <= 0.0)
        if nonpos.size:
            i, k = nonpos[0]
            raise DataFormatError(
                f"nonpositive price {prices[i, k]!r} on day {self.days[i]!r} "
                f"(row {i}, column {k})"
            )
        keys = [_day_key(d) for d in self.days]
        for i in range(1, len(keys)):
            if not keys[i - 1] < keys[i]:
                raise DataFormatError(
                    f"day identifiers not strictly increasing at row {i}: "
                    f"{self.days[i - 1]!r} then {self.days[i]!r}"
                )

    @property
    def n_days(self) -> int:
        return self.prices.shape[0]

    @property
    def k_intervals(self) -> int:
        return self.prices.shape[1] - 1


def _day_key(day: str):
    """Sort key for a day label: integer if it looks like one, else the string."""
    try:
        return (0, int(day), "")
    except ValueError:
        return (1, 0, day)


@dataclass(frozen=True)
class ReturnPanel:
    """Cumulative intraday log-return curves, N x (K+1), first column zero."""

    values: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "returns")
        object.__setattr__(self, "values", values)
        if np.any(values[:, 0] != 0.0):
            i = int(np.argmax(values[:, 0] != 0.0))
            raise DataFormatError(f"return row {i} does not start at 0")

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    @property
    def k_intervals(self) -> int:
        return self.values.shape[1] - 1


@dataclass(frozen=True)
class QVPanel:
    """Realized quadratic variation paths, N x K, rows nonnegative nondecreasing."""

    values: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "quadratic variation")
        object.__setattr__(self, "values", values)
        if np.any(values < 0.0):
            i, k = np.argwhere(values < 0.0)[0]
            raise DataFormatError(f"negative quadratic variation at row {i}, column {k}")
        if np.any(np.diff(values, axis=1) < 0.0):
            i, k = np.argwhere(np.diff(values, axis=1) < 0.0)[0]
            raise DataFormatError(f"decreasing quadratic variation at row {i}, column {k + 1}")

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    @property
    def k_intervals(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class StdQVPanel:
    """Standardized quadratic variation curves, N x K; each row a discrete cdf."""

    values: np.ndarray

    def __post_init__(self):
        values = _as_matrix(self.values, "standardized quadratic variation")
        object.__setattr__(self, "values", values)
        if np.any(np.abs(values[:, -1] - 1.0) > 1e-12):
            i = int(np.argmax(np.abs(values[:, -1] - 1.0) > 1e-12))
            raise DataFormatError(f"row {i} does not end at 1")
        if np.any(np.diff(values, axis=1) < -1e-12):
            i, k = np.argwhere(np.diff(values, axis=1) < -1e-12)[0]
            raise DataFormatError(f"decreasing cdf value at row {i}, column {k + 1}")

    @property
    def n_days(self) -> int:
        return self.values.shape[0]

    @property
    def k_intervals(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LogTotalQV:
    """Log of each day's total realized quadratic variation, length N."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size < 1:
            raise DataFormatError(f"log total QV must be a vector, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            i = int(np.argmax(~np.isfinite(values)))
            raise DataFormatError(f"non-finite log total QV at row {i}")

    @property
    def n_days(self) -> int:
        return self.values.size


def cidr_curves(prices: PricePanel) -> ReturnPanel:
    """Cumulative intraday return curves: log price relative to the day's open.

    Row i is log(P_i(t_k)) - log(P_i(t_0)) for k = 0..K; the first column is
    identically zero and the rows are invariant under per-day price rescaling.
    """
    logp = np.log(prices.prices)
    values = logp - logp[:, :1]
    values[:, 0] = 0.0
    return ReturnPanel(values)


def realized_qv(returns: ReturnPanel) -> QVPanel:
    """Cumulative sums of squared return increments, one path per day."""
    if returns.k_intervals < 2:
        raise ConfigError(f"need at least 2 intraday intervals, got {returns.k_intervals}")
    inc = np.diff(returns.values, axis=1)
    return QVPanel(np.cumsum(inc * inc, axis=1))


def _require_positive_totals(values: np.ndarray, what: str) -> None:
    totals = values[:, -1]
    if np.any(totals <= 0.0):
        i = int(np.argmax(totals <= 0.0))
        raise DegenerateDataError(
            f"day {i} has zero total quadratic variation (flat price day); "
            f"cannot compute {what}. Drop the day explicitly if intended."
        )


def standardized_qv(qv: QVPanel) -> StdQVPanel:
    """Each quadratic variation path divided by its own total.

    The result is a random cdf per day: nondecreasing, ending at exactly 1,
    and free of any day-level volatility scale factor.
    """
    _require_positive_totals(qv.values, "standardized quadratic variation")
    return StdQVPanel(qv.values / qv.values[:, -1:])


def log_total_qv(qv: QVPanel) -> LogTotalQV:
    """Logarithm of each day's total quadratic variation."""
    _require_positive_totals(qv.values, "log total quadratic variation")
    return LogTotalQV(np.log(qv.values[:, -1]))
