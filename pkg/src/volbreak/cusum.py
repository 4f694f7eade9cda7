"""CUSUM test statistics and their simulated null distributions.

Three tests operate on a panel of daily curves:

* the *shape* test compares the standardized quadratic variation curves
  against a limit that is a weighted sum of squared-Brownian-bridge
  integrals, weighted by the eigenvalues of the curves' covariance;
* the *total* test runs the scalar CUSUM on the log total quadratic
  variation, whose limit is a long-run-variance-scaled squared-bridge
  integral;
* the *global* test combines the two p-values with Fisher's method.

p-values are estimated by the add-one exceedance rank against a simulated
sample of the limiting distribution, which keeps them strictly positive and
monotone in the statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateDataError
from .lrv import longrun_variance
from .panels import LogTotalQV, StdQVPanel

__all__ = [
    "EigenSpectrum",
    "LimitSample",
    "TestReport",
    "shape_statistic",
    "total_statistic",
    "fde_covariance",
    "eigen_spectrum",
    "bb_l2_draw",
    "simulate_shape_limit",
    "empirical_pvalue",
    "pvalue_total",
    "fisher_combine",
    "run_tests",
]

DEFAULT_DRAWS = 5000
DEFAULT_SERIES_TERMS = 500
DEFAULT_EIGEN_THRESHOLD = 0.95


@dataclass(frozen=True)
class EigenSpectrum:
    """Leading eigenvalues of the curve covariance, largest first.

    ``explained_fraction`` is the share of the total trace carried by the
    retained eigenvalues; it is at least the threshold used to build the
    spectrum.
    """

    eigenvalues: np.ndarray
    explained_fraction: float

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=np.float64)
        object.__setattr__(self, "eigenvalues", ev)
        if ev.ndim != 1 or ev.size < 1:
            raise ConfigError("spectrum must hold at least one eigenvalue")
        if np.any(ev < 0.0) or np.any(np.diff(ev) > 0.0):
            raise ConfigError("eigenvalues must be nonnegative and sorted decreasing")

    @property
    def count(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class LimitSample:
    """Simulated draws from a limiting null distribution, sorted decreasing."""

    values: np.ndarray
    draws: int
    series_terms: int

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        if values.size != self.draws:
            raise ConfigError(f"expected {self.draws} draws, got {values.size}")


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test: statistic, p-value and the nuisance it relied on.

    ``method`` is one of ``"shape"``, ``"total"``, ``"global"``; ``nuisance``
    is the eigen spectrum, the long-run variance, or the pair of component
    p-values, respectively.
    """

    statistic: float
    p_value: float
    method: str
    nuisance: object = None


def _cusum_sq(ps: np.ndarray) -> np.ndarray:
    """Squared norms of centered partial sums, one value per split point.

    ``ps`` holds row partial sums (cumulative over axis 0); returns the
    vector v[n] = ||ps[n] - ((n+1)/N) ps[N-1]||^2, n = 0..N-1.
    """
    n_days = ps.shape[0]
    frac = np.arange(1, n_days + 1) / n_days
    if ps.ndim == 1:
        dev = ps - frac * ps[-1]
        return dev * dev
    dev = ps - frac[:, None] * ps[-1]
    return np.einsum("ij,ij->i", dev, dev)


def shape_statistic(f: StdQVPanel) -> float:
    """CUSUM statistic for a change in the volatility shape.

    Computed as the mean of squared centered partial-sum norms over all
    split points, divided by N; the grid Riemann weight cancels against the
    statistic's resolution factor, so the column norm is unweighted.
    """
    if f.n_days < 2:
        raise ConfigError(f"need at least 2 days, got {f.n_days}")
    ps = np.cumsum(f.values, axis=0)
    return float(_cusum_sq(ps).sum() / f.n_days**2)


def total_statistic(lq: LogTotalQV) -> float:
    """CUSUM statistic for a change in the log total volatility."""
    if lq.n_days < 2:
        raise ConfigError(f"need at least 2 days, got {lq.n_days}")
    ps = np.cumsum(lq.values)
    return float(_cusum_sq(ps).sum() / lq.n_days**2)


def fde_covariance(f: StdQVPanel) -> np.ndarray:
    """First-order-difference estimate of the curves' covariance, K x K.

    Averages outer products of consecutive curve differences and halves
    them, which is robust to a single mean break in the panel. The matrix
    eigenvalues directly estimate the eigenvalues of the covariance kernel
    of the (root-K scaled) curves, i.e. the weights of the limiting
    distribution of ``shape_statistic``.
    """
    if f.n_days < 2:
        raise ConfigError(f"need at least 2 days, got {f.n_days}")
    diffs = np.diff(f.values, axis=0)
    return (diffs.T @ diffs) / (2.0 * (f.n_days - 1))


def eigen_spectrum(cov: np.ndarray, threshold: float = DEFAULT_EIGEN_THRESHOLD) -> EigenSpectrum:
    """Smallest leading eigenvalue set explaining ``threshold`` of the trace."""
    cov = np.asarray(cov, dtype=np.float64)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1]:
        raise ConfigError(f"covariance must be square, got shape {cov.shape}")
    if not 0.0 < threshold <= 1.0:
        raise ConfigError(f"threshold must be in (0, 1], got {threshold}")
    scale = max(1.0, float(np.abs(cov).max()))
    if float(np.abs(cov - cov.T).max()) > 1e-10 * scale:
        raise ConfigError("covariance matrix is not symmetric")
    ev = np.linalg.eigvalsh(cov)[::-1]
    ev = np.clip(ev, 0.0, None)
    trace = float(ev.sum())
    if trace <= 0.0:
        raise DegenerateDataError("degenerate covariance: all curves identical")
    explained = np.cumsum(ev) / trace
    count = int(np.searchsorted(explained, threshold)) + 1
    count = min(count, ev.size)
    return EigenSpectrum(ev[:count].copy(), float(explained[count - 1]))


def _series_weights(series_terms: int) -> np.ndarray:
    return 1.0 / (np.arange(1.0, series_terms + 1.0) ** 2 * math.pi**2)


def _accumulate_bridge_draws(
    series_terms: int,
    rng: np.random.Generator,
    accum: np.ndarray,
    scale: float,
    scratch: np.ndarray,
) -> None:
    """Add ``scale`` times fresh squared-bridge draws onto ``accum`` in place.

    ``scratch`` is a reusable (rows, series_terms) work buffer; generation
    order is row-major and independent of the chunking, so results are
    identical for any buffer size.
    """
    weights = _series_weights(series_terms)
    rows = scratch.shape[0]
    for lo in range(0, accum.size, rows):
        view = scratch[: min(lo + rows, accum.size) - lo]
        rng.standard_normal(out=view)
        np.multiply(view, view, out=view)
        accum[lo : lo + view.shape[0]] += scale * (view @ weights)


def _scratch_buffer(series_terms: int, size: int) -> np.ndarray:
    # ~8 MB cap keeps the allocator reusing one arena across calls
    rows = max(1, min(size, 1_000_000 // max(series_terms, 1)))
    return np.empty((rows, series_terms))


def bb_l2_draw(series_terms: int, rng: np.random.Generator, size: int | None = None):
    """Draw realizations of the integral of a squared Brownian bridge.

    Uses the truncated eigenfunction series sum_{j<=J} Z_j^2 / (j pi)^2 with
    i.i.d. standard normal Z_j; the omitted tail has mean below 1/(pi^2 J).
    Returns a scalar when ``size`` is None, else a vector of ``size`` draws.
    """
    if series_terms < 1:
        raise ConfigError(f"series_terms must be >= 1, got {series_terms}")
    if size is None:
        z = rng.standard_normal(series_terms)
        return float((z * z) @ _series_weights(series_terms))
    draws = np.zeros(size)
    _accumulate_bridge_draws(series_terms, rng, draws, 1.0, _scratch_buffer(series_terms, size))
    return draws


def simulate_shape_limit(
    spectrum: EigenSpectrum,
    draws: int,
    series_terms: int,
    rng: np.random.Generator,
) -> LimitSample:
    """Simulate the eigenvalue-mixture limit of the shape statistic.

    Each draw is sum_b lambda_b * I_b with independent squared-bridge
    integrals I_b, one per retained eigenvalue.
    """
    if draws < 1:
        raise ConfigError(f"draws must be >= 1, got {draws}")
    total = np.zeros(draws)
    scratch = _scratch_buffer(series_terms, draws)
    for lam in spectrum.eigenvalues:
        _accumulate_bridge_draws(series_terms, rng, total, lam, scratch)
    total[::-1].sort()
    return LimitSample(total, draws, series_terms)


def empirical_pvalue(stat: float, sample: LimitSample) -> float:
    """Add-one exceedance p-value of ``stat`` against a simulated sample."""
    if sample.draws < 1:
        raise ConfigError("empty limit sample")
    exceed = int((sample.values >= stat).sum())
    return (1 + exceed) / (sample.draws + 1)


def pvalue_total(
    stat: float,
    lrv: float,
    draws: int,
    series_terms: int,
    rng: np.random.Generator,
) -> float:
    """p-value of the total-volatility statistic given a long-run variance."""
    if lrv < 0.0:
        raise ConfigError(f"long-run variance must be >= 0, got {lrv}")
    values = lrv * bb_l2_draw(series_terms, rng, size=draws)
    values[::-1].sort()
    return empirical_pvalue(stat, LimitSample(values, draws, series_terms))


def fisher_combine(p1: float, p2: float) -> TestReport:
    """Combine two independent p-values into the global test report.

    The statistic is -2(log p1 + log p2); under the null it is chi-squared
    with 4 degrees of freedom, whose survival function has the closed form
    exp(-s/2) (1 + s/2).
    """
    if not (0.0 < p1 <= 1.0 and 0.0 < p2 <= 1.0):
        raise ConfigError(f"p-values must be in (0, 1], got {p1}, {p2}")
    stat = -2.0 * (math.log(p1) + math.log(p2))
    p_global = math.exp(-stat / 2.0) * (1.0 + stat / 2.0)
    return TestReport(stat, p_global, "global", nuisance=(p1, p2))


def run_tests(
    f: StdQVPanel,
    lq: LogTotalQV,
    rng: np.random.Generator,
    *,
    draws: int = DEFAULT_DRAWS,
    series_terms: int = DEFAULT_SERIES_TERMS,
    eigen_threshold: float = DEFAULT_EIGEN_THRESHOLD,
) -> tuple[TestReport, TestReport, TestReport]:
    """Run the shape, total and global tests on one panel.

    The limit distributions are simulated from ``rng`` in a fixed order
    (shape first, then total), so results are reproducible for a given
    generator state.
    """
    stat1 = shape_statistic(f)
    spectrum = eigen_spectrum(fde_covariance(f), eigen_threshold)
    p1 = empirical_pvalue(stat1, simulate_shape_limit(spectrum, draws, series_terms, rng))
    shape_report = TestReport(stat1, p1, "shape", nuisance=spectrum)

    stat2 = total_statistic(lq)
    lam = longrun_variance(lq.values)
    p2 = pvalue_total(stat2, lam, draws, series_terms, rng)
    total_report = TestReport(stat2, p2, "total", nuisance=lam)

    return shape_report, total_report, fisher_combine(p1, p2)
