"""Synthetic panel generation and Monte Carlo experiments.

Panels follow a functional stochastic volatility model: day i's cumulative
return curve is exp(g_i) times an Ito integral of a day-level volatility
shape, where g_i is a stationary AR(1) day-to-day volatility factor. The
Ito integral is simulated exactly through its Brownian time change, so no
Euler discretization error enters.

Scenarios cover the null (one shape throughout), three break alternatives
(shape-only, level-only, both), and a regime switch in the AR dynamics of
g_i that the tests are supposed to ignore.

Replications are independent tasks keyed by (master seed, replication
index); any worker schedule produces identical results.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from multiprocessing import get_context

import numpy as np

from . import cusum
from .changepoint import pooled_changepoint, shape_changepoint, total_changepoint
from .errors import ConfigError
from .panels import ReturnPanel, log_total_qv, realized_qv, standardized_qv
from .rng import stream
from .shapes import FlatShape, SineShape, UShape, VolatilityShape, time_change_integral

__all__ = [
    "GFactorSeries",
    "ScenarioConfig",
    "SimulationRun",
    "ar1_series",
    "ito_path",
    "generate_panel",
    "run_replications",
    "rejection_rates",
    "run_size_experiment",
    "run_power_experiment",
    "estimator_distribution",
    "scenario_h0",
    "scenario_ha1",
    "scenario_ha2",
    "scenario_ha3",
    "scenario_gchange",
]

HYPOTHESES = ("H0", "HA1", "HA2", "HA3", "GChange")
DEFAULT_ALPHA_LEVELS = (0.10, 0.05, 0.01)


@dataclass(frozen=True)
class GFactorSeries:
    """Realization of the AR(1) day-to-day volatility factor."""

    phi: float
    sigma_eps2: float
    values: np.ndarray


@dataclass(frozen=True)
class ScenarioConfig:
    """Complete data-generating configuration for one Monte Carlo cell.

    ``theta`` locates the break as a fraction of the sample: days
    1..floor(N theta) draw from ``shape``, later days from ``shape_after``.
    Under GChange the volatility shape is constant but the AR coefficient
    of g switches from ``phi`` to ``phi_after`` at mid-sample.
    """

    hypothesis: str
    n_days: int
    k_intervals: int
    seed: int
    theta: float = 0.5
    shape: VolatilityShape = FlatShape()
    shape_after: VolatilityShape | None = None
    phi: float = 0.55
    sigma_eps2: float = 0.25
    phi_after: float | None = None

    def __post_init__(self):
        if self.hypothesis not in HYPOTHESES:
            raise ConfigError(f"unknown hypothesis {self.hypothesis!r}; expected one of {HYPOTHESES}")
        if self.n_days < 2 or self.k_intervals < 2:
            raise ConfigError("need n_days >= 2 and k_intervals >= 2")
        if not 0.0 < self.theta < 1.0:
            raise ConfigError(f"theta must be in (0, 1), got {self.theta}")
        if abs(self.phi) >= 1.0:
            raise ConfigError(f"|phi| must be < 1, got {self.phi}")
        if self.sigma_eps2 < 0.0:
            raise ConfigError(f"sigma_eps2 must be >= 0, got {self.sigma_eps2}")
        if self.hypothesis in ("HA1", "HA2", "HA3") and self.shape_after is None:
            raise ConfigError(f"{self.hypothesis} requires shape_after")
        if self.hypothesis == "GChange":
            if self.phi_after is None:
                raise ConfigError("GChange requires phi_after")
            if abs(self.phi_after) >= 1.0:
                raise ConfigError(f"|phi_after| must be < 1, got {self.phi_after}")

    def label(self) -> str:
        if self.hypothesis in ("HA1", "HA2", "HA3"):
            return f"{self.hypothesis} theta={self.theta:g}"
        if self.hypothesis == "H0":
            return f"H0 {self.shape.name}"
        return self.hypothesis


def scenario_h0(shape: VolatilityShape, n_days: int, k_intervals: int, seed: int) -> ScenarioConfig:
    """Null scenario: one volatility shape for the whole sample."""
    return ScenarioConfig("H0", n_days, k_intervals, seed, shape=shape)


def scenario_ha1(theta: float, n_days: int, k_intervals: int, seed: int) -> ScenarioConfig:
    """Shape break with unchanged total volatility: flat to a faint sine.

    The sine level is chosen so the before/after total squared volatility
    both equal 0.04, isolating a pure shape change.
    """
    after = SineShape(amplitude=0.02, level=math.sqrt(199.0 / 5000.0))
    return ScenarioConfig("HA1", n_days, k_intervals, seed, theta=theta,
                          shape=FlatShape(0.2), shape_after=after)


def scenario_ha2(theta: float, n_days: int, k_intervals: int, seed: int) -> ScenarioConfig:
    """Level break with unchanged shape: flat 0.2 to flat 0.4."""
    return ScenarioConfig("HA2", n_days, k_intervals, seed, theta=theta,
                          shape=FlatShape(0.2), shape_after=FlatShape(0.4))


def scenario_ha3(theta: float, n_days: int, k_intervals: int, seed: int) -> ScenarioConfig:
    """Simultaneous shape and level break: flat 0.2 to a raised smile.

    Total squared volatility moves from 0.04 to 0.1525.
    """
    return ScenarioConfig("HA3", n_days, k_intervals, seed, theta=theta,
                          shape=FlatShape(0.2), shape_after=UShape(0.3))


def scenario_gchange(n_days: int, k_intervals: int, seed: int,
                     shape: VolatilityShape = UShape()) -> ScenarioConfig:
    """No volatility break, but the AR coefficient of g switches at mid-sample."""
    return ScenarioConfig("GChange", n_days, k_intervals, seed, shape=shape,
                          phi=0.45, phi_after=0.65)


def ar1_series(phi: float, sigma_eps2: float, n: int, rng: np.random.Generator) -> GFactorSeries:
    """Stationary AR(1) series: g_1 from the stationary law, recursion after."""
    if abs(phi) >= 1.0:
        raise ConfigError(f"|phi| must be < 1, got {phi}")
    if sigma_eps2 < 0.0:
        raise ConfigError(f"sigma_eps2 must be >= 0, got {sigma_eps2}")
    if n < 1:
        raise ConfigError(f"need n >= 1, got {n}")
    values = _ar1_values(phi, None, n, sigma_eps2, n, rng)
    return GFactorSeries(phi, sigma_eps2, values)


def _ar1_values(phi: float, phi_after: float | None, switch_after: int,
                sigma_eps2: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """AR(1) recursion with an optional coefficient switch after ``switch_after`` terms."""
    sd_eps = math.sqrt(sigma_eps2)
    g = np.empty(n)
    g[0] = rng.standard_normal() * math.sqrt(sigma_eps2 / (1.0 - phi * phi))
    eps = rng.standard_normal(n - 1) * sd_eps
    for i in range(1, n):
        coef = phi if (phi_after is None or i < switch_after) else phi_after
        g[i] = coef * g[i - 1] + eps[i - 1]
    return g


def ito_path(shape: VolatilityShape, k_intervals: int, rng: np.random.Generator):
    """Exact draw of the volatility-shaped Ito integral on the intraday grid.

    Returns ``(increments, path)``: K independent Gaussian increments with
    variances G(k/K) - G((k-1)/K), and their running sum.
    """
    if k_intervals < 2:
        raise ConfigError(f"need k_intervals >= 2, got {k_intervals}")
    grid = np.arange(k_intervals + 1) / k_intervals
    variances = np.diff(time_change_integral(shape)(grid))
    increments = rng.standard_normal(k_intervals) * np.sqrt(variances)
    return increments, np.cumsum(increments)


def generate_panel(cfg: ScenarioConfig, rng: np.random.Generator | None = None) -> ReturnPanel:
    """Simulate the panel of cumulative return curves for a scenario.

    The same configuration (seed included) always yields a bit-identical
    panel. An explicit generator overrides the config seed; the replication
    runner uses that to give each replication its own derived stream.
    """
    if rng is None:
        rng = stream(cfg.seed)
    n, k = cfg.n_days, cfg.k_intervals
    grid = np.arange(k + 1) / k

    if cfg.hypothesis == "GChange":
        g = _ar1_values(cfg.phi, cfg.phi_after, n // 2, cfg.sigma_eps2, n, rng)
    else:
        g = _ar1_values(cfg.phi, None, n, cfg.sigma_eps2, n, rng)

    sd_before = np.sqrt(np.diff(time_change_integral(cfg.shape)(grid)))
    z = rng.standard_normal((n, k))
    if cfg.hypothesis in ("HA1", "HA2", "HA3"):
        n_before = int(math.floor(n * cfg.theta))
        sd_after = np.sqrt(np.diff(time_change_integral(cfg.shape_after)(grid)))
        scale = np.where(np.arange(n)[:, None] < n_before, sd_before, sd_after)
        increments = z * scale
    else:
        increments = z * sd_before
    paths = np.cumsum(increments, axis=1)
    values = np.concatenate([np.zeros((n, 1)), paths], axis=1) * np.exp(g)[:, None]
    return ReturnPanel(values)


@dataclass(frozen=True)
class SimulationRun:
    """Per-replication results of a Monte Carlo cell, aligned by index."""

    config: ScenarioConfig
    p_shape: np.ndarray
    p_total: np.ndarray
    p_global: np.ndarray
    stat_shape: np.ndarray
    stat_total: np.ndarray
    stat_global: np.ndarray
    theta_shape: np.ndarray
    theta_total: np.ndarray
    theta_pooled: np.ndarray

    @property
    def reps(self) -> int:
        return self.p_shape.size


def _replicate_block(args) -> tuple[int, dict]:
    cfg, rep_lo, rep_hi, draws, series_terms, eigen_threshold = args
    count = rep_hi - rep_lo
    out = {
        name: np.empty(count)
        for name in ("p_shape", "p_total", "p_global", "stat_shape", "stat_total",
                     "stat_global", "theta_shape", "theta_total", "theta_pooled")
    }
    for j, rep in enumerate(range(rep_lo, rep_hi)):
        rng = stream(cfg.seed, rep)
        panel = generate_panel(cfg, rng)
        qv = realized_qv(panel)
        f = standardized_qv(qv)
        lq = log_total_qv(qv)
        shape_rep, total_rep, global_rep = cusum.run_tests(
            f, lq, rng, draws=draws, series_terms=series_terms, eigen_threshold=eigen_threshold
        )
        theta1, _ = shape_changepoint(f)
        theta2, _ = total_changepoint(lq)
        out["p_shape"][j] = shape_rep.p_value
        out["p_total"][j] = total_rep.p_value
        out["p_global"][j] = global_rep.p_value
        out["stat_shape"][j] = shape_rep.statistic
        out["stat_total"][j] = total_rep.statistic
        out["stat_global"][j] = global_rep.statistic
        out["theta_shape"][j] = theta1
        out["theta_total"][j] = theta2
        out["theta_pooled"][j] = pooled_changepoint(
            theta1, theta2, shape_rep.p_value, total_rep.p_value
        )
    return rep_lo, out


def run_replications(
    cfg: ScenarioConfig,
    reps: int,
    *,
    draws: int = cusum.DEFAULT_DRAWS,
    series_terms: int = cusum.DEFAULT_SERIES_TERMS,
    eigen_threshold: float = cusum.DEFAULT_EIGEN_THRESHOLD,
    workers: int | None = None,
) -> SimulationRun:
    """Run independent replications of a scenario and collect all outcomes.

    Replication ``rep`` draws everything from the stream (seed, rep), so the
    result does not depend on ``workers`` or scheduling.
    """
    if reps < 1:
        raise ConfigError(f"reps must be >= 1, got {reps}")
    if workers is None:
        workers = min(os.cpu_count() or 1, reps)
    workers = max(1, min(workers, reps))

    block = max(1, math.ceil(reps / (4 * workers)))
    tasks = [
        (cfg, lo, min(lo + block, reps), draws, series_terms, eigen_threshold)
        for lo in range(0, reps, block)
    ]
    if workers == 1 or len(tasks) == 1:
        results = [_replicate_block(t) for t in tasks]
    else:
        with get_context("fork").Pool(workers) as pool:
            results = pool.map(_replicate_block, tasks)

    merged = {
        name: np.empty(reps)
        for name in ("p_shape", "p_total", "p_global", "stat_shape", "stat_total",
                     "stat_global", "theta_shape", "theta_total", "theta_pooled")
    }
    for rep_lo, block_out in results:
        count = next(iter(block_out.values())).size
        for name, arr in block_out.items():
            merged[name][rep_lo : rep_lo + count] = arr
    return SimulationRun(config=cfg, **merged)


def rejection_rates(run: SimulationRun, alpha_levels=DEFAULT_ALPHA_LEVELS) -> dict:
    """Fraction of replications with p <= alpha, per test and level."""
    pvals = {"shape": run.p_shape, "total": run.p_total, "global": run.p_global}
    return {
        test: {alpha: float((p <= alpha).mean()) for alpha in alpha_levels}
        for test, p in pvals.items()
    }


def _table_rows(run: SimulationRun, alpha_levels) -> list[dict]:
    rates = rejection_rates(run, alpha_levels)
    rows = []
    for alpha in alpha_levels:
        for test in ("shape", "total", "global"):
            rows.append(
                {
                    "scenario": run.config.label(),
                    "n": run.config.n_days,
                    "k": run.config.k_intervals,
                    "level": alpha,
                    "test": test,
                    "rejection_rate": rates[test][alpha],
                }
            )
    return rows


def run_size_experiment(
    cfg: ScenarioConfig,
    reps: int,
    alpha_levels=DEFAULT_ALPHA_LEVELS,
    **knobs,
) -> list[dict]:
    """Empirical size table rows for a null (or GChange) scenario."""
    if cfg.hypothesis not in ("H0", "GChange"):
        raise ConfigError(f"size experiment expects H0 or GChange, got {cfg.hypothesis}")
    return _table_rows(run_replications(cfg, reps, **knobs), alpha_levels)


def run_power_experiment(
    cfg: ScenarioConfig,
    reps: int,
    alpha_levels=DEFAULT_ALPHA_LEVELS,
    **knobs,
) -> list[dict]:
    """Empirical power table rows for a break alternative."""
    if cfg.hypothesis not in ("HA1", "HA2", "HA3"):
        raise ConfigError(f"power experiment expects HA1/HA2/HA3, got {cfg.hypothesis}")
    return _table_rows(run_replications(cfg, reps, **knobs), alpha_levels)


_SCENARIO_ESTIMATOR = {"HA1": "theta_shape", "HA2": "theta_total"}


def estimator_distribution(cfg: ScenarioConfig, reps: int, estimator: str | None = None,
                           **knobs) -> np.ndarray:
    """Monte Carlo draws of the scenario's change-point estimator.

    By default a shape-only break reports the shape estimator, a level-only
    break the total-volatility estimator, and anything else the pooled one.
    """
    if estimator is None:
        estimator = _SCENARIO_ESTIMATOR.get(cfg.hypothesis, "theta_pooled")
    if estimator not in ("theta_shape", "theta_total", "theta_pooled"):
        raise ConfigError(f"unknown estimator {estimator!r}")
    run = run_replications(cfg, reps, **knobs)
    return getattr(run, estimator).copy()
