"""End-to-end analysis pipeline: prices in, structured verdicts out.

``analyze`` chains the curve transforms, the three tests and the break
estimators, and packages the outcome in a schema-stable report: every
field is always present, with change-point entries set to null unless the
corresponding test rejected at the configured level.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import __version__, cusum
from .changepoint import ChangePointReport, changepoint_report
from .errors import ConfigError
from .io import ingest_prices
from .panels import PricePanel, cidr_curves, log_total_qv, realized_qv, standardized_qv
from .rng import stream

__all__ = ["AnalysisConfig", "AnalysisReport", "analyze", "analyze_panel"]


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of the analysis pipeline, echoed verbatim into every report."""

    input: str | None = None
    alpha: float = 0.05
    draws: int = cusum.DEFAULT_DRAWS
    series_terms: int = cusum.DEFAULT_SERIES_TERMS
    eigen_threshold: float = cusum.DEFAULT_EIGEN_THRESHOLD
    min_segment: int = 30
    seed: int = 0
    mode: str = "test"

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ConfigError(f"alpha must be in (0, 1], got {self.alpha}")
        if self.draws < 1 or self.series_terms < 1:
            raise ConfigError("draws and series_terms must be >= 1")
        if not 0.0 < self.eigen_threshold <= 1.0:
            raise ConfigError(f"eigen_threshold must be in (0, 1], got {self.eigen_threshold}")


@dataclass(frozen=True)
class AnalysisReport:
    """Everything one analysis run decided, ready for JSON emission."""

    config: AnalysisConfig
    n_days: int
    k_intervals: int
    first_day: str
    last_day: str
    shape: cusum.TestReport
    total: cusum.TestReport
    combined: cusum.TestReport
    change_points: ChangePointReport

    def to_dict(self) -> dict:
        alpha = self.config.alpha
        cp = self.change_points

        def estimate(theta, index, date, rejected):
            if not rejected:
                return None
            return {"theta": theta, "day_index": index, "date": date}

        spectrum = self.shape.nuisance
        return {
            "tool": {"name": "volbreak", "version": __version__},
            "config": {
                "input": self.config.input,
                "alpha": alpha,
                "draws": self.config.draws,
                "series_terms": self.config.series_terms,
                "eigen_threshold": self.config.eigen_threshold,
                "min_segment": self.config.min_segment,
                "seed": self.config.seed,
                "mode": self.config.mode,
            },
            "panel": {
                "n_days": self.n_days,
                "k_intervals": self.k_intervals,
                "first_day": self.first_day,
                "last_day": self.last_day,
            },
            "tests": {
                "shape": {
                    "statistic": self.shape.statistic,
                    "p_value": self.shape.p_value,
                    "reject": self.shape.p_value <= alpha,
                    "eigenvalues_retained": int(spectrum.count),
                    "explained_fraction": spectrum.explained_fraction,
                },
                "total": {
                    "statistic": self.total.statistic,
                    "p_value": self.total.p_value,
                    "reject": self.total.p_value <= alpha,
                    "longrun_variance": self.total.nuisance,
                },
                "global": {
                    "statistic": self.combined.statistic,
                    "p_value": self.combined.p_value,
                    "reject": self.combined.p_value <= alpha,
                },
            },
            "change_points": {
                "shape": estimate(cp.theta_shape, cp.index_shape, cp.date_shape,
                                  self.shape.p_value <= alpha),
                "total": estimate(cp.theta_total, cp.index_total, cp.date_total,
                                  self.total.p_value <= alpha),
                "pooled": estimate(cp.theta_pooled, cp.index_pooled, cp.date_pooled,
                                   self.combined.p_value <= alpha),
            },
        }


def analyze_panel(panel: PricePanel, config: AnalysisConfig) -> AnalysisReport:
    """Run the full test pipeline on an in-memory panel."""
    if panel.n_days < 2:
        raise ConfigError(f"need at least 2 trading days, got {panel.n_days}")
    qv = realized_qv(cidr_curves(panel))
    f = standardized_qv(qv)
    lq = log_total_qv(qv)
    rng = stream(config.seed)
    shape_rep, total_rep, global_rep = cusum.run_tests(
        f,
        lq,
        rng,
        draws=config.draws,
        series_terms=config.series_terms,
        eigen_threshold=config.eigen_threshold,
    )
    cp = changepoint_report(
        f, lq, panel.days, shape_rep.p_value, total_rep.p_value, global_rep.p_value
    )
    return AnalysisReport(
        config=config,
        n_days=panel.n_days,
        k_intervals=panel.k_intervals,
        first_day=panel.days[0],
        last_day=panel.days[-1],
        shape=shape_rep,
        total=total_rep,
        combined=global_rep,
        change_points=cp,
    )


def analyze(config: AnalysisConfig) -> AnalysisReport:
    """Load the configured input file and analyze it."""
    if not config.input:
        raise ConfigError("analysis requires an input file")
    return analyze_panel(ingest_prices(config.input), config)
