"""Structural-break detection for intraday volatility patterns.

The package turns a panel of daily intraday price curves into realized
quadratic variation curves and runs three CUSUM tests on them: one for a
change in the volatility *shape*, one for a change in the *total* daily
volatility, and a Fisher-combined *global* test. Matching change-point
estimators, binary segmentation for multiple breaks, and a Monte Carlo
lab for size/power experiments round out the toolkit.
"""

__version__ = "0.1.0"

from .analysis import AnalysisConfig, AnalysisReport, analyze, analyze_panel
from .changepoint import (
    BreakPoint,
    ChangePointReport,
    SegmentationResult,
    binary_segmentation,
    changepoint_report,
    pooled_changepoint,
    shape_changepoint,
    shape_objective,
    total_changepoint,
    total_objective,
)
from .cusum import (
    EigenSpectrum,
    LimitSample,
    TestReport,
    bb_l2_draw,
    eigen_spectrum,
    empirical_pvalue,
    fde_covariance,
    fisher_combine,
    pvalue_total,
    run_tests,
    shape_statistic,
    simulate_shape_limit,
    total_statistic,
)
from .errors import ConfigError, DataFormatError, DegenerateDataError, VolbreakError
from .io import ingest_prices, write_panel_csv
from .lrv import longrun_variance
from .panels import (
    LogTotalQV,
    PricePanel,
    QVPanel,
    ReturnPanel,
    StdQVPanel,
    cidr_curves,
    log_total_qv,
    realized_qv,
    standardized_qv,
)
from .rng import derive_seed, stream
from .shapes import (
    CustomShape,
    FlatShape,
    SineShape,
    SlopeShape,
    UShape,
    VolatilityShape,
    named_shape,
    time_change_integral,
)
from .simlab import (
    GFactorSeries,
    ScenarioConfig,
    SimulationRun,
    ar1_series,
    estimator_distribution,
    generate_panel,
    ito_path,
    rejection_rates,
    run_power_experiment,
    run_replications,
    run_size_experiment,
    scenario_gchange,
    scenario_h0,
    scenario_ha1,
    scenario_ha2,
    scenario_ha3,
)
