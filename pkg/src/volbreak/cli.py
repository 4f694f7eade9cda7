"""Command-line interface.

Three subcommands: ``test`` runs the three break tests on a price CSV and
emits a JSON report, ``segment`` locates multiple breaks by binary
segmentation, and ``simulate`` runs Monte Carlo size/power/estimator
experiments and emits CSV tables.

Exit codes: 0 success, 2 parse or configuration error, 3 numerical
degeneracy in the data.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .analysis import AnalysisConfig, analyze_panel
from .changepoint import binary_segmentation, shape_objective, total_objective
from .errors import ConfigError, DataFormatError, DegenerateDataError
from .io import dump_json, ingest_prices, write_table_csv
from .panels import cidr_curves, log_total_qv, realized_qv, standardized_qv
from .simlab import (
    estimator_distribution,
    run_power_experiment,
    run_size_experiment,
    scenario_gchange,
    scenario_h0,
    scenario_ha1,
    scenario_ha2,
    scenario_ha3,
)
from .shapes import named_shape

_ALTERNATIVES = {"ha1": scenario_ha1, "ha2": scenario_ha2, "ha3": scenario_ha3}


def _add_test_knobs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.05, help="significance level")
    parser.add_argument("--draws", type=int, default=5000,
                        help="simulated draws of each limiting distribution")
    parser.add_argument("--series-j", type=int, default=500, dest="series_j",
                        help="terms of the squared-bridge series expansion")
    parser.add_argument("--eigen-threshold", type=float, default=0.95,
                        help="explained-variance threshold for retained eigenvalues")
    parser.add_argument("--seed", type=int, default=0, help="master random seed")
    parser.add_argument("--out", type=str, default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="volbreak",
        description="Structural-break tests for intraday volatility patterns.",
    )
    parser.add_argument("--version", action="version", version=f"volbreak {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_test = sub.add_parser("test", help="run the shape/total/global tests on a price CSV")
    p_test.add_argument("--input", required=True, help="wide price CSV (date,p0,...,pK)")
    p_test.add_argument("--objective-csv", default=None, dest="objective_csv",
                        help="also write the per-day CUSUM objective paths to this CSV")
    _add_test_knobs(p_test)

    p_seg = sub.add_parser("segment", help="locate multiple breaks by binary segmentation")
    p_seg.add_argument("--input", required=True, help="wide price CSV (date,p0,...,pK)")
    p_seg.add_argument("--min-seg", type=int, default=30, dest="min_seg",
                       help="minimum days per segment")
    _add_test_knobs(p_seg)

    p_sim = sub.add_parser("simulate", help="run Monte Carlo experiments")
    p_sim.add_argument("--scenario", required=True,
                       choices=["size", "gchange", "power", "estimator"])
    p_sim.add_argument("--shape", default="flat",
                       help="volatility shape for size scenarios (flat/slope/sine/ushape)")
    p_sim.add_argument("--alternative", default="ha3", choices=sorted(_ALTERNATIVES),
                       help="break alternative for power/estimator scenarios")
    p_sim.add_argument("--theta", type=float, default=0.5, help="break fraction")
    p_sim.add_argument("--n", type=int, required=True, help="trading days per panel")
    p_sim.add_argument("--k", type=int, required=True, help="intraday intervals per day")
    p_sim.add_argument("--reps", type=int, default=1000, help="Monte Carlo replications")
    p_sim.add_argument("--workers", type=int, default=None, help="parallel worker processes")
    _add_test_knobs(p_sim)

    return parser


def _report_error(kind: str, exc: Exception) -> None:
    payload = {"error": {"type": kind, "message": str(exc)}}
    line = getattr(exc, "line", None)
    if line is not None:
        payload["error"]["line"] = line
    print(json.dumps(payload))


def _run_test(args) -> int:
    config = AnalysisConfig(
        input=args.input,
        alpha=args.alpha,
        draws=args.draws,
        series_terms=args.series_j,
        eigen_threshold=args.eigen_threshold,
        seed=args.seed,
        mode="test",
    )
    panel = ingest_prices(args.input)
    report = analyze_panel(panel, config)
    if args.objective_csv:
        qv = realized_qv(cidr_curves(panel))
        shape_path = shape_objective(standardized_qv(qv))
        total_path = total_objective(log_total_qv(qv))
        rows = [
            {
                "day_index": i + 1,
                "date": panel.days[i],
                "shape_objective": float(shape_path[i]),
                "total_objective": float(total_path[i]),
            }
            for i in range(panel.n_days)
        ]
        write_table_csv(rows, args.objective_csv)
    text = dump_json(report.to_dict(), args.out)
    if args.out is None:
        print(text)
    return 0


def _run_segment(args) -> int:
    panel = ingest_prices(args.input)
    result = binary_segmentation(
        panel,
        alpha=args.alpha,
        min_segment=args.min_seg,
        draws=args.draws,
        series_terms=args.series_j,
        eigen_threshold=args.eigen_threshold,
        seed=args.seed,
    )
    if panel.n_days < 2 * args.min_seg:
        print("warning: panel shorter than twice the minimum segment; nothing tested",
              file=sys.stderr)
    payload = {
        "tool": {"name": "volbreak", "version": __version__},
        "config": {
            "input": args.input,
            "alpha": args.alpha,
            "min_segment": args.min_seg,
            "draws": args.draws,
            "series_terms": args.series_j,
            "eigen_threshold": args.eigen_threshold,
            "seed": args.seed,
            "mode": "segment",
        },
        "panel": {
            "n_days": panel.n_days,
            "k_intervals": panel.k_intervals,
            "first_day": panel.days[0],
            "last_day": panel.days[-1],
        },
        "breaks": [
            {"day_index": b.index, "date": b.date, "p_value": b.p_value}
            for b in result.breaks
        ],
    }
    text = dump_json(payload, args.out)
    if args.out is None:
        print(text)
    return 0


def _run_simulate(args) -> int:
    knobs = dict(
        draws=args.draws,
        series_terms=args.series_j,
        eigen_threshold=args.eigen_threshold,
        workers=args.workers,
    )
    if args.scenario == "size":
        cfg = scenario_h0(named_shape(args.shape), args.n, args.k, args.seed)
        rows = run_size_experiment(cfg, args.reps, **knobs)
    elif args.scenario == "gchange":
        cfg = scenario_gchange(args.n, args.k, args.seed)
        rows = run_size_experiment(cfg, args.reps, **knobs)
    elif args.scenario == "power":
        cfg = _ALTERNATIVES[args.alternative](args.theta, args.n, args.k, args.seed)
        rows = run_power_experiment(cfg, args.reps, **knobs)
    else:
        cfg = _ALTERNATIVES[args.alternative](args.theta, args.n, args.k, args.seed)
        values = estimator_distribution(cfg, args.reps, **knobs)
        rows = [
            {
                "scenario": cfg.label(),
                "n": cfg.n_days,
                "k": cfg.k_intervals,
                "rep": rep,
                "estimator": "pooled" if cfg.hypothesis == "HA3" else
                ("shape" if cfg.hypothesis == "HA1" else "total"),
                "theta_hat": float(v),
            }
            for rep, v in enumerate(values)
        ]

    if args.out is None:
        write_table_csv(rows, sys.stdout)
    else:
        write_table_csv(rows, args.out)
        sidecar = {
            "tool": {"name": "volbreak", "version": __version__},
            "scenario": cfg.label(),
            "n": cfg.n_days,
            "k": cfg.k_intervals,
            "reps": args.reps,
            "seed": args.seed,
            "draws": args.draws,
            "series_terms": args.series_j,
            "eigen_threshold": args.eigen_threshold,
        }
        dump_json(sidecar, args.out + ".meta.json")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "test":
            return _run_test(args)
        if args.command == "segment":
            return _run_segment(args)
        return _run_simulate(args)
    except (DataFormatError, ConfigError) as exc:
        _report_error(type(exc).__name__, exc)
        return 2
    except DegenerateDataError as exc:
        _report_error("DegenerateDataError", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
