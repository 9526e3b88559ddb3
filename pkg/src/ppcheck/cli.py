"""Command-line interface.

Exit codes: 0 all checks pass, 1 usage error, 2 data error, 3 a check failed
(plots and reports are still written). Defaults for the shared options can be
set through ``PPC_<OPTION>`` environment variables, e.g. ``PPC_SEED=7``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings

from . import __version__
from .calibration import (
    bar_check,
    binned_calibration,
    cumulative_ordinal_calibration,
    ovo_calibration,
    pav_calibration_plot,
    pav_residuals,
)
from .data import (
    BinaryPredictionTable,
    BinarySchema,
    CategoricalSchema,
    DataError,
    DrawsSchema,
    ObservationSample,
    ObservationSchema,
    load_table,
    write_table,
)
from .detect import diagnose
from .estimators import BandwidthWarning, fit_histogram, fit_kde, fit_qdot
from .figures import calibration_plot, density_plot, pit_ecdf_plot
from .overlay import OverlaySpec, overlay_histogram, overlay_kde, overlay_qdot
from .pit import describe_estimate, pit_from_cdf_values, pit_sample
from .report import DiagnosticReport, recommendations
from .rootogram import RootogramSpec, count_frequencies, rootogram
from .svg import render_svg
from .synthetic import KINDS, generate, true_density
from .uniformity import gof_test

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CHECK_FAILED = 0, 1, 2, 3
VIZ = ("kde", "hist", "qdot")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def env_default(name: str, fallback):
    return os.environ.get(f"PPC_{name.upper()}", fallback)


def bandwidth_arg(text: str):
    if text in ("sj", "silverman"):
        return text
    try:
        h = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bandwidth must be sj, silverman or a number, got {text!r}") from None
    if not (math.isfinite(h) and h > 0):
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return h


def bounds_arg(text: str):
    """auto | none | LO,HI with either side optionally empty."""
    if text in ("auto", "none"):
        return text
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"bounds must be auto, none or LO,HI, got {text!r}")
    try:
        lo, hi = (float(p) if p.strip() else None for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bounds must be numbers, got {text!r}") from None
    if lo is None and hi is None:
        return "none"
    if lo is not None and hi is not None and not lo < hi:
        raise argparse.ArgumentTypeError("lower bound must be below upper bound")
    return (lo, hi)


def unit_interval(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"value must lie in (0, 1), got {text}")
    return v


def _common(p, *, column=True, draws=False, draws_required=False):
    p.add_argument("--input", required=True, help="CSV or JSON data file")
    if column:
        p.add_argument("--column", default=env_default("column", "y"), help="observation column (default y)")
    if draws:
        p.add_argument("--draws", required=draws_required, default=None, help="wide draws file, one row per draw")
    p.add_argument("--seed", type=int, default=env_default("seed", "0"))
    p.add_argument("--out", default=env_default("out", None), help="SVG output path")
    p.add_argument("--report", default=env_default("report", None), help="JSON report path")


def _density_opts(p):
    p.add_argument("--viz", choices=VIZ, default=env_default("viz", "kde"))
    p.add_argument("--bw", type=bandwidth_arg, default=env_default("bw", "sj"))
    p.add_argument("--bounds", type=bounds_arg, default=env_default("bounds", "none"))
    p.add_argument("--alpha", type=unit_interval, default=env_default("alpha", "0.05"))
    p.add_argument("--nq", type=int, default=100, help="quantile dots (default 100)")
    p.add_argument("--style", choices=("ecdf", "ecdf_difference"), default="ecdf_difference")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ppcheck", description="Visual predictive checks with PIT-based goodness-of-fit tests.")
    parser.add_argument("--version", action="version", version=f"ppcheck {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("density", help="density plot of a sample plus its PIT-ECDF test")
    _common(p)
    _density_opts(p)

    p = sub.add_parser("pit", help="uniformity test of precomputed PIT / CDF values")
    _common(p)
    p.add_argument("--alpha", type=unit_interval, default=env_default("alpha", "0.05"))
    p.add_argument("--style", choices=("ecdf", "ecdf_difference"), default="ecdf_difference")

    p = sub.add_parser("detect", help="report point masses and hard bounds")
    _common(p)

    p = sub.add_parser("overlay", help="observation plot overlaid with predictive draws")
    _common(p, draws=True, draws_required=True)
    _density_opts(p)
    p.add_argument("--subset", type=int, default=None, help="number of draws shown")
    p.add_argument("--interval-mass", type=unit_interval, default=0.9)
    p.add_argument("--freeze-bw", action="store_true", help="reuse the observation bandwidth for every draw")

    p = sub.add_parser("rootogram", help="rootogram of count data")
    _common(p, draws=True, draws_required=True)
    p.add_argument("--style", choices=("standing", "hanging", "suspended", "discrete"), default="discrete")
    p.add_argument("--scale", choices=("sqrt", "raw"), default="sqrt")
    p.add_argument("--interval-mass", type=unit_interval, default=0.9)
    p.add_argument("--c-max", type=int, default=None)

    p = sub.add_parser("calibration", help="calibration checks for binary, categorical and ordinal predictions")
    _common(p, column=False, draws=True)
    p.add_argument("--mode", choices=("binary", "binned", "ovo", "ordinal", "bar"), default="binary")
    p.add_argument("--pred", default="pred", help="predicted probability column (binary modes)")
    p.add_argument("--outcome", default="y", help="outcome column")
    p.add_argument("--probs", default=None, help="comma-separated category probability columns (ovo, ordinal)")
    p.add_argument("--covariate", default=None, help="add a PAV residual plot against this column")
    p.add_argument("--level", type=unit_interval, default=0.95)
    p.add_argument("--n-sim", type=int, default=2000)
    p.add_argument("--bins", type=int, default=10)

    p = sub.add_parser("demo", help="run the density check on a synthetic sample")
    p.add_argument("--kind", choices=KINDS, default="smooth_normal")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--data-out", default=None, help="also write the generated sample as CSV")
    p.add_argument("--seed", type=int, default=env_default("seed", "0"))
    p.add_argument("--out", default=env_default("out", None))
    p.add_argument("--report", default=env_default("report", None))
    _density_opts(p)
    return parser


# ---------------------------------------------------------------------------
# helpers


def _fit(obs: ObservationSample, args):
    if args.viz == "kde":
        if args.bounds == "auto":
            return fit_kde(obs, bandwidth=args.bw, boundary="auto")
        if args.bounds == "none":
            return fit_kde(obs, bandwidth=args.bw)
        return fit_kde(obs, bandwidth=args.bw, boundary="reflect", bounds=args.bounds)
    if args.viz == "hist":
        return fit_histogram(obs)
    return fit_qdot(obs, n_q=args.nq)


def _emit(report: DiagnosticReport, args, panels) -> int:
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if args.out:
        render_svg(panels, args.out)
    if args.report:
        report.write(args.report)
    return report.exit_code


def _density_check(obs: ObservationSample, args, report: DiagnosticReport, truth=None) -> list:
    diag = diagnose(obs)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BandwidthWarning)
        est = _fit(obs, args)
    report.warnings.extend(str(w.message) for w in caught if issubclass(w.category, BandwidthWarning))
    pits = pit_sample(est, obs, seed=args.seed)
    verdict = gof_test(pits, alpha=args.alpha, style=args.style)
    vd = verdict.to_dict()
    report.diagnosis = diag.to_dict()
    report.checks.append({"check": "pit_uniformity", "estimate": describe_estimate(est), "pit_randomized": pits.randomized, "verdict": vd})
    recs, warns = recommendations(diag, args.viz, vd, obs.values)
    report.recommendation.extend(recs)
    report.warnings.extend(warns)
    report.exit_code = EXIT_OK if verdict.passed else EXIT_CHECK_FAILED
    status = "pass" if verdict.passed else "FAIL"
    where = "" if verdict.first_exit is None else f" (first exit at z={verdict.first_exit[0]:.2f}, {verdict.first_exit[1]})"
    print(f"{args.viz}: PIT uniformity {status}{where}")
    return [density_plot(est, label=obs.label, truth=truth), pit_ecdf_plot(verdict)]


def _config(args, *names) -> dict:
    out = {}
    for n in names:
        v = getattr(args, n, None)
        out[n] = list(v) if isinstance(v, tuple) else v
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_density(args) -> int:
    obs = load_table(args.input, ObservationSchema(args.column))
    report = DiagnosticReport("density", args.seed, config=_config(args, "column", "viz", "bw", "bounds", "alpha", "nq", "style"))
    report.add_input("input", args.input)
    panels = _density_check(obs, args, report)
    return _emit(report, args, panels)


def cmd_pit(args) -> int:
    u = load_table(args.input, ObservationSchema(args.column))
    pits = pit_from_cdf_values(u.values)
    verdict = gof_test(pits, alpha=args.alpha, style=args.style)
    report = DiagnosticReport("pit", args.seed, config=_config(args, "column", "alpha", "style"))
    report.add_input("input", args.input)
    report.checks.append({"check": "pit_uniformity", "verdict": verdict.to_dict()})
    report.exit_code = EXIT_OK if verdict.passed else EXIT_CHECK_FAILED
    print(f"PIT uniformity {'pass' if verdict.passed else 'FAIL'}")
    return _emit(report, args, [pit_ecdf_plot(verdict)])


def cmd_detect(args) -> int:
    obs = load_table(args.input, ObservationSchema(args.column))
    diag = diagnose(obs)
    report = DiagnosticReport("detect", args.seed, config=_config(args, "column"), diagnosis=diag.to_dict())
    report.add_input("input", args.input)
    recs, _ = recommendations(diag, None, None, obs.values)
    report.recommendation.extend(recs)
    print(json.dumps(report.to_dict()["diagnosis"], sort_keys=True))
    return _emit(report, args, [density_plot(fit_qdot(obs), label=obs.label)])


def cmd_overlay(args) -> int:
    obs = load_table(args.input, ObservationSchema(args.column))
    draws = load_table(args.draws, DrawsSchema())
    style = {"kde": "kde", "hist": "histogram", "qdot": "qdot"}[args.viz]
    boundary, bounds = "none", (None, None)
    if args.bounds == "auto":
        boundary = "auto"
    elif isinstance(args.bounds, tuple):
        boundary, bounds = "reflect", args.bounds
    spec = OverlaySpec(
        style=style,
        draw_subset=args.subset,
        interval_mass=args.interval_mass,
        bandwidth=args.bw,
        boundary=boundary,
        bounds=bounds,
        freeze_bandwidth=args.freeze_bw,
        n_q=args.nq,
        alpha=args.alpha,
        seed=args.seed,
    )
    builder = {"kde": overlay_kde, "histogram": overlay_histogram, "qdot": overlay_qdot}[style]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BandwidthWarning)
        plot = builder(obs, draws, spec)
    report = DiagnosticReport("overlay", args.seed, config=_config(args, "column", "viz", "bw", "bounds", "subset", "interval_mass", "freeze_bw"))
    report.add_input("input", args.input)
    report.add_input("draws", args.draws)
    report.checks.append({"check": f"overlay_{style}", "summary": plot.data, "annotations": plot.annotations})
    diag = diagnose(obs)
    report.diagnosis = diag.to_dict()
    gof = plot.annotations.get("gof")
    recs, warns = recommendations(diag, args.viz, gof, obs.values)
    report.recommendation.extend(recs)
    report.warnings.extend(warns)
    if gof is not None and not gof["pass"]:
        report.exit_code = EXIT_CHECK_FAILED
    print(f"overlay {style}: {len(plot.data.get('draw_indices', []))} draws" + ("" if gof is None else f", observation PIT uniformity {'pass' if gof['pass'] else 'FAIL'}"))
    return _emit(report, args, [plot])


def cmd_rootogram(args) -> int:
    obs = load_table(args.input, ObservationSchema(args.column))
    draws = load_table(args.draws, DrawsSchema())
    table = count_frequencies(obs, draws, c_max="auto" if args.c_max is None else args.c_max, interval_mass=args.interval_mass)
    plot = rootogram(table, RootogramSpec(args.style, args.interval_mass, args.scale))
    report = DiagnosticReport("rootogram", args.seed, config=_config(args, "column", "style", "scale", "interval_mass", "c_max"))
    report.add_input("input", args.input)
    report.add_input("draws", args.draws)
    report.checks.append({"check": "rootogram", "table": table.to_dict(), "outside_interval": plot.data["flags"]})
    print(f"rootogram {args.style}: {len(plot.data['flags'])} counts outside their {args.interval_mass:g} interval")
    return _emit(report, args, [plot])


def _prob_columns(args) -> list[str]:
    if not args.probs:
        raise DataError(f"--mode {args.mode} needs --probs with the category probability columns")
    return [c.strip() for c in args.probs.split(",") if c.strip()]


def cmd_calibration(args) -> int:
    report = DiagnosticReport("calibration", args.seed, config=_config(args, "mode", "pred", "outcome", "probs", "level", "n_sim", "bins"))
    report.add_input("input", args.input)
    panels, curves = [], []
    if args.mode in ("binary", "binned", "bar") and not args.probs:
        covs = (args.covariate,) if args.covariate else ()
        table = load_table(args.input, BinarySchema(args.pred, args.outcome, covs))
        if args.draws:
            sims = load_table(args.draws, DrawsSchema()).matrix
            table = BinaryPredictionTable(table.predicted_prob, table.outcome, table.covariates, sims)
            report.add_input("draws", args.draws)
        if args.mode == "binary":
            curve = pav_calibration_plot(table, args.level, seed=args.seed, n_sim=args.n_sim)
            curves.append(curve)
            panels.append(calibration_plot(curve))
            if args.covariate:
                panels.append(pav_residuals(table, args.covariate, curve))
        elif args.mode == "binned":
            curve = binned_calibration(table, args.bins, args.level)
            curves.append(curve)
            panels.append(calibration_plot(curve))
        else:
            plot = bar_check(table, args.level, seed=args.seed, n_sim=args.n_sim)
            panels.append(plot)
            report.checks.append({"check": "bar", "summary": plot.data})
            diag = diagnose(ObservationSample(table.outcome.astype(float), label=args.outcome))
            recs, warns = recommendations(diag, "bar", None, table.outcome)
            report.recommendation.extend(recs)
            report.warnings.extend(warns)
    else:
        if args.mode not in ("ovo", "ordinal", "bar"):
            raise DataError(f"--mode {args.mode} takes a binary table, not --probs")
        table = load_table(args.input, CategoricalSchema(_prob_columns(args), args.outcome, ordered=args.mode == "ordinal"))
        if args.mode == "bar":
            plot = bar_check(table, args.level, seed=args.seed, n_sim=args.n_sim)
            panels.append(plot)
            report.checks.append({"check": "bar", "summary": plot.data})
        else:
            fn = ovo_calibration if args.mode == "ovo" else cumulative_ordinal_calibration
            curves = fn(table, args.level, seed=args.seed, n_sim=args.n_sim)
            panels.extend(calibration_plot(c) for c in curves)
    for c in curves:
        report.checks.append({"check": f"calibration_{c.kind}", "curve": c.to_dict()})
    flagged = sum(c.n_flagged for c in curves)
    report.exit_code = EXIT_CHECK_FAILED if flagged else EXIT_OK
    print(f"calibration {args.mode}: {flagged} flagged points across {len(curves)} curve(s)" if curves else f"calibration {args.mode}: done")
    return _emit(report, args, panels)


def cmd_demo(args) -> int:
    if args.n < 2:
        raise DataError("--n must be at least 2")
    obs = generate(args.kind, args.n, args.seed)
    report = DiagnosticReport("demo", args.seed, config=_config(args, "kind", "n", "viz", "bw", "bounds", "alpha", "nq", "style"))
    if args.data_out:
        write_table(obs, args.data_out, ObservationSchema("y"))
    truth = true_density(args.kind)
    panels = _density_check(obs, args, report, truth=truth.pdf)
    return _emit(report, args, panels)


COMMANDS = {
    "density": cmd_density,
    "pit": cmd_pit,
    "detect": cmd_detect,
    "overlay": cmd_overlay,
    "rootogram": cmd_rootogram,
    "calibration": cmd_calibration,
    "demo": cmd_demo,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
