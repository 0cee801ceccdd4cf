"""Command-line front-end: ``vacdetect {steady,validate,sweep,correlate}``.

Exit codes: 0 ok, 2 config error, 3 validation tolerance failure,
4 calibration failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import analytic, oracle, runner
from .cavity import CavityConfig, xi_bad_cavity
from .model import ConfigError, SystemSpec, validate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_CALIBRATION = 4

SWEEP_AXES = ("detuning", "xi", "kappa", "alpha")
SWEEP_COLUMNS = ["value", "detuning", "xi", "efficiency", "mean_current", "variance", "variance_ratio"]
KAPPA_COLUMNS = ["kappa", "shot_noise_ratio"]
ORACLE_SWEEP_COLUMNS = ["oracle_mean_current", "oracle_variance_ratio", "mean_current_error"]
CORRELATE_COLUMNS = ["tau", "real", "imag", "abs", "smooth_real", "smooth_imag", "smooth_abs"]
ORACLE_CORRELATE_COLUMNS = [
    "oracle_real",
    "oracle_imag",
    "oracle_abs",
    "oracle_smooth_real",
    "oracle_smooth_imag",
    "oracle_smooth_abs",
]
VALIDATE_COLUMNS = ["check", "analytic", "oracle", "error", "tolerance", "kind", "passed"]
ORACLE_KEYS = ("mode_count", "bandwidth", "dt", "horizon", "probe_scale", "calibration_tolerance", "fd_step")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class LoadedConfig:
    spec: SystemSpec
    settings: oracle.OracleSettings
    cavity: dict | None


def load_config(path: str) -> LoadedConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_CONFIG) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}", EXIT_CONFIG) from None
    if not isinstance(doc, dict):
        raise CliError("config must be a JSON object", EXIT_CONFIG)
    try:
        spec = SystemSpec.from_dict(doc)
    except ConfigError as exc:
        raise CliError(f"violation: {exc}", EXIT_CONFIG) from None
    report = validate(spec)
    if not report.ok:
        raise CliError("\n".join(report.lines()), EXIT_CONFIG)
    for line in report.warnings:
        print(f"warning: {line}", file=sys.stderr)
    raw = doc.get("oracle") or {}
    unknown = set(raw) - set(ORACLE_KEYS)
    if unknown:
        raise CliError(f"violation: unknown oracle settings {sorted(unknown)}", EXIT_CONFIG)
    try:
        settings = oracle.OracleSettings(**raw)
    except TypeError as exc:
        raise CliError(f"violation: {exc}", EXIT_CONFIG) from None
    return LoadedConfig(spec, settings, doc.get("cavity"))


# ----------------------------------------------------------------------
# output helpers


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating, int, np.integer)):
        return repr(float(value))
    return str(value)


def render_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c, "")) for c in columns])
    return buf.getvalue()


def render_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not serialisable: {type(obj).__name__}")


def emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(rows, columns, fmt, meta=None) -> str:
    if fmt == "json":
        return render_json({"schema_version": runner.SCHEMA_VERSION, "columns": columns, "rows": rows, **(meta or {})})
    return render_csv(rows, columns)


# ----------------------------------------------------------------------
# steady


def cmd_steady(args) -> int:
    cfg = load_config(args.config)
    if args.oracle:
        result = runner.oracle_run(cfg.spec, cfg.settings)
    else:
        result = runner.analytic_run(cfg.spec, cfg.settings)
    steady = analytic.mean_current_steady(cfg.settings.resolve(cfg.spec))
    summary = [
        f"steady current: {result.steady_summary['mean_current']:.6g}",
        f"efficiency factor: {steady.efficiency_factor:.6g}",
        f"xi: {steady.xi:.6g}",
    ]
    print("\n".join(summary), file=sys.stdout if args.out else sys.stderr)
    if args.format == "csv":
        rows = [{"t": t, "mean_current": i} for t, i in zip(result.time_grid, result.mean_current_trace)]
        text = render_csv(rows, ["t", "mean_current"])
    else:
        text = render_json(result.to_dict())
    emit(text, args.out)
    if args.figure:
        from .plotting import plot_traces

        plot_traces(
            args.figure,
            result.time_grid,
            {result.provenance: result.mean_current_trace},
            steady=steady.mean_current,
        )
    return EXIT_OK


# ----------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    settings = cfg.settings
    overrides = {}
    if args.mode_count is not None:
        overrides["mode_count"] = args.mode_count
    if args.bandwidth is not None:
        overrides["bandwidth"] = args.bandwidth
    if overrides:
        spec, settings = oracle.with_settings(cfg.spec, settings, **overrides)
        report = validate(spec)
        if not report.ok:
            raise CliError("\n".join(report.lines()), EXIT_CONFIG)
        for line in report.warnings:
            print(f"warning: {line}", file=sys.stderr)
    outcome = runner.validate_run(cfg.spec, settings, correlation=not args.no_correlation, convergence=not args.no_convergence)
    rows = [c.row() for c in outcome.checks]
    for name, shift in outcome.diagnostics.get("convergence_deltas", {}).items():
        limit = runner.CONVERGENCE_LIMITS[name]
        rows.append(
            {
                "check": f"convergence_{name}",
                "analytic": 0.0,
                "oracle": shift,
                "error": shift,
                "tolerance": limit,
                "kind": "absolute",
                "passed": shift <= limit,
            }
        )
    emit(_table(rows, VALIDATE_COLUMNS, args.format, {"diagnostics": outcome.diagnostics}), args.out)
    for c in outcome.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: oracle {c.oracle:.6g} vs analytic {c.analytic:.6g} (error {c.error:.3g}, tol {c.tolerance:g})", file=sys.stderr)
    for note in outcome.convergence_notes:
        print(f"FAIL convergence: {note}", file=sys.stderr)
    if args.figure and rows:
        from .plotting import plot_checks

        plot_checks(args.figure, rows)
    return EXIT_OK if outcome.ok else EXIT_TOLERANCE


# ----------------------------------------------------------------------
# sweep


def parse_grid(text: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"violation: grid must be comma-separated numbers, got {text!r}", EXIT_CONFIG) from None
    if not values:
        raise CliError("violation: empty grid", EXIT_CONFIG)
    return values


def sweep_point(spec: SystemSpec, axis: str, value: float, cavity: dict | None):
    """Spec for one sweep point plus axis-specific extra columns."""
    extra = {}
    if axis == "detuning":
        spec = spec.with_changes(drive={"laser_frequency": spec.detector.transition_frequency + value})
    elif axis == "alpha":
        spec = spec.with_changes(drive={"alpha": complex(value)})
    elif axis == "xi":
        if value < 0:
            raise CliError("violation: xi must be >= 0", EXIT_CONFIG)
        spec = spec.with_changes(radiative={"gamma": value * spec.electronic.gamma})
    elif axis == "kappa":
        if not cavity or "g_ke" not in cavity:
            raise CliError("violation: kappa sweep needs a 'cavity' section with g_ke", EXIT_CONFIG)
        cfg = CavityConfig(float(cavity["g_ke"]), value, spec.electronic.gamma, tuple(cavity.get("other_loss_ratios", ())))
        try:
            xi = xi_bad_cavity(cfg)
        except ValueError as exc:
            raise CliError(f"violation: {exc}", EXIT_CONFIG) from None
        spec = spec.with_changes(radiative={"gamma": xi * spec.electronic.gamma})
        extra["kappa"] = value
    else:
        raise CliError(f"violation: unknown axis {axis!r}", EXIT_CONFIG)
    return spec, extra


def _analytic_row(spec: SystemSpec, value: float, extra: dict) -> dict:
    steady = analytic.mean_current_steady(spec)
    var = analytic.variance_summary(spec)
    row = {
        "value": value,
        "detuning": spec.detuning,
        "xi": spec.xi,
        "efficiency": steady.efficiency_factor,
        "mean_current": steady.mean_current,
        "variance": var.variance,
        "variance_ratio": var.ratio,
        **extra,
    }
    if "kappa" in extra:
        row["shot_noise_ratio"] = var.ratio
    return row


def _oracle_columns(job):
    spec, settings = job
    obs = runner.oracle_observables(spec, settings, correlation=False)
    return obs.mean_current, obs.variance_ratio


def cmd_sweep(args) -> int:
    if args.axis not in SWEEP_AXES:
        raise CliError(f"violation: axis must be one of {', '.join(SWEEP_AXES)}", EXIT_CONFIG)
    cfg = load_config(args.config)
    base = cfg.settings.resolve(cfg.spec)
    grid = parse_grid(args.grid)
    points = [sweep_point(base, args.axis, v, cfg.cavity) for v in grid]
    rows = [_analytic_row(spec, v, extra) for (spec, extra), v in zip(points, grid)]
    columns = list(SWEEP_COLUMNS) + (KAPPA_COLUMNS if args.axis == "kappa" else [])
    if args.oracle:
        for spec, _ in points:
            report = validate(spec)
            if not report.ok:
                raise CliError("\n".join(report.lines()), EXIT_CONFIG)
        jobs = [(spec, cfg.settings) for spec, _ in points]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                values = list(pool.map(_oracle_columns, jobs))
        else:
            values = [_oracle_columns(j) for j in jobs]
        for row, (mean, ratio) in zip(rows, values):
            row["oracle_mean_current"] = mean
            row["oracle_variance_ratio"] = ratio
            ref = row["mean_current"]
            row["mean_current_error"] = abs(mean / ref - 1.0) if ref else abs(mean)
        columns += ORACLE_SWEEP_COLUMNS
    emit(_table(rows, columns, args.format, {"axis": args.axis}), args.out)
    if args.figure:
        from .plotting import plot_sweep

        plot_sweep(args.figure, rows, "value")
    return EXIT_OK


# ----------------------------------------------------------------------
# correlate


def cmd_correlate(args) -> int:
    if not args.tau_max > 0:
        raise CliError("violation: tau_max must be > 0", EXIT_CONFIG)
    if args.points < 2:
        raise CliError("violation: points must be >= 2", EXIT_CONFIG)
    cfg = load_config(args.config)
    spec = cfg.settings.resolve(cfg.spec)
    tau = np.linspace(0.0, args.tau_max, args.points)
    trace = analytic.correlation_stationary(spec, tau)
    rows = []
    for k, t in enumerate(tau):
        v, s = trace.values[k], trace.smooth[k]
        rows.append(
            {
                "tau": t,
                "real": v.real,
                "imag": v.imag,
                "abs": abs(v),
                "smooth_real": s.real,
                "smooth_imag": s.imag,
                "smooth_abs": abs(s),
            }
        )
    columns = list(CORRELATE_COLUMNS)
    meta = {"delta_weight": trace.delta_weight, "electronic_correlation_model": trace.electronic_correlation_model}
    if args.oracle:
        t1 = runner.CORRELATION_T1 / spec.gamma_total
        horizon = max(float(cfg.settings.time_grid(spec)[-1]), t1 + args.tau_max)
        if runner.recurrence_time(spec) <= horizon:
            raise CliError("violation: tau_max reaches the reservoir recurrence time; raise mode_count", EXIT_CONFIG)
        system = oracle.build_discretized(spec, cfg.settings)
        U = oracle.propagate(system, cfg.settings.time_grid(spec))
        terms = oracle.oracle_correlation(U, system, t1, t1 + tau)
        for row, v, s in zip(rows, terms.total, terms.smooth):
            row.update(
                oracle_real=v.real,
                oracle_imag=v.imag,
                oracle_abs=abs(v),
                oracle_smooth_real=s.real,
                oracle_smooth_imag=s.imag,
                oracle_smooth_abs=abs(s),
            )
        columns += ORACLE_CORRELATE_COLUMNS
        meta["t1"] = t1
        meta["unitarity_drift"] = U.unitarity_drift
    emit(_table(rows, columns, args.format, meta), args.out)
    if args.figure:
        from .plotting import plot_correlation

        plot_correlation(args.figure, rows)
    return EXIT_OK


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vacdetect", description="Photodetection with vacuum back-action.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, oracle_flag=True):
        p.add_argument("--config", required=True, help="JSON system spec (plus optional 'oracle' section)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        if oracle_flag:
            p.add_argument("--oracle", action="store_true", help="add discretised-reservoir results")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--seed", type=int, default=None, help="reserved; the model is deterministic")
        p.add_argument("--figure", help="also render a PNG figure to this path")

    p = sub.add_parser("steady", help="steady-state current summary")
    common(p)
    p.set_defaults(func=cmd_steady, format="json")

    p = sub.add_parser("validate", help="oracle vs Markov closed forms")
    common(p, oracle_flag=False)
    p.add_argument("--mode-count", type=int, dest="mode_count")
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--no-correlation", action="store_true")
    p.add_argument("--no-convergence", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="sweep one parameter")
    common(p)
    p.add_argument("--axis", required=True)
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("correlate", help="stationary two-time correlation")
    common(p)
    p.add_argument("--tau-max", type=float, required=True, dest="tau_max")
    p.add_argument("--points", type=int, default=101)
    p.set_defaults(func=cmd_correlate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.jobs < 1:
        print("violation: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except oracle.CalibrationError as exc:
        print(f"calibration failure: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except oracle.DiscretizationError as exc:
        print(f"violation: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except oracle.UnitarityError as exc:
        print(f"tolerance failure: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE


if __name__ == "__main__":
    sys.exit(main())
