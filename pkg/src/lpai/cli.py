"""Command-line interface: ``lpai run --scenario FILE [options]``.

Exit codes: 0 success, 2 configuration error (field path on stderr),
3 numerical failure (stage name on stderr).
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .comparison import halving_study, series_setup
from .interferometer import (evaluate_effects, is_standard_sequence, scenario_coefficients,
                             shift_last_phase)
from .propagation import PropagationMethod, make_propagator
from .pulses import pulse_effects
from .scenario import ConfigError, load_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

CSV_COLUMNS = ("scan_value", "probability", "visibility", "total_phase_rad")


class NumericalError(RuntimeError):
    def __init__(self, stage: str, detail: str = ""):
        super().__init__(f"{stage}: {detail}" if detail else stage)
        self.stage = stage
        self.detail = detail


def fmt(x) -> str:
    """17 significant digits (round-trip exact for doubles)."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _num(x):
    """JSON value carrying exactly the CSV digits."""
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(fmt(x))


def _stage(name, fn, *args, **kwargs):
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            out = fn(*args, **kwargs)
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise NumericalError(name, str(exc)) from None
    return out


def _check_finite(stage, *values):
    for v in values:
        if v is not None and not np.all(np.isfinite(np.asarray(v, dtype=float))):
            raise NumericalError(stage, "non-finite result")


def _effects(scenario, pulses, propagator):
    effs = _stage("pulses", pulse_effects, pulses, propagator)
    for e in effs:
        _check_finite("pulses", e.chi, e.Phi)
    return effs


def _row(value, ev):
    d = ev.detection
    return (value, d.probability, d.visibility, d.total_phase)


def run_scenario(scenario, method=None, do_scan=False, compare_series=False, jobs=1):
    """Evaluate a scenario; returns the report dictionary."""
    method = scenario.method if method is None else method
    try:
        coeffs = scenario_coefficients(scenario)
    except ValueError as exc:
        raise ConfigError("frame", str(exc)) from None
    try:
        propagator = make_propagator(coeffs, method)
    except ValueError as exc:
        raise ConfigError("method", str(exc)) from None
    standard = is_standard_sequence(scenario.pulses)
    effects = _effects(scenario, scenario.pulses, propagator)
    ev = _stage("detection", evaluate_effects, effects, scenario.state, standard)
    _check_finite("detection", ev.detection.probability)

    report = {
        "scenario": scenario.name,
        "method": str(method),
        "path": ev.path,
        "pulse_count": len(scenario.pulses),
        "result": {
            "probability": _num(ev.detection.probability),
            "visibility": _num(ev.detection.visibility),
            "total_phase_rad": _num(ev.detection.total_phase),
            "sign": ev.detection.sign,
        },
    }
    if ev.summary is not None:
        s = ev.summary
        dec = ev.decomposition
        report["decomposition"] = {
            "Phi_I_rad": _num(dec["Phi_I"]),
            "bch_rad": _num(dec["bch"]),
            "mean_rad": _num(dec["mean"]),
            "sum_rad": _num(math.fsum(dec.values())),
        }
        report["coefficients"] = list(s.coefficients)
        report["chi_I"] = {"x_m": [_num(v) for v in s.chi_I[:3]],
                           "p_kg_m_s": [_num(v) for v in s.chi_I[3:]]}

    rows = None
    if do_scan:
        if scenario.scan is None:
            raise ConfigError("scan", "--scan requested but the scenario has no scan section")
        rows = _scan(scenario, propagator, effects, standard, jobs)
        report["scan"] = {
            "variable": scenario.scan.variable,
            "rows": [dict(zip(CSV_COLUMNS, (_num(v) for v in r))) for r in rows],
        }

    if compare_series:
        try:
            setup = series_setup(scenario)
        except ValueError as exc:
            raise ConfigError("compare_series", str(exc)) from None
        study = _stage("series", halving_study, setup)
        _check_finite("series", study.residuals)
        out = study.as_dict()
        for key in ("factors", "residuals_rad", "exact_rad", "series_rad"):
            out[key] = [_num(v) for v in out[key]]
        out["fitted_exponent"] = _num(out["fitted_exponent"])
        report["series_comparison"] = out
    return report, rows


def _scan(scenario, propagator, effects, standard, jobs):
    spec = scenario.scan
    if spec.variable == "laser_phase_last":
        base = scenario.pulses[-1].phase

        def point(v):
            ev = evaluate_effects(shift_last_phase(effects, float(v) - base), scenario.state, standard)
            return _row(float(v), ev)
    else:
        def point(v):
            pulses = scenario.geometry.build(float(v))
            effs = _effects(scenario, pulses, propagator)
            return _row(float(v), evaluate_effects(effs, scenario.state, standard))

    values = list(spec.values)
    with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
        # map preserves input order regardless of completion order
        rows = list(pool.map(lambda v: _stage("scan", point, v), values))
    for r in rows:
        _check_finite("scan", r[1])
    return rows


def to_csv(report, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(CSV_COLUMNS) + "\n")
    if rows is None:
        r = report["result"]
        rows = [(None, r["probability"], r["visibility"], r["total_phase_rad"])]
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def to_json(report) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def summary_text(report) -> str:
    r = report["result"]
    lines = [f"scenario {report['scenario']} ({report['method']}, {report['path']} path)",
             f"  probability      {fmt(r['probability'])}",
             f"  visibility       {fmt(r['visibility'])}",
             f"  total phase      {fmt(r['total_phase_rad'])} rad"]
    if "decomposition" in report:
        d = report["decomposition"]
        lines += [f"    Phi_I          {fmt(d['Phi_I_rad'])}",
                  f"    BCH term       {fmt(d['bch_rad'])}",
                  f"    mean term      {fmt(d['mean_rad'])}"]
    if "series_comparison" in report:
        sc = report["series_comparison"]
        lines.append(f"  series {sc['series']}: exponent {fmt(sc['fitted_exponent'])}")
        for f, res in zip(sc["factors"], sc["residuals_rad"]):
            lines.append(f"    factor {fmt(f)}  residual {fmt(res)} rad")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpai", description="Light-pulse atom interferometer phase engine")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a scenario file")
    run.add_argument("--scenario", required=True, help="YAML scenario file")
    run.add_argument("--scan", action="store_true", help="run the scan defined in the scenario")
    run.add_argument("--method", help="exact | perturbative:<k> | oracle:<h> (overrides the file)")
    run.add_argument("--compare-series", action="store_true",
                     help="halving study against the closed-form series")
    run.add_argument("--out", help="output file (default: stdout)")
    run.add_argument("--format", choices=("csv", "json"), default="json")
    run.add_argument("--jobs", type=int, default=1, help="worker threads for scans")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
        method = None
        if args.method is not None:
            try:
                method = PropagationMethod.parse(args.method)
            except ValueError as exc:
                raise ConfigError("method", str(exc)) from None
        report, rows = run_scenario(scenario, method, args.scan, args.compare_series, args.jobs)
    except ConfigError as exc:
        print(f"config error at {exc.path}: {exc.message}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error in stage {exc.stage}: {exc.detail or 'failed'}", file=sys.stderr)
        return EXIT_NUMERIC

    if args.format == "json":
        text = to_json(report)
    else:
        text = to_csv(report, rows)
        sys.stderr.write(summary_text(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
