"""Batch driver: potentials in, CSV/JSON traces and figures out.

Every run is deterministic for a fixed configuration: no clocks, no random
state, fixed float formatting.  CSV files carry one metadata comment line
with the package version and the metric convention in use.  Exit codes:
0 success, 1 domain error (machine-readable JSON on stderr), 2 config
error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (denisov_rakhmanov_check, omega_limit_estimate,
                       shift_trace)
from .errors import (CalibrationError, ClusterCapError, ConfigError,
                     OutOfCoverageError, PoleError, TruncationError,
                     WeylshiftError)
from .measures import DEFAULT_METRIC, MetricConfig, SignedMeasure
from .oracle import build_oracle, load_model, predict, save_model
from .reflectionless import BorelWindow, reflectionless_defect
from .weyl import m_halfline

SUBCOMMANDS = ("m-function", "reflectionless", "shift-trace", "omega",
               "oracle-train", "oracle-predict", "drcheck")

_ERROR_CODES = (
    (OutOfCoverageError, "out_of_coverage"),
    (PoleError, "pole"),
    (TruncationError, "truncation"),
    (ClusterCapError, "cluster_cap"),
    (CalibrationError, "calibration"),
)


# -- field parsing --------------------------------------------------------


def _parse_grid(spec):
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise ValueError("grid spec must be lo:hi:count")
    lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    if count < 1:
        raise ValueError("grid count must be at least 1")
    if count > 1 and not lo < hi:
        raise ValueError("grid spec needs lo < hi")
    return np.linspace(lo, hi, count)


def _parse_window(spec):
    parts = str(spec).split(":")
    if len(parts) != 2:
        raise ValueError("window spec must be lo:hi")
    lo, hi = float(parts[0]), float(parts[1])
    if not lo < hi:
        raise ValueError("window needs lo < hi")
    return (lo, hi)


def _parse_schedule(spec):
    ys = [float(s) for s in str(spec).split(",") if s.strip()]
    if not ys or any(y <= 0 for y in ys) or any(a <= b for a, b in zip(ys, ys[1:])):
        raise ValueError("y schedule must be positive and strictly decreasing")
    return tuple(ys)


def _positive(value):
    v = float(value)
    if not v > 0:
        raise ValueError("must be positive")
    return v


def _positive_int(value):
    v = int(value)
    if not v > 0:
        raise ValueError("must be a positive integer")
    return v


def _side(value):
    v = str(value)
    if v not in ("plus", "minus", "both"):
        raise ValueError("side must be plus, minus or both")
    return v


_COMMON_FIELDS = {
    "out": (str, ".", False),
    "metric_n": (_positive_int, 40, False),
    "tol": (_positive, 1e-8, False),
    "plot": (bool, True, False),
}

# field name -> (parser, default, required)
_FIELD_SPECS = {
    "m-function": {
        "potential": (str, None, True),
        "z_grid": (_parse_grid, None, True),
        "z_imag": (_positive, 1.0, False),
        "x": (float, 0.0, False),
        "side": (_side, "both", False),
    },
    "reflectionless": {
        "potential": (str, None, True),
        "window": (_parse_window, (0.1, 5.0), False),
        "grid_count": (_positive_int, 20, False),
        "x": (float, 0.0, False),
        "y_schedule": (_parse_schedule, (1e-2, 1e-3, 1e-4), False),
    },
    "shift-trace": {
        "potential": (str, None, True),
        "x_grid": (_parse_grid, None, True),
        "reference": (str, None, False),
    },
    "omega": {
        "potential": (str, None, True),
        "x_grid": (_parse_grid, None, True),
        "window_w": (_positive, 16.0, False),
        "cluster_tol": (_positive, 5e-2, False),
        "max_clusters": (_positive_int, 64, False),
    },
    "oracle-train": {
        "training": (str, None, True),
        "past_length": (_positive, None, True),
        "future": (_parse_window, None, True),
        "delta": (_positive, None, True),
        "class_bound": (_positive, 1.0, False),
    },
    "oracle-predict": {
        "model": (str, None, True),
        "past": (str, None, True),
    },
    "drcheck": {
        "potential": (str, None, True),
        "x_max": (_positive, None, True),
        "samples": (_positive_int, 41, False),
        "threshold": (_positive, 1e-2, False),
    },
}


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    values: dict

    def __getitem__(self, key):
        return self.values[key]


def _normalize(subcommand, raw):
    """Parse and default-fill raw field values; collect per-field problems."""
    problems = []
    if subcommand not in _FIELD_SPECS:
        raise ConfigError([("subcommand",
                            f"unknown subcommand {subcommand!r}; "
                            f"valid: {', '.join(SUBCOMMANDS)}")])
    spec = dict(_COMMON_FIELDS)
    spec.update(_FIELD_SPECS[subcommand])
    values = {}
    for field, (parser, default, required) in spec.items():
        if field in raw and raw[field] is not None:
            try:
                values[field] = parser(raw[field])
            except (ValueError, TypeError) as exc:
                problems.append((field, str(exc)))
        elif required:
            problems.append((field, "required field is missing"))
        else:
            values[field] = default
    for field in raw:
        if field not in spec and raw[field] is not None:
            problems.append((field, "unknown field"))
    if problems:
        raise ConfigError(problems)
    return RunConfig(subcommand=subcommand, values=values)


def _read_config_raw(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError([("config", f"file not found: {path}")])
    except json.JSONDecodeError as exc:
        raise ConfigError([("config", f"invalid JSON: {exc}")])
    if not isinstance(data, dict):
        raise ConfigError([("config", "top level must be an object")])
    sub = data.pop("subcommand", None)
    if sub is None:
        raise ConfigError([("subcommand", "required field is missing")])
    return sub, data


def validate_config(path):
    """Load and normalize a JSON run configuration.

    Raises ConfigError carrying a list of (field, reason) problems; on
    success returns the RunConfig with every default filled in.  Grid and
    window fields use the same string specs as the command line flags.
    """
    sub, data = _read_config_raw(path)
    return _normalize(sub, data)


# -- output helpers -------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _write_csv(path, header, rows, metric_id):
    lines = [f"# weylshift={__version__} metric={metric_id}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _load_potential(path):
    try:
        return SignedMeasure.load(path)
    except FileNotFoundError:
        raise ConfigError([("potential", f"file not found: {path}")])
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        raise ConfigError([("potential", f"invalid potential file: {exc}")])


# -- subcommand implementations -------------------------------------------


def _run_m_function(cfg, outdir):
    mu = _load_potential(cfg["potential"])
    metric = MetricConfig(n_terms=cfg["metric_n"])
    sides = ("plus", "minus") if cfg["side"] == "both" else (cfg["side"],)
    rows = []
    for side in sides:
        for t in cfg["z_grid"]:
            z = complex(t, cfg["z_imag"])
            s = m_halfline(mu, cfg["x"], z, side=side, tol=cfg["tol"])
            rows.append((s.x, side, z.real, z.imag, s.value.real, s.value.imag,
                         s.truncation_R, s.error_estimate))
    out_csv = outdir / "mfunction.csv"
    _write_csv(out_csv, ("x", "side", "re_z", "im_z", "re_m", "im_m",
                         "R", "disk_radius"), rows, metric.convention_id)
    if cfg["plot"]:
        from .report import save_line_figure
        per_side = {}
        for r in rows:
            per_side.setdefault(r[1], []).append(r)
        series = []
        for side, rs in per_side.items():
            series.append((f"Re m ({side})", [r[4] for r in rs]))
            series.append((f"Im m ({side})", [r[5] for r in rs]))
        save_line_figure(outdir / "mfunction.png", list(cfg["z_grid"]), series,
                         "Re z", "m", title="half-line m-function")
    return [out_csv.name]


def _run_reflectionless(cfg, outdir):
    mu = _load_potential(cfg["potential"])
    metric = MetricConfig(n_terms=cfg["metric_n"])
    lo, hi = cfg["window"]
    window = BorelWindow.from_interval(lo, hi, n_grid=cfg["grid_count"])
    rep = reflectionless_defect(mu, cfg["x"], window, y_schedule=cfg["y_schedule"])
    rows = [(t, d, rh, gp, gm, cv) for t, d, rh, gp, gm, cv in
            zip(rep.energies, rep.defects, rep.re_H, rep.g_plus, rep.g_minus,
                rep.converged)]
    out_csv = outdir / "reflectionless.csv"
    _write_csv(out_csv, ("t", "defect", "re_H", "g_plus", "g_minus", "converged"),
               rows, metric.convention_id)
    _write_json(outdir / "reflectionless_summary.json", {
        "x": rep.x,
        "window": [lo, hi],
        "y_schedule": list(rep.y_schedule),
        "max_defect": rep.max_defect,
        "mean_defect": rep.mean_defect,
        "n_unconverged": rep.n_unconverged,
        "verdict_reflectionless": rep.verdict,
    })
    if cfg["plot"]:
        from .report import save_line_figure
        save_line_figure(outdir / "reflectionless.png", rep.energies,
                         [("defect", rep.defects), ("|Re H|", np.abs(rep.re_H))],
                         "t", "defect", title="reflectionless defect", logy=True)
    return [out_csv.name, "reflectionless_summary.json"]


def _run_shift_trace(cfg, outdir):
    mu = _load_potential(cfg["potential"])
    metric = MetricConfig(n_terms=cfg["metric_n"])
    reference = _load_potential(cfg["reference"]) if cfg["reference"] else None
    trace = shift_trace(mu, cfg["x_grid"], reference=reference, metric_cfg=metric)
    out_csv = outdir / "shift_trace.csv"
    _write_csv(out_csv, ("x", "distance"),
               list(zip(trace.x_samples, trace.distances)), metric.convention_id)
    if cfg["plot"]:
        from .report import save_line_figure
        save_line_figure(outdir / "shift_trace.png", trace.x_samples,
                         [("d(S_x mu, ref)", trace.distances)], "x", "distance",
                         title="shift trace", logy=bool(np.all(trace.distances > 0)))
    return [out_csv.name]


def _run_omega(cfg, outdir):
    mu = _load_potential(cfg["potential"])
    metric = MetricConfig(n_terms=cfg["metric_n"])
    est = omega_limit_estimate(mu, cfg["x_grid"],
                               window_half_width=cfg["window_w"],
                               cluster_tol=cfg["cluster_tol"],
                               metric_cfg=metric,
                               max_clusters=cfg["max_clusters"])
    _write_json(outdir / "omega_representatives.json", {
        "window_half_width": est.window_half_width,
        "cluster_tol": est.cluster_tol,
        "metric": est.metric_id,
        "representative_x": [float(x) for x in est.representative_x],
        "representatives": [m.to_json_dict() for m in est.representatives],
    })
    out_csv = outdir / "omega_assignments.csv"
    _write_csv(out_csv, ("x", "cluster"),
               list(zip(est.x_grid, est.assignments)), metric.convention_id)
    if cfg["plot"]:
        from .report import save_measure_figure
        save_measure_figure(outdir / "omega_representatives.png",
                            est.representatives,
                            [f"cluster {i}" for i in range(len(est.representatives))],
                            title="omega-limit representatives")
    return ["omega_representatives.json", out_csv.name]


def _load_training(path):
    p = Path(path)
    if p.is_dir():
        files = sorted(p.glob("*.json"))
        if not files:
            raise ConfigError([("training", f"no *.json potentials in {path}")])
        return [SignedMeasure.load(f) for f in files]
    try:
        with open(p) as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError([("training", f"file not found: {path}")])
    except json.JSONDecodeError as exc:
        raise ConfigError([("training", f"invalid JSON: {exc}")])
    if not isinstance(data, list) or not data:
        raise ConfigError([("training", "expected a nonempty JSON list of potentials")])
    return [SignedMeasure.from_json_dict(d) for d in data]


def _run_oracle_train(cfg, outdir):
    training = _load_training(cfg["training"])
    model = build_oracle(training, cfg["past_length"], cfg["future"],
                         cfg["delta"], cfg["class_bound"],
                         n_terms=cfg["metric_n"])
    save_model(model, outdir / "oracle_model.json")
    _write_json(outdir / "oracle_train_summary.json", {
        "n_training": len(training),
        "n_centers": model.n_centers,
        "past_length": model.past_length,
        "future_window": list(model.future_window),
        "delta": model.delta,
    })
    return ["oracle_model.json", "oracle_train_summary.json"]


def _run_oracle_predict(cfg, outdir):
    try:
        model = load_model(cfg["model"])
    except FileNotFoundError:
        raise ConfigError([("model", f"file not found: {cfg['model']}")])
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError([("model", f"invalid model file: {exc}")])
    sigma = _load_potential(cfg["past"])
    predicted = predict(model, sigma)
    predicted.save(outdir / "prediction.json")
    if cfg["plot"]:
        from .report import save_measure_figure
        save_measure_figure(outdir / "prediction.png", [predicted],
                            ["prediction"], title="predicted future window")
    return ["prediction.json"]


def _run_drcheck(cfg, outdir):
    mu = _load_potential(cfg["potential"])
    metric = MetricConfig(n_terms=cfg["metric_n"])
    check = denisov_rakhmanov_check(mu, cfg["x_max"], n_samples=cfg["samples"],
                                    threshold=cfg["threshold"], metric_cfg=metric)
    out_csv = outdir / "dr_trace.csv"
    _write_csv(out_csv, ("x", "distance"),
               list(zip(check.trace.x_samples, check.trace.distances)),
               metric.convention_id)
    _write_json(outdir / "dr_verdict.json", {
        "x_max": float(cfg["x_max"]),
        "tail_mean": check.tail_mean,
        "threshold": check.threshold,
        "consistent_with_convergence": check.consistent,
    })
    if cfg["plot"]:
        from .report import save_line_figure
        save_line_figure(outdir / "dr_trace.png", check.trace.x_samples,
                         [("d(S_x mu, 0)", check.trace.distances)], "x",
                         "distance", title="weak-* decay check")
    return [out_csv.name, "dr_verdict.json"]


_RUNNERS = {
    "m-function": _run_m_function,
    "reflectionless": _run_reflectionless,
    "shift-trace": _run_shift_trace,
    "omega": _run_omega,
    "oracle-train": _run_oracle_train,
    "oracle-predict": _run_oracle_predict,
    "drcheck": _run_drcheck,
}


def run(cfg):
    """Execute a normalized RunConfig; returns the list of files written."""
    outdir = Path(cfg["out"])
    outdir.mkdir(parents=True, exist_ok=True)
    return _RUNNERS[cfg.subcommand](cfg, outdir)


# -- argument parsing ------------------------------------------------------


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="weylshift",
        description="m-functions, reflectionless reports and shift dynamics "
                    "for measure potentials")
    sub = parser.add_subparsers(dest="subcommand")

    def common(p):
        p.add_argument("--config", help="JSON config file with defaults")
        p.add_argument("--out", help="output directory")
        p.add_argument("--metric-N", dest="metric_n", help="metric truncation order")
        p.add_argument("--tol", help="target accuracy for m evaluations")
        p.add_argument("--no-plot", dest="no_plot", action="store_true",
                       help="skip figure rendering")

    p = sub.add_parser("m-function", help="sample half-line m-functions on a z grid")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--z-grid", dest="z_grid", help="real-part grid lo:hi:count")
    p.add_argument("--z-imag", dest="z_imag", help="imaginary part of z")
    p.add_argument("--x")
    p.add_argument("--side", help="plus, minus or both")

    p = sub.add_parser("reflectionless", help="defect report over an energy window")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--window", help="energy window lo:hi")
    p.add_argument("--grid-count", dest="grid_count")
    p.add_argument("--x")
    p.add_argument("--y-schedule", dest="y_schedule", help="comma list, decreasing")

    p = sub.add_parser("shift-trace", help="distance of shifted potential to a reference")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--x-grid", dest="x_grid", help="shift grid lo:hi:count")
    p.add_argument("--reference", help="reference potential file (default zero)")

    p = sub.add_parser("omega", help="cluster windowed shifts (omega-limit estimate)")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--x-grid", dest="x_grid", help="shift grid lo:hi:count")
    p.add_argument("--window-W", dest="window_w", help="restriction half-width")
    p.add_argument("--cluster-tol", dest="cluster_tol")
    p.add_argument("--max-clusters", dest="max_clusters")

    p = sub.add_parser("oracle-train", help="build a covering-net predictor")
    common(p)
    p.add_argument("--training", help="JSON list of potentials or directory")
    p.add_argument("--past-length", dest="past_length")
    p.add_argument("--future", help="future window a:b")
    p.add_argument("--delta")
    p.add_argument("--class-bound", dest="class_bound")

    p = sub.add_parser("oracle-predict", help="predict a future window from a past")
    common(p)
    p.add_argument("--model")
    p.add_argument("--past", help="past-window potential file")

    p = sub.add_parser("drcheck", help="weak-* decay check of the shifted potential")
    common(p)
    p.add_argument("--potential")
    p.add_argument("--x-max", dest="x_max")
    p.add_argument("--samples")
    p.add_argument("--threshold")

    p = sub.add_parser("run", help="run a subcommand fully described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--no-plot", dest="no_plot", action="store_true")
    return parser


def _emit_error(code, detail):
    sys.stderr.write(json.dumps({"error": code, "detail": detail}) + "\n")


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if args.subcommand is None:
        parser.print_help()
        return 2
    try:
        raw = {}
        sub = args.subcommand
        if getattr(args, "config", None):
            file_sub, file_raw = _read_config_raw(args.config)
            if sub != "run" and file_sub != sub:
                raise ConfigError([("subcommand",
                                    f"config is for {file_sub!r}, "
                                    f"invoked as {sub!r}")])
            sub = file_sub
            raw.update(file_raw)
        elif sub == "run":
            raise ConfigError([("config", "run requires --config")])
        cli_fields = {k: v for k, v in vars(args).items()
                      if k not in ("subcommand", "config", "no_plot") and v is not None}
        raw.update(cli_fields)
        if getattr(args, "no_plot", False):
            raw["plot"] = False
        cfg = _normalize(sub, raw)
        run(cfg)
        return 0
    except ConfigError as exc:
        _emit_error("config_error", [{"field": f, "reason": r} for f, r in exc.problems])
        return 2
    except WeylshiftError as exc:
        for klass, code in _ERROR_CODES:
            if isinstance(exc, klass):
                _emit_error(code, str(exc))
                return 1
        _emit_error("domain_error", str(exc))
        return 1


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
