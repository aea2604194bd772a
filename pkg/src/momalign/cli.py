"""Command-line entry point ``align``.

Subcommands: ``fit``, ``tune``, ``simulate``, ``baseline`` and ``metrics``.
Settings may also come from a ``key=value`` file given with ``--config``;
keys are the long flag names (dashes or underscores) and explicit flags win.
Module errors exit with status 2 and a single ``error[<code>]: message`` line.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from .baselines import LandmarkSpec, cmr_register, landmark_register
from .csvio import (load_curves, read_fitted_csv, read_grid_csv, read_key_values, save_curves,
                    write_fitted_csv, write_grid_csv, write_metrics, write_params_csv)
from .errors import AlignmentError, ConfigError
from .feature_moments import parse_features
from .metrics import sigma_metric, sync_metric
from .objective import Lambdas
from .registration import AnnealSchedule, FitConfig, register
from .simgen import Scenario, simulate
from .svgplot import curves_report, frontier_report
from .tuning import TuningGrid, grid_search
from .warp import warp_eval

log = logging.getLogger("momalign")

DEFAULTS = {
    "format": "auto",
    "output": "align_out",
    "method": "moments",
    "features": "max:r=100",
    "warp": "standardized",
    "amp_dim": 20,
    "warp_dim": 4,
    "lambda_sync": 1.0,
    "lambda_mom": 1e4,
    "lambda_w": 0.01,
    "anneal": False,
    "roughness": 1e-7,
    "max_outer": 50,
    "outer_tol": 1e-6,
    "inner_max": 200,
    "T": None,
    "plots": False,
    "events": "global_max",
    "sigma_max": 0.1,
    "pw_max": 0.5,
    "grid": None,
    "tune_method": "moments",
    "scenario": "one",
    "seed": 0,
    "n_curves": 10,
    "n_points": 100,
    "warp_amplitude": 1.0,
    "noise_sd": 0.01,
    "drift": 0.1,
}


def _bool(text):
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, found {text!r}")


def _add_data_args(p):
    p.add_argument("input", help="curve CSV (long curve_id,t,y or wide t,<ids>)")
    p.add_argument("--format", choices=("auto", "long", "wide"), default=None)


def _add_fit_args(p, methods=("moments", "landmark", "cmr")):
    p.add_argument("--method", choices=methods, default=None)
    p.add_argument("--features", default=None,
                   help="comma-separated feature specs, e.g. max:r=100,min:r=100")
    p.add_argument("--warp", choices=("identity", "linear", "free", "standardized"), default=None)
    p.add_argument("--amp-dim", type=int, default=None)
    p.add_argument("--warp-dim", type=int, default=None)
    p.add_argument("--lambda-sync", type=float, default=None)
    p.add_argument("--lambda-mom", type=float, default=None)
    p.add_argument("--lambda-w", type=float, default=None)
    p.add_argument("--anneal", action="store_const", const=True, default=None,
                   help="heavier moment penalty for the first outer iterations")
    p.add_argument("--roughness", type=float, default=None)
    p.add_argument("--max-outer", type=int, default=None)
    p.add_argument("--outer-tol", type=float, default=None)
    p.add_argument("--inner-max", type=int, default=None)
    p.add_argument("--T", type=float, default=None, help="domain end (default: last time)")
    p.add_argument("--events", default=None,
                   help="landmark events, e.g. global_max,global_min")


def _add_common(p):
    p.add_argument("-o", "--output", default=None, help="output directory")
    p.add_argument("--config", default=None, help="key=value settings file")
    p.add_argument("--plots", action="store_const", const=True, default=None)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="align",
                                     description="Register curves by matching feature moments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one registration")
    _add_data_args(p)
    _add_fit_args(p)
    _add_common(p)

    p = sub.add_parser("baseline", help="landmark or continuous monotone registration")
    _add_data_args(p)
    _add_fit_args(p, methods=("landmark", "cmr"))
    _add_common(p)

    p = sub.add_parser("tune", help="constrained grid search over the lambdas")
    _add_data_args(p)
    _add_fit_args(p)
    p.add_argument("--sigma-max", type=float, default=None)
    p.add_argument("--pw-max", type=float, default=None)
    p.add_argument("--grid", default=None,
                   help="e.g. 'sync=1e-3:1e2:11;mom=1e3,1e4;w=0.1' (a:b:n is log-spaced)")
    p.add_argument("--tune-method", choices=("moments", "cmr"), default=None)
    _add_common(p)

    p = sub.add_parser("simulate", help="write a simulated dataset and its ground truth")
    p.add_argument("--scenario", choices=("one", "two", "three", "four"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-curves", type=int, default=None)
    p.add_argument("--n-points", type=int, default=None)
    p.add_argument("--warp-amplitude", type=float, default=None)
    p.add_argument("--noise-sd", type=float, default=None)
    p.add_argument("--drift", type=float, default=None)
    _add_common(p)

    p = sub.add_parser("metrics", help="recompute Sync and sigma from a run directory")
    p.add_argument("run_dir")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _types(parser, command):
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    out = {}
    for action in sub.choices[command]._actions:
        if action.dest in ("help", "config", "input", "run_dir"):
            continue
        if action.const is True:
            out[action.dest] = _bool
        else:
            out[action.dest] = action.type or str
    return out


def resolve(args, parser):
    """Fill unset flags from the config file, then from the defaults."""
    file_values = {}
    if getattr(args, "config", None):
        types = _types(parser, args.command)
        for key, raw in read_key_values(args.config).items():
            dest = key.replace("-", "_")
            if dest not in types:
                raise ConfigError(f"unknown config key {key!r} for '{args.command}'")
            try:
                file_values[dest] = None if raw.lower() == "none" else types[dest](raw)
            except ValueError:
                raise ConfigError(f"bad value {raw!r} for config key {key!r}") from None
    for dest, default in DEFAULTS.items():
        if hasattr(args, dest) and getattr(args, dest) is None:
            setattr(args, dest, file_values.get(dest, default))
    return args


def fit_config(args):
    specs = parse_features(args.features) if args.method == "moments" else ()
    return FitConfig(
        lambdas=Lambdas(args.lambda_sync, args.lambda_mom, args.lambda_w),
        specs=specs, warp_family=args.warp, amp_dim=args.amp_dim, warp_dim=args.warp_dim,
        T=args.T, roughness=args.roughness, max_outer_iters=args.max_outer,
        outer_tol=args.outer_tol, inner_max_iters=args.inner_max,
        anneal=AnnealSchedule() if args.anneal else None)


def parse_grid(text, base=None):
    """``sync=...;mom=...;w=...`` where each value list is comma separated or
    ``lo:hi:n`` for ``n`` log-spaced points."""
    base = TuningGrid() if base is None else base
    fields = {"sync": "sync_values", "mom": "mom_values", "w": "w_values"}
    values = {}
    for part in filter(None, (s.strip() for s in (text or "").split(";"))):
        if "=" not in part:
            raise ConfigError(f"cannot parse grid entry {part!r}")
        key, spec = (s.strip() for s in part.split("=", 1))
        if key not in fields:
            raise ConfigError(f"unknown grid axis {key!r}")
        try:
            if ":" in spec:
                lo, hi, n = spec.split(":")
                vals = tuple(np.logspace(np.log10(float(lo)), np.log10(float(hi)), int(n)))
            else:
                vals = tuple(float(v) for v in spec.split(","))
        except ValueError:
            raise ConfigError(f"cannot parse grid values {spec!r}") from None
        values[fields[key]] = vals
    return TuningGrid(**{**{k: getattr(base, k) for k in fields.values()}, **values},
                      sigma_max=base.sigma_max, pw_max=base.pw_max)


def run_method(data, args):
    config = fit_config(args)
    if args.method == "landmark":
        family = args.warp if args.warp in ("linear", "standardized") else "linear"
        spec = LandmarkSpec(tuple(e.strip() for e in args.events.split(",")),
                            args.roughness, args.amp_dim)
        return landmark_register(data, spec, family, config)
    if args.method == "cmr":
        return cmr_register(data, config)
    return register(data, config)


def write_run(out, data, result, args, plots):
    os.makedirs(out, exist_ok=True)
    write_grid_csv(os.path.join(out, "synchronized_curves.csv"), result.grid, result.curve_ids,
                   result.synchronized)
    write_grid_csv(os.path.join(out, "warps.csv"), result.grid, result.curve_ids, result.warps)
    write_grid_csv(os.path.join(out, "smoothed_curves.csv"), result.grid, result.curve_ids,
                   result.smoothed)
    write_fitted_csv(os.path.join(out, "fitted_values.csv"), data, result.fitted)
    write_params_csv(os.path.join(out, "params.csv"), result)
    write_metrics(os.path.join(out, "metrics.txt"), result)
    with open(os.path.join(out, "config.txt"), "w") as fh:
        for key in sorted(vars(args)):
            if key not in ("command", "config", "verbose"):
                fh.write(f"{key} = {getattr(args, key)}\n")
    if plots:
        curves_report(os.path.join(out, "report.svg"), result)


def _report(result):
    m = result.metrics
    print(f"{result.method}: Sync = {m['sync']:.4g}%  sigma = {m['sigma']:.4g}  "
          f"mean P(W) = {m['mean_pw']:.4g}")
    if not result.converged:
        print("warning: outer iterations stopped before convergence", file=sys.stderr)


def cmd_fit(args):
    data = load_curves(args.input, args.format)
    result = run_method(data, args)
    write_run(args.output, data, result, args, args.plots)
    _report(result)


def cmd_tune(args):
    data = load_curves(args.input, args.format)
    grid = parse_grid(args.grid, TuningGrid(sigma_max=args.sigma_max, pw_max=args.pw_max))
    args.method = "moments" if args.tune_method == "moments" else "cmr"
    report = grid_search(data, grid, fit_config(args), method=args.tune_method)
    os.makedirs(args.output, exist_ok=True)
    report.write_csv(os.path.join(args.output, "tuning.csv"))
    if args.plots:
        frontier_report(os.path.join(args.output, "frontier.svg"), report)
    if report.no_feasible:
        print("no feasible grid point", file=sys.stderr)
        return
    c = report.chosen
    print(f"chosen lambda_sync={c.lambda_sync!r} lambda_mom={c.lambda_mom!r} "
          f"lambda_w={c.lambda_w!r}: Sync = {c.sync:.4g}%  sigma = {c.sigma:.4g}  "
          f"mean P(W) = {c.mean_pw:.4g}")


def cmd_simulate(args):
    sc = Scenario(args.scenario, n_curves=args.n_curves, n_points=args.n_points, seed=args.seed,
                  warp_amplitude=args.warp_amplitude, noise_sd=args.noise_sd,
                  drift_range=args.drift)
    sim = simulate(sc)
    os.makedirs(args.output, exist_ok=True)
    save_curves(sim.curves, os.path.join(args.output, "curves.csv"))
    with open(os.path.join(args.output, "truth.csv"), "w") as fh:
        fh.write("curve_id,t,warp\n")
        for c, w in zip(sim.curves, sim.warps):
            for t, v in zip(c.times, warp_eval(w, c.times)):
                fh.write(f"{c.id},{float(t)!r},{float(v)!r}\n")
    u = np.linspace(0.0, 1.0, 201)
    write_grid_csv(os.path.join(args.output, "reference.csv"), u, ["reference"],
                   [sim.reference(u)])
    print(f"wrote {len(sim.curves)} curves to {args.output}")


def cmd_metrics(args):
    d = args.run_dir
    grid, ids, synchronized = read_grid_csv(os.path.join(d, "synchronized_curves.csv"))
    _, _, smoothed = read_grid_csv(os.path.join(d, "smoothed_curves.csv"))
    fitted = read_fitted_csv(os.path.join(d, "fitted_values.csv"))
    sync = sync_metric(smoothed, synchronized)
    sigma = sigma_metric([fitted[i][0] for i in ids], [fitted[i][1] for i in ids])
    print(f"sync = {sync!r}")
    print(f"sigma = {sigma!r}")


COMMANDS = {"fit": cmd_fit, "baseline": cmd_fit, "tune": cmd_tune, "simulate": cmd_simulate,
            "metrics": cmd_metrics}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command != "metrics":
            resolve(args, parser)
        if args.command == "baseline" and args.method not in ("landmark", "cmr"):
            args.method = "landmark"
        COMMANDS[args.command](args)
    except AlignmentError as exc:
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error[io]: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
