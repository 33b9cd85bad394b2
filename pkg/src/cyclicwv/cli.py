"""Command-line front end: factor sweeps, Monte Carlo runs, convention table.

Exit codes: 0 success, 2 usage or configuration error, 3 a traversal sum
failed to converge.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import metrology, recycling
from .errors import ConvergenceError, CyclicWVError, DomainError
from .meter import GaussianPulse, TimeGrid, centroid_shift

SWEEP_HEADER = ["scheme", "r", "gamma", "phi", "omega", "tau", "factor", "xi", "shift_s", "n_used", "residual"]
DISCREPANCY_HEADER = [
    "r",
    "gamma",
    "phi",
    "omega",
    "tau",
    "A_cos_phi",
    "A_cos_2phi",
    "A_series",
    "A_match",
    "dtp_4_cos_phi",
    "dtp_4_cos_2phi",
    "dtp_2_cos_phi",
    "dtp_2_cos_2phi",
    "dtp_series",
    "dtp_match",
]
SWEEP_VARIABLES = ("r", "phi", "gamma")
DEFAULT_FIXED = {"r": 0.9, "gamma": 0.0, "phi": 0.1, "omega": 0.0, "tau": 1.0}
CHECK_R = (0.0, 0.3, 0.6, 0.9, 0.99)
CHECK_GAMMA = (0.0, 0.1, 0.2)
CHECK_PHI = (0.02, 0.05, 0.1, 0.2)
A_MATCH_RTOL = 1e-8
SHIFT_MATCH_RTOL = 0.02
DISCREPANCY_OMEGA = 1e-4


class ConfigError(DomainError):
    """Invalid sweep spec or Monte Carlo configuration."""


def fmt(x):
    """17 significant digits, round-trip exact."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


@dataclass(frozen=True)
class SweepSpec:
    """One sweep over `variable` (optionally a second axis) for several schemes."""

    variable: str
    range: tuple
    fixed: dict = field(default_factory=dict)
    schemes: tuple = ("power", "dual")
    filter: bool = True
    second_variable: str | None = None
    second_range: tuple | None = None
    output: str | None = None

    def __post_init__(self):
        axes = [(self.variable, self.range)]
        if self.second_variable is not None:
            axes.append((self.second_variable, self.second_range))
        for name, rng in axes:
            if name not in SWEEP_VARIABLES:
                raise ConfigError(f"sweep variable must be one of {SWEEP_VARIABLES}, got {name!r}")
            if rng is None or len(rng) != 3:
                raise ConfigError(f"range for {name!r} must be (min, max, steps)")
            lo, hi, steps = rng
            if not lo < hi:
                raise ConfigError(f"range for {name!r} needs min < max, got {lo}, {hi}")
            if int(steps) != steps or steps < 2:
                raise ConfigError(f"range for {name!r} needs an integer steps >= 2, got {steps}")
        if self.second_variable == self.variable:
            raise ConfigError("the two sweep axes must differ")
        unknown = set(self.fixed) - set(DEFAULT_FIXED)
        if unknown:
            raise ConfigError(f"unknown fixed parameters {sorted(unknown)}")
        for scheme in self.schemes:
            if scheme not in recycling.SCHEMES:
                raise ConfigError(f"unknown scheme {scheme!r}")
        params = {**DEFAULT_FIXED, **self.fixed}
        if not 0.0 <= params["r"] < 1.0 or not 0.0 <= params["gamma"] < 1.0:
            raise ConfigError("fixed r and gamma must lie in [0, 1)")
        if params["tau"] <= 0:
            raise ConfigError("tau must be positive")

    def points(self):
        """Parameter dictionaries in grid order (first axis outermost)."""
        base = {**DEFAULT_FIXED, **self.fixed}
        first = np.linspace(self.range[0], self.range[1], int(self.range[2]))
        if self.second_variable is None:
            return [{**base, self.variable: float(x)} for x in first]
        second = np.linspace(self.second_range[0], self.second_range[1], int(self.second_range[2]))
        return [{**base, self.variable: float(x), self.second_variable: float(y)} for x in first for y in second]


def _fig2_r(gamma):
    return SweepSpec("r", (0.0, 0.999, 500), {"phi": 0.1, "gamma": gamma})


def _fig2_phi(gamma):
    return SweepSpec("phi", (0.01, 0.2, 500), {"r": 0.9, "gamma": gamma})


def _fig3():
    specs = []
    for gamma in CHECK_GAMMA:
        for filt in (True, False):
            specs.append(
                SweepSpec(
                    "r",
                    (0.0, 0.99, 100),
                    {"gamma": gamma},
                    schemes=("dual",),
                    filter=filt,
                    second_variable="phi",
                    second_range=(0.01, 0.2, 100),
                )
            )
    return specs


PRESETS = {
    "fig2a": lambda: [_fig2_r(0.0)],
    "fig2b": lambda: [_fig2_r(0.1)],
    "fig2c": lambda: [_fig2_r(0.2)],
    "fig2d": lambda: [_fig2_phi(0.0)],
    "fig2e": lambda: [_fig2_phi(0.1)],
    "fig2f": lambda: [_fig2_phi(0.2)],
    "fig3": _fig3,
}


def scheme_label(scheme, filter_enabled):
    if filter_enabled or scheme == "standard":
        return scheme
    return f"{scheme}-unfiltered"


def sweep_row(scheme, filter_enabled, params, series=False):
    """Evaluate one grid point; returns the CSV fields as a dict."""
    r = 0.0 if scheme == "standard" else params["r"]
    config = recycling.CavityConfig(scheme, r=r, gamma=params["gamma"], filter_enabled=filter_enabled)
    phi, omega, tau = params["phi"], params["omega"], params["tau"]
    report = recycling.improvement(config, phi, omega, tau)
    n_used = residual = None
    if series:
        ratio, n_used = recycling.series_factor(config, phi, tau)
        if scheme == "dual":
            amplitude_factor = recycling.factor_B(r, params["gamma"], phi)
        elif scheme == "standard":
            amplitude_factor = 1.0
        else:
            amplitude_factor = recycling.factor_A(r, params["gamma"], phi)
        residual = ratio / amplitude_factor - 1.0
    return {
        "scheme": scheme_label(scheme, filter_enabled),
        "r": r,
        "gamma": params["gamma"],
        "phi": phi,
        "omega": omega,
        "tau": tau,
        "factor": report.factor,
        "xi": report.xi,
        "shift_s": report.shift,
        "n_used": n_used,
        "residual": residual,
    }


def run_sweep(specs, series=False, threads=1):
    """All rows for a list of specs, in deterministic grid order."""
    jobs = []
    for spec in specs:
        for params in spec.points():
            for scheme in spec.schemes:
                jobs.append((scheme, spec.filter, params))

    def work(job):
        return sweep_row(*job, series=series)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            return list(pool.map(work, jobs))
    return [work(j) for j in jobs]


def rows_to_csv(rows, header):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([row[k] if isinstance(row[k], str) else fmt(row[k]) for k in header])
    return buf.getvalue()


def _match(candidates, target, rtol):
    hits = [name for name, value in candidates if math.isclose(value, target, rel_tol=rtol, abs_tol=0.0)]
    return "|".join(hits) if hits else "none"


def discrepancy_rows(omega=DISCREPANCY_OMEGA, tau=1.0):
    """Alternative conventions for A and the walk-off shift against the series."""
    pulse = GaussianPulse(1.0, tau)
    rows = []
    for r in CHECK_R:
        for gamma in CHECK_GAMMA:
            for phi in CHECK_PHI:
                a_phi = recycling.factor_A(r, gamma, phi)
                a_2phi = recycling.factor_A_printed(r, gamma, phi)
                a_series, _ = recycling.series_factor(recycling.CavityConfig("power", r=r, gamma=gamma), phi, tau)
                shifts = {
                    "4_cos_phi": recycling.walkoff_shift(r, gamma, phi, omega, tau, 4.0, 1.0),
                    "4_cos_2phi": recycling.walkoff_shift(r, gamma, phi, omega, tau, 4.0, 2.0),
                    "2_cos_phi": recycling.walkoff_shift(r, gamma, phi, omega, tau, 2.0, 1.0),
                    "2_cos_2phi": recycling.walkoff_shift(r, gamma, phi, omega, tau, 2.0, 2.0),
                }
                config = recycling.CavityConfig("power", r=r, gamma=gamma, filter_enabled=False)
                grid = TimeGrid.around(pulse, shift=shifts["4_cos_phi"])
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    dtp_series = centroid_shift(recycling.detected_profile(config, pulse, phi, omega, grid))
                rows.append(
                    {
                        "r": r,
                        "gamma": gamma,
                        "phi": phi,
                        "omega": omega,
                        "tau": tau,
                        "A_cos_phi": a_phi,
                        "A_cos_2phi": a_2phi,
                        "A_series": a_series,
                        "A_match": _match([("cos_phi", a_phi), ("cos_2phi", a_2phi)], a_series, A_MATCH_RTOL),
                        **{f"dtp_{k}": v for k, v in shifts.items()},
                        "dtp_series": dtp_series,
                        "dtp_match": _match(list(shifts.items()), dtp_series, SHIFT_MATCH_RTOL),
                    }
                )
    return rows


# --------------------------------------------------------------------------
# configuration parsing

MC_REQUIRED = ("scheme", "phi", "omega", "tau", "n_photons", "trials")
MC_DEFAULTS = {
    "r": 0.0,
    "gamma": 0.0,
    "filter": True,
    "photon_model": "poisson",
    "estimator": "mean",
    "trim": 0.1,
    "t_cav": 0.0,
    "epsilon": 1e-12,
    "n_cap": 100_000,
    "compare_standard": False,
    "seed": None,
}
_NUMBER_FIELDS = ("phi", "omega", "tau", "n_photons", "r", "gamma", "trim", "t_cav", "epsilon")
_INT_FIELDS = ("trials", "n_cap")


def load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc


def parse_mc_config(raw):
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    for name in MC_REQUIRED:
        if name not in raw:
            raise ConfigError(f"missing required field '{name}'")
    unknown = set(raw) - set(MC_REQUIRED) - set(MC_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown field(s) {sorted(unknown)}")
    cfg = {**MC_DEFAULTS, **raw}
    for name in _NUMBER_FIELDS:
        if isinstance(cfg[name], bool) or not isinstance(cfg[name], (int, float)):
            raise ConfigError(f"field '{name}' must be a number")
    for name in _INT_FIELDS:
        if isinstance(cfg[name], bool) or not isinstance(cfg[name], int):
            raise ConfigError(f"field '{name}' must be an integer")
    if cfg["seed"] is not None and (isinstance(cfg["seed"], bool) or not isinstance(cfg["seed"], int) or cfg["seed"] < 0):
        raise ConfigError("field 'seed' must be a non-negative integer")
    for name in ("filter", "compare_standard"):
        if not isinstance(cfg[name], bool):
            raise ConfigError(f"field '{name}' must be true or false")
    if cfg["scheme"] not in recycling.SCHEMES:
        raise ConfigError(f"field 'scheme' must be one of {list(recycling.SCHEMES)}")
    return cfg


def parse_sweep_spec(raw):
    items = raw if isinstance(raw, list) else [raw]
    specs = []
    for k, item in enumerate(items):
        where = f"spec[{k}]" if isinstance(raw, list) else "spec"
        if not isinstance(item, dict):
            raise ConfigError(f"{where} must be a JSON object")
        for name in ("variable", "range"):
            if name not in item:
                raise ConfigError(f"{where}: missing required field '{name}'")

        def as_range(value, name):
            if not isinstance(value, dict) or not {"min", "max", "steps"} <= set(value):
                raise ConfigError(f"{where}: field '{name}' needs min, max and steps")
            return (value["min"], value["max"], value["steps"])

        try:
            specs.append(
                SweepSpec(
                    variable=item["variable"],
                    range=as_range(item["range"], "range"),
                    fixed=item.get("fixed", {}),
                    schemes=tuple(item.get("schemes", ("power", "dual"))),
                    filter=bool(item.get("filter", True)),
                    second_variable=item.get("second_variable"),
                    second_range=as_range(item["second_range"], "second_range") if "second_range" in item else None,
                    output=item.get("output"),
                )
            )
        except ConfigError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
    return specs


def run_montecarlo(cfg, seed=None, workers=1):
    """Run the configured experiment; returns the JSON-ready report."""
    seed = cfg["seed"] if seed is None else seed
    if seed is None:
        raise ConfigError("no seed: set field 'seed' or pass --seed")
    try:
        config = recycling.CavityConfig(
            cfg["scheme"],
            r=cfg["r"],
            gamma=cfg["gamma"],
            filter_enabled=cfg["filter"],
            epsilon=cfg["epsilon"],
            n_cap=cfg["n_cap"],
            t_cav=cfg["t_cav"],
        )
        pulse = GaussianPulse(cfg["n_photons"], cfg["tau"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    kwargs = dict(photon_model=cfg["photon_model"], estimator=cfg["estimator"], trim=cfg["trim"], workers=workers)
    try:
        result = metrology.monte_carlo(config, pulse, cfg["phi"], cfg["omega"], cfg["trials"], seed, **kwargs)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    report = recycling.improvement(config, cfg["phi"], cfg["omega"], cfg["tau"])
    out = {
        "input": {**cfg, "seed": seed},
        "result": result.to_dict(),
        "closed_form": {"factor": report.factor, "xi": report.xi, "shift_s": report.shift},
    }
    if cfg["compare_standard"]:
        std_cfg = {**cfg, "scheme": "standard", "r": 0.0}
        std = metrology.monte_carlo(
            replace(config, scheme="standard", r=0.0, r2=None), pulse, cfg["phi"], cfg["omega"], cfg["trials"], seed, **kwargs
        )
        out["standard"] = {"input": {**std_cfg, "seed": seed}, "result": std.to_dict()}
        out["improvement"] = std.estimate_std / result.estimate_std
    return out


# --------------------------------------------------------------------------
# entry point


def _write(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {path}: {exc.strerror}") from exc


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    mode = common.add_mutually_exclusive_group()
    mode.add_argument("--series", dest="series", action="store_true", help="also evaluate the traversal-sum oracle")
    mode.add_argument("--closed-form", dest="series", action="store_false", help="closed forms only (default)")
    common.set_defaults(series=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (u64)")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--out", default=None, help="output path (default: stdout)")

    parser = argparse.ArgumentParser(prog="cyclicwv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="improvement factors over a parameter grid (CSV)")
    src = sweep.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(PRESETS))
    src.add_argument("--spec", help="JSON sweep specification")

    mc = sub.add_parser("montecarlo", parents=[common], help="photon-counting Monte Carlo (JSON)")
    mc.add_argument("--config", required=True, help="JSON experiment configuration")

    sub.add_parser("discrepancy", parents=[common], help="cos(phi)/cos(2 phi) convention table (CSV)")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        if args.command == "sweep":
            specs = PRESETS[args.preset]() if args.preset else parse_sweep_spec(load_json(args.spec))
            out = args.out
            if out is None and len(specs) == 1:
                out = specs[0].output
            rows = run_sweep(specs, series=args.series, threads=args.threads)
            _write(rows_to_csv(rows, SWEEP_HEADER), out)
        elif args.command == "montecarlo":
            cfg = parse_mc_config(load_json(args.config))
            report = run_montecarlo(cfg, seed=args.seed, workers=args.threads)
            _write(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
        else:
            _write(rows_to_csv(discrepancy_rows(), DISCREPANCY_HEADER), args.out)
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except CyclicWVError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0
