"""Command-line front end.

Subcommands
-----------
solve        spectral data (x0, q, Omega, tau, c) as JSON
gap          ln F for the scaled intervals at one r
asymptotics  the terms of the predicted ln F at one r
verify       full comparison; writes a JSON or CSV report

Settings come from defaults, then a JSON config file (``--config``), then
command-line flags, later sources winning.  Exit status is 0 on success, 2
for bad input and 3 for numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from .asympt import IntervalConfig, expansion_terms, solve_system
from .errors import AirygapError, DomainError, InadmissibleConfigError, NumericalError
from .fredholm import gap_probability_scaled
from .verify import run_verification

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

# Options whose value may legitimately start with "-" (negative numbers).
_VALUE_OPTIONS = {"--x", "--C", "--r", "--r-min", "--r-max"}


class UsageError(Exception):
    """Bad command-line or config input; maps to exit status 2."""


@dataclass
class RunConfig:
    g: int | None = None
    x: tuple | None = None
    r_min: float | None = None
    r_max: float | None = None
    r_points: int = 8
    order: int = 64
    theta_tol: float = 1e-14
    output_path: str | None = None
    format: str = "json"

    def interval_config(self) -> IntervalConfig:
        if self.g is None:
            raise UsageError("missing g (use --g or the config file)")
        if self.g < 1:
            raise UsageError(
                f"g must be >= 1, got {self.g}; with no intervals the gap probability is identically 1"
            )
        if not self.x:
            raise UsageError("missing endpoints x (use --x x1,x2,... or the config file)")
        if len(self.x) != 2 * self.g:
            raise UsageError(f"g={self.g} needs {2 * self.g} endpoints, got {len(self.x)}")
        return IntervalConfig(self.g, tuple(self.x))

    def r_grid(self):
        if self.r_min is None and self.r_max is None:
            return None
        if self.r_min is None or self.r_max is None:
            raise UsageError("r_min and r_max must be given together")
        if not (0 < self.r_min < self.r_max):
            raise UsageError(f"need 0 < r_min < r_max, got {self.r_min}, {self.r_max}")
        if self.r_points < 4:
            raise UsageError(f"r_points must be >= 4, got {self.r_points}")
        return np.linspace(self.r_min, self.r_max, self.r_points)


_FIELD_TYPES = {
    "g": int,
    "x": "vector",
    "r_min": float,
    "r_max": float,
    "r_points": int,
    "order": int,
    "theta_tol": float,
    "output_path": str,
    "format": str,
}


def _coerce(name, value, where):
    kind = _FIELD_TYPES[name]
    if value is None:
        return None
    if kind == "vector":
        if isinstance(value, str):
            return _parse_vector(value, where)
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise UsageError(f"{where}: field 'x' must be a list of numbers")
        return tuple(float(v) for v in value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise UsageError(f"{where}: field '{name}' must be an integer, got {value!r}")
        return value
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise UsageError(f"{where}: field '{name}' must be a finite number, got {value!r}")
        return float(value)
    if not isinstance(value, str):
        raise UsageError(f"{where}: field '{name}' must be a string, got {value!r}")
    return value


def _parse_vector(text, where="--x"):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise UsageError(f"{where}: empty endpoint list")
    try:
        vals = tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"{where}: could not parse {text!r} as comma-separated numbers") from None
    if not all(math.isfinite(v) for v in vals):
        raise UsageError(f"{where}: endpoints must be finite")
    return vals


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be a JSON object")
    out = {}
    for key, value in data.items():
        if key not in _FIELD_TYPES:
            raise UsageError(f"{path}: unknown field '{key}' (known: {', '.join(_FIELD_TYPES)})")
        out[key] = _coerce(key, value, path)
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        for key, value in load_config_file(args.config).items():
            setattr(cfg, key, value)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"format must be 'json' or 'csv', got {cfg.format!r}")
    if cfg.order < 8 or cfg.order % 2:
        raise UsageError(f"order must be even and >= 8, got {cfg.order}")
    if not cfg.theta_tol > 0:
        raise UsageError(f"theta_tol must be positive, got {cfg.theta_tol}")
    return cfg


# ----------------------------------------------------------------- commands


def _emit(obj, out):
    out.write(json.dumps(obj, indent=2) + "\n")


def _surface_dict(cfg: IntervalConfig, sd) -> dict:
    return {
        "g": cfg.g,
        "x": list(cfg.x),
        "x0": sd.x0,
        "q": [float(v) for v in sd.q],
        "Omega": [float(v) for v in sd.Omega],
        "tau_imag": [[float(v) for v in row] for row in np.asarray(sd.tau).imag],
        "c": sd.c,
        "c0": sd.c0,
        "residual": sd.residual,
        "ambiguous_roots": list(sd.ambiguous_roots),
    }


def cmd_solve(run: RunConfig, args, out) -> int:
    cfg = run.interval_config()
    _emit(_surface_dict(cfg, solve_system(cfg)), out)
    return EXIT_OK


def cmd_gap(run: RunConfig, args, out) -> int:
    cfg = run.interval_config()
    res = gap_probability_scaled(cfg, args.r, run.order)
    _emit(
        {
            "r": args.r,
            "logF": res.log_det,
            "err_estimate": res.err_estimate,
            "order": res.order_per_interval,
            "spectral_radius_proxy": res.spectral_radius_proxy,
        },
        out,
    )
    return EXIT_OK


def cmd_asymptotics(run: RunConfig, args, out) -> int:
    cfg = run.interval_config()
    sd = solve_system(cfg)
    terms = expansion_terms(sd, args.r, C=args.C, theta_tol=run.theta_tol)
    _emit(
        {
            "r": terms.r,
            "cubic": terms.cubic,
            "log_term": terms.log_term,
            "log_theta": terms.log_theta,
            "nu": list(terms.nu),
            "C": terms.C,
            "predicted_no_C": terms.predicted_no_C,
            "predicted_logF": terms.predicted,
        },
        out,
    )
    return EXIT_OK


def _write_report(report, run: RunConfig, out):
    text = report.to_csv() if run.format == "csv" else report.to_json() + "\n"
    if run.output_path:
        with open(run.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_verify(run: RunConfig, args, out) -> int:
    cfg = run.interval_config()
    grid = run.r_grid()
    summary_stream = out if run.output_path else sys.stderr
    try:
        report = run_verification(
            cfg,
            grid,
            run.order,
            n_points=run.r_points,
            threads=args.threads,
            allow_unsafe=args.allow_unsafe,
            theta_tol=run.theta_tol,
        )
    except AirygapError as exc:
        partial = getattr(exc, "partial_report", None)
        if partial is not None:
            _write_report(partial, run, out)
            summary_stream.write(partial.summary() + "\n")
        raise
    _write_report(report, run, out)
    summary_stream.write(report.summary() + "\n")
    return EXIT_OK


# ------------------------------------------------------------------ parsing


def _normalise_argv(argv):
    """Join ``--x -1,-2`` into ``--x=-1,-2`` so argparse accepts negative values."""
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1] != "--":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _vector_arg(text):
    try:
        return _parse_vector(text, where="endpoints")
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return v


def _finite_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be finite: {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--g", type=int, help="number of intervals")
    common.add_argument("--x", type=_vector_arg, help="endpoints x1,x2,...,x2g (decreasing)")
    common.add_argument("--order", type=int, help="Gauss-Legendre nodes per interval (default 64)")
    common.add_argument("--theta-tol", dest="theta_tol", type=_positive_float)

    parser = argparse.ArgumentParser(
        prog="airygap", description="Airy-process gap probabilities and their large-gap expansion."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="solve for x0, q, Omega, tau and c")
    p_gap = sub.add_parser("gap", parents=[common], help="ln F of the intervals scaled by r")
    p_gap.add_argument("--r", type=_positive_float, required=True)
    p_as = sub.add_parser("asymptotics", parents=[common], help="terms of the predicted ln F at r")
    p_as.add_argument("--r", type=_positive_float, required=True)
    p_as.add_argument("--C", type=_finite_float, default=0.0, help="constant term (default 0)")
    p_ver = sub.add_parser("verify", parents=[common], help="compare numerics with the expansion")
    p_ver.add_argument("--r-min", dest="r_min", type=_positive_float)
    p_ver.add_argument("--r-max", dest="r_max", type=_positive_float)
    p_ver.add_argument("--r-points", dest="r_points", type=int)
    p_ver.add_argument("--output", dest="output_path")
    p_ver.add_argument("--format", choices=("json", "csv"))
    p_ver.add_argument("--threads", type=int, default=None, help="worker threads (capped by AIRYGAP_THREADS)")
    p_ver.add_argument("--allow-unsafe", action="store_true", help="accept grids beyond the safe window")
    return parser


COMMANDS = {"solve": cmd_solve, "gap": cmd_gap, "asymptotics": cmd_asymptotics, "verify": cmd_verify}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_normalise_argv(argv))
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        run = build_config(args)
        return COMMANDS[args.command](run, args, out)
    except UsageError as exc:
        print(f"airygap: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InadmissibleConfigError as exc:
        print(f"airygap: inadmissible configuration: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DomainError as exc:
        print(f"airygap: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"airygap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"airygap: cannot write output: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
