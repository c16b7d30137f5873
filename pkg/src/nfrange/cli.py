"""Command-line sweeps producing CSV or JSON data files.

Commands: ``ambiguity``, ``crb-sweep``, ``nf-term``, ``effective-range`` and
``monte-carlo``. Scenario parameters come from flags and/or a ``key=value``
config file (flags win). Output goes to ``--out`` or stdout; warnings and
errors go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .ambiguity import AmbiguityMethod, ambiguity_surface, chi_phase_analytic, surface_array
from .crb import (ALPHA, CrbMethod, crb_range, effective_nf_range,
                  eta_beta_analytic, eta_beta_exact, scenario_nf_range,
                  taylor_nf_term)
from .errors import InvalidParameterError, NFRangeError
from .estimator import SearchGrid, main_lobe_width, monte_carlo
from .geometry import ArrayConfig, ArrayTag, TargetKind, TargetModel, rayleigh_distance
from .scenario import Config, Scenario
from .waveform import central_frequency, load_spectrum, make_cardinal_sine, rms_bandwidth

COMMANDS = ("ambiguity", "crb-sweep", "nf-term", "effective-range", "monte-carlo")

DEFAULTS = {
    "fc": "24G",
    "bandwidth": "100M",
    "waveform": "sinc",
    "range": "10",
    "aperture": "1.5",
    "nt": "25",
    "nr": "25",
    "target": "et",
    "config_tag": "mimo",
    "snr_db": "10",
    "grid": None,
    "seed": "0",
    "format": "csv",
    "axis": "beta",
    "trials": "100",
    "fs": None,
}

# upper-case multipliers only: "10m" must not silently mean 10 milli
_SI = {"k": 1e3, "K": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}


def parse_si(text) -> float:
    """``24G`` -> 2.4e10, ``100M`` -> 1e8; plain floats pass through."""
    t = str(text).strip()
    if not t:
        raise InvalidParameterError("empty number")
    scale = 1.0
    if t[-1] in _SI and not t.lower().endswith(("inf", "nan")):
        scale, t = _SI[t[-1]], t[:-1]
    try:
        return float(t) * scale
    except ValueError:
        raise InvalidParameterError(f"not a number: {text!r}") from None


def parse_grid(text) -> np.ndarray:
    """``min:max:points[:log]``."""
    parts = str(text).split(":")
    if len(parts) not in (3, 4):
        raise InvalidParameterError(f"grid must be min:max:points[:log], got {text!r}")
    lo, hi = parse_si(parts[0]), parse_si(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise InvalidParameterError(f"grid point count must be an integer, got {parts[2]!r}") from None
    if not hi > lo:
        raise InvalidParameterError("grid max must exceed min")
    if n < 2:
        raise InvalidParameterError("grid needs at least 2 points")
    if len(parts) == 4:
        if parts[3] not in ("log", "lin", "linear"):
            raise InvalidParameterError(f"grid spacing must be 'log' or 'linear', got {parts[3]!r}")
        if parts[3] == "log":
            if not lo > 0:
                raise InvalidParameterError("log grids need a positive minimum")
            return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def read_config_file(path) -> dict:
    """``key=value`` lines; ``#`` comments; dashes in keys become underscores."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config file {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise InvalidParameterError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("scenario")
    g.add_argument("--fc", help="carrier frequency in Hz, SI suffixes allowed (default 24G)")
    g.add_argument("--bandwidth", help="waveform bandwidth B in Hz (default 100M)")
    g.add_argument("--waveform", help="'sinc' or a two-column spectrum file")
    g.add_argument("--range", help="true target range R in m (default 10)")
    g.add_argument("--aperture", help="array aperture D in m (default 1.5)")
    g.add_argument("--nt", help="transmit antennas (MIMO only, default 25)")
    g.add_argument("--nr", help="receive antennas (default 25)")
    g.add_argument("--target", choices=["pt", "et"])
    g.add_argument("--config-tag", choices=["simo", "mimo"])
    g.add_argument("--snr-db", help="per-antenna SNR in dB (default 10)")
    g.add_argument("--grid", help="sweep grid min:max:points[:log]")
    g.add_argument("--seed", help="master random seed (default 0)")
    o = common.add_argument_group("output")
    o.add_argument("--out", default="-", help="output file, '-' for stdout")
    o.add_argument("--format", choices=["csv", "json"])
    o.add_argument("--config", help="key=value file with defaults for any flag above")

    parser = argparse.ArgumentParser(prog="nfrange", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    amb = sub.add_parser("ambiguity", parents=[common],
                         help="phase ambiguity vs beta, or full ambiguity vs rho")
    amb.add_argument("--axis", choices=["beta", "rho"])
    sub.add_parser("crb-sweep", parents=[common], help="range CRB vs R for every method")
    sub.add_parser("nf-term", parents=[common], help="near-field term eta - beta^2 vs R/D")
    sub.add_parser("effective-range", parents=[common], help="effective near-field range per configuration")
    mc = sub.add_parser("monte-carlo", parents=[common], help="estimator RMSE vs CRB")
    mc.add_argument("--trials", help="number of trials (default 100)")
    mc.add_argument("--fs", help="sampling rate in Hz (default 8B)")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, config file and flags (in increasing priority)."""
    params = dict(DEFAULTS)
    if args.config:
        params.update(read_config_file(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            params[key] = value
    return params


def _positive(params, key, integer=False):
    value = parse_si(params[key])
    if integer:
        if value != int(value) or value < 1:
            raise InvalidParameterError(f"--{key.replace('_', '-')} must be a positive integer")
        return int(value)
    if not (value > 0 and math.isfinite(value)):
        raise InvalidParameterError(f"--{key.replace('_', '-')} must be positive")
    return value


def make_scenario(params: dict, R: float | None = None) -> Scenario:
    bandwidth = _positive(params, "bandwidth")
    if params["waveform"] == "sinc":
        waveform = make_cardinal_sine(bandwidth)
    else:
        waveform = load_spectrum(params["waveform"])
    aperture = _positive(params, "aperture")
    nr = _positive(params, "nr", integer=True)
    tag = ArrayTag(params["config_tag"])
    if tag is ArrayTag.SIMO:
        array = ArrayConfig.simo(nr, aperture)
    elif tag is ArrayTag.MIMO:
        array = ArrayConfig.mimo(_positive(params, "nt", integer=True), nr, aperture)
    else:
        raise InvalidParameterError("--config-tag must be simo or mimo")
    target = TargetModel(TargetKind(params["target"]))
    R = _positive(params, "range") if R is None else R
    return Scenario.from_snr(_positive(params, "fc"), R, waveform, array, target,
                             parse_si(params["snr_db"]))


def _seed(params) -> int:
    seed = parse_si(params["seed"])
    if seed != int(seed) or seed < 0:
        raise InvalidParameterError("--seed must be a non-negative integer")
    return int(seed)


def _clean(value):
    if value is None:
        return None
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


_COMMAND_ONLY = {"axis": "ambiguity", "trials": "monte-carlo", "fs": "monte-carlo"}


def _meta(command: str, params: dict, extra: dict | None = None) -> dict:
    kept = {k: v for k, v in params.items()
            if v is not None and _COMMAND_ONLY.get(k, command) == command}
    meta = {"tool": "nfrange", "version": __version__, "command": command,
            "parameters": kept,
            "seed": params.get("seed")}
    if extra:
        meta.update({k: _clean(v) for k, v in extra.items()})
    return meta


def render(meta: dict, columns: list[str], rows: list[list], fmt: str,
           summary: dict | None = None) -> str:
    """CSV with ``#`` header lines, or JSON with ``meta``/``columns``/``rows``."""
    if fmt == "json":
        payload = {"meta": meta, "columns": columns,
                   "rows": [[_clean(v) for v in row] for row in rows]}
        if summary is not None:
            payload["summary"] = {k: _clean(v) for k, v in summary.items()}
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(f"# nfrange {__version__} {meta['command']}\n")
    for key, value in meta.items():
        if key not in ("tool", "version", "command"):
            buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    if summary is not None:
        buf.write(f"# summary: {json.dumps({k: _clean(v) for k, v in summary.items()})}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(["" if _clean(v) is None else (repr(float(v)) if isinstance(v, (float, np.floating))
                                                         else v) for v in row])
    return buf.getvalue()


def emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write output file {out}: {exc.strerror}") from None


def summary_path(out: str) -> str:
    """``trials.csv`` -> ``trials.summary.json``."""
    p = Path(out)
    return str(p.with_name(p.stem + ".summary.json"))


def run_ambiguity(params: dict) -> tuple[list[str], list[list], dict | None, dict]:
    s = make_scenario(params)
    if params["axis"] == "beta":
        beta = parse_grid(params["grid"] or "0:8:801")
        if np.any(beta < 0):
            raise InvalidParameterError("beta grid must be non-negative")
        cols = [np.atleast_1d(chi_phase_analytic(c, beta)) for c in Config]
        rows = [[b, *(c[i] for c in cols)] for i, b in enumerate(beta)]
        return ["beta", *(c.value for c in Config)], rows, None, {}
    if params["grid"]:
        rho = parse_grid(params["grid"])
    else:
        half = 5 * main_lobe_width(s)
        rho = np.linspace(max(s.R - half, 1e-3 * s.R), s.R + half, 201)
    columns = ["rho", "exact", "product", "analytic"]
    curves = [surface_array(ambiguity_surface(s, rho, m))
              for m in (AmbiguityMethod.EXACT, AmbiguityMethod.PRODUCT, AmbiguityMethod.ANALYTIC)]
    if s.array.tag is ArrayTag.SIMO and s.target.kind is TargetKind.ET:
        columns.append("mismatch")
        curves.append(surface_array(ambiguity_surface(s, rho, AmbiguityMethod.MISMATCH)))
    rows = [[r, *(c[i] for c in curves)] for i, r in enumerate(rho)]
    return columns, rows, None, {"rayleigh_distance": s.rayleigh_distance}


def log_log_knee(R: np.ndarray, crb: np.ndarray) -> float:
    """Range of maximum ``|d^2 log CRB / d (log R)^2|`` (interior points only)."""
    ok = np.isfinite(crb) & (crb > 0)
    x, y = np.log(R[ok]), np.log(crb[ok])
    if x.size < 5:
        return float("nan")
    curvature = np.gradient(np.gradient(y, x), x)
    inner = np.abs(curvature[2:-2])
    return float(np.exp(x[2:-2][np.argmax(inner)]))


def run_crb_sweep(params: dict):
    base = make_scenario(params)
    D = base.array.aperture
    R_grid = parse_grid(params["grid"] or f"{1.2 * D}:{100 * D}:200:log")
    if np.any(R_grid <= 0):
        raise InvalidParameterError("range grid must be positive")
    methods = (CrbMethod.EXACT_SUM, CrbMethod.ANALYTIC, CrbMethod.TAYLOR)
    rows, values = [], {m: [] for m in methods}
    with warnings.catch_warnings():
        # the Taylor route warns at every R below 1.2 D; one notice is enough
        warnings.simplefilter("ignore")
        for R in R_grid:
            s = base.replace(R=float(R))
            row, reasons = [R], []
            for m in methods:
                try:
                    b = crb_range(s, m)
                    row.append(b.crb)
                    values[m].append(b.crb)
                except NFRangeError as exc:
                    row.append(None)
                    values[m].append(np.nan)
                    reasons.append(f"{m.value}: {type(exc).__name__}")
            row.append("; ".join(reasons))
            rows.append(row)
    if np.any(R_grid < 1.2 * D):
        warnings.warn("part of the range grid lies below 1.2 D", stacklevel=2)
    summary = {"r_nf_eff": scenario_nf_range(base),
               "knee": log_log_knee(R_grid, np.asarray(values[CrbMethod.ANALYTIC])),
               "rayleigh_distance": base.rayleigh_distance}
    return ["R", "crb_exact", "crb_analytic", "crb_taylor", "reason"], rows, summary, {}


def run_nf_term(params: dict):
    base = make_scenario(params)
    D = base.array.aperture
    u_grid = parse_grid(params["grid"] or "1.2:100:200:log")
    if np.any(u_grid <= 0):
        raise InvalidParameterError("R/D grid must be positive")
    columns = ["u"]
    for c in Config:
        columns += [c.value, f"{c.value}-taylor"]
    columns.append("exact")
    rows = []
    for u in u_grid:
        row = [u]
        for c in Config:
            row += [eta_beta_analytic(c, u).nf_geometry_term, taylor_nf_term(c, u)]
        row.append(eta_beta_exact(base.array, base.target, u * D).nf_geometry_term)
        rows.append(row)
    return columns, rows, None, {}


def run_effective_range(params: dict):
    base = make_scenario(params)
    w = base.waveform
    fm, brms = central_frequency(w), rms_bandwidth(w)
    D = base.array.aperture
    rows = [[c.value, ALPHA[c], effective_nf_range(c, D, base.fc, fm, brms)] for c in Config]
    summary = {"rayleigh_distance": rayleigh_distance(D, base.fc), "central_frequency": fm,
               "rms_bandwidth": brms, "scenario_config": base.config.value,
               "r_nf_eff": scenario_nf_range(base)}
    return ["config", "alpha", "r_nf_eff"], rows, summary, {}


def run_monte_carlo(params: dict):
    s = make_scenario(params)
    trials = _positive(params, "trials", integer=True)
    fs = None if params["fs"] is None else _positive(params, "fs")
    if params["grid"]:
        parts = str(params["grid"]).split(":")
        if len(parts) < 2:
            raise InvalidParameterError("monte-carlo grid is min:max[:points]")
        lo, hi = parse_si(parts[0]), parse_si(parts[1])
        step = None
        if len(parts) >= 3:
            n = int(parts[2])
            if n < 3:
                raise InvalidParameterError("search grid needs at least 3 points")
            step = (hi - lo) / (n - 1)
        grid = SearchGrid(lo, hi, step)
    else:
        grid = SearchGrid.around(s)
    result = monte_carlo(s, trials, fs=fs, grid=grid, seed=_seed(params))
    if result.boundary_failures:
        warnings.warn(f"{result.boundary_failures} trial(s) peaked on the search-grid boundary", stacklevel=2)
    rows = [[t, r, e] for t, (r, e) in enumerate(zip(result.estimates, result.errors))]
    return ["trial", "r_hat", "error"], rows, result.summary(), {}


RUNNERS = {
    "ambiguity": run_ambiguity,
    "crb-sweep": run_crb_sweep,
    "nf-term": run_nf_term,
    "effective-range": run_effective_range,
    "monte-carlo": run_monte_carlo,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    code = 0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            params = resolve(args)
            _seed(params)
            columns, rows, summary, extra = RUNNERS[args.command](params)
            meta = _meta(args.command, params, extra)
            emit(render(meta, columns, rows, params["format"], summary), args.out)
            if args.command == "monte-carlo" and params["format"] == "csv" and args.out != "-":
                sidecar = {"meta": meta, "summary": {k: _clean(v) for k, v in summary.items()}}
                emit(json.dumps(sidecar, indent=2) + "\n", summary_path(args.out))
        except (NFRangeError, OSError, ValueError) as exc:
            print(f"nfrange: error: {exc}", file=sys.stderr)
            code = 1
    seen = set()
    for w in caught:
        text = str(w.message)
        if text not in seen:
            seen.add(text)
            print(f"nfrange: warning: {text}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
