"""Command-line front end.

Every subcommand resolves its configuration as built-in defaults, then the
``--config`` JSON document (a plain config or a previous run manifest), then
explicit flags. Data goes to ``--out DIR/<subcommand>.<format>`` (or stdout)
and a run manifest to ``DIR/manifest.json`` (or stderr).

Exit codes: 0 success, 1 invalid configuration, 2 failed check or audit,
3 I/O failure.
"""

import argparse
from datetime import datetime, timezone
import io
import json
import logging
import math
from pathlib import Path
import sys
import time

import numpy as np

from . import __version__, bounds, experiments
from .lattice import ModelParams, build_hamiltonian, sample_potential
from .spectral import lowest_eigenvalues

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_IO = 0, 1, 2, 3

SIMULATE_HEADER = ("epsilon", "mean_ids", "stderr", "total_count", "lower_bound", "upper_bound",
                   "finite_lower", "realizations", "L", "p", "b", "C", "seed")

DEFAULTS = {"L": 1_000_000, "p": 0.5, "b": 1.0, "eps": "0.05:0.3:6", "realizations": 30,
            "seed": 0, "ensemble": "fixed-L", "n": None, "C": 0.0, "format": "csv",
            "k": 10, "tol": 1e-10, "ell0": None, "oracle_limit": 5000}

COMMAND_DEFAULTS = {
    "audit-theorem21": {"L": 500, "realizations": 200},
    "intervals": {"n": 100_000, "realizations": 2000},
    "spectrum": {"L": 1000},
}

log = logging.getLogger("anderson_bernoulli")


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_eps(spec) -> list:
    """``"a,b,c"`` list or ``"lo:hi:n"`` geometric grid; lists pass through."""
    if isinstance(spec, (list, tuple)):
        return [float(e) for e in spec]
    spec = str(spec).strip()
    try:
        if ":" in spec:
            lo, hi, n = spec.split(":")
            grid = np.geomspace(float(lo), float(hi), int(n))
            return [float(e) for e in grid]
        return sorted(float(e) for e in spec.split(",") if e.strip())
    except ValueError as exc:
        raise ConfigError(f"bad --eps value {spec!r}: {exc}") from None


def fmt(x) -> str:
    """Shortest round-trip text for reals; plain text otherwise."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return "" if x is None else str(x)


def _csv(header, rows) -> str:
    out = io.StringIO()
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(fmt(v) for v in row) + "\n")
    return out.getvalue()


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return _jsonable(x.item())
    return x


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON config or run manifest; flags override it")
    common.add_argument("--L", type=int, dest="L")
    common.add_argument("--p", type=float)
    common.add_argument("--b", type=float)
    common.add_argument("--eps", help="comma list or lo:hi:n geometric grid")
    common.add_argument("--realizations", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--ensemble", choices=experiments.ENSEMBLES)
    common.add_argument("--n", type=int)
    common.add_argument("--C", type=float, dest="C")
    common.add_argument("--out", help="output directory (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--workers", type=int, help="worker threads (default $SIM_WORKERS or 1)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="anderson-bernoulli",
                     description="Integrated density of states of the 1D Anderson-Bernoulli model.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("simulate", parents=[common], help="disorder-averaged IDS with bound overlay")
    sub.add_parser("verify-bounds", parents=[common], help="check the IDS against both tail bounds")
    sub.add_parser("audit-theorem21", parents=[common], help="check E_k <= U_k with the dense oracle")
    sub.add_parser("intervals", parents=[common], help="longest-run and survival statistics")
    spectrum = sub.add_parser("spectrum", parents=[common], help="lowest eigenvalues of one realization")
    spectrum.add_argument("-k", type=int, dest="k")
    spectrum.add_argument("--tol", type=float)
    bnds = sub.add_parser("bounds", parents=[common], help="evaluate the closed-form bounds")
    bnds.add_argument("--ell0", type=int, help="longest zero run for the finite-volume coefficient")
    return parser


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {args.config} is not valid JSON: {exc}") from None
        if "config" in doc and isinstance(doc["config"], dict):
            doc = doc["config"]
        unknown = set(doc) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["eps"] = parse_eps(cfg["eps"])
    return cfg


def _experiment_config(cfg) -> experiments.ExperimentConfig:
    params = ModelParams(L=cfg["L"], p=cfg["p"], b=cfg["b"])
    return experiments.ExperimentConfig(params=params, epsilons=tuple(cfg["eps"]),
                                        realizations=cfg["realizations"], master_seed=cfg["seed"],
                                        ensemble=cfg["ensemble"], n=cfg["n"],
                                        oracle_limit=cfg["oracle_limit"], C=cfg["C"])


def cmd_simulate(cfg, workers):
    ec = _experiment_config(cfg)
    dos = experiments.estimate_dos(ec, workers)
    p, b, C = cfg["p"], cfg["b"], cfg["C"]
    curve = bounds.evaluate_bounds(dos.epsilons, p, b, C)
    finite = experiments.finite_lower_overlay(dos, p)
    L_out = dos.L if ec.ensemble == "fixed-L" else dos.total_sites / dos.realizations
    rows = [(e, k, s, int(t), lo, up, fl, dos.realizations, L_out, p, b, C, dos.seed)
            for e, k, s, t, lo, up, fl in zip(dos.epsilons, dos.mean_ids, dos.stderr,
                                              dos.total_counts, curve.lower, curve.upper, finite)]
    try:
        fit = bounds.fit_lifschitz_exponent(dos)
        summary = {"slope": fit.slope, "slope_stderr": fit.stderr,
                   "target_slope": math.pi * math.log(p) if p < 1 else None}
    except ValueError:
        summary = {"slope": None}
    summary["total_sites"] = dos.total_sites
    return SIMULATE_HEADER, rows, summary, EXIT_OK


def cmd_verify_bounds(cfg, workers):
    report = experiments.verify_sandwich(_experiment_config(cfg), workers)
    header = ("epsilon", "mean_ids", "stderr", "lower_bound", "upper_bound", "lower_ok", "upper_ok")
    rows = [(r.epsilon, r.mean_ids, r.stderr, r.lower, r.upper, r.lower_ok, r.upper_ok)
            for r in report.rows]
    summary = {"applicable": report.applicable, "assertable": report.assertable,
               "contained": report.contained, "passed": report.passed,
               "slope": report.fit.slope if report.fit else None,
               "slope_stderr": report.fit.stderr if report.fit else None,
               "target_slope": report.target_slope}
    return header, rows, summary, EXIT_OK if report.passed else EXIT_CHECK


def cmd_audit(cfg, workers):
    params = ModelParams(L=cfg["L"], p=cfg["p"], b=cfg["b"])
    report = experiments.theorem21_audit(params, cfg["realizations"], master_seed=cfg["seed"],
                                         oracle_limit=cfg["oracle_limit"], workers=workers)
    header = ("realization", "Lprime", "max_gap", "violation")
    rows = [(i, lp, g, g > report.tolerance)
            for i, (lp, g) in enumerate(zip(report.lprimes, report.max_gaps))]
    summary = {"realizations": len(rows), "violations": report.violations,
               "max_gap": report.max_gap, "tolerance": report.tolerance}
    return header, rows, summary, EXIT_OK if report.passed else EXIT_CHECK


def cmd_intervals(cfg, workers):
    report = experiments.run_length_experiment(cfg["n"], cfg["p"], cfg["realizations"],
                                               cfg["seed"], workers=workers)
    header = ("y", "threshold", "empirical", "limit", "exact_finite_n")
    rows = [tuple(r[h] for h in header) for r in report.law]
    summary = {"median_ell0": report.median_ell0, "survival": report.survival,
               "ell0_mean": float(report.ell0.mean())}
    return header, rows, summary, EXIT_OK


def cmd_spectrum(cfg, workers):
    params = ModelParams(L=cfg["L"], p=cfg["p"], b=cfg["b"])
    v = sample_potential(params, cfg["seed"], 0)
    k = min(cfg["k"], params.L)
    sl = lowest_eigenvalues(build_hamiltonian(v), k, cfg["tol"])
    rows = [(i + 1, e, lo, hi) for i, (e, lo, hi) in enumerate(zip(sl.eigenvalues, sl.lower, sl.upper))]
    return ("k", "eigenvalue", "lower", "upper"), rows, {"tolerance": sl.tolerance}, EXIT_OK


def cmd_bounds(cfg, workers):
    p, b, C = cfg["p"], cfg["b"], cfg["C"]
    curve = bounds.evaluate_bounds(cfg["eps"], p, b, C, ell0=cfg["ell0"])
    if curve.finite_lower is None:
        header = ("epsilon", "lower_bound", "upper_bound", "p", "b", "C")
        rows = [(e, lo, up, p, b, C) for e, lo, up in zip(curve.epsilons, curve.lower, curve.upper)]
    else:
        header = ("epsilon", "lower_bound", "upper_bound", "finite_lower", "p", "b", "C")
        rows = [(e, lo, up, fl, p, b, C)
                for e, lo, up, fl in zip(curve.epsilons, curve.lower, curve.upper, curve.finite_lower)]
    return header, rows, {"underflow": curve.underflow}, EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify-bounds": cmd_verify_bounds,
            "audit-theorem21": cmd_audit, "intervals": cmd_intervals,
            "spectrum": cmd_spectrum, "bounds": cmd_bounds}


def _render(fmt_name, header, rows, summary) -> str:
    if fmt_name == "csv":
        return _csv(header, rows)
    records = [dict(zip(header, r)) for r in rows]
    return json.dumps(_jsonable({"rows": records, "summary": summary}), indent=2) + "\n"


def main(argv=None) -> int:
    started = time.time()
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = resolve_config(args)
        workers = experiments.resolve_workers(args.workers)
        header, rows, summary, code = COMMANDS[args.command](cfg, workers)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    body = _render(cfg["format"], header, rows, summary)
    manifest = {"tool": "anderson-bernoulli", "version": __version__, "command": args.command,
                "config": cfg, "master_seed": cfg["seed"], "workers": workers,
                "started_at": datetime.fromtimestamp(started, timezone.utc).isoformat(),
                "wall_time_s": time.time() - started, "exit_code": code, "outputs": [],
                "summary": summary}
    try:
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            data_path = out / f"{args.command}.{cfg['format']}"
            data_path.write_text(body)
            manifest["outputs"] = [str(data_path)]
            (out / "manifest.json").write_text(json.dumps(_jsonable(manifest), indent=2) + "\n")
        else:
            sys.stdout.write(body)
            sys.stdout.flush()
            print(json.dumps(_jsonable(manifest)), file=sys.stderr)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
