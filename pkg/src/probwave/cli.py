"""``probwave`` command-line front end.

Subcommands: verify, solve, compare, generate, fit, report. Exit status is
0 on success, 1 on domain or data errors and 2 on usage errors.
"""

import argparse
import json
import math
import re
import sys
from datetime import datetime, timedelta

import numpy as np

from . import __version__
from .dataio import (
    SCHEMA,
    _csv,
    build_distribution,
    distribution_to_trades,
    export_report,
    format_timestamp,
    generate_synthetic,
    parse_timestamp,
    parse_trades,
    tick_multiples,
    write_trades,
)
from .eigensolve import (
    SolverConfig,
    compare_spectra,
    solve_bessel_truncated,
    solve_spectrum_nonlocal,
    solve_spectrum_schrodinger,
)
from .errors import DomainError, ProbwaveError
from .fitkit import FitOptions, fit_model, select_model
from .wavemodel import Family, Grid, PotentialSpec, WaveModel, interaction_diagnostic

_HHMM = re.compile(r"^(\d{1,2}):(\d{2})$")
DEFAULT_DATE = "2024-01-02"
DEFAULT_SESSION = "09:30..15:00"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _count(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text!r}")
    return v


def _tick_arg(text):
    return None if text == "auto" else _positive(text)


def _shared(p):
    p.add_argument("--format", choices=("json", "csv"), default="json", help="output format (default json)")
    p.add_argument("--out", metavar="PATH", help="output file (default standard output)")
    p.add_argument("--seed", type=int, default=0, help="seed for every stochastic component (default 0)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads; output does not depend on it")


def build_parser():
    parser = _Parser(prog="probwave", description="Probability-wave models: solvers, synthetic data and fitting.")
    parser.add_argument("--version", action="version", version=f"probwave {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("verify", help="run the acceptance suite")
    _shared(p)
    p.add_argument("--only", type=int, nargs="+", metavar="N", help="run only these criterion numbers")

    p = sub.add_parser("solve", help="eigenvalue spectra")
    _shared(p)
    p.add_argument("--family", choices=("nonlocal", "schrodinger", "bessel-truncated"), default="nonlocal")
    p.add_argument("--a-tt", type=_positive, default=1.0, help="reversal-force magnitude (default 1)")
    p.add_argument("--beta", type=_positive, default=1.0, help="scale B^2/M of the non-localized equation")
    p.add_argument("--beta-s", type=_positive, default=1.0, help="kinetic scale of the Schrödinger equation")
    p.add_argument("--nmax", type=_count, default=3, help="highest level index (default 3)")
    p.add_argument("--ymax", type=_positive, help="truncation radius (bessel-truncated: default 1)")
    p.add_argument("--steps", type=int, default=SolverConfig.steps, help="RK4 steps on [0, ymax]")

    p = sub.add_parser("compare", help="non-localized vs Schrödinger spectra")
    _shared(p)
    p.add_argument("--a-tt", type=_positive, default=1.0)
    p.add_argument("--beta", type=_positive, default=1.0)
    p.add_argument("--beta-s", type=_positive, default=1.0)
    p.add_argument("--nmax", type=_count, default=3)

    p = sub.add_parser(
        "generate",
        help="synthetic volume-price data",
        description="csv writes timestamp,price,volume trades (one per price level, volume in lots); "
        "json writes the binned distribution.",
    )
    _shared(p)
    p.add_argument("--family", choices=("bessel", "kummer"), default="bessel")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--omega", type=_positive, help="Bessel frequency (default 2)")
    grp.add_argument("--a-tt", type=_positive, help="Kummer reversal force (default 1)")
    p.add_argument("--order", type=_count, default=0, help="Kummer order n (default 0)")
    p.add_argument("--beta", type=_positive, default=1.0)
    p.add_argument("--q0", type=float, default=100.0, help="equilibrium price (default 100)")
    p.add_argument("--tick", type=_positive, default=0.01, help="price tick (default 0.01)")
    p.add_argument("--span", type=_positive, default=3.0, help="grid half-width around q0 (default 3)")
    p.add_argument("--n", type=int, default=100_000, help="number of draws (default 100000)")
    p.add_argument("--date", default=DEFAULT_DATE, help=f"session date for csv timestamps (default {DEFAULT_DATE})")
    p.add_argument("--session", default=DEFAULT_SESSION, help=f"HH:MM..HH:MM span for timestamps (default {DEFAULT_SESSION})")

    p = sub.add_parser("fit", help="fit wave models to trade data")
    _shared(p)
    p.add_argument("--input", required=True, metavar="PATH", help="trades csv (timestamp,price,volume)")
    p.add_argument("--lot-size", type=_positive, default=100.0, help="shares per volume unit (default 100)")
    p.add_argument("--window", help="HH:MM..HH:MM (on the first trade's date) or epoch-ms START..END")
    p.add_argument("--tick", type=_tick_arg, default=None, help="price tick or 'auto' (default auto)")
    p.add_argument("--family", choices=("bessel", "kummer", "auto"), default="auto")
    p.add_argument("--n-scan", type=_count, default=3, help="highest Kummer order scanned (default 3)")
    p.add_argument("--starts", type=int, default=8, help="multi-start count (default 8)")

    p = sub.add_parser("report", help="re-render a probwave/1 json report")
    _shared(p)
    p.add_argument("--input", required=True, metavar="PATH")
    return parser


def _parse_window(text, trades):
    if text is None:
        return None
    parts = text.split("..")
    if len(parts) != 2:
        raise _UsageError(f"bad --window {text!r}: expected START..END")
    if all(_HHMM.match(s.strip()) for s in parts):
        if not trades:
            raise DomainError("cannot anchor an HH:MM window without trades")
        day = datetime(1970, 1, 1) + timedelta(milliseconds=trades[0].timestamp)
        midnight = parse_timestamp(day.date().isoformat() + "T00:00:00")
        bounds = []
        for s in parts:
            hh, mm = (int(v) for v in _HHMM.match(s.strip()).groups())
            bounds.append(midnight + (hh * 60 + mm) * 60_000)
        return tuple(bounds)
    try:
        return tuple(parse_timestamp(s) for s in parts)
    except ValueError:
        raise _UsageError(f"bad --window {text!r}") from None


def _session_bounds(date, session):
    parts = session.split("..")
    if len(parts) != 2 or not all(_HHMM.match(s) for s in parts):
        raise _UsageError(f"bad --session {session!r}: expected HH:MM..HH:MM")
    try:
        midnight = parse_timestamp(f"{date}T00:00:00")
    except ValueError:
        raise _UsageError(f"bad --date {date!r}") from None
    out = []
    for s in parts:
        hh, mm = (int(v) for v in _HHMM.match(s).groups())
        out.append(midnight + (hh * 60 + mm) * 60_000)
    return out


def _cmd_verify(args):
    from .acceptance import run_all

    results = run_all(args.only, jobs=args.jobs, log=lambda line: print(line, file=sys.stderr))
    payload = {
        "kind": "verify",
        "passed": all(r.passed for r in results),
        "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed, "seconds": r.seconds, "detail": r.detail}
            for r in results
        ],
    }
    if args.format == "csv":
        lines = ["number,passed,seconds,name"]
        lines += [f"{r.number},{'true' if r.passed else 'false'},{r.seconds:.3f},{r.name}" for r in results]
        data = ("\n".join(lines) + "\n").encode("utf-8")
    else:
        data = export_report(payload, "json")
    return data, 0 if payload["passed"] else 1


def _cmd_solve(args):
    meta = {
        "command": "solve",
        "family": args.family,
        "a_tt": args.a_tt,
        "beta": args.beta,
        "beta_s": args.beta_s,
        "nmax": args.nmax,
        "ymax": args.ymax,
        "steps": args.steps,
    }
    if args.family == "bessel-truncated":
        y_max = args.ymax or 1.0
        cfg = SolverConfig(steps=args.steps, n_max=args.nmax)
        hi = math.pi * (args.nmax + 1.5) / y_max
        omegas = solve_bessel_truncated((0.0, hi), y_max, cfg)[: args.nmax + 1]
        result = {"kind": "bessel-truncated", "y_max": y_max, "omegas": omegas, "zeros": [w * y_max for w in omegas]}
    else:
        cfg = SolverConfig(y_max=args.ymax, steps=args.steps, n_max=args.nmax)
        if args.family == "nonlocal":
            result = solve_spectrum_nonlocal(PotentialSpec(0.0, args.a_tt), args.beta, cfg, jobs=args.jobs)
        else:
            result = solve_spectrum_schrodinger(args.a_tt, args.beta_s, cfg, jobs=args.jobs)
    return export_report(result, args.format, meta=meta), 0


def _cmd_compare(args):
    table = compare_spectra(args.a_tt, args.beta, args.beta_s, args.nmax, jobs=args.jobs)
    meta = {"command": "compare", "a_tt": args.a_tt, "beta": args.beta, "beta_s": args.beta_s, "nmax": args.nmax}
    return export_report(table, args.format, meta=meta), 0


def _cmd_generate(args):
    if args.n < 1:
        raise _UsageError("--n must be positive")
    if args.family == "bessel":
        if args.a_tt is not None:
            raise _UsageError("--a-tt applies to the kummer family")
        model = WaveModel.bessel(args.q0, args.omega or 2.0, beta=args.beta)
    else:
        if args.omega is not None:
            raise _UsageError("--omega applies to the bessel family")
        model = WaveModel.kummer(args.q0, args.a_tt or 1.0, n=args.order, beta=args.beta)
    half = int(round(args.span / args.tick))
    centre = int(round(args.q0 / args.tick))
    grid = Grid(tick_multiples(centre + np.arange(-half, half + 1), args.tick), args.tick)
    dist = generate_synthetic(model, grid, args.n, args.seed)
    if args.format == "csv":
        start, end = _session_bounds(args.date, args.session)
        return write_trades(distribution_to_trades(dist, start, end), tick=args.tick), 0
    meta = {
        "command": "generate",
        "family": args.family,
        "omega": model.omega,
        "a_tt": model.a_tt,
        "order": model.n,
        "beta": args.beta,
        "q0": args.q0,
        "tick": args.tick,
        "span": args.span,
        "n": args.n,
        "seed": args.seed,
    }
    return export_report(dist, "json", meta=meta), 0


def _conservation_payload(report):
    return {
        "family": report.family.value,
        "omega_sq": report.omega_sq,
        "a_tt": report.a_tt,
        "stat_min": report.stat_min,
        "stat_max": report.stat_max,
        "stat_cv": report.stat_cv,
        "note": report.note,
        "interaction_stat": report.interaction_stat,
        "implied_reversal": report.implied_reversal,
    }


def _cmd_fit(args):
    with open(args.input, "rb") as fh:
        trades = parse_trades(fh, lot_size=args.lot_size)
    window = _parse_window(args.window, trades)
    dist = build_distribution(trades, window, args.tick)
    fams = {"bessel": (Family.BESSEL_J0,), "kummer": (Family.KUMMER,), "auto": tuple(Family)}[args.family]
    opts = FitOptions(families=fams, n_scan_max=args.n_scan, starts=args.starts, seed=args.seed, jobs=args.jobs)
    if args.family == "bessel":
        results = [fit_model(dist, Family.BESSEL_J0, opts)]
    elif args.family == "kummer" and args.n_scan == 0:
        results = [fit_model(dist, Family.KUMMER, opts, 0)]
    else:
        results = select_model(dist, opts)
    meta = {
        "command": "fit",
        "input": args.input,
        "lot_size": args.lot_size,
        "window": list(window) if window else None,
        "window_iso": [format_timestamp(w) for w in window] if window else None,
        "tick": dist.grid.tick,
        "family": args.family,
        "n_scan": args.n_scan,
        "starts": args.starts,
        "seed": args.seed,
        "total": dist.total,
        "peak_price": dist.peak_price,
    }
    if args.format == "csv":
        return export_report(results, "csv"), 0
    payload = json.loads(export_report(results, "json", meta=meta))
    # re-serialize through export_report so number formatting stays canonical
    payload["conservation"] = _conservation_payload(interaction_diagnostic(dist, results[0].model))
    return export_report(payload, "json"), 0


def _cmd_report(args):
    with open(args.input, "rb") as fh:
        payload = json.loads(fh.read().decode("utf-8"))
    if payload.get("schema") != SCHEMA:
        raise DomainError(f"{args.input} is not a {SCHEMA} report")
    if args.format == "json":
        return export_report(payload, "json"), 0
    kind = payload.get("kind")
    if kind == "fit":
        pts = payload["results"][0]["points"]
        cols, keys = [pts["q"], pts["f_emp"], pts["f_fit"]], ("q", "f_emp", "f_fit")
    elif kind == "spectrum":
        lv = payload["levels"]
        keys = ("index", "energy", "nodes", "residual")
        cols = [[row[k] for row in lv] for k in keys]
    elif kind == "comparison":
        keys = ("n", "nonlocal", "schrodinger", "nonlocal_spacing", "schrodinger_spacing", "spacing_ratio")
        cols = [[row.get(k) for row in payload["rows"]] for k in keys]
    elif kind == "distribution":
        keys, cols = ("q", "m"), [payload["points"]["q"], payload["points"]["m"]]
    else:
        raise DomainError(f"report kind {kind!r} has no csv rendering")
    return _csv(keys, cols), 0


_COMMANDS = {
    "verify": _cmd_verify,
    "solve": _cmd_solve,
    "compare": _cmd_compare,
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "report": _cmd_report,
}


def _emit(data, path):
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
        return
    out = getattr(sys.stdout, "buffer", None)
    if out is not None:
        out.write(data)
        out.flush()
    else:
        sys.stdout.write(data.decode("utf-8"))


def _error_payload(exc):
    return export_report({"error": {"type": type(exc).__name__, "message": str(exc)}}, "json")


def run(argv=None):
    """Run one probwave command; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        data, code = _COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"probwave {args.command}: error: {exc}\n")
        return 2
    except (ProbwaveError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            message = f"file not found: {exc.filename}"
        else:
            message = str(exc)
        sys.stderr.write(f"probwave {args.command}: error: {message}\n")
        if args.format == "json":
            try:
                _emit(_error_payload(exc), args.out)
            except OSError:
                pass
        return 1
    _emit(data, args.out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
