"""Command-line front end driven by YAML scenario files.

Exit codes: 0 success, 1 usage or parse error, 2 validation failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys

import numpy as np

from . import classical, correlations, optimize, processes, scenario_io
from .correlations import NumericalError, ProbabilityTable
from .tensor import PSD_TOL

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3
TOL_ENV = "STCORR_TOL"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    # str.format never consults the locale, so the decimal point is always "."
    return format(float(x), ".12g")


def _tol(args) -> float:
    if args.tol is not None:
        return args.tol
    env = os.environ.get(TOL_ENV)
    if env is None:
        return PSD_TOL
    try:
        return float(env)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={env!r} is not a number") from None


def _load(args) -> scenario_io.ScenarioFile:
    tol = _tol(args)
    if args.file.startswith("bundled:"):
        name = args.file.split(":", 1)[1]
        if name not in scenario_io.bundled_names():
            raise UsageError(f"no bundled scenario {name!r}; "
                             f"available: {', '.join(scenario_io.bundled_names())}")
        sf = scenario_io.parse_scenario(scenario_io.bundled(name), tol)
    else:
        try:
            sf = scenario_io.load_scenario(args.file, tol)
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc.strerror}") from None
    if getattr(args, "visibility", None) is not None:
        if not 0 <= args.visibility <= 1:
            raise UsageError("--visibility must lie in [0, 1]")
        sf = scenario_io.ScenarioFile(sf.scenario, sf.name, args.visibility,
                                      sf.inequality, sf.roles)
    return sf


def _table(sf, args) -> ProbabilityTable:
    return correlations.probability_table(sf.effective_scenario(), _tol(args))


def _functional(sf, name):
    if name:
        try:
            return correlations.preset(name)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
    if sf.inequality is None:
        raise UsageError("the scenario declares no inequality; pass --name")
    return sf.inequality


def _outcome_header(table):
    return ["P(" + ",".join(f"{v:+d}" if isinstance(v, (int, np.integer)) else str(v)
                            for v in combo) + ")"
            for combo in itertools.product(*table.outcome_values)]


def _write_rows(header, rows, out, as_csv):
    if as_csv:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    out.write("  ".join(h.rjust(n) for h, n in zip(header, widths)) + "\n")
    for r in rows:
        out.write("  ".join(c.rjust(n) for c, n in zip(r, widths)) + "\n")


def cmd_validate(args, out):
    sf = _load(args)
    w = sf.effective_scenario().process
    report = processes.validate(w, _tol(args))
    out.write(f"scenario: {sf.name or args.file}\n{report}\n")
    for p in sf.scenario.parties:
        out.write(f"party {p.name}: {p.n_settings} settings, outcomes {list(p.outcomes)}\n")
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_simulate(args, out):
    sf = _load(args)
    table = _table(sf, args)
    if args.settings:
        try:
            xs = tuple(int(v) for v in args.settings.split(","))
        except ValueError:
            raise UsageError("--settings takes comma-separated integers") from None
        if len(xs) != table.n_parties or any(
                not 0 <= x < n for x, n in zip(xs, table.settings_shape)):
            raise UsageError(f"--settings must index settings of shape {table.settings_shape}")
        selected = [xs]
    else:
        selected = list(table.settings())
    header = [f"x_{p}" for p in table.parties] + _outcome_header(table)
    rows = [[str(x) for x in xs] + [_fmt(p) for p in table.probs(xs).ravel()]
            for xs in selected]
    _write_rows(header, rows, out, args.csv)
    return EXIT_OK


def cmd_inequality(args, out):
    sf = _load(args)
    f = _functional(sf, args.name)
    if f.n_parties != len(sf.scenario.parties):
        raise UsageError(f"{f.name} needs {f.n_parties} parties")
    value = correlations.evaluate(f, _table(sf, args))
    out.write(f"{f.name}: {_fmt(value)} (classical bound {_fmt(f.bound)}"
              f"{', violated' if value > f.bound + _tol(args) else ''})\n")
    return EXIT_OK


def cmd_bound(args, out):
    f = _functional(None, args.name)
    if args.model == "local":
        value = classical.local_bound(f)
    else:
        value = classical.biseparable_bound(f)
    out.write(f"{f.name} {args.model} bound: {_fmt(value)}\n")
    return EXIT_OK


def cmd_optimize(args, out):
    sf = _load(args)
    f = _functional(sf, args.name)
    counts = {p.n_settings for p in sf.scenario.parties}
    if len(counts) != 1:
        raise UsageError("optimisation needs the same number of settings for every party")
    template = optimize.ProjectiveTemplate(sf.effective_scenario().process, sf.roles,
                                           counts.pop())
    res = optimize.optimize(template, f, args.mode, args.restarts, args.seed)
    out.write(f"{f.name}: best value {_fmt(res.best_value)} after {res.evaluations} "
              f"evaluations over {args.restarts} restarts\n")
    per = res.best_settings.per_setting * template.n_settings
    angles = res.best_settings.reduced()
    for k, (name, role) in enumerate(template.parties):
        chunk = ", ".join(_fmt(a) for a in angles[k * per:(k + 1) * per])
        out.write(f"  {name} ({role}): {chunk}\n")
    if not res.converged:
        sys.stderr.write("warning: some restarts hit the evaluation budget\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_scan_kappa(args, out):
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if not 0 <= args.visibility <= 1:
        raise UsageError("--visibility must lie in [0, 1]")
    f = _functional(None, args.name)
    grid = np.linspace(0, 1, args.points)
    rows = [[_fmt(k), _fmt(v)] for k, v in
            optimize.scan_kappa(grid, f, visibility=args.visibility)]
    header = ["kappa", f.name]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            _write_rows(header, rows, fh, True)
        out.write(f"wrote {len(rows)} rows to {args.out}\n")
    else:
        _write_rows(header, rows, out, True)
    return EXIT_OK


def cmd_nosignal(args, out):
    sf = _load(args)
    table = _table(sf, args)
    targets = [t for t in args.to.split(",") if t]
    for name in [args.from_] + targets:
        if name not in table.parties:
            raise UsageError(f"unknown party {name!r}; parties are {list(table.parties)}")
    d = correlations.no_signalling_distance(table, args.from_, targets)
    out.write(f"max variational distance {args.from_} -> {','.join(targets)}: {_fmt(d)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stcorr", description="Process-matrix correlation toolkit.")
    p.add_argument("--tol", type=float, default=None,
                   help=f"numerical tolerance (default: ${TOL_ENV} or {PSD_TOL:g})")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def with_file(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("file", help="scenario YAML, or bundled:<name>")
        s.add_argument("--visibility", type=float, default=None,
                       help="depolarising visibility overriding the file's value")
        return s

    with_file("validate", "check the process and instruments").set_defaults(fn=cmd_validate)

    s = with_file("simulate", "print the outcome distribution")
    s.add_argument("--settings", help="one setting tuple, e.g. 0,1,0 (default: all)")
    s.add_argument("--csv", action="store_true", help="emit CSV")
    s.set_defaults(fn=cmd_simulate)

    s = with_file("inequality", "evaluate a Bell-type functional")
    s.add_argument("--name", choices=sorted(correlations.PRESETS))
    s.set_defaults(fn=cmd_inequality)

    s = sub.add_parser("bound", help="classical bound by enumeration")
    s.add_argument("--name", required=True, choices=sorted(correlations.PRESETS))
    s.add_argument("--model", choices=("local", "biseparable"), default="local")
    s.set_defaults(fn=cmd_bound)

    s = with_file("optimize", "maximise a functional over projective angles")
    s.add_argument("--name", choices=sorted(correlations.PRESETS))
    s.add_argument("--mode", choices=optimize.MODES, default="xy")
    s.add_argument("--restarts", type=int, default=16)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(fn=cmd_optimize)

    s = sub.add_parser("scan-kappa", help="functional versus interaction strength")
    s.add_argument("--points", type=int, default=11)
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.add_argument("--name", choices=("mermin", "svetlichny"), default="svetlichny")
    s.add_argument("--visibility", type=float, default=1.0)
    s.set_defaults(fn=cmd_scan_kappa)

    s = with_file("nosignal", "largest marginal shift caused by one party's setting")
    s.add_argument("--from", dest="from_", required=True)
    s.add_argument("--to", required=True, help="comma-separated receiving parties")
    s.set_defaults(fn=cmd_nosignal)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out)
    except (UsageError, scenario_io.ScenarioParseError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except scenario_io.ScenarioValidationError as exc:
        sys.stderr.write(f"invalid scenario: {exc}\n")
        return EXIT_INVALID
    except (optimize.TemplateError, processes.InvalidProcessError) as exc:
        sys.stderr.write(f"invalid scenario: {exc}\n")
        return EXIT_INVALID
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERICAL


def main_entry():
    sys.exit(main())
