"""Command-line front end.

    syscovar measure  --family gaussian --rho 0.5 --alpha 0.95 --measure covar_geq
    syscovar sweep    --family gumbel_t3 --theta 1:3:0.1 --measure covar_eq,covar_geq --alpha 0.95
    syscovar backtest --family t3 --rho 0,0.2,0.5 --levels 0.95:0.95,0.99:0.99 --seed 42
    syscovar cloud    --family gaussian --rho 0.5 --n 2000 -o cloud.csv
    syscovar verify

Exit status: 0 on success, 1 for invalid input, 2 when a numerical routine
fails to converge.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .backtest import BacktestReport, run_table, sample_cloud_export
from .errors import ConvergenceError, SysCovarError
from .measures import FAMILIES, MEASURES, VARIANTS, Levels, evaluate, family_parameter_name, model_for
from .reporting import SHORT, write_csv, write_json
from .rng import RNG_ALGORITHM

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2

RANGE_TOL = 1e-12
DEFAULT_N = 1_000_000
FULL_N = 10_000_000


class UsageError(SysCovarError, ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# value parsing
# ---------------------------------------------------------------------------

def _number(token, flag):
    try:
        return float(token)
    except ValueError:
        raise UsageError(f"{flag}: malformed number {token!r}") from None


def parse_range(token, flag="value"):
    """``start:stop:step`` inclusive of ``stop`` up to 1e-12."""
    parts = token.split(":")
    if len(parts) != 3:
        raise UsageError(f"{flag}: range {token!r} must have the form start:stop:step")
    start, stop, step = (_number(p, flag) for p in parts)
    if step <= 0.0:
        raise UsageError(f"{flag}: step must be > 0 in {token!r}")
    if stop < start:
        raise UsageError(f"{flag}: stop < start in {token!r}")
    count = int((stop - start) / step + RANGE_TOL / step) + 1
    values = [round(start + k * step, 12) for k in range(count)]
    if abs(values[-1] - stop) <= RANGE_TOL:
        values[-1] = stop
    return values


def parse_values(text, flag="value"):
    """Comma-separated numbers, any of which may be a ``start:stop:step`` range."""
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise UsageError(f"{flag}: empty entry in {text!r}")
        out.extend(parse_range(token, flag) if ":" in token else [_number(token, flag)])
    return out


def parse_levels(text):
    """``alpha:beta,alpha:beta,...``"""
    out = []
    for token in text.split(","):
        parts = token.strip().split(":")
        if len(parts) != 2:
            raise UsageError(f"--levels: entry {token!r} must be alpha:beta")
        a, b = (_number(p, "--levels") for p in parts)
        out.append(_levels(a, b, f"--levels entry {token!r}"))
    return out


def _levels(a, b, where):
    try:
        return Levels(a, b)
    except SysCovarError as exc:
        raise UsageError(f"{where}: {exc}") from None


# ---------------------------------------------------------------------------
# argument definitions
# ---------------------------------------------------------------------------

def _add_model_args(p):
    p.add_argument("--family", required=True, choices=sorted(FAMILIES))
    p.add_argument("--rho", help="correlation (gaussian, t3): value, list or start:stop:step")
    p.add_argument("--theta", help="Gumbel parameter (gumbel_t3): value, list or start:stop:step")
    p.add_argument("--nu", type=float, default=3.0, help="degrees of freedom for t margins/copula")
    p.add_argument("--mu-x", type=float, default=0.0)
    p.add_argument("--sigma-x", type=float, default=1.0)
    p.add_argument("--mu-y", type=float, default=0.0)
    p.add_argument("--sigma-y", type=float, default=1.0)


def _add_level_args(p, many=False):
    p.add_argument("--alpha", help="stress level of X" + (" (list/range allowed)" if many else ""))
    p.add_argument("--beta", help="level for Y; defaults to alpha" + (" (list/range allowed)" if many else ""))
    if many:
        p.add_argument("--levels", help="explicit alpha:beta pairs, comma separated")


def _add_output_args(p, default_format):
    p.add_argument("-o", "--output", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=default_format)


def build_parser():
    parser = _Parser(prog="syscovar", description="Systemic risk measures: CoVaR, CoES, MES and backtests.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="evaluate measures for one model")
    _add_model_args(p)
    _add_level_args(p)
    p.add_argument("--measure", required=True, help=f"comma list from: {', '.join(sorted(MEASURES))}")
    _add_output_args(p, "json")

    p = sub.add_parser("sweep", help="evaluate measures along a parameter grid")
    _add_model_args(p)
    _add_level_args(p, many=True)
    p.add_argument("--measure", required=True, help="comma list of measure names")
    _add_output_args(p, "csv")

    p = sub.add_parser("backtest", help="Monte Carlo violation rates")
    _add_model_args(p)
    _add_level_args(p, many=True)
    p.add_argument("--variant", default="eq,geq", help="eq, geq or both (comma separated)")
    p.add_argument("--n", type=int, default=DEFAULT_N, help=f"draws per parameter (default {DEFAULT_N})")
    p.add_argument("--full", action="store_true", help=f"use n = {FULL_N}")
    p.add_argument("--seed", type=int, default=42)
    _add_output_args(p, "csv")

    p = sub.add_parser("cloud", help="export a sample with its threshold lines")
    _add_model_args(p)
    _add_level_args(p)
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("-o", "--output", help="output path (default: stdout)")

    p = sub.add_parser("verify", help="run the built-in consistency checks")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--n", type=int, default=200_000)
    _add_output_args(p, "csv")
    return parser


# ---------------------------------------------------------------------------
# command handlers
# ---------------------------------------------------------------------------

def _model_kwargs(args):
    return dict(nu=args.nu, mu_x=args.mu_x, sigma_x=args.sigma_x, mu_y=args.mu_y, sigma_y=args.sigma_y)


def _params(args, single=False):
    name = family_parameter_name(args.family)
    other = "theta" if name == "rho" else "rho"
    if getattr(args, other) is not None:
        raise UsageError(f"--{other} does not apply to family {args.family!r}; use --{name}")
    raw = getattr(args, name)
    if raw is None:
        raise UsageError(f"family {args.family!r} needs --{name}")
    values = parse_values(raw, f"--{name}")
    if single and len(values) != 1:
        raise UsageError(f"--{name}: expected a single value, got {raw!r}")
    # validate every parameter before any work is done
    for v in values:
        try:
            model_for(args.family, v, **_model_kwargs(args))
        except SysCovarError as exc:
            raise UsageError(f"--{name} {v!r}: {exc}") from None
    return name, values


def _level_list(args, many):
    if many and args.levels is not None:
        if args.alpha is not None or args.beta is not None:
            raise UsageError("--levels cannot be combined with --alpha/--beta")
        return parse_levels(args.levels)
    if args.alpha is None:
        raise UsageError("--alpha is required" + (" (or --levels)" if many else ""))
    alphas = parse_values(args.alpha, "--alpha") if many else [_number(args.alpha, "--alpha")]
    if args.beta is None:
        return [_levels(a, a, "--alpha") for a in alphas]
    betas = parse_values(args.beta, "--beta") if many else [_number(args.beta, "--beta")]
    return [_levels(a, b, "--alpha/--beta") for a in alphas for b in betas]


def _measure_names(text):
    names = [t.strip() for t in text.split(",")]
    for n in names:
        if n not in MEASURES:
            raise UsageError(f"--measure: unknown measure {n!r}; choose from {', '.join(sorted(MEASURES))}")
    return names


def _meta(args, argv):
    meta = {"tool": f"syscovar {__version__}", "rng": RNG_ALGORITHM}
    if hasattr(args, "seed"):
        meta["seed"] = args.seed
    meta["command"] = " ".join(_without_output(argv))
    return meta


def _without_output(argv):
    # where the file goes is not part of the configuration
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
        elif tok in ("-o", "--output"):
            skip = True
        elif not tok.startswith("--output="):
            out.append(tok)
    return out


def _write(rows, columns, args, meta, float_format=None):
    if args.format == "json":
        # a JSON document on stdout stays parseable; files carry the header
        write_json(rows, columns, args.output, meta if args.output else None, float_format)
    else:
        write_csv(rows, columns, args.output, meta, float_format)


def _evaluate_rows(args, param_name, params, levels, names):
    rows = []
    for p in params:
        m = model_for(args.family, p, **_model_kwargs(args))
        for L in levels:
            row = {"family": args.family, param_name: p, "alpha": L.alpha, "beta": L.beta}
            for n in names:
                row[n] = evaluate(n, m, L)
            rows.append(row)
    return rows


def cmd_measure(args, argv):
    name, params = _params(args, single=True)
    levels = _level_list(args, many=False)
    names = _measure_names(args.measure)
    rows = _evaluate_rows(args, name, params, levels, names)
    _write(rows, ["family", name, "alpha", "beta", *names], args, _meta(args, argv))


def cmd_sweep(args, argv):
    name, params = _params(args)
    levels = _level_list(args, many=True)
    names = _measure_names(args.measure)
    rows = _evaluate_rows(args, name, params, levels, names)
    _write(rows, ["family", name, "alpha", "beta", *names], args, _meta(args, argv))


def cmd_backtest(args, argv):
    _, params = _params(args)
    levels = _level_list(args, many=True)
    variants = tuple(v.strip() for v in args.variant.split(","))
    for v in variants:
        if v not in VARIANTS:
            raise UsageError(f"--variant: unknown variant {v!r}; choose eq or geq")
    n = FULL_N if args.full else args.n
    if n < 1:
        raise UsageError(f"--n must be >= 1, got {n}")
    reports = run_table(args.family, params, levels, n, args.seed, variants=variants, **_model_kwargs(args))
    _write([r.record() for r in reports], BacktestReport.COLUMNS, args, _meta(args, argv), SHORT)


def cmd_cloud(args, argv):
    _, params = _params(args, single=True)
    (L,) = _level_list(args, many=False)
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    m = model_for(args.family, params[0], **_model_kwargs(args))
    sample_cloud_export(m, args.n, L, args.seed, args.output, _meta(args, argv))


def cmd_verify(args, argv):
    from .verify import run_checks

    checks = run_checks(seed=args.seed, n=args.n)
    rows = [{"check": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    _write(rows, ["check", "passed", "detail"], args, _meta(args, argv))
    return EXIT_OK if all(c.passed for c in checks) else EXIT_INPUT


COMMANDS = {
    "measure": cmd_measure,
    "sweep": cmd_sweep,
    "backtest": cmd_backtest,
    "cloud": cmd_cloud,
    "verify": cmd_verify,
}


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, argv) or EXIT_OK
    except ConvergenceError as exc:
        print(f"syscovar: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SysCovarError as exc:
        print(f"syscovar: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
