"""Command-line front end.

    renyi-gkl expand   --n 2 --x 0.3 --digits 10
    renyi-gkl evaluate --n 2 2 14 3
    renyi-gkl certify  --n 3 --format json
    renyi-gkl table    --n-list 2,3,4,5 --format csv
    renyi-gkl iterate  --n 3 --n-max 25
    renyi-gkl simulate --n 5 --mc --samples 1000000 --seed 42
    renyi-gkl verify   --n 2

Exit status: 0 success, 2 usage error, 3 numerical failure, 4 failed check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__
from .cf_core import DigitSequence, RenyiParams, evaluate, expand
from .checks import run_identity_suite
from .exceptions import InvalidDigitError, NumericalError
from .gk_lab import InitialMeasure, error_curve, run_experiment
from .wirsing import certify, round_bound

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_CHECK = 4

TABLE_N = (2, 3, 4, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 100, 1000, 10000)

COMMANDS = ("expand", "evaluate", "certify", "table", "iterate", "simulate", "verify")

# decimals shown for the displayed (directionally rounded) bounds
_BOUND_DECIMALS = 14


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    N: Optional[int]
    tolerance: float = 1e-12
    grid_degree: int = 64
    n_max: int = 25
    seed: int = 0
    output_format: str = "text"
    output_path: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.N is not None and self.N < 2:
            raise UsageError(f"--n must be >= 2, got {self.N}")
        if not self.tolerance > 0:
            raise UsageError(f"--tolerance must be positive, got {self.tolerance}")
        if self.grid_degree < 8:
            raise UsageError(f"--grid-degree must be >= 8, got {self.grid_degree}")


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", dest="N", type=int, help="parameter N >= 2")
    common.add_argument("--tolerance", type=float, default=1e-12)
    common.add_argument("--grid-degree", type=int, default=64)
    common.add_argument("--format", dest="output_format", choices=("text", "json", "csv"),
                        default="text")
    common.add_argument("--output", dest="output_path")
    common.add_argument("--seed", type=int, default=0)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog="renyi-gkl",
        description="Renyi-type continued fractions and Gauss-Kuzmin-Levy rate bounds.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("expand", parents=[common], help="digits of a point x")
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--digits", type=int, default=20)

    p = sub.add_parser("evaluate", parents=[common], help="value of a digit sequence")
    p.add_argument("digits", type=int, nargs="*")
    p.add_argument("--hits-one", action="store_true",
                   help="the expansion ends in an infinite digit (x = 1 when empty)")

    p = sub.add_parser("certify", parents=[common], help="rate bracket [v_N, w_N]")
    p.add_argument("--e", type=float, help="use this coefficient instead of solving for it")

    p = sub.add_parser("table", parents=[common], help="e_N, t_N, v_N, w_N for several N")
    p.add_argument("--n-list", default=",".join(map(str, TABLE_N)))

    for name, help_ in (("iterate", "sup-error curve of the density iteration"),
                        ("simulate", "full decay experiment")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--n-max", type=int, default=25)
        p.add_argument("--stationary", action="store_true",
                       help="start from the invariant measure instead of uniform")
        if name == "simulate":
            p.add_argument("--burn-in", type=int, default=5)
            p.add_argument("--mc", action="store_true", help="add the Monte Carlo comparison")
            p.add_argument("--samples", type=int, default=10**6)
            p.add_argument("--mc-steps", type=int, default=3)

    sub.add_parser("verify", parents=[common], help="operator identity checks")
    return parser


def _config(args) -> RunConfig:
    return RunConfig(command=args.command, N=args.N, tolerance=args.tolerance,
                     grid_degree=args.grid_degree, n_max=getattr(args, "n_max", 25),
                     seed=args.seed, output_format=args.output_format,
                     output_path=args.output_path)


def _need_n(config):
    if config.N is None:
        raise UsageError(f"{config.command} requires --n")
    return RenyiParams(config.N)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(rows, header):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[h]) if not isinstance(row[h], float)
                         else f"{row[h]:.15g}" for h in header])
    return buf.getvalue()


def _json(payload):
    return json.dumps(payload, indent=2, allow_nan=False) + "\n"


def _clean(obj):
    # JSON has no infinities or numpy scalars
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


# each command returns (payload, text, csv_rows, csv_header, ok)

def cmd_expand(config, x, n_digits):
    p = _need_n(config)
    if not (0.0 <= x <= 1.0) or not math.isfinite(x):
        raise UsageError(f"--x must lie in [0, 1], got {x}")
    seq = expand(p, x, n_digits)
    residual = abs(evaluate(p, seq) - x)
    payload = {"N": p.N, "x": x, "digits": list(seq.digits), "hits_one": seq.hits_one,
               "residual": residual}
    lines = [str(seq) if len(seq) or seq.hits_one else ""]
    if seq.hits_one:
        note = "first digit is infinite (x = 1)" if not seq.digits else \
            f"digit {len(seq.digits) + 1} is infinite (orbit reached 1)"
        lines.append(note)
    lines.append(f"residual: {residual:.3e}")
    rows = [{"position": k + 1, "digit": a} for k, a in enumerate(seq.digits)]
    if seq.hits_one:
        rows.append({"position": len(seq.digits) + 1, "digit": "inf"})
    return payload, "\n".join(lines) + "\n", rows, ["position", "digit"], True


def cmd_evaluate(config, digits, hits_one):
    p = _need_n(config)
    if not digits and not hits_one:
        raise UsageError("evaluate needs at least one digit or --hits-one")
    try:
        value = evaluate(p, DigitSequence(p, tuple(digits), hits_one))
    except InvalidDigitError as exc:
        raise UsageError(str(exc)) from exc
    payload = {"N": p.N, "digits": list(digits), "hits_one": hits_one, "value": value}
    return payload, f"{value!r}\n", [payload], ["N", "value"], True


def _cert_text(c):
    v = round_bound(c.v, _BOUND_DECIMALS, "down")
    w = round_bound(c.w, _BOUND_DECIMALS, "up")
    return (f"N        = {c.N}\n"
            f"e_N      = {c.e:.10f}\n"
            f"t_N      = {c.t:.10f}\n"
            f"min ratio (x=0, x=1) = {c.min_ratio!r}\n"
            f"max ratio m = {c.m!r} at x = {c.x_max!r}\n"
            f"v_N > {v:.{_BOUND_DECIMALS}f}\n"
            f"w_N < {w:.{_BOUND_DECIMALS}f}\n")


def cmd_certify(config, e=None):
    p = _need_n(config)
    c = certify(p.N, e=e)
    payload = c.to_dict()
    header = ["N", "e", "t", "min_ratio", "m", "x_max", "v", "w"]
    return payload, _cert_text(c), [payload], header, True


def cmd_table(config, n_list):
    try:
        Ns = [int(s) for s in n_list.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--n-list must be comma-separated integers: {n_list!r}") from exc
    if not Ns or min(Ns) < 2:
        raise UsageError("--n-list entries must be >= 2")
    rows, failures = [], []
    for N in Ns:
        try:
            c = certify(N)
            rows.append({"N": N, "e": c.e, "t": c.t, "v": c.v, "w": c.w})
        except NumericalError as exc:
            failures.append({"N": N, "error": str(exc)})
    text = io.StringIO()
    text.write(f"{'N':>6}  {'e_N':>18}  {'t_N':>10}  {'v_N':>20}  {'w_N':>20}\n")
    for r in rows:
        text.write(f"{r['N']:>6}  {r['e']:>18.10g}  {r['t']:>10.7f}  "
                   f"{r['v']:>20.15g}  {r['w']:>20.15g}\n")
    for f in failures:
        text.write(f"{f['N']:>6}  failed: {f['error']}\n")
    payload = {"rows": rows, "failures": failures}
    return payload, text.getvalue(), rows, ["N", "e", "t", "v", "w"], not failures


def _measure(p, stationary):
    return InitialMeasure.stationary(p) if stationary else InitialMeasure.uniform(p)


def cmd_iterate(config, stationary):
    p = _need_n(config)
    errs = error_curve(p, _measure(p, stationary), config.n_max, degree=config.grid_degree)
    rows = [{"n": n, "sup_error": float(e)} for n, e in enumerate(errs)]
    payload = {"N": p.N, "start": "stationary" if stationary else "uniform",
               "degree": config.grid_degree, "sup_errors": [float(e) for e in errs]}
    text = "".join(f"{r['n']:>4}  {r['sup_error']:.6e}\n" for r in rows)
    return payload, text, rows, ["n", "sup_error"], True


def cmd_simulate(config, stationary, burn_in, mc, samples, mc_steps):
    p = _need_n(config)
    if config.n_max < 5:
        raise UsageError("--n-max must be >= 5")
    report = run_experiment(p, _measure(p, stationary), n_max=config.n_max, burn_in=burn_in,
                            degree=config.grid_degree, mc=mc, mc_samples=samples,
                            mc_steps=mc_steps, seed=config.seed)
    payload = report.to_dict()
    c = report.certificate
    out = io.StringIO()
    out.write(f"N = {p.N}, start = {'stationary' if stationary else 'uniform'}, "
              f"degree = {config.grid_degree}, n_max = {config.n_max}\n")
    out.write(f"certified bracket: v = {c.v!r}, w = {c.w!r}\n")
    for n, e in enumerate(report.sup_errors):
        out.write(f"  n = {n:>3}  sup |F_n - G| = {e:.6e}\n")
    ok = True
    if report.rate_estimate is None:
        out.write(f"rate: {report.rate_note}\n")
        ok = stationary
    else:
        inside = report.rate_in_bracket
        ok &= inside
        out.write(f"rate estimate: {report.rate_estimate!r} "
                  f"(bracket [{report.bracket['low']:.6g}, {report.bracket['high']:.6g}]: "
                  f"{'inside' if inside else 'OUTSIDE'})\n")
    if report.bound_violations is None:
        out.write("two-sided bound: not applicable (f0' not positive)\n")
    else:
        ok &= report.bound_violations == 0
        out.write(f"two-sided bound violations: {report.bound_violations}\n")
    if report.mc_summary:
        s = report.mc_summary
        ok &= s["agree"]
        out.write(f"Monte Carlo (n = {s['steps']}, m = {s['samples']}, seed = {config.seed}):\n")
        for x, a, se, b in zip(s["x"], s["monte_carlo"], s["stderr"], s["density_iteration"]):
            out.write(f"  x = {x:.1f}  mc = {a:.6f} +- {se:.1e}  density = {b:.6f}\n")
        out.write(f"  max |z| = {s['max_z']:.2f} ({'agree' if s['agree'] else 'DISAGREE'})\n")
    rows = [{"n": n, "sup_error": float(e)} for n, e in enumerate(report.sup_errors)]
    return payload, out.getvalue(), rows, ["n", "sup_error"], bool(ok)


def cmd_verify(config):
    p = _need_n(config)
    results = run_identity_suite(p.N, config.tolerance, config.grid_degree)
    ok = all(r.passed for r in results)
    out = io.StringIO()
    for r in results:
        out.write(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: "
                  f"residual {r.residual:.3e} (threshold {r.threshold:.1e})\n")
    out.write(f"overall: {'PASS' if ok else 'FAIL'}\n")
    rows = [r.to_dict() for r in results]
    payload = {"N": p.N, "tolerance": config.tolerance, "checks": rows, "passed": ok}
    return payload, out.getvalue(), rows, ["name", "residual", "threshold", "passed"], ok


def _dispatch(args, config):
    c = config.command
    if c == "expand":
        return cmd_expand(config, args.x, args.digits)
    if c == "evaluate":
        return cmd_evaluate(config, args.digits, args.hits_one)
    if c == "certify":
        return cmd_certify(config, args.e)
    if c == "table":
        return cmd_table(config, args.n_list)
    if c == "iterate":
        return cmd_iterate(config, args.stationary)
    if c == "simulate":
        return cmd_simulate(config, args.stationary, args.burn_in, args.mc,
                            args.samples, args.mc_steps)
    return cmd_verify(config)


def render(config, payload, text, rows, header) -> str:
    if config.output_format == "json":
        return _json(_clean(payload))
    if config.output_format == "csv":
        return _csv(rows, header)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        config = _config(args)
        payload, text, rows, header, ok = _dispatch(args, config)
    except UsageError as exc:
        print(f"renyi-gkl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"renyi-gkl: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    rendered = render(config, payload, text, rows, header)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(rendered)
    else:
        sys.stdout.write(rendered)
    return EXIT_OK if ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
