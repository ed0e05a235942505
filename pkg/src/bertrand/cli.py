"""Command-line interface.

Every subcommand writes CSV (17 significant digits) or JSON rows to stdout
or ``--output``. Exit status: 0 on success, 2 on usage or domain errors,
3 when a numerical procedure fails to reach its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import re
import sys

import numpy as np
from scipy.interpolate import CubicSpline

from .apsidal import apsidal_angle, apsidal_sweep, auto_energies
from .errors import DomainError, NumericalFailure
from .fractional import EnergyFunction, invert_period
from .isochrony import (
    bertrand_scan,
    isochrony_constraints,
    local_exponent,
    perturbative_coefficients,
    reconstruct_potential,
)
from .orbit import TRACE_COLUMNS, classify_orbit, integrate_binet, integrate_radial
from .potentials import RadialProblem, parse_potential
from .turning import turning_arrays

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_ANGLE = re.compile(rf"^(?P<a>{_NUM})?\*?pi(?:/(?P<b>{_NUM}))?$")


class UsageError(Exception):
    """Bad command-line value; the message names the offending flag."""


def format_float(v) -> str:
    return "%.17g" % v


def parse_angle(text: str) -> float:
    """A float, or a multiple of pi such as ``4pi``, ``pi/2``, ``0.5*pi``."""
    s = text.strip().lower().replace(" ", "")
    match = _ANGLE.match(s)
    if match:
        a = float(match["a"]) if match["a"] else 1.0
        b = float(match["b"]) if match["b"] else 1.0
        return a * math.pi / b
    return float(s)


def parse_grid(text: str, allow_auto: bool = False):
    """``min:max:step`` (inclusive, rounded to 12 decimals), a comma list,
    or ``auto:N`` where allowed. ``auto`` returns ``("auto", N)``."""
    s = text.strip()
    if s.startswith("auto:"):
        if not allow_auto:
            raise ValueError("auto grids are only accepted for energies")
        n = int(s[5:])
        if n < 1:
            raise ValueError("auto:N needs N >= 1")
        return ("auto", n)
    if ":" in s:
        parts = s.split(":")
        if len(parts) != 3:
            raise ValueError("range grids are min:max:step")
        lo, hi, step = map(float, parts)
        if not step > 0 or hi < lo:
            raise ValueError("range grid needs step > 0 and max >= min")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        values = np.round(lo + step * np.arange(count), 12)
    else:
        values = np.array([float(v) for v in s.split(",") if v.strip()])
    if values.size == 0:
        raise ValueError("grid is empty")
    return [float(v) for v in values]


def _flag(parser_fn, flag):
    def parse(text):
        try:
            return parser_fn(text)
        except ValueError as exc:
            raise UsageError(f"{flag}: {exc}") from exc

    return parse


def _problem(args, L=None):
    spec = _flag(parse_potential, "--potential")(args.potential)
    if args.k is not None:
        spec = dataclasses.replace(spec, k=args.k)
    return RadialProblem(spec, args.m, args.L if L is None else L)


def _energies(grid, problem):
    if isinstance(grid, tuple):
        return auto_energies(problem, grid[1])
    return np.asarray(grid, dtype=float)


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v) if math.isfinite(v) else None
    return v


def _emit(args, columns, rows, comments=()):
    buf = io.StringIO()
    if args.format == "json":
        data = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        buf.write(json.dumps(data, indent=1))
        buf.write("\n")
    else:
        for line in comments:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    text = buf.getvalue()
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_apsidal(args):
    L_values = args.L_grid or [args.L]
    base = _problem(args, L_values[0])
    grid = args.E
    rows = apsidal_sweep(base, lambda prob: _energies(grid, prob), L_values, args.tol)
    _emit(args, ("L", "E", "phi", "err_est", "status"), [dataclasses.astuple(r) for r in rows])


def cmd_orbit(args):
    problem = _problem(args)
    closure = classify_orbit(problem, args.E, args.q_max, args.closure_tol)
    integrate = integrate_binet if args.formulation == "binet" else integrate_radial
    trace = integrate(problem, args.E, args.span, args.tol, n_samples=args.samples)
    comments = (
        f"formulation: {trace.formulation}",
        f"closure: {closure}",
        f"energy_drift: {format_float(trace.energy_drift)}",
    )
    if args.format == "json":
        print(f"closure: {closure}", file=sys.stderr)
    _emit(args, TRACE_COLUMNS, list(trace.rows()), comments)


def cmd_invert(args):
    problem = _problem(args)
    energies = _energies(args.E, problem)
    if args.phi_const is not None:
        law = args.phi_const
    else:
        def phi_of_offset(offset):
            return np.array([apsidal_angle(problem, problem.V_R + float(w), args.tol).phi for w in np.ravel(offset)])

        law = EnergyFunction(phi_of_offset, problem.V_R, relative=True)
    rows = []
    for E in energies:
        width = invert_period(law, problem, float(E), args.tol)
        x_lt, x_gt = turning_arrays(problem, float(E) - problem.V_R)
        rows.append((float(E), width, float(x_gt - x_lt)))
    _emit(args, ("E", "delta_x", "turning_width"), rows)


def cmd_scan(args):
    result = bertrand_scan(args.family, args.nu, accept=args.accept, reject=args.reject)
    for root in result.roots:
        print(f"root: {format_float(root)}", file=sys.stderr)
    if not result.consistent:
        print("warning: residual verdicts disagree with the closed-form roots", file=sys.stderr)
    rows = [
        (r.family, r.nu, r.transcendental_value, r.residual_sup, r.constraint_violation, r.verdict)
        for r in result.reports
    ]
    _emit(args, ("family", "nu", "transcendental", "residual_sup", "fourth_order_violation", "verdict"), rows)


def cmd_perturb(args):
    problem = _problem(args)
    a1, a2, a3 = perturbative_coefficients(problem, 3)
    cons = isochrony_constraints(problem)
    _emit(
        args,
        ("x0", "V_R", "a1", "a2", "a3", "gamma_check", "a1_free", "fourth_order_violation"),
        [(problem.x0, problem.V_R, a1, a2, a3, cons.gamma_check, cons.a1_free, cons.fourth_order_violation)],
    )


def _law_from_csv(path):
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 4:
        raise UsageError("--phi-csv: expected at least 4 rows of rho,phi_c")
    rho, phi = data[:, 0], data[:, 1]
    spline = CubicSpline(rho, phi)

    def law(r):
        r = np.asarray(r, dtype=float)
        if np.any(r < rho[0]) or np.any(r > rho[-1]):
            raise DomainError("reconstruction grid leaves the tabulated Phi_C range")
        return spline(r)

    return law


def cmd_reconstruct(args):
    if args.phi_const is not None:
        value = args.phi_const

        def law(r):
            return np.full(np.shape(r), value)
    else:
        law = _law_from_csv(args.phi_csv)
    r = np.asarray(args.r, dtype=float)
    rec = reconstruct_potential(law, r, args.tol)
    expo = local_exponent(rec.r, rec.dU)
    _emit(args, ("r", "U", "dU", "local_exponent"), list(zip(rec.r, rec.U, rec.dU, expo)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bertrand",
        description="Apsidal angles, Abel inversion and isochrony scans for central potentials.",
        epilog=(
            "Potentials: powerlaw:+,nu=<f>,k=<f> | powerlaw:-,nu=<f>,k=<f> | log:k=<f> "
            "(optional b=<f> additive constant). Grids: min:max:step, a,b,c, or auto:N "
            "for energies. Exit status: 0 ok, 2 usage/domain error, 3 numerical failure."
        ),
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--potential", default="powerlaw:-,nu=1,k=1", help="potential spec (default Kepler)")
    common.add_argument("--m", type=float, default=1.0, help="mass")
    common.add_argument("--k", type=float, default=None, help="override the coupling k of --potential")
    common.add_argument("--tol", type=_flag(float, "--tol"), default=1e-10, help="absolute tolerance")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", default=None, help="output file (default stdout)")
    single_L = argparse.ArgumentParser(add_help=False)
    single_L.add_argument("--L", type=float, default=1.0, help="angular momentum")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apsidal", parents=[common], help="apsidal angle over an E x L grid")
    p.add_argument("--L", dest="L_grid", type=_flag(parse_grid, "--L"), default=None, help="L grid")
    p.add_argument("--E", type=_flag(lambda s: parse_grid(s, True), "--E"), default=("auto", 20), help="E grid")
    p.set_defaults(func=cmd_apsidal, L=1.0)

    p = sub.add_parser("orbit", parents=[common, single_L], help="integrate one orbit and classify it")
    p.add_argument("--E", type=_flag(float, "--E"), required=True, help="energy")
    p.add_argument("--span", type=_flag(parse_angle, "--span"), default=2 * math.pi,
                   help="angle (binet) or time (radial) span, e.g. 4pi")
    p.add_argument("--formulation", choices=("binet", "radial"), default="binet")
    p.add_argument("--samples", type=int, default=201, help="evenly spaced output samples")
    p.add_argument("--q-max", type=int, default=20, help="largest closure denominator")
    p.add_argument("--closure-tol", type=float, default=1e-6, help="closure tolerance on phi/pi")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("invert", parents=[common, single_L], help="well width from a period law")
    p.add_argument("--E", type=_flag(lambda s: parse_grid(s, True), "--E"), required=True, help="E grid")
    law = p.add_mutually_exclusive_group(required=True)
    law.add_argument("--phi-const", type=_flag(parse_angle, "--phi-const"), help="constant apsidal angle")
    law.add_argument("--from-potential", action="store_true", help="use the apsidal angle of --potential")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("scan-bertrand", parents=[common], help="isochrony scan of a power-law family")
    p.add_argument("--family", choices=("attractive", "positive"), required=True)
    p.add_argument("--nu", type=_flag(parse_grid, "--nu"), required=True, help="exponent grid")
    p.add_argument("--accept", type=float, default=1e-10, help="isochronous if residual <= accept*|V_R|")
    p.add_argument("--reject", type=float, default=1e-3, help="not isochronous if residual >= reject*|V_R|")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("perturb", parents=[common, single_L], help="perturbative coefficients and constraints")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("reconstruct", parents=[common], help="U(r) from a circular apsidal law")
    law = p.add_mutually_exclusive_group(required=True)
    law.add_argument("--phi-const", type=_flag(parse_angle, "--phi-const"), help="constant Phi_C")
    law.add_argument("--phi-csv", help="CSV of rho,phi_c samples")
    p.add_argument("--r", type=_flag(parse_grid, "--r"), default=parse_grid("0.5:2:0.01"), help="radius grid")
    p.set_defaults(func=cmd_reconstruct)
    return parser


_VALUE_FLAGS = {"--E", "--L", "--nu", "--r", "--span", "--phi-const", "--k", "--m", "--tol"}
_NEGATIVE = re.compile(r"^-[\d.]")


def _attach_negative_values(argv):
    # argparse reads "-0.4,-0.2" as an option; glue it to its flag
    out = []
    it = iter(argv)
    for tok in it:
        if tok in _VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and _NEGATIVE.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
        else:
            out.append(tok)
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = _attach_negative_values(sys.argv[1:] if argv is None else list(argv))
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"bertrand: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if not args.tol > 0:
        print("bertrand: error: --tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        args.func(args)
    except UsageError as exc:
        print(f"bertrand: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"bertrand: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DomainError, ValueError, OSError) as exc:
        print(f"bertrand: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
