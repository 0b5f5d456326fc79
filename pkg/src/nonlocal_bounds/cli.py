"""Command-line entry point: ``nonlocal-bounds <command> [flags]``.

Exit codes: 0 success, 1 a fixture failed, 2 usage error, 3 input/output or
parse error.  Results go to standard output unless ``--out`` names a file,
which is then written atomically.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import bounds, core, distance, extremal, protocol, search
from .errors import NonlocalBoundsError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
COMMANDS = ("verify-paper", "dtilde", "bounds", "tilted-sweep", "mixing", "search", "protocol")


class InputError(Exception):
    """Unreadable or malformed input file."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = 0
    analytic_tol: float = bounds.ANALYTIC_TOL
    optimizer_tol: float = bounds.OPTIMIZER_TOL
    out: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not (self.analytic_tol > 0 and self.optimizer_tol > 0):
            raise ValueError("tolerances must be positive")


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}")
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"need finite numbers: {text!r}")
    return vals


def _pair(text: str) -> tuple[float, float]:
    vals = _float_list(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"need exactly two numbers: {text!r}")
    return vals[0], vals[1]


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _load_realization(path: str):
    obj = _read_json(path)
    try:
        return core.realization_from_json(obj)
    except (KeyError, TypeError, ValueError, NonlocalBoundsError) as exc:
        raise InputError(f"{path} does not describe a realization: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        search.atomic_write_text(out, text)
    except OSError as exc:
        raise InputError(f"cannot write {out}: {exc}") from exc


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# fixture verification


@dataclass(frozen=True)
class FixtureCheck:
    name: str
    value: float
    expected: float
    tol: float

    @property
    def error(self) -> float:
        return abs(self.value - self.expected)

    @property
    def passed(self) -> bool:
        return self.error <= self.tol


def fixture_checks(analytic_tol: float, optimizer_tol: float) -> list[FixtureCheck]:
    checks = []
    r2 = 2 * math.sqrt(2)
    res = search.maximize_violation(search.CHSH)
    checks.append(FixtureCheck("CHSH optimum 2*sqrt(2)", res.quantum_value, r2, optimizer_tol))

    theta = math.acos(math.sqrt(2 / 3))
    reduced = 2 * math.sqrt(17 / 9)
    res = search.maximize_violation(search.CHSH, fixed={"theta": theta, "a0": math.pi / 2, "a1": 0.0})
    r = res.best_realization
    _, corr = core.evaluate_behavior(r)
    rep = bounds.tsirelson_bound(corr, distance.distance_profile(r, "bob"))
    checks.append(FixtureCheck("reduced CHSH optimum 2*sqrt(17/9)", res.quantum_value, reduced, optimizer_tol))
    checks.append(FixtureCheck("Tsirelson-type rhs 2*sqrt(17/9)", rep.rhs, reduced, optimizer_tol))

    r = extremal.biased_boundary_realization()
    _, corr = core.evaluate_behavior(r)
    want = extremal.biased_boundary_correlators()
    for x in range(2):
        checks.append(FixtureCheck(f"<A_{x}>", corr.mA[x], want.mA[x], analytic_tol))
        checks.append(FixtureCheck(f"<B_{x}>", corr.mB[x], want.mB[x], analytic_tol))
        for y in range(2):
            checks.append(FixtureCheck(f"C_{x}{y}", corr.C[x][y], want.C[x][y], analytic_tol))
    prof = distance.distance_profile(r, "bob")
    checks.append(FixtureCheck("D~_0", prof.dtilde[0], 1.0, analytic_tol))
    checks.append(FixtureCheck("D~_1", prof.dtilde[1], math.sqrt(8) / 3, analytic_tol))
    ic = bounds.ic_type_check(corr, prof)
    checks.append(FixtureCheck("E_0^2 + E_1^2 = 17/18", ic.lhs, 17 / 18, analytic_tol))
    checks.append(FixtureCheck("(D~_0^2 + D~_1^2)/2 = 17/18", ic.rhs, 17 / 18, analytic_tol))

    worst = 0.0
    for alpha in np.linspace(0.1, 2.0, 20):
        for th in np.linspace(math.pi / 80, math.pi / 4, 20):
            rt, _, _ = extremal.tilted_family(float(alpha), float(th))
            _, c = core.evaluate_behavior(rt)
            m = bounds.extended_landau_margin(c, distance.distance_profile(rt, "bob")).margin
            worst = max(worst, abs(m))
    checks.append(FixtureCheck("tilted family: max |Landau margin| on 20x20 grid", worst, 0.0, analytic_tol))

    verdict = extremal.saturation_verdict(r, "bob")
    cb, sb = math.cos(r.bob[0]), math.sin(r.bob[0])
    checks.append(FixtureCheck("saturation product (Bob side)", verdict.product_value, -(cb * sb) ** 2, analytic_tol))
    checks.append(FixtureCheck("saturation satisfied (Bob side)", float(verdict.satisfied), 1.0, 0.0))
    return checks


def cmd_verify_fixtures(args) -> int:
    checks = fixture_checks(args.tol, args.optimizer_tol)
    buf = io.StringIO()
    w = max(len(c.name) for c in checks)
    buf.write(f"{'fixture':<{w}}  {'value':>22}  {'expected':>22}  {'error':>9}  {'tol':>7}  result\n")
    for c in checks:
        buf.write(
            f"{c.name:<{w}}  {c.value:>22.16g}  {c.expected:>22.16g}  {c.error:>9.2e}  {c.tol:>7.0e}  "
            f"{'PASS' if c.passed else 'FAIL'}\n"
        )
    failed = [c for c in checks if not c.passed]
    buf.write(f"{len(checks) - len(failed)}/{len(checks)} fixtures passed\n")
    _emit(buf.getvalue(), args.out)
    if failed:
        print(f"first failing fixture: {failed[0].name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# dtilde, bounds


def _decode_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    return arr.astype(complex)


def cmd_dtilde(args) -> int:
    if args.pair:
        obj = _read_json(args.pair)
        try:
            rho, sigma = _decode_matrix(obj["rho"]), _decode_matrix(obj["sigma"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{args.pair}: expected keys 'rho' and 'sigma': {exc}") from exc
        if args.renormalize:
            rho, sigma = distance.renormalize(rho, sigma)
        out = {"dbar": distance.dbar(rho, sigma), "dtilde": distance.dtilde_closed_form(rho, sigma)}
        if args.eps is not None:
            out["dtilde_eps"] = distance.dtilde_eps(rho, sigma, args.eps[0])
        if args.oracle:
            out["dtilde_oracle"] = distance.dtilde_maximize(rho, sigma, seed=args.seed)[0]
    else:
        r = _load_realization(args.realization) if args.realization else extremal.biased_boundary_realization()
        out = distance.distance_profile(r, args.side, args.eps).to_json()
        if args.oracle:
            out["dtilde_oracle"] = [
                distance.dtilde_maximize(*distance.conditional_pair(r, args.side, x), seed=args.seed)[0] for x in range(2)
            ]
    _emit(_dumps(out), args.out)
    return EXIT_OK


def cmd_bounds(args) -> int:
    r = _load_realization(args.realization) if args.realization else extremal.biased_boundary_realization()
    _, corr = core.evaluate_behavior(r)
    prof = distance.distance_profile(r, args.side)
    w = bounds.WeightSet(t=args.t, s=args.s)
    reports = bounds.all_reports(corr, prof, w, args.eps, args.tol)
    _emit(_dumps([rep.to_json() for rep in reports]), args.out)
    return EXIT_OK


def cmd_tilted_sweep(args) -> int:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["alpha", "theta", "lhs", "rhs", "margin", "saturated"])
    failed = False
    for alpha in np.linspace(args.alpha_min, args.alpha_max, args.n_alpha):
        for th in np.linspace(math.pi / 4 / args.n_theta, math.pi / 4, args.n_theta):
            rt, _, _ = extremal.tilted_family(float(alpha), float(th))
            _, c = core.evaluate_behavior(rt)
            rep = bounds.extended_landau_margin(c, distance.distance_profile(rt, "bob"), args.tol)
            failed |= not rep.saturated
            wr.writerow([repr(float(alpha)), repr(float(th)), repr(rep.lhs), repr(rep.rhs), repr(rep.margin), rep.saturated])
    _emit(buf.getvalue(), args.out)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_mixing(args) -> int:
    lams = args.lambdas
    if any(not 0 <= v <= 1 for v in lams):
        raise argparse.ArgumentTypeError("lambdas must lie in [0, 1]")
    r = _load_realization(args.realization) if args.realization else extremal.chsh_optimal_realization()
    _emit(extremal.mixing_csv(extremal.mixing_experiment(r, lams)), args.out)
    return EXIT_OK


def cmd_search(args) -> int:
    summary, records = search.conjecture_batch(args.n, args.seed, args.out, args.restarts, args.workers)
    if args.out is None:
        for rec in records:
            sys.stdout.write(json.dumps(rec, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_protocol(args) -> int:
    if args.realization:
        r = _load_realization(args.realization)
    elif args.theta is not None:
        if args.angles is None:
            raise argparse.ArgumentTypeError("--theta needs --angles a0,a1,b0,b1")
        a = args.angles
        r = core.TwoQubitRealization(args.theta, (a[0], a[1]), (a[2], a[3]))
    else:
        r = extremal.biased_boundary_realization()
    box = protocol.box_model(r)
    _emit(protocol.protocol_csv(protocol.protocol_sweep(box, args.n_max)), args.out)
    return EXIT_OK


def _angles(text: str) -> list[float]:
    vals = _float_list(text)
    if len(vals) != 4:
        raise argparse.ArgumentTypeError("need four angles a0,a1,b0,b1")
    return vals


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-bounds", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=_positive, default=bounds.ANALYTIC_TOL, help="analytic tolerance")
    common.add_argument("--optimizer-tol", type=_positive, default=bounds.OPTIMIZER_TOL)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (default: standard output)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("verify-paper", parents=[common], help="run the built-in fixture table")
    sp.set_defaults(func=cmd_verify_fixtures)

    sp = sub.add_parser("dtilde", parents=[common], help="D-bar / D-tilde of a realization or a state pair")
    src = sp.add_mutually_exclusive_group()
    src.add_argument("--realization", help="realization JSON file")
    src.add_argument("--pair", help="JSON file with 'rho' and 'sigma' matrices")
    sp.add_argument("--side", choices=("bob", "alice"), default="bob")
    sp.add_argument("--eps", type=_pair, default=None, help="tilt e0,e1")
    sp.add_argument("--oracle", action="store_true", help="also run the numerical maximization")
    sp.add_argument("--renormalize", action="store_true")
    sp.set_defaults(func=cmd_dtilde)

    sp = sub.add_parser("bounds", parents=[common], help="all inequality reports for a realization")
    sp.add_argument("--realization", help="realization JSON file")
    sp.add_argument("--side", choices=("bob", "alice"), default="bob")
    sp.add_argument("--t", type=_pair, default=(1.0, 1.0))
    sp.add_argument("--s", type=_pair, default=(1.0, 1.0))
    sp.add_argument("--eps", type=_pair, default=None, help="also report the tilted bound")
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("tilted-sweep", parents=[common], help="Landau margins over the tilted family")
    sp.add_argument("--n-alpha", type=_positive_int, default=20)
    sp.add_argument("--n-theta", type=_positive_int, default=20)
    sp.add_argument("--alpha-min", type=_positive, default=0.1)
    sp.add_argument("--alpha-max", type=_positive, default=2.0)
    sp.set_defaults(func=cmd_tilted_sweep)

    sp = sub.add_parser("mixing", parents=[common], help="D-tilde of noisy mixtures")
    sp.add_argument("--lambdas", type=_float_list, default=[0.0, 0.25, 0.5, 0.75, 1.0])
    sp.add_argument("--realization", help="realization JSON file (default: CHSH-optimal)")
    sp.set_defaults(func=cmd_mixing)

    sp = sub.add_parser("search", parents=[common], help="random-functional saturation experiment")
    sp.add_argument("--n", type=_positive_int, default=10)
    sp.add_argument("--restarts", type=int, default=64)
    sp.add_argument("--workers", type=_positive_int, default=None)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("protocol", parents=[common], help="parity protocol sweep")
    sp.add_argument("--realization", help="realization JSON file")
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument("--angles", type=_angles, default=None, help="a0,a1,b0,b1")
    sp.add_argument("--n-max", type=_positive_int, default=10)
    sp.set_defaults(func=cmd_protocol)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    RunConfig(args.command, args.seed, args.tol, args.optimizer_tol, args.out)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NonlocalBoundsError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
