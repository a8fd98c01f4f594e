"""Command-line entry point.

Exit codes: 0 success, 1 usage or configuration error, 2 inequality
violation, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ..bounds import DomainError, XiProvider, bound_report
from ..lattice import PAULI, Subsystem, geometry_constants
from ..operators import assemble, variance
from ..thermometry import RankDeficientError, canonical_qfi, cramer_rao_precision, global_state, local_qfi
from .config import ConfigError, load_config, load_model, parse_subsystem
from .fit import XiFitRejected, fit_xi_empirical
from .sweep import RunRecord, run_sweep, write_atomic
from .verify import verify_suite

EXIT_OK, EXIT_USAGE, EXIT_VIOLATION, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _xi_arg(text):
    if text in ("ising", "fit"):
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'ising', 'fit' or a positive number") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("xi must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="localqfi", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def point_args(p):
        p.add_argument("--model", required=True, help="model specification file (JSON)")
        p.add_argument("--beta", type=float, required=True, help="inverse temperature")
        p.add_argument("--subsystem", default=None, help="site positions, 'i..j' or 'i,j,k' (default: all)")

    def output_args(p, default="json"):
        p.add_argument("--out", default=None, help="write to this path instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=default)

    p = sub.add_parser("qfi", help="local thermal susceptibility at one point")
    point_args(p)
    output_args(p)

    p = sub.add_parser("bound", help="all bounds at one point")
    point_args(p)
    p.add_argument("--R", type=int, default=None, help="layer width (default: optimize)")
    p.add_argument("--R-max", dest="R_max", type=int, default=None)
    p.add_argument("--xi", type=_xi_arg, default="ising")
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--tolerance", type=float, default=1e-9)
    output_args(p)

    p = sub.add_parser("sweep", help="config-driven sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--xi", type=_xi_arg, default=None)
    p.add_argument("--R-max", dest="R_max", type=int, default=None)
    output_args(p, default="csv")

    p = sub.add_parser("verify", help="assert every inequality on a config")
    p.add_argument("--config", required=True)
    p.add_argument("--xi", type=_xi_arg, default=None)
    p.add_argument("--R-max", dest="R_max", type=int, default=None)
    p.add_argument("--tolerance", type=float, default=None)
    output_args(p)

    p = sub.add_parser("fit-xi", help="fit the correlation length from exact correlators")
    p.add_argument("--model", required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--observable", choices=("x", "y", "z"), default="z")
    p.add_argument("--max-distance", type=int, default=None)
    output_args(p)
    return parser


def _emit(text: str, out):
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=str) + "\n"


def _subsystem(model, text):
    if text is None:
        return model.sites
    positions = parse_subsystem(text)
    try:
        return tuple(model.sites[i] for i in positions)
    except IndexError:
        raise ConfigError(f"subsystem {text!r} outside 0..{model.n_sites - 1}") from None


def _provider(choice, model, g, beta, omega):
    if choice == "ising":
        return XiProvider.ising(g.J)
    if choice == "fit":
        return XiProvider.empirical(lambda b: fit_xi_empirical(model, b, omega=omega if b == beta else None))
    return XiProvider.constant(choice)


def cmd_qfi(args) -> int:
    model = load_model(args.model)
    A = _subsystem(model, args.subsystem)
    omega = global_state(model, args.beta)
    F = local_qfi(model, A, args.beta, omega)
    sub = Subsystem(model, A)
    row = {"beta": args.beta, "size_A": len(A), "F": F,
           "var_HA": variance(assemble(model, sub.interior, support=sub.sites), omega),
           "canonical_qfi": canonical_qfi(model, A, args.beta) if sub.interior else None,
           "precision": cramer_rao_precision(F)}
    if args.format == "json":
        _emit(_json(row), args.out)
    else:
        keys = list(row)
        _emit(",".join(keys) + "\n" + ",".join(repr(row[k]) for k in keys) + "\n", args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    model = load_model(args.model)
    A = _subsystem(model, args.subsystem)
    g = geometry_constants(model)
    omega = global_state(model, args.beta)
    provider = _provider(args.xi, model, g, args.beta, omega)
    report = bound_report(model, A, args.beta, provider, R=args.R, R_max=args.R_max, omega=omega,
                          constants=g, threshold=args.threshold, tol=args.tolerance)
    record = RunRecord(rows=[report])
    if args.format == "json":
        _emit(_json(record.to_json()["rows"][0]), args.out)
    else:
        _emit(record.to_csv(), args.out)
    if report.error_code:
        return EXIT_NUMERICAL
    return EXIT_OK if report.satisfied else EXIT_VIOLATION


def _apply_overrides(config, args):
    if getattr(args, "xi", None) is not None:
        config.xi = args.xi
    if getattr(args, "R_max", None) is not None:
        config.R_max = args.R_max
    return config


def cmd_sweep(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    record = run_sweep(config)
    if args.out or not (config.out_csv or config.out_json):
        text = record.to_csv() if args.format == "csv" else _json(record.to_json())
        _emit(text, args.out)
    if any(r.error_code == "numerical" for r in record.rows):
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_verify(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if args.tolerance is not None:
        config.tolerance = args.tolerance
    report = verify_suite(config)
    if args.format == "json":
        text = _json(report.to_dict())
    else:
        lines = ["name,beta,subsystem,R,lhs,rhs,margin,status"]
        for c in report.checks:
            lines.append(",".join([c.name, repr(c.beta), " ".join(map(str, c.subsystem)), str(c.R),
                                   repr(c.lhs), repr(c.rhs), repr(c.margin), c.status]))
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_fit_xi(args) -> int:
    model = load_model(args.model)
    xi = fit_xi_empirical(model, args.beta, observable=PAULI[args.observable], max_distance=args.max_distance)
    g = geometry_constants(model)
    try:
        closed = XiProvider.ising(g.J)(args.beta)
    except DomainError:
        closed = None
    row = {"beta": args.beta, "observable": args.observable, "xi_fit": xi, "xi_ising": closed}
    if args.format == "json":
        _emit(_json(row), args.out)
    else:
        _emit("beta,observable,xi_fit,xi_ising\n" + ",".join(map(str, row.values())) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"qfi": cmd_qfi, "bound": cmd_bound, "sweep": cmd_sweep, "verify": cmd_verify, "fit-xi": cmd_fit_xi}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, KeyError) as exc:
        print(f"localqfi: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except XiFitRejected as exc:
        print(f"localqfi: correlation-length fit rejected: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (RankDeficientError, np.linalg.LinAlgError, FloatingPointError, ValueError) as exc:
        print(f"localqfi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
