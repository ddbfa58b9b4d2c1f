"""Command-line interface: ``phasefluct {point,sweep,verify,taylor-check}``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure (cutoff leakage or accuracy).
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigError, NumericalError, PhaseFluctError
from .processes import PROCESSES, ProcessSpec
from .sweep import (
    config_from_dict,
    load_config_dict,
    records_to_csv,
    run_point,
    run_sweep,
)
from .verify import taylor_check, verify

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _floats(values):
    out = []
    for v in values:
        for part in str(v).split(","):
            if part.strip():
                out.append(float(part))
    return out


def _ints(values):
    return [int(x) for x in _floats(values)]


def _add_point_flags(p, multi: bool):
    nargs = "+" if multi else None
    p.add_argument("--process", choices=PROCESSES)
    p.add_argument("--formalism", choices=("sg", "bp"))
    p.add_argument("--alpha-sq", nargs=nargs, help="|alpha|^2 value(s), comma separated")
    p.add_argument("--theta", nargs=nargs, help="pump phase(s) in radians")
    p.add_argument("--g", type=float, help="coupling constant")
    p.add_argument("--t", nargs=nargs, help="interaction time(s)")
    p.add_argument("--cutoffs", nargs="+", help="per-mode cutoffs, pump first")
    p.add_argument("--tol", type=float, help="formula comparison tolerance")
    p.add_argument("--output", help="CSV output path (default: stdout)")
    p.add_argument("--config", help="TOML configuration file; flags override it")


def _overrides(args) -> dict:
    data = {}
    if args.process:
        data["process"] = args.process
    if args.formalism:
        data["formalism"] = args.formalism
    if args.alpha_sq is not None:
        data["alpha_sq"] = _floats(args.alpha_sq if isinstance(args.alpha_sq, list)
                                   else [args.alpha_sq])
    if args.theta is not None:
        data["theta"] = _floats(args.theta if isinstance(args.theta, list) else [args.theta])
    if args.g is not None:
        data["g"] = args.g
    if args.t is not None:
        data["t"] = _floats(args.t if isinstance(args.t, list) else [args.t])
    grid = {k: getattr(args, f"t_{k}", None) for k in ("min", "max", "count", "scale")}
    grid = {k: v for k, v in grid.items() if v is not None}
    if grid:
        data["t"] = grid
    if args.cutoffs:
        data["cutoffs"] = _ints(args.cutoffs)
    if args.tol is not None:
        data.setdefault("tolerances", {})["comparison"] = args.tol
    if args.output:
        data["output"] = args.output
    return data


def _load(args):
    data = load_config_dict(args.config) if args.config else {}
    overrides = _overrides(args)
    tols = {**data.get("tolerances", {}), **overrides.pop("tolerances", {})}
    if isinstance(data.get("t"), dict) and isinstance(overrides.get("t"), dict):
        overrides["t"] = {**data["t"], **overrides["t"]}
    data.update(overrides)
    if tols:
        data["tolerances"] = tols
    return config_from_dict(data)


def _emit(text: str, output):
    if output:
        Path(output).write_bytes(text.encode("ascii"))
    else:
        sys.stdout.write(text)


def cmd_point(args) -> int:
    config = _load(args)
    if len(config.alpha_sq) != 1 or len(config.theta) != 1 or len(config.t.times()) != 1:
        raise ConfigError("point takes a single |alpha|^2, theta and t", field="t")
    a2, theta, t = config.alpha_sq[0], config.theta[0], config.t.times()[0]
    spec = ProcessSpec.create(config.process, a2, theta, config.g, t)
    record = run_point(spec, config.formalism, config.evolution_settings(),
                       config.cutoffs_for(a2))
    _emit(records_to_csv([record]), config.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    config = _load(args)
    records, summary = run_sweep(config)
    if not config.output:
        sys.stdout.write(records_to_csv(records))
    print(
        f"{summary.rows} rows, {summary.failures} failed, "
        f"max rel_err_U {summary.max_rel_err_U:.3g}, "
        f"d<0 everywhere: {summary.all_d_negative}",
        file=sys.stderr,
    )
    return EXIT_NUMERIC if summary.failures else EXIT_OK


def _selected(args):
    return tuple(args.process) if args.process else PROCESSES


def cmd_verify(args) -> int:
    report = verify(_selected(args))
    print(report.format())
    if args.output:
        Path(args.output).write_text(report.to_csv())
    return report.exit_code


def cmd_taylor_check(args) -> int:
    report = taylor_check(_selected(args))
    print(report.format())
    if args.output:
        Path(args.output).write_text(report.to_csv())
    return report.exit_code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasefluct",
        description="Quantum phase fluctuations of a coherent pump in wave-mixing processes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="evaluate a single parameter point")
    _add_point_flags(p, multi=False)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("sweep", help="evaluate a parameter grid and write CSV")
    _add_point_flags(p, multi=True)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-count", type=int)
    p.add_argument("--t-scale", choices=("lin", "log"))
    p.set_defaults(func=cmd_sweep)

    for name, func in (("verify", cmd_verify), ("taylor-check", cmd_taylor_check)):
        p = sub.add_parser(name, help=f"run the {name} suite")
        p.add_argument("--process", action="append", choices=PROCESSES,
                       help="restrict to one process (repeatable)")
        p.add_argument("--output", help="machine-readable CSV report path")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except PhaseFluctError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
