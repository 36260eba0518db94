"""Command line entry point: every subcommand is dispatched through a CheckRegistry and writes JSON reports."""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from newformology import archimedean
from newformology import assembly
from newformology import counting
from newformology import reps
from newformology import whittaker
from newformology.chars import CharacterCache
from newformology.config import RunConfig
from newformology.config import resolve_config
from newformology.exceptions import NewformologyError
from newformology.exceptions import ParameterRangeError
from newformology.logging import configure_logging
from newformology.padic import g_tlv
from newformology.registry import CheckRegistry
from newformology.reports import STATUS_INFO
from newformology.reports import CheckReport
from newformology.reports import LockedConstants
from newformology.reports import serialize
from newformology.reports import write_csv
from newformology.reports import write_json
from newformology.reports import write_reports

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

registry = CheckRegistry()


@registry.route("catalog")
def catalog_command(args: argparse.Namespace, config: RunConfig, logger: logging.Logger) -> list[CheckReport]:
    """Build and export the representation catalog of every configured prime."""
    primes = args.prime or config.primes
    output = []
    for p in primes:
        catalog = reps.build_catalog(p, config.n_max_for(p), include_complementary=True, logger=logger)
        write_json([entry.to_json() for entry in catalog], Path(config.output_dir) / f"catalog_p{p}.json")
        coverage = reps.catalog_coverage(p, config.n_max_for(p), catalog)
        output.append(
            CheckReport("catalog", params={"p": p}, status=STATUS_INFO, details={"size": len(catalog), **coverage})
        )
        for entry in catalog:
            print(f"{p} {entry.conductor} {entry.label}")
    return output


@registry.route("whittaker/{action}")
def whittaker_command(
    action: str,
    args: argparse.Namespace,
    config: RunConfig,
) -> list[CheckReport]:
    """Evaluate W(g_{t,l,v}) or scan the sup of |W| for one representation."""
    pi = reps.representation_for(args.prime, args.variant, args.n)
    if action == "scan":
        return [whittaker.sup_scan(pi)]
    if action != "eval":
        raise ParameterRangeError(f"Unknown whittaker action: {action}")
    engine = whittaker.get_engine(pi, config.ring)
    value = engine.value(g_tlv(args.t, args.l, Fraction(args.v), args.prime))
    print(serialize(value))
    return [
        CheckReport(
            "whittaker/eval",
            params={"pi": pi.label, "t": args.t, "l": args.l, "v": args.v},
            status=STATUS_INFO,
            details={"value": value, "modulus": engine.ring.modulus(value)},
        )
    ]


@registry.route("verify/{check}")
def verify_command(check: str, config: RunConfig, logger: logging.Logger) -> list[CheckReport]:
    """Run one named check family across the worker pool."""
    return assembly.run_all(config, assembly.verification_jobs(config, [check], logger), logger=logger)


@registry.route("verify/all")
def verify_all_command(config: RunConfig, logger: logging.Logger) -> list[CheckReport]:
    """Run every check."""
    return assembly.run_all(config, logger=logger)


@registry.route("count")
def count_command(args: argparse.Namespace) -> list[CheckReport]:
    """Count lattice matrices close to a point and compare with the counting bound."""
    z = counting.HalfPlanePoint.from_complex(args.z)
    count = counting.count_close_lattice(z, args.l, args.delta, args.level)
    ratio = counting.count_ratio(z, args.l, args.delta, args.level, count)
    print(count)
    return [
        CheckReport(
            "counting/count",
            params={"z": str(z), "l": args.l, "delta": args.delta, "N2": args.level},
            status=STATUS_INFO,
            measured_constant=ratio,
            details={"count": count},
        )
    ]


@registry.route("bessel")
def bessel_command(args: argparse.Namespace, config: RunConfig) -> list[CheckReport]:
    """Evaluate K_it(y) and compare with the high precision reference."""
    if not 0 <= args.t <= config.bessel_max_order or not 0 < args.y <= config.bessel_max_argument:
        raise ParameterRangeError(
            f"(t, y) = ({args.t}, {args.y}) outside [0, {config.bessel_max_order}] x (0, {config.bessel_max_argument}]"
        )
    report = archimedean.bessel_oracle_check(args.t, args.y)
    print(archimedean.bessel_k_it(args.t, args.y))
    return [report]


@registry.route("bound")
def bound_command(args: argparse.Namespace, config: RunConfig) -> list[CheckReport]:
    """Level invariants of N and M, or the Whittaker expansion bound at given lengths."""
    if args.level is not None:
        invariants = assembly.level_invariants(args.level, args.character_level)
        print(invariants.bound_text())
        return [
            CheckReport(
                "assembly/level",
                params={"N": args.level, "M": args.character_level},
                status=STATUS_INFO,
                details=invariants.to_json(),
            )
        ]
    extra = {"ys": (args.y, 2 * args.y, 4 * args.y)} if args.y is not None else {}
    report = assembly.fourier_bound_check(args.qg, args.n0g, args.height, eps=config.epsilon, **extra)
    print(report.details["form"])
    return [report]


@registry.route("table")
def table_command(config: RunConfig) -> list[CheckReport]:
    """Write the prime power table as CSV and check it against the reference rows."""
    rows = assembly.intro_table()
    write_csv([row.to_csv() for row in rows], assembly.TABLE_COLUMNS, Path(config.output_dir) / "intro_table.csv")
    for row in rows:
        print(", ".join(row.to_csv().values()))
    return [assembly.intro_table_check(config.primes)]


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newformology",
        description="Verify local Whittaker, matrix coefficient, counting and bound computations.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--config", help="INI file with a [newformology] section")
    parser.add_argument("--seed", type=int, help="Seed of every random choice")
    parser.add_argument("--ring", choices=["exact", "complex"], help="Value ring of Whittaker evaluations")
    parser.add_argument("--workers", type=int, help="Worker count")
    parser.add_argument("--processes", dest="use_threads", action="store_false", default=None, help="Use processes")
    parser.add_argument("--output-dir", help="Directory of reports and tables")
    parser.add_argument("--cache-dir", help="Character and epsilon cache directory")
    parser.add_argument("--locked-file", help="Locked constants store")
    parser.add_argument("--update-locked", action="store_true", default=None, help="Re-record locked constants")
    parser.add_argument("--primes", type=int, nargs="+", help="Primes of the catalog")
    parser.add_argument("--n-max", type=int, help="Catalog conductor bound at p < 5")
    parser.add_argument("--log-level", help="Log level name")
    parser.add_argument("--log-file", help="Also log to this file")
    commands = parser.add_subparsers(dest="command", required=True)

    catalog = commands.add_parser("catalog", help="Build and export the representation catalog")
    catalog.add_argument("--prime", type=int, nargs="+", help="Primes; defaults to the configured primes")

    whittaker_parser = commands.add_parser("whittaker", help="Whittaker newform values")
    whittaker_parser.add_argument("action", choices=["eval", "scan"])
    whittaker_parser.add_argument("--prime", type=int, required=True)
    whittaker_parser.add_argument("--variant", choices=list(reps.VARIANTS), required=True)
    whittaker_parser.add_argument("--n", type=int, required=True, help="Conductor exponent")
    whittaker_parser.add_argument("--t", type=int, default=0)
    whittaker_parser.add_argument("--l", type=int, default=0)
    whittaker_parser.add_argument("--v", type=int, default=1, help="Unit labelling the coset")

    verify = commands.add_parser("verify", help="Run a verification check family")
    verify.add_argument("check", choices=["all", *assembly.VERIFY_CHECKS])

    count = commands.add_parser("count", help="Count close lattice matrices")
    count.add_argument("--z", default="1i", help="Point of the upper half plane, such as 0.3+0.9i")
    count.add_argument("--l", type=int, required=True)
    count.add_argument("--delta", type=float, required=True)
    count.add_argument("--level", type=int, default=1, help="Squarefree N2")

    bessel = commands.add_parser("bessel", help="K-Bessel function of imaginary order")
    bessel.add_argument("--t", type=float, default=0.0)
    bessel.add_argument("--y", type=float, default=1.0)

    bound = commands.add_parser("bound", help="Level invariants or the Whittaker expansion bound")
    bound.add_argument("--level", type=int, help="N; prints the invariants and the upper bound")
    bound.add_argument("--character-level", type=int, default=1, help="M, a divisor of N")
    bound.add_argument("--qg", type=int, default=1, help="Q^g")
    bound.add_argument("--n0g", type=int, default=1, help="N0^g")
    bound.add_argument("--height", type=float, default=1.0, help="T")
    bound.add_argument("--y", type=float, help="Imaginary part")

    commands.add_parser("table", help="Prime power table of upper and lower bounds")
    return parser


def _command_path(args: argparse.Namespace) -> str:
    if args.command == "whittaker":
        return f"whittaker/{args.action}"
    if args.command == "verify":
        return f"verify/{args.check}"
    return args.command


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; the exit code is 0 only when every produced report passed."""
    args = _parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "ring": args.ring,
        "workers": args.workers,
        "use_threads": args.use_threads,
        "output_dir": args.output_dir,
        "cache_dir": args.cache_dir,
        "locked_file": args.locked_file,
        "update_locked": args.update_locked,
        "primes": args.primes,
        "n_max": args.n_max,
        "log_level": args.log_level,
        "log_file": args.log_file,
    }
    try:
        config = resolve_config(overrides, args.config)
    except NewformologyError as error:
        print(f"newformology: {error}", file=sys.stderr)
        return EXIT_ERROR
    logger = configure_logging(config.log_level, config.log_file)
    logger.info(f"Seed {config.seed}; configuration {config.to_json()}")
    if config.cache_dir:
        whittaker.use_cache(CharacterCache(config.cache_dir, logger))

    path = _command_path(args)
    locked = LockedConstants(config.locked_path, update=config.update_locked, tolerance=config.tolerance, logger=logger)
    try:
        reports = registry.dispatch(path, args=args, config=config, logger=logger)
        assembly.apply_locked(reports, locked)
        locked.save()
    except NewformologyError as error:
        logger.error(f"{path} failed: {error}")
        return EXIT_ERROR

    write_reports(reports, Path(config.output_dir) / f"{path.replace('/', '-')}.json")
    failed = [report.key for report in reports if not report.passed]
    for key in failed:
        logger.error(f"Check failed: {key}")
    logger.info(f"{len(reports) - len(failed)}/{len(reports)} reports passed")
    return EXIT_FAILED if failed else EXIT_OK
