import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

import rich.logging
from attrs import evolve
from rich.console import Console
from rich.table import Table

from . import __version__
from .config import ScenarioConfig, load_config
from .errors import ConfigError, ContractError, FitError, UsageError
from .features import svg_plot_enabled
from .registry import realization_descriptions
from .reporting import (
    FRINGE_HEADER,
    SCAN_HEADER,
    check_payload,
    error_payload,
    pattern_payload,
    to_csv,
    to_json,
    witness_payload,
)
from .runner import run_pattern, run_scan, run_witness
from .verification import run_checks

logger = logging.getLogger()

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONTRACT = 3
EXIT_VERIFY = 4


def configure_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        handlers=[
            rich.logging.RichHandler(
                console=Console(stderr=True),
                tracebacks_code_width=500,
                tracebacks_show_locals=True,
                tracebacks_word_wrap=False,
                tracebacks_width=500,
                locals_max_length=500,
                locals_max_string=500,
            )
        ],
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="Output directory for CSV, JSON and SVG files.")
    common.add_argument("--seed", type=int, default=None, help="Seed recorded in reports (overrides the config).")
    common.add_argument("--verbose", action="store_true", help="Log at debug level.")

    experiment = argparse.ArgumentParser(add_help=False, parents=[common])
    experiment.add_argument("--config", type=Path, required=True, help="YAML experiment config.")

    parser = argparse.ArgumentParser(
        prog="probe-witness",
        description="Entanglement witnesses read off single-probe interference patterns.",
        epilog="realizations:\n"
        + "\n".join(f"  {name}: {text}" for name, text in realization_descriptions().items()),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbs = parser.add_subparsers(dest="verb", required=True)

    pattern = verbs.add_parser("pattern", parents=[experiment], help="Fringe table and witness report.")
    pattern.add_argument("--grid", type=int, default=None, help="Number of external phase points (default 73).")
    pattern.add_argument("--svg", action="store_true", help="Also write an SVG fringe plot.")
    verbs.add_parser("witness", parents=[experiment], help="Witness report only.")
    verbs.add_parser("scan", parents=[experiment], help="Sweep the config's parameter.")
    verbs.add_parser("verify", parents=[common], help="Run every self-check; exit 4 on failure.")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        if args.verb == "verify":
            return cmd_verify(seed=args.seed or 0)
        config = _load(args)
        args.out.mkdir(parents=True, exist_ok=True)
        if args.verb == "pattern":
            return cmd_pattern(config, args.out, svg=args.svg or svg_plot_enabled())
        if args.verb == "witness":
            return cmd_witness(config, args.out)
        return cmd_scan(config, args.out)
    except ConfigError as e:
        logger.exception(f"Config error: {e}")
        print(to_json(error_payload(e)), file=sys.stderr)
        return EXIT_CONFIG
    except (ContractError, UsageError, FitError) as e:
        logger.exception(f"Physics contract violated: {e}")
        print(to_json(error_payload(e)), file=sys.stderr)
        return EXIT_CONTRACT


def cmd_pattern(config: ScenarioConfig, out: Path, *, svg: bool = False) -> int:
    report = run_pattern(config)
    _write(out / "fringe.csv", to_csv(FRINGE_HEADER, report.fringe_table))
    _write(out / "pattern.json", to_json(pattern_payload(report)) + "\n")
    if svg:
        from .plotting import plot_fringe

        plot_fringe(report.fringe_table, out / "fringe.svg", title=report.scenario, pattern=report.pattern)
    return EXIT_OK


def cmd_witness(config: ScenarioConfig, out: Path) -> int:
    text = to_json(witness_payload(run_witness(config))) + "\n"
    _write(out / "witness.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_scan(config: ScenarioConfig, out: Path) -> int:
    if config.sweep is None:
        raise ConfigError("scan needs a sweep section", field="sweep")
    _write(out / "scan.csv", to_csv(SCAN_HEADER, run_scan(config)))
    return EXIT_OK


def cmd_verify(seed: int = 0) -> int:
    results = run_checks(seed)
    table = Table(title="probe-witness verification")
    for column in ("check", "residual", "tolerance", "status"):
        table.add_column(column)
    for result in results:
        payload = check_payload(result.name, result.residual, result.tolerance, result.passed)
        if result.detail:
            payload["detail"] = result.detail
        sys.stdout.write(to_json(payload, indent=None) + "\n")
        table.add_row(
            result.name,
            f"{result.residual:.3e}",
            f"{result.tolerance:.1e}",
            "[green]pass[/green]" if result.passed else "[red]FAIL[/red]",
        )
    Console(stderr=True).print(table)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def _load(args: argparse.Namespace) -> ScenarioConfig:
    config = load_config(args.config)
    if args.seed is not None:
        config = evolve(config, seed=args.seed)
    if getattr(args, "grid", None) is not None:
        if args.grid < 3:
            raise ConfigError(f"--grid must be at least 3, got {args.grid}", field="grid")
        config = evolve(config, grid=args.grid)
    return config


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")

