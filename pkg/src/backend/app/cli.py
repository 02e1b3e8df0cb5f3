"""
Command-line entry point.

    python -m src.backend.app.cli contours --resolution 201
    python -m src.backend.app.cli secondlaw --config ledger.json
    python -m src.backend.app.cli lightcone --config chain.json
    python -m src.backend.app.cli geometry --preset stream --refine 2

Exit codes: 0 all checks pass, 1 usage/config/precondition error,
2 violation beyond tolerance (JSON failure report on stderr).
"""
import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Tuple, Type

from pydantic import BaseModel, ValidationError

from .core.config import settings
from .core.exceptions import ConfigError, ToolkitError
from .core.logger import get_logger
from .schemas.configs import GeometryConfig, LightconeConfig, SecondLawConfig
from .services import runner
from .services.geometry import GRID_PRESETS

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATION = 2


class UsageError(Exception):
    pass


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; usage errors here map to exit 1."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="relentropy", description=settings.PROJECT_NAME)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    contours = sub.add_parser("contours", help="relative entropy to uniform over the 2-simplex")
    contours.add_argument("--resolution", type=int, required=True)
    contours.add_argument("--out")
    contours.add_argument("--format", choices=["csv", "json"], default="csv")

    for name, help_text in (
        ("secondlaw", "second-law ledgers for sigma-fixing channels"),
        ("lightcone", "light-cone relative entropy traces"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", required=True)
        cmd.add_argument("--out")
        cmd.add_argument("--format", choices=["csv", "json"])

    geometry = sub.add_parser("geometry", help="entropy-current balance and refinement study")
    source = geometry.add_mutually_exclusive_group(required=True)
    source.add_argument("--preset", choices=GRID_PRESETS)
    source.add_argument("--config")
    geometry.add_argument("--refine", type=int, default=0)
    geometry.add_argument("--out")
    geometry.add_argument("--format", choices=["csv", "json"])
    return parser


def load_config(path: str, model: Type[BaseModel]) -> BaseModel:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        return model.model_validate_json(text)
    except ValidationError as e:
        raise ConfigError(f"invalid config {path}: {e}") from e


def resolve_output(path: Optional[str]) -> Optional[Path]:
    if path is None:
        return None
    out = Path(path)
    if not out.is_absolute() and settings.OUTPUT_DIR is not None:
        out = settings.OUTPUT_DIR / out
    return out


def emit(text: str, path: Optional[Path]):
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def dispatch(args: argparse.Namespace) -> Tuple[runner.RunResult, str, Optional[str]]:
    """Run the selected command; returns (result, format, output path)."""
    if args.command == "contours":
        return runner.run_contours(args.resolution), args.format, args.out
    if args.command == "secondlaw":
        config = load_config(args.config, SecondLawConfig)
        return runner.run_secondlaw(config), args.format or config.format.value, args.out or config.output
    if args.command == "lightcone":
        config = load_config(args.config, LightconeConfig)
        return runner.run_lightcone(config), args.format or config.format.value, args.out or config.output
    if args.refine < 0:
        raise ConfigError("--refine must be non-negative")
    if args.preset is not None:
        return runner.run_geometry_preset(args.preset, args.refine), args.format or "csv", args.out
    config = load_config(args.config, GeometryConfig)
    return runner.run_geometry(config), args.format or config.format.value, args.out or config.output


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_ERROR

    try:
        result, fmt, out = dispatch(args)
        emit(result.render(fmt), resolve_output(out))
    except (ToolkitError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR

    if not result.passed:
        sys.stderr.write(json.dumps(result.failure_report(), default=str) + "\n")
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
