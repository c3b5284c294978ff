import argparse
import logging
import sys
from typing import List, Optional

from dotenv import load_dotenv

# Cargar variables de entorno PRIMERO
load_dotenv()

from app.commands import COMMANDS  # noqa: E402
from app.config import settings  # noqa: E402
from app.exceptions import PipelineError, UsageError  # noqa: E402
from app.services.datadog_service import DatadogService  # noqa: E402

logger = logging.getLogger("app")


class CommandParser(argparse.ArgumentParser):
    """argparse con errores de uso como ``UsageError`` (exit 1, no 2)"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> CommandParser:
    parser = CommandParser(prog=settings.app_title, description=settings.app_description)
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="más detalle en stderr (-v info, -vv debug)")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(verbose: int) -> None:
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, settings.log_level.upper(), logging.WARNING)
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    """Punto de entrada; devuelve el código de salida"""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"error: {e.detail}\n")
        return e.exit_code

    configure_logging(args.verbose)

    # ✅ INICIALIZAR DATADOG
    try:
        DatadogService.initialize()
    except Exception as e:
        logger.warning("⚠️ Error al inicializar Datadog (el análisis continúa sin métricas): %s", e)

    logger.info("🚀 %s %s: %s", settings.app_title, settings.app_version, args.command)
    try:
        return args.handler(args)
    except PipelineError as e:
        sys.stderr.write(f"error: {e.detail}\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
