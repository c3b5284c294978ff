"""Opciones compartidas por los subcomandos."""
import argparse
import sys

from app.config import settings
from app.models.report import RunReport


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"se esperaba un entero: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"debe ser >= 1: {value}")
    return value


def height_value(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"se esperaba un entero: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"la altura debe ser >= 0: {value}")
    return value


def support_value(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"se esperaba un número: {text!r}")
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"el soporte debe estar en (0, 1]: {value}")
    return value


def add_matching(parser: argparse.ArgumentParser, default: str) -> None:
    parser.add_argument(
        "--matching",
        choices=("strict", "permissive"),
        default=default,
        help=f"igualdad de valores en los flujos (default: {default})",
    )


def add_run_options(parser: argparse.ArgumentParser, height_from_database: bool = False) -> None:
    """--height, --leaves, --workers, --report y --timings

    Con ``height_from_database`` la altura por defecto es la guardada en la
    base de firmas (``--height`` queda en ``None``).
    """
    if height_from_database:
        parser.add_argument("--height", type=height_value, default=None,
                            help="altura de los árboles (default: la de la base de firmas)")
    else:
        parser.add_argument("--height", type=height_value, default=settings.tree_height,
                            help=f"altura de los árboles (default: {settings.tree_height})")
    parser.add_argument("--leaves", choices=("constants", "literals", "all"), default=settings.value_leaves,
                        help="qué valores de parámetro se vuelven hojas")
    parser.add_argument("--workers", type=positive_int, default=settings.workers,
                        help="procesos para extraer en paralelo")
    parser.add_argument("--report", choices=("text", "json"), default="text",
                        help="formato del reporte en stdout")
    parser.add_argument("--timings", action="store_true",
                        help="incluir tiempos por archivo (el reporte deja de ser reproducible)")


def emit_json(report: RunReport) -> None:
    sys.stdout.write(report.to_json())
