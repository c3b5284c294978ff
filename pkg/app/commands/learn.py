import argparse
import logging
import sys

from app.commands.options import add_matching, add_run_options, emit_json, positive_int, support_value
from app.config import settings
from app.services.extraction_service import extraction_service
from app.services.signature_service import signature_service

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "learn",
        help="aprender una base de firmas de programas maliciosos",
        description="Extrae los SCDTs de cada archivo, mina los subárboles frecuentes y escribe la base de firmas.",
    )
    parser.add_argument("files", nargs="+", help="programas .tasm maliciosos")
    parser.add_argument("--support", type=support_value, default=settings.support_threshold,
                        help=f"umbral de soporte k (default: {settings.support_threshold})")
    parser.add_argument("--min-nodes", type=positive_int, default=settings.min_pattern_nodes,
                        help=f"tamaño mínimo de un patrón (default: {settings.min_pattern_nodes})")
    parser.add_argument("--out", required=True, help="archivo de la base de firmas")
    parser.add_argument("--benign", nargs="+", default=[], metavar="FILE",
                        help="programas benignos cuyos patrones se descartan")
    add_matching(parser, settings.learn_matching)
    add_run_options(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """
    Aprender firmas

    - Extracción con matching estricto por defecto
    - Los programas de --benign se extraen con el matching de detección
    """
    config = extraction_service.config_for(args.matching, args.height, args.leaves)
    benign_config = extraction_service.config_for(settings.detect_matching, args.height, args.leaves)
    database, report = signature_service.learn(
        args.files,
        args.support,
        config,
        args.min_nodes,
        benign_paths=args.benign,
        benign_config=benign_config,
        workers=args.workers,
        timings=args.timings,
    )
    signature_service.write_database(args.out, database)

    if args.report == "json":
        emit_json(report)
    else:
        for row in report.files:
            timing = f" time={row.elapsed_seconds:.3f}s" if row.elapsed_seconds is not None else ""
            sys.stdout.write(f"EXTRACTED {row.file} trees={row.trees}{timing}\n")
        sys.stdout.write(f"LEARNED {report.patterns} patterns from {report.total_trees} trees -> {args.out}\n")
    return 0
