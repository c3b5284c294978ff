import argparse
import logging
import sys

from app.commands.options import add_matching, add_run_options, emit_json
from app.config import settings
from app.services.detection_service import detection_service
from app.services.extraction_service import extraction_service
from app.services.signature_service import signature_service

logger = logging.getLogger(__name__)

EXIT_BENIGN = 0
EXIT_MALICIOUS = 3


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "detect",
        help="clasificar programas contra una base de firmas",
        description="Sale con 3 si algún archivo es malicioso y con 0 si todos son benignos.",
    )
    parser.add_argument("files", nargs="+", help="programas .tasm a clasificar")
    parser.add_argument("--db", required=True, help="base de firmas generada por learn")
    parser.add_argument("--labels", help="manifiesto ruta<TAB>malicious|benign para medir falsos positivos")
    add_matching(parser, settings.detect_matching)
    add_run_options(parser, height_from_database=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    helta, database = signature_service.load_database(args.db)
    labels = detection_service.load_labels(args.labels) if args.labels else None
    height = database.height if args.height is None else args.height
    config = extraction_service.config_for(args.matching, height, args.leaves)
    report = detection_service.scan(helta, args.files, config, labels, args.workers, args.timings)

    if args.report == "json":
        emit_json(report)
    else:
        for row in report.files:
            sys.stdout.write(detection_service.verdict_line(row) + "\n")
        if report.true_positives is not None:
            sys.stdout.write(
                f"LABELS tp={report.true_positives} fp={report.false_positives} "
                f"tn={report.true_negatives} fn={report.false_negatives}\n"
            )
    return EXIT_MALICIOUS if report.malicious else EXIT_BENIGN
