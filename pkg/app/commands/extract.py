import argparse
import sys

from app.analysis.trees import render
from app.commands.options import add_matching, height_value
from app.config import settings
from app.services.extraction_service import extraction_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("extract", help="listar los SCDTs de un programa, uno por línea")
    parser.add_argument("file", help="programa .tasm")
    parser.add_argument("--height", type=height_value, default=settings.tree_height)
    parser.add_argument("--leaves", choices=("constants", "literals", "all"), default=settings.value_leaves)
    add_matching(parser, settings.learn_matching)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = extraction_service.config_for(args.matching, args.height, args.leaves)
    (extraction,) = extraction_service.extract_files([args.file], config, workers=1)
    for line in sorted(render(tree) for tree in extraction.trees):
        sys.stdout.write(line + "\n")
    return 0
