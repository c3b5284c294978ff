import argparse
import sys

from app.analysis.extract import Extractor
from app.analysis.helta import describe
from app.analysis.pds import dump_automaton, dump_pds
from app.config import settings
from app.services.extraction_service import extraction_service
from app.services.signature_service import signature_service


def register(subparsers) -> None:
    parser = subparsers.add_parser("inspect", help="volcado legible de una base de firmas o de un programa")
    target = parser.add_mutually_exclusive_group(required=True)
    target.add_argument("--db", help="base de firmas")
    target.add_argument("--program", help="programa .tasm: PDS, APIs, post* y configuraciones recortadas")
    parser.set_defaults(handler=run)


def dump_database(path: str) -> str:
    helta, database = signature_service.load_database(path)
    lines = [
        f"version {database.version}",
        f"threshold {database.threshold}",
        f"height {database.height}",
        f"min_nodes {database.min_nodes}",
        f"patterns {len(database.patterns)}",
    ]
    lines.extend(f"  {pattern}" for pattern in database.patterns)
    return "\n".join(lines) + "\n" + describe(helta)


def dump_program(path: str) -> str:
    model = extraction_service.load(path)
    extractor = Extractor(model, extraction_service.config_for(settings.learn_matching))
    sections = ["# api"]
    sections.extend(
        f"{point} {model.api.name(point)} arity={model.api.arity(point)} "
        f"types={model.api.signature(point).render_types()}"
        for point in model.api
    )
    sections.append(f"# entry {model.entry}")
    sections.append("# pds")
    sections.append(dump_pds(model.pds).rstrip("\n"))
    sections.append("# post*")
    sections.append(dump_automaton(extractor.post_star_from(model.entry)).rstrip("\n"))
    sections.append("# trimmed")
    sections.extend(str(config) for config in extractor.origins())
    return "\n".join(sections) + "\n"


def run(args: argparse.Namespace) -> int:
    sys.stdout.write(dump_database(args.db) if args.db else dump_program(args.program))
    return 0
