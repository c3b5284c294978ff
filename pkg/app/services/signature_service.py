import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple

from app.analysis.helta import Helta, deserialize, infer, serialize
from app.analysis.miner import Corpus, MalScdtSet, frequent_subtrees
from app.config import settings
from app.exceptions import PipelineError
from app.models.extraction import ExtractionConfig
from app.models.report import FileReport, RunReport
from app.models.signature import SignatureDatabase
from app.services.datadog_service import DatadogService
from app.services.extraction_service import extraction_service

logger = logging.getLogger(__name__)


class SignatureService:
    """Servicio de aprendizaje y persistencia de la base de firmas"""

    @staticmethod
    def mine(
        corpus: Corpus,
        support: float,
        min_nodes: int,
        benign: Optional[Corpus] = None,
    ) -> MalScdtSet:
        """Patrones frecuentes con al menos ``min_nodes`` nodos, menos los
        que aparecen en el corpus benigno"""
        mined = frequent_subtrees(corpus, support, settings.max_patterns)
        logger.info("⛏️ %d patrones frecuentes (k=%s, %d árboles)", len(mined), support, len(corpus))
        mined = mined.filter_min_nodes(min_nodes)
        if benign is not None:
            before = len(mined)
            mined = mined.excluding(benign.trees)
            logger.info("🧹 %d patrones descartados por aparecer en programas benignos", before - len(mined))
        return mined

    @staticmethod
    def learn(
        paths: Sequence[str],
        support: float,
        config: ExtractionConfig,
        min_nodes: int,
        benign_paths: Sequence[str] = (),
        benign_config: Optional[ExtractionConfig] = None,
        workers: Optional[int] = None,
        timings: bool = False,
    ) -> Tuple[str, RunReport]:
        """
        Aprender firmas de un corpus malicioso

        Returns:
            (texto de la base de firmas, reporte de la ejecución)
        """
        extractions = extraction_service.extract_files(paths, config, workers)
        corpus = Corpus.from_entries(extraction_service.corpus_entries(extractions))

        benign = None
        if benign_paths:
            benign_extractions = extraction_service.extract_files(benign_paths, benign_config or config, workers)
            benign = Corpus.from_entries(extraction_service.corpus_entries(benign_extractions))

        mined = SignatureService.mine(corpus, support, min_nodes, benign)
        helta = infer(mined.patterns)
        database = serialize(helta, support, config.height, min_nodes)

        report = RunReport(command="learn", patterns=len(mined))
        for extraction in extractions:
            report.add(FileReport(
                file=extraction.path,
                trees=len(extraction.trees),
                elapsed_seconds=round(extraction.elapsed_seconds, 6) if timings else None,
            ))
        DatadogService.gauge("learn.patterns", float(len(mined)))
        return database, report

    @staticmethod
    def write_database(path: str, text: str) -> None:
        try:
            Path(path).write_text(text, encoding="utf-8")
        except OSError as e:
            raise PipelineError(f"{path}: no se pudo escribir la base de firmas ({e.strerror or e})") from e
        logger.info("💾 Base de firmas escrita en %s", path)

    @staticmethod
    def load_database(path: str) -> Tuple[Helta, SignatureDatabase]:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            raise PipelineError(f"{path}: base de firmas corrupta (no es UTF-8)", exit_code=2) from e
        except OSError as e:
            raise PipelineError(f"{path}: no se pudo leer la base de firmas ({e.strerror or e})") from e
        helta, database = deserialize(text)
        logger.info("📚 %s: %d patrones cargados", path, len(database.patterns))
        return helta, database


# Instancia global
signature_service = SignatureService()
