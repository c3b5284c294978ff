import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, List, Optional, Sequence, Tuple

from app.analysis.extract import extract_scdts
from app.analysis.frontend import ProgramModel, load_program
from app.analysis.trees import Scdt, parse_tree, render
from app.config import settings
from app.exceptions import PipelineError
from app.models.extraction import ExtractionConfig, ValueLeaves, ValueMatching
from app.services.datadog_service import DatadogService, track_execution_time

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FileExtraction:
    """Árboles extraídos de un archivo y el tiempo que tomó"""
    path: str
    trees: FrozenSet[Scdt]
    elapsed_seconds: float


def _read_model(path: str, register_count: int) -> ProgramModel:
    try:
        return load_program(Path(path), register_count)
    except UnicodeDecodeError as e:
        raise PipelineError(f"{path}: el archivo no es UTF-8 válido") from e
    except OSError as e:
        raise PipelineError(f"{path}: no se pudo leer ({e.strerror or e})") from e


@track_execution_time("extract.duration")
def _extract_file(path: str, config: ExtractionConfig, register_count: int) -> Tuple[str, Tuple[str, ...], float]:
    """Unidad de trabajo de un proceso: devuelve los árboles como texto.

    El hash de los árboles se cachea por proceso, así que no se envían objetos.
    """
    start = time.perf_counter()
    model = _read_model(path, register_count)
    trees = extract_scdts(model, config)
    return path, tuple(sorted(render(tree) for tree in trees)), time.perf_counter() - start


class ExtractionService:
    """Servicio de extracción de SCDTs sobre archivos ``.tasm``"""

    @staticmethod
    def config_for(
        matching: str,
        height: Optional[int] = None,
        value_leaves: Optional[str] = None,
    ) -> ExtractionConfig:
        """Configuración de extracción con los defaults de ``settings``"""
        return ExtractionConfig(
            height=settings.tree_height if height is None else height,
            value_matching=ValueMatching(matching),
            value_leaves=ValueLeaves(value_leaves or settings.value_leaves),
            stack_floor=settings.stack_floor,
            max_nodes=settings.max_tree_nodes,
        )

    @staticmethod
    def load(path: str) -> ProgramModel:
        return _read_model(path, settings.register_count)

    @staticmethod
    def extract_files(
        paths: Sequence[str],
        config: ExtractionConfig,
        workers: Optional[int] = None,
    ) -> List[FileExtraction]:
        """
        Extraer los árboles de cada archivo

        Args:
            paths: Archivos ``.tasm`` en el orden del reporte
            config: Parámetros de extracción
            workers: Procesos en paralelo (1 = secuencial)

        Returns:
            Una extracción por archivo, en el orden de ``paths``
        """
        workers = settings.workers if workers is None else workers
        register_count = settings.register_count
        if workers <= 1 or len(paths) <= 1:
            raw = [_extract_file(path, config, register_count) for path in paths]
        else:
            logger.info("⚙️ Extrayendo %d archivos con %d procesos", len(paths), workers)
            with ProcessPoolExecutor(max_workers=workers) as pool:
                # map conserva el orden de entrada
                raw = list(pool.map(
                    _extract_file,
                    paths,
                    [config] * len(paths),
                    [register_count] * len(paths),
                ))
        results = [
            FileExtraction(path, frozenset(parse_tree(text) for text in rendered), elapsed)
            for path, rendered, elapsed in raw
        ]

        for result in results:
            logger.info("🌳 %s: %d árboles en %.3fs", result.path, len(result.trees), result.elapsed_seconds)
            DatadogService.gauge("extract.trees", float(len(result.trees)), tags=[f"matching:{config.value_matching.value}"])
        return results

    @staticmethod
    def corpus_entries(results: Sequence[FileExtraction]) -> List[Tuple[str, FrozenSet[Scdt]]]:
        return [(result.path, result.trees) for result in results]


# Instancia global
extraction_service = ExtractionService()
