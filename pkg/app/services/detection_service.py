import logging
from pathlib import Path
from typing import Dict, Optional, Sequence

from app.analysis.helta import Helta, detect
from app.analysis.trees import render
from app.exceptions import PipelineError
from app.models.extraction import ExtractionConfig
from app.models.report import FileReport, RunReport, Verdict
from app.services.datadog_service import DatadogService
from app.services.extraction_service import extraction_service

logger = logging.getLogger(__name__)

LABELS = ("malicious", "benign")


class DetectionService:
    """Servicio de clasificación de programas contra la base de firmas"""

    @staticmethod
    def load_labels(path: str) -> Dict[str, str]:
        """
        Leer un manifiesto ``ruta<TAB>etiqueta[<TAB>partición]``

        Las rutas relativas se resuelven desde el directorio del manifiesto;
        las claves del resultado son rutas absolutas.
        """
        manifest = Path(path)
        try:
            lines = manifest.read_text(encoding="utf-8").splitlines()
        except OSError as e:
            raise PipelineError(f"{path}: no se pudo leer el manifiesto ({e.strerror or e})") from e

        labels: Dict[str, str] = {}
        for line_no, line in enumerate(lines, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) < 2 or fields[1] not in LABELS:
                raise PipelineError(f"{path}:{line_no}: se esperaba 'ruta<TAB>malicious|benign'")
            labels[str((manifest.parent / fields[0]).resolve())] = fields[1]
        return labels

    @staticmethod
    def scan(
        helta: Helta,
        paths: Sequence[str],
        config: ExtractionConfig,
        labels: Optional[Dict[str, str]] = None,
        workers: Optional[int] = None,
        timings: bool = False,
    ) -> RunReport:
        """Veredicto por archivo, en el orden de entrada"""
        report = RunReport(command="detect", patterns=len(helta.finals))
        for extraction in extraction_service.extract_files(paths, config, workers):
            verdict = detect(helta, extraction.trees)
            row = FileReport(
                file=extraction.path,
                trees=len(extraction.trees),
                elapsed_seconds=round(extraction.elapsed_seconds, 6) if timings else None,
                verdict=Verdict.MALICIOUS if verdict.malicious else Verdict.BENIGN,
                witness=render(verdict.pattern) if verdict.malicious else None,
            )
            if labels is not None:
                row.label = labels.get(str(Path(extraction.path).resolve()))
            report.add(row)
            logger.info("🔎 %s: %s", extraction.path, row.verdict.value)
            DatadogService.increment_counter("detect.verdict", tags=[f"verdict:{row.verdict.value}"])
        if labels is not None:
            report.score_labels()
        return report

    @staticmethod
    def verdict_line(row: FileReport) -> str:
        if row.verdict is Verdict.MALICIOUS:
            return f"MALICIOUS {row.file} witness={row.witness}"
        return f"BENIGN {row.file}"


# Instancia global
detection_service = DetectionService()
