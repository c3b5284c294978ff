from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field


class Verdict(str, Enum):
    MALICIOUS = "malicious"
    BENIGN = "benign"


class FileReport(BaseModel):
    """Fila del reporte para un archivo"""
    file: str
    trees: int = 0
    elapsed_seconds: Optional[float] = None
    verdict: Optional[Verdict] = None
    witness: Optional[str] = None
    label: Optional[str] = None

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "file": "corpus/malicious/heldout_01.tasm",
                "trees": 2,
                "verdict": "malicious",
                "witness": "GetModuleFileName(1(0),2>1(CopyFile))",
                "label": "malicious",
            }
        }
    )


class RunReport(BaseModel):
    """Reporte de una ejecución de learn/detect"""
    command: str
    files: List[FileReport] = Field(default_factory=list)
    total_trees: int = 0
    patterns: Optional[int] = None
    malicious: int = 0
    benign: int = 0
    true_positives: Optional[int] = None
    false_positives: Optional[int] = None
    true_negatives: Optional[int] = None
    false_negatives: Optional[int] = None

    def add(self, row: FileReport) -> None:
        self.files.append(row)
        self.total_trees += row.trees
        if row.verdict is Verdict.MALICIOUS:
            self.malicious += 1
        elif row.verdict is Verdict.BENIGN:
            self.benign += 1

    def score_labels(self) -> None:
        """Matriz de confusión contra las etiquetas del manifiesto."""
        labelled = [row for row in self.files if row.label is not None and row.verdict is not None]
        if not labelled:
            return
        flagged = lambda row: row.verdict is Verdict.MALICIOUS
        self.true_positives = sum(1 for row in labelled if row.label == "malicious" and flagged(row))
        self.false_negatives = sum(1 for row in labelled if row.label == "malicious" and not flagged(row))
        self.false_positives = sum(1 for row in labelled if row.label == "benign" and flagged(row))
        self.true_negatives = sum(1 for row in labelled if row.label == "benign" and not flagged(row))

    def to_json(self) -> str:
        return self.model_dump_json(indent=2, exclude_none=True) + "\n"
