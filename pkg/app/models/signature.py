from typing import List

from pydantic import BaseModel, ConfigDict, Field, field_validator

DATABASE_VERSION = 1


class SignatureDatabase(BaseModel):
    """Base de firmas: los patrones son la fuente de verdad, el autómata se
    reconstruye al cargar."""
    version: int = DATABASE_VERSION
    threshold: float = Field(..., gt=0, le=1)
    height: int = Field(..., ge=0)
    min_nodes: int = Field(1, ge=1)
    patterns: List[str] = Field(default_factory=list)

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "version": 1,
                "threshold": 0.6,
                "height": 2,
                "min_nodes": 2,
                "patterns": ["GetModuleFileName(1(0),2>1(CopyFile))"],
            }
        },
    )

    @field_validator("version")
    @classmethod
    def validate_version(cls, v):
        if v != DATABASE_VERSION:
            raise ValueError(f"Versión de base de firmas no soportada: {v}")
        return v

    @field_validator("patterns")
    @classmethod
    def validate_patterns(cls, v):
        if v != sorted(set(v)):
            raise ValueError("Los patrones deben estar ordenados y sin repeticiones")
        return v
