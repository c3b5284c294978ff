from enum import Enum

from pydantic import BaseModel, ConfigDict, Field


class ValueMatching(str, Enum):
    STRICT = "strict"
    PERMISSIVE = "permissive"


class ValueLeaves(str, Enum):
    CONSTANTS = "constants"
    LITERALS = "literals"
    ALL = "all"


class ExtractionConfig(BaseModel):
    """Parámetros de extracción de SCDTs"""
    height: int = Field(2, ge=0, description="Altura máxima de las cadenas de flujo")
    value_matching: ValueMatching = ValueMatching.STRICT
    value_leaves: ValueLeaves = ValueLeaves.CONSTANTS
    stack_floor: bool = Field(True, description="Modelar la pila del llamador como valores desconocidos")
    max_nodes: int = Field(10_000, ge=1)

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "height": 2,
                "value_matching": "strict",
                "value_leaves": "constants",
                "stack_floor": True,
                "max_nodes": 10000,
            }
        },
    )
