from enum import Enum
from typing import Dict, FrozenSet, Iterator, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ParamType(str, Enum):
    IN = "in"
    OUT = "out"


class ApiSignature(BaseModel):
    """Firma de una función de API declarada con ``.api``"""
    name: str = Field(..., min_length=1)
    arity: int = Field(..., ge=0)
    param_types: Tuple[FrozenSet[ParamType], ...] = ()

    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "example": {
                "name": "GetModuleFileName",
                "arity": 3,
                "param_types": [["in"], ["out"], ["in"]],
            }
        },
    )

    @field_validator("param_types")
    @classmethod
    def validate_param_types(cls, v):
        for index, types in enumerate(v, start=1):
            if not types:
                raise ValueError(f"El parámetro {index} necesita al menos un tipo (in/out)")
        return v

    @model_validator(mode="after")
    def validate_arity(self):
        if len(self.param_types) != self.arity:
            raise ValueError(f"arity={self.arity} no coincide con {len(self.param_types)} tipos declarados")
        return self

    @classmethod
    def parse_types(cls, text: str) -> Tuple[FrozenSet[ParamType], ...]:
        """``in,out,in|out`` → tupla de conjuntos de tipos."""
        if not text:
            return ()
        return tuple(frozenset(ParamType(part) for part in chunk.split("|")) for chunk in text.split(","))

    def render_types(self) -> str:
        order = (ParamType.IN, ParamType.OUT)
        return ",".join("|".join(t.value for t in order if t in types) for types in self.param_types)

    def types(self, n: int) -> FrozenSet[ParamType]:
        """Tipos del parámetro ``n`` (1-based)."""
        return self.param_types[n - 1]


class ApiTable(BaseModel):
    """P_API: punto de entrada de cada API → firma"""
    entries: Dict[str, ApiSignature] = Field(default_factory=dict)

    model_config = ConfigDict(frozen=True)

    def __contains__(self, point: str) -> bool:
        return point in self.entries

    def __iter__(self) -> Iterator[str]:
        return iter(sorted(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def signature(self, point: str) -> ApiSignature:
        return self.entries[point]

    def name(self, point: str) -> str:
        return self.entries[point].name

    def arity(self, point: str) -> int:
        return self.entries[point].arity

    def types(self, point: str, n: int) -> FrozenSet[ParamType]:
        return self.entries[point].types(n)
