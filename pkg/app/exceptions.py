"""Errores del pipeline.

Cada error lleva el código de salida que la CLI devuelve al usuario, igual
que una excepción HTTP lleva su status code.
"""
from typing import Optional


class PipelineError(Exception):
    """Error base; ``detail`` es el mensaje de una línea para stderr."""

    exit_code: int = 1

    def __init__(self, detail: str, exit_code: Optional[int] = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code

    def __reduce__(self):
        # los errores cruzan procesos con --workers
        return (self.__class__, (self.detail, self.exit_code))

    def __str__(self) -> str:
        return self.detail


class UsageError(PipelineError):
    """Argumentos de línea de comandos inválidos."""


class SourceError(PipelineError):
    """Error con ubicación precisa en un archivo fuente ``.tasm``."""

    def __init__(self, message: str, source: str, line: int, column: int = 1):
        self.message = message
        self.source = source
        self.line = line
        self.column = column
        super().__init__(f"{source}:{line}:{column}: {message}")

    def __reduce__(self):
        return (self.__class__, (self.message, self.source, self.line, self.column))


class ParseError(SourceError):
    pass


class RegisterOverflowError(SourceError):
    pass


class AnalysisError(PipelineError):
    """Precondición violada por un llamador (bug, no entrada del usuario)."""


class TreeSyntaxError(PipelineError):
    def __init__(self, message: str, text: str, position: int):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(f"árbol inválido en la posición {position}: {message} ({text!r})")

    def __reduce__(self):
        return (self.__class__, (self.message, self.text, self.position))


class LimitExceededError(PipelineError):
    pass


class TreeSizeLimitError(LimitExceededError):
    pass


class SubtreeLimitError(LimitExceededError):
    pass


class PatternLimitError(LimitExceededError):
    exit_code = 2


class CorruptDatabaseError(PipelineError):
    exit_code = 2
