"""Frontend ``.tasm``: de ensamblador de juguete a PDS + tabla de APIs.

Formato (UTF-8, orientado a líneas, comentarios con ``#``)::

    .api GetModuleFileName arity=3 types=in,out,in
    .api CopyFile          arity=3 types=in,in,in
    .entry l1
    l1: push m
    l2: mov ebx 0
    l3: push ebx
    l4: call GetModuleFileName
    l5: push m
    l6: call CopyFile
    l7: halt

Instrucciones: ``push x``, ``mov reg x``, ``pop reg``, ``call api|label|reg``,
``jmp label|reg``, ``jz label``, ``jnz label``, ``ret``, ``halt``. Los
nombres usados como destino de ``mov``/``pop`` son registros; cualquier
otro operando es un literal. Los números se normalizan a decimal. Una
etiqueta puede ir sola en su línea y se aplica a la instrucción siguiente;
las instrucciones sin etiqueta reciben ``L<línea>``.

Los puntos de control son pares (etiqueta, valuación de registros) y se
escriben ``l4{ebx=0}``; los puntos de entrada de API se escriben
``@GetModuleFileName{ebx=0}``.
"""
from __future__ import annotations

import logging
import re
from collections import deque
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Set, Tuple

from pydantic import ValidationError

from app.analysis.pds import TOP, Config, ControlPoint, Pds, Rule, StackSymbol, normalize
from app.exceptions import ParseError, RegisterOverflowError
from app.models.api import ApiSignature, ApiTable, ParamType

logger = logging.getLogger(__name__)

DEFAULT_REGISTER_COUNT = 4
END_POINT = "$end"

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_NUMBER_RE = re.compile(r"-?(?:0[xX][0-9a-fA-F]+|\d+)\Z")
_TOKEN_RE = re.compile(r"\S+")

# opcode -> cantidad de operandos
OPCODES = {
    "push": 1,
    "mov": 2,
    "pop": 1,
    "call": 1,
    "jmp": 1,
    "jz": 1,
    "jnz": 1,
    "ret": 0,
    "halt": 0,
}


@dataclass(frozen=True)
class Instruction:
    label: str
    opcode: str
    operands: Tuple[str, ...] = ()
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return " ".join((f"{self.label}:", self.opcode) + self.operands)


@dataclass(frozen=True)
class ProgramSource:
    name: str
    declarations: Tuple[ApiSignature, ...]
    entry: str
    instructions: Tuple[Instruction, ...]

    @property
    def api_by_name(self) -> Dict[str, ApiSignature]:
        return {signature.name: signature for signature in self.declarations}

    @property
    def labels(self) -> Dict[str, int]:
        return {ins.label: index for index, ins in enumerate(self.instructions)}

    @property
    def registers(self) -> Tuple[str, ...]:
        seen: List[str] = []
        for ins in self.instructions:
            if ins.opcode in ("mov", "pop") and ins.operands[0] not in seen:
                seen.append(ins.operands[0])
        return tuple(seen)


@dataclass(frozen=True)
class ProgramModel:
    pds: Pds
    api: ApiTable
    entry: Config
    source_name: str
    program: ProgramSource


def _normalize_operand(token: str) -> str:
    if _NUMBER_RE.match(token):
        negative = token.startswith("-")
        digits = token.lstrip("-")
        value = int(digits, 16) if digits[:2].lower() == "0x" else int(digits, 10)
        return str(-value if negative else value)
    return token


def parse_source(text: str, source_name: str = "<input>") -> ProgramSource:
    """Análisis sintáctico y resolución de nombres, sin traducir a PDS."""
    declarations: Dict[str, ApiSignature] = {}
    entry: Optional[Tuple[str, int, int]] = None
    raw: List[Instruction] = []
    label_sites: Dict[str, Tuple[int, int]] = {}
    pending: Optional[Tuple[str, int, int]] = None

    def error(message: str, line: int, column: int) -> ParseError:
        return ParseError(message, source_name, line, column)

    for line_no, line in enumerate(text.splitlines(), start=1):
        code = line.split("#", 1)[0]
        tokens = [(m.group(0), m.start() + 1) for m in _TOKEN_RE.finditer(code)]
        if not tokens:
            continue
        head, head_col = tokens[0]

        if head == ".api":
            if pending:
                raise error("directiva después de una etiqueta sin instrucción", line_no, head_col)
            declarations_entry = _parse_api(tokens, line_no, error)
            if declarations_entry.name in declarations:
                raise error(f"API declarada dos veces: {declarations_entry.name}", line_no, tokens[1][1])
            declarations[declarations_entry.name] = declarations_entry
            continue
        if head == ".entry":
            if len(tokens) != 2:
                column = tokens[2][1] if len(tokens) > 2 else head_col
                raise error(".entry requiere exactamente una etiqueta", line_no, column)
            if entry is not None:
                raise error(".entry declarado dos veces", line_no, head_col)
            entry = (tokens[1][0], line_no, tokens[1][1])
            continue
        if head.startswith("."):
            raise error(f"directiva desconocida: {head}", line_no, head_col)

        if head.endswith(":"):
            label = head[:-1]
            if not _IDENT_RE.match(label):
                raise error(f"etiqueta inválida: {label!r}", line_no, head_col)
            if pending:
                raise error(f"dos etiquetas seguidas sin instrucción: {pending[0]}, {label}", line_no, head_col)
            if label in label_sites:
                raise error(f"etiqueta duplicada: {label}", line_no, head_col)
            label_sites[label] = (line_no, head_col)
            pending = (label, line_no, head_col)
            tokens = tokens[1:]
            if not tokens:
                continue

        opcode, op_col = tokens[0]
        if opcode not in OPCODES:
            raise error(f"instrucción desconocida: {opcode}", line_no, op_col)
        operands = tokens[1:]
        expected = OPCODES[opcode]
        if len(operands) > expected:
            raise error(f"texto sobrante: {operands[expected][0]}", line_no, operands[expected][1])
        if len(operands) < expected:
            raise error(f"{opcode} requiere {expected} operando(s)", line_no, op_col)
        for token, column in operands:
            if not (_IDENT_RE.match(token) or _NUMBER_RE.match(token)):
                raise error(f"operando inválido: {token!r}", line_no, column)
        if opcode in ("mov", "pop") and not _IDENT_RE.match(operands[0][0]):
            raise error(f"{opcode} requiere un registro como destino", line_no, operands[0][1])

        label = ""
        if pending:
            label = pending[0]
            pending = None
        raw.append(
            Instruction(label, opcode, tuple(_normalize_operand(t) for t, _ in operands), line_no, op_col)
        )

    if pending:
        raise error(f"etiqueta sin instrucción: {pending[0]}", pending[1], pending[2])
    if not raw:
        raise ParseError("el programa no tiene instrucciones", source_name, 1, 1)

    # etiquetas automáticas L<línea>, asignadas cuando ya se conocen todas las del usuario
    for index, ins in enumerate(raw):
        if ins.label:
            continue
        label = f"L{ins.line}"
        while label in label_sites or label in declarations:
            label += "_"
        label_sites[label] = (ins.line, ins.column)
        raw[index] = replace(ins, label=label)

    for name in declarations:
        if name in label_sites:
            line_no, column = label_sites[name]
            raise error(f"la etiqueta {name} coincide con una API declarada", line_no, column)

    labels = {ins.label for ins in raw}
    registers = {ins.operands[0] for ins in raw if ins.opcode in ("mov", "pop")}
    for ins in raw:
        if ins.opcode == "call":
            target = ins.operands[0]
            if target not in declarations and target not in labels and target not in registers:
                raise error(f"API no declarada: {target}", ins.line, ins.column)
        elif ins.opcode in ("jmp", "jz", "jnz"):
            target = ins.operands[0]
            indirect = ins.opcode == "jmp" and target in registers
            if target not in labels and not indirect:
                raise error(f"etiqueta no resuelta: {target}", ins.line, ins.column)

    if entry is None:
        entry_label = raw[0].label
    else:
        entry_label, line_no, column = entry
        if entry_label not in labels:
            raise error(f"etiqueta de entrada no resuelta: {entry_label}", line_no, column)

    return ProgramSource(source_name, tuple(declarations.values()), entry_label, tuple(raw))


def _parse_api(tokens, line_no: int, error) -> ApiSignature:
    if len(tokens) < 4:
        raise error(".api requiere: NOMBRE arity=N types=T1,T2,…", line_no, tokens[0][1])
    if len(tokens) > 4:
        raise error(f"texto sobrante: {tokens[4][0]}", line_no, tokens[4][1])
    (name, name_col), (arity_tok, arity_col), (types_tok, types_col) = tokens[1:4]
    if not _IDENT_RE.match(name):
        raise error(f"nombre de API inválido: {name!r}", line_no, name_col)
    if not arity_tok.startswith("arity=") or not arity_tok[6:].isdigit():
        raise error(f"se esperaba arity=N: {arity_tok}", line_no, arity_col)
    if not types_tok.startswith("types="):
        raise error(f"se esperaba types=…: {types_tok}", line_no, types_col)
    try:
        types = ApiSignature.parse_types(types_tok[6:])
        return ApiSignature(name=name, arity=int(arity_tok[6:]), param_types=types)
    except ValueError as e:
        # ValidationError de pydantic también es ValueError
        detail = e.errors()[0]["msg"] if isinstance(e, ValidationError) else str(e)
        raise error(f"firma inválida para {name}: {detail}", line_no, types_col) from e


def render_program(source: ProgramSource) -> str:
    """Re-emisión textual; ``parse_source`` de la salida da el mismo programa."""
    lines = [f".api {s.name} arity={s.arity} types={s.render_types()}" for s in source.declarations]
    lines.append(f".entry {source.entry}")
    lines.extend(str(ins) for ins in source.instructions)
    return "\n".join(lines) + "\n"


Valuation = Tuple[Optional[str], ...]


class _Translator:
    """Exploración de los pares (etiqueta, valuación) alcanzables."""

    def __init__(self, source: ProgramSource, register_count: int):
        self.source = source
        self.registers = source.registers
        self._check_register_file(register_count)
        self.reg_index = {name: i for i, name in enumerate(self.registers)}
        self.labels = source.labels
        self.apis = source.api_by_name

        literals: Set[StackSymbol] = set()
        returns: Dict[str, StackSymbol] = {}
        for index, ins in enumerate(source.instructions):
            if ins.opcode == "push" and ins.operands[0] not in self.reg_index:
                literals.add(StackSymbol.literal(ins.operands[0]))
            elif ins.opcode == "mov" and ins.operands[1] not in self.reg_index:
                literals.add(StackSymbol.literal(ins.operands[1]))
            elif ins.opcode == "call" and not self._is_indirect(ins.operands[0]):
                successor = self._successor(index)
                returns[successor] = StackSymbol.return_to(successor)
        self.returns = returns
        self.alphabet = frozenset(literals) | frozenset(returns.values()) | {TOP}
        self._ordered_alphabet = sorted(self.alphabet, key=lambda s: s.sort_key)

        self.points: Set[ControlPoint] = {END_POINT}
        self.rules: List[Rule] = []
        self.api_entries: Dict[ControlPoint, ApiSignature] = {}
        self._cleanups: Set[Tuple[ControlPoint, str, Valuation]] = set()
        self._seen: Set[Tuple[str, Valuation]] = set()
        self._work: deque = deque()

    def _check_register_file(self, register_count: int) -> None:
        if len(self.registers) <= register_count:
            return
        overflow = self.registers[register_count]
        for ins in self.source.instructions:
            if ins.opcode in ("mov", "pop") and ins.operands[0] == overflow:
                raise RegisterOverflowError(
                    f"demasiados registros ({len(self.registers)} > {register_count}): {overflow}",
                    self.source.name,
                    ins.line,
                    ins.column,
                )

    def _is_indirect(self, target: str) -> bool:
        return target in self.reg_index and target not in self.apis and target not in self.labels

    def _successor(self, index: int) -> str:
        if index + 1 < len(self.source.instructions):
            return self.source.instructions[index + 1].label
        return END_POINT

    def _point(self, label: str, valuation: Valuation) -> ControlPoint:
        if label == END_POINT:
            return END_POINT
        tracked = ",".join(f"{r}={v}" for r, v in zip(self.registers, valuation) if v is not None)
        return f"{label}{{{tracked}}}" if tracked else label

    def _goto(self, label: str, valuation: Valuation) -> ControlPoint:
        point = self._point(label, valuation)
        self.points.add(point)
        if label != END_POINT and (label, valuation) not in self._seen:
            self._seen.add((label, valuation))
            self._work.append((label, valuation))
        return point

    def _value(self, operand: str, valuation: Valuation) -> StackSymbol:
        if operand in self.reg_index:
            value = valuation[self.reg_index[operand]]
            return TOP if value is None else StackSymbol.literal(value)
        return StackSymbol.literal(operand)

    def _assign(self, valuation: Valuation, register: str, symbol: StackSymbol) -> Valuation:
        updated = list(valuation)
        updated[self.reg_index[register]] = symbol.name if symbol.is_literal else None
        return tuple(updated)

    def _for_all(self, source: ControlPoint, target: ControlPoint, push_top: Optional[StackSymbol]) -> None:
        """Regla comodín ⟨source, γ⟩ → ⟨target, [push_top] γ⟩ expandida sobre Γ."""
        for symbol in self._ordered_alphabet:
            push = (push_top, symbol) if push_top is not None else (symbol,)
            self.rules.append(Rule(source, symbol, target, push))

    def translate(self) -> Tuple[Pds, ApiTable, Config]:
        start = (None,) * len(self.registers)
        entry = Config(self._goto(self.source.entry, start))
        while self._work:
            label, valuation = self._work.popleft()
            self._step(label, valuation)
        pds = normalize(Pds(frozenset(self.points), self.alphabet, tuple(self.rules)))
        return pds, ApiTable(entries=self.api_entries), entry

    def _step(self, label: str, valuation: Valuation) -> None:
        index = self.labels[label]
        ins = self.source.instructions[index]
        here = self._point(label, valuation)
        successor = self._successor(index)
        op = ins.opcode

        if op == "push":
            self._for_all(here, self._goto(successor, valuation), self._value(ins.operands[0], valuation))
        elif op == "mov":
            updated = self._assign(valuation, ins.operands[0], self._value(ins.operands[1], valuation))
            self._for_all(here, self._goto(successor, updated), None)
        elif op == "pop":
            for symbol in self._ordered_alphabet:
                updated = self._assign(valuation, ins.operands[0], symbol)
                self.rules.append(Rule(here, symbol, self._goto(successor, updated), ()))
        elif op == "call":
            target = ins.operands[0]
            if target in self.apis:
                self._call_api(here, self.apis[target], successor, valuation)
            elif target in self.labels:
                self._for_all(here, self._goto(target, valuation), self.returns[successor])
            # llamada indirecta: destino desconocido, sin reglas
        elif op == "jmp":
            if ins.operands[0] in self.labels:
                self._for_all(here, self._goto(ins.operands[0], valuation), None)
        elif op in ("jz", "jnz"):
            self._for_all(here, self._goto(ins.operands[0], valuation), None)
            self._for_all(here, self._goto(successor, valuation), None)
        elif op == "ret":
            for symbol in sorted(self.returns.values(), key=lambda s: s.sort_key):
                self.rules.append(Rule(here, symbol, self._goto(symbol.target, valuation), ()))
        # halt: sin reglas

    def _call_api(self, here: ControlPoint, signature: ApiSignature, successor: str, valuation: Valuation) -> None:
        entry = "@" + self._point(signature.name, valuation)
        self.points.add(entry)
        self.api_entries[entry] = signature
        ret = self.returns[successor]
        self._for_all(here, entry, ret)

        key = (entry, successor, valuation)
        if key in self._cleanups:
            return
        self._cleanups.add(key)
        resume = self._goto(successor, valuation)
        # limpieza del lado del llamador: dirección de retorno y luego los parámetros
        chain = [f"{entry}>{successor}#{k}" for k in range(1, signature.arity + 1)]
        self.points.update(chain)
        stops = chain + [resume]
        self.rules.append(Rule(entry, ret, stops[0], ()))
        for current, following in zip(stops, stops[1:]):
            for symbol in self._ordered_alphabet:
                self.rules.append(Rule(current, symbol, following, ()))


def build_pds(source: ProgramSource, register_count: int = DEFAULT_REGISTER_COUNT) -> Tuple[Pds, ApiTable, Config]:
    """Traduce el programa a (PDS, tabla de APIs, configuración de entrada)."""
    return _Translator(source, register_count).translate()


def parse_program(text: str, source_name: str = "<input>", register_count: int = DEFAULT_REGISTER_COUNT) -> ProgramModel:
    source = parse_source(text, source_name)
    pds, api, entry = build_pds(source, register_count)
    logger.debug(
        "🧩 %s: %d puntos, %d símbolos, %d reglas, %d APIs",
        source_name, len(pds.points), len(pds.alphabet), len(pds.rules), len(api),
    )
    return ProgramModel(pds, api, entry, source_name, source)


def load_program(path: Path, register_count: int = DEFAULT_REGISTER_COUNT) -> ProgramModel:
    return parse_program(Path(path).read_text(encoding="utf-8"), str(path), register_count)
