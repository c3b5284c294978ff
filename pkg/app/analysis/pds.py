"""Sistemas de pila (PDS), multi-autómatas y saturación post*/pre*.

Los conjuntos regulares de configuraciones se representan con
``MultiAutomaton``: los estados iniciales son los puntos de control del PDS
y una configuración ⟨p, w⟩ se acepta si leyendo ``w`` desde ``p`` se llega a
un estado final.
"""
from __future__ import annotations

import logging
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from app.exceptions import AnalysisError

logger = logging.getLogger(__name__)

ControlPoint = str
State = str
Transition = Tuple[State, "StackSymbol", State]


class SymbolKind(str, Enum):
    LITERAL = "literal"
    RETURN = "return"
    TOP = "top"


_KIND_RANK = {SymbolKind.LITERAL: 0, SymbolKind.RETURN: 1, SymbolKind.TOP: 2}


@dataclass(frozen=True)
class StackSymbol:
    name: str
    kind: SymbolKind = SymbolKind.LITERAL
    target: Optional[ControlPoint] = None

    @classmethod
    def literal(cls, name: str) -> "StackSymbol":
        return cls(name)

    @classmethod
    def return_to(cls, point: ControlPoint) -> "StackSymbol":
        return cls(f"r:{point}", SymbolKind.RETURN, point)

    @property
    def is_top(self) -> bool:
        return self.kind is SymbolKind.TOP

    @property
    def is_literal(self) -> bool:
        return self.kind is SymbolKind.LITERAL

    @property
    def is_constant(self) -> bool:
        """Literal numérico (las direcciones de buffers son identificadores)."""
        return self.is_literal and self.name.lstrip("-").isdigit()

    @property
    def sort_key(self) -> Tuple[int, str]:
        return (_KIND_RANK[self.kind], self.name)

    def __str__(self) -> str:
        return self.name


TOP = StackSymbol("?", SymbolKind.TOP)


@dataclass(frozen=True)
class Rule:
    """⟨source, symbol⟩ → ⟨target, push⟩, con ``push[0]`` en el tope."""

    source: ControlPoint
    symbol: StackSymbol
    target: ControlPoint
    push: Tuple[StackSymbol, ...] = ()

    def __str__(self) -> str:
        word = " ".join(s.name for s in self.push) or "ε"
        return f"<{self.source}, {self.symbol}> -> <{self.target}, {word}>"


@dataclass(frozen=True)
class Config:
    point: ControlPoint
    stack: Tuple[StackSymbol, ...] = ()

    @property
    def sort_key(self):
        return (self.point, tuple(s.sort_key for s in self.stack))

    def __str__(self) -> str:
        word = " ".join(s.name for s in self.stack) or "ε"
        return f"<{self.point}, {word}>"


@dataclass(frozen=True)
class Pds:
    points: FrozenSet[ControlPoint]
    alphabet: FrozenSet[StackSymbol]
    rules: Tuple[Rule, ...]

    def __post_init__(self):
        for rule in self.rules:
            if rule.source not in self.points or rule.target not in self.points:
                raise AnalysisError(f"regla con punto de control no declarado: {rule}")
            if rule.symbol not in self.alphabet or any(s not in self.alphabet for s in rule.push):
                raise AnalysisError(f"regla con símbolo fuera del alfabeto: {rule}")

    @cached_property
    def rules_by_head(self) -> Dict[Tuple[ControlPoint, StackSymbol], Tuple[Rule, ...]]:
        index: Dict[Tuple[ControlPoint, StackSymbol], List[Rule]] = defaultdict(list)
        for rule in self.rules:
            index[(rule.source, rule.symbol)].append(rule)
        return {head: tuple(rules) for head, rules in index.items()}

    @property
    def is_normalized(self) -> bool:
        return all(len(rule.push) <= 2 for rule in self.rules)

    def successors(self, config: Config) -> List[Config]:
        """Sucesores inmediatos de una configuración (⇒ en un paso)."""
        if not config.stack:
            return []
        head, rest = config.stack[0], config.stack[1:]
        return [Config(rule.target, rule.push + rest) for rule in self.rules_by_head.get((config.point, head), ())]


def normalize(pds: Pds) -> Pds:
    """Parte los push de longitud > 2 en cadenas con puntos de control nuevos.

    ⟨p, γ⟩ → ⟨q, a₁…a_k⟩ se convierte en ⟨p, γ⟩ → ⟨f₁, a_{k-1} a_k⟩,
    ⟨f₁, a_{k-1}⟩ → ⟨f₂, a_{k-2} a_{k-1}⟩, …, ⟨f_{k-2}, a₂⟩ → ⟨q, a₁ a₂⟩.
    """
    if pds.is_normalized:
        return pds
    points = set(pds.points)
    rules: List[Rule] = []
    for index, rule in enumerate(pds.rules):
        word = rule.push
        if len(word) <= 2:
            rules.append(rule)
            continue
        k = len(word)
        fresh = [f"{rule.source}~{index}~{i}" for i in range(1, k - 1)]
        points.update(fresh)
        rules.append(Rule(rule.source, rule.symbol, fresh[0], (word[k - 2], word[k - 1])))
        for i in range(1, k - 2):
            # fresh[i-1] tiene a_{k-i} en el tope
            rules.append(Rule(fresh[i - 1], word[k - 1 - i], fresh[i], (word[k - 2 - i], word[k - 1 - i])))
        rules.append(Rule(fresh[-1], word[1], rule.target, (word[0], word[1])))
    return Pds(frozenset(points), pds.alphabet, tuple(rules))


@dataclass(frozen=True)
class MultiAutomaton:
    initial: FrozenSet[ControlPoint]
    states: FrozenSet[State]
    transitions: FrozenSet[Transition]
    finals: FrozenSet[State]

    def __post_init__(self):
        if not self.initial <= self.states:
            raise AnalysisError("los puntos de control deben ser estados del autómata")
        if not self.finals <= self.states:
            raise AnalysisError("estado final no declarado")
        for source, _, target in self.transitions:
            if source not in self.states or target not in self.states:
                raise AnalysisError(f"transición con estado no declarado: {source} -> {target}")

    @classmethod
    def empty(cls, points: Iterable[ControlPoint]) -> "MultiAutomaton":
        points = frozenset(points)
        return cls(points, points, frozenset(), frozenset())

    @classmethod
    def from_configs(
        cls,
        points: Iterable[ControlPoint],
        configs: Iterable[Config],
        floor: Optional[StackSymbol] = None,
    ) -> "MultiAutomaton":
        """Autómata que acepta ``configs``; con ``floor`` acepta además
        cualquier cantidad de ``floor`` debajo de cada pila."""
        points = frozenset(points)
        states: Set[State] = set(points)
        transitions: Set[Transition] = set()
        finals: Set[State] = set()
        counter = 0
        for config in sorted(set(configs), key=lambda c: c.sort_key):
            if config.point not in points:
                raise AnalysisError(f"punto de control desconocido: {config.point}")
            current = config.point
            for symbol in config.stack:
                nxt = f"${counter}"
                counter += 1
                states.add(nxt)
                transitions.add((current, symbol, nxt))
                current = nxt
            finals.add(current)
            if floor is not None:
                sink = f"${counter}"
                counter += 1
                states.add(sink)
                finals.add(sink)
                transitions.add((current, floor, sink))
                transitions.add((sink, floor, sink))
        return cls(points, frozenset(states), frozenset(transitions), frozenset(finals))

    @cached_property
    def successors(self) -> Dict[Tuple[State, StackSymbol], FrozenSet[State]]:
        index: Dict[Tuple[State, StackSymbol], Set[State]] = defaultdict(set)
        for source, symbol, target in self.transitions:
            index[(source, symbol)].add(target)
        return {key: frozenset(value) for key, value in index.items()}

    @cached_property
    def outgoing(self) -> Dict[State, Tuple[Tuple[StackSymbol, State], ...]]:
        index: Dict[State, List[Tuple[StackSymbol, State]]] = defaultdict(list)
        for source, symbol, target in self.transitions:
            index[source].append((symbol, target))
        return {
            state: tuple(sorted(edges, key=lambda e: (e[0].sort_key, e[1])))
            for state, edges in index.items()
        }

    @cached_property
    def coaccessible(self) -> FrozenSet[State]:
        """Estados desde los que se alcanza un estado final."""
        backward: Dict[State, Set[State]] = defaultdict(set)
        for source, _, target in self.transitions:
            backward[target].add(source)
        seen = set(self.finals)
        queue = deque(self.finals)
        while queue:
            state = queue.popleft()
            for previous in backward.get(state, ()):
                if previous not in seen:
                    seen.add(previous)
                    queue.append(previous)
        return frozenset(seen)


def accepts(ma: MultiAutomaton, config: Config) -> bool:
    if config.point not in ma.initial:
        raise AnalysisError(f"punto de control desconocido: {config.point}")
    current = {config.point}
    for symbol in config.stack:
        current = {target for state in current for target in ma.successors.get((state, symbol), ())}
        if not current:
            return False
    return bool(current & ma.finals)


def enumerate_from(ma: MultiAutomaton, point: ControlPoint, exact_len: int) -> List[Tuple[Tuple[StackSymbol, ...], State]]:
    """Palabras de longitud exacta legibles desde ``point`` con su estado final."""
    if exact_len < 0:
        raise AnalysisError("exact_len debe ser >= 0")
    frontier: Set[Tuple[Tuple[StackSymbol, ...], State]] = {((), point)}
    for _ in range(exact_len):
        frontier = {
            (word + (symbol,), target)
            for word, state in frontier
            for symbol, target in ma.outgoing.get(state, ())
        }
    return sorted(frontier, key=lambda item: (tuple(s.sort_key for s in item[0]), item[1]))


def _mid_state(point: ControlPoint, symbol: StackSymbol) -> State:
    # repr entre comillas: inyectivo aunque punto o símbolo contengan separadores
    return f"<{point!r}|{symbol.kind.value}|{symbol.name!r}>"


def _check_inputs(pds: Pds, seed: MultiAutomaton) -> None:
    if not pds.is_normalized:
        raise AnalysisError("el PDS tiene reglas con push de longitud > 2; normalizar primero")
    if seed.initial != pds.points:
        raise AnalysisError("los estados iniciales del autómata deben ser los puntos de control del PDS")


def _detach_initial_states(ma: MultiAutomaton) -> MultiAutomaton:
    """Redirige las transiciones que entran a estados iniciales hacia copias.

    La saturación asume que ningún estado inicial tiene transiciones de
    entrada; la copia ``p'`` conserva el lenguaje aceptado desde ``p``.
    """
    incoming = {target for _, _, target in ma.transitions if target in ma.initial}
    if not incoming:
        return ma
    copy = {point: f"{point}'" for point in incoming}
    redirected = {(source, symbol, copy.get(target, target)) for source, symbol, target in ma.transitions}
    redirected |= {
        (copy[source], symbol, copy.get(target, target))
        for source, symbol, target in ma.transitions
        if source in copy
    }
    finals = set(ma.finals) | {copy[point] for point in incoming if point in ma.finals}
    return MultiAutomaton(
        ma.initial,
        ma.states | frozenset(copy.values()),
        frozenset(redirected),
        frozenset(finals),
    )


def post_star(pds: Pds, seed: MultiAutomaton) -> MultiAutomaton:
    """Saturación hacia adelante: acepta post*(Conf(seed))."""
    _check_inputs(pds, seed)
    seed = _detach_initial_states(seed)

    states: Set[State] = set(seed.states)
    finals: Set[State] = set(seed.finals)
    rel: Set[Tuple[State, Optional[StackSymbol], State]] = set()
    out_edges: Dict[State, Set[Tuple[StackSymbol, State]]] = defaultdict(set)
    eps_into: Dict[State, Set[State]] = defaultdict(set)

    def record(transition) -> None:
        rel.add(transition)
        source, symbol, target = transition
        if symbol is None:
            eps_into[target].add(source)
        else:
            out_edges[source].add((symbol, target))

    work: deque = deque()
    for transition in seed.transitions:
        if transition[0] in seed.initial:
            work.append(transition)
        else:
            record(transition)

    while work:
        transition = work.popleft()
        if transition in rel:
            continue
        record(transition)
        source, symbol, target = transition
        if symbol is None:
            for next_symbol, next_target in list(out_edges.get(target, ())):
                work.append((source, next_symbol, next_target))
            if target in finals:
                finals.add(source)
            continue
        for rule in pds.rules_by_head.get((source, symbol), ()):
            if not rule.push:
                work.append((rule.target, None, target))
            elif len(rule.push) == 1:
                work.append((rule.target, rule.push[0], target))
            else:
                mid = _mid_state(rule.target, rule.push[0])
                states.add(mid)
                work.append((rule.target, rule.push[0], mid))
                inner = (mid, rule.push[1], target)
                if inner not in rel:
                    record(inner)
                    for origin in list(eps_into.get(mid, ())):
                        work.append((origin, rule.push[1], target))

    transitions = frozenset(t for t in rel if t[1] is not None)
    logger.debug("post*: %d transiciones, %d estados", len(transitions), len(states))
    return MultiAutomaton(seed.initial, frozenset(states), transitions, frozenset(finals))


def pre_star(pds: Pds, seed: MultiAutomaton) -> MultiAutomaton:
    """Saturación hacia atrás: acepta pre*(Conf(seed))."""
    _check_inputs(pds, seed)
    seed = _detach_initial_states(seed)

    rel: Set[Transition] = set()
    succ: Dict[Tuple[State, StackSymbol], Set[State]] = defaultdict(set)
    by_first: Dict[Tuple[ControlPoint, StackSymbol], List[Rule]] = defaultdict(list)
    derived: Dict[Tuple[State, StackSymbol], Set[Tuple[ControlPoint, StackSymbol]]] = defaultdict(set)

    work: deque = deque(seed.transitions)
    for rule in pds.rules:
        if rule.push:
            by_first[(rule.target, rule.push[0])].append(rule)
        else:
            work.append((rule.source, rule.symbol, rule.target))

    while work:
        transition = work.popleft()
        if transition in rel:
            continue
        rel.add(transition)
        source, symbol, target = transition
        succ[(source, symbol)].add(target)
        for rule in by_first.get((source, symbol), ()):
            if len(rule.push) == 1:
                work.append((rule.source, rule.symbol, target))
            else:
                key = (target, rule.push[1])
                derived[key].add((rule.source, rule.symbol))
                for end in list(succ.get(key, ())):
                    work.append((rule.source, rule.symbol, end))
        for origin, origin_symbol in list(derived.get((source, symbol), ())):
            work.append((origin, origin_symbol, target))

    return MultiAutomaton(seed.initial, seed.states, frozenset(rel), seed.finals)


def dump_pds(pds: Pds) -> str:
    lines = [f"points {len(pds.points)} symbols {len(pds.alphabet)} rules {len(pds.rules)}"]
    lines.extend(sorted(str(rule) for rule in pds.rules))
    return "\n".join(lines) + "\n"


def dump_automaton(ma: MultiAutomaton) -> str:
    lines = [f"states {len(ma.states)} transitions {len(ma.transitions)}"]
    lines.extend(sorted(f"{s} --{sym.name}--> {t}" for s, sym, t in ma.transitions))
    lines.append("finals " + " ".join(sorted(ma.finals)))
    return "\n".join(lines) + "\n"
