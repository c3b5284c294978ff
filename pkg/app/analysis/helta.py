"""Autómata de árboles con aristas etiquetadas (HELTA) para detección.

Reglas inferidas desde los patrones maliciosos:

* R1 ``f(…) → q_f`` para todo símbolo (también los no vistos al aprender).
* R2 ``f(…c₁(q_t₁)…c_n(q_t_n)…) → q_t`` por cada subárbol ``t`` de un patrón;
  los hijos requeridos se asignan de forma inyectiva a hijos del nodo.
* R3 ``f(…c(q_t)…) → q_t`` para todo estado final ``q_t`` y todo símbolo ``f``,
  guardada como un esquema por final con raíz ``*``: un final alcanzado
  en un hijo sube hasta la raíz.

Los finales propagados por R3 se guardan aparte de los estados anclados en
el nodo, así R2 sólo consume estados anclados y el patrón testigo siempre se
incrusta en el árbol.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

from pydantic import ValidationError

from app.analysis.trees import Color, Scdt, bipartite_match, embeds, parse_tree, render
from app.exceptions import CorruptDatabaseError, TreeSyntaxError
from app.models.signature import SignatureDatabase

logger = logging.getLogger(__name__)

ANY_SYMBOL = "*"


@dataclass(frozen=True)
class SymbolState:
    symbol: str

    def __str__(self) -> str:
        return f"q[{self.symbol}]"


@dataclass(frozen=True)
class PatternState:
    pattern: Scdt

    def __str__(self) -> str:
        return f"q[{render(self.pattern)}]"


HeltaState = Union[SymbolState, PatternState]


class RuleKind(str, Enum):
    SYMBOL = "R1"
    PATTERN = "R2"
    PROPAGATE = "R3"


@dataclass(frozen=True)
class HeltaRule:
    kind: RuleKind
    root: str
    required: Tuple[Tuple[Optional[Color], HeltaState], ...]
    target: HeltaState

    def __str__(self) -> str:
        inner = ",".join(f"{'*' if c is None else c}({q})" for c, q in self.required)
        return f"{self.kind.value}: {self.root}({inner}) -> {self.target}"


@dataclass(frozen=True)
class Helta:
    states: FrozenSet[HeltaState]
    rules: Tuple[HeltaRule, ...]
    finals: FrozenSet[PatternState]
    symbols: FrozenSet[str]

    @cached_property
    def pattern_rules(self) -> Dict[str, Tuple[HeltaRule, ...]]:
        index: Dict[str, List[HeltaRule]] = {}
        for rule in self.rules:
            if rule.kind is RuleKind.PATTERN:
                index.setdefault(rule.root, []).append(rule)
        return {root: tuple(rules) for root, rules in index.items()}

    @property
    def patterns(self) -> Tuple[Scdt, ...]:
        return tuple(sorted(state.pattern for state in self.finals))

    def rule_counts(self) -> Dict[str, int]:
        """Reglas por tipo, con cada esquema R3 contado una vez por símbolo."""
        counts = {kind.value: 0 for kind in RuleKind}
        for rule in self.rules:
            counts[rule.kind.value] += len(self.symbols) if rule.root == ANY_SYMBOL else 1
        return counts


@dataclass(frozen=True)
class Verdict:
    malicious: bool
    pattern: Optional[Scdt] = None
    tree: Optional[Scdt] = None


def infer(patterns: Iterable[Scdt]) -> Helta:
    patterns = sorted(set(patterns))
    subtrees: Set[Scdt] = set()
    symbols: Set[str] = set()
    for pattern in patterns:
        for current in pattern.nodes():
            subtrees.add(current)
            symbols.add(current.root)

    finals = frozenset(PatternState(p) for p in patterns)
    rules: List[HeltaRule] = [HeltaRule(RuleKind.SYMBOL, f, (), SymbolState(f)) for f in sorted(symbols)]
    for subtree in sorted(subtrees):
        required = tuple((color, PatternState(child)) for color, child in subtree.children)
        rules.append(HeltaRule(RuleKind.PATTERN, subtree.root, required, PatternState(subtree)))
    # R3 como esquema con raíz comodín: una regla por final, vale para todo símbolo
    for final in sorted(finals, key=lambda s: s.pattern.key):
        rules.append(HeltaRule(RuleKind.PROPAGATE, ANY_SYMBOL, ((None, final),), final))

    states = frozenset(SymbolState(f) for f in symbols) | frozenset(PatternState(t) for t in subtrees)
    logger.debug("🤖 HELTA: %d estados, %d reglas, %d finales", len(states), len(rules), len(finals))
    return Helta(states, tuple(rules), finals, frozenset(symbols))


def _rule_applies(rule: HeltaRule, children: List[Tuple[Color, FrozenSet[HeltaState]]]) -> bool:
    candidates = []
    for color, state in rule.required:
        options = [
            index
            for index, (child_color, anchored) in enumerate(children)
            if (color is None or child_color == color) and state in anchored
        ]
        if not options:
            return False
        candidates.append(options)
    return bipartite_match(candidates, len(children))


def evaluate(h: Helta, tree: Scdt) -> Tuple[FrozenSet[HeltaState], FrozenSet[PatternState]]:
    """Evaluación de abajo hacia arriba: (estados anclados, finales alcanzados)."""
    memo: Dict[Scdt, Tuple[FrozenSet[HeltaState], FrozenSet[PatternState]]] = {}

    def visit(current: Scdt):
        if current in memo:
            return memo[current]
        results = [(color, visit(child)) for color, child in current.children]
        children = [(color, anchored) for color, (anchored, _) in results]
        anchored: Set[HeltaState] = {SymbolState(current.root)}
        for rule in h.pattern_rules.get(current.root, ()):
            if _rule_applies(rule, children):
                anchored.add(rule.target)
        reached: Set[PatternState] = {state for state in anchored if state in h.finals}
        for _, (_, child_reached) in results:
            reached |= child_reached
        memo[current] = (frozenset(anchored), frozenset(reached))
        return memo[current]

    return visit(tree)


def accepts(h: Helta, tree: Scdt) -> bool:
    return bool(evaluate(h, tree)[1])


def embedding_oracle(pattern: Scdt, tree: Scdt) -> bool:
    """Referencia independiente del autómata: ¿``pattern`` se incrusta en algún
    nodo de ``tree``?"""
    return embeds(pattern, tree)


def _best_witness(reached: Iterable[PatternState]) -> Scdt:
    return min((state.pattern for state in reached), key=lambda p: (-p.size, p.key))


def detect(h: Helta, trees: Iterable[Scdt]) -> Verdict:
    """Malicioso si algún árbol es aceptado; el testigo es el patrón más
    grande alcanzado en cualquiera de los árboles."""
    best: Optional[Tuple[Scdt, Scdt]] = None
    for tree in sorted(trees):
        reached = evaluate(h, tree)[1]
        if not reached:
            continue
        witness = _best_witness(reached)
        if best is None or (-witness.size, witness.key) < (-best[0].size, best[0].key):
            best = (witness, tree)
    if best is None:
        return Verdict(False)
    return Verdict(True, best[0], best[1])


def serialize(h: Helta, threshold: float, height: int, min_nodes: int = 1) -> str:
    database = SignatureDatabase(
        threshold=threshold,
        height=height,
        min_nodes=min_nodes,
        patterns=sorted(render(p) for p in h.patterns),
    )
    return database.model_dump_json(indent=2) + "\n"


def deserialize(text: str) -> Tuple[Helta, SignatureDatabase]:
    try:
        database = SignatureDatabase.model_validate_json(text)
    except ValidationError as e:
        raise CorruptDatabaseError(f"base de firmas corrupta: {e.errors()[0]['msg']}") from e
    patterns = []
    for line in database.patterns:
        try:
            pattern = parse_tree(line)
        except TreeSyntaxError as e:
            raise CorruptDatabaseError(f"base de firmas corrupta: {e.detail}") from e
        if render(pattern) != line:
            raise CorruptDatabaseError(f"base de firmas corrupta: patrón no canónico {line!r}")
        patterns.append(pattern)
    return infer(patterns), database


def describe(h: Helta) -> str:
    counts = h.rule_counts()
    lines = [
        f"states {len(h.states)}",
        f"finals {len(h.finals)}",
        f"symbols {len(h.symbols)}",
        "rules " + " ".join(f"{kind}={counts[kind]}" for kind in sorted(counts)),
    ]
    return "\n".join(lines) + "\n"
