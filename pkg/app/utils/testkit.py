"""Oráculos y generadores con semilla para las suites de propiedades.

Las cotas por defecto mantienen cada comparación exhaustiva en milisegundos:
PDS de hasta 5 puntos, 4 símbolos y 12 reglas; árboles de hasta 6 nodos;
corpus de hasta 8 árboles.
"""
from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

from app.analysis.miner import Corpus
from app.analysis.pds import Config, MultiAutomaton, Pds, Rule, StackSymbol, enumerate_from
from app.analysis.trees import Color, Scdt, node

CORPUS_DIR = Path(__file__).resolve().parents[2] / "corpus"

TREE_SYMBOLS = ("A", "B", "C", "D")
MAX_COLOR_INDEX = 2


@dataclass(frozen=True)
class BfsResult:
    configs: FrozenSet[Config]
    truncated: bool

    def up_to(self, depth: int) -> FrozenSet[Config]:
        return frozenset(c for c in self.configs if len(c.stack) <= depth)


def bfs_configs(pds: Pds, start: Config, depth_cap: int = 8, count_cap: int = 10_000) -> BfsResult:
    """Configuraciones alcanzables desde ``start`` aplicando reglas una a una.

    No se exploran pilas más altas que ``depth_cap`` ni más de ``count_cap``
    configuraciones; si alguna cota cortó la búsqueda, ``truncated`` es True.
    """
    seen: Set[Config] = {start}
    queue = deque([start])
    truncated = False
    while queue:
        current = queue.popleft()
        for successor in pds.successors(current):
            if successor in seen:
                continue
            if len(successor.stack) > depth_cap or len(seen) >= count_cap:
                truncated = True
                continue
            seen.add(successor)
            queue.append(successor)
    return BfsResult(frozenset(seen), truncated)


def pop_summaries(pds: Pds) -> Dict[Tuple[str, StackSymbol], FrozenSet[str]]:
    """Puntos ``q`` con ⟨p, γ⟩ ⇒* ⟨q, ε⟩, por punto fijo sobre las reglas.

    Exige reglas normalizadas (push de longitud <= 2).
    """
    summary: Dict[Tuple[str, StackSymbol], Set[str]] = {
        (point, symbol): set() for point in pds.points for symbol in pds.alphabet
    }
    changed = True
    while changed:
        changed = False
        for rule in pds.rules:
            if not rule.push:
                found = {rule.target}
            elif len(rule.push) == 1:
                found = set(summary[(rule.target, rule.push[0])])
            else:
                found = set()
                for middle in summary[(rule.target, rule.push[0])]:
                    found |= summary[(middle, rule.push[1])]
            known = summary[(rule.source, rule.symbol)]
            if not found <= known:
                known |= found
                changed = True
    return {key: frozenset(value) for key, value in summary.items()}


def reachable_up_to(pds: Pds, start: Config, max_depth: int) -> FrozenSet[Config]:
    """Configuraciones alcanzables desde ``start`` con pila de altura <= ``max_depth``.

    Exacto también con pilas no acotadas: un camino hacia una configuración
    de altura <= h se puede reescribir, saltando cada subida que vuelve a
    bajar con un resumen de ``pop_summaries``, para no pasar nunca de h + 1.
    """
    ceiling = max(max_depth, len(start.stack)) + 1
    summary = pop_summaries(pds)
    seen: Set[Config] = {start}
    queue = deque([start])
    while queue:
        current = queue.popleft()
        successors = list(pds.successors(current))
        if current.stack:
            top, rest = current.stack[0], current.stack[1:]
            successors.extend(Config(q, rest) for q in sorted(summary[(current.point, top)]))
        for successor in successors:
            if len(successor.stack) <= ceiling and successor not in seen:
                seen.add(successor)
                queue.append(successor)
    return frozenset(c for c in seen if len(c.stack) <= max_depth)


def accepted_configs(ma: MultiAutomaton, max_depth: int) -> FrozenSet[Config]:
    """Configuraciones aceptadas por ``ma`` con pila de altura <= ``max_depth``."""
    found: Set[Config] = set()
    for point in sorted(ma.initial):
        for length in range(max_depth + 1):
            for word, end in enumerate_from(ma, point, length):
                if end in ma.finals:
                    found.add(Config(point, word))
    return frozenset(found)


def all_configs(pds: Pds, max_depth: int) -> List[Config]:
    """Universo de configuraciones con pila de altura <= ``max_depth``."""
    symbols = sorted(pds.alphabet, key=lambda s: s.sort_key)
    words: List[Tuple[StackSymbol, ...]] = [()]
    frontier: List[Tuple[StackSymbol, ...]] = [()]
    for _ in range(max_depth):
        frontier = [word + (symbol,) for word in frontier for symbol in symbols]
        words.extend(frontier)
    return [Config(point, word) for point in sorted(pds.points) for word in words]


class SeededGenerator:
    """Generador determinista: la misma semilla produce la misma secuencia."""

    def __init__(
        self,
        seed: int,
        max_points: int = 5,
        max_symbols: int = 4,
        max_rules: int = 12,
        max_tree_nodes: int = 6,
        max_corpus_trees: int = 8,
    ):
        self.seed = seed
        self.rng = random.Random(seed)
        self.max_points = max_points
        self.max_symbols = max_symbols
        self.max_rules = max_rules
        self.max_tree_nodes = max_tree_nodes
        self.max_corpus_trees = max_corpus_trees

    # --- árboles --------------------------------------------------------

    def gen_color(self) -> Color:
        if self.rng.random() < 0.5:
            return Color.param(self.rng.randint(1, MAX_COLOR_INDEX))
        return Color.flow(self.rng.randint(1, MAX_COLOR_INDEX), self.rng.randint(1, MAX_COLOR_INDEX))

    def gen_tree(self, max_nodes: Optional[int] = None, symbols: Sequence[str] = TREE_SYMBOLS) -> Scdt:
        """Árbol canónico de a lo sumo ``max_nodes`` nodos."""
        budget = self.rng.randint(1, max_nodes or self.max_tree_nodes)
        tree, _ = self._grow(budget, symbols)
        return tree

    def _grow(self, budget: int, symbols: Sequence[str]) -> Tuple[Scdt, int]:
        root = self.rng.choice(symbols)
        used = 1
        children = []
        while used < budget and self.rng.random() < 0.6:
            child, spent = self._grow(self.rng.randint(1, budget - used), symbols)
            children.append((self.gen_color(), child))
            used += spent
        # hijos repetidos colapsan: el tamaño real puede ser menor que ``used``
        return node(root, *children), used

    def gen_corpus(
        self,
        max_trees: Optional[int] = None,
        max_nodes: Optional[int] = None,
        symbols: Sequence[str] = TREE_SYMBOLS,
    ) -> Corpus:
        """Corpus de un árbol por archivo (así el multiconjunto conserva repetidos)."""
        count = self.rng.randint(1, max_trees or self.max_corpus_trees)
        return Corpus.from_entries((f"t{i}", [self.gen_tree(max_nodes, symbols)]) for i in range(count))

    # --- sistemas de pila -----------------------------------------------

    def gen_pds(self, acyclic: bool = False) -> Tuple[Pds, Config]:
        """PDS normalizado y la configuración inicial ⟨p0, γ0⟩.

        Con ``acyclic`` cada regla avanza a un punto de índice mayor, así el
        conjunto alcanzable es finito y la búsqueda explícita es exacta.
        """
        n_points = self.rng.randint(2, self.max_points)
        n_symbols = self.rng.randint(1, self.max_symbols)
        points = [f"p{i}" for i in range(n_points)]
        symbols = [StackSymbol.literal(f"g{i}") for i in range(n_symbols)]
        rules: Set[Rule] = set()
        for _ in range(self.rng.randint(1, self.max_rules)):
            source_index = self.rng.randrange(n_points - 1 if acyclic else n_points)
            if acyclic:
                target_index = self.rng.randrange(source_index + 1, n_points)
            else:
                target_index = self.rng.randrange(n_points)
            push = tuple(self.rng.choice(symbols) for _ in range(self.rng.choice((0, 1, 1, 2, 2))))
            rules.add(Rule(points[source_index], self.rng.choice(symbols), points[target_index], push))
        ordered = tuple(sorted(rules, key=str))
        pds = Pds(frozenset(points), frozenset(symbols), ordered)
        return pds, Config("p0", (symbols[0],))


def golden_files(kind: str, prefix: str = "") -> List[Path]:
    """Archivos ``.tasm`` versionados en ``corpus/<kind>/``."""
    return sorted(p for p in (CORPUS_DIR / kind).glob(f"{prefix}*.tasm"))


def read_labels(rows: Iterable[str]) -> List[Tuple[str, str, str]]:
    parsed = []
    for row in rows:
        if not row.strip() or row.startswith("#"):
            continue
        fields = row.split("\t")
        parsed.append((fields[0], fields[1], fields[2] if len(fields) > 2 else ""))
    return parsed
