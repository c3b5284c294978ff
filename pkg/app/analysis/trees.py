"""Árboles de dependencias de llamadas (SCDT) en forma canónica.

Un ``Scdt`` es un término con aristas coloreadas: cada hijo es un par
``(Color, Scdt)``. En forma canónica los hijos están ordenados de forma
estrictamente creciente por ``(color, subárbol)`` y sin repeticiones.

Texto: ``Root(color(child),…)`` con colores ``n`` (parámetro) y ``n>m``
(flujo del parámetro de salida n al parámetro de entrada m).
"""
from __future__ import annotations

import random
import re
from bisect import bisect_left
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from itertools import product
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

import networkx as nx
from networkx.algorithms import bipartite

from app.exceptions import SubtreeLimitError, TreeSyntaxError

DEFAULT_SUBTREE_CAP = 1_000_000


class Ordering(IntEnum):
    LT = -1
    EQ = 0
    GT = 1


@dataclass(frozen=True)
class Color:
    source: int
    target: Optional[int] = None

    def __post_init__(self):
        if self.source < 1 or (self.target is not None and self.target < 1):
            raise ValueError(f"índices de color deben ser >= 1: {self.source}, {self.target}")

    @classmethod
    def param(cls, n: int) -> "Color":
        return cls(n)

    @classmethod
    def flow(cls, n: int, m: int) -> "Color":
        return cls(n, m)

    @property
    def is_flow(self) -> bool:
        return self.target is not None

    @property
    def sort_key(self) -> Tuple[int, int, int]:
        if self.target is None:
            return (0, self.source, 0)
        return (1, self.source, self.target)

    def __str__(self) -> str:
        return str(self.source) if self.target is None else f"{self.source}>{self.target}"


Child = Tuple[Color, "Scdt"]


@dataclass(frozen=True)
class Scdt:
    root: str
    children: Tuple[Child, ...] = ()

    @cached_property
    def key(self) -> tuple:
        return (self.root, tuple((color.sort_key, child.key) for color, child in self.children))

    @cached_property
    def size(self) -> int:
        return 1 + sum(child.size for _, child in self.children)

    @cached_property
    def height(self) -> int:
        return 1 + max((child.height for _, child in self.children), default=0)

    @cached_property
    def _hash(self) -> int:
        return hash(self.key)

    def __hash__(self) -> int:
        return self._hash

    def __lt__(self, other: "Scdt") -> bool:
        return self.key < other.key

    def __str__(self) -> str:
        return render(self)

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def nodes(self) -> Iterator["Scdt"]:
        yield self
        for _, child in self.children:
            yield from child.nodes()

    def symbols(self) -> Set[str]:
        return {node.root for node in self.nodes()}


def leaf(symbol: str) -> Scdt:
    return Scdt(symbol)


def node(root: str, *children: Child) -> Scdt:
    """Construye un nodo ya canónico a partir de hijos en cualquier orden."""
    return _sorted_node(root, children)


def _child_key(child: Child):
    return (child[0].sort_key, child[1].key)


def _sorted_node(root: str, children) -> Scdt:
    unique = {(color, tree) for color, tree in children}
    return Scdt(root, tuple(sorted(unique, key=_child_key)))


def order(a: Scdt, b: Scdt) -> Ordering:
    if a.key < b.key:
        return Ordering.LT
    if a.key > b.key:
        return Ordering.GT
    return Ordering.EQ


def canonicalize(tree: Scdt) -> Scdt:
    return _sorted_node(tree.root, ((color, canonicalize(child)) for color, child in tree.children))


def is_canonical(tree: Scdt) -> bool:
    keys = [_child_key(child) for child in tree.children]
    if any(keys[i] >= keys[i + 1] for i in range(len(keys) - 1)):
        return False
    return all(is_canonical(child) for _, child in tree.children)


def insert_subtree(color: Color, tree: Scdt, into: Scdt) -> Scdt:
    entry = (color, tree)
    keys = [_child_key(child) for child in into.children]
    key = _child_key(entry)
    index = bisect_left(keys, key)
    if index < len(keys) and keys[index] == key:
        return into
    children = into.children[:index] + (entry,) + into.children[index:]
    return Scdt(into.root, children)


def subtree_of(tree: Scdt, hay: Scdt) -> bool:
    """Contención exacta de nodo (semántica de entorno con un hueco)."""
    if tree.size > hay.size:
        return False
    return any(candidate == tree for candidate in hay.nodes())


def embeds_at(pattern: Scdt, host: Scdt) -> bool:
    """``pattern`` se incrusta anclado en la raíz de ``host``.

    Las etiquetas deben coincidir y los hijos del patrón se asignan de forma
    inyectiva a hijos de ``host`` con el mismo color donde se incrustan
    recursivamente (emparejamiento bipartito máximo).
    """
    if pattern.root != host.root or len(pattern.children) > len(host.children):
        return False
    if not pattern.children:
        return True
    candidates: List[List[int]] = []
    for color, sub in pattern.children:
        options = [
            index
            for index, (host_color, host_sub) in enumerate(host.children)
            if host_color == color and embeds_at(sub, host_sub)
        ]
        if not options:
            return False
        candidates.append(options)
    return bipartite_match(candidates, len(host.children))


def bipartite_match(candidates: Sequence[Sequence[int]], right_size: int) -> bool:
    """True si cada elemento izquierdo puede emparejarse con uno derecho distinto.

    ``candidates[i]`` son los índices derechos admisibles para el izquierdo ``i``;
    el emparejamiento es completo si su tamaño iguala ``len(candidates)``.
    """
    if len(candidates) > right_size:
        return False
    if not candidates:
        return True
    left = [("L", i) for i in range(len(candidates))]
    graph = nx.Graph()
    graph.add_nodes_from(left, bipartite=0)
    graph.add_nodes_from((("R", j) for j in range(right_size)), bipartite=1)
    graph.add_edges_from(
        (("L", i), ("R", j)) for i, options in enumerate(candidates) for j in options
    )
    matching = bipartite.maximum_matching(graph, top_nodes=left)
    return all(vertex in matching for vertex in left)


def embeds(pattern: Scdt, tree: Scdt) -> bool:
    """Existe un nodo de ``tree`` donde ``pattern`` se incrusta."""
    return any(embeds_at(pattern, candidate) for candidate in tree.nodes())


def _rooted_pattern_count(tree: Scdt) -> int:
    total = 1
    for _, child in tree.children:
        total *= 1 + _rooted_pattern_count(child)
    return total


def rooted_patterns(tree: Scdt) -> Set[Scdt]:
    """Patrones conexos anclados en la raíz (subconjuntos de hijos, recursivo)."""
    options = [[None] + [(color, p) for p in rooted_patterns(child)] for color, child in tree.children]
    return {_sorted_node(tree.root, [entry for entry in combo if entry is not None]) for combo in product(*options)}


def enumerate_subtrees(tree: Scdt, cap: int = DEFAULT_SUBTREE_CAP) -> Set[Scdt]:
    total = sum(_rooted_pattern_count(candidate) for candidate in tree.nodes())
    if total > cap:
        raise SubtreeLimitError(f"la enumeración de subárboles excede el límite ({total} > {cap})")
    result: Set[Scdt] = set()
    memo: Dict[Scdt, Set[Scdt]] = {}
    for candidate in tree.nodes():
        if candidate not in memo:
            memo[candidate] = rooted_patterns(candidate)
        result |= memo[candidate]
    return result


def prune(tree: Scdt, depth: int) -> Scdt:
    """Corta las cadenas de flujo a ``depth`` aristas de flujo; las hojas de
    parámetro se conservan en cada nivel."""
    children = []
    for color, child in tree.children:
        if color.is_flow:
            if depth > 0:
                children.append((color, prune(child, depth - 1)))
        else:
            children.append((color, child))
    return _sorted_node(tree.root, children)


# --- Ω ---------------------------------------------------------------------

SAMPLE_SYMBOLS = ("A", "B", "ExitProcess", "Sleep", "0", "1", "buf")


def _random_color(rng: random.Random, max_index: int = 3) -> Color:
    if rng.random() < 0.5:
        return Color.param(rng.randint(1, max_index))
    return Color.flow(rng.randint(1, max_index), rng.randint(1, max_index))


def _random_tree(rng: random.Random, budget: int, symbols: Sequence[str]) -> Tuple[Scdt, int]:
    """Árbol aleatorio con a lo sumo ``budget`` nodos; devuelve (árbol, usados)."""
    root = rng.choice(symbols)
    used = 1
    children = []
    while used < budget and rng.random() < 0.4:
        child, spent = _random_tree(rng, budget - used, symbols)
        children.append((_random_color(rng), child))
        used += spent
    return _sorted_node(root, children), used


def omega_sample(tree: Scdt, seed: int, budget: int, symbols: Sequence[str] = SAMPLE_SYMBOLS) -> Scdt:
    """Elemento aleatorio de Ω(tree) envuelto en un entorno aleatorio.

    ``budget`` acota la cantidad de nodos agregados; con 0 devuelve ``tree``.
    """
    if budget < 0:
        raise ValueError("el presupuesto de nodos no puede ser negativo")
    rng = random.Random(seed)
    remaining = [budget]

    def spend(limit: int) -> Optional[Scdt]:
        if remaining[0] <= 0:
            return None
        extra, used = _random_tree(rng, min(limit, remaining[0]), symbols)
        remaining[0] -= used
        return extra

    def extend(current: Scdt) -> Scdt:
        children = [(color, extend(child)) for color, child in current.children]
        if len(set(children)) < len(children):
            # dos hijos del patrón quedaron iguales: se pierde la inyectividad
            children = list(current.children)
        while remaining[0] > 0 and rng.random() < 0.3:
            extra = spend(3)
            if extra is None:
                break
            children.append((_random_color(rng), extra))
        return _sorted_node(current.root, children)

    result = extend(tree)
    while remaining[0] > 0 and rng.random() < 0.5:
        remaining[0] -= 1
        siblings = [(_random_color(rng), result)]
        extra = spend(3)
        if extra is not None:
            siblings.append((_random_color(rng), extra))
        result = _sorted_node(rng.choice(symbols), siblings)
    return result


# --- texto -----------------------------------------------------------------

_SYMBOL_RE = re.compile(r"[A-Za-z0-9_?.:$@\-]+")
_COLOR_RE = re.compile(r"(\d+)(?:>(\d+))?")


def render(tree: Scdt) -> str:
    if not tree.children:
        return tree.root
    inner = ",".join(f"{color}({render(child)})" for color, child in tree.children)
    return f"{tree.root}({inner})"


def parse_tree(text: str) -> Scdt:
    """Inversa de ``render``; el resultado se canonicaliza."""
    text = text.strip()
    position = 0

    def fail(message: str):
        raise TreeSyntaxError(message, text, position)

    def expect(char: str) -> None:
        nonlocal position
        if position >= len(text) or text[position] != char:
            fail(f"se esperaba {char!r}")
        position += 1

    def parse_node() -> Scdt:
        nonlocal position
        match = _SYMBOL_RE.match(text, position)
        if not match:
            fail("se esperaba un símbolo")
        position = match.end()
        children = []
        if position < len(text) and text[position] == "(":
            position += 1
            while True:
                color_match = _COLOR_RE.match(text, position)
                if not color_match:
                    fail("se esperaba un color")
                position = color_match.end()
                source = int(color_match.group(1))
                target = color_match.group(2)
                try:
                    color = Color(source, int(target) if target else None)
                except ValueError as e:
                    fail(str(e))
                expect("(")
                children.append((color, parse_node()))
                expect(")")
                if position < len(text) and text[position] == ",":
                    position += 1
                    continue
                expect(")")
                break
        return _sorted_node(match.group(0), children)

    result = parse_node()
    if position != len(text):
        fail("texto sobrante")
    return result
