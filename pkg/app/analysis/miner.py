"""Soporte y minería de subárboles frecuentes (MalSCDT)."""
from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

from app.analysis.trees import (
    DEFAULT_SUBTREE_CAP,
    Color,
    Scdt,
    embeds,
    enumerate_subtrees,
    leaf,
)
from app.exceptions import AnalysisError, PatternLimitError

logger = logging.getLogger(__name__)

DEFAULT_PATTERN_CAP = 100_000


@dataclass(frozen=True)
class Corpus:
    entries: Tuple[Tuple[str, FrozenSet[Scdt]], ...]

    @classmethod
    def from_entries(cls, entries: Iterable[Tuple[str, Iterable[Scdt]]]) -> "Corpus":
        return cls(tuple((name, frozenset(trees)) for name, trees in entries))

    @property
    def trees(self) -> Tuple[Scdt, ...]:
        """Multiconjunto aplanado T (el orden por archivo es determinista)."""
        return tuple(tree for _, trees in self.entries for tree in sorted(trees))

    def __len__(self) -> int:
        return sum(len(trees) for _, trees in self.entries)


@dataclass(frozen=True)
class MalScdtSet:
    patterns: Tuple[Scdt, ...]
    threshold: float
    corpus_size: int

    def __iter__(self):
        return iter(self.patterns)

    def __len__(self) -> int:
        return len(self.patterns)

    def filter_min_nodes(self, min_nodes: int) -> "MalScdtSet":
        return MalScdtSet(tuple(p for p in self.patterns if p.size >= min_nodes), self.threshold, self.corpus_size)

    def excluding(self, benign: Iterable[Scdt]) -> "MalScdtSet":
        """Quita los patrones que se incrustan en algún árbol benigno."""
        benign = list(benign)
        kept = tuple(p for p in self.patterns if not any(embeds(p, tree) for tree in benign))
        return MalScdtSet(kept, self.threshold, self.corpus_size)


def is_frequent(count: int, total: int, k: float) -> bool:
    return total > 0 and count >= k * total - 1e-9


def _check_threshold(k: float) -> None:
    if not 0 < k <= 1:
        raise AnalysisError(f"el umbral de soporte debe estar en (0, 1]: {k}")


def support(tree: Scdt, corpus: Corpus) -> float:
    trees = corpus.trees
    if not trees:
        return 0.0
    return sum(1 for candidate in trees if embeds(tree, candidate)) / len(trees)


def _extend_at(tree: Scdt, path: Tuple[int, ...], color: Color, child: Scdt) -> Scdt:
    """Agrega ``color(child)`` al nodo indicado por ``path`` y re-canonicaliza."""
    if not path:
        entries = set(tree.children) | {(color, child)}
    else:
        entries = set(tree.children)
        old_color, old_child = tree.children[path[0]]
        entries.discard((old_color, old_child))
        entries.add((old_color, _extend_at(old_child, path[1:], color, child)))
    return Scdt(tree.root, tuple(sorted(entries, key=lambda e: (e[0].sort_key, e[1].key))))


def _positions(tree: Scdt, path: Tuple[int, ...] = ()) -> List[Tuple[Tuple[int, ...], str]]:
    found = [(path, tree.root)]
    for index, (_, child) in enumerate(tree.children):
        found.extend(_positions(child, path + (index,)))
    return found


def _edge_index(trees: Sequence[Scdt]) -> Dict[str, List[Tuple[Color, str]]]:
    edges: Dict[str, Set[Tuple[Color, str]]] = defaultdict(set)
    for tree in trees:
        for current in tree.nodes():
            for color, child in current.children:
                edges[current.root].add((color, child.root))
    return {
        root: sorted(pairs, key=lambda e: (e[0].sort_key, e[1]))
        for root, pairs in edges.items()
    }


def frequent_subtrees(corpus: Corpus, k: float, max_patterns: int = DEFAULT_PATTERN_CAP) -> MalScdtSet:
    """Crecimiento de patrones por aristas hoja con poda anti-monótona.

    Cada patrón frecuente de n+1 nodos se obtiene de uno frecuente de n nodos
    agregando una hoja; la forma canónica elimina duplicados y el conjunto de
    árboles soporte del padre acota la búsqueda del hijo.
    """
    _check_threshold(k)
    trees = corpus.trees
    total = len(trees)
    if total == 0:
        return MalScdtSet((), k, 0)

    by_symbol: Dict[str, Set[int]] = defaultdict(set)
    for index, tree in enumerate(trees):
        for symbol in tree.symbols():
            by_symbol[symbol].add(index)
    level: Dict[Scdt, FrozenSet[int]] = {
        leaf(symbol): frozenset(ids)
        for symbol, ids in by_symbol.items()
        if is_frequent(len(ids), total, k)
    }
    edges = _edge_index(trees)

    found: Dict[Scdt, FrozenSet[int]] = {}
    rejected: Set[Scdt] = set()
    while level:
        found.update(level)
        if len(found) > max_patterns:
            raise PatternLimitError(
                f"el espacio de patrones excede {max_patterns}; usar un umbral de soporte mayor que {k}"
            )
        following: Dict[Scdt, FrozenSet[int]] = {}
        for pattern in sorted(level):
            for path, symbol in _positions(pattern):
                for color, child_symbol in edges.get(symbol, ()):
                    candidate = _extend_at(pattern, path, color, leaf(child_symbol))
                    if candidate.size <= pattern.size:
                        continue
                    if candidate in following or candidate in found or candidate in rejected:
                        continue
                    ids = frozenset(i for i in level[pattern] if embeds(candidate, trees[i]))
                    if is_frequent(len(ids), total, k):
                        following[candidate] = ids
                    else:
                        rejected.add(candidate)
        logger.debug("⛏️ nivel con %d patrones frecuentes", len(following))
        level = following

    return MalScdtSet(tuple(sorted(found)), k, total)


def brute_force_frequent(corpus: Corpus, k: float, cap: int = DEFAULT_SUBTREE_CAP) -> MalScdtSet:
    """Oráculo exhaustivo: enumera todos los subárboles y cuenta su soporte."""
    _check_threshold(k)
    trees = corpus.trees
    candidates: Set[Scdt] = set()
    for tree in trees:
        candidates |= enumerate_subtrees(tree, cap)
    patterns = [
        candidate
        for candidate in candidates
        if is_frequent(sum(1 for tree in trees if embeds(candidate, tree)), len(trees), k)
    ]
    return MalScdtSet(tuple(sorted(patterns)), k, len(trees))
