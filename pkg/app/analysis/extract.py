"""Operador de recorte Ψ y extracción de SCDTs.

Una configuración recortada ⟨p, w⟩ tiene ``p`` en P_API y |w| = ρ_ar(p)+1:
``w[0]`` es la dirección de retorno y ``w[n]`` el parámetro n.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

from app.analysis.frontend import ProgramModel
from app.analysis.pds import TOP, Config, MultiAutomaton, StackSymbol, enumerate_from, post_star
from app.analysis.trees import Color, Scdt, insert_subtree, leaf
from app.exceptions import AnalysisError, TreeSizeLimitError
from app.models.api import ApiTable, ParamType
from app.models.extraction import ExtractionConfig, ValueLeaves, ValueMatching

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrimmedConfigs:
    configs: Tuple[Config, ...]
    source_name: str = ""

    def __iter__(self):
        return iter(self.configs)

    def __len__(self) -> int:
        return len(self.configs)

    def __contains__(self, config: Config) -> bool:
        return config in self.configs


def trim(ma: MultiAutomaton, api: ApiTable, source_name: str = "") -> TrimmedConfigs:
    found: Set[Config] = set()
    live = ma.coaccessible
    for point in api:
        if point not in ma.initial:
            continue
        for word, end in enumerate_from(ma, point, api.arity(point) + 1):
            if end in live:
                found.add(Config(point, word))
    return TrimmedConfigs(tuple(sorted(found, key=lambda c: c.sort_key)), source_name)


def seed_automaton(model: ProgramModel, config: Config, stack_floor: bool) -> MultiAutomaton:
    """Autómata semilla para ⟨p, w⟩ (con piso ⊤* si ``stack_floor``)."""
    return MultiAutomaton.from_configs(model.pds.points, [config], floor=TOP if stack_floor else None)


def is_leaf_value(symbol: StackSymbol, policy: ValueLeaves) -> bool:
    if policy is ValueLeaves.CONSTANTS:
        return symbol.is_constant
    if policy is ValueLeaves.LITERALS:
        return symbol.is_literal
    return symbol.is_literal or symbol.is_top


def values_flow(source: StackSymbol, target: StackSymbol, matching: ValueMatching) -> bool:
    """Predicado de igualdad de valores entre parámetro de salida y de entrada.

    Las direcciones de retorno nunca son datos.
    """
    if not (source.is_literal or source.is_top) or not (target.is_literal or target.is_top):
        return False
    if source.is_literal and target.is_literal:
        return source == target
    return matching is ValueMatching.PERMISSIVE


class Extractor:
    """Construcción de SCDTs sobre un modelo, con post* memoizado por origen."""

    def __init__(self, model: ProgramModel, config: ExtractionConfig):
        self.model = model
        self.config = config
        self._reachable: Dict[Config, TrimmedConfigs] = {}
        self._built: Dict[Tuple[Config, int], Scdt] = {}

    def post_star_from(self, config: Config) -> MultiAutomaton:
        seed = seed_automaton(self.model, config, self.config.stack_floor)
        return post_star(self.model.pds, seed)

    def reachable_calls(self, config: Config) -> TrimmedConfigs:
        if config not in self._reachable:
            self._reachable[config] = trim(self.post_star_from(config), self.model.api, self.model.source_name)
        return self._reachable[config]

    def origins(self) -> TrimmedConfigs:
        return self.reachable_calls(self.model.entry)

    def parameters(self, config: Config) -> Tuple[StackSymbol, ...]:
        return config.stack[1:1 + self.model.api.arity(config.point)]

    def flows(self, origin: Config, destination: Config) -> List[Tuple[int, int]]:
        api = self.model.api
        pairs = []
        for n, out_value in enumerate(self.parameters(origin), start=1):
            if ParamType.OUT not in api.types(origin.point, n):
                continue
            for m, in_value in enumerate(self.parameters(destination), start=1):
                if ParamType.IN not in api.types(destination.point, m):
                    continue
                if values_flow(out_value, in_value, self.config.value_matching):
                    pairs.append((n, m))
        return pairs

    def build(self, origin: Config, height: int) -> Scdt:
        api = self.model.api
        if origin.point not in api or len(origin.stack) != api.arity(origin.point) + 1:
            raise AnalysisError(f"el origen no es una configuración recortada: {origin}")
        key = (origin, height)
        if key in self._built:
            return self._built[key]

        tree = leaf(api.name(origin.point))
        for n, value in enumerate(self.parameters(origin), start=1):
            if is_leaf_value(value, self.config.value_leaves):
                tree = insert_subtree(Color.param(n), leaf(value.name), tree)
        if height > 0:
            for destination in self.reachable_calls(origin):
                if destination == origin:
                    continue
                pairs = self.flows(origin, destination)
                if not pairs:
                    continue
                subtree = self.build(destination, height - 1)
                for n, m in pairs:
                    tree = insert_subtree(Color.flow(n, m), subtree, tree)
                    if tree.size > self.config.max_nodes:
                        raise TreeSizeLimitError(
                            f"{self.model.source_name}: el árbol supera {self.config.max_nodes} nodos "
                            f"(origen {origin}); reducir la altura"
                        )
        self._built[key] = tree
        return tree

    def extract(self) -> FrozenSet[Scdt]:
        return frozenset(self.build(origin, self.config.height) for origin in self.origins())

    def edge_witnessed(self, origin: Config, destination: Config, n: int, m: int) -> bool:
        """Re-verifica una arista de flujo reproduciendo post* desde el origen."""
        ma = self.post_star_from(origin)
        accepted = trim(ma, self.model.api)
        return destination in accepted and destination != origin and (n, m) in self.flows(origin, destination)


def extract_scdts(model: ProgramModel, config: Optional[ExtractionConfig] = None) -> FrozenSet[Scdt]:
    config = config or ExtractionConfig()
    trees = Extractor(model, config).extract()
    logger.debug("🌳 %s: %d árboles (h=%d, %s)", model.source_name, len(trees), config.height, config.value_matching.value)
    return trees


def build_scdt(origin: Config, height: int, model: ProgramModel, config: Optional[ExtractionConfig] = None) -> Scdt:
    return Extractor(model, config or ExtractionConfig()).build(origin, height)
