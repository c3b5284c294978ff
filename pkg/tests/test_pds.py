import random
from itertools import product

import pytest

from app.analysis.pds import (
    TOP,
    Config,
    MultiAutomaton,
    Pds,
    Rule,
    StackSymbol,
    accepts,
    dump_automaton,
    dump_pds,
    enumerate_from,
    normalize,
    post_star,
    pre_star,
)
from app.exceptions import AnalysisError
from app.utils.testkit import SeededGenerator, accepted_configs, all_configs, bfs_configs, reachable_up_to

A = StackSymbol.literal("a")
B = StackSymbol.literal("b")
C = StackSymbol.literal("c")
G = StackSymbol.literal("g")


def _pds(points, rules, alphabet=(A, B, C, G)):
    return Pds(frozenset(points), frozenset(alphabet), tuple(rules))


def _post(pds, *configs, floor=None):
    return post_star(pds, MultiAutomaton.from_configs(pds.points, configs, floor=floor))


def test_successors_apply_matching_rules():
    pds = _pds({"p", "q"}, [Rule("p", A, "q", (B, A)), Rule("p", B, "q", ())])
    assert pds.successors(Config("p", (A, C))) == [Config("q", (B, A, C))]
    assert pds.successors(Config("p", ())) == []


def test_rule_outside_alphabet_is_rejected():
    with pytest.raises(AnalysisError):
        Pds(frozenset({"p"}), frozenset({A}), (Rule("p", B, "p", ()),))


def test_normalize_splits_long_pushes():
    pds = _pds({"p", "q"}, [Rule("p", G, "q", (A, B, C))])
    normalized = normalize(pds)
    assert normalized.is_normalized
    reached = bfs_configs(normalized, Config("p", (G,))).configs
    assert {c for c in reached if c.point in {"p", "q"}} == {Config("p", (G,)), Config("q", (A, B, C))}


def test_from_configs_and_accepts():
    ma = MultiAutomaton.from_configs({"p", "q"}, [Config("p", (A, B)), Config("q", ())])
    assert accepts(ma, Config("p", (A, B)))
    assert accepts(ma, Config("q", ()))
    assert not accepts(ma, Config("p", (A,)))
    assert not accepts(ma, Config("q", (A,)))


def test_floor_accepts_any_number_of_floor_symbols():
    ma = MultiAutomaton.from_configs({"p"}, [Config("p", (A,))], floor=TOP)
    assert accepts(ma, Config("p", (A,)))
    assert accepts(ma, Config("p", (A, TOP, TOP, TOP)))
    assert not accepts(ma, Config("p", (TOP, A)))


def test_accepts_unknown_point_raises():
    ma = MultiAutomaton.empty({"p"})
    with pytest.raises(AnalysisError):
        accepts(ma, Config("zz", ()))
    with pytest.raises(AnalysisError):
        MultiAutomaton.from_configs({"p"}, [Config("zz", ())])


def test_enumerate_from_exact_length():
    ma = MultiAutomaton.from_configs({"p"}, [Config("p", (A, B)), Config("p", (A,))])
    words = [word for word, _ in enumerate_from(ma, "p", 2)]
    assert words == [(A, B)]


def test_post_star_pop_chain():
    pds = _pds({"p0", "p1", "p2"}, [Rule("p0", A, "p1", ()), Rule("p1", A, "p2", ())])
    post = _post(pds, Config("p0", (A, A)))
    assert accepted_configs(post, 3) == {Config("p0", (A, A)), Config("p1", (A,)), Config("p2", ())}


def test_post_star_push_then_pop_through_epsilon():
    pds = _pds(
        {"p", "q", "r"},
        [Rule("p", A, "q", (B, A)), Rule("q", B, "r", ()), Rule("r", A, "p", (C,))],
    )
    post = _post(pds, Config("p", (A,)))
    assert accepted_configs(post, 3) == {
        Config("p", (A,)),
        Config("q", (B, A)),
        Config("r", (A,)),
        Config("p", (C,)),
    }


def test_post_star_with_floor_reaches_under_the_known_stack():
    pds = _pds({"p", "q"}, [Rule("p", A, "q", ()), Rule("q", TOP, "q", (B, TOP))], alphabet=(A, B, TOP))
    post = _post(pds, Config("p", (A,)), floor=TOP)
    assert accepts(post, Config("q", (B, TOP)))
    assert accepts(post, Config("q", (B, TOP, TOP)))
    assert not accepts(post, Config("q", (B,)))


def test_post_star_rejects_unnormalized_rules():
    pds = _pds({"p"}, [Rule("p", A, "p", (A, B, C))])
    with pytest.raises(AnalysisError):
        _post(pds, Config("p", (A,)))


def test_saturation_requires_matching_points():
    pds = _pds({"p"}, [])
    with pytest.raises(AnalysisError):
        post_star(pds, MultiAutomaton.empty({"p", "q"}))


@pytest.mark.parametrize("seed", range(200))
def test_post_star_matches_explicit_search(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    assert accepted_configs(_post(pds, start), 4) == reachable_up_to(pds, start, 4)


@pytest.mark.parametrize("seed", range(30))
def test_summary_search_agrees_with_plain_search_on_acyclic_systems(seed):
    pds, start = SeededGenerator(seed).gen_pds(acyclic=True)
    explored = bfs_configs(pds, start)
    assert not explored.truncated
    assert reachable_up_to(pds, start, 8) == explored.configs



@pytest.mark.parametrize("seed", range(100))
def test_post_star_matches_explicit_search_on_acyclic_systems(seed):
    pds, start = SeededGenerator(seed).gen_pds(acyclic=True)
    explored = bfs_configs(pds, start)
    assert not explored.truncated
    assert explored.configs == accepted_configs(_post(pds, start), 8)


@pytest.mark.parametrize("seed", range(50))
def test_pre_star_matches_backward_search(seed):
    pds, start = SeededGenerator(seed).gen_pds(acyclic=True)
    targets = sorted(bfs_configs(pds, start).configs, key=lambda c: c.sort_key)
    target = targets[seed % len(targets)]
    pre = pre_star(pds, MultiAutomaton.from_configs(pds.points, [target]))
    for config in all_configs(pds, 2):
        reaches = target in bfs_configs(pds, config).configs
        assert accepts(pre, config) == reaches, str(config)


@pytest.mark.parametrize("seed", range(50))
def test_pre_star_of_post_star_contains_the_seed(seed):
    pds, start = SeededGenerator(seed).gen_pds(acyclic=True)
    post = _post(pds, start)
    assert accepts(pre_star(pds, post), start)


def test_dumps_are_sorted_and_stable():
    pds = _pds({"p", "q"}, [Rule("q", B, "p", ()), Rule("p", A, "q", (B, A))])
    text = dump_pds(pds)
    assert text.splitlines()[1:] == sorted(text.splitlines()[1:])
    post = _post(pds, Config("p", (A,)))
    assert dump_automaton(post) == dump_automaton(_post(pds, Config("p", (A,))))
    assert dump_automaton(post).splitlines()[-1].startswith("finals ")


def test_mid_states_do_not_collide_on_dotted_names():
    ab = StackSymbol.literal("a.b")
    pds = _pds(
        {"s", "p.a", "p"},
        [Rule("s", G, "p.a", (B, G)), Rule("s", G, "p", (ab, C))],
        alphabet=(B, C, G, ab),
    )
    post = _post(pds, Config("s", (G,)))
    assert accepted_configs(post, 3) == {
        Config("s", (G,)),
        Config("p.a", (B, G)),
        Config("p", (ab, C)),
    }
    assert not accepts(post, Config("p.a", (B, C)))
    assert not accepts(post, Config("p", (ab, G)))


@pytest.mark.parametrize("seed", range(50))
def test_post_star_is_idempotent(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    post = _post(pds, start)
    assert accepted_configs(post_star(pds, post), 4) == accepted_configs(post, 4)


@pytest.mark.parametrize("seed", range(50))
def test_post_star_is_monotone_in_the_seed(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    extra = random.Random(seed).choice(all_configs(pds, 2))
    smaller = accepted_configs(_post(pds, start), 4)
    larger = accepted_configs(_post(pds, start, extra), 4)
    assert smaller <= larger
    assert extra in larger


@pytest.mark.parametrize("seed", range(30))
def test_post_star_and_pre_star_are_dual(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    post = _post(pds, start)
    for config in all_configs(pds, 2):
        pre = pre_star(pds, MultiAutomaton.from_configs(pds.points, [config]))
        assert accepts(post, config) == accepts(pre, start), str(config)


@pytest.mark.parametrize("seed", range(20))
def test_empty_seed_saturates_to_nothing(seed):
    pds, _ = SeededGenerator(seed).gen_pds()
    empty = MultiAutomaton.empty(pds.points)
    assert accepted_configs(post_star(pds, empty), 4) == frozenset()
    assert accepted_configs(pre_star(pds, empty), 4) == frozenset()


@pytest.mark.parametrize("seed", range(50))
def test_saturation_ignores_rule_order(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    rules = list(pds.rules)
    random.Random(seed).shuffle(rules)
    shuffled = Pds(pds.points, pds.alphabet, tuple(reversed(rules)))
    assert _post(shuffled, start) == _post(pds, start)
    assert dump_automaton(_post(shuffled, start)) == dump_automaton(_post(pds, start))
    seed_ma = MultiAutomaton.from_configs(pds.points, [start])
    assert pre_star(shuffled, seed_ma) == pre_star(pds, seed_ma)


def _path_exists(ma, state, word):
    if not word:
        return state in ma.finals
    return any(
        _path_exists(ma, target, word[1:])
        for source, symbol, target in ma.transitions
        if source == state and symbol == word[0]
    )


def _path_ends(ma, state, word):
    if not word:
        return {state}
    ends = set()
    for source, symbol, target in ma.transitions:
        if source == state and symbol == word[0]:
            ends |= _path_ends(ma, target, word[1:])
    return ends


@pytest.mark.parametrize("seed", range(40))
def test_accepts_agrees_with_path_search(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    post = _post(pds, start)
    rng = random.Random(seed)
    universe = all_configs(pds, 3)
    for config in rng.sample(universe, min(50, len(universe))):
        assert accepts(post, config) == _path_exists(post, config.point, config.stack), str(config)


@pytest.mark.parametrize("seed", range(30))
def test_enumerate_from_agrees_with_brute_force(seed):
    pds, start = SeededGenerator(seed).gen_pds()
    post = _post(pds, start)
    symbols = sorted(pds.alphabet, key=lambda s: s.sort_key)
    for point in sorted(pds.points):
        for length in range(4):
            expected = {
                (word, end)
                for word in product(symbols, repeat=length)
                for end in _path_ends(post, point, word)
            }
            listed = enumerate_from(post, point, length)
            assert set(listed) == expected
            assert len(listed) == len(expected)
