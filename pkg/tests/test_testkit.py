import pytest

from app.analysis.pds import Config, Pds, Rule, StackSymbol
from app.analysis.trees import is_canonical
from app.utils.testkit import (
    CORPUS_DIR,
    SeededGenerator,
    bfs_configs,
    golden_files,
    pop_summaries,
    reachable_up_to,
    read_labels,
)

G = StackSymbol.literal("g")


def test_bfs_without_applicable_rules_returns_start():
    pds = Pds(frozenset({"p"}), frozenset({G}), ())
    result = bfs_configs(pds, Config("p", (G,)))
    assert result.configs == {Config("p", (G,))}
    assert not result.truncated


def test_bfs_follows_a_pop_chain():
    pds = Pds(frozenset({"p", "q", "r"}), frozenset({G}), (Rule("p", G, "q", ()), Rule("q", G, "r", ())))
    result = bfs_configs(pds, Config("p", (G, G)))
    assert result.configs == {Config("p", (G, G)), Config("q", (G,)), Config("r", ())}


def test_bfs_reports_truncation_of_growing_stacks():
    pds = Pds(frozenset({"p"}), frozenset({G}), (Rule("p", G, "p", (G, G)),))
    result = bfs_configs(pds, Config("p", (G,)), depth_cap=3)
    assert result.truncated
    assert len(result.configs) == 3
    assert len(result.up_to(2)) == 2


def test_same_seed_same_artifacts():
    first, second = SeededGenerator(7), SeededGenerator(7)
    assert [first.gen_tree() for _ in range(20)] == [second.gen_tree() for _ in range(20)]
    assert first.gen_corpus() == second.gen_corpus()
    assert first.gen_pds() == second.gen_pds()


def test_single_node_bound_gives_a_leaf():
    generator = SeededGenerator(3)
    assert all(generator.gen_tree(max_nodes=1).is_leaf for _ in range(50))


def test_generated_trees_are_canonical_and_bounded():
    generator = SeededGenerator(11)
    for _ in range(1000):
        tree = generator.gen_tree()
        assert is_canonical(tree)
        assert tree.size <= 6


@pytest.mark.parametrize("acyclic", [False, True])
def test_generated_systems_respect_bounds(acyclic):
    for seed in range(100):
        pds, start = SeededGenerator(seed).gen_pds(acyclic=acyclic)
        assert pds.is_normalized
        assert len(pds.points) <= 5 and len(pds.alphabet) <= 4 and len(pds.rules) <= 12
        assert start.point == "p0" and len(start.stack) == 1
        if acyclic:
            assert all(int(rule.target[1:]) > int(rule.source[1:]) for rule in pds.rules)


def test_generated_corpora_respect_bounds():
    for seed in range(50):
        corpus = SeededGenerator(seed).gen_corpus()
        assert 1 <= len(corpus) <= 8


def test_golden_corpus_layout():
    assert len(golden_files("malicious", "train_")) == 6
    assert len(golden_files("malicious", "heldout_")) == 10
    assert len(golden_files("benign")) == 10
    rows = read_labels((CORPUS_DIR / "labels.tsv").read_text(encoding="utf-8").splitlines())
    assert len(rows) == 26
    assert all((CORPUS_DIR / path).is_file() for path, _, _ in rows)
    assert {label for _, label, _ in rows} == {"malicious", "benign"}


def test_pop_summaries_follow_push_then_pop():
    a, b = StackSymbol.literal("a"), StackSymbol.literal("b")
    pds = Pds(
        frozenset({"p", "q", "r", "s"}),
        frozenset({G, a, b}),
        (Rule("p", G, "q", (a, b)), Rule("q", a, "r", ()), Rule("r", b, "s", ())),
    )
    summary = pop_summaries(pds)
    assert summary[("p", G)] == {"s"}
    assert summary[("q", a)] == {"r"}
    assert summary[("q", b)] == frozenset()
    assert reachable_up_to(pds, Config("p", (G,)), 0) == {Config("s", ())}


def test_reachable_up_to_is_exact_on_growing_stacks():
    pds = Pds(frozenset({"p", "q"}), frozenset({G}), (Rule("p", G, "p", (G, G)), Rule("p", G, "q", ())))
    assert reachable_up_to(pds, Config("p", (G,)), 2) == {
        Config("p", (G,)),
        Config("p", (G, G)),
        Config("q", ()),
        Config("q", (G,)),
        Config("q", (G, G)),
    }
